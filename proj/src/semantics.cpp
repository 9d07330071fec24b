#include "orgsim/semantics.hpp"

#include <algorithm>
#include <tuple>

#include "orgsim/error.hpp"

namespace orgsim::semantics {

bool qualifies(const org::Actor& actor, const RoleSpec& role) {
  return actor.systemic_class >= role.min_class &&
         std::includes(actor.capabilities.begin(), actor.capabilities.end(),
                       role.required_capabilities.begin(), role.required_capabilities.end());
}

bool matches(const org::Actor& actor, const RoleSpec& role) {
  return actor.free() && qualifies(actor, role);
}

std::vector<MatchResult> rank_candidates(std::span<const Candidate> candidates, const RoleSpec& role) {
  std::vector<MatchResult> out;
  out.reserve(candidates.size());
  for (const auto& c : candidates) {
    if (c.actor == nullptr || !matches(*c.actor, role)) {
      throw Error("unmatched-candidate", c.actor ? c.actor->id + " for " + role.name : role.name);
    }
    out.push_back({c.actor->id, role.name, systemic::mismatch(c.actor->systemic_class, role.min_class),
                   c.hop_distance, c.actor->home_node});
  }
  std::sort(out.begin(), out.end(), [](const MatchResult& a, const MatchResult& b) {
    return std::tie(a.mismatch, a.hop_distance, a.actor) < std::tie(b.mismatch, b.hop_distance, b.actor);
  });
  return out;
}

}  // namespace orgsim::semantics
