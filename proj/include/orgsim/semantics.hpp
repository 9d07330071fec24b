#pragma once

#include <set>
#include <span>
#include <string>
#include <vector>

#include "orgsim/org_model.hpp"
#include "orgsim/systemic.hpp"

namespace orgsim::semantics {

struct RoleSpec {
  std::string name;
  std::set<std::string> required_capabilities;
  systemic::SystemicClass min_class;
  int count = 1;

  bool operator==(const RoleSpec&) const = default;
};

struct MatchResult {
  org::ActorId actor;
  std::string role;
  int mismatch = 0;
  int hop_distance = 0;
  org::NodeId node;  // the actor's home node

  bool operator==(const MatchResult&) const = default;
};

struct Candidate {
  const org::Actor* actor = nullptr;
  int hop_distance = 0;
};

// Capabilities and class suffice, availability ignored.
bool qualifies(const org::Actor& actor, const RoleSpec& role);

// qualifies() and the actor is free.
bool matches(const org::Actor& actor, const RoleSpec& role);

// Ascending (mismatch, hop_distance, actor id). Throws
// Error("unmatched-candidate") if any candidate fails matches().
std::vector<MatchResult> rank_candidates(std::span<const Candidate> candidates, const RoleSpec& role);

}  // namespace orgsim::semantics
