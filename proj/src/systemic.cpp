#include "orgsim/systemic.hpp"

#include <algorithm>
#include <array>

#include "orgsim/error.hpp"

namespace orgsim::systemic {

namespace {

constexpr std::array<std::string_view, 9> kLevelNames = {
    "Framework", "Clockwork", "Thermostat", "Cell",         "Plant",
    "Animal",    "Human",     "SocialOrganization", "Transcendental",
};

void require_non_negative(double value, const char* code, const char* what) {
  if (!(value >= 0.0)) throw Error(code, std::string(what) + " must be >= 0");
}

}  // namespace

SystemicClass::SystemicClass(int level) : level_(level) {
  if (level < 1 || level > 9) {
    throw Error("bad-class", "systemic class " + std::to_string(level) + " outside 1..9");
  }
}

std::string_view SystemicClass::name() const { return kLevelNames[static_cast<std::size_t>(level_ - 1)]; }

int mismatch(SystemicClass actor_class, SystemicClass role_min_class) {
  if (actor_class < role_min_class) {
    throw Error("ineligible", std::string(actor_class.name()) + " below " +
                                  std::string(role_min_class.name()));
  }
  return actor_class.level() - role_min_class.level();
}

std::string_view to_string(ForceSign sign) {
  return sign == ForceSign::Centripetal ? "centripetal" : "centrifugal";
}

double qoe_sum(std::span<const ForceFactor> factors) {
  double centripetal = 0.0;
  double centrifugal = 0.0;
  for (const auto& f : factors) {
    (f.sign == ForceSign::Centripetal ? centripetal : centrifugal) += f.magnitude;
  }
  return centripetal - centrifugal;
}

QoEScore qoe_report(std::span<const ForceFactor> static_factors, const QoEInputs& inputs,
                    const QoEWeights& weights) {
  require_non_negative(weights.mismatch, "bad-weight", "w_mismatch");
  require_non_negative(weights.conflict, "bad-weight", "w_conflict");
  require_non_negative(weights.failure, "bad-weight", "w_failure");
  require_non_negative(weights.success, "bad-weight", "w_success");
  require_non_negative(inputs.mismatch_penalty, "bad-penalty", "mismatch penalty");
  require_non_negative(inputs.conflict_penalty, "bad-penalty", "conflict penalty");
  require_non_negative(inputs.failure_penalty, "bad-penalty", "failure penalty");
  require_non_negative(inputs.success_bonus, "bad-penalty", "success bonus");

  QoEScore score;
  score.static_sum = qoe_sum(static_factors);
  score.mismatch_penalty = inputs.mismatch_penalty;
  score.conflict_penalty = inputs.conflict_penalty;
  score.failure_penalty = inputs.failure_penalty;
  score.success_bonus = inputs.success_bonus;
  score.weights = weights;
  score.total = score.static_sum - weights.mismatch * score.mismatch_penalty -
                weights.conflict * score.conflict_penalty -
                weights.failure * score.failure_penalty + weights.success * score.success_bonus;
  return score;
}

std::set<std::string> select_for_existence(std::span<const ScoredCandidate> candidates,
                                           int capacity) {
  if (capacity < 1) throw Error("bad-capacity", "capacity must be >= 1");

  std::vector<const ScoredCandidate*> order;
  order.reserve(candidates.size());
  for (const auto& c : candidates) order.push_back(&c);
  std::sort(order.begin(), order.end(), [](const ScoredCandidate* a, const ScoredCandidate* b) {
    if (a->second.total != b->second.total) return a->second.total > b->second.total;
    return a->first < b->first;
  });

  std::set<std::string> selected;
  for (std::size_t i = 0; i < order.size() && i < static_cast<std::size_t>(capacity); ++i) {
    selected.insert(order[i]->first);
  }
  return selected;
}

}  // namespace orgsim::systemic
