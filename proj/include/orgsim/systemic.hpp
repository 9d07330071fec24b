#pragma once

#include <compare>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace orgsim::systemic {

// Boulding's ladder of system complexity.
enum class Level : int {
  Framework = 1,
  Clockwork = 2,
  Thermostat = 3,
  Cell = 4,
  Plant = 5,
  Animal = 6,
  Human = 7,
  SocialOrganization = 8,
  Transcendental = 9,
};

class SystemicClass {
 public:
  constexpr SystemicClass() = default;
  constexpr SystemicClass(Level level) : level_(static_cast<int>(level)) {}  // NOLINT(implicit)
  // Throws Error("bad-class") outside 1..9.
  explicit SystemicClass(int level);

  constexpr int level() const noexcept { return level_; }
  std::string_view name() const;

  friend constexpr auto operator<=>(SystemicClass, SystemicClass) = default;

 private:
  int level_ = 1;
};

// Demotion distance of an actor placed in a role. Throws Error("ineligible")
// when the actor sits below the role's minimum class.
int mismatch(SystemicClass actor_class, SystemicClass role_min_class);

enum class ForceSign { Centripetal, Centrifugal };

std::string_view to_string(ForceSign sign);

struct ForceFactor {
  std::string name;
  ForceSign sign = ForceSign::Centripetal;
  double magnitude = 0.0;

  bool operator==(const ForceFactor&) const = default;
};

struct QoEWeights {
  double mismatch = 1.0;
  double conflict = 1.0;
  double failure = 1.0;
  double success = 1.0;

  bool operator==(const QoEWeights&) const = default;
};

// Run-derived contributions to the score. All non-negative.
struct QoEInputs {
  double mismatch_penalty = 0.0;
  double conflict_penalty = 0.0;
  double failure_penalty = 0.0;
  double success_bonus = 0.0;
};

struct QoEScore {
  double static_sum = 0.0;
  double mismatch_penalty = 0.0;
  double conflict_penalty = 0.0;
  double failure_penalty = 0.0;
  double success_bonus = 0.0;
  double total = 0.0;
  QoEWeights weights;
};

// Centripetal magnitudes minus centrifugal magnitudes.
double qoe_sum(std::span<const ForceFactor> factors);

// total = static_sum - w_m*mismatch - w_c*conflict - w_f*failure + w_s*success,
// evaluated left to right. Throws Error("bad-weight") on a negative weight and
// Error("bad-penalty") on a negative penalty or bonus.
QoEScore qoe_report(std::span<const ForceFactor> static_factors, const QoEInputs& inputs,
                    const QoEWeights& weights);

using ScoredCandidate = std::pair<std::string, QoEScore>;

// The `capacity` best candidates by total, ties to the lower identifier.
// Throws Error("bad-capacity") when capacity < 1.
std::set<std::string> select_for_existence(std::span<const ScoredCandidate> candidates,
                                           int capacity);

}  // namespace orgsim::systemic
