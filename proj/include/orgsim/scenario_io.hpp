#pragma once

#include <cstdint>
#include <optional>
#include <random>
#include <set>
#include <string>
#include <string_view>
#include <utility>
#include <variant>
#include <vector>

#include "orgsim/error.hpp"
#include "orgsim/org_model.hpp"
#include "orgsim/protocols.hpp"
#include "orgsim/systemic.hpp"

namespace orgsim::scenario {

inline constexpr std::string_view kFormat = "orgsim-scenario/1";

struct KindWeight {
  std::string kind;
  double probability = 0.0;

  bool operator==(const KindWeight&) const = default;
};

// Seeded Bernoulli condition source: every alive node, every tick.
struct ConditionGenerator {
  double rate = 0.0;
  std::vector<KindWeight> kinds;
  Tick deadline_offset = 1;
  std::vector<org::OrgId> orgs;  // organizations where conditions fire; empty = all
  std::optional<Tick> until;     // no firing at or after this tick

  bool operator==(const ConditionGenerator&) const = default;
};

using ConditionSource = std::variant<std::vector<protocols::Condition>, ConditionGenerator>;

struct FailureSpec {
  org::OrgId org;
  org::NodeId node;
  Tick at = 0;
  std::optional<Tick> recover_at;

  bool operator==(const FailureSpec&) const = default;
};

// Defaults for a run; the command line may override mode and seed.
struct RunDefaults {
  protocols::Mode mode = protocols::Mode::Fso;
  Tick horizon = 100;
  std::uint64_t seed = 0;
  Tick meeting_period = 1;
  Tick tenure = 1;
  std::set<std::string> confined_roles;

  bool operator==(const RunDefaults&) const = default;
};

struct ScenarioSpec {
  std::string name;
  std::vector<org::Organization> organizations;
  std::vector<protocols::TreatmentProtocol> protocol_library;
  std::vector<systemic::ForceFactor> static_force_factors;
  systemic::QoEWeights qoe_weights;
  ConditionSource condition_source = std::vector<protocols::Condition>{};
  std::vector<FailureSpec> failures;
  RunDefaults run;

  bool operator==(const ScenarioSpec&) const = default;
};

struct Diagnostic {
  std::string location;  // JSON pointer, or "line L, column C" for syntax errors
  std::string message;

  std::string to_string() const { return location + ": " + message; }
};

class ScenarioError : public Error {
 public:
  explicit ScenarioError(std::vector<Diagnostic> diagnostics);

  const std::vector<Diagnostic>& diagnostics() const noexcept { return diagnostics_; }

 private:
  std::vector<Diagnostic> diagnostics_;
};

// Parses and validates a scenario document. Unknown fields, dangling
// references, duplicate protocol kinds and broken topologies are all
// reported together in one ScenarioError.
ScenarioSpec parse_scenario(std::string_view text);

// Canonical JSON; parse_scenario(serialize_scenario(s)) == s.
std::string serialize_scenario(const ScenarioSpec& spec);

// FNV-1a of the canonical serialization, as 16 hex digits.
std::string scenario_digest(const ScenarioSpec& spec);

// Node liveness at `tick` implied by the scheduled failures.
bool scheduled_alive(const ScenarioSpec& spec, std::string_view org, std::string_view node, Tick tick);

// Pure function of (spec, seed, horizon). For every tick below the horizon
// and every alive node (organization order, then ascending node id) one
// uniform draw decides whether a condition fires; a second draw picks its
// kind. Throws Error("no-generator") if the spec lists conditions explicitly.
std::vector<protocols::Condition> generate_conditions(const ScenarioSpec& spec, std::uint64_t seed, Tick horizon);

// Explicit conditions or generated ones, ordered by (fired_at, listing order).
std::vector<protocols::Condition> condition_stream(const ScenarioSpec& spec, std::uint64_t seed, Tick horizon);

// Uniform draws from a 64-bit Mersenne Twister, with conversions fixed here
// rather than left to the standard library's distributions.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  double uniform01() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }
  std::uint64_t below(std::uint64_t n);  // n >= 1
  bool chance(double p) { return uniform01() < p; }

 private:
  std::mt19937_64 engine_;
};

struct RandomScenarioParams {
  int organizations = 1;
  int min_nodes = 3;
  int max_nodes = 15;
  int min_actors = 3;
  int max_actors = 20;
  int capability_pool = 4;
  int protocols = 2;
  int max_roles = 2;
  int max_role_count = 2;
  int conditions = 8;
  Tick horizon = 40;
  Tick max_deadline_offset = 12;
  Tick max_son_duration = 6;
  protocols::Mode mode = protocols::Mode::Fso;
};

// A valid random scenario with explicit conditions. Node ids are zero-padded
// so lexical order matches creation order.
ScenarioSpec random_scenario(const RandomScenarioParams& params, std::uint64_t seed);

}  // namespace orgsim::scenario
