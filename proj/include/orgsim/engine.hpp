#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "orgsim/events.hpp"
#include "orgsim/protocols.hpp"
#include "orgsim/scenario_io.hpp"

namespace orgsim::engine {

struct RunConfig {
  protocols::Mode mode = protocols::Mode::Fso;
  Tick horizon = 100;
  std::uint64_t seed = 0;
  Tick meeting_period = 1;  // sociocracy
  Tick tenure = 1;          // sociocracy
  std::set<std::string> confined_roles;  // fso

  static RunConfig from(const scenario::ScenarioSpec& spec);
  // Throws Error("bad-config") when horizon, period or tenure is below 1.
  void validate() const;
};

struct Event {
  Tick tick = 0;
  std::uint64_t seq = 0;
  EventKind kind = EventKind::ConditionFired;
  Json payload;
};

struct Trace {
  std::vector<Event> events;
  std::string scenario_digest;
  std::uint64_t seed = 0;
  protocols::Mode mode = protocols::Mode::Fso;
  Tick horizon = 0;
};

// {"tick":..,"seq":..,"kind":..,"data":{..}} with no whitespace.
std::string canonical_line(const Event& event);

// One canonical line per event, each terminated by '\n'.
std::string serialize_trace(const Trace& trace);

// FNV-1a 64 over serialize_trace(), 16 lowercase hex digits. The empty trace
// hashes to the FNV offset basis, "cbf29ce484222325".
std::string trace_hash(const Trace& trace);

inline constexpr std::string_view kEmptyTraceHash = "cbf29ce484222325";

// Work items in the engine queue.
struct FailNode {
  org::OrgId org;
  org::NodeId node;
};
struct RecoverNode {
  org::OrgId org;
  org::NodeId node;
};
struct HoldMeeting {
  std::size_t circle = 0;
};
struct FireCondition {
  protocols::Condition condition;
};
struct EscalationStep {
  std::size_t condition = 0;
  std::size_t role = 0;
};
struct ForwardStep {
  std::size_t condition = 0;
  std::size_t role = 0;
};
struct DissolveSon {
  std::size_t son = 0;
};

using Action = std::variant<FailNode, RecoverNode, HoldMeeting, FireCondition, EscalationStep, ForwardStep, DissolveSon>;

class Simulator final : private EventSink {
 public:
  // Loads organizations, failures, meetings and the condition stream.
  Simulator(const scenario::ScenarioSpec& spec, RunConfig config);

  // Enqueues `action` after everything already queued at `tick`.
  // Throws Error("causality") for a tick before the current one.
  void schedule(Tick tick, Action action);

  // Node down on [at, recover_at). Throws Error("no-such-node").
  void inject_failure(const org::OrgId& org, const org::NodeId& node, Tick at, std::optional<Tick> recover_at);

  // Processes every queued action below the horizon, then closes the run at
  // the horizon: in-flight conditions fail, active SONs dissolve.
  // Throws Error("already-run") on a second call.
  Trace run();

  Tick now() const { return now_; }
  const protocols::World& world() const { return world_; }
  const RunConfig& config() const { return config_; }

 private:
  struct InFlight {
    protocols::Condition condition;
    const protocols::TreatmentProtocol* protocol = nullptr;
    std::vector<protocols::Assignment> assignments;
    std::vector<std::optional<protocols::RoleException>> exceptions;  // by role index
    int open_roles = 0;
    bool done = false;
  };

  struct ActiveSon {
    protocols::SocialOverlayNetwork son;
    bool active = true;
  };

  enum class RequestKind { Local, Step, Forward };

  struct Request {
    RequestKind kind = RequestKind::Local;
    std::size_t condition = 0;
    std::size_t role = 0;
    std::map<org::ActorId, std::string> targets;  // snapshot pick -> role, at batch start
  };

  void emit(EventKind kind, Json payload) override;

  void dispatch(Action& action, std::vector<Request>& batch);
  void flush(std::vector<Request>& batch);
  std::map<org::ActorId, std::string> snapshot_targets(const Request& request) const;
  void execute(const Request& request);

  void execute_local(InFlight& c, std::size_t index);
  void execute_step(InFlight& c, std::size_t index, std::size_t role);
  void execute_forward(InFlight& c, std::size_t index, std::size_t role);
  void role_filled(InFlight& c, std::size_t index, std::size_t role);
  void complete(InFlight& c);
  void fail(InFlight& c, std::string_view reason, Json detail = Json::object());
  bool past_deadline(InFlight& c, std::size_t role);
  void finalize();

  scenario::ScenarioSpec spec_;
  RunConfig config_;
  protocols::World world_;
  std::unique_ptr<protocols::RuleEngine> rules_;
  std::map<std::pair<Tick, std::uint64_t>, Action> queue_;
  std::uint64_t next_action_ = 0;
  std::vector<InFlight> conditions_;
  std::vector<ActiveSon> sons_;
  Trace trace_;
  Tick now_ = 0;
  bool ran_ = false;
};

// Simulator(spec, config).run().
Trace run(const scenario::ScenarioSpec& spec, const RunConfig& config);

}  // namespace orgsim::engine
