#include "orgsim/engine.hpp"

#include <algorithm>

#include "orgsim/error.hpp"
#include "orgsim/hash.hpp"

namespace orgsim::engine {

using protocols::Assignment;
using protocols::EscalationStatus;
using protocols::RoleException;

namespace {

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};

Json node_event(const org::OrgId& org, const org::NodeId& node) {
  Json p;
  p["org"] = org;
  p["node"] = node;
  return p;
}

}  // namespace

RunConfig RunConfig::from(const scenario::ScenarioSpec& spec) {
  RunConfig c;
  c.mode = spec.run.mode;
  c.horizon = spec.run.horizon;
  c.seed = spec.run.seed;
  c.meeting_period = spec.run.meeting_period;
  c.tenure = spec.run.tenure;
  c.confined_roles = spec.run.confined_roles;
  return c;
}

void RunConfig::validate() const {
  if (horizon < 1) throw Error("bad-config", "horizon must be >= 1");
  if (meeting_period < 1) throw Error("bad-config", "meeting_period must be >= 1");
  if (tenure < 1) throw Error("bad-config", "tenure must be >= 1");
}

std::string canonical_line(const Event& event) {
  Json line;
  line["tick"] = event.tick;
  line["seq"] = event.seq;
  line["kind"] = to_string(event.kind);
  line["data"] = event.payload;
  return line.dump();
}

std::string serialize_trace(const Trace& trace) {
  std::string out;
  for (const auto& e : trace.events) {
    out += canonical_line(e);
    out += '\n';
  }
  return out;
}

std::string trace_hash(const Trace& trace) {
  std::uint64_t h = kFnvOffset;
  for (const auto& e : trace.events) {
    h = fnv1a64(canonical_line(e), h);
    h = fnv1a64("\n", h);
  }
  return hex64(h);
}

Simulator::Simulator(const scenario::ScenarioSpec& spec, RunConfig config)
    : spec_(spec), config_(std::move(config)) {
  config_.validate();
  world_ = protocols::World::build(spec_.organizations);
  rules_ = protocols::make_rule_engine(config_.mode, {config_.confined_roles});

  trace_.scenario_digest = scenario::scenario_digest(spec_);
  trace_.seed = config_.seed;
  trace_.mode = config_.mode;
  trace_.horizon = config_.horizon;

  for (const auto& f : spec_.failures) {
    if (world_.org(f.org).find_node(f.node) == nullptr) throw Error("no-such-node", f.org + "/" + f.node);
    schedule(f.at, FailNode{f.org, f.node});
  }
  for (const auto& f : spec_.failures) {
    if (f.recover_at) schedule(*f.recover_at, RecoverNode{f.org, f.node});
  }
  if (rules_->holds_meetings()) {
    for (Tick t = 0; t < config_.horizon; t += config_.meeting_period) {
      for (std::size_t i = 0; i < world_.circles.size(); ++i) schedule(t, HoldMeeting{i});
    }
  }
  for (auto& c : scenario::condition_stream(spec_, config_.seed, config_.horizon)) {
    if (c.fired_at >= config_.horizon) continue;
    const Tick at = c.fired_at;
    schedule(at, FireCondition{std::move(c)});
  }
}

void Simulator::schedule(Tick tick, Action action) {
  if (tick < now_) {
    throw Error("causality", "tick " + std::to_string(tick) + " is before " + std::to_string(now_));
  }
  queue_.emplace(std::pair{tick, next_action_++}, std::move(action));
}

void Simulator::inject_failure(const org::OrgId& org, const org::NodeId& node, Tick at,
                               std::optional<Tick> recover_at) {
  if (world_.org(org).find_node(node) == nullptr) throw Error("no-such-node", org + "/" + node);
  if (recover_at && *recover_at <= at) throw Error("bad-recovery", "recover_at must follow at");
  schedule(at, FailNode{org, node});
  if (recover_at) schedule(*recover_at, RecoverNode{org, node});
}

void Simulator::emit(EventKind kind, Json payload) {
  trace_.events.push_back({now_, trace_.events.size(), kind, std::move(payload)});
}

Trace Simulator::run() {
  if (ran_) throw Error("already-run", "a simulator runs once");
  ran_ = true;
  world_.open_bubble(protocols::BubbleSource::RootPersona, "root-persona",
                     world_.orgs.empty() ? std::string() : world_.orgs.front().root, 0);

  std::vector<Request> batch;
  while (!queue_.empty()) {
    const Tick tick = queue_.begin()->first.first;
    if (tick >= config_.horizon) break;
    now_ = tick;
    // Actions scheduled while this tick runs land behind it in the queue.
    while (!queue_.empty() && queue_.begin()->first.first == now_) {
      auto node = queue_.extract(queue_.begin());
      dispatch(node.mapped(), batch);
    }
    flush(batch);
  }
  finalize();
  return std::move(trace_);
}

void Simulator::dispatch(Action& action, std::vector<Request>& batch) {
  std::visit(overloaded{
                 [&](FailNode& a) {
                   flush(batch);
                   world_.org(a.org).node(a.node).alive = false;
                   emit(EventKind::NodeFailed, node_event(a.org, a.node));
                 },
                 [&](RecoverNode& a) {
                   flush(batch);
                   world_.org(a.org).node(a.node).alive = true;
                   emit(EventKind::NodeRecovered, node_event(a.org, a.node));
                 },
                 [&](HoldMeeting& a) {
                   flush(batch);
                   protocols::hold_meeting(world_, world_.circles.at(a.circle), now_, config_.meeting_period,
                                           config_.tenure, *this);
                 },
                 [&](DissolveSon& a) {
                   flush(batch);
                   auto& s = sons_.at(a.son);
                   if (!s.active) return;
                   s.active = false;
                   protocols::dissolve_son(world_, s.son, now_, *this);
                 },
                 [&](FireCondition& a) {
                   const std::size_t index = conditions_.size();
                   conditions_.push_back({});
                   auto& c = conditions_.back();
                   c.condition = std::move(a.condition);
                   Json p;
                   p["condition"] = c.condition.id;
                   p["kind"] = c.condition.kind;
                   p["org"] = c.condition.org;
                   p["origin"] = c.condition.origin_node;
                   p["deadline"] = c.condition.deadline;
                   emit(EventKind::ConditionFired, std::move(p));
                   c.protocol = protocols::select_protocol(spec_.protocol_library, c.condition, *this);
                   if (c.protocol == nullptr) {
                     c.done = true;
                     return;
                   }
                   c.exceptions.resize(c.protocol->roles.size());
                   batch.push_back({RequestKind::Local, index, 0, {}});
                 },
                 [&](EscalationStep& a) {
                   if (!conditions_.at(a.condition).done) batch.push_back({RequestKind::Step, a.condition, a.role, {}});
                 },
                 [&](ForwardStep& a) {
                   if (!conditions_.at(a.condition).done) {
                     batch.push_back({RequestKind::Forward, a.condition, a.role, {}});
                   }
                 },
             },
             action);
}

std::map<org::ActorId, std::string> Simulator::snapshot_targets(const Request& r) const {
  std::map<org::ActorId, std::string> out;
  const auto& c = conditions_[r.condition];
  auto add = [&](const std::vector<Assignment>& planned) {
    for (const auto& a : planned) out.emplace(a.match.actor, a.match.role);
  };
  switch (r.kind) {
    case RequestKind::Local: {
      if (!world_.org(c.condition.org).node(c.condition.origin_node).alive) break;
      const auto scope = protocols::local_scope(world_, c.condition);
      for (const auto& role : c.protocol->roles) add(protocols::plan_fill(world_, *rules_, scope, c.condition, role, role.count));
      break;
    }
    case RequestKind::Step: {
      const auto& exc = *c.exceptions[r.role];
      if (!world_.org(exc.org).node(exc.current_node).alive) break;
      const auto scope = rules_->escalation_scope(world_, exc, now_);
      add(protocols::plan_fill(world_, *rules_, scope, c.condition, c.protocol->roles[r.role], exc.remaining));
      break;
    }
    case RequestKind::Forward:
      add(protocols::plan_forward(world_, *rules_, *c.exceptions[r.role], c.condition, c.protocol->roles[r.role]));
      break;
  }
  return out;
}

// Requests gathered at one tick are served in contention order against a
// snapshot taken before any of them commits. A request whose snapshot pick
// was taken by another condition in the batch records a conflict and then
// searches again against the live state.
void Simulator::flush(std::vector<Request>& batch) {
  if (batch.empty()) return;
  if (!rules_->resolves_contention()) {
    for (const auto& r : batch) execute(r);
    batch.clear();
    return;
  }

  for (auto& r : batch) r.targets = snapshot_targets(r);
  std::stable_sort(batch.begin(), batch.end(), [&](const Request& a, const Request& b) {
    const auto& ca = conditions_[a.condition].condition;
    const auto& cb = conditions_[b.condition].condition;
    return protocols::contention_precedes({ca.id, ca.fired_at, {}}, {cb.id, cb.fired_at, {}});
  });

  std::map<org::ActorId, protocols::ContentionRequest> holders;
  for (const auto& r : batch) {
    auto& c = conditions_[r.condition];
    if (c.done) continue;
    for (const auto& [actor, role] : r.targets) {
      const auto it = holders.find(actor);
      if (it == holders.end() || it->second.condition == c.condition.id) continue;
      const auto* a = world_.find_actor(actor);
      if (a == nullptr || a->committed_to != protocols::son_id_for(it->second.condition)) continue;
      const std::vector<protocols::ContentionRequest> contenders{it->second, {c.condition.id, c.condition.fired_at, role}};
      protocols::resolve_contention(contenders, actor, *this);
    }
    const std::size_t before = c.assignments.size();
    execute(r);
    for (std::size_t i = before; i < c.assignments.size(); ++i) {
      const auto& a = c.assignments[i];
      holders[a.match.actor] = {c.condition.id, c.condition.fired_at, a.match.role};
    }
  }
  batch.clear();
}

void Simulator::execute(const Request& r) {
  auto& c = conditions_[r.condition];
  if (c.done) return;
  switch (r.kind) {
    case RequestKind::Local: execute_local(c, r.condition); break;
    case RequestKind::Step: execute_step(c, r.condition, r.role); break;
    case RequestKind::Forward: execute_forward(c, r.condition, r.role); break;
  }
}

void Simulator::execute_local(InFlight& c, std::size_t index) {
  auto outcome = protocols::assign_locally(world_, *rules_, c.condition, *c.protocol, *this);
  if (outcome.origin_dead) {
    c.done = true;
    return;
  }
  std::move(outcome.assignments.begin(), outcome.assignments.end(), std::back_inserter(c.assignments));
  if (outcome.unfilled.empty()) {
    complete(c);
    return;
  }
  c.open_roles = static_cast<int>(outcome.unfilled.size());
  for (const auto& u : outcome.unfilled) {
    RoleException e;
    e.condition = c.condition.id;
    e.role = u.role;
    e.role_index = u.role_index;
    e.org = c.condition.org;
    e.current_node = c.condition.origin_node;
    e.searched_nodes = {c.condition.origin_node};
    e.remaining = u.remaining;
    e.chain = {c.condition.origin_node};
    c.exceptions[u.role_index] = e;

    Json p;
    p["condition"] = c.condition.id;
    p["role"] = u.role;
    p["org"] = c.condition.org;
    p["node"] = c.condition.origin_node;
    p["remaining"] = u.remaining;
    emit(EventKind::ExceptionRaised, std::move(p));
    schedule(now_ + 1, EscalationStep{index, u.role_index});
  }
}

bool Simulator::past_deadline(InFlight& c, std::size_t role) {
  if (now_ < c.condition.deadline) return false;
  fail(c, "deadline", Json{{"role", c.protocol->roles[role].name}});
  return true;
}

void Simulator::execute_step(InFlight& c, std::size_t index, std::size_t role) {
  if (past_deadline(c, role)) return;
  const auto& spec = c.protocol->roles[role];
  auto outcome = protocols::escalate_exception(world_, *rules_, *c.exceptions[role], c.condition, spec, now_, *this);
  std::move(outcome.assignments.begin(), outcome.assignments.end(), std::back_inserter(c.assignments));
  switch (outcome.status) {
    case EscalationStatus::Filled:
      c.exceptions[role] = std::move(outcome.next);
      role_filled(c, index, role);
      break;
    case EscalationStatus::Escalated:
      c.exceptions[role] = std::move(outcome.next);
      schedule(now_ + 1, EscalationStep{index, role});
      break;
    case EscalationStatus::Exhausted:
      c.exceptions[role] = std::move(outcome.next);
      if (rules_->forwards_to_neighbors()) {
        schedule(now_ + 1, ForwardStep{index, role});
      } else {
        fail(c, "exhausted", Json{{"role", spec.name}, {"at", c.exceptions[role]->current_node}});
      }
      break;
    case EscalationStatus::RouteDead: {
      const auto& exc = *c.exceptions[role];
      const auto& node = world_.org(exc.org).node(exc.current_node);
      Json detail;
      detail["role"] = spec.name;
      detail["dropped_from"] = node.alive ? Json(node.id) : Json(exc.chain.size() > 1 ? exc.chain[exc.chain.size() - 2] : node.id);
      detail["dropped_to"] = node.alive ? Json(*node.parent) : Json(node.id);
      fail(c, "route-dead", std::move(detail));
      break;
    }
  }
}

void Simulator::execute_forward(InFlight& c, std::size_t index, std::size_t role) {
  if (past_deadline(c, role)) return;
  const auto& spec = c.protocol->roles[role];
  auto outcome = protocols::forward_to_neighbor(world_, *rules_, *c.exceptions[role], c.condition, spec, *this);
  std::move(outcome.assignments.begin(), outcome.assignments.end(), std::back_inserter(c.assignments));
  if (outcome.filled) {
    c.exceptions[role]->remaining = 0;
    role_filled(c, index, role);
  } else {
    fail(c, "exhausted", Json{{"role", spec.name}, {"at", world_.org(c.condition.org).root}, {"forwarded", true}});
  }
}

void Simulator::role_filled(InFlight& c, std::size_t, std::size_t) {
  if (--c.open_roles == 0) complete(c);
}

void Simulator::complete(InFlight& c) {
  c.done = true;
  auto son = protocols::form_son(world_, *rules_, c.condition, *c.protocol, c.assignments, now_, *this);
  if (!son) return;
  const Tick until = son->dissolves_at;
  sons_.push_back({std::move(*son), true});
  schedule(until, DissolveSon{sons_.size() - 1});
}

void Simulator::fail(InFlight& c, std::string_view reason, Json detail) {
  c.done = true;
  protocols::fail_condition(world_, c.condition, c.assignments, reason, *this, std::move(detail));
}

void Simulator::finalize() {
  now_ = config_.horizon;
  for (auto& c : conditions_) {
    if (!c.done) fail(c, "horizon");
  }
  for (auto& s : sons_) {
    if (!s.active) continue;
    s.active = false;
    protocols::dissolve_son(world_, s.son, now_, *this, s.son.dissolves_at > now_);
  }
  for (auto& b : world_.bubbles) {
    if (!b.closed_at) b.closed_at = now_;
  }
}

Trace run(const scenario::ScenarioSpec& spec, const RunConfig& config) {
  Simulator sim(spec, config);
  return sim.run();
}

}  // namespace orgsim::engine
