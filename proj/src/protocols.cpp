#include "orgsim/protocols.hpp"

#include <algorithm>
#include <iterator>
#include <map>

#include "orgsim/error.hpp"

namespace orgsim::protocols {

namespace {

Json string_array(const auto& items) {
  Json out = Json::array();
  for (const auto& s : items) out.push_back(s);
  return out;
}

Json nullable(const std::optional<std::string>& s) { return s ? Json(*s) : Json(nullptr); }

void emit_message(EventSink& sink, std::string_view from_org, std::string_view from, std::string_view to_org,
                  std::string_view to, std::string_view purpose, std::string_view condition) {
  Json p;
  p["from_org"] = from_org;
  p["from"] = from;
  p["to_org"] = to_org;
  p["to"] = to;
  p["purpose"] = purpose;
  p["condition"] = condition;
  sink.emit(EventKind::MessageSent, std::move(p));
}

// Nodes strictly below `top` down to `node`, top first; empty if `node` is
// not in the subtree of `top`.
std::vector<org::NodeId> downward_path(const org::Organization& org, std::string_view top,
                                       std::string_view node) {
  auto up = org::path_to_root(org, node);
  const auto it = std::find(up.begin(), up.end(), top);
  if (it == up.end()) return {};
  std::vector<org::NodeId> down(up.begin(), it + 1);
  std::reverse(down.begin(), down.end());
  return down;
}

std::vector<org::NodeId> without_searched(std::vector<org::NodeId> nodes, const std::set<org::NodeId>& searched) {
  std::erase_if(nodes, [&](const org::NodeId& n) { return searched.contains(n); });
  std::sort(nodes.begin(), nodes.end());
  nodes.erase(std::unique(nodes.begin(), nodes.end()), nodes.end());
  return nodes;
}

// Current node plus alive children: what a strict hierarchy can reach.
std::vector<org::NodeId> strict_reach(const org::Organization& org, std::string_view node) {
  std::vector<org::NodeId> out{org::NodeId(node)};
  for (auto& c : org.children(node)) {
    if (org.node(c).alive) out.push_back(std::move(c));
  }
  return out;
}

SearchScope scope_at(const org::Organization& org, const RoleException& exception, ScopeKind kind,
                     std::vector<org::NodeId> nodes) {
  SearchScope scope;
  scope.org = org.id;
  scope.kind = kind;
  scope.decided_at = exception.current_node;
  scope.nodes = without_searched(std::move(nodes), exception.searched_nodes);
  const auto strict = strict_reach(org, exception.current_node);
  for (const auto& n : scope.nodes) {
    if (std::find(strict.begin(), strict.end(), n) != strict.end()) scope.hierarchy_nodes.insert(n);
  }
  scope.via_root = exception.current_node == org.root;
  return scope;
}

class StrictRules final : public RuleEngine {
 public:
  using RuleEngine::RuleEngine;
  Mode mode() const override { return Mode::Strict; }

  SearchScope escalation_scope(const World& world, const RoleException& exception, Tick) const override {
    const auto& org = world.org(exception.org);
    return scope_at(org, exception, ScopeKind::Strict, strict_reach(org, exception.current_node));
  }
};

class SociocracyRules final : public RuleEngine {
 public:
  using RuleEngine::RuleEngine;
  Mode mode() const override { return Mode::Sociocracy; }
  bool holds_meetings() const override { return true; }

  // Children, plus the members of each child's circle while that circle has
  // a sitting representative: two layers below the current node at most.
  SearchScope escalation_scope(const World& world, const RoleException& exception, Tick now) const override {
    const auto& org = world.org(exception.org);
    auto nodes = strict_reach(org, exception.current_node);
    for (const auto& child : org.children(exception.current_node)) {
      if (!org.node(child).alive) continue;
      const Circle* circle = world.find_circle(org.id, child);
      if (circle == nullptr || !circle->represented_at(now)) continue;
      for (const auto& m : circle->members) {
        if (org.node(m).alive) nodes.push_back(m);
      }
    }
    return scope_at(org, exception, ScopeKind::Sociocracy, std::move(nodes));
  }
};

class FsoRules final : public RuleEngine {
 public:
  using RuleEngine::RuleEngine;
  Mode mode() const override { return Mode::Fso; }
  bool forwards_to_neighbors() const override { return true; }
  bool son_opens_bubble() const override { return true; }
  bool resolves_contention() const override { return true; }
  const std::set<std::string>& confined_roles() const override { return options_.confined_roles; }

  SearchScope escalation_scope(const World& world, const RoleException& exception, Tick) const override {
    const auto& org = world.org(exception.org);
    return scope_at(org, exception, ScopeKind::Fso, org::alive_subtree(org, exception.current_node));
  }
};

Json assignment_payload(const Condition& condition, const SearchScope& scope, const Assignment& a,
                        const World& world) {
  Json p;
  p["condition"] = condition.id;
  p["role"] = a.match.role;
  p["actor"] = a.match.actor;
  p["org"] = a.org;
  p["node"] = a.match.node;
  p["mismatch"] = a.match.mismatch;
  p["hops"] = a.match.hop_distance;
  p["decided_at"] = a.decided_at;
  p["scope"] = to_string(a.scope);
  p["scope_nodes"] = string_array(scope.nodes);
  p["via_root"] = a.via_root;
  p["lent_by"] = a.link ? Json(world.org(condition.org).neighbor_links[*a.link].to_org) : Json(nullptr);
  return p;
}

void emit_failure(EventSink& sink, const Condition& condition, std::string_view reason,
                  const std::vector<org::ActorId>& released, Json detail) {
  Json p;
  p["condition"] = condition.id;
  p["reason"] = reason;
  p["released"] = string_array(released);
  for (auto& [k, v] : detail.items()) p[k] = v;
  sink.emit(EventKind::ProtocolFailed, std::move(p));
}

void release_loans(World& world, const org::OrgId& origin_org, const std::vector<std::size_t>& links) {
  auto& org = world.org(origin_org);
  for (std::size_t l : links) {
    if (l < org.neighbor_links.size() && org.neighbor_links[l].active_loans > 0) --org.neighbor_links[l].active_loans;
  }
}

}  // namespace

std::string_view to_string(Mode mode) {
  switch (mode) {
    case Mode::Strict: return "strict";
    case Mode::Sociocracy: return "sociocracy";
    case Mode::Fso: return "fso";
  }
  return "?";
}

std::optional<Mode> parse_mode(std::string_view name) {
  if (name == "strict") return Mode::Strict;
  if (name == "sociocracy") return Mode::Sociocracy;
  if (name == "fso") return Mode::Fso;
  return std::nullopt;
}

std::string_view to_string(BubbleSource source) {
  switch (source) {
    case BubbleSource::RootPersona: return "root-persona";
    case BubbleSource::Representative: return "representative";
    case BubbleSource::Son: return "son";
  }
  return "?";
}

std::string_view to_string(ScopeKind kind) {
  switch (kind) {
    case ScopeKind::Local: return "local";
    case ScopeKind::Strict: return "strict";
    case ScopeKind::Sociocracy: return "sociocracy";
    case ScopeKind::Fso: return "fso";
    case ScopeKind::Neighbor: return "neighbor";
  }
  return "?";
}

World World::build(std::vector<org::Organization> orgs) {
  World world;
  world.orgs = std::move(orgs);
  for (const auto& org : world.orgs) {
    std::vector<org::NodeId> ids;
    for (const auto& n : org.nodes) ids.push_back(n.id);
    std::sort(ids.begin(), ids.end());
    for (const auto& id : ids) {
      auto members = org.children(id);
      if (members.empty()) continue;
      Circle c;
      c.org = org.id;
      c.parent_node = id;
      c.members = std::move(members);
      world.circles.push_back(std::move(c));
    }
  }
  return world;
}

org::Organization& World::org(std::string_view id) {
  return const_cast<org::Organization&>(std::as_const(*this).org(id));
}

const org::Organization& World::org(std::string_view id) const {
  for (const auto& o : orgs) {
    if (o.id == id) return o;
  }
  throw Error("no-such-org", std::string(id));
}

org::Actor* World::find_actor(std::string_view id, org::Organization** owner) {
  for (auto& o : orgs) {
    if (auto* a = o.find_actor(id)) {
      if (owner != nullptr) *owner = &o;
      return a;
    }
  }
  return nullptr;
}

const org::Actor* World::find_actor(std::string_view id) const {
  for (const auto& o : orgs) {
    if (const auto* a = o.find_actor(id)) return a;
  }
  return nullptr;
}

Circle* World::find_circle(std::string_view org_id, std::string_view parent) {
  return const_cast<Circle*>(std::as_const(*this).find_circle(org_id, parent));
}

const Circle* World::find_circle(std::string_view org_id, std::string_view parent) const {
  for (const auto& c : circles) {
    if (c.org == org_id && c.parent_node == parent) return &c;
  }
  return nullptr;
}

ControlBubble& World::open_bubble(BubbleSource source, std::string id, std::string subject, Tick now) {
  bubbles.push_back({std::move(id), source, std::move(subject), now, std::nullopt});
  return bubbles.back();
}

void World::close_bubble(std::string_view id, Tick now) {
  if (auto* b = find_bubble(id); b != nullptr && !b->closed_at) b->closed_at = now;
}

ControlBubble* World::find_bubble(std::string_view id) {
  for (auto& b : bubbles) {
    if (b.id == id) return &b;
  }
  return nullptr;
}

std::size_t World::actor_count() const {
  std::size_t n = 0;
  for (const auto& o : orgs) n += o.actors.size();
  return n;
}

std::size_t World::committed_count() const {
  std::size_t n = 0;
  for (const auto& o : orgs) {
    n += static_cast<std::size_t>(std::count_if(o.actors.begin(), o.actors.end(),
                                                [](const org::Actor& a) { return !a.free(); }));
  }
  return n;
}

std::string son_id_for(std::string_view condition_id) { return "son-" + std::string(condition_id); }

const std::set<std::string>& RuleEngine::confined_roles() const {
  static const std::set<std::string> kNone;
  return kNone;
}

std::unique_ptr<RuleEngine> make_rule_engine(Mode mode, RuleOptions options) {
  switch (mode) {
    case Mode::Strict: return std::make_unique<StrictRules>(std::move(options));
    case Mode::Sociocracy: return std::make_unique<SociocracyRules>(std::move(options));
    case Mode::Fso: return std::make_unique<FsoRules>(std::move(options));
  }
  throw Error("bad-mode", "unknown rule engine mode");
}

const TreatmentProtocol* select_protocol(std::span<const TreatmentProtocol> library, const Condition& condition,
                                         EventSink& sink) {
  for (const auto& p : library) {
    if (p.condition_kind == condition.kind) return &p;
  }
  emit_failure(sink, condition, "unknown-kind", {}, Json{{"kind", condition.kind}});
  return nullptr;
}

SearchScope local_scope(const World& world, const Condition& condition) {
  const auto& org = world.org(condition.org);
  SearchScope scope;
  scope.org = org.id;
  scope.kind = ScopeKind::Local;
  scope.decided_at = condition.origin_node;
  if (org.node(condition.origin_node).alive) scope.nodes = {condition.origin_node};
  scope.hierarchy_nodes = {condition.origin_node};
  scope.via_root = condition.origin_node == org.root;
  return scope;
}

std::vector<Assignment> plan_fill(const World& world, const RuleEngine& rules, const SearchScope& scope,
                                  const Condition& condition, const semantics::RoleSpec& role, int count) {
  std::vector<Assignment> out;
  if (count <= 0) return out;
  const auto& org = world.org(scope.org);
  const auto& origin_org = world.org(condition.org);
  const int origin_layer = origin_org.node(condition.origin_node).layer;

  std::vector<semantics::Candidate> candidates;
  for (const auto& node_id : scope.nodes) {
    const auto& node = org.node(node_id);
    if (!node.alive) continue;
    const int hops = scope.org == condition.org
                         ? org::tree_distance(org, condition.origin_node, node_id)
                         : origin_layer + 1 + node.layer;
    for (const auto& actor_id : node.region) {
      const auto* actor = org.find_actor(actor_id);
      if (actor != nullptr && semantics::matches(*actor, role)) candidates.push_back({actor, hops});
    }
  }

  const auto& confined = rules.confined_roles();
  for (auto& m : semantics::rank_candidates(candidates, role)) {
    if (static_cast<int>(out.size()) == count) break;
    if (!scope.hierarchy_nodes.contains(m.node) && !check_confinement(confined, m)) continue;
    Assignment a;
    a.org = scope.org;
    a.decided_at = scope.decided_at;
    a.scope = scope.kind;
    a.link = scope.link;
    a.via_root = scope.via_root;
    a.match = std::move(m);
    out.push_back(std::move(a));
  }
  return out;
}

void commit(World& world, const Condition& condition, const SearchScope& scope,
            std::span<const Assignment> assignments, EventSink& sink) {
  const std::string son = son_id_for(condition.id);
  for (const auto& a : assignments) {
    auto& org = world.org(a.org);
    auto* actor = org.find_actor(a.match.actor);
    if (actor == nullptr || !actor->free()) throw Error("double-commit", a.match.actor);
    actor->committed_to = son;
    if (a.link) ++world.org(condition.org).neighbor_links[*a.link].active_loans;
    sink.emit(EventKind::RoleAssigned, assignment_payload(condition, scope, a, world));

    const auto path = downward_path(org, a.decided_at, a.match.node);
    for (std::size_t i = 1; i < path.size(); ++i) {
      emit_message(sink, org.id, path[i - 1], org.id, path[i], "dispatch", condition.id);
    }
  }
}

std::vector<Assignment> fill_role(World& world, const RuleEngine& rules, const SearchScope& scope,
                                  const Condition& condition, const semantics::RoleSpec& role, int count,
                                  EventSink& sink) {
  auto planned = plan_fill(world, rules, scope, condition, role, count);
  commit(world, condition, scope, planned, sink);
  return planned;
}

LocalOutcome assign_locally(World& world, const RuleEngine& rules, const Condition& condition,
                            const TreatmentProtocol& protocol, EventSink& sink) {
  LocalOutcome out;
  if (!world.org(condition.org).node(condition.origin_node).alive) {
    out.origin_dead = true;
    fail_condition(world, condition, {}, "origin-dead", sink);
    return out;
  }
  const auto scope = local_scope(world, condition);
  for (std::size_t i = 0; i < protocol.roles.size(); ++i) {
    const auto& role = protocol.roles[i];
    auto got = fill_role(world, rules, scope, condition, role, role.count, sink);
    const int remaining = role.count - static_cast<int>(got.size());
    std::move(got.begin(), got.end(), std::back_inserter(out.assignments));
    if (remaining > 0) out.unfilled.push_back({i, role.name, remaining});
  }
  return out;
}

EscalationOutcome escalate_exception(World& world, const RuleEngine& rules, const RoleException& exception,
                                     const Condition& condition, const semantics::RoleSpec& role, Tick now,
                                     EventSink& sink) {
  EscalationOutcome out;
  out.next = exception;
  auto& org = world.org(exception.org);
  const auto& here = org.node(exception.current_node);
  if (!here.alive) {
    out.status = EscalationStatus::RouteDead;
    return out;
  }

  const auto scope = rules.escalation_scope(world, exception, now);
  out.assignments = fill_role(world, rules, scope, condition, role, exception.remaining, sink);
  out.next.remaining -= static_cast<int>(out.assignments.size());
  out.next.searched_nodes.insert(scope.nodes.begin(), scope.nodes.end());
  if (out.next.remaining == 0) {
    out.status = EscalationStatus::Filled;
    return out;
  }

  if (!here.parent) {
    out.status = EscalationStatus::Exhausted;
    Json p;
    p["condition"] = condition.id;
    p["role"] = role.name;
    p["org"] = org.id;
    p["from"] = here.id;
    p["to"] = nullptr;
    p["hops"] = out.next.hops;
    p["remaining"] = out.next.remaining;
    p["scope"] = string_array(scope.nodes);
    p["searched"] = string_array(out.next.searched_nodes);
    sink.emit(EventKind::ExceptionEscalated, std::move(p));
    return out;
  }
  const auto& parent = org.node(*here.parent);
  if (!parent.alive) {
    out.status = EscalationStatus::RouteDead;
    return out;
  }

  out.status = EscalationStatus::Escalated;
  out.next.current_node = parent.id;
  out.next.hops += 1;
  out.next.chain.push_back(parent.id);
  Json p;
  p["condition"] = condition.id;
  p["role"] = role.name;
  p["org"] = org.id;
  p["from"] = here.id;
  p["to"] = parent.id;
  p["hops"] = out.next.hops;
  p["remaining"] = out.next.remaining;
  p["scope"] = string_array(scope.nodes);
  p["searched"] = string_array(out.next.searched_nodes);
  sink.emit(EventKind::ExceptionEscalated, std::move(p));
  emit_message(sink, org.id, here.id, org.id, parent.id, "escalate", condition.id);
  return out;
}

std::vector<SearchScope> neighbor_scopes(const World& world, const RoleException& exception) {
  std::vector<SearchScope> out;
  const auto& origin = world.org(exception.org);
  for (std::size_t idx : org::locate_neighbor_orgs(origin, exception.role)) {
    const auto& link = origin.neighbor_links[idx];
    const auto& target = world.org(link.to_org);
    if (!target.node(target.root).alive) continue;
    SearchScope scope;
    scope.org = target.id;
    scope.kind = ScopeKind::Neighbor;
    scope.decided_at = target.root;
    scope.nodes = org::alive_subtree(target, target.root);
    scope.via_root = true;
    scope.link = idx;
    out.push_back(std::move(scope));
  }
  return out;
}

std::vector<Assignment> plan_forward(const World& world, const RuleEngine& rules, const RoleException& exception,
                                     const Condition& condition, const semantics::RoleSpec& role) {
  std::vector<Assignment> out;
  int remaining = exception.remaining;
  const auto& origin = world.org(exception.org);
  for (const auto& scope : neighbor_scopes(world, exception)) {
    if (remaining == 0) break;
    const auto& link = origin.neighbor_links[*scope.link];
    const int budget = link.cooperation_rule.max_concurrent_loans - link.active_loans;
    auto got = plan_fill(world, rules, scope, condition, role, std::min(remaining, budget));
    remaining -= static_cast<int>(got.size());
    std::move(got.begin(), got.end(), std::back_inserter(out));
  }
  return out;
}

ForwardOutcome forward_to_neighbor(World& world, const RuleEngine& rules, const RoleException& exception,
                                   const Condition& condition, const semantics::RoleSpec& role, EventSink& sink) {
  ForwardOutcome out;
  out.remaining = exception.remaining;
  const auto& origin = world.org(exception.org);
  for (const auto& scope : neighbor_scopes(world, exception)) {
    if (out.remaining == 0) break;
    const auto& link = world.org(exception.org).neighbor_links[*scope.link];
    Json p;
    p["condition"] = condition.id;
    p["role"] = role.name;
    p["from_org"] = origin.id;
    p["to_org"] = link.to_org;
    p["remaining"] = out.remaining;
    sink.emit(EventKind::ExceptionForwarded, std::move(p));
    emit_message(sink, origin.id, origin.root, scope.org, scope.decided_at, "forward", condition.id);

    const int budget = link.cooperation_rule.max_concurrent_loans - link.active_loans;
    auto got = fill_role(world, rules, scope, condition, role, std::min(out.remaining, budget), sink);
    out.remaining -= static_cast<int>(got.size());
    std::move(got.begin(), got.end(), std::back_inserter(out.assignments));
  }
  out.filled = out.remaining == 0;
  return out;
}

std::vector<org::ActorId> fail_condition(World& world, const Condition& condition,
                                         std::span<const Assignment> committed, std::string_view reason,
                                         EventSink& sink, Json detail) {
  std::vector<org::ActorId> released;
  std::vector<std::size_t> loans;
  const std::string son = son_id_for(condition.id);
  for (const auto& a : committed) {
    auto* actor = world.find_actor(a.match.actor);
    if (actor != nullptr && actor->committed_to == son) {
      actor->committed_to.reset();
      released.push_back(a.match.actor);
      if (a.link) loans.push_back(*a.link);
    }
  }
  if (!loans.empty()) release_loans(world, condition.org, loans);
  emit_failure(sink, condition, reason, released, std::move(detail));
  return released;
}

std::optional<SocialOverlayNetwork> form_son(World& world, const RuleEngine& rules, const Condition& condition,
                                             const TreatmentProtocol& protocol,
                                             std::span<const Assignment> assignments, Tick now, EventSink& sink) {
  if (now >= condition.deadline) {
    fail_condition(world, condition, assignments, "deadline", sink);
    return std::nullopt;
  }

  SocialOverlayNetwork son;
  son.id = son_id_for(condition.id);
  son.condition = condition.id;
  son.origin_org = condition.org;
  son.formed_at = now;
  son.dissolves_at = now + protocol.son_duration;

  const int origin_layer = world.org(condition.org).node(condition.origin_node).layer;
  int lo = origin_layer;
  int hi = origin_layer;
  std::set<org::OrgId> orgs{condition.org};
  for (const auto& a : assignments) {
    const int layer = world.org(a.org).node(a.match.node).layer;
    son.members.push_back({a.match.actor, a.match.role, a.org, a.match.node, layer, a.link});
    lo = std::min(lo, layer);
    hi = std::max(hi, layer);
    orgs.insert(a.org);
  }
  son.layer_span = hi - lo;
  son.org_span = static_cast<int>(orgs.size());
  if (rules.son_opens_bubble()) {
    son.bubble = son.id;
    world.open_bubble(BubbleSource::Son, son.id, son.id, now);
  }

  Json members = Json::array();
  for (const auto& m : son.members) {
    members.push_back(Json{{"actor", m.actor}, {"role", m.role}, {"org", m.org}, {"node", m.node}, {"layer", m.layer}});
  }
  Json p;
  p["son"] = son.id;
  p["condition"] = condition.id;
  p["members"] = std::move(members);
  p["dissolves_at"] = son.dissolves_at;
  p["layer_span"] = son.layer_span;
  p["org_span"] = son.org_span;
  p["latency"] = now - condition.fired_at;
  p["bubble_opened"] = nullable(son.bubble);
  sink.emit(EventKind::SonFormed, std::move(p));
  return son;
}

std::vector<org::ActorId> dissolve_son(World& world, const SocialOverlayNetwork& son, Tick now, EventSink& sink,
                                       bool truncated) {
  std::vector<org::ActorId> released;
  std::vector<std::size_t> loans;
  for (const auto& m : son.members) {
    auto* actor = world.find_actor(m.actor);
    if (actor != nullptr && actor->committed_to == son.id) {
      actor->committed_to.reset();
      released.push_back(m.actor);
      if (m.link) loans.push_back(*m.link);
    }
  }
  if (!loans.empty()) release_loans(world, son.origin_org, loans);
  if (son.bubble) world.close_bubble(*son.bubble, now);

  Json p;
  p["son"] = son.id;
  p["condition"] = son.condition;
  p["released"] = string_array(released);
  p["bubble_closed"] = nullable(son.bubble);
  p["truncated"] = truncated;
  sink.emit(EventKind::SonDissolved, std::move(p));
  return released;
}

bool hold_meeting(World& world, Circle& circle, Tick now, Tick meeting_period, Tick tenure, EventSink& sink) {
  if (meeting_period < 1 || tenure < 1) throw Error("bad-period", "meeting period and tenure must be >= 1");
  if (now % meeting_period != 0) {
    throw Error("off-schedule", "meeting at tick " + std::to_string(now) + " with period " +
                                    std::to_string(meeting_period));
  }
  const auto& org = world.org(circle.org);

  std::vector<org::NodeId> present;
  for (const auto& m : circle.members) {
    if (org.node(m).alive) present.push_back(m);
  }
  if (present.empty()) return false;

  auto capability_union = [&](const org::NodeId& node) {
    std::set<std::string> caps;
    for (const auto& a : org.node(node).region) {
      if (const auto* actor = org.find_actor(a)) caps.insert(actor->capabilities.begin(), actor->capabilities.end());
    }
    return caps;
  };

  org::NodeId elected;
  std::size_t best = 0;
  std::set<std::string> advertised;
  for (const auto& m : present) {  // ascending id, so strict > keeps the lowest on ties
    const auto caps = capability_union(m);
    if (elected.empty() || caps.size() > best) {
      elected = m;
      best = caps.size();
    }
    advertised.insert(caps.begin(), caps.end());
  }

  std::optional<std::string> closed;
  if (circle.bubble) {
    if (auto* b = world.find_bubble(*circle.bubble); b != nullptr && !b->closed_at) {
      b->closed_at = now;
      closed = b->id;
    }
  }
  circle.representative = Representative{elected, now + tenure};
  circle.advertised_capabilities = advertised;
  const std::string bubble_id = "rep-" + circle.org + "/" + circle.parent_node + "@" + std::to_string(now);
  world.open_bubble(BubbleSource::Representative, bubble_id, elected, now);
  circle.bubble = bubble_id;

  Json meeting;
  meeting["org"] = circle.org;
  meeting["circle"] = circle.parent_node;
  meeting["members"] = string_array(present);
  sink.emit(EventKind::MeetingHeld, std::move(meeting));

  Json election;
  election["org"] = circle.org;
  election["circle"] = circle.parent_node;
  election["representative"] = elected;
  election["tenure_until"] = now + tenure;
  election["advertised"] = string_array(advertised);
  election["bubble_opened"] = bubble_id;
  election["bubble_closed"] = nullable(closed);
  sink.emit(EventKind::ElectionHeld, std::move(election));
  return true;
}

bool contention_precedes(const ContentionRequest& a, const ContentionRequest& b) {
  if (a.fired_at != b.fired_at) return a.fired_at < b.fired_at;
  return a.condition < b.condition;
}

ContentionResult resolve_contention(std::span<const ContentionRequest> requests, std::string_view actor,
                                    EventSink& sink) {
  if (requests.size() < 2) throw Error("bad-contention", "contention needs at least two requests");
  ContentionResult out;
  for (std::size_t i = 1; i < requests.size(); ++i) {
    if (contention_precedes(requests[i], requests[out.winner])) out.winner = i;
  }
  for (std::size_t i = 0; i < requests.size(); ++i) {
    if (i == out.winner) continue;
    out.losers.push_back(i);
    Json p;
    p["actor"] = actor;
    p["winner"] = requests[out.winner].condition;
    p["winner_role"] = requests[out.winner].role;
    p["loser"] = requests[i].condition;
    p["role"] = requests[i].role;
    sink.emit(EventKind::ConflictRecorded, std::move(p));
  }
  return out;
}

bool check_confinement(const std::set<std::string>& confined_roles, const semantics::MatchResult& assignment) {
  return !confined_roles.contains(assignment.role);
}

}  // namespace orgsim::protocols
