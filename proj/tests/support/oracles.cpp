#include "oracles.hpp"

#include <algorithm>
#include <deque>
#include <tuple>

namespace oracle {

using orgsim::EventKind;
using orgsim::Json;
using orgsim::engine::Trace;
using orgsim::scenario::ScenarioSpec;

namespace {

const orgsim::org::OrgNode* raw_node(const Organization& org, const std::string& id) {
  for (const auto& n : org.nodes) {
    if (n.id == id) return &n;
  }
  return nullptr;
}

const Organization* raw_org(const ScenarioSpec& spec, const std::string& id) {
  for (const auto& o : spec.organizations) {
    if (o.id == id) return &o;
  }
  return nullptr;
}

const orgsim::org::Actor* raw_actor(const Organization& org, const std::string& id) {
  for (const auto& a : org.actors) {
    if (a.id == id) return &a;
  }
  return nullptr;
}

std::string key(const std::string& org, const std::string& node) { return org + "/" + node; }

struct FiredInfo {
  std::string kind;
  std::string org;
  std::string origin;
};

}  // namespace

std::vector<std::string> parent_chase(const Organization& org, const std::string& node) {
  std::vector<std::string> out{node};
  const auto* n = raw_node(org, node);
  while (n != nullptr && n->parent) {
    out.push_back(*n->parent);
    n = raw_node(org, *n->parent);
  }
  return out;
}

int disconnected_after_delete(const Organization& org, const std::string& removed) {
  std::set<std::string> seen;
  if (org.root != removed) {
    std::deque<std::string> frontier{org.root};
    seen.insert(org.root);
    while (!frontier.empty()) {
      const auto cur = frontier.front();
      frontier.pop_front();
      for (const auto& n : org.nodes) {
        if (n.parent == cur && n.id != removed && seen.insert(n.id).second) frontier.push_back(n.id);
      }
    }
  }
  int lost = 0;
  for (const auto& n : org.nodes) {
    if (n.id != org.root && n.id != removed && !seen.contains(n.id)) ++lost;
  }
  return lost;
}

std::set<std::string> reachable_actors(const Organization& org, const std::string& node,
                                       const std::set<std::string>& dead) {
  std::set<std::string> out;
  for (const auto& n : org.nodes) {
    // n counts if the chain from n up to `node` is entirely alive.
    const auto chain = parent_chase(org, n.id);
    const auto it = std::find(chain.begin(), chain.end(), node);
    if (it == chain.end()) continue;
    bool alive = true;
    for (auto c = chain.begin(); c != it + 1; ++c) alive = alive && !dead.contains(*c);
    if (alive) out.insert(n.region.begin(), n.region.end());
  }
  return out;
}

int bfs_distance(const Organization& org, const std::string& a, const std::string& b) {
  std::map<std::string, int> dist{{a, 0}};
  std::deque<std::string> frontier{a};
  while (!frontier.empty()) {
    const auto cur = frontier.front();
    frontier.pop_front();
    if (cur == b) return dist[cur];
    std::vector<std::string> next;
    const auto* n = raw_node(org, cur);
    if (n != nullptr && n->parent) next.push_back(*n->parent);
    for (const auto& m : org.nodes) {
      if (m.parent == cur) next.push_back(m.id);
    }
    for (const auto& x : next) {
      if (dist.emplace(x, dist[cur] + 1).second) frontier.push_back(x);
    }
  }
  return -1;
}

double resum(const std::vector<orgsim::systemic::ForceFactor>& factors) {
  double plus = 0.0;
  double minus = 0.0;
  for (const auto& f : factors) {
    (f.sign == orgsim::systemic::ForceSign::Centripetal ? plus : minus) += f.magnitude;
  }
  return plus - minus;
}

std::set<std::string> sort_and_take(std::vector<std::pair<std::string, double>> scored, int capacity) {
  std::sort(scored.begin(), scored.end(), [](const auto& x, const auto& y) {
    return x.second != y.second ? x.second > y.second : x.first < y.first;
  });
  std::set<std::string> out;
  for (int i = 0; i < capacity && i < static_cast<int>(scored.size()); ++i) out.insert(scored[static_cast<std::size_t>(i)].first);
  return out;
}

std::string Audit::summary() const {
  std::string s = std::to_string(checked) + " checked, " + std::to_string(violations.size()) + " violation(s)";
  if (!violations.empty()) s += "; first: " + violations.front();
  return s;
}

Audit audit_conservation(const ScenarioSpec& spec, const Trace& trace) {
  Audit audit;
  std::set<std::string> free;
  std::map<std::string, std::string> committed;  // actor -> condition
  for (const auto& o : spec.organizations) {
    for (const auto& a : o.actors) free.insert(a.id);
  }
  const std::size_t total = free.size();

  auto release = [&](const orgsim::engine::Event& e) {
    const auto cond = e.payload["condition"].get<std::string>();
    std::set<std::string> released;
    for (const auto& a : e.payload["released"]) released.insert(a.get<std::string>());
    std::set<std::string> held;
    for (const auto& [actor, c] : committed) {
      if (c == cond) held.insert(actor);
    }
    if (released != held) {
      audit.violations.push_back("tick " + std::to_string(e.tick) + ": " + cond + " released " +
                                 std::to_string(released.size()) + " of " + std::to_string(held.size()) + " held");
    }
    for (const auto& a : held) {
      committed.erase(a);
      free.insert(a);
    }
  };

  orgsim::Tick tick = 0;
  auto check_balance = [&]() {
    ++audit.checked;
    if (free.size() + committed.size() != total) {
      audit.violations.push_back("tick " + std::to_string(tick) + ": free + committed != total");
    }
  };

  for (const auto& e : trace.events) {
    if (e.tick != tick) {
      check_balance();
      tick = e.tick;
    }
    switch (e.kind) {
      case EventKind::RoleAssigned: {
        const auto actor = e.payload["actor"].get<std::string>();
        if (!free.contains(actor)) {
          audit.violations.push_back("tick " + std::to_string(e.tick) + ": " + actor + " committed while not free");
          break;
        }
        free.erase(actor);
        committed[actor] = e.payload["condition"].get<std::string>();
        break;
      }
      case EventKind::SonDissolved:
      case EventKind::ProtocolFailed: release(e); break;
      default: break;
    }
  }
  check_balance();
  if (!committed.empty()) {
    audit.violations.push_back(std::to_string(committed.size()) + " actor(s) still committed at end, e.g. " +
                               committed.begin()->first);
  }
  return audit;
}

Audit audit_argmin(const ScenarioSpec& spec, const Trace& trace) {
  Audit audit;
  std::set<std::string> committed;
  std::set<std::string> dead;  // "org/node"
  std::map<std::string, FiredInfo> fired;

  for (const auto& e : trace.events) {
    const auto& p = e.payload;
    switch (e.kind) {
      case EventKind::ConditionFired:
        fired[p["condition"].get<std::string>()] = {p["kind"].get<std::string>(), p["org"].get<std::string>(),
                                                    p["origin"].get<std::string>()};
        break;
      case EventKind::NodeFailed: dead.insert(key(p["org"].get<std::string>(), p["node"].get<std::string>())); break;
      case EventKind::NodeRecovered: dead.erase(key(p["org"].get<std::string>(), p["node"].get<std::string>())); break;
      case EventKind::SonDissolved:
      case EventKind::ProtocolFailed:
        for (const auto& a : p["released"]) committed.erase(a.get<std::string>());
        break;
      case EventKind::RoleAssigned: {
        ++audit.checked;
        const auto& info = fired.at(p["condition"].get<std::string>());
        const orgsim::semantics::RoleSpec* role = nullptr;
        for (const auto& proto : spec.protocol_library) {
          if (proto.condition_kind != info.kind) continue;
          for (const auto& r : proto.roles) {
            if (r.name == p["role"].get<std::string>()) role = &r;
          }
        }
        const auto org_id = p["org"].get<std::string>();
        const auto* org = raw_org(spec, org_id);
        const auto* origin_org = raw_org(spec, info.org);
        if (role == nullptr || org == nullptr || origin_org == nullptr) {
          audit.violations.push_back("unresolvable assignment at tick " + std::to_string(e.tick));
          break;
        }
        const int origin_layer = raw_node(*origin_org, info.origin)->layer;

        using Key = std::tuple<int, int, std::string>;
        std::vector<Key> keys;
        for (const auto& n : p["scope_nodes"]) {
          const auto* node = raw_node(*org, n.get<std::string>());
          if (node == nullptr || dead.contains(key(org_id, node->id))) continue;
          const int hops = org_id == info.org ? bfs_distance(*org, info.origin, node->id) : origin_layer + 1 + node->layer;
          for (const auto& actor_id : node->region) {
            const auto* a = raw_actor(*org, actor_id);
            if (committed.contains(actor_id) || a->systemic_class.level() < role->min_class.level()) continue;
            if (!std::includes(a->capabilities.begin(), a->capabilities.end(), role->required_capabilities.begin(),
                               role->required_capabilities.end())) {
              continue;
            }
            keys.emplace_back(a->systemic_class.level() - role->min_class.level(), hops, actor_id);
          }
        }
        audit.max_candidates = std::max<std::int64_t>(audit.max_candidates, static_cast<std::int64_t>(keys.size()));
        const auto actor = p["actor"].get<std::string>();
        if (keys.empty()) {
          audit.violations.push_back(actor + " assigned with no eligible candidate in scope");
        } else {
          const auto best = *std::min_element(keys.begin(), keys.end());
          const Key got{p["mismatch"].get<int>(), p["hops"].get<int>(), actor};
          if (got != best) {
            audit.violations.push_back("tick " + std::to_string(e.tick) + ": " + actor + " chosen but " +
                                       std::get<2>(best) + " ranks lower");
          }
        }
        committed.insert(actor);
        break;
      }
      default: break;
    }
  }
  return audit;
}

Audit audit_neighboring_layers(const ScenarioSpec& spec, const Trace& trace) {
  Audit audit;
  std::map<std::string, FiredInfo> fired;
  for (const auto& e : trace.events) {
    const auto& p = e.payload;
    if (e.kind == EventKind::ConditionFired) {
      fired[p["condition"].get<std::string>()] = {p["kind"].get<std::string>(), p["org"].get<std::string>(),
                                                  p["origin"].get<std::string>()};
    }
    if (e.kind != EventKind::RoleAssigned) continue;
    ++audit.checked;
    const auto& info = fired.at(p["condition"].get<std::string>());
    const auto org_id = p["org"].get<std::string>();
    if (org_id != info.org || !p["lent_by"].is_null()) {
      audit.violations.push_back(p["actor"].get<std::string>() + " crosses organizations");
      continue;
    }
    const auto* org = raw_org(spec, org_id);
    const int from = raw_node(*org, p["decided_at"].get<std::string>())->layer;
    const int to = raw_node(*org, p["node"].get<std::string>())->layer;
    if (std::abs(from - to) > 2) {
      audit.violations.push_back(p["actor"].get<std::string>() + " assigned across " + std::to_string(std::abs(from - to)) +
                                 " layers");
    }
  }
  return audit;
}

Audit audit_confinement(const ScenarioSpec& spec, const Trace& trace, const std::set<std::string>& confined) {
  Audit audit;
  std::map<std::string, FiredInfo> fired;
  for (const auto& e : trace.events) {
    const auto& p = e.payload;
    if (e.kind == EventKind::ConditionFired) {
      fired[p["condition"].get<std::string>()] = {p["kind"].get<std::string>(), p["org"].get<std::string>(),
                                                  p["origin"].get<std::string>()};
    }
    if (e.kind != EventKind::RoleAssigned || !confined.contains(p["role"].get<std::string>())) continue;
    ++audit.checked;
    const auto& info = fired.at(p["condition"].get<std::string>());
    const auto org_id = p["org"].get<std::string>();
    const auto node = p["node"].get<std::string>();
    const auto decided = p["decided_at"].get<std::string>();
    if (org_id != info.org) {
      audit.violations.push_back(p["actor"].get<std::string>() + " lent for confined role");
      continue;
    }
    const auto* n = raw_node(*raw_org(spec, org_id), node);
    if (node != decided && n->parent != decided) {
      audit.violations.push_back(p["actor"].get<std::string>() + " at " + node + " bypassed the hierarchy at " + decided);
    }
  }
  return audit;
}

std::map<std::string, std::int64_t> tally(const Trace& trace) {
  std::map<std::string, std::int64_t> out;
  for (const auto& e : trace.events) ++out[std::string(orgsim::to_string(e.kind))];
  return out;
}

}  // namespace oracle
