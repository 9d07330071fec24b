#include "orgsim/org_model.hpp"

#include <algorithm>
#include <deque>
#include <map>
#include <utility>

#include "orgsim/error.hpp"

namespace orgsim::org {

bool CooperationRule::covers(std::string_view role) const {
  return lendable_roles.contains(std::string(kWildcardRole)) ||
         lendable_roles.contains(std::string(role));
}

const OrgNode* Organization::find_node(std::string_view node_id) const {
  for (const auto& n : nodes) {
    if (n.id == node_id) return &n;
  }
  return nullptr;
}

OrgNode* Organization::find_node(std::string_view node_id) {
  return const_cast<OrgNode*>(std::as_const(*this).find_node(node_id));
}

const OrgNode& Organization::node(std::string_view node_id) const {
  const OrgNode* n = find_node(node_id);
  if (n == nullptr) throw Error("no-such-node", id + "/" + std::string(node_id));
  return *n;
}

OrgNode& Organization::node(std::string_view node_id) {
  return const_cast<OrgNode&>(std::as_const(*this).node(node_id));
}

const Actor* Organization::find_actor(std::string_view actor_id) const {
  for (const auto& a : actors) {
    if (a.id == actor_id) return &a;
  }
  return nullptr;
}

Actor* Organization::find_actor(std::string_view actor_id) {
  return const_cast<Actor*>(std::as_const(*this).find_actor(actor_id));
}

std::vector<NodeId> Organization::children(std::string_view node_id) const {
  std::vector<NodeId> out;
  for (const auto& n : nodes) {
    if (n.parent && *n.parent == node_id) out.push_back(n.id);
  }
  std::sort(out.begin(), out.end());
  return out;
}

std::vector<Violation> validate_topology(const Organization& org) {
  std::vector<Violation> out;
  auto add = [&](std::string code, std::string subject) {
    out.push_back({std::move(code), std::move(subject)});
  };

  if (org.nodes.empty()) {
    add("no-nodes", org.id);
    return out;
  }

  std::map<NodeId, const OrgNode*> by_id;
  for (const auto& n : org.nodes) {
    if (!by_id.emplace(n.id, &n).second) add("duplicate-node", n.id);
  }

  const auto root_it = by_id.find(org.root);
  if (root_it == by_id.end()) {
    add("missing-root", org.root);
  } else {
    if (root_it->second->parent) add("root-has-parent", org.root);
    if (root_it->second->layer != 0) add("layer-mismatch", org.root);
  }

  for (const auto& n : org.nodes) {
    if (n.id == org.root) continue;
    if (!n.parent) {
      add("missing-parent", n.id);
      continue;
    }
    const auto p = by_id.find(*n.parent);
    if (p == by_id.end()) {
      add("unknown-parent", n.id);
      continue;
    }
    if (n.layer != p->second->layer + 1) add("layer-mismatch", n.id);
  }

  // Reachability from the root along child edges catches cycles and forests.
  if (root_it != by_id.end()) {
    std::set<NodeId> seen{org.root};
    std::deque<NodeId> frontier{org.root};
    while (!frontier.empty()) {
      const NodeId cur = frontier.front();
      frontier.pop_front();
      for (const auto& n : org.nodes) {
        if (n.parent && *n.parent == cur && n.id != org.root && seen.insert(n.id).second) {
          frontier.push_back(n.id);
        }
      }
    }
    for (const auto& [id, n] : by_id) {
      if (!seen.contains(id)) add("unreachable", id);
    }
  }

  std::map<ActorId, int> actor_defs;
  for (const auto& a : org.actors) {
    if (++actor_defs[a.id] == 2) add("duplicate-actor", a.id);
  }
  std::map<ActorId, std::vector<NodeId>> holders;
  for (const auto& n : org.nodes) {
    for (const auto& a : n.region) holders[a].push_back(n.id);
  }
  for (const auto& [actor, where] : holders) {
    if (!actor_defs.contains(actor)) add("unknown-actor", actor);
    if (where.size() > 1) add("actor-shared", actor);
  }
  for (const auto& a : org.actors) {
    const auto h = holders.find(a.id);
    if (h == holders.end()) {
      add("homeless-actor", a.id);
    } else if (!a.home_node.empty() && h->second.front() != a.home_node) {
      add("home-node-mismatch", a.id);
    }
  }

  std::set<OrgId> targets;
  for (const auto& l : org.neighbor_links) {
    if (l.from_org != org.id) add("link-origin", l.from_org + "->" + l.to_org);
    if (l.to_org == l.from_org) add("self-link", l.to_org);
    if (!targets.insert(l.to_org).second) add("duplicate-link", l.to_org);
    if (l.cooperation_rule.max_concurrent_loans < 1) add("bad-loan-budget", l.to_org);
  }
  return out;
}

std::vector<NodeId> path_to_root(const Organization& org, std::string_view node_id) {
  std::vector<NodeId> path;
  const OrgNode* cur = &org.node(node_id);
  while (true) {
    path.push_back(cur->id);
    if (!cur->parent) break;
    if (path.size() > org.nodes.size()) throw Error("cycle", "parent chain of " + std::string(node_id));
    cur = &org.node(*cur->parent);
  }
  return path;
}

std::vector<NodeId> alive_subtree(const Organization& org, std::string_view node_id) {
  const OrgNode& start = org.node(node_id);
  std::vector<NodeId> out;
  if (!start.alive) return out;
  std::deque<NodeId> frontier{start.id};
  while (!frontier.empty()) {
    NodeId cur = frontier.front();
    frontier.pop_front();
    for (const auto& n : org.nodes) {
      if (n.alive && n.parent && *n.parent == cur) frontier.push_back(n.id);
    }
    out.push_back(std::move(cur));
  }
  std::sort(out.begin(), out.end());
  return out;
}

std::set<ActorId> subtree_actors(const Organization& org, std::string_view node_id) {
  std::set<ActorId> out;
  for (const auto& id : alive_subtree(org, node_id)) {
    const auto& region = org.node(id).region;
    out.insert(region.begin(), region.end());
  }
  return out;
}

std::vector<NodeId> descendants(const Organization& org, std::string_view node_id) {
  std::vector<NodeId> out;
  std::deque<NodeId> frontier{NodeId(org.node(node_id).id)};
  while (!frontier.empty()) {
    const NodeId cur = frontier.front();
    frontier.pop_front();
    for (auto& c : org.children(cur)) {
      frontier.push_back(c);
      out.push_back(std::move(c));
    }
  }
  std::sort(out.begin(), out.end());
  return out;
}

int tree_distance(const Organization& org, std::string_view a, std::string_view b) {
  const auto pa = path_to_root(org, a);
  const auto pb = path_to_root(org, b);
  // Walk both paths from the root end until they diverge.
  auto ia = pa.rbegin();
  auto ib = pb.rbegin();
  std::size_t common = 0;
  while (ia != pa.rend() && ib != pb.rend() && *ia == *ib) {
    ++ia;
    ++ib;
    ++common;
  }
  return static_cast<int>(pa.size() - common + pb.size() - common);
}

std::vector<std::size_t> locate_neighbor_orgs(const Organization& org, std::string_view role) {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < org.neighbor_links.size(); ++i) {
    const auto& l = org.neighbor_links[i];
    if (l.cooperation_rule.covers(role) && !l.exhausted()) out.push_back(i);
  }
  std::stable_sort(out.begin(), out.end(), [&](std::size_t x, std::size_t y) {
    return org.neighbor_links[x].to_org < org.neighbor_links[y].to_org;
  });
  return out;
}

}  // namespace orgsim::org
