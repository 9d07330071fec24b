#pragma once

#include <cstddef>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "orgsim/systemic.hpp"

namespace orgsim::org {

using OrgId = std::string;
using NodeId = std::string;
using ActorId = std::string;

inline constexpr std::string_view kWildcardRole = "*";

struct CooperationRule {
  std::set<std::string> lendable_roles;  // "*" lends any role
  int max_concurrent_loans = 1;

  bool covers(std::string_view role) const;
  bool operator==(const CooperationRule&) const = default;
};

// Directed link from one organization to a neighbor willing to lend actors.
struct NeighborLink {
  OrgId from_org;
  OrgId to_org;
  CooperationRule cooperation_rule;
  int active_loans = 0;  // runtime state, not part of the scenario

  bool exhausted() const { return active_loans >= cooperation_rule.max_concurrent_loans; }
  bool operator==(const NeighborLink& o) const {
    return from_org == o.from_org && to_org == o.to_org && cooperation_rule == o.cooperation_rule;
  }
};

struct Actor {
  ActorId id;
  std::set<std::string> capabilities;
  systemic::SystemicClass systemic_class;
  NodeId home_node;
  std::optional<std::string> committed_to;  // SON id while committed

  bool free() const { return !committed_to.has_value(); }
  bool operator==(const Actor& o) const {
    return id == o.id && capabilities == o.capabilities && systemic_class == o.systemic_class &&
           home_node == o.home_node;
  }
};

struct OrgNode {
  NodeId id;
  std::optional<NodeId> parent;
  int layer = 0;
  std::set<ActorId> region;
  bool alive = true;

  bool operator==(const OrgNode& o) const {
    return id == o.id && parent == o.parent && layer == o.layer && region == o.region;
  }
};

struct Organization {
  OrgId id;
  NodeId root;
  std::vector<OrgNode> nodes;
  std::vector<Actor> actors;
  std::vector<NeighborLink> neighbor_links;

  const OrgNode* find_node(std::string_view node_id) const;
  OrgNode* find_node(std::string_view node_id);
  // Throws Error("no-such-node").
  const OrgNode& node(std::string_view node_id) const;
  OrgNode& node(std::string_view node_id);

  const Actor* find_actor(std::string_view actor_id) const;
  Actor* find_actor(std::string_view actor_id);

  // Child node ids in ascending order, dead or alive.
  std::vector<NodeId> children(std::string_view node_id) const;

  bool operator==(const Organization&) const = default;
};

struct Violation {
  std::string code;
  std::string subject;

  std::string to_string() const { return code + "(" + subject + ")"; }
  bool operator==(const Violation&) const = default;
};

// Every broken tree, layer, region or link invariant, in a stable order.
// An empty result means the organization is well formed.
std::vector<Violation> validate_topology(const Organization& org);

// [node, parent, ..., root]. Throws Error("no-such-node").
std::vector<NodeId> path_to_root(const Organization& org, std::string_view node_id);

// Alive nodes reachable from `node_id` through alive nodes, ascending id.
// Empty when the node itself is dead.
std::vector<NodeId> alive_subtree(const Organization& org, std::string_view node_id);

// Actors in the regions of alive_subtree(node). Throws Error("no-such-node").
std::set<ActorId> subtree_actors(const Organization& org, std::string_view node_id);

// Every descendant regardless of liveness.
std::vector<NodeId> descendants(const Organization& org, std::string_view node_id);

// Number of tree edges between two nodes.
int tree_distance(const Organization& org, std::string_view a, std::string_view b);

// Indices into org.neighbor_links whose rule covers `role` and whose loan
// budget has room, ordered by target organization id.
std::vector<std::size_t> locate_neighbor_orgs(const Organization& org, std::string_view role);

}  // namespace orgsim::org
