#include <gtest/gtest.h>

#include <random>

#include "builders.hpp"
#include "oracles.hpp"
#include "orgsim/error.hpp"
#include "orgsim/org_model.hpp"

using namespace orgsim;
using testing_support::OrgBuilder;

namespace {

bool has(const std::vector<org::Violation>& v, const std::string& code, const std::string& subject) {
  return std::find(v.begin(), v.end(), org::Violation{code, subject}) != v.end();
}

// Random tree: node i hangs off a uniformly chosen earlier node.
org::Organization random_tree(std::uint64_t seed, int n) {
  std::mt19937_64 rng(seed);
  OrgBuilder b("rt");
  b.node("v00");
  char buf[8];
  for (int i = 1; i < n; ++i) {
    std::snprintf(buf, sizeof buf, "v%02d", i);
    char parent[8];
    std::snprintf(parent, sizeof parent, "v%02d", static_cast<int>(rng() % static_cast<unsigned>(i)));
    b.node(buf, std::string(parent));
    b.actor(buf, std::string("a") + buf, {"x"}, 3);
  }
  return b.build();
}

}  // namespace

TEST(ValidateTopology, SingleRootIsFine) {
  EXPECT_TRUE(org::validate_topology(OrgBuilder("o").node("r").build()).empty());
}

TEST(ValidateTopology, LayerMismatchNamed) {
  auto o = OrgBuilder("o").node("r").node("a", "r").build();
  o.nodes[1].layer = 2;
  EXPECT_TRUE(has(org::validate_topology(o), "layer-mismatch", "a"));
}

TEST(ValidateTopology, SharedActorNamed) {
  auto o = OrgBuilder("o").node("r").node("a", "r").actor("r", "x", {"c"}, 3).build();
  o.node("a").region.insert("x");
  EXPECT_TRUE(has(org::validate_topology(o), "actor-shared", "x"));
}

TEST(ValidateTopology, OtherBreakages) {
  auto o = OrgBuilder("o").node("r").node("a", "r").build();
  o.nodes.push_back(o.nodes[1]);
  EXPECT_TRUE(has(org::validate_topology(o), "duplicate-node", "a"));

  auto cyc = OrgBuilder("o").node("r").node("a", "r").node("b", "a").build();
  cyc.node("a").parent = "b";
  EXPECT_FALSE(org::validate_topology(cyc).empty());

  auto link = OrgBuilder("o").node("r").link("o", {"*"}, 1).build();
  EXPECT_TRUE(has(org::validate_topology(link), "self-link", "o"));

  auto budget = OrgBuilder("o").node("r").link("p", {"*"}, 0).build();
  EXPECT_FALSE(org::validate_topology(budget).empty());
}

TEST(PathToRoot, Basics) {
  const auto o = OrgBuilder("o").node("r").node("a", "r").node("b", "a").node("c", "b").build();
  EXPECT_EQ(org::path_to_root(o, "r"), (std::vector<std::string>{"r"}));
  EXPECT_EQ(org::path_to_root(o, "c"), (std::vector<std::string>{"c", "b", "a", "r"}));
  try {
    (void)org::path_to_root(o, "zz");
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), "no-such-node");
  }
}

TEST(PathToRoot, MatchesParentChaseOnRandomTrees) {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const auto o = random_tree(seed, 15);
    for (const auto& n : o.nodes) {
      const auto path = org::path_to_root(o, n.id);
      EXPECT_EQ(path, oracle::parent_chase(o, n.id));
      EXPECT_EQ(static_cast<int>(path.size()), n.layer + 1);
    }
  }
}

TEST(SubtreeActors, Basics) {
  auto o = OrgBuilder("o")
               .node("r")
               .node("a", "r")
               .node("b", "a")
               .node("c", "a")
               .actor("b", "a1", {"x"}, 3)
               .actor("b", "a2", {"x"}, 3)
               .actor("c", "a3", {"x"}, 3)
               .build();
  EXPECT_EQ(org::subtree_actors(o, "b"), (std::set<std::string>{"a1", "a2"}));
  EXPECT_EQ(org::subtree_actors(o, "r"), (std::set<std::string>{"a1", "a2", "a3"}));
  o.node("c").alive = false;
  EXPECT_EQ(org::subtree_actors(o, "a"), (std::set<std::string>{"a1", "a2"}));
  EXPECT_THROW((void)org::subtree_actors(o, "nope"), Error);
}

TEST(SubtreeActors, MatchesReachabilityOracle) {
  std::mt19937_64 rng(5);
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    auto o = random_tree(seed, 40);
    std::set<std::string> dead;
    for (auto& n : o.nodes) {
      if (rng() % 6 == 0) {
        n.alive = false;
        dead.insert(n.id);
      }
    }
    for (const auto& n : o.nodes) EXPECT_EQ(org::subtree_actors(o, n.id), oracle::reachable_actors(o, n.id, dead));
  }
}

TEST(TreeDistance, MatchesBfs) {
  const auto o = random_tree(3, 25);
  for (const auto& a : o.nodes) {
    for (const auto& b : o.nodes) EXPECT_EQ(org::tree_distance(o, a.id, b.id), oracle::bfs_distance(o, a.id, b.id));
  }
}

TEST(LocateNeighborOrgs, Basics) {
  EXPECT_TRUE(org::locate_neighbor_orgs(OrgBuilder("o").node("r").build(), "medic").empty());

  const auto one = OrgBuilder("o").node("r").link("p", {"*"}, 1).build();
  EXPECT_EQ(org::locate_neighbor_orgs(one, "medic"), (std::vector<std::size_t>{0}));

  auto two = OrgBuilder("o").node("r").link("q", {"medic"}, 1).link("p", {"*"}, 2).build();
  EXPECT_EQ(org::locate_neighbor_orgs(two, "medic"), (std::vector<std::size_t>{1, 0}));  // by target id
  two.neighbor_links[0].active_loans = 1;  // role-specific link exhausted
  EXPECT_EQ(org::locate_neighbor_orgs(two, "medic"), (std::vector<std::size_t>{1}));
  EXPECT_EQ(org::locate_neighbor_orgs(two, "cook"), (std::vector<std::size_t>{1}));
}
