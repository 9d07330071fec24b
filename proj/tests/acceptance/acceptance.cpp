// One PASS/FAIL line per acceptance criterion; exit status 1 if any fails.

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <functional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "builders.hpp"
#include "oracles.hpp"
#include "orgsim/cli.hpp"
#include "orgsim/engine.hpp"
#include "orgsim/metrics.hpp"
#include "orgsim/scenario_io.hpp"
#include "orgsim/systemic.hpp"

using namespace orgsim;
using protocols::Mode;
using testing_support::binary_tree;
using testing_support::condition;
using testing_support::OrgBuilder;
using testing_support::protocol;
using testing_support::role;

namespace {

struct Verdict {
  bool pass = true;
  std::string detail;
};

// Accumulates failures with the first few reasons.
class Check {
 public:
  void expect(bool ok, const std::string& why) {
    if (ok) return;
    ++failures_;
    if (failures_ <= 3) reasons_ += (reasons_.empty() ? "" : "; ") + why;
  }
  void note(const std::string& s) { notes_ += (notes_.empty() ? "" : ", ") + s; }
  Verdict verdict() const {
    if (failures_ == 0) return {true, notes_};
    return {false, std::to_string(failures_) + " failure(s): " + reasons_};
  }

 private:
  int failures_ = 0;
  std::string reasons_;
  std::string notes_;
};

scenario::ScenarioSpec load(const std::string& name) {
  return scenario::parse_scenario(cli::read_file(std::string(ORGSIM_SCENARIO_DIR) + "/" + name));
}

const std::vector<std::string> kCorpus = {"fire_rescue.json", "separation_deep.json", "separation_two_layer.json"};

scenario::ScenarioSpec spec_of(std::vector<org::Organization> orgs, std::vector<protocols::Condition> conds,
                               std::vector<protocols::TreatmentProtocol> lib, Mode mode, Tick horizon) {
  scenario::ScenarioSpec s;
  s.name = "constructed";
  s.organizations = std::move(orgs);
  s.protocol_library = std::move(lib);
  s.condition_source = std::move(conds);
  s.run.mode = mode;
  s.run.horizon = horizon;
  return s;
}

engine::Trace run(const scenario::ScenarioSpec& spec, Mode mode, std::optional<std::uint64_t> seed = std::nullopt,
                  std::set<std::string> confined = {}) {
  auto cfg = engine::RunConfig::from(spec);
  cfg.mode = mode;
  if (seed) cfg.seed = *seed;
  if (!confined.empty()) cfg.confined_roles = std::move(confined);
  return engine::run(spec, cfg);
}

double success(const engine::Trace& t) { return metrics::response_metrics(t).success_rate; }

std::string fmt(double v) { return metrics::format_double(v); }

// --- 1 -------------------------------------------------------------------

Verdict determinism() {
  Check c;
  const auto spec = load("fire_rescue.json");
  const auto a = engine::trace_hash(run(spec, Mode::Fso, 7));
  const auto b = engine::trace_hash(run(spec, Mode::Fso, 7));
  c.expect(a == b, "seed 7 hashes differ: " + a + " vs " + b);
  const auto s7 = scenario::condition_stream(spec, 7, spec.run.horizon);
  const auto s8 = scenario::condition_stream(spec, 8, spec.run.horizon);
  c.expect(s7 != s8, "seed 8 produced the same condition stream");
  c.expect(!s7.empty(), "seed 7 generated no conditions");
  c.note("hash " + a);
  c.note(std::to_string(s7.size()) + " vs " + std::to_string(s8.size()) + " conditions for seeds 7/8");
  return c.verdict();
}

// --- 2 -------------------------------------------------------------------

Verdict spof() {
  Check c;
  const auto tree = binary_tree("t", 3);
  const auto report = metrics::spof_analysis(tree);
  const double denom = static_cast<double>(tree.nodes.size() - 1);
  for (const auto& n : tree.nodes) {
    const double brute = oracle::disconnected_after_delete(tree, n.id) / denom;
    c.expect(report.of(n.id) == brute, n.id + ": " + fmt(report.of(n.id)) + " != " + fmt(brute));
  }

  // Helpers only at n2 (layer 1); every condition fires inside n3's subtree,
  // so strict escalation must pass through the root.
  OrgBuilder b("t");
  b.node("n1");
  for (int k = 2; k <= 15; ++k) b.node("n" + std::to_string(k), "n" + std::to_string(k / 2));
  for (int i = 0; i < 3; ++i) b.actor("n2", "helper" + std::to_string(i), {"k"}, 5);
  std::vector<protocols::Condition> conds;
  const std::vector<std::string> origins = {"n3", "n6", "n7", "n12", "n13", "n14", "n15"};
  for (std::size_t i = 0; i < 10; ++i) {
    const Tick at = static_cast<Tick>(2 * i);
    conds.push_back(condition("c" + std::to_string(i), "p", "t", origins[i % origins.size()], at, at + 10));
  }
  auto spec = spec_of({b.build()}, conds, {protocol("p", {role("k", {"k"}, 5)}, 2)}, Mode::Strict, 40);
  const double healthy = success(run(spec, Mode::Strict));
  spec.failures.push_back({"t", "n1", 0, std::nullopt});
  const auto failed = run(spec, Mode::Strict);
  const auto r = metrics::response_metrics(failed);
  c.expect(r.success_rate == 0.0, "success with the root down = " + fmt(r.success_rate));
  c.expect(healthy > 0.0, "sanity: the root-up run should succeed somewhere");
  c.note("15/15 nodes match");
  c.note("root up " + fmt(healthy) + ", root down " + fmt(r.success_rate));
  return c.verdict();
}

// --- 3 -------------------------------------------------------------------

Verdict separation() {
  Check c;
  const std::vector<std::pair<std::string, std::vector<double>>> expected = {
      {"separation_deep.json", {0.0, 0.0, 1.0}}, {"separation_two_layer.json", {0.0, 1.0, 1.0}}};
  for (const auto& [file, want] : expected) {
    const auto spec = load(file);
    const auto rows = cli::compare(spec, {Mode::Strict, Mode::Sociocracy, Mode::Fso}, spec.run.seed);
    std::string got;
    for (std::size_t i = 0; i < rows.size(); ++i) {
      const double s = rows[i].report.success_rate();
      got += (i ? "/" : "") + fmt(s);
      c.expect(s == want[i], file + " " + std::string(protocols::to_string(rows[i].mode)) + " = " + fmt(s));
    }
    c.note(file.substr(0, file.find('.')) + " " + got);
  }
  return c.verdict();
}

// --- 4 -------------------------------------------------------------------

Verdict neighboring_layers() {
  Check c;
  scenario::RandomScenarioParams p;
  p.organizations = 2;
  p.max_nodes = 15;
  p.max_actors = 30;
  p.conditions = 12;
  p.mode = Mode::Sociocracy;
  std::int64_t checked = 0;
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    const auto spec = scenario::random_scenario(p, seed);
    const auto audit = oracle::audit_neighboring_layers(spec, run(spec, Mode::Sociocracy));
    checked += audit.checked;
    c.expect(audit.ok(), "seed " + std::to_string(seed) + ": " + audit.summary());
  }
  c.expect(checked > 0, "no assignments audited");
  c.note("100 runs, " + std::to_string(checked) + " assignments");
  return c.verdict();
}

// --- 5 -------------------------------------------------------------------

Verdict mismatch_minimization() {
  Check c;
  scenario::RandomScenarioParams p;
  p.organizations = 2;
  p.max_actors = 10;
  p.conditions = 12;
  std::int64_t checked = 0;
  std::int64_t widest = 0;
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    const auto spec = scenario::random_scenario(p, seed);
    const auto audit = oracle::audit_argmin(spec, run(spec, Mode::Fso));
    checked += audit.checked;
    widest = std::max(widest, audit.max_candidates);
    c.expect(audit.ok(), "seed " + std::to_string(seed) + ": " + audit.summary());
  }
  c.expect(widest <= 10, "a candidate set exceeded 10: " + std::to_string(widest));
  c.expect(checked > 0, "no assignments audited");
  c.note("100 runs, " + std::to_string(checked) + " assignments, largest candidate set " + std::to_string(widest));
  return c.verdict();
}

// --- 6 -------------------------------------------------------------------

Verdict congestion() {
  Check c;
  OrgBuilder b("city");
  b.node("root").node("A", "root").node("B", "root").node("C", "root");
  b.node("a1", "A").node("a2", "A").node("c1", "C").node("c2", "C");
  for (int i = 0; i < 20; ++i) {
    char id[8];
    std::snprintf(id, sizeof id, "b%02d", i);
    b.actor("B", id, {"k"}, 4);
  }
  std::vector<protocols::Condition> conds;
  const std::vector<std::string> leaves = {"a1", "a2", "c1", "c2"};
  for (int i = 0; i < 20; ++i) {
    const Tick at = i;
    conds.push_back(condition("c" + std::to_string(i), "p", "city", leaves[static_cast<std::size_t>(i) % 4], at, at + 10));
  }
  const auto spec = spec_of({b.build()}, conds, {protocol("p", {role("k", {"k"}, 4)}, 3)}, Mode::Strict, 60);
  const auto t = run(spec, Mode::Strict);
  const auto cong = metrics::congestion_profile(t, spec.organizations);
  const auto root = cong.at("city/root");
  for (const auto& [node, n] : cong) c.expect(root >= n, node + " " + std::to_string(n) + " > root " + std::to_string(root));
  const auto r = metrics::response_metrics(t);
  c.expect(r.fired == 20, "expected 20 conditions, got " + std::to_string(r.fired));
  // every condition was resolved at the root, through a different subtree
  std::int64_t via_root = 0;
  for (const auto& e : t.events) {
    if (e.kind == EventKind::RoleAssigned && e.payload["decided_at"] == "root") ++via_root;
  }
  c.expect(via_root == 20, std::to_string(via_root) + " of 20 assignments decided at the root");
  std::int64_t second = 0;
  for (const auto& [node, n] : cong) {
    if (node != "city/root") second = std::max(second, n);
  }
  c.note("root " + std::to_string(root) + ", next busiest " + std::to_string(second));
  return c.verdict();
}

// --- 7 -------------------------------------------------------------------

Verdict bubbles() {
  Check c;
  int strict_runs = 0;
  for (const auto& file : kCorpus) {
    const auto spec = load(file);
    for (std::uint64_t seed = 0; seed < 5; ++seed) {
      const auto m = metrics::controllability_profile(run(spec, Mode::Strict, seed));
      c.expect(m.max_concurrent_bubbles == 1, file + " strict max " + std::to_string(m.max_concurrent_bubbles));
      ++strict_runs;
    }
  }
  scenario::RandomScenarioParams p;
  p.organizations = 2;
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    const auto m = metrics::controllability_profile(run(scenario::random_scenario(p, seed), Mode::Strict));
    c.expect(m.max_concurrent_bubbles == 1, "random " + std::to_string(seed) + " strict max " +
                                                std::to_string(m.max_concurrent_bubbles));
    ++strict_runs;
  }

  // two disjoint conditions at the same tick
  const auto disjoint = spec_of({OrgBuilder("o")
                                     .node("r")
                                     .node("a", "r")
                                     .node("b", "r")
                                     .actor("a", "xa", {"k"}, 3)
                                     .actor("b", "xb", {"k"}, 3)
                                     .build()},
                                {condition("c1", "p", "o", "a", 1, 9), condition("c2", "p", "o", "b", 1, 9)},
                                {protocol("p", {role("k", {"k"}, 3)}, 4)}, Mode::Fso, 12);
  const int fso_max = metrics::controllability_profile(run(disjoint, Mode::Fso)).max_concurrent_bubbles;
  c.expect(fso_max >= 2, "fso max " + std::to_string(fso_max));

  // c1 climbs from layer 3, c2 from layer 1 two ticks later; both reach the
  // root at tick 4 where the only qualified actor sits.
  const auto contention = spec_of({OrgBuilder("o")
                                       .node("r")
                                       .node("x1", "r")
                                       .node("x2", "x1")
                                       .node("x3", "x2")
                                       .node("y1", "r")
                                       .actor("r", "unique", {"k"}, 3)
                                       .build()},
                                  {condition("c1", "p", "o", "x3", 0, 20), condition("c2", "p", "o", "y1", 2, 20)},
                                  {protocol("p", {role("k", {"k"}, 3)}, 3)}, Mode::Fso, 30);
  const auto t = run(contention, Mode::Fso);
  int conflicts = 0;
  std::string winner;
  Tick conflict_tick = -1;
  std::string formed;
  for (const auto& e : t.events) {
    if (e.kind == EventKind::ConflictRecorded) {
      ++conflicts;
      winner = e.payload["winner"].get<std::string>();
      conflict_tick = e.tick;
    }
    if (e.kind == EventKind::SonFormed && formed.empty()) formed = e.payload["condition"].get<std::string>();
  }
  c.expect(conflicts == 1, std::to_string(conflicts) + " conflicts recorded");
  c.expect(winner == "c1", "winner " + winner);
  c.expect(formed == "c1", "first SON formed for " + formed);
  c.note(std::to_string(strict_runs) + " strict runs at 1");
  c.note("fso disjoint max " + std::to_string(fso_max));
  c.note("conflict at tick " + std::to_string(conflict_tick) + ", winner " + winner);
  return c.verdict();
}

// --- 8 -------------------------------------------------------------------

Verdict confinement() {
  Check c;
  std::int64_t checked = 0;
  auto audit = [&](const std::string& label, const scenario::ScenarioSpec& spec, const engine::Trace& t,
                   const std::set<std::string>& confined) {
    const auto a = oracle::audit_confinement(spec, t, confined);
    checked += a.checked;
    c.expect(a.ok(), label + ": " + a.summary());
  };

  const auto fire = load("fire_rescue.json");
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    audit("fire seed " + std::to_string(seed), fire, run(fire, Mode::Fso, seed, {"squad"}), {"squad"});
  }

  scenario::RandomScenarioParams p;
  p.organizations = 2;
  p.conditions = 12;
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    const auto spec = scenario::random_scenario(p, seed);
    audit("random " + std::to_string(seed), spec, run(spec, Mode::Fso, std::nullopt, {"role0"}), {"role0"});
  }

  // R can only come from deep inside a sibling subtree, S is unconfined;
  // a shallow R candidate exists one layer below the decision point.
  const auto mixed = spec_of({OrgBuilder("o")
                                  .node("r")
                                  .node("a", "r")
                                  .node("b", "r")
                                  .node("b1", "b")
                                  .node("b2", "b1")
                                  .actor("b2", "deep-r", {"r"}, 3)
                                  .actor("b2", "deep-s", {"s"}, 3)
                                  .actor("b", "shallow-r", {"r"}, 5)
                                  .build()},
                             {condition("c1", "p", "o", "a", 0, 15), condition("c2", "p", "o", "a", 8, 25)},
                             {protocol("p", {role("R", {"r"}, 3), role("S", {"s"}, 3)}, 3)}, Mode::Fso, 30);
  const auto t = run(mixed, Mode::Fso, std::nullopt, {"R"});
  audit("mixed", mixed, t, {"R"});
  std::set<std::string> r_actors;
  for (const auto& e : t.events) {
    if (e.kind == EventKind::RoleAssigned && e.payload["role"] == "R") r_actors.insert(e.payload["actor"].get<std::string>());
  }
  c.expect(!r_actors.contains("deep-r"), "confined role recruited deep-r");
  c.expect(r_actors.contains("shallow-r"), "confined role never filled from the hierarchy");
  c.note(std::to_string(checked) + " confined assignments audited");
  return c.verdict();
}

// --- 9 -------------------------------------------------------------------

Verdict qoe_calculus() {
  Check c;
  std::mt19937_64 rng(909);
  auto real = [&](double hi) { return static_cast<double>(rng() % 1000000) / 1000000.0 * hi; };
  auto factors = [&](int n) {
    std::vector<systemic::ForceFactor> f;
    for (int i = 0; i < n; ++i) {
      f.push_back({"f" + std::to_string(i), rng() % 2 ? systemic::ForceSign::Centripetal : systemic::ForceSign::Centrifugal,
                   real(100)});
    }
    return f;
  };

  for (int i = 0; i < 1000; ++i) {
    auto f = factors(1 + static_cast<int>(rng() % 12));
    const double base = systemic::qoe_sum(f);
    const double tol = 1e-9 * (1 + std::abs(base) + 100 * static_cast<double>(f.size()));

    auto shuffled = f;
    std::shuffle(shuffled.begin(), shuffled.end(), rng);
    c.expect(std::abs(systemic::qoe_sum(shuffled) - base) <= tol, "permutation changed the sum");

    auto more = f;
    more.push_back({"plus", systemic::ForceSign::Centripetal, real(50)});
    c.expect(systemic::qoe_sum(more) >= base - tol, "adding a centripetal force lowered QoE");
    auto less = f;
    less.push_back({"minus", systemic::ForceSign::Centrifugal, real(50)});
    c.expect(systemic::qoe_sum(less) <= base + tol, "adding a centrifugal force raised QoE");

    const systemic::QoEInputs in{real(10), real(10), real(10), real(10)};
    const systemic::QoEWeights w{real(3), real(3), real(3), real(3)};
    const auto s = systemic::qoe_report(f, in, w);
    const double expected = oracle::resum(f) - w.mismatch * in.mismatch_penalty - w.conflict * in.conflict_penalty -
                            w.failure * in.failure_penalty + w.success * in.success_bonus;
    c.expect(std::abs(s.total - expected) <= tol + 1e-9 * 400, "QoEScore identity broken");
  }

  for (int i = 0; i < 1000; ++i) {
    std::vector<systemic::ScoredCandidate> cands;
    std::vector<std::pair<std::string, double>> plain;
    const int n = 1 + static_cast<int>(rng() % 15);
    for (int k = 0; k < n; ++k) {
      systemic::QoEScore s;
      s.total = static_cast<double>(rng() % 7) - 3.0;  // ties on purpose
      const std::string id = "m" + std::to_string(k);
      cands.emplace_back(id, s);
      plain.emplace_back(id, s.total);
    }
    std::shuffle(cands.begin(), cands.end(), rng);
    const int capacity = 1 + static_cast<int>(rng() % 16);
    c.expect(systemic::select_for_existence(cands, capacity) == oracle::sort_and_take(plain, capacity),
             "select_for_existence disagrees with the sort oracle");
  }
  c.note("1000 QoE inputs, 1000 selection instances");
  return c.verdict();
}

// --- 10 ------------------------------------------------------------------

Verdict conservation() {
  Check c;
  int traces = 0;
  std::int64_t ticks = 0;
  auto audit = [&](const std::string& label, const scenario::ScenarioSpec& spec, const engine::Trace& t) {
    const auto a = oracle::audit_conservation(spec, t);
    ticks += a.checked;
    ++traces;
    c.expect(a.ok(), label + ": " + a.summary());
  };
  for (const auto& file : kCorpus) {
    const auto spec = load(file);
    for (const auto mode : {Mode::Strict, Mode::Sociocracy, Mode::Fso}) {
      for (std::uint64_t seed = 0; seed < 5; ++seed) {
        audit(file + " " + std::string(protocols::to_string(mode)), spec, run(spec, mode, seed));
      }
    }
  }
  scenario::RandomScenarioParams p;
  p.organizations = 2;
  p.conditions = 15;
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    const auto spec = scenario::random_scenario(p, seed);
    for (const auto mode : {Mode::Strict, Mode::Sociocracy, Mode::Fso}) {
      audit("random " + std::to_string(seed), spec, run(spec, mode));
    }
    // with failures injected
    auto failing = spec;
    const auto& o = failing.organizations[seed % failing.organizations.size()];
    failing.failures.push_back({o.id, o.nodes[seed % o.nodes.size()].id, static_cast<Tick>(seed % 10),
                                static_cast<Tick>(seed % 10 + 5)});
    audit("random failing " + std::to_string(seed), failing, run(failing, Mode::Fso));
  }
  c.note(std::to_string(traces) + " traces, " + std::to_string(ticks) + " tick balances");
  return c.verdict();
}

}  // namespace

int main() {
  const std::vector<std::pair<std::string, std::function<Verdict()>>> criteria = {
      {"determinism", determinism},
      {"spof", spof},
      {"scope separation", separation},
      {"neighboring layers", neighboring_layers},
      {"mismatch minimization", mismatch_minimization},
      {"congestion concentration", congestion},
      {"control bubbles", bubbles},
      {"confinement", confinement},
      {"qoe calculus", qoe_calculus},
      {"conservation", conservation},
  };
  bool all = true;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    Verdict v;
    try {
      v = criteria[i].second();
    } catch (const std::exception& e) {
      v = {false, std::string("exception: ") + e.what()};
    }
    all = all && v.pass;
    std::printf("criterion %2zu %-26s %s  %s\n", i + 1, criteria[i].first.c_str(), v.pass ? "PASS" : "FAIL",
                v.detail.c_str());
  }
  return all ? 0 : 1;
}
