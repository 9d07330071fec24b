#pragma once

#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "orgsim/engine.hpp"
#include "orgsim/org_model.hpp"
#include "orgsim/systemic.hpp"

namespace orgsim::metrics {

struct SpofReport {
  org::OrgId org;
  std::vector<std::pair<org::NodeId, double>> criticality;  // ascending node id

  double of(std::string_view node) const;
};

// |descendants(n)| / (|nodes| - 1) per node; all zero for a lone root.
// Throws Error("invalid-topology") when validate_topology reports anything.
SpofReport spof_analysis(const org::Organization& org);

// Messages touching each node, keyed "org/node". Both endpoints of every
// MessageSent count; a relay is the receiving end of one hop and the sending
// end of the next. Nodes of `orgs` with no traffic appear with zero.
using Congestion = std::map<std::string, std::int64_t>;
Congestion congestion_profile(const engine::Trace& trace, std::span<const org::Organization> orgs = {});

std::string congestion_key(std::string_view org, std::string_view node);

struct Controllability {
  std::vector<int> timeline;  // open bubbles at each tick of [0, horizon)
  int max_concurrent_bubbles = 0;
  double root_traceability = 0.0;
  std::int64_t assignments = 0;
  std::int64_t root_traceable = 0;
};

// The root persona counts as one bubble throughout; representative bubbles
// live on [election, min(tenure_until, replacement)); SON bubbles on
// [formation, dissolution).
Controllability controllability_profile(const engine::Trace& trace);

struct ResponseMetrics {
  std::int64_t fired = 0;
  std::int64_t succeeded = 0;
  std::int64_t failed = 0;
  double success_rate = 0.0;  // 0 when nothing fired
  double mean_latency = 0.0;  // over succeeded conditions only
  std::int64_t mismatch_total = 0;
  std::int64_t conflict_count = 0;
  std::int64_t messages = 0;
  std::int64_t dropped_messages = 0;
  std::map<std::string, std::int64_t> failure_reasons;
  std::map<int, std::int64_t> layer_span_histogram;
  std::map<int, std::int64_t> org_span_histogram;
};

ResponseMetrics response_metrics(const engine::Trace& trace);

struct MetricsReport {
  std::string mode;
  std::uint64_t seed = 0;
  Tick horizon = 0;
  std::string trace_hash;
  ResponseMetrics response;
  Congestion congestion;
  Controllability controllability;
  systemic::QoEScore qoe;

  double success_rate() const { return response.success_rate; }
  std::int64_t congestion_at(std::string_view org, std::string_view node) const;

  Json to_json() const;
};

MetricsReport build_report(std::span<const org::Organization> orgs, const engine::Trace& trace,
                           const systemic::QoEWeights& weights,
                           std::span<const systemic::ForceFactor> static_factors);

// Shortest round-trip decimal form, e.g. 0.5, 1, 2.25.
std::string format_double(double value);

// org,node,messages
std::string congestion_csv(const MetricsReport& report);
// tick,open_bubbles
std::string bubbles_csv(const MetricsReport& report);
// node,criticality
std::string spof_csv(const SpofReport& report);
Json spof_json(const SpofReport& report);

}  // namespace orgsim::metrics
