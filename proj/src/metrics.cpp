#include "orgsim/metrics.hpp"

#include <algorithm>
#include <charconv>

#include "orgsim/error.hpp"

namespace orgsim::metrics {

namespace {

Json histogram_json(const std::map<int, std::int64_t>& h) {
  Json out = Json::object();
  for (const auto& [k, v] : h) out[std::to_string(k)] = v;
  return out;
}

}  // namespace

double SpofReport::of(std::string_view node) const {
  for (const auto& [id, c] : criticality) {
    if (id == node) return c;
  }
  throw Error("no-such-node", std::string(node));
}

SpofReport spof_analysis(const org::Organization& org) {
  if (const auto violations = org::validate_topology(org); !violations.empty()) {
    throw Error("invalid-topology", org.id + ": " + violations.front().to_string());
  }
  SpofReport report;
  report.org = org.id;
  const double others = static_cast<double>(org.nodes.size()) - 1.0;
  for (const auto& n : org.nodes) {
    const double d = static_cast<double>(org::descendants(org, n.id).size());
    report.criticality.emplace_back(n.id, others > 0 ? d / others : 0.0);
  }
  std::sort(report.criticality.begin(), report.criticality.end());
  return report;
}

std::string congestion_key(std::string_view org, std::string_view node) {
  return std::string(org) + "/" + std::string(node);
}

Congestion congestion_profile(const engine::Trace& trace, std::span<const org::Organization> orgs) {
  Congestion out;
  for (const auto& o : orgs) {
    for (const auto& n : o.nodes) out[congestion_key(o.id, n.id)] = 0;
  }
  for (const auto& e : trace.events) {
    if (e.kind != EventKind::MessageSent) continue;
    const auto& p = e.payload;
    ++out[congestion_key(p["from_org"].get<std::string>(), p["from"].get<std::string>())];
    ++out[congestion_key(p["to_org"].get<std::string>(), p["to"].get<std::string>())];
  }
  return out;
}

Controllability controllability_profile(const engine::Trace& trace) {
  Controllability out;
  const Tick horizon = trace.horizon;
  struct Span {
    Tick open;
    Tick close;
  };
  std::map<std::string, Span> bubbles;
  for (const auto& e : trace.events) {
    const auto& p = e.payload;
    switch (e.kind) {
      case EventKind::ElectionHeld: {
        if (p["bubble_closed"].is_string()) {
          auto& b = bubbles.at(p["bubble_closed"].get<std::string>());
          b.close = std::min(b.close, e.tick);
        }
        bubbles[p["bubble_opened"].get<std::string>()] = {e.tick, std::min(p["tenure_until"].get<Tick>(), horizon)};
        break;
      }
      case EventKind::SonFormed:
        if (p["bubble_opened"].is_string()) bubbles[p["bubble_opened"].get<std::string>()] = {e.tick, horizon};
        break;
      case EventKind::SonDissolved:
        if (p["bubble_closed"].is_string()) {
          auto& b = bubbles.at(p["bubble_closed"].get<std::string>());
          b.close = std::min(b.close, e.tick);
        }
        break;
      case EventKind::RoleAssigned:
        ++out.assignments;
        if (p["via_root"].get<bool>()) ++out.root_traceable;
        break;
      default: break;
    }
  }

  // Difference array over [0, horizon), root persona included.
  std::vector<int> delta(static_cast<std::size_t>(std::max<Tick>(horizon, 0)) + 1, 0);
  if (horizon > 0) {
    delta[0] += 1;
    delta[static_cast<std::size_t>(horizon)] -= 1;
  }
  for (const auto& [id, s] : bubbles) {
    const Tick lo = std::clamp<Tick>(s.open, 0, horizon);
    const Tick hi = std::clamp<Tick>(s.close, 0, horizon);
    if (lo >= hi) continue;
    delta[static_cast<std::size_t>(lo)] += 1;
    delta[static_cast<std::size_t>(hi)] -= 1;
  }
  int open = 0;
  for (Tick t = 0; t < horizon; ++t) {
    open += delta[static_cast<std::size_t>(t)];
    out.timeline.push_back(open);
    out.max_concurrent_bubbles = std::max(out.max_concurrent_bubbles, open);
  }
  out.root_traceability =
      out.assignments == 0 ? 0.0 : static_cast<double>(out.root_traceable) / static_cast<double>(out.assignments);
  return out;
}

ResponseMetrics response_metrics(const engine::Trace& trace) {
  ResponseMetrics out;
  std::int64_t latency_sum = 0;
  for (const auto& e : trace.events) {
    const auto& p = e.payload;
    switch (e.kind) {
      case EventKind::ConditionFired: ++out.fired; break;
      case EventKind::SonFormed:
        ++out.succeeded;
        latency_sum += p["latency"].get<std::int64_t>();
        ++out.layer_span_histogram[p["layer_span"].get<int>()];
        ++out.org_span_histogram[p["org_span"].get<int>()];
        break;
      case EventKind::ProtocolFailed: {
        ++out.failed;
        const auto reason = p["reason"].get<std::string>();
        ++out.failure_reasons[reason];
        if (reason == "route-dead") ++out.dropped_messages;
        break;
      }
      case EventKind::RoleAssigned: out.mismatch_total += p["mismatch"].get<std::int64_t>(); break;
      case EventKind::ConflictRecorded: ++out.conflict_count; break;
      case EventKind::MessageSent: ++out.messages; break;
      default: break;
    }
  }
  if (out.fired > 0) out.success_rate = static_cast<double>(out.succeeded) / static_cast<double>(out.fired);
  if (out.succeeded > 0) out.mean_latency = static_cast<double>(latency_sum) / static_cast<double>(out.succeeded);
  return out;
}

std::int64_t MetricsReport::congestion_at(std::string_view org, std::string_view node) const {
  const auto it = congestion.find(congestion_key(org, node));
  return it == congestion.end() ? 0 : it->second;
}

MetricsReport build_report(std::span<const org::Organization> orgs, const engine::Trace& trace,
                           const systemic::QoEWeights& weights,
                           std::span<const systemic::ForceFactor> static_factors) {
  MetricsReport r;
  r.mode = std::string(protocols::to_string(trace.mode));
  r.seed = trace.seed;
  r.horizon = trace.horizon;
  r.trace_hash = engine::trace_hash(trace);
  r.response = response_metrics(trace);
  r.congestion = congestion_profile(trace, orgs);
  r.controllability = controllability_profile(trace);
  systemic::QoEInputs in;
  in.mismatch_penalty = static_cast<double>(r.response.mismatch_total);
  in.conflict_penalty = static_cast<double>(r.response.conflict_count);
  in.failure_penalty = static_cast<double>(r.response.failed);
  in.success_bonus = static_cast<double>(r.response.succeeded);
  r.qoe = systemic::qoe_report(static_factors, in, weights);
  return r;
}

Json MetricsReport::to_json() const {
  Json j;
  j["mode"] = mode;
  j["seed"] = seed;
  j["horizon"] = horizon;
  j["trace_hash"] = trace_hash;
  j["fired"] = response.fired;
  j["succeeded"] = response.succeeded;
  j["failed"] = response.failed;
  j["success_rate"] = response.success_rate;
  j["mean_latency"] = response.mean_latency;
  j["mismatch_total"] = response.mismatch_total;
  j["conflict_count"] = response.conflict_count;
  j["messages"] = response.messages;
  j["dropped_messages"] = response.dropped_messages;
  Json reasons = Json::object();
  for (const auto& [k, v] : response.failure_reasons) reasons[k] = v;
  j["failure_reasons"] = std::move(reasons);
  Json cong = Json::object();
  for (const auto& [k, v] : congestion) cong[k] = v;
  j["congestion"] = std::move(cong);
  j["max_concurrent_bubbles"] = controllability.max_concurrent_bubbles;
  j["root_traceability"] = controllability.root_traceability;
  j["layer_span_histogram"] = histogram_json(response.layer_span_histogram);
  j["org_span_histogram"] = histogram_json(response.org_span_histogram);
  j["qoe"] = Json{{"static_sum", qoe.static_sum},
                  {"mismatch_penalty", qoe.mismatch_penalty},
                  {"conflict_penalty", qoe.conflict_penalty},
                  {"failure_penalty", qoe.failure_penalty},
                  {"success_bonus", qoe.success_bonus},
                  {"total", qoe.total},
                  {"weights", Json{{"mismatch", qoe.weights.mismatch},
                                   {"conflict", qoe.weights.conflict},
                                   {"failure", qoe.weights.failure},
                                   {"success", qoe.weights.success}}}};
  return j;
}

std::string format_double(double value) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, value);
  return std::string(buf, res.ptr);
}

std::string congestion_csv(const MetricsReport& report) {
  std::string out = "org,node,messages\n";
  for (const auto& [key, n] : report.congestion) {
    const auto slash = key.find('/');
    out += key.substr(0, slash) + "," + key.substr(slash + 1) + "," + std::to_string(n) + "\n";
  }
  return out;
}

std::string bubbles_csv(const MetricsReport& report) {
  std::string out = "tick,open_bubbles\n";
  for (std::size_t t = 0; t < report.controllability.timeline.size(); ++t) {
    out += std::to_string(t) + "," + std::to_string(report.controllability.timeline[t]) + "\n";
  }
  return out;
}

std::string spof_csv(const SpofReport& report) {
  std::string out = "org,node,criticality\n";
  for (const auto& [node, c] : report.criticality) out += report.org + "," + node + "," + format_double(c) + "\n";
  return out;
}

Json spof_json(const SpofReport& report) {
  Json nodes = Json::object();
  for (const auto& [node, c] : report.criticality) nodes[node] = c;
  return Json{{"org", report.org}, {"criticality", std::move(nodes)}};
}

}  // namespace orgsim::metrics
