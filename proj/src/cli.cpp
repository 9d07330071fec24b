#include "orgsim/cli.hpp"

#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iomanip>
#include <ostream>
#include <sstream>
#include <thread>

#include "CLI11.hpp"
#include "orgsim/engine.hpp"
#include "orgsim/error.hpp"

namespace orgsim::cli {

namespace {

namespace fs = std::filesystem;

struct IoError : Error {
  explicit IoError(const std::string& detail) : Error("io", detail) {}
};

metrics::MetricsReport run_one(const scenario::ScenarioSpec& spec, protocols::Mode mode, std::uint64_t seed) {
  auto config = engine::RunConfig::from(spec);
  config.mode = mode;
  config.seed = seed;
  const auto trace = engine::run(spec, config);
  return metrics::build_report(spec.organizations, trace, spec.qoe_weights, spec.static_force_factors);
}

std::int64_t root_congestion(const scenario::ScenarioSpec& spec, const metrics::MetricsReport& r) {
  if (spec.organizations.empty()) return 0;
  const auto& first = spec.organizations.front();
  return r.congestion_at(first.id, first.root);
}

void write_file(const fs::path& path, const std::string& content) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw IoError("cannot write " + path.string());
  f << content;
  if (!f) throw IoError("cannot write " + path.string());
}

scenario::ScenarioSpec load(const std::string& path) { return scenario::parse_scenario(read_file(path)); }

// Per-metric extractors for sweeps, in output order.
const std::vector<std::pair<std::string, std::function<double(const CompareRow&)>>>& sweep_metrics() {
  static const std::vector<std::pair<std::string, std::function<double(const CompareRow&)>>> kMetrics = {
      {"success_rate", [](const CompareRow& r) { return r.report.response.success_rate; }},
      {"mean_latency", [](const CompareRow& r) { return r.report.response.mean_latency; }},
      {"mismatch_total", [](const CompareRow& r) { return static_cast<double>(r.report.response.mismatch_total); }},
      {"conflict_count", [](const CompareRow& r) { return static_cast<double>(r.report.response.conflict_count); }},
      {"max_concurrent_bubbles",
       [](const CompareRow& r) { return static_cast<double>(r.report.controllability.max_concurrent_bubbles); }},
      {"root_traceability", [](const CompareRow& r) { return r.report.controllability.root_traceability; }},
      {"root_congestion", [](const CompareRow& r) { return static_cast<double>(r.root_congestion); }},
      {"qoe_total", [](const CompareRow& r) { return r.report.qoe.total; }},
  };
  return kMetrics;
}

Json compare_json(const std::vector<CompareRow>& rows) {
  Json out = Json::array();
  for (const auto& r : rows) {
    Json j;
    j["mode"] = protocols::to_string(r.mode);
    j["success_rate"] = r.report.response.success_rate;
    j["mean_latency"] = r.report.response.mean_latency;
    j["mismatch_total"] = r.report.response.mismatch_total;
    j["max_concurrent_bubbles"] = r.report.controllability.max_concurrent_bubbles;
    j["root_congestion"] = r.root_congestion;
    j["trace_hash"] = r.report.trace_hash;
    out.push_back(std::move(j));
  }
  return out;
}

std::string compare_table(const std::vector<CompareRow>& rows, bool csv) {
  const std::vector<std::string> header = {"mode", "success_rate", "mean_latency", "mismatch_total",
                                           "max_concurrent_bubbles", "root_congestion"};
  std::vector<std::vector<std::string>> cells{header};
  for (const auto& r : rows) {
    cells.push_back({std::string(protocols::to_string(r.mode)), metrics::format_double(r.report.response.success_rate),
                     metrics::format_double(r.report.response.mean_latency),
                     std::to_string(r.report.response.mismatch_total),
                     std::to_string(r.report.controllability.max_concurrent_bubbles),
                     std::to_string(r.root_congestion)});
  }
  std::ostringstream os;
  if (csv) {
    for (const auto& row : cells) {
      for (std::size_t i = 0; i < row.size(); ++i) os << (i ? "," : "") << row[i];
      os << '\n';
    }
    return os.str();
  }
  std::vector<std::size_t> width(header.size(), 0);
  for (const auto& row : cells) {
    for (std::size_t i = 0; i < row.size(); ++i) width[i] = std::max(width[i], row[i].size());
  }
  for (const auto& row : cells) {
    for (std::size_t i = 0; i < row.size(); ++i) {
      if (i) os << "  ";
      if (i + 1 == row.size()) {
        os << row[i];
      } else {
        os << std::left << std::setw(static_cast<int>(width[i])) << row[i];
      }
    }
    os << '\n';
  }
  return os.str();
}

void report_scenario_error(const scenario::ScenarioError& e, std::ostream& err) {
  for (const auto& d : e.diagnostics()) err << "error: " << d.to_string() << '\n';
}

}  // namespace

std::string read_file(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw IoError("cannot read " + path);
  std::ostringstream os;
  os << f.rdbuf();
  return os.str();
}

std::vector<protocols::Mode> parse_modes(const std::string& list) {
  std::vector<protocols::Mode> out;
  std::stringstream ss(list);
  std::string item;
  while (std::getline(ss, item, ',')) {
    const auto mode = protocols::parse_mode(item);
    if (!mode) throw Error("bad-mode", "unknown mode '" + item + "'");
    out.push_back(*mode);
  }
  if (out.empty()) throw Error("bad-mode", "no modes given");
  return out;
}

std::vector<CompareRow> compare(const scenario::ScenarioSpec& spec, const std::vector<protocols::Mode>& modes,
                                std::uint64_t seed) {
  std::vector<CompareRow> rows;
  for (auto m : modes) {
    CompareRow row{m, run_one(spec, m, seed), 0};
    row.root_congestion = root_congestion(spec, row.report);
    rows.push_back(std::move(row));
  }
  return rows;
}

std::string sweep_csv(const scenario::ScenarioSpec& spec, const std::vector<protocols::Mode>& modes,
                      std::uint64_t seeds, bool parallel) {
  if (seeds == 0) throw Error("bad-seeds", "a sweep needs at least one seed");
  const std::size_t n = static_cast<std::size_t>(seeds);

  // results[mode][seed]; each slot written by exactly one job.
  std::vector<std::vector<CompareRow>> results(modes.size(), std::vector<CompareRow>(n));
  auto job = [&](std::size_t m, std::size_t s) {
    auto& row = results[m][s];
    row.mode = modes[m];
    row.report = run_one(spec, modes[m], s);
    row.root_congestion = root_congestion(spec, row.report);
  };

  if (parallel) {
    const std::size_t total = modes.size() * n;
    const std::size_t workers = std::max<std::size_t>(1, std::min<std::size_t>(std::thread::hardware_concurrency(), total));
    std::vector<std::thread> pool;
    std::vector<std::exception_ptr> errors(workers);
    for (std::size_t w = 0; w < workers; ++w) {
      pool.emplace_back([&, w] {
        try {
          for (std::size_t k = w; k < total; k += workers) job(k / n, k % n);
        } catch (...) {
          errors[w] = std::current_exception();
        }
      });
    }
    for (auto& t : pool) t.join();
    for (auto& e : errors) {
      if (e) std::rethrow_exception(e);
    }
  } else {
    for (std::size_t m = 0; m < modes.size(); ++m) {
      for (std::size_t s = 0; s < n; ++s) job(m, s);
    }
  }

  std::string out = "mode,metric,mean,min,max\n";
  for (std::size_t m = 0; m < modes.size(); ++m) {
    for (const auto& [name, get] : sweep_metrics()) {
      double sum = 0.0;
      double lo = get(results[m][0]);
      double hi = lo;
      for (const auto& row : results[m]) {
        const double v = get(row);
        sum += v;
        lo = std::min(lo, v);
        hi = std::max(hi, v);
      }
      out += std::string(protocols::to_string(modes[m])) + "," + name + "," +
             metrics::format_double(sum / static_cast<double>(n)) + "," + metrics::format_double(lo) + "," +
             metrics::format_double(hi) + "\n";
    }
  }
  return out;
}

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Organizational control protocol simulator"};
  app.require_subcommand(1);

  std::string path;
  std::string mode_name;
  std::string modes_list = "strict,sociocracy,fso";
  std::uint64_t seed = 0;
  std::uint64_t seeds = 0;
  std::string out_dir = "out";
  std::string format;

  auto* validate = app.add_subcommand("validate", "Parse and validate a scenario");
  validate->add_option("scenario", path, "Scenario file")->required();

  auto* run = app.add_subcommand("run", "Run one simulation and write trace and metrics");
  run->add_option("scenario", path, "Scenario file")->required();
  run->add_option("--mode", mode_name, "strict, sociocracy or fso (default: scenario's run.mode)");
  auto* run_seed = run->add_option("--seed", seed, "Seed (default: scenario's run.seed, else 0)");
  run->add_option("--out", out_dir, "Output directory")->capture_default_str();
  run->add_option("--format", format, "Summary on stdout: text or json")->check(CLI::IsMember({"text", "json"}));

  auto* cmp = app.add_subcommand("compare", "Run several modes on the same condition stream");
  cmp->add_option("scenario", path, "Scenario file")->required();
  cmp->add_option("--modes", modes_list, "Comma-separated modes")->capture_default_str();
  auto* cmp_seed = cmp->add_option("--seed", seed, "Seed");
  cmp->add_option("--format", format, "text, json or csv")->check(CLI::IsMember({"text", "json", "csv"}));

  auto* sweep = app.add_subcommand("sweep", "Aggregate metrics over seeds 0..N-1");
  sweep->add_option("scenario", path, "Scenario file")->required();
  sweep->add_option("--modes", modes_list, "Comma-separated modes")->capture_default_str();
  sweep->add_option("--seeds", seeds, "Number of seeds N")->required();
  auto* sweep_out = sweep->add_option("--out", out_dir, "Write the CSV here instead of stdout");

  auto* spof = app.add_subcommand("spof", "Single-point-of-failure criticality per node");
  spof->add_option("scenario", path, "Scenario file")->required();
  spof->add_option("--format", format, "json or csv")->check(CLI::IsMember({"json", "csv"}));

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitIo;
  }

  try {
    const auto spec = load(path);

    if (app.got_subcommand(validate)) {
      out << "ok: " << spec.organizations.size() << " organization(s), " << spec.protocol_library.size()
          << " protocol(s)\n";
      return kExitOk;
    }

    if (app.got_subcommand(spof)) {
      if (format == "csv") {
        std::string csv;
        for (const auto& o : spec.organizations) {
          auto part = metrics::spof_csv(metrics::spof_analysis(o));
          csv += csv.empty() ? part : part.substr(part.find('\n') + 1);
        }
        out << csv;
      } else {
        Json j = Json::array();
        for (const auto& o : spec.organizations) j.push_back(metrics::spof_json(metrics::spof_analysis(o)));
        out << j.dump(2) << '\n';
      }
      return kExitOk;
    }

    if (app.got_subcommand(run)) {
      auto config = engine::RunConfig::from(spec);
      if (!mode_name.empty()) {
        const auto m = protocols::parse_mode(mode_name);
        if (!m) throw Error("bad-mode", "unknown mode '" + mode_name + "'");
        config.mode = *m;
      }
      if (run_seed->count() > 0) config.seed = seed;
      const auto trace = engine::run(spec, config);
      const auto report = metrics::build_report(spec.organizations, trace, spec.qoe_weights, spec.static_force_factors);

      std::error_code ec;
      fs::create_directories(out_dir, ec);
      if (ec) throw IoError("cannot create " + out_dir + ": " + ec.message());
      const fs::path dir(out_dir);
      write_file(dir / "trace.jsonl", engine::serialize_trace(trace));
      write_file(dir / "report.json", report.to_json().dump(2) + "\n");
      write_file(dir / "congestion.csv", metrics::congestion_csv(report));
      write_file(dir / "bubbles.csv", metrics::bubbles_csv(report));

      if (format == "json") {
        out << report.to_json().dump(2) << '\n';
      } else {
        out << "mode " << report.mode << "\nseed " << report.seed << "\nfired " << report.response.fired
            << "\nsuccess_rate " << metrics::format_double(report.response.success_rate) << "\n";
      }
      out << "trace_hash " << report.trace_hash << '\n';
      return kExitOk;
    }

    if (app.got_subcommand(cmp)) {
      const auto modes = parse_modes(modes_list);
      const auto rows = compare(spec, modes, cmp_seed->count() > 0 ? seed : spec.run.seed);
      if (format == "json") {
        out << compare_json(rows).dump(2) << '\n';
      } else {
        out << compare_table(rows, format == "csv");
      }
      return kExitOk;
    }

    if (app.got_subcommand(sweep)) {
      const auto modes = parse_modes(modes_list);
      const char* serial = std::getenv("ORGSIM_NO_PARALLEL");
      const bool parallel = serial == nullptr || std::string_view(serial) != "1";
      const auto csv = sweep_csv(spec, modes, seeds, parallel);
      if (sweep_out->count() > 0) {
        write_file(out_dir, csv);
      } else {
        out << csv;
      }
      return kExitOk;
    }
  } catch (const scenario::ScenarioError& e) {
    report_scenario_error(e, err);
    return kExitDomain;
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return e.code() == "io" ? kExitIo : kExitDomain;
  }
  return kExitIo;
}

}  // namespace orgsim::cli
