#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "orgsim/metrics.hpp"
#include "orgsim/protocols.hpp"
#include "orgsim/scenario_io.hpp"

namespace orgsim::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitDomain = 1;
inline constexpr int kExitIo = 2;

// Subcommands: validate, run, compare, sweep, spof.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

// Throws Error("io") when the file cannot be read.
std::string read_file(const std::string& path);

// Parses "strict,fso" style lists. Throws Error("bad-mode").
std::vector<protocols::Mode> parse_modes(const std::string& list);

struct CompareRow {
  protocols::Mode mode = protocols::Mode::Fso;
  metrics::MetricsReport report;
  std::int64_t root_congestion = 0;
};

// Each mode on the same condition stream (same seed).
std::vector<CompareRow> compare(const scenario::ScenarioSpec& spec, const std::vector<protocols::Mode>& modes,
                                std::uint64_t seed);

// mode,metric,mean,min,max over seeds 0..seeds-1 for every mode, in the given
// mode order and a fixed metric order. Throws Error("bad-seeds") for 0 seeds.
std::string sweep_csv(const scenario::ScenarioSpec& spec, const std::vector<protocols::Mode>& modes,
                      std::uint64_t seeds, bool parallel);

}  // namespace orgsim::cli
