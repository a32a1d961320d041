#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "trafficdist/cluster.hpp"

namespace trafficdist {

struct RunConfig {
  std::filesystem::path references;
  std::filesystem::path generated;
  std::filesystem::path generated_b;
  std::filesystem::path embeddings;
  std::filesystem::path plan;
  std::filesystem::path lexicon;
  std::filesystem::path input;  // report subcommand
  std::vector<std::string> metrics;
  std::optional<int> levels;
  std::uint64_t seed = 0;
  std::size_t max_bag_size = 100;
  DbscanParams dbscan;
  double kn_discount = 0.75;
  std::optional<double> tie_threshold;
  std::optional<double> tie_rate;
  std::string format = "json";
  std::size_t threads = 0;  // 0: hardware concurrency, capped by TRAFFICDIST_THREADS
};

enum ExitCode : int { kExitOk = 0, kExitUsage = 1, kExitData = 2, kExitPartialFailure = 3 };

// Share of failed tasks above which validate exits with kExitPartialFailure.
constexpr double kMaxFailedShare = 0.10;

// Worker count for a run: the configured count (or the machine's), never
// above TRAFFICDIST_THREADS when that is set.
std::size_t resolve_threads(std::size_t requested);

// Each command checks all inputs before computing, writes its document to
// out once at the end and returns an exit code. Library errors propagate.
int cmd_score(const RunConfig& config, std::ostream& out);
int cmd_validate(const RunConfig& config, std::ostream& out);
int cmd_compare(const RunConfig& config, std::ostream& out);
int cmd_report(const RunConfig& config, std::ostream& out);

// kExitUsage for UsageError, kExitData for the other library errors.
int exit_code_for(const std::exception& e);

}  // namespace trafficdist
