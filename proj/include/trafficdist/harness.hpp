#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "trafficdist/corpus.hpp"
#include "trafficdist/manipulations.hpp"
#include "trafficdist/metrics.hpp"

namespace trafficdist {

struct SpearmanResult {
  double rho = 0.0;
  bool degenerate = false;  // a constant input; rho reported as 0
};

// Average (fractional) ranks, 1-based. Descending ranks the largest value 1.
std::vector<double> average_ranks(std::span<const double> values, bool descending);

// Rank correlation between metric scores (higher = less noisy) and the true
// noise ranks (1 = least noisy). Ties get average ranks.
SpearmanResult spearman(std::span<const double> predicted_scores, std::span<const int> true_ranks);

// Kahan-Babuska (Neumaier) summation.
double stable_sum(std::span<const double> values);

struct EvaluationConfig {
  std::size_t max_bag_size = 100;
  std::uint64_t seed = 0;
  // Inclusive upper edges of the bag-size buckets.
  std::vector<std::size_t> bucket_edges = {2, 5, 10, 25, 50, 100};
  std::size_t threads = 1;
};

struct TaskOutcome {
  std::string context_id;
  std::string manipulation;
  std::size_t reference_size = 0;  // after capping
  bool failed = false;
  std::string error_kind;
  std::string error;
  double rho = 0.0;
  bool degenerate = false;
  std::vector<double> scores;
};

struct BucketStat {
  std::string range;
  double mean_rho = 0.0;
  std::size_t n = 0;
};

struct MetricResult {
  std::string metric;
  std::vector<std::size_t> bucket_edges;
  std::vector<TaskOutcome> tasks;  // sorted by (manipulation, context_id)
  std::size_t count = 0;           // scored tasks
  std::size_t n_failed = 0;
  std::size_t n_degenerate = 0;
  double mean_rho = 0.0;
  double median_rho = 0.0;
  std::vector<BucketStat> buckets;
};

// Bucket label for a size ("1-2", "3-5", ..., "101+").
std::string bucket_label(std::size_t size, const std::vector<std::size_t>& edges);

// Aggregates (mean, median, buckets) over the non-failed outcomes given.
MetricResult summarize(std::string metric, std::vector<TaskOutcome> outcomes,
                       const std::vector<std::size_t>& bucket_edges);

// Caps every bag at max_bag_size, scores each candidate against its
// reference and correlates the scores with the true ranks. A task whose
// metric throws is recorded as failed and left out of the aggregates.
MetricResult evaluate_metric(const Metric& metric, const std::vector<RankingTask>& tasks,
                             const EvaluationConfig& config);
std::vector<MetricResult> evaluate_metrics(const std::vector<Metric>& metrics,
                                           const std::vector<RankingTask>& tasks,
                                           const EvaluationConfig& config);

struct TieThreshold {
  std::string metric;
  double threshold = 0.0;
  double target_rate = 0.0;
};

// Picks the threshold so that round(target_rate * n) of the |diffs| are at or
// below it (lower quantile). Target 0 yields a threshold under the smallest diff.
TieThreshold calibrate_tie_threshold(std::span<const double> score_diffs, double target_rate,
                                     std::string metric = {});

enum class Preference { a, b, tie };

std::string_view to_string(Preference p);

struct Comparison {
  Preference verdict = Preference::tie;
  double score_a = 0.0;
  double score_b = 0.0;
};

Comparison decide(double score_a, double score_b, double threshold);

Comparison compare_bags(const Metric& metric, const Bag& reference, const Bag& a, const Bag& b,
                        const TieThreshold& tie);

}  // namespace trafficdist
