#include "trafficdist/harness.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <numeric>
#include <thread>
#include <tuple>

#include "trafficdist/errors.hpp"
#include "trafficdist/random.hpp"

namespace trafficdist {

std::vector<double> average_ranks(std::span<const double> values, bool descending) {
  const std::size_t n = values.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return descending ? values[a] > values[b] : values[a] < values[b];
  });
  std::vector<double> ranks(n);
  for (std::size_t i = 0; i < n;) {
    std::size_t j = i + 1;
    while (j < n && values[order[j]] == values[order[i]]) ++j;
    // positions i..j-1 share the mean of ranks i+1..j
    const double mean = (static_cast<double>(i + 1) + static_cast<double>(j)) / 2.0;
    for (std::size_t k = i; k < j; ++k) ranks[order[k]] = mean;
    i = j;
  }
  return ranks;
}

SpearmanResult spearman(std::span<const double> predicted_scores, std::span<const int> true_ranks) {
  if (predicted_scores.size() != true_ranks.size()) {
    throw UsageError("spearman inputs differ in length");
  }
  if (predicted_scores.size() < 2) throw UsageError("spearman needs at least 2 items");
  std::vector<double> truth(true_ranks.begin(), true_ranks.end());
  std::vector<double> x = average_ranks(predicted_scores, /*descending=*/true);
  std::vector<double> y = average_ranks(truth, /*descending=*/false);
  const double n = static_cast<double>(x.size());
  const double mean = (n + 1.0) / 2.0;  // average ranks always have this mean
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxy += (x[i] - mean) * (y[i] - mean);
    sxx += (x[i] - mean) * (x[i] - mean);
    syy += (y[i] - mean) * (y[i] - mean);
  }
  if (sxx == 0.0 || syy == 0.0) return {0.0, true};
  return {std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0), false};
}

double stable_sum(std::span<const double> values) {
  double sum = 0.0, c = 0.0;
  for (double v : values) {
    double t = sum + v;
    c += std::abs(sum) >= std::abs(v) ? (sum - t) + v : (v - t) + sum;
    sum = t;
  }
  return sum + c;
}

std::string bucket_label(std::size_t size, const std::vector<std::size_t>& edges) {
  std::size_t lo = 1;
  for (std::size_t hi : edges) {
    if (size <= hi) return std::to_string(lo) + "-" + std::to_string(hi);
    lo = hi + 1;
  }
  return std::to_string(lo) + "+";
}

namespace {

double median(std::vector<double> v) {
  if (v.empty()) return 0.0;
  std::sort(v.begin(), v.end());
  const std::size_t m = v.size() / 2;
  return v.size() % 2 ? v[m] : (v[m - 1] + v[m]) / 2.0;
}

bool outcome_less(const TaskOutcome& a, const TaskOutcome& b) {
  return std::tie(a.manipulation, a.context_id, a.failed, a.scores, a.error) <
         std::tie(b.manipulation, b.context_id, b.failed, b.scores, b.error);
}

}  // namespace

MetricResult summarize(std::string metric, std::vector<TaskOutcome> outcomes,
                       const std::vector<std::size_t>& bucket_edges) {
  std::sort(outcomes.begin(), outcomes.end(), outcome_less);
  MetricResult result;
  result.metric = std::move(metric);
  result.bucket_edges = bucket_edges;

  std::vector<double> rhos;
  // label -> rhos, with labels kept in edge order
  std::vector<std::pair<std::string, std::vector<double>>> buckets;
  std::size_t lo = 1;
  for (std::size_t hi : bucket_edges) {
    buckets.emplace_back(std::to_string(lo) + "-" + std::to_string(hi), std::vector<double>{});
    lo = hi + 1;
  }
  buckets.emplace_back(std::to_string(lo) + "+", std::vector<double>{});

  for (const auto& o : outcomes) {
    if (o.failed) {
      ++result.n_failed;
      continue;
    }
    ++result.count;
    if (o.degenerate) ++result.n_degenerate;
    rhos.push_back(o.rho);
    const std::string label = bucket_label(o.reference_size, bucket_edges);
    for (auto& [name, values] : buckets) {
      if (name == label) values.push_back(o.rho);
    }
  }
  if (!rhos.empty()) {
    result.mean_rho = stable_sum(rhos) / static_cast<double>(rhos.size());
    result.median_rho = median(rhos);
  }
  for (auto& [name, values] : buckets) {
    if (values.empty()) continue;
    result.buckets.push_back(
        {name, stable_sum(values) / static_cast<double>(values.size()), values.size()});
  }
  result.tasks = std::move(outcomes);
  return result;
}

std::vector<MetricResult> evaluate_metrics(const std::vector<Metric>& metrics,
                                           const std::vector<RankingTask>& tasks,
                                           const EvaluationConfig& config) {
  if (config.max_bag_size == 0) throw UsageError("max bag size must be >= 1");
  std::vector<std::vector<TaskOutcome>> outcomes(metrics.size(),
                                                 std::vector<TaskOutcome>(tasks.size()));

  auto run_task = [&](std::size_t t) {
    const RankingTask& task = tasks[t];
    const std::string key = task.reference.context_id + "/" + task.manipulation;
    const std::uint64_t base = mix_seed(config.seed, key);
    Bag reference = downsample_bag(task.reference, config.max_bag_size, mix_seed(base, 0));
    std::vector<Bag> candidates;
    for (std::size_t c = 0; c < task.candidates.size(); ++c) {
      candidates.push_back(downsample_bag(task.candidates[c], config.max_bag_size,
                                          mix_seed(base, c + 1)));
    }
    for (std::size_t m = 0; m < metrics.size(); ++m) {
      TaskOutcome& o = outcomes[m][t];
      o.context_id = task.reference.context_id;
      o.manipulation = task.manipulation;
      o.reference_size = reference.size();
      try {
        for (const auto& cand : candidates) o.scores.push_back(metrics[m].score(cand, reference));
        SpearmanResult s = spearman(o.scores, task.true_ranks);
        o.rho = s.rho;
        o.degenerate = s.degenerate;
      } catch (const Error& e) {
        o.failed = true;
        o.error_kind = e.kind();
        o.error = e.what();
        o.scores.clear();
      } catch (const std::exception& e) {
        o.failed = true;
        o.error_kind = "Error";
        o.error = e.what();
        o.scores.clear();
      }
    }
  };

  const std::size_t workers = std::max<std::size_t>(1, std::min(config.threads, tasks.size()));
  if (workers == 1) {
    for (std::size_t t = 0; t < tasks.size(); ++t) run_task(t);
  } else {
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> pool;
    for (std::size_t w = 0; w < workers; ++w) {
      pool.emplace_back([&] {
        for (std::size_t t = next++; t < tasks.size(); t = next++) run_task(t);
      });
    }
    for (auto& th : pool) th.join();
  }

  std::vector<MetricResult> results;
  for (std::size_t m = 0; m < metrics.size(); ++m) {
    results.push_back(summarize(metrics[m].name, std::move(outcomes[m]), config.bucket_edges));
  }
  return results;
}

MetricResult evaluate_metric(const Metric& metric, const std::vector<RankingTask>& tasks,
                             const EvaluationConfig& config) {
  return evaluate_metrics({metric}, tasks, config).front();
}

TieThreshold calibrate_tie_threshold(std::span<const double> score_diffs, double target_rate,
                                     std::string metric) {
  if (score_diffs.empty()) throw UsageError("tie calibration needs at least one diff");
  if (!(target_rate >= 0.0 && target_rate <= 1.0)) throw UsageError("tie rate must be in [0, 1]");
  std::vector<double> sorted;
  for (double d : score_diffs) sorted.push_back(std::abs(d));
  std::sort(sorted.begin(), sorted.end());
  const auto ties = static_cast<std::size_t>(
      std::llround(target_rate * static_cast<double>(sorted.size())));
  double threshold = 0.0;
  if (ties == 0) {
    threshold = sorted.front() > 0.0 ? std::nextafter(sorted.front(), 0.0) : 0.0;
  } else {
    threshold = sorted[std::min(ties, sorted.size()) - 1];
  }
  return {std::move(metric), threshold, target_rate};
}

std::string_view to_string(Preference p) {
  switch (p) {
    case Preference::a: return "A";
    case Preference::b: return "B";
    case Preference::tie: return "TIE";
  }
  return "?";
}

Comparison decide(double score_a, double score_b, double threshold) {
  Comparison c{Preference::tie, score_a, score_b};
  if (std::abs(score_a - score_b) <= threshold) return c;
  c.verdict = score_a > score_b ? Preference::a : Preference::b;
  return c;
}

Comparison compare_bags(const Metric& metric, const Bag& reference, const Bag& a, const Bag& b,
                        const TieThreshold& tie) {
  return decide(metric.score(a, reference), metric.score(b, reference), tie.threshold);
}

}  // namespace trafficdist
