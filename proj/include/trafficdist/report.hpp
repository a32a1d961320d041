#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

#include "trafficdist/harness.hpp"

namespace trafficdist {

// A task that never reached scoring (its ranking could not be built).
struct TaskFailure {
  std::string context_id;
  std::string manipulation;
  std::string error_kind;
  std::string message;
};

struct ReportRow {
  std::string metric;
  std::string manipulation;  // "all" for the per-metric aggregate
  double mean_rho = 0.0;
  double median_rho = 0.0;
  std::size_t n_tasks = 0;
  std::size_t n_failed = 0;
  std::size_t n_degenerate = 0;
  std::vector<BucketStat> buckets;
};

struct FailureSummary {
  std::string kind;
  std::size_t count = 0;
  std::string example;
};

struct Report {
  std::vector<ReportRow> rows;  // one per metric x manipulation
  std::vector<ReportRow> metrics;  // one aggregate per metric
  std::vector<FailureSummary> failures;
  std::size_t total_tasks = 0;
  std::size_t failed_tasks = 0;  // distinct (context, manipulation) pairs with any failure
};

// Breakdown rows per (metric, manipulation) in metric order; numbers are
// rounded to 4 decimals.
Report build_report(const std::vector<MetricResult>& results,
                    const std::vector<TaskFailure>& construction_failures = {});

enum class ReportFormat { json, csv, md };

// Throws UsageError for anything but json, csv or md.
ReportFormat parse_report_format(std::string_view name);

std::string render_report(const Report& report, ReportFormat format);
std::string render_report(const Report& report, std::string_view format);

// Parses a JSON report; schema problems raise FormatError naming the field,
// syntax errors the byte position.
Report parse_report_json(std::string_view text);

double round4(double value);

}  // namespace trafficdist
