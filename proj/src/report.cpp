#include "trafficdist/report.hpp"

#include <cmath>
#include <cstdio>
#include <limits>
#include <map>
#include <set>
#include <sstream>

#include "json.hpp"
#include "trafficdist/errors.hpp"

namespace trafficdist {

using nlohmann::json;

double round4(double value) {
  if (!std::isfinite(value)) return value;
  double r = std::round(value * 10000.0) / 10000.0;
  return r == 0.0 ? 0.0 : r;  // no "-0"
}

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

ReportRow make_row(const MetricResult& r, std::string manipulation, std::size_t extra_failures) {
  ReportRow row;
  row.metric = r.metric;
  row.manipulation = std::move(manipulation);
  row.n_tasks = r.count;
  row.n_failed = r.n_failed + extra_failures;
  row.n_degenerate = r.n_degenerate;
  row.mean_rho = r.count ? round4(r.mean_rho) : kNaN;
  row.median_rho = r.count ? round4(r.median_rho) : kNaN;
  for (auto b : r.buckets) {
    b.mean_rho = round4(b.mean_rho);
    row.buckets.push_back(std::move(b));
  }
  return row;
}

std::string fixed4(double v) {
  if (!std::isfinite(v)) return "";
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.4f", round4(v));
  return buf;
}

json number_or_null(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

json row_json(const ReportRow& row) {
  json buckets = json::array();
  for (const auto& b : row.buckets) {
    buckets.push_back({{"range", b.range}, {"mean_rho", number_or_null(b.mean_rho)}, {"n", b.n}});
  }
  return {{"metric", row.metric},
          {"manipulation", row.manipulation},
          {"mean_rho", number_or_null(row.mean_rho)},
          {"median_rho", number_or_null(row.median_rho)},
          {"n_tasks", row.n_tasks},
          {"n_failed", row.n_failed},
          {"n_degenerate", row.n_degenerate},
          {"buckets", buckets}};
}

std::string csv_escape(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

std::string buckets_cell(const ReportRow& row) {
  std::string out;
  for (const auto& b : row.buckets) {
    if (!out.empty()) out += ';';
    out += b.range + ":" + fixed4(b.mean_rho) + ":" + std::to_string(b.n);
  }
  return out;
}

}  // namespace

Report build_report(const std::vector<MetricResult>& results,
                    const std::vector<TaskFailure>& construction_failures) {
  if (results.empty()) throw UsageError("report needs at least one metric result");
  Report report;

  std::map<std::string, std::size_t> construction_by_manip;
  for (const auto& f : construction_failures) ++construction_by_manip[f.manipulation];

  std::set<std::string> manipulations;
  for (const auto& r : results) {
    for (const auto& t : r.tasks) manipulations.insert(t.manipulation);
  }
  for (const auto& [m, n] : construction_by_manip) manipulations.insert(m);

  std::map<std::string, FailureSummary> failures;
  auto note_failure = [&](const std::string& kind, const std::string& message) {
    FailureSummary& f = failures[kind];
    f.kind = kind;
    if (f.count++ == 0) f.example = message;
  };
  for (const auto& f : construction_failures) note_failure(f.error_kind, f.message);

  std::set<std::pair<std::string, std::string>> all_tasks, failed_tasks;
  for (const auto& f : construction_failures) {
    all_tasks.emplace(f.context_id, f.manipulation);
    failed_tasks.emplace(f.context_id, f.manipulation);
  }

  for (const auto& r : results) {
    for (const auto& manip : manipulations) {
      std::vector<TaskOutcome> subset;
      for (const auto& t : r.tasks) {
        if (t.manipulation == manip) subset.push_back(t);
      }
      MetricResult part = summarize(r.metric, std::move(subset), r.bucket_edges);
      auto it = construction_by_manip.find(manip);
      report.rows.push_back(make_row(part, manip, it == construction_by_manip.end() ? 0 : it->second));
    }
    report.metrics.push_back(make_row(r, "all", construction_failures.size()));
    for (const auto& t : r.tasks) {
      all_tasks.emplace(t.context_id, t.manipulation);
      if (t.failed) {
        failed_tasks.emplace(t.context_id, t.manipulation);
        note_failure(t.error_kind, t.error);
      }
    }
  }
  for (auto& [kind, f] : failures) report.failures.push_back(std::move(f));
  report.total_tasks = all_tasks.size();
  report.failed_tasks = failed_tasks.size();
  return report;
}

ReportFormat parse_report_format(std::string_view name) {
  if (name == "json") return ReportFormat::json;
  if (name == "csv") return ReportFormat::csv;
  if (name == "md") return ReportFormat::md;
  throw UsageError("unknown report format '" + std::string(name) + "' (json, csv, md)");
}

std::string render_report(const Report& report, std::string_view format) {
  return render_report(report, parse_report_format(format));
}

std::string render_report(const Report& report, ReportFormat format) {
  std::ostringstream out;
  switch (format) {
    case ReportFormat::json: {
      json doc;
      doc["rows"] = json::array();
      for (const auto& row : report.rows) doc["rows"].push_back(row_json(row));
      doc["metrics"] = json::array();
      for (const auto& row : report.metrics) doc["metrics"].push_back(row_json(row));
      doc["failures"] = json::array();
      for (const auto& f : report.failures) {
        doc["failures"].push_back({{"kind", f.kind}, {"count", f.count}, {"example", f.example}});
      }
      doc["total_tasks"] = report.total_tasks;
      doc["failed_tasks"] = report.failed_tasks;
      out << doc.dump(2) << '\n';
      break;
    }
    case ReportFormat::csv: {
      out << "metric,manipulation,mean_rho,median_rho,n_tasks,n_failed,n_degenerate,buckets\n";
      for (const auto& row : report.rows) {
        out << csv_escape(row.metric) << ',' << csv_escape(row.manipulation) << ','
            << fixed4(row.mean_rho) << ',' << fixed4(row.median_rho) << ',' << row.n_tasks << ','
            << row.n_failed << ',' << row.n_degenerate << ',' << csv_escape(buckets_cell(row))
            << '\n';
      }
      break;
    }
    case ReportFormat::md: {
      out << "## Metrics\n\n"
          << "| metric | mean rho | median rho | tasks | failed |\n"
          << "|---|---:|---:|---:|---:|\n";
      for (const auto& row : report.metrics) {
        out << "| " << row.metric << " | " << fixed4(row.mean_rho) << " | "
            << fixed4(row.median_rho) << " | " << row.n_tasks << " | " << row.n_failed << " |\n";
      }
      out << "\n## Breakdown\n\n"
          << "| metric | manipulation | mean rho | median rho | tasks | failed | degenerate |\n"
          << "|---|---|---:|---:|---:|---:|---:|\n";
      for (const auto& row : report.rows) {
        out << "| " << row.metric << " | " << row.manipulation << " | " << fixed4(row.mean_rho)
            << " | " << fixed4(row.median_rho) << " | " << row.n_tasks << " | " << row.n_failed
            << " | " << row.n_degenerate << " |\n";
      }
      out << "\n## Bag sizes\n\n"
          << "| metric | manipulation | bag size | mean rho | tasks |\n"
          << "|---|---|---|---:|---:|\n";
      for (const auto& row : report.rows) {
        for (const auto& b : row.buckets) {
          out << "| " << row.metric << " | " << row.manipulation << " | " << b.range << " | "
              << fixed4(b.mean_rho) << " | " << b.n << " |\n";
        }
      }
      if (!report.failures.empty()) {
        out << "\n## Failures\n\n| kind | count | example |\n|---|---:|---|\n";
        for (const auto& f : report.failures) {
          out << "| " << f.kind << " | " << f.count << " | " << f.example << " |\n";
        }
      }
      break;
    }
  }
  return out.str();
}

namespace {

const json& field(const json& obj, const char* key, const char* where) {
  if (!obj.is_object() || !obj.contains(key)) {
    throw FormatError(std::string("report ") + where + " lacks '" + key + "'");
  }
  return obj.at(key);
}

double number_field(const json& obj, const char* key, const char* where) {
  const json& v = field(obj, key, where);
  if (v.is_null()) return kNaN;
  if (!v.is_number()) throw FormatError(std::string("report field '") + key + "' must be a number");
  return v.get<double>();
}

std::size_t count_field(const json& obj, const char* key, const char* where) {
  const json& v = field(obj, key, where);
  if (!v.is_number_unsigned() && !(v.is_number_integer() && v.get<long long>() >= 0)) {
    throw FormatError(std::string("report field '") + key + "' must be a count");
  }
  return v.get<std::size_t>();
}

std::string string_field(const json& obj, const char* key, const char* where) {
  const json& v = field(obj, key, where);
  if (!v.is_string()) throw FormatError(std::string("report field '") + key + "' must be a string");
  return v.get<std::string>();
}

ReportRow parse_row(const json& obj) {
  ReportRow row;
  row.metric = string_field(obj, "metric", "row");
  row.manipulation = string_field(obj, "manipulation", "row");
  row.mean_rho = number_field(obj, "mean_rho", "row");
  row.median_rho = obj.contains("median_rho") ? number_field(obj, "median_rho", "row") : kNaN;
  row.n_tasks = count_field(obj, "n_tasks", "row");
  row.n_failed = count_field(obj, "n_failed", "row");
  row.n_degenerate = obj.contains("n_degenerate") ? count_field(obj, "n_degenerate", "row") : 0;
  const json& buckets = field(obj, "buckets", "row");
  if (!buckets.is_array()) throw FormatError("report field 'buckets' must be a list");
  for (const auto& b : buckets) {
    row.buckets.push_back({string_field(b, "range", "bucket"), number_field(b, "mean_rho", "bucket"),
                           count_field(b, "n", "bucket")});
  }
  return row;
}

}  // namespace

Report parse_report_json(std::string_view text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw FormatError("invalid report JSON at byte " + std::to_string(e.byte) + ": " + e.what());
  }
  Report report;
  const json& rows = field(doc, "rows", "document");
  if (!rows.is_array()) throw FormatError("report 'rows' must be a list");
  for (const auto& r : rows) report.rows.push_back(parse_row(r));
  if (doc.contains("metrics")) {
    if (!doc["metrics"].is_array()) throw FormatError("report 'metrics' must be a list");
    for (const auto& r : doc["metrics"]) report.metrics.push_back(parse_row(r));
  }
  if (doc.contains("failures")) {
    if (!doc["failures"].is_array()) throw FormatError("report 'failures' must be a list");
    for (const auto& f : doc["failures"]) {
      report.failures.push_back({string_field(f, "kind", "failure"), count_field(f, "count", "failure"),
                                 string_field(f, "example", "failure")});
    }
  }
  if (doc.contains("total_tasks")) report.total_tasks = count_field(doc, "total_tasks", "document");
  if (doc.contains("failed_tasks")) report.failed_tasks = count_field(doc, "failed_tasks", "document");
  return report;
}

}  // namespace trafficdist
