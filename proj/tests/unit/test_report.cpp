#include <algorithm>
#include <cmath>

#include "doctest.h"
#include "trafficdist/errors.hpp"
#include "trafficdist/report.hpp"

using namespace trafficdist;

namespace {

const std::vector<std::size_t> kEdges = {2, 5, 10, 25, 50, 100};

TaskOutcome outcome(const std::string& ctx, const std::string& manip, std::size_t size, double rho) {
  TaskOutcome t;
  t.context_id = ctx;
  t.manipulation = manip;
  t.reference_size = size;
  t.rho = rho;
  return t;
}

// Two metrics over three manipulations and four contexts; one failed task.
std::vector<MetricResult> sample_results() {
  std::vector<MetricResult> out;
  for (const std::string metric : {"cos_tf", "pair_bleu3"}) {
    std::vector<TaskOutcome> tasks;
    int k = 0;
    for (const std::string manip : {"eda", "nti", "tdm_peaked"}) {
      for (int c = 0; c < 4; ++c, ++k) {
        auto t = outcome("ctx" + std::to_string(c), manip, 3 + 7 * static_cast<std::size_t>(c),
                         (metric == "cos_tf" ? 0.9 : 0.3) - 0.1 * c + 0.01 * k);
        if (metric == "pair_bleu3" && manip == "nti" && c == 2) {
          t.failed = true;
          t.error_kind = "DegenerateVector";
          t.error = "zero vector";
        }
        tasks.push_back(t);
      }
    }
    out.push_back(summarize(metric, tasks, kEdges));
  }
  return out;
}

std::size_t count_lines(const std::string& s) { return static_cast<std::size_t>(std::count(s.begin(), s.end(), '\n')); }

}  // namespace

TEST_CASE("round4") {
  CHECK(round4(0.123456) == 0.1235);
  CHECK(round4(-0.00001) == 0.0);
  CHECK_FALSE(std::signbit(round4(-0.00001)));
}

TEST_CASE("build_report has one row per metric and manipulation") {
  Report r = build_report(sample_results());
  CHECK(r.rows.size() == 6);
  CHECK(r.metrics.size() == 2);
  CHECK(r.rows[0].metric == "cos_tf");
  CHECK(r.rows[0].manipulation == "eda");
  CHECK(r.rows[0].n_tasks == 4);
  CHECK(r.total_tasks == 12);
  CHECK(r.failed_tasks == 1);
  REQUIRE(r.failures.size() == 1);
  CHECK(r.failures[0].kind == "DegenerateVector");
  const auto& nti = r.rows[4];
  CHECK(nti.metric == "pair_bleu3");
  CHECK(nti.manipulation == "nti");
  CHECK(nti.n_tasks == 3);
  CHECK(nti.n_failed == 1);
  CHECK_THROWS_AS(build_report({}), UsageError);
}

TEST_CASE("construction failures are counted") {
  Report r = build_report(sample_results(), {{"ctx9", "cps", "AnnotationRequired", "no carrier"}});
  CHECK(r.rows.size() == 8);  // cps appears for both metrics
  CHECK(r.total_tasks == 13);
  CHECK(r.failed_tasks == 2);
  bool seen = false;
  for (const auto& f : r.failures) seen |= f.kind == "AnnotationRequired" && f.count == 1;
  CHECK(seen);
}

TEST_CASE("rendering is deterministic and json round-trips") {
  Report r = build_report(sample_results());
  for (auto fmt : {ReportFormat::json, ReportFormat::csv, ReportFormat::md}) {
    CHECK(render_report(r, fmt) == render_report(build_report(sample_results()), fmt));
  }
  const std::string json = render_report(r, ReportFormat::json);
  Report back = parse_report_json(json);
  CHECK(render_report(back, ReportFormat::json) == json);
  CHECK(render_report(back, ReportFormat::md) == render_report(r, ReportFormat::md));
}

TEST_CASE("csv has a header and one line per row") {
  const std::string csv = render_report(build_report(sample_results()), "csv");
  CHECK(count_lines(csv) == 7);
  CHECK(csv.rfind("metric,manipulation,mean_rho,median_rho,n_tasks,n_failed,n_degenerate,buckets\n", 0) == 0);
}

TEST_CASE("markdown sections") {
  const std::string md = render_report(build_report(sample_results()), ReportFormat::md);
  for (const char* h : {"## Metrics", "## Breakdown", "## Bag sizes", "## Failures"}) {
    CHECK(md.find(h) != std::string::npos);
  }
}

TEST_CASE("unknown formats and corrupt input") {
  CHECK_THROWS_AS(parse_report_format("xml"), UsageError);
  CHECK(parse_report_format("md") == ReportFormat::md);

  const std::string json = render_report(build_report(sample_results()), ReportFormat::json);
  try {
    parse_report_json(json.substr(0, json.size() / 2));
    FAIL("expected FormatError");
  } catch (const FormatError& e) {
    CHECK(std::string(e.what()).find("byte") != std::string::npos);
  }
  try {
    parse_report_json(R"({"rows": 3})");
    FAIL("expected FormatError");
  } catch (const FormatError& e) {
    CHECK(std::string(e.what()).find("rows") != std::string::npos);
  }
}
