// trafficdist: bag-to-bag metrics and their validation harness.
#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "trafficdist/commands.hpp"
#include "trafficdist/errors.hpp"
#include "trafficdist/metrics.hpp"

using namespace trafficdist;

namespace {

std::string metric_help() {
  std::string out = "comma list of metrics:";
  for (const auto& n : metric_names()) out += " " + n;
  return out;
}

void add_metric_flags(CLI::App* cmd, RunConfig& cfg) {
  cmd->add_option("--metrics", cfg.metrics, metric_help())->delimiter(',')->required();
  cmd->add_option("--embeddings", cfg.embeddings, "embedding JSONL {id, vec}");
  cmd->add_option("--seed", cfg.seed, "master seed")->capture_default_str();
  cmd->add_option("--max-bag-size", cfg.max_bag_size, "cap on bag occurrences")->capture_default_str();
  cmd->add_option("--dbscan-eps", cfg.dbscan.eps, "clus_tf DBSCAN radius (cosine distance)")
      ->capture_default_str();
  cmd->add_option("--dbscan-min-pts", cfg.dbscan.min_pts, "clus_tf DBSCAN core size")
      ->capture_default_str();
  cmd->add_option("--kn-discount", cfg.kn_discount, "inv_pp Kneser-Ney discount")
      ->capture_default_str();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"trafficdist: distribution-level metrics for synthetic traffic generation"};
  app.require_subcommand(1);
  RunConfig cfg;
  std::string out_path;

  auto output = [&](CLI::App* cmd) {
    cmd->add_option("--out", out_path, "output file (stdout when absent)");
    cmd->add_option("--format", cfg.format, "json, csv or md")
        ->check(CLI::IsMember({"json", "csv", "md"}))
        ->capture_default_str();
  };
  auto threads = [&](CLI::App* cmd) {
    cmd->add_option("--threads", cfg.threads, "worker threads (0: all cores; TRAFFICDIST_THREADS caps)");
  };

  auto* score = app.add_subcommand("score", "score generated bags against reference bags");
  score->add_option("--references", cfg.references, "reference corpus JSONL")->required();
  score->add_option("--generated", cfg.generated, "generated corpus JSONL")->required();
  add_metric_flags(score, cfg);
  output(score);
  threads(score);

  auto* validate = app.add_subcommand("validate", "rank-correlate metrics against controlled noise");
  validate->add_option("--references", cfg.references, "reference corpus JSONL")->required();
  validate->add_option("--plan", cfg.plan, "manipulation plan JSON")->required();
  validate->add_option("--levels", cfg.levels, "noise levels per ranking (overrides the plan)");
  validate->add_option("--lexicon", cfg.lexicon, "synonym lexicon JSONL for EDA");
  add_metric_flags(validate, cfg);
  output(validate);
  threads(validate);

  auto* compare = app.add_subcommand("compare", "pick the better of two generated corpora per context");
  compare->add_option("--references", cfg.references, "reference corpus JSONL")->required();
  compare->add_option("--generated", cfg.generated, "corpus A")->required();
  compare->add_option("--generated-b", cfg.generated_b, "corpus B")->required();
  auto* fixed = compare->add_option("--tie-threshold", cfg.tie_threshold, "fixed tie threshold");
  auto* rate = compare->add_option("--tie-rate", cfg.tie_rate, "calibrate the threshold to this tie rate");
  fixed->excludes(rate);
  add_metric_flags(compare, cfg);
  output(compare);
  threads(compare);

  auto* report = app.add_subcommand("report", "render a JSON validation report");
  report->add_option("input", cfg.input, "JSON report from validate")->required();
  output(report);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    std::ostringstream buffer;
    int code = kExitOk;
    if (*score) code = cmd_score(cfg, buffer);
    else if (*validate) code = cmd_validate(cfg, buffer);
    else if (*compare) code = cmd_compare(cfg, buffer);
    else code = cmd_report(cfg, buffer);

    if (out_path.empty()) {
      std::cout << buffer.str();
    } else {
      std::ofstream file(out_path, std::ios::binary);
      if (!file) throw UsageError("cannot write " + out_path);
      file << buffer.str();
    }
    if (code == kExitPartialFailure) {
      std::cerr << "trafficdist: more than 10% of tasks failed; see the failure summary\n";
    }
    return code;
  } catch (const std::exception& e) {
    std::cerr << "trafficdist: " << e.what() << '\n';
    return exit_code_for(e);
  }
}
