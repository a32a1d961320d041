// Acceptance suite: prints one PASS/FAIL line per criterion and exits nonzero
// when any fails.

#include <algorithm>
#include <array>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <map>
#include <numeric>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"
#include "oracles.hpp"
#include "synthetic.hpp"
#include "trafficdist/alignment.hpp"
#include "trafficdist/cluster.hpp"
#include "trafficdist/commands.hpp"
#include "trafficdist/distributional.hpp"
#include "trafficdist/errors.hpp"
#include "trafficdist/harness.hpp"
#include "trafficdist/language_model.hpp"
#include "trafficdist/manipulations.hpp"
#include "trafficdist/metrics.hpp"

using namespace trafficdist;
using namespace trafficdist::testing;
using nlohmann::json;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

std::string fmt(const char* pattern, double a, double b = 0.0, double c = 0.0) {
  char buf[256];
  std::snprintf(buf, sizeof buf, pattern, a, b, c);
  return buf;
}

struct Verdict {
  bool ok = false;
  std::string detail;
};

Bag bag_of(std::initializer_list<const char*> texts) {
  Bag b{"c", {}};
  for (const char* t : texts) b.items.push_back(Sentence::from_text(t));
  return b;
}

std::vector<int> ranks(int n) {
  std::vector<int> r(static_cast<std::size_t>(n));
  std::iota(r.begin(), r.end(), 1);
  return r;
}

// ---------------------------------------------------------------------------

Verdict alignment_oracle() {
  const auto start = Clock::now();
  Rng rng(101);
  double worst = 0.0;
  for (int trial = 0; trial < 200; ++trial) {
    Bag g = random_bag(rng, 6, 6, 6), r = random_bag(rng, 6, 6, 6);
    const SimKind kind = std::array{SimKind::bleu3, SimKind::rouge_l, SimKind::cider}[trial % 3];
    const double got = align_score(g, r, kind, 7);
    const double want = oracle_align_score(g, r, make_similarity(kind, r), 7);
    worst = std::max(worst, std::abs(got - want));
  }
  const double secs = seconds_since(start);
  return {worst <= 1e-9 && secs < 10.0, fmt("max |diff| %.3g over 200 pairs in %.2f s", worst, secs)};
}

Verdict pairwise_oracle() {
  Rng rng(102);
  double worst = 0.0;
  for (int trial = 0; trial < 200; ++trial) {
    Bag g = random_bag(rng, 8, 6, 6), r = random_bag(rng, 8, 6, 6);
    const SimKind kind = std::array{SimKind::bleu3, SimKind::rouge_l, SimKind::cider}[trial % 3];
    const double got = pair_score(g, r, kind);
    const double want = oracle_pair_score(g, r, make_similarity(kind, r));
    worst = std::max(worst, std::abs(got - want));
  }
  return {worst <= 1e-12, fmt("max |diff| %.3g over 200 pairs", worst)};
}

Verdict spearman_oracle() {
  double worst = 0.0;
  std::size_t cases = 0;
  for (int n = 2; n <= 8; ++n) {
    std::vector<int> perm = ranks(n);
    do {
      std::vector<double> scores(perm.size());
      for (std::size_t i = 0; i < perm.size(); ++i) scores[i] = 10.0 - perm[i];
      worst = std::max(worst, std::abs(spearman(scores, ranks(n)).rho -
                                       oracle_spearman_closed_form(scores, ranks(n))));
      ++cases;
    } while (std::next_permutation(perm.begin(), perm.end()));
  }
  Rng rng(103);
  double worst_ties = 0.0;
  for (int trial = 0; trial < 2000; ++trial) {
    const int n = 2 + static_cast<int>(rng.index(7));
    std::vector<double> scores(static_cast<std::size_t>(n));
    for (auto& x : scores) x = static_cast<double>(rng.index(4));
    SpearmanResult got = spearman(scores, ranks(n));
    if (got.degenerate) continue;
    worst_ties = std::max(worst_ties, std::abs(got.rho - oracle_spearman_counting(scores, ranks(n))));
  }
  return {worst <= 1e-12 && worst_ties <= 1e-12,
          fmt("%.0f tie-free permutations max |diff| %.3g; tied inputs max |diff| %.3g",
              static_cast<double>(cases), worst, worst_ties)};
}

Verdict hand_values() {
  UnigramDist g({{"a", 0.5}, {"b", 0.5}});
  UnigramDist r({{"a", 0.75}, {"b", 0.25}});
  const double kl = kl_divergence(g, r);
  const double kl_exact = 0.5 * std::log(2.0 / 3.0) + 0.5 * std::log(2.0);
  // add-one on G = {a, b}, R = {a, a, b}: p_G = (1/2, 1/2), p_R = (3/5, 2/5)
  const double inv = inv_kl(bag_of({"a", "b"}), bag_of({"a", "a", "b"}));
  const double inv_exact = 1.0 / (0.5 * std::log(0.5 / 0.6) + 0.5 * std::log(0.5 / 0.4) + 1e-6);
  const double cos = cos_bags(bag_of({"a b", "a"}), bag_of({"a b"}), Weighting::tf);
  const double e1 = std::abs(kl - kl_exact), e2 = std::abs(inv - inv_exact) / inv_exact,
               e3 = std::abs(cos - 3.0 / std::sqrt(10.0));
  const bool ok = e1 <= 1e-6 && std::abs(kl - 0.1438) <= 1e-4 && e2 <= 1e-6 && e3 <= 1e-6;
  return {ok, fmt("KL %.6f (0.1438), inv_kl rel err %.3g, cos %.9f (3/sqrt(10))", kl, e2, cos)};
}

Verdict kneser_ney_oracle() {
  Bag bag = bag_of({"buy nike shoes", "buy adidas shoes", "search nike shoes online"});
  NGramLM lm = NGramLM::train(bag, 0.75);
  std::vector<Tokens> training;
  for (const auto& s : bag.items) training.push_back(s.tokens);
  OracleKneserNey oracle(training, 0.75);
  auto name = [&](NGramLM::WordId id) -> std::string {
    if (id == NGramLM::kBos) return "<s>";
    if (id == NGramLM::kEos) return "</s>";
    if (id == NGramLM::kUnk) return "<unk>";
    return lm.word(id);
  };
  double worst = 0.0;
  for (const auto& h : lm.contexts(lm.order() - 1)) {
    std::vector<std::string> names;
    for (auto id : h) names.push_back(name(id));
    for (auto w : lm.predictable()) {
      const double want = oracle.prob(names, name(w));
      worst = std::max(worst, std::abs(lm.probability(h, w) - want) / want);
    }
  }
  Bag test = bag_of({"buy nike shoes", "buy shoes online now", "zebra"});
  std::vector<Tokens> test_tokens;
  for (const auto& s : test.items) test_tokens.push_back(s.tokens);
  const double pp = perplexity(lm, test), pp_want = oracle.perplexity(test_tokens);
  const double pp_err = std::abs(pp - pp_want) / pp_want;

  Rng rng(104);
  double worst_sum = 0.0;
  for (int trial = 0; trial < 50; ++trial) {
    Bag b = random_bag(rng, 10, 6, 1 + rng.index(20));
    NGramLM m = NGramLM::train(b, 0.75);
    for (std::size_t len = 0; len < m.order(); ++len) {
      for (const auto& h : m.contexts(len)) {
        std::vector<NGramLM::WordId> full(m.order() - 1 - len, NGramLM::kEos);
        full.insert(full.end(), h.begin(), h.end());
        double sum = 0.0;
        for (auto w : m.predictable()) sum += m.probability(full, w);
        worst_sum = std::max(worst_sum, std::abs(sum - 1.0));
      }
    }
  }
  return {worst <= 1e-9 && pp_err <= 1e-9 && worst_sum <= 1e-6,
          fmt("prob rel err %.3g, perplexity rel err %.3g, max |sum-1| %.3g", worst, pp_err, worst_sum)};
}

Verdict dbscan_oracle() {
  Rng rng(105);
  int mismatches = 0;
  for (int trial = 0; trial < 100; ++trial) {
    std::vector<TermVector> pts;
    for (int i = 0; i < 20; ++i) {
      std::map<std::string, double> w;
      const std::size_t k = 1 + rng.index(3);
      for (std::size_t j = 0; j < k; ++j) w["t" + std::to_string(rng.index(6))] += 1.0 + static_cast<double>(rng.index(3));
      pts.emplace_back(std::move(w));
    }
    const double eps = 0.15 + 0.1 * static_cast<double>(trial % 4);
    const std::size_t min_pts = 1 + static_cast<std::size_t>(trial % 4);
    if (dbscan(pts, {eps, min_pts}).labels != oracle_dbscan(pts, eps, min_pts)) ++mismatches;
  }
  return {mismatches == 0, fmt("%.0f of 100 instances differ", mismatches)};
}

// Manipulated bag for one trial; tries kinds until one applies.
Bag manipulated(const Bag& reference, Rng& rng, const ManipulationResources& res, std::string& label) {
  static constexpr ManipulationKind kKinds[] = {
      ManipulationKind::tdm_peaked, ManipulationKind::tdm_flat,    ManipulationKind::nti,
      ManipulationKind::eda,        ManipulationKind::cps,         ManipulationKind::ism_broader,
      ManipulationKind::ism_specific};
  for (;;) {
    const ManipulationKind kind = kKinds[rng.index(std::size(kKinds))];
    const int level = 1 + static_cast<int>(rng.index(5));
    try {
      Bag g = apply_manipulation(reference, kind, {level, 5}, rng.index(1u << 30), res);
      label = std::string(to_string(kind)) + "@" + std::to_string(level);
      return g;
    } catch (const Error&) {
    }
  }
}

Verdict identity_dominance() {
  Corpus corpus = synthetic_corpus({.contexts = 200}, 106);
  std::vector<const Bag*> bags;
  std::vector<Sentence> all;
  for (const auto& [id, bag] : corpus.contexts) {
    bags.push_back(&bag);
    all.insert(all.end(), bag.items.begin(), bag.items.end());
  }
  const CarrierPool carriers = carrier_pool(all);
  AttributeSource attributes;
  for (const auto& s : all) {
    if (s.item_span) attributes[s.id] = {"blue", "premium"};
  }

  struct Tally {
    int strict = 0, tie = 0, violated = 0;
    std::string example;
  };
  std::map<std::string, Tally> tally;
  Rng rng(107);
  for (int trial = 0; trial < 100; ++trial) {
    const Bag& r = *bags[rng.index(bags.size())];
    std::vector<Sentence> pool;
    for (const Bag* other : bags) {
      if (other != &r) pool.push_back(other->items.front());
    }
    ManipulationResources res{&pool, &carriers, &attributes, {}};
    std::string label;
    Bag g = manipulated(r, rng, res, label);

    EmbeddingTable table(32);
    add_embeddings(table, r, 9);
    add_embeddings(table, g, 9);
    MetricConfig mc;
    mc.seed = static_cast<std::uint64_t>(trial);
    mc.embeddings = &table;
    for (const auto& name : metric_names()) {
      Metric m = make_metric(name, mc);
      const double self = m.score(r, r), other = m.score(g, r);
      Tally& t = tally[name];
      if (other < self) {
        ++t.strict;
      } else if (other == self) {
        ++t.tie;
      } else {
        ++t.violated;
        if (t.example.empty()) t.example = r.context_id + " " + label;
      }
    }
  }
  bool ok = true;
  std::ostringstream detail;
  for (const auto& name : metric_names()) {
    const Tally& t = tally[name];
    const bool capped = name == "inv_kl" || name == "clus_tf";
    // equal scores only count as dominance at the capped metrics
    const bool pass = t.violated == 0 && t.strict + (capped ? t.tie : 0) >= 95;
    ok &= pass;
    detail << name << " " << t.strict << "/" << t.tie << "/" << t.violated;
    if (!t.example.empty()) detail << " (e.g. " << t.example << ")";
    detail << (&name == &metric_names().back() ? "" : ", ");
  }
  return {ok, "strict/tie/violated per metric: " + detail.str()};
}

// Runs cmd_validate on the desk-scale corpus and returns the parsed report.
json validate_report(const TempDir& dir, const std::string& plan, const std::vector<std::string>& metrics,
                     std::size_t threads, std::string* raw = nullptr) {
  const auto refs = dir / "refs.jsonl";
  if (!std::filesystem::exists(refs)) save_corpus(synthetic_corpus({.contexts = 200, .max_bag = 50}, 108), refs);
  const auto plan_path = dir / "plan.json";
  write_file(plan_path, plan);
  RunConfig config;
  config.references = refs;
  config.plan = plan_path;
  config.metrics = metrics;
  config.seed = 2024;
  config.threads = threads;
  std::ostringstream out;
  const int code = cmd_validate(config, out);
  if (raw) *raw = out.str();
  json doc = json::parse(out.str());
  doc["exit_code"] = code;
  return doc;
}

double aggregate_rho(const json& report, const std::string& metric) {
  for (const auto& row : report["metrics"]) {
    if (row["metric"] == metric && row["mean_rho"].is_number()) return row["mean_rho"].get<double>();
  }
  return std::nan("");
}

Verdict fig1_tdm(const TempDir& dir) {
  const auto start = Clock::now();
  json report = validate_report(dir, R"({"mode":"strength","levels":5,"manipulations":[{"kind":"tdm_peaked"}]})",
                                {"cos_tf", "pair_bleu3"}, 0);
  const double secs = seconds_since(start);
  const double cos = aggregate_rho(report, "cos_tf"), pair = aggregate_rho(report, "pair_bleu3");
  const bool ok = cos >= 0.8 && cos - pair >= 0.2 && secs < 600.0;
  return {ok, fmt("mean rho cos_tf %.4f, pair_bleu3 %.4f, run %.1f s", cos, pair, secs)};
}

Verdict nti_alignment(const TempDir& dir) {
  json report = validate_report(dir, R"({"mode":"strength","levels":5,"manipulations":[{"kind":"nti"}]})",
                                {"align_bleu3", "pair_bleu3"}, 0);
  const double align = aggregate_rho(report, "align_bleu3"), pair = aggregate_rho(report, "pair_bleu3");
  return {align >= pair, fmt("mean rho align_bleu3 %.4f, pair_bleu3 %.4f", align, pair)};
}

Verdict tie_calibration() {
  Rng rng(109);
  std::vector<double> diffs;
  for (int i = 0; i < 200; ++i) diffs.push_back(rng.unit() * 2.0 - 1.0);
  TieThreshold t = calibrate_tie_threshold(diffs, 0.165);
  int ties = 0;
  for (double d : diffs) ties += decide(d, 0.0, t.threshold).verdict == Preference::tie;
  return {ties == 33, fmt("%.0f ties at threshold %.6f", ties, t.threshold)};
}

Verdict determinism(const TempDir& dir) {
  const std::string plan = R"([{"mode":"strength","levels":5,"manipulations":[{"kind":"nti"}]},
                               {"mode":"strength","levels":5,"manipulations":[{"kind":"eda"}]}])";
  const std::vector<std::string> metrics = {"cos_tf", "align_rouge_l", "clus_tf", "inv_pp"};
  std::string a, b, c;
  validate_report(dir, plan, metrics, 1, &a);
  validate_report(dir, plan, metrics, 1, &b);
  validate_report(dir, plan, metrics, 4, &c);
  return {a == b && a == c && !a.empty(),
          fmt("runs identical: %.0f, 1 vs 4 threads identical: %.0f, %.0f bytes", a == b, a == c,
              static_cast<double>(a.size()))};
}

}  // namespace

int main() {
  TempDir dir("acceptance");
  const std::vector<std::pair<std::string, std::function<Verdict()>>> criteria = {
      {"alignment oracle", alignment_oracle},
      {"pairwise oracle", pairwise_oracle},
      {"spearman oracle", spearman_oracle},
      {"kl and cosine hand values", hand_values},
      {"kneser-ney oracle", kneser_ney_oracle},
      {"dbscan oracle", dbscan_oracle},
      {"identity dominance", identity_dominance},
      {"tdm cos_tf beats pair_bleu3", [&] { return fig1_tdm(dir); }},
      {"nti alignment beats pairwise", [&] { return nti_alignment(dir); }},
      {"tie calibration", tie_calibration},
      {"determinism", [&] { return determinism(dir); }},
  };
  int failed = 0;
  for (const auto& [name, check] : criteria) {
    Verdict v;
    try {
      v = check();
    } catch (const std::exception& e) {
      v = {false, std::string("threw: ") + e.what()};
    }
    failed += v.ok ? 0 : 1;
    std::printf("%s %s: %s\n", v.ok ? "PASS" : "FAIL", name.c_str(), v.detail.c_str());
    std::fflush(stdout);
  }
  std::printf("%d of %zu criteria passed\n", static_cast<int>(criteria.size()) - failed, criteria.size());
  return failed == 0 ? 0 : 1;
}
