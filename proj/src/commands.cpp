#include "trafficdist/commands.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <map>
#include <ostream>
#include <set>
#include <sstream>
#include <thread>

#include "json.hpp"
#include "trafficdist/errors.hpp"
#include "trafficdist/harness.hpp"
#include "trafficdist/manipulations.hpp"
#include "trafficdist/metrics.hpp"
#include "trafficdist/random.hpp"
#include "trafficdist/report.hpp"

namespace trafficdist {

using nlohmann::json;
namespace fs = std::filesystem;

std::size_t resolve_threads(std::size_t requested) {
  std::size_t n = requested ? requested : std::max(1u, std::thread::hardware_concurrency());
  if (const char* env = std::getenv("TRAFFICDIST_THREADS")) {
    char* end = nullptr;
    long cap = std::strtol(env, &end, 10);
    if (end != env && *end == '\0' && cap >= 1) n = std::min(n, static_cast<std::size_t>(cap));
  }
  return n;
}

int exit_code_for(const std::exception& e) {
  if (const auto* err = dynamic_cast<const Error*>(&e)) {
    return err->kind() == "UsageError" ? kExitUsage : kExitData;
  }
  return kExitData;
}

namespace {

template <class F>
void parallel_for(std::size_t n, std::size_t threads, F&& body) {
  const std::size_t workers = std::max<std::size_t>(1, std::min(threads, n));
  if (workers == 1) {
    for (std::size_t i = 0; i < n; ++i) body(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::thread> pool;
  for (std::size_t w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < n; i = next++) body(i);
    });
  }
  for (auto& t : pool) t.join();
}

void require_file(const fs::path& path, const char* flag) {
  if (path.empty()) throw UsageError(std::string(flag) + " is required");
  std::error_code ec;
  if (!fs::is_regular_file(path, ec)) {
    throw UsageError(std::string(flag) + ": no such file " + path.string());
  }
}

void require_optional_file(const fs::path& path, const char* flag) {
  if (!path.empty()) require_file(path, flag);
}

std::vector<std::string> checked_metrics(const RunConfig& config) {
  if (config.metrics.empty()) throw UsageError("--metrics is required");
  std::string joined;
  for (const auto& m : config.metrics) joined += m + ",";
  std::vector<std::string> names = parse_metric_list(joined);
  for (const auto& n : names) {
    if (metric_needs_embeddings(n) && config.embeddings.empty()) {
      throw UsageError("metric " + n + " needs --embeddings");
    }
  }
  if (config.max_bag_size == 0) throw UsageError("--max-bag-size must be >= 1");
  if (!(config.dbscan.eps > 0.0)) throw UsageError("--dbscan-eps must be > 0");
  if (config.dbscan.min_pts < 1) throw UsageError("--dbscan-min-pts must be >= 1");
  if (!(config.kn_discount > 0.0 && config.kn_discount < 1.0)) {
    throw UsageError("--kn-discount must be in (0, 1)");
  }
  return names;
}

std::vector<Metric> build_metrics(const std::vector<std::string>& names, const RunConfig& config,
                                  const EmbeddingTable* table) {
  MetricConfig mc;
  mc.seed = config.seed;
  mc.dbscan = config.dbscan;
  mc.kn_discount = config.kn_discount;
  mc.embeddings = table;
  std::vector<Metric> metrics;
  for (const auto& n : names) metrics.push_back(make_metric(n, mc));
  return metrics;
}

bool any_needs_embeddings(const std::vector<std::string>& names) {
  return std::any_of(names.begin(), names.end(),
                     [](const std::string& n) { return metric_needs_embeddings(n); });
}

// Every sentence the sbert metrics will look up must have a vector.
void check_coverage(const EmbeddingTable& table, const std::vector<const Bag*>& bags) {
  for (const Bag* bag : bags) {
    for (const auto& s : bag->items) {
      if (!table.contains(s.id)) {
        throw MissingEmbedding("no embedding for sentence " + s.id + " (context " +
                               bag->context_id + ")");
      }
    }
  }
}

json number_or_null(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

std::string fmt(double v) {
  if (!std::isfinite(v)) return "";
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.6f", v);
  return buf;
}

struct Skipped {
  std::string context_id;
  std::string missing_from;
};

// Contexts present in every corpus, and the ones some corpus lacks.
std::vector<std::string> shared_contexts(
    const std::vector<std::pair<std::string, const Corpus*>>& sides, std::vector<Skipped>& skipped) {
  std::set<std::string> all;
  for (const auto& [name, c] : sides) {
    for (const auto& [id, bag] : c->contexts) all.insert(id);
  }
  std::vector<std::string> shared;
  for (const auto& id : all) {
    bool everywhere = true;
    for (const auto& [name, c] : sides) {
      if (!c->contexts.count(id)) {
        skipped.push_back({id, name});
        everywhere = false;
      }
    }
    if (everywhere) shared.push_back(id);
  }
  if (shared.empty()) throw UsageError("the corpora share no context_id");
  return shared;
}

json skipped_json(const std::vector<Skipped>& skipped) {
  json out = json::array();
  for (const auto& s : skipped) out.push_back({{"context_id", s.context_id}, {"missing_from", s.missing_from}});
  return out;
}

struct ScoreCell {
  double value = std::nan("");
  std::string error;
};

ScoreCell safe_score(const Metric& metric, const Bag& g, const Bag& r) {
  ScoreCell cell;
  try {
    cell.value = metric.score(g, r);
  } catch (const std::exception& e) {
    cell.error = e.what();
  }
  return cell;
}

}  // namespace

int cmd_score(const RunConfig& config, std::ostream& out) {
  require_file(config.references, "--references");
  require_file(config.generated, "--generated");
  require_optional_file(config.embeddings, "--embeddings");
  const auto names = checked_metrics(config);
  const ReportFormat format = parse_report_format(config.format);

  const Corpus refs = load_corpus(config.references);
  const Corpus gens = load_corpus(config.generated);
  EmbeddingLoad emb;
  if (!config.embeddings.empty()) emb = load_embeddings(config.embeddings);

  std::vector<Skipped> skipped;
  const auto shared = shared_contexts({{"references", &refs}, {"generated", &gens}}, skipped);

  // capped bags, seeded per context so the run is independent of scheduling
  std::vector<Bag> ref_bags, gen_bags;
  for (const auto& id : shared) {
    const std::uint64_t base = mix_seed(config.seed, id);
    ref_bags.push_back(downsample_bag(refs.contexts.at(id), config.max_bag_size, mix_seed(base, 0)));
    gen_bags.push_back(downsample_bag(gens.contexts.at(id), config.max_bag_size, mix_seed(base, 1)));
  }
  if (any_needs_embeddings(names)) {
    std::vector<const Bag*> bags;
    for (const auto& b : ref_bags) bags.push_back(&b);
    for (const auto& b : gen_bags) bags.push_back(&b);
    check_coverage(emb.table, bags);
  }
  const auto metrics = build_metrics(names, config, config.embeddings.empty() ? nullptr : &emb.table);

  std::vector<std::vector<ScoreCell>> cells(shared.size(), std::vector<ScoreCell>(metrics.size()));
  parallel_for(shared.size(), resolve_threads(config.threads), [&](std::size_t c) {
    for (std::size_t m = 0; m < metrics.size(); ++m) cells[c][m] = safe_score(metrics[m], gen_bags[c], ref_bags[c]);
  });

  std::size_t failed = 0;
  std::ostringstream doc;
  if (format == ReportFormat::json) {
    json rows = json::array();
    for (std::size_t c = 0; c < shared.size(); ++c) {
      for (std::size_t m = 0; m < metrics.size(); ++m) {
        json row = {{"context_id", shared[c]}, {"metric", names[m]}, {"score", number_or_null(cells[c][m].value)}};
        if (!cells[c][m].error.empty()) row["error"] = cells[c][m].error;
        rows.push_back(std::move(row));
      }
    }
    doc << json{{"scores", rows}, {"skipped", skipped_json(skipped)}}.dump(2) << '\n';
  } else if (format == ReportFormat::csv) {
    doc << "context_id,metric,score,error\n";
    for (std::size_t c = 0; c < shared.size(); ++c) {
      for (std::size_t m = 0; m < metrics.size(); ++m) {
        std::string err = cells[c][m].error;
        std::replace(err.begin(), err.end(), ',', ';');
        doc << shared[c] << ',' << names[m] << ',' << fmt(cells[c][m].value) << ',' << err << '\n';
      }
    }
    for (const auto& s : skipped) doc << "# skipped " << s.context_id << " (missing from " << s.missing_from << ")\n";
  } else {
    doc << "| context | metric | score |\n|---|---|---:|\n";
    for (std::size_t c = 0; c < shared.size(); ++c) {
      for (std::size_t m = 0; m < metrics.size(); ++m) {
        doc << "| " << shared[c] << " | " << names[m] << " | "
            << (cells[c][m].error.empty() ? fmt(cells[c][m].value) : "error: " + cells[c][m].error) << " |\n";
      }
    }
    if (!skipped.empty()) {
      doc << "\nSkipped contexts:\n\n";
      for (const auto& s : skipped) doc << "- " << s.context_id << " (missing from " << s.missing_from << ")\n";
    }
  }
  for (const auto& row : cells) {
    for (const auto& cell : row) failed += !cell.error.empty();
  }
  out << doc.str();
  const double total = static_cast<double>(shared.size() * metrics.size());
  return static_cast<double>(failed) > kMaxFailedShare * total ? kExitPartialFailure : kExitOk;
}

namespace {

// Distinct sentences of every other context, for corpora without an explicit
// distractor pool.
std::vector<Sentence> foreign_pool(const Corpus& corpus, const std::string& context_id) {
  const auto own = corpus.contexts.at(context_id).counts();
  std::map<std::string, const Sentence*> seen;
  for (const auto& [id, bag] : corpus.contexts) {
    if (id == context_id) continue;
    for (const auto& s : bag.items) {
      if (!own.count(s.raw)) seen.emplace(s.raw, &s);
    }
  }
  std::vector<Sentence> pool;
  for (const auto& [raw, s] : seen) pool.push_back(*s);
  return pool;
}

// Sentence id -> attributes seen on other sentences of the same intent (or
// the same context when there is no intent): the "popular" attributes a more
// specific itemname may gain.
AttributeSource popular_attributes(const Corpus& corpus) {
  std::map<std::string, std::set<std::string>> by_group;
  auto group_of = [](const std::string& context, const Sentence& s) {
    return s.intent ? "intent:" + *s.intent : "context:" + context;
  };
  for (const auto& [id, bag] : corpus.contexts) {
    for (const auto& s : bag.items) {
      for (const auto& a : s.attributes) by_group[group_of(id, s)].insert(a);
    }
  }
  AttributeSource source;
  for (const auto& [id, bag] : corpus.contexts) {
    for (const auto& s : bag.items) {
      auto it = by_group.find(group_of(id, s));
      if (!s.item_span || it == by_group.end()) continue;
      auto& attrs = source[s.id];
      for (const auto& a : it->second) {
        if (std::find(attrs.begin(), attrs.end(), a) == attrs.end()) attrs.push_back(a);
      }
    }
  }
  for (auto& [id, attrs] : source) std::sort(attrs.begin(), attrs.end());
  return source;
}

std::vector<std::string> corpus_vocabulary(const Corpus& corpus) {
  std::set<std::string> vocab;
  for (const auto& [id, bag] : corpus.contexts) {
    for (const auto& s : bag.items) vocab.insert(s.tokens.begin(), s.tokens.end());
  }
  return {vocab.begin(), vocab.end()};
}

}  // namespace

int cmd_validate(const RunConfig& config, std::ostream& out) {
  require_file(config.references, "--references");
  require_file(config.plan, "--plan");
  require_optional_file(config.embeddings, "--embeddings");
  require_optional_file(config.lexicon, "--lexicon");
  const auto names = checked_metrics(config);
  const ReportFormat format = parse_report_format(config.format);
  if (config.levels && *config.levels < 2) throw UsageError("--levels must be >= 2");

  std::vector<ManipulationPlan> plans = load_plans(config.plan);
  for (auto& plan : plans) {
    if (config.levels) plan.levels = *config.levels;
    if (plan.mode == ManipulationPlan::Mode::strength && plan.steps.size() != 1) {
      throw UsageError("strength plans take exactly one manipulation");
    }
    if (plan.mode == ManipulationPlan::Mode::incremental &&
        plan.steps.size() != static_cast<std::size_t>(plan.levels)) {
      throw UsageError("incremental plan " + plan.label() + " needs one manipulation per level (" +
                       std::to_string(plan.levels) + ")");
    }
  }
  const Corpus corpus = load_corpus(config.references);
  if (corpus.contexts.empty()) throw UsageError("reference corpus has no contexts");
  EmbeddingLoad emb;
  if (!config.embeddings.empty()) emb = load_embeddings(config.embeddings);
  Lexicon lexicon;
  if (!config.lexicon.empty()) lexicon = load_lexicon(config.lexicon);
  const auto metrics = build_metrics(names, config, config.embeddings.empty() ? nullptr : &emb.table);

  std::vector<const Bag*> contexts;
  for (const auto& [id, bag] : corpus.contexts) contexts.push_back(&bag);

  // shared resources
  std::vector<Sentence> all_sentences;
  for (const Bag* bag : contexts) all_sentences.insert(all_sentences.end(), bag->items.begin(), bag->items.end());
  const CarrierPool carriers = carrier_pool(all_sentences);
  const AttributeSource attributes = popular_attributes(corpus);
  EdaOptions eda_options;
  eda_options.lexicon = config.lexicon.empty() ? nullptr : &lexicon;
  eda_options.vocabulary = corpus_vocabulary(corpus);

  const std::size_t threads = resolve_threads(config.threads);
  const std::size_t n_tasks = plans.size() * contexts.size();
  std::vector<std::optional<RankingTask>> built(n_tasks);
  std::vector<std::optional<TaskFailure>> construction(n_tasks);
  parallel_for(n_tasks, threads, [&](std::size_t t) {
    const ManipulationPlan& plan = plans[t / contexts.size()];
    const Bag& reference = *contexts[t % contexts.size()];
    std::vector<Sentence> pool;
    ManipulationResources res;
    res.carriers = &carriers;
    res.attributes = &attributes;
    res.eda = eda_options;
    if (corpus.distractors.empty()) {
      pool = foreign_pool(corpus, reference.context_id);
      res.distractors = &pool;
    } else {
      res.distractors = &corpus.distractors;
    }
    const std::uint64_t seed =
        mix_seed(mix_seed(config.seed, static_cast<std::uint64_t>(t / contexts.size())), reference.context_id);
    try {
      built[t] = build_ranking(reference, plan, seed, res);
    } catch (const Error& e) {
      construction[t] = TaskFailure{reference.context_id, plan.label(), e.kind(), e.what()};
    }
  });

  std::vector<RankingTask> tasks;
  std::vector<TaskFailure> failures;
  for (std::size_t t = 0; t < n_tasks; ++t) {
    if (built[t]) tasks.push_back(std::move(*built[t]));
    if (construction[t]) failures.push_back(std::move(*construction[t]));
  }

  EvaluationConfig ec;
  ec.max_bag_size = config.max_bag_size;
  ec.seed = config.seed;
  ec.threads = threads;
  const auto results = evaluate_metrics(metrics, tasks, ec);
  const Report report = build_report(results, failures);
  out << render_report(report, format);

  const double total = static_cast<double>(report.total_tasks);
  return static_cast<double>(report.failed_tasks) > kMaxFailedShare * total ? kExitPartialFailure
                                                                            : kExitOk;
}

int cmd_compare(const RunConfig& config, std::ostream& out) {
  require_file(config.references, "--references");
  require_file(config.generated, "--generated");
  require_file(config.generated_b, "--generated-b");
  require_optional_file(config.embeddings, "--embeddings");
  const auto names = checked_metrics(config);
  const ReportFormat format = parse_report_format(config.format);
  if (config.tie_threshold && config.tie_rate) {
    throw UsageError("--tie-threshold and --tie-rate are mutually exclusive");
  }
  if (config.tie_threshold && !(*config.tie_threshold >= 0.0)) {
    throw UsageError("--tie-threshold must be >= 0");
  }
  if (config.tie_rate && !(*config.tie_rate >= 0.0 && *config.tie_rate <= 1.0)) {
    throw UsageError("--tie-rate must be in [0, 1]");
  }

  const Corpus refs = load_corpus(config.references);
  const Corpus a = load_corpus(config.generated);
  const Corpus b = load_corpus(config.generated_b);
  EmbeddingLoad emb;
  if (!config.embeddings.empty()) emb = load_embeddings(config.embeddings);

  std::vector<Skipped> skipped;
  const auto shared =
      shared_contexts({{"references", &refs}, {"generated", &a}, {"generated_b", &b}}, skipped);
  std::vector<Bag> rb, ab, bb;
  for (const auto& id : shared) {
    const std::uint64_t base = mix_seed(config.seed, id);
    rb.push_back(downsample_bag(refs.contexts.at(id), config.max_bag_size, mix_seed(base, 0)));
    ab.push_back(downsample_bag(a.contexts.at(id), config.max_bag_size, mix_seed(base, 1)));
    bb.push_back(downsample_bag(b.contexts.at(id), config.max_bag_size, mix_seed(base, 2)));
  }
  if (any_needs_embeddings(names)) {
    std::vector<const Bag*> bags;
    for (auto* v : {&rb, &ab, &bb}) {
      for (const auto& bag : *v) bags.push_back(&bag);
    }
    check_coverage(emb.table, bags);
  }
  const auto metrics = build_metrics(names, config, config.embeddings.empty() ? nullptr : &emb.table);

  std::vector<std::vector<std::pair<ScoreCell, ScoreCell>>> cells(
      shared.size(), std::vector<std::pair<ScoreCell, ScoreCell>>(metrics.size()));
  parallel_for(shared.size(), resolve_threads(config.threads), [&](std::size_t c) {
    for (std::size_t m = 0; m < metrics.size(); ++m) {
      cells[c][m] = {safe_score(metrics[m], ab[c], rb[c]), safe_score(metrics[m], bb[c], rb[c])};
    }
  });

  std::vector<TieThreshold> ties;
  for (std::size_t m = 0; m < metrics.size(); ++m) {
    TieThreshold tie{names[m], config.tie_threshold.value_or(0.0), std::nan("")};
    if (config.tie_rate) {
      std::vector<double> diffs;
      for (std::size_t c = 0; c < shared.size(); ++c) {
        const auto& [sa, sb] = cells[c][m];
        if (sa.error.empty() && sb.error.empty()) diffs.push_back(sa.value - sb.value);
      }
      if (!diffs.empty()) tie = calibrate_tie_threshold(diffs, *config.tie_rate, names[m]);
      tie.target_rate = *config.tie_rate;
    }
    ties.push_back(tie);
  }

  struct Row {
    std::string context_id, metric, verdict, error;
    double a, b;
  };
  std::vector<Row> rows;
  std::map<std::string, std::map<std::string, std::size_t>> tally;
  std::size_t failed = 0;
  for (std::size_t c = 0; c < shared.size(); ++c) {
    for (std::size_t m = 0; m < metrics.size(); ++m) {
      const auto& [sa, sb] = cells[c][m];
      Row row{shared[c], names[m], "", "", sa.value, sb.value};
      if (!sa.error.empty() || !sb.error.empty()) {
        row.error = sa.error.empty() ? sb.error : sa.error;
        ++failed;
      } else {
        row.verdict = std::string(to_string(decide(sa.value, sb.value, ties[m].threshold).verdict));
        ++tally[names[m]][row.verdict];
      }
      rows.push_back(std::move(row));
    }
  }

  std::ostringstream doc;
  if (format == ReportFormat::json) {
    json jrows = json::array(), jties = json::array(), jsummary = json::array();
    for (const auto& r : rows) {
      json j = {{"context_id", r.context_id}, {"metric", r.metric},
                {"score_a", number_or_null(r.a)}, {"score_b", number_or_null(r.b)},
                {"verdict", r.verdict.empty() ? json(nullptr) : json(r.verdict)}};
      if (!r.error.empty()) j["error"] = r.error;
      jrows.push_back(std::move(j));
    }
    for (const auto& t : ties) {
      jties.push_back({{"metric", t.metric}, {"threshold", t.threshold},
                       {"target_rate", number_or_null(t.target_rate)}});
    }
    for (const auto& n : names) {
      jsummary.push_back({{"metric", n}, {"A", tally[n]["A"]}, {"B", tally[n]["B"]}, {"TIE", tally[n]["TIE"]}});
    }
    doc << json{{"comparisons", jrows}, {"thresholds", jties}, {"summary", jsummary},
                {"skipped", skipped_json(skipped)}}.dump(2)
        << '\n';
  } else if (format == ReportFormat::csv) {
    doc << "context_id,metric,score_a,score_b,verdict,threshold\n";
    for (std::size_t i = 0; i < rows.size(); ++i) {
      const auto& r = rows[i];
      doc << r.context_id << ',' << r.metric << ',' << fmt(r.a) << ',' << fmt(r.b) << ','
          << (r.error.empty() ? r.verdict : "ERROR") << ',' << fmt(ties[i % metrics.size()].threshold) << '\n';
    }
  } else {
    doc << "## Tie thresholds\n\n| metric | threshold | target tie rate |\n|---|---:|---:|\n";
    for (const auto& t : ties) doc << "| " << t.metric << " | " << fmt(t.threshold) << " | " << fmt(t.target_rate) << " |\n";
    doc << "\n## Verdicts\n\n| metric | A | B | TIE |\n|---|---:|---:|---:|\n";
    for (const auto& n : names) {
      doc << "| " << n << " | " << tally[n]["A"] << " | " << tally[n]["B"] << " | " << tally[n]["TIE"] << " |\n";
    }
    doc << "\n## Per context\n\n| context | metric | score A | score B | verdict |\n|---|---|---:|---:|---|\n";
    for (const auto& r : rows) {
      doc << "| " << r.context_id << " | " << r.metric << " | " << fmt(r.a) << " | " << fmt(r.b)
          << " | " << (r.error.empty() ? r.verdict : "error: " + r.error) << " |\n";
    }
  }
  out << doc.str();
  return static_cast<double>(failed) > kMaxFailedShare * static_cast<double>(rows.size())
             ? kExitPartialFailure
             : kExitOk;
}

int cmd_report(const RunConfig& config, std::ostream& out) {
  require_file(config.input, "report input");
  const ReportFormat format = parse_report_format(config.format);
  std::ifstream in(config.input);
  std::stringstream buffer;
  buffer << in.rdbuf();
  out << render_report(parse_report_json(buffer.str()), format);
  return kExitOk;
}

}  // namespace trafficdist
