#include "trafficdist/metrics.hpp"

#include <algorithm>

#include "trafficdist/alignment.hpp"
#include "trafficdist/distributional.hpp"
#include "trafficdist/errors.hpp"
#include "trafficdist/language_model.hpp"

namespace trafficdist {

const std::vector<std::string>& metric_names() {
  static const std::vector<std::string> names = {
      "pair_bleu3", "pair_rouge_l", "pair_cider", "pair_sbert", "cos_tf",
      "cos_tfidf",  "clus_tf",      "inv_pp",     "inv_kl",     "align_bleu3",
      "align_rouge_l", "align_cider", "align_sbert",
  };
  return names;
}

bool metric_needs_embeddings(std::string_view name) {
  return name == "pair_sbert" || name == "align_sbert";
}

namespace {

std::string registry_list() {
  std::string out;
  for (const auto& n : metric_names()) out += (out.empty() ? "" : ", ") + n;
  return out;
}

}  // namespace

Metric make_metric(std::string_view name, const MetricConfig& config) {
  const std::string id(name);
  if (std::find(metric_names().begin(), metric_names().end(), id) == metric_names().end()) {
    throw UsageError("unknown metric '" + id + "' (registry: " + registry_list() + ")");
  }
  if (metric_needs_embeddings(name) && !config.embeddings) {
    throw UsageError("metric " + id + " needs --embeddings");
  }

  auto sim_metric = [&](bool aligned, SimKind kind) -> MetricFn {
    const EmbeddingTable* table = config.embeddings;
    const std::uint64_t seed = config.seed;
    if (aligned) {
      return [kind, table, seed](const Bag& g, const Bag& r) {
        return align_score(g, r, kind, seed, table);
      };
    }
    return [kind, table](const Bag& g, const Bag& r) { return pair_score(g, r, kind, table); };
  };

  Metric m{id, {}, metric_needs_embeddings(name)};
  const std::string family = id.substr(0, id.find('_'));
  const std::string rest = id.substr(id.find('_') + 1);
  if (family == "pair" || family == "align") {
    SimKind kind = rest == "bleu3"     ? SimKind::bleu3
                   : rest == "rouge_l" ? SimKind::rouge_l
                   : rest == "cider"   ? SimKind::cider
                                       : SimKind::embed_cos;
    m.score = sim_metric(family == "align", kind);
  } else if (id == "cos_tf") {
    m.score = [](const Bag& g, const Bag& r) { return cos_bags(g, r, Weighting::tf); };
  } else if (id == "cos_tfidf") {
    m.score = [](const Bag& g, const Bag& r) { return cos_bags(g, r, Weighting::tfidf); };
  } else if (id == "clus_tf") {
    DbscanParams params = config.dbscan;
    m.score = [params](const Bag& g, const Bag& r) { return clus_score(g, r, params); };
  } else if (id == "inv_pp") {
    double d = config.kn_discount;
    m.score = [d](const Bag& g, const Bag& r) { return inv_pp(g, r, d); };
  } else if (id == "inv_kl") {
    m.score = [](const Bag& g, const Bag& r) { return inv_kl(g, r); };
  }
  return m;
}

std::vector<std::string> parse_metric_list(std::string_view list) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (start <= list.size()) {
    std::size_t end = list.find(',', start);
    if (end == std::string_view::npos) end = list.size();
    std::string name(list.substr(start, end - start));
    name.erase(0, name.find_first_not_of(" \t"));
    name.erase(name.find_last_not_of(" \t") + 1);
    if (!name.empty()) {
      if (std::find(metric_names().begin(), metric_names().end(), name) == metric_names().end()) {
        throw UsageError("unknown metric '" + name + "' (registry: " + registry_list() + ")");
      }
      if (std::find(out.begin(), out.end(), name) == out.end()) out.push_back(name);
    }
    start = end + 1;
  }
  if (out.empty()) throw UsageError("no metrics requested (registry: " + registry_list() + ")");
  return out;
}

}  // namespace trafficdist
