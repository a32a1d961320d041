#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <string_view>
#include <vector>

#include "trafficdist/cluster.hpp"
#include "trafficdist/corpus.hpp"

namespace trafficdist {

// Bag-to-bag similarity: score(G, R), higher is more similar.
using MetricFn = std::function<double(const Bag& generated, const Bag& reference)>;

struct Metric {
  std::string name;
  MetricFn score;
  bool needs_embeddings = false;
};

struct MetricConfig {
  std::uint64_t seed = 0;  // alignment resampling
  DbscanParams dbscan;
  double kn_discount = 0.75;
  const EmbeddingTable* embeddings = nullptr;
};

// The thirteen registered names, in reporting order.
const std::vector<std::string>& metric_names();

bool metric_needs_embeddings(std::string_view name);

// Throws UsageError listing the registry for unknown names, and for sbert
// metrics when no embedding table is configured.
Metric make_metric(std::string_view name, const MetricConfig& config);

// Splits "a,b,c" and validates every name against the registry.
std::vector<std::string> parse_metric_list(std::string_view list);

}  // namespace trafficdist
