#pragma once

#include <cstddef>
#include <functional>
#include <map>
#include <vector>

#include "trafficdist/corpus.hpp"
#include "trafficdist/distributional.hpp"

namespace trafficdist {

struct ClusterAssignment {
  static constexpr int kNoise = -1;

  // Per point: cluster id (0, 1, ...) or kNoise.
  std::vector<int> labels;
  std::map<int, std::vector<std::size_t>> clusters;
};

struct DbscanParams {
  double eps = 0.4;        // cosine distance
  std::size_t min_pts = 2;  // neighbourhood size, the point itself included
};

// DBSCAN under cosine distance. A point is core when at least min_pts points
// (itself included) lie within eps. Clusters are numbered in order of their
// lowest-index core point; a border point joins the lowest-numbered cluster
// that reaches it.
ClusterAssignment dbscan(const std::vector<TermVector>& points, const DbscanParams& params);

using SentenceEncoder = std::function<TermVector(const Sentence&)>;

// Clustering similarity of G and R: cluster G ⊎ R (sorted by text), treat
// noise points as singleton clusters, and return
//   1 / (sum_C |C|/|B| * | |R|/|B| - |C ∩ R|/|C| | + 1e-6).
double clus_score(const Bag& g, const Bag& r, const DbscanParams& params = {},
                  const SentenceEncoder& encoder = sentence_tf);

}  // namespace trafficdist
