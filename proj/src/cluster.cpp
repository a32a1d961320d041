#include "trafficdist/cluster.hpp"

#include <algorithm>
#include <cmath>
#include <tuple>

#include "trafficdist/errors.hpp"

namespace trafficdist {

ClusterAssignment dbscan(const std::vector<TermVector>& points, const DbscanParams& params) {
  if (!(params.eps > 0.0)) throw UsageError("dbscan eps must be > 0");
  if (params.min_pts < 1) throw UsageError("dbscan min_pts must be >= 1");
  const std::size_t n = points.size();

  std::vector<std::vector<std::size_t>> neighbors(n);
  for (std::size_t i = 0; i < n; ++i) {
    neighbors[i].push_back(i);
    for (std::size_t j = i + 1; j < n; ++j) {
      if (1.0 - cosine(points[i], points[j]) <= params.eps) {
        neighbors[i].push_back(j);
        neighbors[j].push_back(i);
      }
    }
  }
  for (auto& list : neighbors) std::sort(list.begin(), list.end());

  constexpr int kUnvisited = -2;
  ClusterAssignment out;
  out.labels.assign(n, kUnvisited);
  int next_id = 0;
  for (std::size_t i = 0; i < n; ++i) {
    if (out.labels[i] != kUnvisited) continue;
    if (neighbors[i].size() < params.min_pts) {
      out.labels[i] = ClusterAssignment::kNoise;
      continue;
    }
    const int id = next_id++;
    out.labels[i] = id;
    std::vector<std::size_t> frontier{i};
    for (std::size_t head = 0; head < frontier.size(); ++head) {
      const std::size_t p = frontier[head];
      if (neighbors[p].size() < params.min_pts) continue;  // border: no expansion
      for (std::size_t q : neighbors[p]) {
        if (out.labels[q] == kUnvisited || out.labels[q] == ClusterAssignment::kNoise) {
          out.labels[q] = id;
          frontier.push_back(q);
        }
      }
    }
  }
  for (std::size_t i = 0; i < n; ++i) {
    if (out.labels[i] != ClusterAssignment::kNoise) out.clusters[out.labels[i]].push_back(i);
  }
  return out;
}

double clus_score(const Bag& g, const Bag& r, const DbscanParams& params,
                  const SentenceEncoder& encoder) {
  if (g.empty() || r.empty()) throw UsageError("clus_score needs non-empty bags");
  struct Point {
    const Sentence* sentence;
    bool from_reference;
  };
  std::vector<Point> combined;
  combined.reserve(g.size() + r.size());
  for (const auto& s : g.items) combined.push_back({&s, false});
  for (const auto& s : r.items) combined.push_back({&s, true});
  std::stable_sort(combined.begin(), combined.end(), [](const Point& a, const Point& b) {
    if (canonical_less(*a.sentence, *b.sentence)) return true;
    if (canonical_less(*b.sentence, *a.sentence)) return false;
    return a.from_reference < b.from_reference;
  });

  std::vector<TermVector> encoded;
  encoded.reserve(combined.size());
  for (const auto& p : combined) encoded.push_back(encoder(*p.sentence));
  ClusterAssignment assignment = dbscan(encoded, params);

  const double total = static_cast<double>(combined.size());
  const double expected = static_cast<double>(r.size()) / total;
  double weighted = 0.0;
  for (const auto& [id, members] : assignment.clusters) {
    double from_r = 0.0;
    for (std::size_t m : members) from_r += combined[m].from_reference ? 1.0 : 0.0;
    const double size = static_cast<double>(members.size());
    weighted += std::abs(expected - from_r / size) * size / total;
  }
  for (std::size_t i = 0; i < combined.size(); ++i) {
    if (assignment.labels[i] != ClusterAssignment::kNoise) continue;
    const double purity = combined[i].from_reference ? 1.0 : 0.0;
    weighted += std::abs(expected - purity) / total;
  }
  return 1.0 / (weighted + kInverseEpsilon);
}

}  // namespace trafficdist
