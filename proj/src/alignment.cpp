#include "trafficdist/alignment.hpp"

#include <limits>
#include <string>

#include "trafficdist/errors.hpp"

namespace trafficdist {
namespace {

// Reduced costs at or below this count as tight (zero) edges.
constexpr double kTight = 1e-11;

struct Duals {
  std::vector<double> row;
  std::vector<double> col;
  std::vector<std::size_t> col_of_row;
};

// Shortest-augmenting-path Hungarian method minimizing sum of (-weight).
Duals solve_assignment(const ScoreMatrix& w) {
  const std::size_t n = w.rows;
  const double inf = std::numeric_limits<double>::infinity();
  // 1-based with a virtual column 0.
  std::vector<double> u(n + 1, 0.0), v(n + 1, 0.0);
  std::vector<std::size_t> match(n + 1, 0), way(n + 1, 0);
  for (std::size_t i = 1; i <= n; ++i) {
    match[0] = i;
    std::size_t j0 = 0;
    std::vector<double> minv(n + 1, inf);
    std::vector<char> used(n + 1, 0);
    do {
      used[j0] = 1;
      const std::size_t i0 = match[j0];
      double delta = inf;
      std::size_t j1 = 0;
      for (std::size_t j = 1; j <= n; ++j) {
        if (used[j]) continue;
        double cur = -w(i0 - 1, j - 1) - u[i0] - v[j];
        if (cur < minv[j]) {
          minv[j] = cur;
          way[j] = j0;
        }
        if (minv[j] < delta) {
          delta = minv[j];
          j1 = j;
        }
      }
      for (std::size_t j = 0; j <= n; ++j) {
        if (used[j]) {
          u[match[j]] += delta;
          v[j] -= delta;
        } else {
          minv[j] -= delta;
        }
      }
      j0 = j1;
    } while (match[j0] != 0);
    do {
      std::size_t j1 = way[j0];
      match[j0] = match[j1];
      j0 = j1;
    } while (j0 != 0);
  }
  Duals d{std::vector<double>(u.begin() + 1, u.end()), std::vector<double>(v.begin() + 1, v.end()),
          std::vector<std::size_t>(n)};
  for (std::size_t j = 1; j <= n; ++j) d.col_of_row[match[j] - 1] = j - 1;
  return d;
}

// Rewrites a perfect matching of the tight subgraph into the lexicographically
// smallest one. Every perfect matching of that subgraph is optimal.
class LexSmallest {
 public:
  LexSmallest(const ScoreMatrix& w, const Duals& d)
      : w_(w), d_(d), n_(w.rows), col_of_(d.col_of_row), row_of_(n_),
        row_fixed_(n_, 0), col_fixed_(n_, 0) {
    for (std::size_t i = 0; i < n_; ++i) row_of_[col_of_[i]] = i;
  }

  std::vector<std::size_t> run() {
    for (std::size_t i = 0; i < n_; ++i) {
      for (std::size_t j = 0; j < n_; ++j) {
        if (col_fixed_[j] || !tight(i, j)) continue;
        if (j == col_of_[i] || reroute(i, j)) break;
      }
      row_fixed_[i] = 1;
      col_fixed_[col_of_[i]] = 1;
    }
    return col_of_;
  }

 private:
  bool tight(std::size_t i, std::size_t j) const {
    return -w_(i, j) - d_.row[i] - d_.col[j] <= kTight;
  }

  // Tries to give column j to row i, moving j's current owner along an
  // alternating path that ends at the column i releases.
  bool reroute(std::size_t i, std::size_t j) {
    const std::size_t target = col_of_[i];
    const std::size_t start = row_of_[j];
    std::vector<std::size_t> via(n_, n_);  // column -> column that led to its row
    std::vector<char> seen(n_, 0);
    seen[j] = 1;
    std::vector<std::size_t> queue{j};
    for (std::size_t head = 0; head < queue.size(); ++head) {
      const std::size_t from_col = queue[head];
      const std::size_t row = from_col == j ? start : row_of_[from_col];
      for (std::size_t c = 0; c < n_; ++c) {
        if (seen[c] || col_fixed_[c] || !tight(row, c)) continue;
        seen[c] = 1;
        via[c] = from_col;
        if (c == target) {
          // Walk back: each row on the path takes the column after it.
          std::size_t col = c;
          while (col != j) {
            std::size_t prev = via[col];
            std::size_t r = row_of_[prev];
            col_of_[r] = col;
            row_of_[col] = r;
            col = prev;
          }
          col_of_[i] = j;
          row_of_[j] = i;
          return true;
        }
        if (row_of_[c] == i) continue;
        queue.push_back(c);
      }
    }
    return false;
  }

  const ScoreMatrix& w_;
  const Duals& d_;
  std::size_t n_;
  std::vector<std::size_t> col_of_;
  std::vector<std::size_t> row_of_;
  std::vector<char> row_fixed_;
  std::vector<char> col_fixed_;
};

}  // namespace

Alignment max_weight_matching(const ScoreMatrix& weights) {
  if (weights.rows != weights.cols) {
    throw ShapeError("matching needs a square matrix, got " + std::to_string(weights.rows) +
                     "x" + std::to_string(weights.cols));
  }
  Alignment out;
  if (weights.rows == 0) return out;
  Duals duals = solve_assignment(weights);
  std::vector<std::size_t> cols = LexSmallest(weights, duals).run();
  for (std::size_t i = 0; i < cols.size(); ++i) {
    out.pairs.emplace_back(i, cols[i]);
    out.total_weight += weights(i, cols[i]);
  }
  return out;
}

double pair_score(const ScoreMatrix& sims) {
  if (sims.values.empty()) throw UsageError("pair_score needs non-empty bags");
  double sum = 0.0;
  for (double v : sims.values) sum += v;
  return sum / (static_cast<double>(sims.rows) * static_cast<double>(sims.cols));
}

double pair_score(const Bag& g, const Bag& r, const SimilarityFn& sim) {
  return pair_score(similarity_matrix(g, r, sim));
}

double pair_score(const Bag& g, const Bag& r, SimKind kind, const EmbeddingTable* embeddings) {
  return pair_score(similarity_matrix(g, r, kind, embeddings));
}

double align_score(const Bag& g, const Bag& r, const SimilarityFn& sim, std::uint64_t seed) {
  auto [ge, re] = equalize_sizes(g, r, seed);
  Alignment a = max_weight_matching(similarity_matrix(ge, re, sim));
  return a.total_weight / static_cast<double>(ge.size());
}

double align_score(const Bag& g, const Bag& r, SimKind kind, std::uint64_t seed,
                   const EmbeddingTable* embeddings) {
  auto [ge, re] = equalize_sizes(g, r, seed);
  Alignment a = max_weight_matching(similarity_matrix(ge, re, kind, embeddings));
  return a.total_weight / static_cast<double>(ge.size());
}

}  // namespace trafficdist
