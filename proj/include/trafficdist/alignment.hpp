#pragma once

#include <cstddef>
#include <cstdint>
#include <utility>
#include <vector>

#include "trafficdist/corpus.hpp"
#include "trafficdist/sentence_sim.hpp"

namespace trafficdist {

// 1-to-1 pairs (index into G, index into R), sorted by G index.
struct Alignment {
  std::vector<std::pair<std::size_t, std::size_t>> pairs;
  double total_weight = 0.0;
};

// Maximum-weight perfect matching on a square matrix (Hungarian algorithm).
// Among optimal matchings the lexicographically smallest pair list is
// returned. Throws ShapeError for non-square input.
Alignment max_weight_matching(const ScoreMatrix& weights);

// Mean of all |G| x |R| entries.
double pair_score(const ScoreMatrix& sims);
double pair_score(const Bag& g, const Bag& r, const SimilarityFn& sim);
double pair_score(const Bag& g, const Bag& r, SimKind kind,
                  const EmbeddingTable* embeddings = nullptr);

// Bags are equalized (upsampling the smaller one), matched 1-to-1 and the
// matched similarity is averaged over the equalized size.
double align_score(const Bag& g, const Bag& r, const SimilarityFn& sim, std::uint64_t seed);
double align_score(const Bag& g, const Bag& r, SimKind kind, std::uint64_t seed,
                   const EmbeddingTable* embeddings = nullptr);

}  // namespace trafficdist
