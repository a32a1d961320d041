#pragma once

// Slow, independently written reference implementations the library is
// checked against. They favour obviousness over speed.

#include <cstddef>
#include <map>
#include <string>
#include <vector>

#include "trafficdist/corpus.hpp"
#include "trafficdist/distributional.hpp"
#include "trafficdist/sentence_sim.hpp"

namespace trafficdist::testing {

// Sum over every (g, r) occurrence pair divided by |G||R|.
double oracle_pair_score(const Bag& g, const Bag& r, const SimilarityFn& sim);

// Best total over all n! permutations of an n x n weight table.
double oracle_best_permutation(const std::vector<std::vector<double>>& w);

// Equalizes exactly as the library does, then (1/n) max over permutations.
double oracle_align_score(const Bag& g, const Bag& r, const SimilarityFn& sim, std::uint64_t seed);

// 1 - 6 sum d^2 / (n (n^2 - 1)) for tie-free data.
double oracle_spearman_closed_form(const std::vector<double>& scores, const std::vector<int>& ranks);

// Pearson correlation of average ranks computed by counting (rank = #smaller +
// (#equal + 1) / 2); scores are ranked descending.
double oracle_spearman_counting(const std::vector<double>& scores, const std::vector<int>& ranks);

// Textbook DBSCAN on a dense distance matrix.
std::vector<int> oracle_dbscan(const std::vector<TermVector>& points, double eps, std::size_t min_pts);

// Interpolated Kneser-Ney written from the formulas over string n-grams,
// recounting the training data on every query.
class OracleKneserNey {
 public:
  OracleKneserNey(const std::vector<Tokens>& training, double discount, std::size_t order = 4);

  // history holds exactly order-1 words ("<s>" for padding); unknown words
  // are passed as "<unk>".
  double prob(const std::vector<std::string>& history, const std::string& word) const;
  double perplexity(const std::vector<Tokens>& test) const;
  const std::vector<std::string>& vocabulary() const { return vocab_; }

 private:
  double prob_order(std::size_t n, const std::vector<std::string>& history, const std::string& word) const;

  std::vector<std::vector<std::string>> padded_;
  std::vector<std::string> vocab_;  // training words plus "</s>"
  double d_;
  std::size_t order_;
};

// Textbook add-one unigram KL(G || R) over the union vocabulary.
double oracle_kl(const Bag& g, const Bag& r);

}  // namespace trafficdist::testing
