#pragma once

#include <map>
#include <set>
#include <string>

#include "trafficdist/corpus.hpp"
#include "trafficdist/sentence_sim.hpp"

namespace trafficdist {

// Sparse nonnegative term weights with a cached Euclidean norm.
class TermVector {
 public:
  TermVector() = default;
  explicit TermVector(std::map<std::string, double> weights);

  const std::map<std::string, double>& weights() const { return weights_; }
  double norm() const { return norm_; }
  double at(const std::string& term) const;
  bool is_zero() const { return norm_ == 0.0; }

  double dot(const TermVector& other) const;
  TermVector operator+(const TermVector& other) const;

 private:
  std::map<std::string, double> weights_;
  double norm_ = 0.0;
};

// Cosine similarity; 0 when either vector is zero.
double cosine(const TermVector& a, const TermVector& b);

// Token counts of one sentence.
TermVector sentence_tf(const Sentence& sentence);

// Token counts summed over every occurrence.
TermVector tf_vector(const Bag& bag);

// tf weights times unigram idf.
TermVector tfidf_vector(const Bag& bag, const IdfTable& idf);

enum class Weighting { tf, tfidf };

// Cosine of the two bag vectors. For tf-idf the idf is computed over the
// distinct sentences of G and R together. Throws DegenerateVector when a bag
// vector is zero.
double cos_bags(const Bag& g, const Bag& r, Weighting weighting);

class UnigramDist {
 public:
  explicit UnigramDist(std::map<std::string, double> probabilities);

  const std::map<std::string, double>& probabilities() const { return probs_; }
  double p(const std::string& token) const;

 private:
  std::map<std::string, double> probs_;
};

std::set<std::string> vocabulary(const Bag& bag);

// Add-one smoothed: p(w) = (count(w) + 1) / (total + |vocab|).
UnigramDist unigram_dist(const Bag& bag, const std::set<std::string>& vocab);

// Natural-log KL(p || q) over p's support.
double kl_divergence(const UnigramDist& p, const UnigramDist& q);

constexpr double kInverseEpsilon = 1e-6;

// 1 / (KL(G || R) + 1e-6) over the union vocabulary.
double inv_kl(const Bag& g, const Bag& r);

}  // namespace trafficdist
