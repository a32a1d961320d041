#include "trafficdist/distributional.hpp"

#include <cmath>
#include <numeric>

#include "trafficdist/errors.hpp"

namespace trafficdist {

TermVector::TermVector(std::map<std::string, double> weights) : weights_(std::move(weights)) {
  double sq = 0.0;
  for (const auto& [t, w] : weights_) {
    if (!(w >= 0.0)) throw ValueError("term weights must be >= 0");
    sq += w * w;
  }
  norm_ = std::sqrt(sq);
}

double TermVector::at(const std::string& term) const {
  auto it = weights_.find(term);
  return it == weights_.end() ? 0.0 : it->second;
}

double TermVector::dot(const TermVector& other) const {
  double sum = 0.0;
  auto a = weights_.begin();
  auto b = other.weights_.begin();
  while (a != weights_.end() && b != other.weights_.end()) {
    if (a->first < b->first) {
      ++a;
    } else if (b->first < a->first) {
      ++b;
    } else {
      sum += a->second * b->second;
      ++a;
      ++b;
    }
  }
  return sum;
}

TermVector TermVector::operator+(const TermVector& other) const {
  std::map<std::string, double> sum = weights_;
  for (const auto& [t, w] : other.weights_) sum[t] += w;
  return TermVector(std::move(sum));
}

double cosine(const TermVector& a, const TermVector& b) {
  if (a.is_zero() || b.is_zero()) return 0.0;
  return std::min(1.0, a.dot(b) / (a.norm() * b.norm()));
}

TermVector sentence_tf(const Sentence& sentence) {
  std::map<std::string, double> counts;
  for (const auto& t : sentence.tokens) counts[t] += 1.0;
  return TermVector(std::move(counts));
}

TermVector tf_vector(const Bag& bag) {
  if (bag.empty()) throw UsageError("tf_vector needs a non-empty bag");
  std::map<std::string, double> counts;
  for (const auto& s : bag.items) {
    for (const auto& t : s.tokens) counts[t] += 1.0;
  }
  return TermVector(std::move(counts));
}

TermVector tfidf_vector(const Bag& bag, const IdfTable& idf) {
  std::map<std::string, double> weights = tf_vector(bag).weights();
  for (auto& [t, w] : weights) w *= idf.idf(t);
  return TermVector(std::move(weights));
}

double cos_bags(const Bag& g, const Bag& r, Weighting weighting) {
  if (g.empty() || r.empty()) throw UsageError("cos_bags needs non-empty bags");
  TermVector vg, vr;
  if (weighting == Weighting::tf) {
    vg = tf_vector(g);
    vr = tf_vector(r);
  } else {
    Bag both{g.context_id, g.items};
    both.items.insert(both.items.end(), r.items.begin(), r.items.end());
    IdfTable idf = build_idf(both, 1);
    vg = tfidf_vector(g, idf);
    vr = tfidf_vector(r, idf);
  }
  if (vg.is_zero() || vr.is_zero()) {
    throw DegenerateVector("bag vector is zero (every token has idf 0)");
  }
  return cosine(vg, vr);
}

UnigramDist::UnigramDist(std::map<std::string, double> probabilities)
    : probs_(std::move(probabilities)) {
  if (probs_.empty()) throw ValueError("distribution has no support");
  double sum = 0.0;
  for (const auto& [t, p] : probs_) {
    if (!(p > 0.0)) throw ValueError("probabilities must be > 0");
    sum += p;
  }
  if (std::abs(sum - 1.0) > 1e-9) throw ValueError("probabilities must sum to 1");
}

double UnigramDist::p(const std::string& token) const {
  auto it = probs_.find(token);
  return it == probs_.end() ? 0.0 : it->second;
}

std::set<std::string> vocabulary(const Bag& bag) {
  std::set<std::string> vocab;
  for (const auto& s : bag.items) vocab.insert(s.tokens.begin(), s.tokens.end());
  return vocab;
}

UnigramDist unigram_dist(const Bag& bag, const std::set<std::string>& vocab) {
  std::map<std::string, double> counts;
  for (const auto& w : vocab) counts[w] = 0.0;
  double total = 0.0;
  for (const auto& s : bag.items) {
    for (const auto& t : s.tokens) {
      auto it = counts.find(t);
      if (it == counts.end()) throw UsageError("token '" + t + "' missing from vocabulary");
      it->second += 1.0;
      total += 1.0;
    }
  }
  const double denom = total + static_cast<double>(vocab.size());
  for (auto& [w, c] : counts) c = (c + 1.0) / denom;
  return UnigramDist(std::move(counts));
}

double kl_divergence(const UnigramDist& p, const UnigramDist& q) {
  double kl = 0.0;
  for (const auto& [w, pw] : p.probabilities()) {
    double qw = q.p(w);
    if (qw <= 0.0) throw ValueError("KL undefined: q(" + w + ") = 0");
    kl += pw * std::log(pw / qw);
  }
  return std::max(0.0, kl);
}

double inv_kl(const Bag& g, const Bag& r) {
  if (g.empty() || r.empty()) throw UsageError("inv_kl needs non-empty bags");
  std::set<std::string> vocab = vocabulary(g);
  std::set<std::string> vr = vocabulary(r);
  vocab.insert(vr.begin(), vr.end());
  return 1.0 / (kl_divergence(unigram_dist(g, vocab), unigram_dist(r, vocab)) + kInverseEpsilon);
}

}  // namespace trafficdist
