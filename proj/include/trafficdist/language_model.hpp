#pragma once

#include <cstddef>
#include <map>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "trafficdist/corpus.hpp"

namespace trafficdist {

// Interpolated Kneser-Ney n-gram model with a single absolute discount.
// Sentences are padded with order-1 begin markers and one end marker. The
// highest order uses raw counts, lower orders use continuation counts, and
// the unigram level hands its discounted mass to the unknown-word token.
class NGramLM {
 public:
  using WordId = int;
  static constexpr WordId kBos = 0;
  static constexpr WordId kEos = 1;
  static constexpr WordId kUnk = 2;

  static NGramLM train(const Bag& bag, double discount = 0.75, std::size_t order = 4);

  std::size_t order() const { return order_; }
  double discount() const { return discount_; }

  // Unknown tokens map to kUnk.
  WordId word_id(const std::string& token) const;
  const std::string& word(WordId id) const { return words_.at(static_cast<std::size_t>(id)); }

  // Every id a distribution is defined over: training words, kEos and kUnk.
  std::vector<WordId> predictable() const;

  // p(word | history); only the last order-1 history ids are used.
  double probability(std::span<const WordId> history, WordId word) const;

  // Histories of the given length (0 .. order-1) that have statistics.
  std::vector<std::vector<WordId>> contexts(std::size_t length) const;

  // Total natural-log probability and scored-token count of one sentence,
  // end marker included.
  std::pair<double, std::size_t> sentence_log_prob(const Tokens& tokens) const;

 private:
  struct Node {
    std::map<WordId, double> next;  // raw or continuation counts
    double total = 0.0;
  };

  double prob_at(std::size_t n, std::span<const WordId> history, WordId word) const;

  std::size_t order_ = 4;
  double discount_ = 0.75;
  std::vector<std::string> words_;
  std::unordered_map<std::string, WordId> ids_;
  // tables_[n-1] keyed by history of length n-1.
  std::vector<std::map<std::vector<WordId>, Node>> tables_;
};

// exp(-(1/T) sum ln p) over every token (and end marker) of every occurrence.
double perplexity(const NGramLM& lm, const Bag& bag);

// Train on G, score R: 1 / PP_G(R).
double inv_pp(const Bag& g, const Bag& r, double discount = 0.75);

}  // namespace trafficdist
