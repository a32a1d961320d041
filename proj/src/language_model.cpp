#include "trafficdist/language_model.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "trafficdist/errors.hpp"

namespace trafficdist {

NGramLM NGramLM::train(const Bag& bag, double discount, std::size_t order) {
  if (bag.empty()) throw UsageError("language model needs a non-empty training bag");
  if (!(discount > 0.0 && discount < 1.0)) throw UsageError("discount must be in (0, 1)");
  if (order < 1) throw UsageError("order must be >= 1");

  NGramLM lm;
  lm.order_ = order;
  lm.discount_ = discount;
  lm.words_ = {"<s>", "</s>", "<unk>"};

  std::vector<std::vector<WordId>> padded;
  for (const auto& s : bag.items) {
    std::vector<WordId> seq(order - 1, kBos);
    for (const auto& t : s.tokens) {
      auto [it, inserted] = lm.ids_.emplace(t, static_cast<WordId>(lm.words_.size()));
      if (inserted) lm.words_.push_back(t);
      seq.push_back(it->second);
    }
    seq.push_back(kEos);
    padded.push_back(std::move(seq));
  }

  lm.tables_.resize(order);
  // Distinct n-grams (n = 2..order) ending at predicted positions; each one
  // is a left extension of its (n-1)-suffix.
  std::vector<std::set<std::vector<WordId>>> distinct(order + 1);
  for (const auto& seq : padded) {
    for (std::size_t i = order - 1; i < seq.size(); ++i) {
      std::vector<WordId> top(seq.begin() + static_cast<std::ptrdiff_t>(i + 1 - order),
                              seq.begin() + static_cast<std::ptrdiff_t>(i + 1));
      Node& node = lm.tables_[order - 1][std::vector<WordId>(top.begin(), top.end() - 1)];
      node.next[top.back()] += 1.0;
      node.total += 1.0;
      for (std::size_t n = 2; n < order + 1; ++n) {
        distinct[n].insert(std::vector<WordId>(top.end() - static_cast<std::ptrdiff_t>(n), top.end()));
      }
    }
  }
  for (std::size_t n = 2; n <= order; ++n) {
    for (const auto& gram : distinct[n]) {
      // suffix of length n-1 predicts gram.back() at order n-1
      std::vector<WordId> history(gram.begin() + 1, gram.end() - 1);
      Node& node = lm.tables_[n - 2][history];
      node.next[gram.back()] += 1.0;
      node.total += 1.0;
    }
  }
  if (order == 1) {
    // No left extensions exist; fall back to raw unigram counts.
    lm.tables_[0].clear();
    Node& root = lm.tables_[0][{}];
    for (const auto& seq : padded) {
      for (WordId w : seq) {
        if (w == kBos) continue;
        root.next[w] += 1.0;
        root.total += 1.0;
      }
    }
  }
  return lm;
}

NGramLM::WordId NGramLM::word_id(const std::string& token) const {
  auto it = ids_.find(token);
  return it == ids_.end() ? kUnk : it->second;
}

std::vector<NGramLM::WordId> NGramLM::predictable() const {
  std::vector<WordId> out{kEos, kUnk};
  for (WordId id = 3; id < static_cast<WordId>(words_.size()); ++id) out.push_back(id);
  return out;
}

double NGramLM::prob_at(std::size_t n, std::span<const WordId> history, WordId word) const {
  const auto& table = tables_[n - 1];
  std::vector<WordId> key(history.end() - static_cast<std::ptrdiff_t>(n - 1), history.end());
  auto it = table.find(key);
  if (n == 1) {
    const Node& root = it->second;
    const double types = static_cast<double>(root.next.size());
    if (word == kUnk) return discount_ * types / root.total;
    auto w = root.next.find(word);
    if (w == root.next.end()) return 0.0;
    return std::max(w->second - discount_, 0.0) / root.total;
  }
  const double lower = prob_at(n - 1, history, word);
  if (it == table.end() || it->second.total == 0.0) return lower;
  const Node& node = it->second;
  double count = 0.0;
  if (auto w = node.next.find(word); w != node.next.end()) count = w->second;
  const double types = static_cast<double>(node.next.size());
  return (std::max(count - discount_, 0.0) + discount_ * types * lower) / node.total;
}

double NGramLM::probability(std::span<const WordId> history, WordId word) const {
  std::vector<WordId> full(order_ - 1, kBos);
  const std::size_t take = std::min(history.size(), order_ - 1);
  std::copy(history.end() - static_cast<std::ptrdiff_t>(take), history.end(),
            full.end() - static_cast<std::ptrdiff_t>(take));
  return prob_at(order_, full, word);
}

std::vector<std::vector<NGramLM::WordId>> NGramLM::contexts(std::size_t length) const {
  std::vector<std::vector<WordId>> out;
  if (length >= order_) return out;
  for (const auto& [history, node] : tables_[length]) out.push_back(history);
  return out;
}

std::pair<double, std::size_t> NGramLM::sentence_log_prob(const Tokens& tokens) const {
  std::vector<WordId> seq(order_ - 1, kBos);
  for (const auto& t : tokens) seq.push_back(word_id(t));
  seq.push_back(kEos);
  double log_prob = 0.0;
  std::size_t scored = 0;
  for (std::size_t i = order_ - 1; i < seq.size(); ++i) {
    std::span<const WordId> history(seq.data() + i + 1 - order_, order_ - 1);
    log_prob += std::log(prob_at(order_, history, seq[i]));
    ++scored;
  }
  return {log_prob, scored};
}

double perplexity(const NGramLM& lm, const Bag& bag) {
  if (bag.empty()) throw UsageError("perplexity needs a non-empty bag");
  double log_prob = 0.0;
  std::size_t scored = 0;
  for (const auto& s : bag.items) {
    auto [lp, n] = lm.sentence_log_prob(s.tokens);
    log_prob += lp;
    scored += n;
  }
  return std::exp(-log_prob / static_cast<double>(scored));
}

double inv_pp(const Bag& g, const Bag& r, double discount) {
  return 1.0 / perplexity(NGramLM::train(g, discount), r);
}

}  // namespace trafficdist
