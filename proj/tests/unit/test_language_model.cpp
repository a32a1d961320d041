#include <cmath>

#include "doctest.h"
#include "oracles.hpp"
#include "synthetic.hpp"
#include "trafficdist/language_model.hpp"

using namespace trafficdist;
using namespace trafficdist::testing;

namespace {

Bag bag_of(std::initializer_list<const char*> texts) {
  Bag b{"c", {}};
  for (const char* t : texts) b.items.push_back(Sentence::from_text(t));
  return b;
}

std::vector<Tokens> token_lists(const Bag& bag) {
  std::vector<Tokens> out;
  for (const auto& s : bag.items) out.push_back(s.tokens);
  return out;
}

std::string oracle_name(const NGramLM& lm, NGramLM::WordId id) {
  if (id == NGramLM::kBos) return "<s>";
  if (id == NGramLM::kEos) return "</s>";
  if (id == NGramLM::kUnk) return "<unk>";
  return lm.word(id);
}

// Compares every predictable word under every full-length history the model
// has statistics for.
void check_against_oracle(const Bag& bag, double d, double tol) {
  NGramLM lm = NGramLM::train(bag, d);
  OracleKneserNey oracle(token_lists(bag), d);
  for (const auto& h : lm.contexts(lm.order() - 1)) {
    std::vector<std::string> names;
    for (auto id : h) names.push_back(oracle_name(lm, id));
    for (auto w : lm.predictable()) {
      CHECK(lm.probability(h, w) == doctest::Approx(oracle.prob(names, oracle_name(lm, w))).epsilon(tol));
    }
  }
}

}  // namespace

TEST_CASE("kneser-ney matches the oracle on a small corpus") {
  Bag bag = bag_of({"buy nike shoes", "buy adidas shoes", "search nike shoes online"});
  check_against_oracle(bag, 0.75, 1e-9);

  NGramLM lm = NGramLM::train(bag, 0.75);
  OracleKneserNey oracle(token_lists(bag), 0.75);
  Bag test = bag_of({"buy nike shoes", "buy shoes online now", "zebra"});
  CHECK(perplexity(lm, test) == doctest::Approx(oracle.perplexity(token_lists(test))).epsilon(1e-9));
}

TEST_CASE("kneser-ney matches the oracle on random corpora") {
  Rng rng(41);
  for (int trial = 0; trial < 25; ++trial) {
    Bag bag = random_bag(rng, 8, 6, 6);
    const double d = 0.25 + 0.25 * static_cast<double>(trial % 3);
    check_against_oracle(bag, d, 1e-9);
    NGramLM lm = NGramLM::train(bag, d);
    OracleKneserNey oracle(token_lists(bag), d);
    Bag test = random_bag(rng, 4, 6, 8);
    CHECK(perplexity(lm, test) == doctest::Approx(oracle.perplexity(token_lists(test))).epsilon(1e-9));
  }
}

TEST_CASE("every conditional distribution sums to one") {
  Rng rng(42);
  for (int trial = 0; trial < 30; ++trial) {
    Bag bag = random_bag(rng, 10, 6, 1 + rng.index(20));
    NGramLM lm = NGramLM::train(bag, 0.75);
    for (std::size_t len = 0; len < lm.order(); ++len) {
      for (const auto& h : lm.contexts(len)) {
        // an end marker never appears in a history, so the longer levels back off
        std::vector<NGramLM::WordId> full(lm.order() - 1 - len, NGramLM::kEos);
        full.insert(full.end(), h.begin(), h.end());
        double sum = 0.0;
        for (auto w : lm.predictable()) sum += lm.probability(full, w);
        CHECK(sum == doctest::Approx(1.0).epsilon(1e-6));
      }
    }
  }
}

TEST_CASE("a single observation dominates its history") {
  Bag bag = bag_of({"a b c d"});
  NGramLM lm = NGramLM::train(bag, 0.75);
  std::vector<NGramLM::WordId> h = {lm.word_id("a"), lm.word_id("b"), lm.word_id("c")};
  const double pd = lm.probability(h, lm.word_id("d"));
  for (auto w : lm.predictable()) {
    if (w != lm.word_id("d")) CHECK(pd > lm.probability(h, w));
  }
  CHECK(lm.word_id("never") == NGramLM::kUnk);
}

TEST_CASE("perplexity and inv_pp ranges") {
  Rng rng(43);
  for (int trial = 0; trial < 40; ++trial) {
    Bag g = random_bag(rng, 8, 5, 8), r = random_bag(rng, 8, 5, 10);
    NGramLM lm = NGramLM::train(g);
    CHECK(perplexity(lm, r) >= 1.0);
    const double s = inv_pp(g, r);
    CHECK(s > 0.0);
    CHECK(s <= 1.0);
  }
}

TEST_CASE("replacing half of R with unseen words lowers inv_pp") {
  Bag g = bag_of({"buy nike shoes", "buy nike shoes", "buy adidas shoes", "search nike shoes"});
  Bag r = g;
  Bag oov = g;
  oov.items[0] = Sentence::from_text("qq zz xx");
  oov.items[1] = Sentence::from_text("yy vv ww");
  CHECK(inv_pp(g, oov) < inv_pp(g, r));
}
