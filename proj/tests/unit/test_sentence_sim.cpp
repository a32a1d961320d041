#include <cmath>
#include <map>

#include "doctest.h"
#include "synthetic.hpp"
#include "trafficdist/errors.hpp"
#include "trafficdist/sentence_sim.hpp"

using namespace trafficdist;
using trafficdist::testing::random_bag;

namespace {

Bag bag_of(std::initializer_list<const char*> texts) {
  Bag b{"c", {}};
  for (const char* t : texts) b.items.push_back(Sentence::from_text(t));
  return b;
}

// idf-weighted n-gram cosine per order, written out with string keys
double cider_oracle(const Tokens& c, const Tokens& r, const Bag& reference) {
  std::map<std::string, const Tokens*> docs;
  for (const auto& s : reference.items) docs.emplace(s.raw, &s.tokens);
  const double n_docs = static_cast<double>(docs.size());
  auto grams = [](const Tokens& t, std::size_t n) {
    std::map<std::string, double> out;
    for (std::size_t i = 0; i + n <= t.size(); ++i) {
      std::string key;
      for (std::size_t k = 0; k < n; ++k) key += (k ? " " : "") + t[i + k];
      out[key] += 1.0;
    }
    return out;
  };
  auto idf = [&](const std::string& key, std::size_t n) {
    double df = 0.0;
    for (const auto& [raw, toks] : docs) df += grams(*toks, n).count(key) ? 1.0 : 0.0;
    return std::log((n_docs + 1.0) / (df + 1.0));
  };
  double sum = 0.0;
  for (std::size_t n = 1; n <= 4; ++n) {
    auto gc = grams(c, n), gr = grams(r, n);
    double dot = 0.0, nc = 0.0, nr = 0.0;
    for (auto& [k, v] : gc) {
      v *= idf(k, n);
      nc += v * v;
    }
    for (auto& [k, v] : gr) {
      v *= idf(k, n);
      nr += v * v;
      if (gc.count(k)) dot += v * gc[k];
    }
    if (nc > 0.0 && nr > 0.0) sum += dot / (std::sqrt(nc) * std::sqrt(nr));
  }
  return sum / 4.0;
}

}  // namespace

TEST_CASE("bleu3 of identical sentences is 1") {
  Tokens t{"search", "for", "nike", "shoes"};
  CHECK(bleu3(t, t) == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(bleu3(Tokens{"a"}, Tokens{"a"}) == doctest::Approx(1.0));
}

TEST_CASE("bleu3 of disjoint sentences is at the smoothing floor") {
  CHECK(bleu3(Tokens{"a", "b", "c"}, Tokens{"x", "y", "z"}) < 0.05);
}

TEST_CASE("bleu3 hand computation") {
  // p1 = 3/3, p2 = (0+1)/(2+1), p3 = (0+1)/(1+1), BP = exp(1 - 5/3)
  const double expected = std::cbrt(1.0 * (1.0 / 3.0) * 0.5) * std::exp(1.0 - 5.0 / 3.0);
  CHECK(bleu3(Tokens{"search", "nike", "shoes"}, Tokens{"search", "for", "nike", "running", "shoes"}) ==
        doctest::Approx(expected).epsilon(1e-12));
}

TEST_CASE("bleu3 clips repeated n-grams") {
  // "the the the" vs "the cat": p1 = 1/3
  const double p1 = 1.0 / 3.0, p2 = 1.0 / 3.0, p3 = 1.0 / 2.0;
  CHECK(bleu3(Tokens{"the", "the", "the"}, Tokens{"the", "cat"}) ==
        doctest::Approx(std::cbrt(p1 * p2 * p3)).epsilon(1e-12));
}

TEST_CASE("rouge_l examples") {
  CHECK(rouge_l(Tokens{"a", "b"}, Tokens{"a", "b"}) == 1.0);
  CHECK(rouge_l(Tokens{"search", "nike", "shoes"}, Tokens{"search", "for", "nike", "running", "shoes"}) ==
        doctest::Approx(0.75).epsilon(1e-15));
  CHECK(rouge_l(Tokens{"a", "b"}, Tokens{"c"}) == 0.0);
}

TEST_CASE("build_idf examples") {
  Bag bag = bag_of({"buy red shoes", "buy blue shoes", "buy shoes now", "buy shoes now"});
  IdfTable idf = build_idf(bag);
  CHECK(idf.document_count() == 3);  // duplicates are one document
  CHECK(idf.idf("buy") == doctest::Approx(0.0));
  CHECK(idf.idf("never seen") == doctest::Approx(std::log(4.0)));
  CHECK(idf.idf("red") == doctest::Approx(std::log(4.0 / 2.0)));
  CHECK(idf.idf("buy shoes") == doctest::Approx(std::log(4.0 / 2.0)));
  CHECK(idf.unseen_weight() == doctest::Approx(std::log(4.0)));
  CHECK_THROWS_AS(idf.set("x", -1.0), ValueError);
}

TEST_CASE("cider examples") {
  Bag ref = bag_of({"buy red running shoes", "look for nike air max", "price of iphone case"});
  IdfTable idf = build_idf(ref);
  Tokens t = tokenize("buy red running shoes");
  CHECK(cider(t, t, idf) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(cider(tokenize("totally other words here"), t, idf) == 0.0);
}

TEST_CASE("cider matches the weighted-cosine oracle") {
  Rng rng(31);
  for (int trial = 0; trial < 200; ++trial) {
    Bag ref = random_bag(rng, 5, 6, 6);
    Bag gen = random_bag(rng, 5, 6, 6);
    IdfTable idf = build_idf(ref);
    for (const auto& g : gen.items) {
      for (const auto& r : ref.items) {
        CHECK(cider(g.tokens, r.tokens, idf) == doctest::Approx(cider_oracle(g.tokens, r.tokens, ref)).epsilon(1e-9));
      }
    }
  }
}

TEST_CASE("embed_cos examples") {
  EmbeddingTable table(2);
  Sentence a = Sentence::from_text("a"), b = Sentence::from_text("b"), c = Sentence::from_text("c"),
           d = Sentence::from_text("d");
  table.insert(a.id, {1, 0});
  table.insert(b.id, {2, 0});
  table.insert(c.id, {-1, 0});
  table.insert(d.id, {0, 3});
  CHECK(embed_cos(a, b, table) == doctest::Approx(1.0));
  CHECK(embed_cos(a, c, table) == doctest::Approx(0.0));
  CHECK(embed_cos(a, d, table) == doctest::Approx(0.5));
  try {
    embed_cos(a, Sentence::from_text("zzz", "missing-id"), table);
    FAIL("expected MissingEmbedding");
  } catch (const MissingEmbedding& e) {
    CHECK(std::string(e.what()).find("missing-id") != std::string::npos);
  }
}

TEST_CASE("similarities stay in [0,1]; rouge_l and embed_cos are symmetric; self-similarity is 1") {
  Rng rng(5);
  EmbeddingTable table(6);
  for (int trial = 0; trial < 300; ++trial) {
    Bag a = random_bag(rng, 2, 7, 5), b = random_bag(rng, 2, 7, 5);
    testing::add_embeddings(table, a, 1);
    testing::add_embeddings(table, b, 1);
    IdfTable idf = build_idf(b);
    for (const auto& x : a.items) {
      CHECK(bleu3(x.tokens, x.tokens) == doctest::Approx(1.0));
      CHECK(rouge_l(x.tokens, x.tokens) == 1.0);
      for (const auto& y : b.items) {
        for (double v : {bleu3(x.tokens, y.tokens), rouge_l(x.tokens, y.tokens),
                         cider(x.tokens, y.tokens, idf), embed_cos(x, y, table)}) {
          CHECK(v >= 0.0);
          CHECK(v <= 1.0);
        }
        CHECK(rouge_l(x.tokens, y.tokens) == rouge_l(y.tokens, x.tokens));
        CHECK(embed_cos(x, y, table) == embed_cos(y, x, table));
      }
    }
  }
}

TEST_CASE("the deduplicated similarity matrix equals the per-pair one") {
  Rng rng(8);
  EmbeddingTable table(4);
  for (int trial = 0; trial < 50; ++trial) {
    Bag g = random_bag(rng, 6, 4, 4), r = random_bag(rng, 6, 4, 4);
    testing::add_embeddings(table, g, 2);
    testing::add_embeddings(table, r, 2);
    for (SimKind kind : {SimKind::bleu3, SimKind::rouge_l, SimKind::cider, SimKind::embed_cos}) {
      ScoreMatrix fast = similarity_matrix(g, r, kind, &table);
      ScoreMatrix slow = similarity_matrix(g, r, make_similarity(kind, r, &table));
      CHECK(fast.values == slow.values);
    }
  }
}
