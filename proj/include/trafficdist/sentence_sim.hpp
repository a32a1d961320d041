#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include "trafficdist/corpus.hpp"

namespace trafficdist {

enum class SimKind { bleu3, rouge_l, cider, embed_cos };

std::string_view to_string(SimKind kind);

// Sentence-to-sentence similarity in [0, 1]. Directional kinds take the
// generated sentence as the candidate: sim(g, r).
using SimilarityFn = std::function<double(const Sentence& g, const Sentence& r)>;

constexpr std::size_t kMaxNGramOrder = 4;

// N-grams of one order as (hash of space-joined key, count), sorted by hash.
using NGramCounts = std::vector<std::pair<std::uint64_t, std::uint32_t>>;

std::uint64_t ngram_hash(std::string_view space_joined_key);

// Per-sentence n-gram tables for orders 1..kMaxNGramOrder.
struct SentenceProfile {
  Tokens tokens;
  std::array<NGramCounts, kMaxNGramOrder> ngrams;
};

SentenceProfile make_profile(const Tokens& tokens);

class IdfTable {
 public:
  IdfTable(std::size_t document_count, std::size_t max_n);

  std::size_t document_count() const { return documents_; }
  std::size_t max_n() const { return max_n_; }

  // Weight for an n-gram; unseen n-grams get log(N + 1).
  double idf(std::string_view space_joined_key) const { return idf_hash(ngram_hash(space_joined_key)); }
  double idf_hash(std::uint64_t hash) const;
  double unseen_weight() const;

  void set(std::string_view space_joined_key, double weight);
  void set_hash(std::uint64_t hash, double weight);

 private:
  std::size_t documents_;
  std::size_t max_n_;
  std::unordered_map<std::uint64_t, double> weights_;
};

// One document per distinct raw text; idf(w) = log((N + 1) / (df(w) + 1)).
IdfTable build_idf(const Bag& bag, std::size_t max_n = kMaxNGramOrder);
IdfTable build_idf(const std::vector<Tokens>& documents, std::size_t max_n);

// Geometric mean of clipped 1..3-gram precisions (add-one on orders 2 and 3)
// times the brevity penalty.
double bleu3(const SentenceProfile& candidate, const SentenceProfile& reference);
double bleu3(const Tokens& candidate, const Tokens& reference);

// LCS-based F1 (beta = 1).
double rouge_l(const Tokens& candidate, const Tokens& reference);

// Mean over n = 1..4 of the cosine between idf-weighted n-gram count vectors.
// An order where either vector is zero contributes 0.
double cider(const SentenceProfile& candidate, const SentenceProfile& reference,
             const IdfTable& idf);
double cider(const Tokens& candidate, const Tokens& reference, const IdfTable& idf);

// (cos + 1) / 2 of the two sentences' embeddings. Throws MissingEmbedding.
double embed_cos(const Sentence& a, const Sentence& b, const EmbeddingTable& table);

// Builds the similarity used against a given reference bag. The CIDEr idf is
// taken from the reference; embed_cos requires a table.
SimilarityFn make_similarity(SimKind kind, const Bag& reference,
                             const EmbeddingTable* embeddings = nullptr);

// Row-major |G| x |R| matrix of similarities.
struct ScoreMatrix {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> values;

  double operator()(std::size_t i, std::size_t j) const { return values[i * cols + j]; }
  double& operator()(std::size_t i, std::size_t j) { return values[i * cols + j]; }
};

ScoreMatrix similarity_matrix(const Bag& g, const Bag& r, const SimilarityFn& sim);

// Same values as similarity_matrix(g, r, make_similarity(kind, r, embeddings)),
// evaluated once per distinct text pair.
ScoreMatrix similarity_matrix(const Bag& g, const Bag& r, SimKind kind,
                              const EmbeddingTable* embeddings = nullptr);

}  // namespace trafficdist
