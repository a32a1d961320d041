#include "trafficdist/sentence_sim.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <memory>
#include <set>
#include <stdexcept>

#include "trafficdist/errors.hpp"
#include "trafficdist/random.hpp"

namespace trafficdist {

std::string_view to_string(SimKind kind) {
  switch (kind) {
    case SimKind::bleu3: return "bleu3";
    case SimKind::rouge_l: return "rouge_l";
    case SimKind::cider: return "cider";
    case SimKind::embed_cos: return "sbert";
  }
  return "?";
}

std::uint64_t ngram_hash(std::string_view key) { return fnv1a64(key); }

SentenceProfile make_profile(const Tokens& tokens) {
  SentenceProfile p;
  p.tokens = tokens;
  for (std::size_t n = 1; n <= kMaxNGramOrder; ++n) {
    std::map<std::uint64_t, std::uint32_t> counts;
    for (std::size_t i = 0; i + n <= tokens.size(); ++i) {
      std::string key = tokens[i];
      for (std::size_t k = 1; k < n; ++k) {
        key.push_back(' ');
        key += tokens[i + k];
      }
      ++counts[ngram_hash(key)];
    }
    p.ngrams[n - 1].assign(counts.begin(), counts.end());
  }
  return p;
}

// ---------------------------------------------------------------------------

IdfTable::IdfTable(std::size_t document_count, std::size_t max_n)
    : documents_(document_count), max_n_(max_n) {}

double IdfTable::unseen_weight() const {
  return std::log(static_cast<double>(documents_) + 1.0);
}

double IdfTable::idf_hash(std::uint64_t hash) const {
  auto it = weights_.find(hash);
  return it == weights_.end() ? unseen_weight() : it->second;
}

void IdfTable::set(std::string_view key, double weight) { set_hash(ngram_hash(key), weight); }

void IdfTable::set_hash(std::uint64_t hash, double weight) {
  if (!(weight >= 0.0)) throw ValueError("idf weights must be >= 0");
  weights_[hash] = weight;
}

IdfTable build_idf(const std::vector<Tokens>& documents, std::size_t max_n) {
  if (documents.empty()) throw UsageError("idf needs at least one document");
  if (max_n == 0 || max_n > kMaxNGramOrder) throw UsageError("idf order must be in 1..4");
  std::unordered_map<std::uint64_t, std::size_t> df;
  for (const auto& doc : documents) {
    SentenceProfile p = make_profile(doc);
    for (std::size_t n = 0; n < max_n; ++n) {
      for (const auto& [h, c] : p.ngrams[n]) ++df[h];
    }
  }
  IdfTable table(documents.size(), max_n);
  const double numerator = static_cast<double>(documents.size()) + 1.0;
  for (const auto& [h, d] : df) {
    table.set_hash(h, std::log(numerator / (static_cast<double>(d) + 1.0)));
  }
  return table;
}

IdfTable build_idf(const Bag& bag, std::size_t max_n) {
  std::map<std::string, const Tokens*> distinct;
  for (const auto& s : bag.items) distinct.emplace(s.raw, &s.tokens);
  std::vector<Tokens> docs;
  docs.reserve(distinct.size());
  for (const auto& [raw, tokens] : distinct) docs.push_back(*tokens);
  return build_idf(docs, max_n);
}

// ---------------------------------------------------------------------------

namespace {

// Sum over shared n-grams of min(count_c, count_r).
std::size_t clipped_matches(const NGramCounts& c, const NGramCounts& r) {
  std::size_t matches = 0;
  auto a = c.begin();
  auto b = r.begin();
  while (a != c.end() && b != r.end()) {
    if (a->first < b->first) {
      ++a;
    } else if (b->first < a->first) {
      ++b;
    } else {
      matches += std::min(a->second, b->second);
      ++a;
      ++b;
    }
  }
  return matches;
}

std::size_t total(const NGramCounts& c) {
  std::size_t t = 0;
  for (const auto& [h, n] : c) t += n;
  return t;
}

}  // namespace

double bleu3(const SentenceProfile& candidate, const SentenceProfile& reference) {
  const double c_len = static_cast<double>(candidate.tokens.size());
  const double r_len = static_cast<double>(reference.tokens.size());
  if (c_len == 0.0 || r_len == 0.0) return 0.0;
  double log_sum = 0.0;
  for (std::size_t n = 1; n <= 3; ++n) {
    double matches = static_cast<double>(clipped_matches(candidate.ngrams[n - 1], reference.ngrams[n - 1]));
    double count = static_cast<double>(total(candidate.ngrams[n - 1]));
    if (n == 1) {
      if (matches == 0.0) return 0.0;
    } else {
      matches += 1.0;
      count += 1.0;
    }
    log_sum += std::log(matches / count);
  }
  const double bp = c_len < r_len ? std::exp(1.0 - r_len / c_len) : 1.0;
  return std::clamp(bp * std::exp(log_sum / 3.0), 0.0, 1.0);
}

double bleu3(const Tokens& candidate, const Tokens& reference) {
  return bleu3(make_profile(candidate), make_profile(reference));
}

double rouge_l(const Tokens& candidate, const Tokens& reference) {
  if (candidate.empty() || reference.empty()) return 0.0;
  std::vector<std::size_t> prev(reference.size() + 1, 0);
  std::vector<std::size_t> cur(reference.size() + 1, 0);
  for (const auto& c : candidate) {
    for (std::size_t j = 1; j <= reference.size(); ++j) {
      cur[j] = c == reference[j - 1] ? prev[j - 1] + 1 : std::max(prev[j], cur[j - 1]);
    }
    std::swap(prev, cur);
  }
  const double lcs = static_cast<double>(prev.back());
  if (lcs == 0.0) return 0.0;
  const double p = lcs / static_cast<double>(candidate.size());
  const double r = lcs / static_cast<double>(reference.size());
  return 2.0 * p * r / (p + r);
}

double cider(const SentenceProfile& candidate, const SentenceProfile& reference,
             const IdfTable& idf) {
  double sum = 0.0;
  for (std::size_t n = 0; n < kMaxNGramOrder; ++n) {
    const auto& c = candidate.ngrams[n];
    const auto& r = reference.ngrams[n];
    double cc = 0.0, rr = 0.0, cr = 0.0;
    for (const auto& [h, k] : c) {
      double w = k * idf.idf_hash(h);
      cc += w * w;
    }
    for (const auto& [h, k] : r) {
      double w = k * idf.idf_hash(h);
      rr += w * w;
    }
    auto a = c.begin();
    auto b = r.begin();
    while (a != c.end() && b != r.end()) {
      if (a->first < b->first) {
        ++a;
      } else if (b->first < a->first) {
        ++b;
      } else {
        double w = idf.idf_hash(a->first);
        cr += (a->second * w) * (b->second * w);
        ++a;
        ++b;
      }
    }
    if (cc > 0.0 && rr > 0.0) sum += cr / (std::sqrt(cc) * std::sqrt(rr));
  }
  return std::clamp(sum / static_cast<double>(kMaxNGramOrder), 0.0, 1.0);
}

double cider(const Tokens& candidate, const Tokens& reference, const IdfTable& idf) {
  return cider(make_profile(candidate), make_profile(reference), idf);
}

double embed_cos(const Sentence& a, const Sentence& b, const EmbeddingTable& table) {
  const auto& va = table.at(a.id);
  const auto& vb = table.at(b.id);
  double dot = 0.0, na = 0.0, nb = 0.0;
  for (std::size_t i = 0; i < va.size(); ++i) {
    dot += va[i] * vb[i];
    na += va[i] * va[i];
    nb += vb[i] * vb[i];
  }
  double cos = (na > 0.0 && nb > 0.0) ? dot / (std::sqrt(na) * std::sqrt(nb)) : 0.0;
  return std::clamp((std::clamp(cos, -1.0, 1.0) + 1.0) / 2.0, 0.0, 1.0);
}

SimilarityFn make_similarity(SimKind kind, const Bag& reference,
                             const EmbeddingTable* embeddings) {
  switch (kind) {
    case SimKind::bleu3:
      return [](const Sentence& g, const Sentence& r) { return bleu3(g.tokens, r.tokens); };
    case SimKind::rouge_l:
      return [](const Sentence& g, const Sentence& r) { return rouge_l(g.tokens, r.tokens); };
    case SimKind::cider: {
      auto idf = std::make_shared<IdfTable>(build_idf(reference));
      return [idf](const Sentence& g, const Sentence& r) { return cider(g.tokens, r.tokens, *idf); };
    }
    case SimKind::embed_cos:
      if (!embeddings) throw UsageError("sbert similarity needs an embedding table");
      return [embeddings](const Sentence& g, const Sentence& r) {
        return embed_cos(g, r, *embeddings);
      };
  }
  throw UsageError("unknown similarity kind");
}

ScoreMatrix similarity_matrix(const Bag& g, const Bag& r, const SimilarityFn& sim) {
  ScoreMatrix m{g.size(), r.size(), std::vector<double>(g.size() * r.size())};
  for (std::size_t i = 0; i < g.size(); ++i) {
    for (std::size_t j = 0; j < r.size(); ++j) m(i, j) = sim(g.items[i], r.items[j]);
  }
  return m;
}

namespace {

// Maps each occurrence to a slot holding its distinct representative.
struct Distinct {
  std::vector<std::size_t> slot;
  std::vector<const Sentence*> reps;
};

Distinct distinct_items(const Bag& bag, bool by_id) {
  Distinct d;
  std::map<std::string_view, std::size_t> seen;
  for (const auto& s : bag.items) {
    std::string_view key = by_id ? std::string_view(s.id) : std::string_view(s.raw);
    auto [it, inserted] = seen.emplace(key, d.reps.size());
    if (inserted) d.reps.push_back(&s);
    d.slot.push_back(it->second);
  }
  return d;
}

}  // namespace

ScoreMatrix similarity_matrix(const Bag& g, const Bag& r, SimKind kind,
                              const EmbeddingTable* embeddings) {
  const bool by_id = kind == SimKind::embed_cos;
  if (by_id && !embeddings) throw UsageError("sbert similarity needs an embedding table");
  Distinct dg = distinct_items(g, by_id);
  Distinct dr = distinct_items(r, by_id);

  std::vector<SentenceProfile> pg, pr;
  std::unique_ptr<IdfTable> idf;
  if (kind == SimKind::bleu3 || kind == SimKind::cider) {
    for (const Sentence* s : dg.reps) pg.push_back(make_profile(s->tokens));
    for (const Sentence* s : dr.reps) pr.push_back(make_profile(s->tokens));
  }
  if (kind == SimKind::cider) idf = std::make_unique<IdfTable>(build_idf(r));

  std::vector<double> small(dg.reps.size() * dr.reps.size());
  for (std::size_t a = 0; a < dg.reps.size(); ++a) {
    for (std::size_t b = 0; b < dr.reps.size(); ++b) {
      double v = 0.0;
      switch (kind) {
        case SimKind::bleu3: v = bleu3(pg[a], pr[b]); break;
        case SimKind::rouge_l: v = rouge_l(dg.reps[a]->tokens, dr.reps[b]->tokens); break;
        case SimKind::cider: v = cider(pg[a], pr[b], *idf); break;
        case SimKind::embed_cos: v = embed_cos(*dg.reps[a], *dr.reps[b], *embeddings); break;
      }
      small[a * dr.reps.size() + b] = v;
    }
  }
  ScoreMatrix m{g.size(), r.size(), std::vector<double>(g.size() * r.size())};
  for (std::size_t i = 0; i < g.size(); ++i) {
    for (std::size_t j = 0; j < r.size(); ++j) {
      m(i, j) = small[dg.slot[i] * dr.reps.size() + dr.slot[j]];
    }
  }
  return m;
}

}  // namespace trafficdist
