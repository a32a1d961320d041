#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace trafficdist {

using Tokens = std::vector<std::string>;

// Lowercased, NFKC-normalized tokens; whitespace separates tokens and every
// punctuation code point becomes a token of its own. Throws EmptyText when
// nothing but whitespace is given.
Tokens tokenize(std::string_view raw);

std::string join_tokens(const Tokens& tokens);

// Half-open token range [begin, end).
struct TokenSpan {
  std::size_t begin = 0;
  std::size_t end = 0;

  std::size_t size() const { return end - begin; }
  bool overlaps(const TokenSpan& other) const {
    return begin < other.end && other.begin < end;
  }
  auto operator<=>(const TokenSpan&) const = default;
};

// Stable id derived from the raw text ("h" + 16 hex digits of FNV-1a).
std::string content_id(std::string_view raw);

struct Sentence {
  std::string id;
  std::string raw;
  Tokens tokens;
  std::optional<std::string> intent;
  std::optional<TokenSpan> carrier_span;
  std::optional<TokenSpan> item_span;
  std::vector<std::string> attributes;

  // Tokenizes raw; an empty id becomes content_id(raw).
  static Sentence from_text(std::string raw, std::string id = {});

  // Builds a sentence whose raw text is the space-joined token list, keeping
  // the invariant that re-tokenizing raw reproduces tokens.
  static Sentence from_tokens(const Tokens& tokens);

  bool operator==(const Sentence&) const = default;
};

// Throws SpanError unless both spans are non-empty, in bounds and disjoint.
void validate_spans(const Sentence& sentence);

// Total order used wherever a result must not depend on input order.
bool canonical_less(const Sentence& a, const Sentence& b);

// A multiset of sentence occurrences for one context.
struct Bag {
  std::string context_id;
  std::vector<Sentence> items;

  std::size_t size() const { return items.size(); }
  bool empty() const { return items.empty(); }

  // Occurrence count per raw text.
  std::map<std::string, std::size_t> counts() const;

  // Items sorted by canonical_less.
  std::vector<Sentence> canonical_items() const;

  // Multiset equality on raw text; order and context id are ignored.
  bool operator==(const Bag& other) const { return counts() == other.counts(); }
};

struct Corpus {
  std::map<std::string, Bag> contexts;
  std::vector<Sentence> distractors;

  bool operator==(const Corpus& other) const;
};

// JSONL, one object per line:
//   {"context_id", "text", "count"?, "intent"?, "spans"?, "attributes"?, "id"?}
// Lines with "distractor": true go to the distractor pool and need no
// context_id. Throws FormatError (with line number) or SpanError.
Corpus parse_corpus(std::istream& in);
Corpus load_corpus(const std::filesystem::path& path);

// Consecutive identical occurrences collapse into one line with a count.
void write_corpus(const Corpus& corpus, std::ostream& out);
void save_corpus(const Corpus& corpus, const std::filesystem::path& path);

class EmbeddingTable {
 public:
  EmbeddingTable() = default;
  explicit EmbeddingTable(std::size_t dim);

  std::size_t dim() const { return dim_; }
  std::size_t size() const { return vectors_.size(); }
  bool contains(const std::string& id) const { return vectors_.count(id) > 0; }

  // Throws MissingEmbedding naming the id.
  const std::vector<double>& at(const std::string& id) const;

  // Throws DimensionError on a length mismatch and ValueError on non-finite
  // values. Returns false when an existing entry was overwritten.
  bool insert(const std::string& id, std::vector<double> vec);

  const std::map<std::string, std::vector<double>>& vectors() const {
    return vectors_;
  }

 private:
  std::size_t dim_ = 0;
  std::map<std::string, std::vector<double>> vectors_;
};

struct EmbeddingLoad {
  EmbeddingTable table;
  std::size_t duplicate_ids = 0;
};

// JSONL of {"id": str, "vec": [float...]}; a line without "id" carrying a
// "model" key is treated as a provenance header and skipped. Duplicate ids:
// the last line wins and is counted.
EmbeddingLoad parse_embeddings(std::istream& in);
EmbeddingLoad load_embeddings(const std::filesystem::path& path);

// Uniform sample of cap occurrences without replacement; bags within the cap
// come back unchanged.
Bag downsample_bag(const Bag& bag, std::size_t cap, std::uint64_t seed);

// The smaller bag is upsampled with replacement to the size of the larger one.
std::pair<Bag, Bag> equalize_sizes(const Bag& g, const Bag& r, std::uint64_t seed);

}  // namespace trafficdist
