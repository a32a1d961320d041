#include "trafficdist/corpus.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <set>
#include <tuple>

#include "json.hpp"
#include "trafficdist/errors.hpp"
#include "trafficdist/random.hpp"

namespace trafficdist {

using nlohmann::json;

std::string content_id(std::string_view raw) {
  char buf[20];
  std::snprintf(buf, sizeof(buf), "h%016llx",
                static_cast<unsigned long long>(fnv1a64(raw)));
  return buf;
}

Sentence Sentence::from_text(std::string raw, std::string id) {
  Sentence s;
  s.tokens = tokenize(raw);
  s.id = id.empty() ? content_id(raw) : std::move(id);
  s.raw = std::move(raw);
  return s;
}

Sentence Sentence::from_tokens(const Tokens& tokens) {
  return from_text(join_tokens(tokens));
}

void validate_spans(const Sentence& s) {
  const std::size_t n = s.tokens.size();
  auto check = [&](const std::optional<TokenSpan>& span, const char* name) {
    if (!span) return;
    if (span->begin >= span->end || span->end > n) {
      throw SpanError(std::string(name) + " span [" + std::to_string(span->begin) +
                      "," + std::to_string(span->end) + ") out of bounds for " +
                      std::to_string(n) + " tokens in '" + s.raw + "'");
    }
  };
  check(s.carrier_span, "carrier");
  check(s.item_span, "item");
  if (s.carrier_span && s.item_span && s.carrier_span->overlaps(*s.item_span)) {
    throw SpanError("carrier and item spans overlap in '" + s.raw + "'");
  }
}

bool canonical_less(const Sentence& a, const Sentence& b) {
  return std::tie(a.raw, a.id, a.intent, a.carrier_span, a.item_span, a.attributes,
                  a.tokens) < std::tie(b.raw, b.id, b.intent, b.carrier_span,
                                       b.item_span, b.attributes, b.tokens);
}

std::map<std::string, std::size_t> Bag::counts() const {
  std::map<std::string, std::size_t> out;
  for (const auto& s : items) ++out[s.raw];
  return out;
}

std::vector<Sentence> Bag::canonical_items() const {
  std::vector<Sentence> sorted = items;
  std::stable_sort(sorted.begin(), sorted.end(), canonical_less);
  return sorted;
}

bool Corpus::operator==(const Corpus& other) const {
  if (contexts.size() != other.contexts.size()) return false;
  for (auto a = contexts.begin(), b = other.contexts.begin(); a != contexts.end();
       ++a, ++b) {
    if (a->first != b->first || a->second.context_id != b->second.context_id) return false;
    if (a->second.canonical_items() != b->second.canonical_items()) return false;
  }
  Bag da{"", distractors};
  Bag db{"", other.distractors};
  return da.canonical_items() == db.canonical_items();
}

// ---------------------------------------------------------------------------
// Corpus JSONL

namespace {

TokenSpan parse_span(const json& value, std::size_t line) {
  if (!value.is_array() || value.size() != 2 || !value[0].is_number_integer() ||
      !value[1].is_number_integer()) {
    throw FormatError("span must be [start, end] integers", line);
  }
  auto begin = value[0].get<long long>();
  auto end = value[1].get<long long>();
  if (begin < 0 || end < 0) throw SpanError("negative span index on line " + std::to_string(line));
  return {static_cast<std::size_t>(begin), static_cast<std::size_t>(end)};
}

const json* optional_field(const json& obj, const char* key) {
  auto it = obj.find(key);
  if (it == obj.end() || it->is_null()) return nullptr;
  return &*it;
}

std::string required_string(const json& obj, const char* key, std::size_t line) {
  const json* v = optional_field(obj, key);
  if (!v) throw FormatError(std::string("missing field '") + key + "'", line);
  if (!v->is_string()) throw FormatError(std::string("field '") + key + "' must be a string", line);
  return v->get<std::string>();
}

Sentence parse_sentence(const json& obj, std::size_t line) {
  std::string text = required_string(obj, "text", line);
  std::string id;
  if (const json* v = optional_field(obj, "id")) {
    if (!v->is_string()) throw FormatError("field 'id' must be a string", line);
    id = v->get<std::string>();
  }
  Sentence s;
  try {
    s = Sentence::from_text(std::move(text), std::move(id));
  } catch (const EmptyText&) {
    throw FormatError("empty text", line);
  }
  if (const json* v = optional_field(obj, "intent")) {
    if (!v->is_string()) throw FormatError("field 'intent' must be a string", line);
    s.intent = v->get<std::string>();
  }
  if (const json* spans = optional_field(obj, "spans")) {
    if (!spans->is_object()) throw FormatError("field 'spans' must be an object", line);
    if (const json* c = optional_field(*spans, "carrier")) s.carrier_span = parse_span(*c, line);
    if (const json* i = optional_field(*spans, "item")) s.item_span = parse_span(*i, line);
  }
  if (const json* attrs = optional_field(obj, "attributes")) {
    if (!attrs->is_array()) throw FormatError("field 'attributes' must be a list", line);
    for (const auto& a : *attrs) {
      if (!a.is_string()) throw FormatError("attributes must be strings", line);
      s.attributes.push_back(a.get<std::string>());
    }
  }
  try {
    validate_spans(s);
  } catch (const SpanError& e) {
    throw SpanError("line " + std::to_string(line) + ": " + e.what());
  }
  return s;
}

}  // namespace

Corpus parse_corpus(std::istream& in) {
  Corpus corpus;
  std::string text;
  std::size_t line = 0;
  while (std::getline(in, text)) {
    ++line;
    if (text.find_first_not_of(" \t\r") == std::string::npos) continue;
    json obj;
    try {
      obj = json::parse(text);
    } catch (const json::parse_error& e) {
      throw FormatError(std::string("invalid JSON (") + e.what() + ")", line);
    }
    if (!obj.is_object()) throw FormatError("expected a JSON object", line);

    long long count = 1;
    if (const json* v = optional_field(obj, "count")) {
      if (!v->is_number_integer()) throw FormatError("field 'count' must be an integer", line);
      count = v->get<long long>();
      if (count < 1) throw FormatError("count must be >= 1", line);
    }
    Sentence s = parse_sentence(obj, line);

    bool distractor = false;
    if (const json* v = optional_field(obj, "distractor")) {
      if (!v->is_boolean()) throw FormatError("field 'distractor' must be a boolean", line);
      distractor = v->get<bool>();
    }
    if (distractor) {
      for (long long i = 0; i < count; ++i) corpus.distractors.push_back(s);
      continue;
    }
    std::string context = required_string(obj, "context_id", line);
    Bag& bag = corpus.contexts[context];
    bag.context_id = context;
    for (long long i = 0; i < count; ++i) bag.items.push_back(s);
  }

  std::set<std::string> pool;
  // compared after normalization so case or spacing variants count as overlap
  for (const auto& s : corpus.distractors) pool.insert(join_tokens(s.tokens));
  for (const auto& [id, bag] : corpus.contexts) {
    for (const auto& s : bag.items) {
      if (pool.count(join_tokens(s.tokens))) {
        throw FormatError("distractor '" + s.raw + "' also occurs in context " + id);
      }
    }
  }
  return corpus;
}

Corpus load_corpus(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw UsageError("cannot open corpus " + path.string());
  return parse_corpus(in);
}

namespace {

json sentence_json(const Sentence& s) {
  json obj;
  obj["text"] = s.raw;
  if (s.id != content_id(s.raw)) obj["id"] = s.id;
  if (s.intent) obj["intent"] = *s.intent;
  if (s.carrier_span || s.item_span) {
    json spans = json::object();
    if (s.carrier_span) spans["carrier"] = {s.carrier_span->begin, s.carrier_span->end};
    if (s.item_span) spans["item"] = {s.item_span->begin, s.item_span->end};
    obj["spans"] = spans;
  }
  if (!s.attributes.empty()) obj["attributes"] = s.attributes;
  return obj;
}

void write_run(std::ostream& out, json obj, std::size_t count) {
  if (count > 1) obj["count"] = count;
  out << obj.dump() << '\n';
}

template <typename Decorate>
void write_items(std::ostream& out, const std::vector<Sentence>& items, Decorate decorate) {
  for (std::size_t i = 0; i < items.size();) {
    std::size_t j = i + 1;
    while (j < items.size() && items[j] == items[i]) ++j;
    json obj = sentence_json(items[i]);
    decorate(obj);
    write_run(out, std::move(obj), j - i);
    i = j;
  }
}

}  // namespace

void write_corpus(const Corpus& corpus, std::ostream& out) {
  for (const auto& [id, bag] : corpus.contexts) {
    write_items(out, bag.canonical_items(), [&](json& obj) { obj["context_id"] = id; });
  }
  Bag pool{"", corpus.distractors};
  write_items(out, pool.canonical_items(), [](json& obj) { obj["distractor"] = true; });
}

void save_corpus(const Corpus& corpus, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw UsageError("cannot write " + path.string());
  write_corpus(corpus, out);
}

// ---------------------------------------------------------------------------
// Embeddings

EmbeddingTable::EmbeddingTable(std::size_t dim) : dim_(dim) {
  if (dim == 0) throw DimensionError("embedding dimension must be positive");
}

const std::vector<double>& EmbeddingTable::at(const std::string& id) const {
  auto it = vectors_.find(id);
  if (it == vectors_.end()) throw MissingEmbedding("no embedding for sentence id '" + id + "'");
  return it->second;
}

bool EmbeddingTable::insert(const std::string& id, std::vector<double> vec) {
  if (vec.empty()) throw DimensionError("empty vector for id '" + id + "'");
  if (dim_ == 0) dim_ = vec.size();
  if (vec.size() != dim_) {
    throw DimensionError("vector for id '" + id + "' has length " +
                         std::to_string(vec.size()) + ", expected " + std::to_string(dim_));
  }
  for (double v : vec) {
    if (!std::isfinite(v)) throw ValueError("non-finite value in vector for id '" + id + "'");
  }
  auto [it, inserted] = vectors_.insert_or_assign(id, std::move(vec));
  return inserted;
}

namespace {

// JSON has no NaN/Infinity literals, but Python writers emit them. Quote them
// (outside string literals) so they reach the finiteness check as values.
std::string quote_nonfinite(const std::string& line) {
  std::string out;
  out.reserve(line.size());
  bool in_string = false;
  for (std::size_t i = 0; i < line.size();) {
    char c = line[i];
    if (in_string) {
      out.push_back(c);
      if (c == '\\' && i + 1 < line.size()) {
        out.push_back(line[i + 1]);
        i += 2;
        continue;
      }
      if (c == '"') in_string = false;
      ++i;
      continue;
    }
    if (c == '"') in_string = true;
    bool replaced = false;
    for (std::string_view word : {"-Infinity", "Infinity", "NaN"}) {
      if (line.compare(i, word.size(), word) == 0) {
        out += '"';
        out += word;
        out += '"';
        i += word.size();
        replaced = true;
        break;
      }
    }
    if (!replaced) out.push_back(line[i++]);
  }
  return out;
}

}  // namespace

EmbeddingLoad parse_embeddings(std::istream& in) {
  EmbeddingLoad result;
  std::string text;
  std::size_t line = 0;
  while (std::getline(in, text)) {
    ++line;
    if (text.find_first_not_of(" \t\r") == std::string::npos) continue;
    json obj;
    try {
      obj = json::parse(quote_nonfinite(text));
    } catch (const json::parse_error& e) {
      throw FormatError(std::string("invalid JSON (") + e.what() + ")", line);
    }
    if (!obj.is_object()) throw FormatError("expected a JSON object", line);
    if (!obj.contains("id") && obj.contains("model")) continue;
    std::string id = required_string(obj, "id", line);
    const json* vec = optional_field(obj, "vec");
    if (!vec || !vec->is_array()) throw FormatError("field 'vec' must be a list", line);
    std::vector<double> values;
    values.reserve(vec->size());
    for (const auto& v : *vec) {
      if (v.is_number()) {
        values.push_back(v.get<double>());
      } else if (v.is_string()) {
        const auto& s = v.get_ref<const std::string&>();
        if (s == "NaN") {
          values.push_back(std::nan(""));
        } else if (s == "Infinity" || s == "-Infinity") {
          values.push_back(s[0] == '-' ? -INFINITY : INFINITY);
        } else {
          throw FormatError("non-numeric vector entry", line);
        }
      } else if (v.is_null()) {
        values.push_back(std::nan(""));
      } else {
        throw FormatError("non-numeric vector entry", line);
      }
    }
    try {
      if (!result.table.insert(id, std::move(values))) ++result.duplicate_ids;
    } catch (const DimensionError& e) {
      throw DimensionError("line " + std::to_string(line) + ": " + e.what());
    } catch (const ValueError& e) {
      throw ValueError("line " + std::to_string(line) + ": " + e.what());
    }
  }
  if (result.table.size() == 0) throw FormatError("embedding file has no vectors");
  return result;
}

EmbeddingLoad load_embeddings(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw UsageError("cannot open embeddings " + path.string());
  return parse_embeddings(in);
}

// ---------------------------------------------------------------------------
// Resampling

Bag downsample_bag(const Bag& bag, std::size_t cap, std::uint64_t seed) {
  if (cap == 0) throw UsageError("cap must be >= 1");
  if (bag.size() <= cap) return bag;
  std::vector<Sentence> pool = bag.canonical_items();
  Rng rng(seed);
  // Partial Fisher-Yates: the first cap slots are the sample.
  for (std::size_t i = 0; i < cap; ++i) {
    std::size_t j = i + rng.index(pool.size() - i);
    std::swap(pool[i], pool[j]);
  }
  pool.resize(cap);
  std::stable_sort(pool.begin(), pool.end(), canonical_less);
  return Bag{bag.context_id, std::move(pool)};
}

std::pair<Bag, Bag> equalize_sizes(const Bag& g, const Bag& r, std::uint64_t seed) {
  if (g.empty() || r.empty()) throw UsageError("equalize_sizes needs non-empty bags");
  if (g.size() == r.size()) return {g, r};
  const bool grow_g = g.size() < r.size();
  const Bag& small = grow_g ? g : r;
  const std::size_t target = grow_g ? r.size() : g.size();
  std::vector<Sentence> source = small.canonical_items();
  Bag grown{small.context_id, source};
  Rng rng(seed);
  while (grown.size() < target) grown.items.push_back(source[rng.index(source.size())]);
  if (grow_g) return {std::move(grown), r};
  return {g, std::move(grown)};
}

}  // namespace trafficdist
