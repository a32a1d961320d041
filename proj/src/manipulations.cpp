#include "trafficdist/manipulations.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include "json.hpp"
#include "trafficdist/errors.hpp"

namespace trafficdist {

using nlohmann::json;

namespace {

constexpr std::pair<ManipulationKind, std::string_view> kKindNames[] = {
    {ManipulationKind::tdm_peaked, "tdm_peaked"}, {ManipulationKind::tdm_flat, "tdm_flat"},
    {ManipulationKind::nti, "nti"},               {ManipulationKind::eda, "eda"},
    {ManipulationKind::cps, "cps"},               {ManipulationKind::ism_broader, "ism_broader"},
    {ManipulationKind::ism_specific, "ism_specific"},
};

void check_strength(Strength s) {
  if (s.levels < 1 || s.level < 1 || s.level > s.levels) {
    throw UsageError("strength must be in 1.." + std::to_string(s.levels) + ", got " +
                     std::to_string(s.level));
  }
}

// Occurrence order the manipulations are defined on.
std::vector<Sentence> canonical(const Bag& bag) {
  if (bag.empty()) throw UsageError("cannot manipulate an empty bag");
  return bag.canonical_items();
}

Sentence carry_labels(Sentence edited, const Sentence& source) {
  edited.intent = source.intent;
  edited.attributes = source.attributes;
  return edited;
}

std::vector<std::string> bag_vocabulary(const std::vector<Sentence>& items) {
  std::set<std::string> vocab;
  for (const auto& s : items) vocab.insert(s.tokens.begin(), s.tokens.end());
  return {vocab.begin(), vocab.end()};
}

// Returns begin index of needle inside [span.begin, span.end), or npos.
std::size_t find_in_span(const Tokens& tokens, TokenSpan span, const Tokens& needle) {
  if (needle.empty() || needle.size() > span.size()) return std::string::npos;
  for (std::size_t i = span.begin; i + needle.size() <= span.end; ++i) {
    if (std::equal(needle.begin(), needle.end(), tokens.begin() + static_cast<std::ptrdiff_t>(i))) {
      return i;
    }
  }
  return std::string::npos;
}

// Rebuilds a sentence from edited tokens with updated spans.
Sentence rebuild(const Sentence& source, const Tokens& tokens, std::optional<TokenSpan> carrier,
                 std::optional<TokenSpan> item) {
  Sentence out = Sentence::from_tokens(tokens);
  out.intent = source.intent;
  out.attributes = source.attributes;
  out.carrier_span = carrier;
  out.item_span = item;
  validate_spans(out);
  return out;
}

// Shift a span lying at or after `at` by delta tokens.
std::optional<TokenSpan> shifted(std::optional<TokenSpan> span, std::size_t at, long delta) {
  if (!span || span->begin < at) return span;
  return TokenSpan{static_cast<std::size_t>(static_cast<long>(span->begin) + delta),
                   static_cast<std::size_t>(static_cast<long>(span->end) + delta)};
}

}  // namespace

std::string_view to_string(ManipulationKind kind) {
  for (const auto& [k, name] : kKindNames) {
    if (k == kind) return name;
  }
  return "?";
}

ManipulationKind parse_manipulation_kind(std::string_view name) {
  for (const auto& [k, n] : kKindNames) {
    if (n == name) return k;
  }
  std::string known;
  for (const auto& [k, n] : kKindNames) known += (known.empty() ? "" : ", ") + std::string(n);
  throw UsageError("unknown manipulation '" + std::string(name) + "' (known: " + known + ")");
}

std::size_t modified_count(std::size_t bag_size, Strength strength) {
  check_strength(strength);
  const double exact = strength.fraction() * static_cast<double>(bag_size) * kMaxModifiedFraction;
  // Guard against 0.1 * 20 * 0.5 = 1.0000000000000002 style round-up.
  return static_cast<std::size_t>(std::ceil(exact - 1e-9));
}

// ---------------------------------------------------------------------------
// TDM

namespace {

struct TextGroup {
  std::string raw;
  std::vector<Sentence> occurrences;  // canonical order
  std::size_t original = 0;
  std::size_t current = 0;
};

std::vector<TextGroup> group_texts(const std::vector<Sentence>& items) {
  std::vector<TextGroup> groups;
  for (const auto& s : items) {
    if (groups.empty() || groups.back().raw != s.raw) groups.push_back({s.raw, {}, 0, 0});
    groups.back().occurrences.push_back(s);
  }
  for (auto& g : groups) g.original = g.current = g.occurrences.size();
  return groups;
}

Bag regroup(const std::string& context_id, const std::vector<TextGroup>& groups) {
  Bag out{context_id, {}};
  for (const auto& g : groups) {
    for (std::size_t i = 0; i < g.current; ++i) {
      out.items.push_back(g.occurrences[std::min(i, g.occurrences.size() - 1)]);
    }
  }
  std::stable_sort(out.items.begin(), out.items.end(), canonical_less);
  return out;
}

}  // namespace

Bag tdm(const Bag& bag, TdmDirection direction, Strength strength, std::uint64_t /*seed*/) {
  check_strength(strength);
  std::vector<TextGroup> groups = group_texts(canonical(bag));
  if (groups.size() < 2) {
    throw NotApplicable("TDM needs at least 2 distinct texts in context " + bag.context_id);
  }

  if (direction == TdmDirection::peaked) {
    std::size_t head = 0;
    for (std::size_t i = 1; i < groups.size(); ++i) {
      if (groups[i].original > groups[head].original) head = i;
    }
    std::vector<std::size_t> tail;
    std::size_t tail_total = 0;
    for (std::size_t i = 0; i < groups.size(); ++i) {
      if (i == head) continue;
      tail.push_back(i);
      tail_total += groups[i].original;
    }
    std::stable_sort(tail.begin(), tail.end(), [&](std::size_t a, std::size_t b) {
      return groups[a].original < groups[b].original;
    });
    std::size_t to_move = static_cast<std::size_t>(
        std::ceil(strength.fraction() * static_cast<double>(tail_total) - 1e-9));
    for (std::size_t i : tail) {
      std::size_t take = std::min(to_move, groups[i].current);
      groups[i].current -= take;
      groups[head].current += take;
      to_move -= take;
      if (to_move == 0) break;
    }
    return regroup(bag.context_id, groups);
  }

  // Flat targets: equal shares, the remainder going to the most frequent texts.
  const std::size_t total = bag.size();
  const std::size_t base = total / groups.size();
  std::size_t extra = total % groups.size();
  std::vector<std::size_t> by_count(groups.size());
  for (std::size_t i = 0; i < groups.size(); ++i) by_count[i] = i;
  std::stable_sort(by_count.begin(), by_count.end(), [&](std::size_t a, std::size_t b) {
    return groups[a].original > groups[b].original;
  });
  std::vector<std::size_t> target(groups.size(), base);
  for (std::size_t k = 0; k < extra; ++k) ++target[by_count[k]];

  std::size_t moves = 0;
  for (std::size_t i = 0; i < groups.size(); ++i) {
    if (groups[i].original > target[i]) moves += groups[i].original - target[i];
  }
  if (moves == 0) {
    throw NotApplicable("TDM flat: distribution of context " + bag.context_id + " is already flat");
  }
  std::size_t steps = static_cast<std::size_t>(
      std::ceil(strength.fraction() * static_cast<double>(moves) - 1e-9));
  for (std::size_t step = 0; step < steps; ++step) {
    std::size_t donor = groups.size(), receiver = groups.size();
    for (std::size_t i = 0; i < groups.size(); ++i) {
      if (groups[i].current > target[i] &&
          (donor == groups.size() || groups[i].current > groups[donor].current)) {
        donor = i;
      }
      if (groups[i].current < target[i] &&
          (receiver == groups.size() || groups[i].current < groups[receiver].current)) {
        receiver = i;
      }
    }
    --groups[donor].current;
    ++groups[receiver].current;
  }
  return regroup(bag.context_id, groups);
}

// ---------------------------------------------------------------------------
// NTI

Bag nti(const Bag& bag, const std::vector<Sentence>& distractors, Strength strength,
        std::uint64_t seed) {
  check_strength(strength);
  if (distractors.empty()) {
    throw MissingDistractors("no distractor texts available for context " + bag.context_id);
  }
  std::vector<Sentence> items = canonical(bag);
  Bag pool_bag{"", distractors};
  std::vector<Sentence> pool = pool_bag.canonical_items();
  const std::size_t k = std::min(modified_count(items.size(), strength), items.size());
  Rng rng(seed);
  std::vector<std::size_t> order = rng.permutation(items.size());
  for (std::size_t n = 0; n < k; ++n) {
    const std::size_t pos = order[n];
    Rng local(mix_seed(seed, pos));
    items[pos] = pool[local.index(pool.size())];
  }
  return Bag{bag.context_id, std::move(items)};
}

// ---------------------------------------------------------------------------
// EDA

Lexicon parse_lexicon(std::istream& in) {
  Lexicon lex;
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
    if (!obj.is_object() || !obj.contains("word") || !obj["word"].is_string() ||
        !obj.contains("synonyms") || !obj["synonyms"].is_array()) {
      throw FormatError("expected {\"word\": str, \"synonyms\": [str]}", line);
    }
    Tokens word;
    try {
      word = tokenize(obj["word"].get<std::string>());
    } catch (const EmptyText&) {
      throw FormatError("empty lexicon word", line);
    }
    auto& list = lex.synonyms[join_tokens(word)];
    for (const auto& syn : obj["synonyms"]) {
      if (!syn.is_string()) throw FormatError("synonyms must be strings", line);
      list.push_back(syn.get<std::string>());
    }
  }
  return lex;
}

Lexicon load_lexicon(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw UsageError("cannot open lexicon " + path.string());
  return parse_lexicon(in);
}

Sentence eda_edit(const Sentence& sentence, EdaOp op, Rng& rng,
                  const std::vector<std::string>& vocabulary, const Lexicon* lexicon) {
  Tokens tokens = sentence.tokens;
  const std::size_t n = tokens.size();
  switch (op) {
    case EdaOp::swap: {
      if (n < 2) throw NotApplicable("swap needs two tokens: '" + sentence.raw + "'");
      std::size_t i = rng.index(n);
      std::size_t j = rng.index(n - 1);
      if (j >= i) ++j;
      std::swap(tokens[i], tokens[j]);
      break;
    }
    case EdaOp::remove: {
      if (n < 2) throw NotApplicable("deletion needs two tokens: '" + sentence.raw + "'");
      tokens.erase(tokens.begin() + static_cast<std::ptrdiff_t>(rng.index(n)));
      break;
    }
    case EdaOp::replace: {
      std::size_t i = rng.index(n);
      std::vector<std::string> choices;
      if (lexicon) {
        auto it = lexicon->synonyms.find(tokens[i]);
        if (it != lexicon->synonyms.end()) {
          for (const auto& s : it->second) {
            if (s != tokens[i]) choices.push_back(s);
          }
        }
      }
      if (choices.empty()) {
        for (const auto& w : vocabulary) {
          if (w != tokens[i]) choices.push_back(w);
        }
      }
      if (!choices.empty()) tokens[i] = choices[rng.index(choices.size())];
      break;
    }
    case EdaOp::insert: {
      if (vocabulary.empty()) throw NotApplicable("insertion needs a vocabulary");
      std::size_t at = rng.index(n + 1);
      const std::string& word = vocabulary[rng.index(vocabulary.size())];
      tokens.insert(tokens.begin() + static_cast<std::ptrdiff_t>(at), word);
      break;
    }
  }
  // Synonyms may hold several words; re-tokenize so tokens and raw agree.
  return carry_labels(Sentence::from_text(join_tokens(tokens)), sentence);
}

Bag eda(const Bag& bag, Strength strength, std::uint64_t seed, const EdaOptions& options) {
  check_strength(strength);
  std::vector<Sentence> items = canonical(bag);
  const std::vector<std::string> vocabulary =
      options.vocabulary.empty() ? bag_vocabulary(items) : options.vocabulary;
  const std::size_t k = std::min(modified_count(items.size(), strength), items.size());
  Rng rng(seed);
  std::vector<std::size_t> order = rng.permutation(items.size());
  for (std::size_t n = 0; n < k; ++n) {
    const std::size_t pos = order[n];
    Rng local(mix_seed(seed, pos));
    static constexpr EdaOp kAll[] = {EdaOp::swap, EdaOp::replace, EdaOp::remove, EdaOp::insert};
    static constexpr EdaOp kShort[] = {EdaOp::replace, EdaOp::insert};
    const bool single = items[pos].tokens.size() < 2;
    EdaOp op = single ? kShort[local.index(2)] : kAll[local.index(4)];
    items[pos] = eda_edit(items[pos], op, local, vocabulary, options.lexicon);
  }
  return Bag{bag.context_id, std::move(items)};
}

// ---------------------------------------------------------------------------
// CPS

CarrierPool carrier_pool(const std::vector<Sentence>& sentences) {
  std::map<std::string, std::set<Tokens>> phrases;
  for (const auto& s : sentences) {
    if (!s.intent || !s.carrier_span) continue;
    const auto b = s.tokens.begin();
    phrases[*s.intent].insert(Tokens(b + static_cast<std::ptrdiff_t>(s.carrier_span->begin),
                                     b + static_cast<std::ptrdiff_t>(s.carrier_span->end)));
  }
  CarrierPool pool;
  for (auto& [intent, set] : phrases) pool[intent] = {set.begin(), set.end()};
  return pool;
}

Sentence replace_carrier(const Sentence& s, const Tokens& phrase) {
  if (!s.carrier_span) throw AnnotationRequired("sentence " + s.id + " has no carrier span");
  if (phrase.empty()) throw UsageError("carrier phrase is empty");
  const TokenSpan c = *s.carrier_span;
  Tokens tokens(s.tokens.begin(), s.tokens.begin() + static_cast<std::ptrdiff_t>(c.begin));
  tokens.insert(tokens.end(), phrase.begin(), phrase.end());
  tokens.insert(tokens.end(), s.tokens.begin() + static_cast<std::ptrdiff_t>(c.end), s.tokens.end());
  const long delta = static_cast<long>(phrase.size()) - static_cast<long>(c.size());
  return rebuild(s, tokens, TokenSpan{c.begin, c.begin + phrase.size()},
                 shifted(s.item_span, c.end, delta));
}

Bag cps(const Bag& bag, const CarrierPool& pool, Strength strength, std::uint64_t seed) {
  check_strength(strength);
  std::vector<Sentence> items = canonical(bag);
  const std::size_t k = std::min(modified_count(items.size(), strength), items.size());
  Rng rng(seed);
  std::vector<std::size_t> order = rng.permutation(items.size());
  for (std::size_t n = 0; n < k; ++n) {
    const std::size_t pos = order[n];
    const Sentence& s = items[pos];
    if (!s.intent || !s.carrier_span) {
      throw AnnotationRequired("sentence " + s.id + " ('" + s.raw +
                               "') needs intent and carrier span annotations");
    }
    auto it = pool.find(*s.intent);
    if (it == pool.end() || it->second.empty()) {
      throw AnnotationRequired("no carrier phrases for intent '" + *s.intent + "' (sentence " +
                               s.id + ")");
    }
    const auto b = s.tokens.begin();
    Tokens current(b + static_cast<std::ptrdiff_t>(s.carrier_span->begin),
                   b + static_cast<std::ptrdiff_t>(s.carrier_span->end));
    std::vector<const Tokens*> choices;
    for (const auto& p : it->second) {
      if (p != current) choices.push_back(&p);
    }
    if (choices.empty()) {
      for (const auto& p : it->second) choices.push_back(&p);
    }
    Rng local(mix_seed(seed, pos));
    items[pos] = replace_carrier(s, *choices[local.index(choices.size())]);
  }
  return Bag{bag.context_id, std::move(items)};
}

// ---------------------------------------------------------------------------
// ISM

namespace {

// Attribute occurrences strictly smaller than the item span, as (begin, length).
std::vector<std::pair<std::size_t, std::size_t>> removable_attributes(const Sentence& s) {
  std::vector<std::pair<std::size_t, std::size_t>> found;
  if (!s.item_span) return found;
  for (const auto& attr : s.attributes) {
    Tokens needle;
    try {
      needle = tokenize(attr);
    } catch (const EmptyText&) {
      continue;
    }
    if (needle.size() >= s.item_span->size()) continue;
    std::size_t at = find_in_span(s.tokens, *s.item_span, needle);
    if (at != std::string::npos) found.emplace_back(at, needle.size());
  }
  std::sort(found.begin(), found.end());
  found.erase(std::unique(found.begin(), found.end()), found.end());
  return found;
}

std::vector<std::string> addable_attributes(const Sentence& s, const AttributeSource& source) {
  std::vector<std::string> out;
  if (!s.item_span) return out;
  auto it = source.find(s.id);
  if (it == source.end()) return out;
  for (const auto& attr : it->second) {
    Tokens needle;
    try {
      needle = tokenize(attr);
    } catch (const EmptyText&) {
      continue;
    }
    if (find_in_span(s.tokens, *s.item_span, needle) == std::string::npos) out.push_back(attr);
  }
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

}  // namespace

bool broaden_item(const Sentence& s, Rng& rng, Sentence& out) {
  auto found = removable_attributes(s);
  if (found.empty()) return false;
  auto [at, len] = found[rng.index(found.size())];
  Tokens tokens = s.tokens;
  tokens.erase(tokens.begin() + static_cast<std::ptrdiff_t>(at),
               tokens.begin() + static_cast<std::ptrdiff_t>(at + len));
  const long delta = -static_cast<long>(len);
  TokenSpan item{s.item_span->begin, s.item_span->end - len};
  out = rebuild(s, tokens, shifted(s.carrier_span, s.item_span->end, delta), item);
  return true;
}

Sentence specify_item(const Sentence& s, const std::string& attribute) {
  if (!s.item_span) throw AnnotationRequired("sentence " + s.id + " has no item span");
  Tokens attr = tokenize(attribute);
  const std::size_t head = s.item_span->end - 1;
  Tokens tokens = s.tokens;
  tokens.insert(tokens.begin() + static_cast<std::ptrdiff_t>(head), attr.begin(), attr.end());
  const long delta = static_cast<long>(attr.size());
  TokenSpan item{s.item_span->begin, s.item_span->end + attr.size()};
  return rebuild(s, tokens, shifted(s.carrier_span, s.item_span->end, delta), item);
}

Bag ism(const Bag& bag, IsmDirection direction, const AttributeSource& attributes,
        Strength strength, std::uint64_t seed) {
  check_strength(strength);
  std::vector<Sentence> items = canonical(bag);
  auto eligible = [&](const Sentence& s) {
    return direction == IsmDirection::broader ? !removable_attributes(s).empty()
                                              : !addable_attributes(s, attributes).empty();
  };
  std::size_t available = 0;
  for (const auto& s : items) available += eligible(s) ? 1 : 0;
  if (available == 0) {
    throw AnnotationRequired(std::string("ISM ") +
                             (direction == IsmDirection::broader ? "broader" : "specific") +
                             " needs item spans with " +
                             (direction == IsmDirection::broader ? "in-span attributes"
                                                                 : "attribute source entries") +
                             "; none in context " + bag.context_id);
  }
  const std::size_t k = std::min(modified_count(items.size(), strength), available);
  Rng rng(seed);
  std::vector<std::size_t> order = rng.permutation(items.size());
  std::size_t done = 0;
  for (std::size_t n = 0; n < order.size() && done < k; ++n) {
    const std::size_t pos = order[n];
    if (!eligible(items[pos])) continue;
    Rng local(mix_seed(seed, pos));
    if (direction == IsmDirection::broader) {
      Sentence edited;
      broaden_item(items[pos], local, edited);
      items[pos] = std::move(edited);
    } else {
      auto choices = addable_attributes(items[pos], attributes);
      items[pos] = specify_item(items[pos], choices[local.index(choices.size())]);
    }
    ++done;
  }
  return Bag{bag.context_id, std::move(items)};
}

// ---------------------------------------------------------------------------
// Plans and rankings

std::string ManipulationPlan::label() const {
  std::string out;
  for (const auto& step : steps) {
    if (!out.empty()) out += '+';
    out += to_string(step.kind);
  }
  return out;
}

namespace {

ManipulationPlan plan_from_json(const json& obj) {
  if (!obj.is_object()) throw FormatError("plan must be a JSON object");
  ManipulationPlan plan;
  std::string mode = obj.value("mode", std::string("strength"));
  if (mode == "strength") {
    plan.mode = ManipulationPlan::Mode::strength;
  } else if (mode == "incremental") {
    plan.mode = ManipulationPlan::Mode::incremental;
  } else {
    throw FormatError("plan mode must be 'strength' or 'incremental', got '" + mode + "'");
  }
  if (obj.contains("levels")) {
    if (!obj["levels"].is_number_integer()) throw FormatError("plan levels must be an integer");
    plan.levels = obj["levels"].get<int>();
  }
  if (plan.levels < 1) throw FormatError("plan levels must be >= 1");
  if (!obj.contains("manipulations") || !obj["manipulations"].is_array()) {
    throw FormatError("plan needs a 'manipulations' list");
  }
  for (const auto& m : obj["manipulations"]) {
    if (!m.is_object() || !m.contains("kind") || !m["kind"].is_string()) {
      throw FormatError("each manipulation needs a string 'kind'");
    }
    ManipulationStep step;
    step.kind = parse_manipulation_kind(m["kind"].get<std::string>());
    if (m.contains("params") && m["params"].is_object()) {
      const json& params = m["params"];
      if (params.contains("strength")) {
        if (!params["strength"].is_number_integer()) throw FormatError("strength must be an integer");
        step.strength = params["strength"].get<int>();
      }
    }
    plan.steps.push_back(step);
  }
  if (plan.mode == ManipulationPlan::Mode::strength && plan.steps.size() != 1) {
    throw FormatError("strength plans take exactly one manipulation");
  }
  if (plan.mode == ManipulationPlan::Mode::incremental &&
      plan.steps.size() != static_cast<std::size_t>(plan.levels)) {
    throw FormatError("incremental plans need one manipulation per level");
  }
  for (const auto& step : plan.steps) {
    if (step.strength < 1 || step.strength > plan.levels) {
      throw FormatError("step strength must be in 1..levels");
    }
  }
  return plan;
}

}  // namespace

std::vector<ManipulationPlan> parse_plans(std::string_view text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw FormatError(std::string("invalid plan JSON (") + e.what() + ")");
  }
  std::vector<ManipulationPlan> plans;
  if (doc.is_array()) {
    for (const auto& p : doc) plans.push_back(plan_from_json(p));
  } else {
    plans.push_back(plan_from_json(doc));
  }
  if (plans.empty()) throw FormatError("plan file holds no plans");
  return plans;
}

std::vector<ManipulationPlan> load_plans(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw UsageError("cannot open plan " + path.string());
  std::stringstream buffer;
  buffer << in.rdbuf();
  return parse_plans(buffer.str());
}

Bag apply_manipulation(const Bag& bag, ManipulationKind kind, Strength strength,
                       std::uint64_t seed, const ManipulationResources& res) {
  switch (kind) {
    case ManipulationKind::tdm_peaked: return tdm(bag, TdmDirection::peaked, strength, seed);
    case ManipulationKind::tdm_flat: return tdm(bag, TdmDirection::flat, strength, seed);
    case ManipulationKind::nti:
      if (!res.distractors) throw MissingDistractors("no distractor pool configured");
      return nti(bag, *res.distractors, strength, seed);
    case ManipulationKind::eda: return eda(bag, strength, seed, res.eda);
    case ManipulationKind::cps:
      if (!res.carriers) throw AnnotationRequired("no carrier phrase pool configured");
      return cps(bag, *res.carriers, strength, seed);
    case ManipulationKind::ism_broader:
    case ManipulationKind::ism_specific: {
      static const AttributeSource kEmpty;
      const AttributeSource& attrs = res.attributes ? *res.attributes : kEmpty;
      return ism(bag,
                 kind == ManipulationKind::ism_broader ? IsmDirection::broader
                                                       : IsmDirection::specific,
                 attrs, strength, seed);
    }
  }
  throw UsageError("unknown manipulation");
}

RankingTask build_ranking(const Bag& reference, const ManipulationPlan& plan,
                          std::uint64_t seed, const ManipulationResources& resources) {
  if (plan.steps.empty()) throw UsageError("plan has no manipulations");
  RankingTask task;
  task.reference = reference;
  task.manipulation = plan.label();
  if (plan.mode == ManipulationPlan::Mode::strength) {
    for (int level = 1; level <= plan.levels; ++level) {
      task.candidates.push_back(apply_manipulation(reference, plan.steps.front().kind,
                                                   Strength{level, plan.levels}, seed, resources));
    }
  } else {
    if (plan.steps.size() != static_cast<std::size_t>(plan.levels)) {
      throw UsageError("incremental plans need one manipulation per level");
    }
    Bag current = reference;
    for (std::size_t i = 0; i < plan.steps.size(); ++i) {
      current = apply_manipulation(current, plan.steps[i].kind,
                                   Strength{plan.steps[i].strength, plan.levels},
                                   mix_seed(seed, i), resources);
      task.candidates.push_back(current);
    }
  }
  for (int r = 1; r <= plan.levels; ++r) task.true_ranks.push_back(r);
  return task;
}

}  // namespace trafficdist
