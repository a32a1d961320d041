#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "trafficdist/corpus.hpp"
#include "trafficdist/random.hpp"

namespace trafficdist {

enum class ManipulationKind { tdm_peaked, tdm_flat, nti, eda, cps, ism_broader, ism_specific };

std::string_view to_string(ManipulationKind kind);
ManipulationKind parse_manipulation_kind(std::string_view name);

// Noise level `level` out of `levels` (1-based).
struct Strength {
  int level = 1;
  int levels = 5;

  double fraction() const { return static_cast<double>(level) / static_cast<double>(levels); }
};

// Largest share of a bag that any occurrence-level manipulation rewrites.
constexpr double kMaxModifiedFraction = 0.5;

// ceil(fraction * size * 0.5).
std::size_t modified_count(std::size_t bag_size, Strength strength);

// Text distribution manipulation. Peaked moves occurrences of the rarest
// texts onto the most frequent one; flat moves occurrences from above-target
// texts to below-target texts until, at full strength, max - min <= 1. The
// bag size is unchanged. Throws NotApplicable when there is nothing to move.
enum class TdmDirection { peaked, flat };
Bag tdm(const Bag& bag, TdmDirection direction, Strength strength, std::uint64_t seed);

// Replaces modified_count occurrences with uniform draws from the pool.
// Throws MissingDistractors for an empty pool.
Bag nti(const Bag& bag, const std::vector<Sentence>& distractors, Strength strength,
        std::uint64_t seed);

// word -> synonyms, loaded from JSONL {"word": str, "synonyms": [str]}.
struct Lexicon {
  std::map<std::string, std::vector<std::string>> synonyms;
};
Lexicon parse_lexicon(std::istream& in);
Lexicon load_lexicon(const std::filesystem::path& path);

struct EdaOptions {
  const Lexicon* lexicon = nullptr;
  // Replacement/insertion vocabulary; the bag's own tokens when empty.
  std::vector<std::string> vocabulary;
};

enum class EdaOp { swap, replace, remove, insert };

// One edit on one sentence. Swap and remove need at least two tokens.
Sentence eda_edit(const Sentence& sentence, EdaOp op, Rng& rng,
                  const std::vector<std::string>& vocabulary, const Lexicon* lexicon);

// modified_count occurrences each receive one randomly chosen edit.
Bag eda(const Bag& bag, Strength strength, std::uint64_t seed, const EdaOptions& options = {});

// intent -> distinct carrier phrases.
using CarrierPool = std::map<std::string, std::vector<Tokens>>;
CarrierPool carrier_pool(const std::vector<Sentence>& sentences);

Sentence replace_carrier(const Sentence& sentence, const Tokens& phrase);

// Carrier phrase substitution with a different phrase of the same intent.
// Throws AnnotationRequired naming the first selected sentence lacking an
// intent, a carrier span, or pool coverage.
Bag cps(const Bag& bag, const CarrierPool& pool, Strength strength, std::uint64_t seed);

// sentence id -> attributes that may be added to its itemname.
using AttributeSource = std::map<std::string, std::vector<std::string>>;

// Removes one attribute token sequence from the item span. Returns false when
// none of the sentence's attributes occurs inside the span.
bool broaden_item(const Sentence& sentence, Rng& rng, Sentence& out);
// Inserts the attribute before the last item-span token.
Sentence specify_item(const Sentence& sentence, const std::string& attribute);

enum class IsmDirection { broader, specific };

// Itemname specificity manipulation over occurrences that can take the edit;
// occurrences without an item span are never selected. Throws
// AnnotationRequired when no occurrence is eligible.
Bag ism(const Bag& bag, IsmDirection direction, const AttributeSource& attributes,
        Strength strength, std::uint64_t seed);

// Inputs the annotation-dependent manipulations draw from.
struct ManipulationResources {
  const std::vector<Sentence>* distractors = nullptr;
  const CarrierPool* carriers = nullptr;
  const AttributeSource* attributes = nullptr;
  EdaOptions eda;
};

struct ManipulationStep {
  ManipulationKind kind = ManipulationKind::nti;
  int strength = 1;  // used by incremental plans
};

struct ManipulationPlan {
  enum class Mode { strength, incremental };

  Mode mode = Mode::strength;
  std::vector<ManipulationStep> steps;
  int levels = 5;

  // Kind name, or kinds joined by '+' for incremental plans.
  std::string label() const;
};

// {"mode": "strength"|"incremental", "manipulations": [{"kind", "params"}],
//  "levels"}; a JSON array holds several plans.
std::vector<ManipulationPlan> parse_plans(std::string_view json_text);
std::vector<ManipulationPlan> load_plans(const std::filesystem::path& path);

Bag apply_manipulation(const Bag& bag, ManipulationKind kind, Strength strength,
                       std::uint64_t seed, const ManipulationResources& resources);

struct RankingTask {
  Bag reference;
  std::vector<Bag> candidates;  // increasing noise
  std::vector<int> true_ranks;  // 1 = least noisy
  std::string manipulation;
};

// Strength mode: the single step at levels 1..L, sharing one seed so every
// level extends the previous one. Incremental mode: candidate i applies steps
// 1..i in sequence.
RankingTask build_ranking(const Bag& reference, const ManipulationPlan& plan,
                          std::uint64_t seed, const ManipulationResources& resources);

}  // namespace trafficdist
