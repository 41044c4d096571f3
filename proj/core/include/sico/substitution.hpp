#pragma once

#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "sico/gateway.hpp"
#include "sico/lexicon.hpp"
#include "sico/segmentation.hpp"

namespace sico {

enum class SubstitutionLevel { word, sentence };

SubstitutionLevel substitution_level_from_string(std::string_view s);
std::string_view to_string(SubstitutionLevel level);

/// Candidate replacements per editable position. Positions index into the
/// source text's word list (word level) or sentence list (sentence level);
/// lists are deduplicated and never contain the original.
struct CandidateSet {
    SubstitutionLevel level = SubstitutionLevel::word;
    std::map<std::size_t, std::vector<std::string>> per_position;

    bool empty() const { return per_position.empty(); }
};

/// Contextual fit of a candidate word at a masked position, as a fill
/// probability in [0, 1]. The reference live binding would wrap a masked
/// language model; tests and offline runs use deterministic stand-ins.
class PlausibilityFilter {
public:
    virtual ~PlausibilityFilter() = default;
    virtual double fill_probability(const SegmentedText& text, std::size_t word_index,
                                    const std::string& candidate) const = 0;
};

class AcceptAllPlausibility : public PlausibilityFilter {
public:
    double fill_probability(const SegmentedText&, std::size_t,
                            const std::string&) const override {
        return 1.0;
    }
};

/// The fixed paraphrasing instruction used for in-context example
/// initialization and sentence-level candidates.
inline constexpr std::string_view kParaphraseInstruction =
    "Based on the description, paraphrase the following text to be human style";

/// feature ⊕ paraphrase instruction ⊕ text, newline separated.
std::string paraphrase_prompt(std::string_view feature_text, std::string_view text);

/// Synonym candidates for every content-word position: lexicon synonyms that
/// keep the position's POS tag, minus the original, filtered by contextual
/// plausibility (kept iff fill probability >= tau). Function words get none.
CandidateSet word_candidates(const SegmentedText& text, const SynonymLexicon& lexicon,
                             const PlausibilityFilter& plausibility, double tau);

/// LLM paraphrase candidates per sentence: `paraphrases_per_sentence` samples
/// through the gateway, trimmed, deduplicated, originals removed.
CandidateSet sentence_candidates(const SegmentedText& text, std::string_view feature_text,
                                 LlmGateway& gateway, int paraphrases_per_sentence);

/// Replaces one word/sentence span and re-segments. The source is unchanged.
SegmentedText apply_substitution(const Segmenter& segmenter, const SegmentedText& text,
                                 SubstitutionLevel level, std::size_t position,
                                 std::string_view candidate);

/// Applies one chosen candidate per position simultaneously (positions refer
/// to the original segmentation), then re-segments.
SegmentedText apply_substitutions(const Segmenter& segmenter, const SegmentedText& text,
                                  SubstitutionLevel level,
                                  const std::map<std::size_t, std::string>& chosen);

/// Raw text with a single span spliced out. Shared with the greedy optimizer,
/// which scores single substitutions without re-segmenting.
std::string splice(const std::string& raw, Span span, std::string_view replacement);

/// Copies the original's leading-capital casing onto a candidate.
std::string match_case(std::string_view candidate, std::string_view original);

} // namespace sico
