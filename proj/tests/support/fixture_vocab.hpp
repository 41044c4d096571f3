#pragma once

#include <map>
#include <set>
#include <string>
#include <vector>

#include "sico/hash.hpp"
#include "sico/segmentation.hpp"

namespace sico::testing {

/// One flagged word with its clean same-POS replacement.
struct VocabEntry {
    std::string flagged;
    std::string replacement;
    PosTag pos;
};

/// The homebrew vocabulary behind the offline end-to-end fixture: a list of
/// "AI-sounding" flagged words, one clean synonym each, plus function-word
/// glue. The scripted backend, the fixture lexicon, the tagger dictionary
/// and the word-list proxy are all generated from this single table.
const std::vector<VocabEntry>& fixture_vocab();

const std::set<std::string>& fixture_flagged_set();

/// flagged (lowercase) -> replacement.
const std::map<std::string, std::string>& fixture_replacements();

/// Function words used as glue (all tagged OTHER).
const std::vector<std::string>& fixture_fillers();

/// Every vocab word (flagged, replacement, filler) -> its POS tag.
const std::map<std::string, PosTag>& fixture_tags();

/// Fraction of word-like tokens that are flagged.
double flagged_fraction(const std::string& text);

/// Replaces each flagged word with its clean synonym with probability
/// `replace_prob` (case preserved). Deterministic given the rng state.
std::string strip_flagged(const std::string& text, double replace_prob, SplitMix64& rng);

/// Deterministic flagged-word-salad prose, `sentences` sentences long.
std::string make_fixture_text(SplitMix64& rng, int sentences);

/// Clean prose built from replacements and fillers (the "human" side).
std::string make_clean_text(SplitMix64& rng, int sentences);

} // namespace sico::testing
