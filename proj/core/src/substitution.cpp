#include "sico/substitution.hpp"

#include <algorithm>
#include <cctype>

#include "sico/errors.hpp"
#include "sico/io_util.hpp"

namespace sico {

SubstitutionLevel substitution_level_from_string(std::string_view s) {
    if (s == "word") return SubstitutionLevel::word;
    if (s == "sentence") return SubstitutionLevel::sentence;
    throw ValidationError("unknown substitution level: \"" + std::string(s) +
                          "\" (expected word|sentence)");
}

std::string_view to_string(SubstitutionLevel level) {
    return level == SubstitutionLevel::word ? "word" : "sentence";
}

std::string paraphrase_prompt(std::string_view feature_text, std::string_view text) {
    std::string out;
    out.reserve(feature_text.size() + kParaphraseInstruction.size() + text.size() + 4);
    out += feature_text;
    out += '\n';
    out += kParaphraseInstruction;
    out += ":\n";
    out += text;
    return out;
}

std::string match_case(std::string_view candidate, std::string_view original) {
    std::string out(candidate);
    if (!out.empty() && !original.empty() &&
        std::isupper(static_cast<unsigned char>(original.front())) &&
        std::islower(static_cast<unsigned char>(out.front()))) {
        out.front() = static_cast<char>(std::toupper(static_cast<unsigned char>(out.front())));
    }
    return out;
}

CandidateSet word_candidates(const SegmentedText& text, const SynonymLexicon& lexicon,
                             const PlausibilityFilter& plausibility, double tau) {
    CandidateSet set;
    set.level = SubstitutionLevel::word;
    for (std::size_t i = 0; i < text.words.size(); ++i) {
        if (!text.content_mask[i]) continue;
        const std::string_view original = text.word(i);
        const PosTag tag = text.pos_tags[i];

        std::vector<std::string> kept;
        for (const SynonymEntry& synonym : lexicon.lookup(original, tag)) {
            if (synonym.pos != tag) continue;
            const std::string candidate = match_case(synonym.text, original);
            if (iequals(candidate, original)) continue;
            if (std::find(kept.begin(), kept.end(), candidate) != kept.end()) continue;
            if (plausibility.fill_probability(text, i, candidate) < tau) continue;
            kept.push_back(candidate);
        }
        if (!kept.empty()) {
            set.per_position.emplace(i, std::move(kept));
        }
    }
    return set;
}

CandidateSet sentence_candidates(const SegmentedText& text, std::string_view feature_text,
                                 LlmGateway& gateway, int paraphrases_per_sentence) {
    if (feature_text.empty()) {
        throw ValidationError("sentence candidates: empty feature text");
    }
    CandidateSet set;
    set.level = SubstitutionLevel::sentence;
    if (paraphrases_per_sentence <= 0) {
        return set;
    }
    for (std::size_t i = 0; i < text.sentences.size(); ++i) {
        const std::string original = trim(text.sentence(i));
        const std::string prompt = paraphrase_prompt(feature_text, original);
        std::vector<std::string> kept;
        for (int j = 0; j < paraphrases_per_sentence; ++j) {
            const std::string candidate = trim(gateway.generate(prompt, j));
            if (candidate.empty()) continue;
            if (candidate == original) continue;
            if (std::find(kept.begin(), kept.end(), candidate) != kept.end()) continue;
            kept.push_back(candidate);
        }
        if (!kept.empty()) {
            set.per_position.emplace(i, std::move(kept));
        }
    }
    return set;
}

std::string splice(const std::string& raw, Span span, std::string_view replacement) {
    std::string out;
    out.reserve(raw.size() - span.length() + replacement.size());
    out.append(raw, 0, span.begin);
    out.append(replacement);
    out.append(raw, span.end, std::string::npos);
    return out;
}

namespace {

Span span_for(const SegmentedText& text, SubstitutionLevel level, std::size_t position) {
    const auto& spans = level == SubstitutionLevel::word ? text.words : text.sentences;
    if (position >= spans.size()) {
        throw ValidationError("substitution: position " + std::to_string(position) +
                              " out of range (" + std::to_string(spans.size()) + " " +
                              std::string(to_string(level)) + " spans)");
    }
    return spans[position];
}

} // namespace

SegmentedText apply_substitution(const Segmenter& segmenter, const SegmentedText& text,
                                 SubstitutionLevel level, std::size_t position,
                                 std::string_view candidate) {
    const Span span = span_for(text, level, position);
    return segmenter.segment(splice(text.raw, span, candidate));
}

SegmentedText apply_substitutions(const Segmenter& segmenter, const SegmentedText& text,
                                  SubstitutionLevel level,
                                  const std::map<std::size_t, std::string>& chosen) {
    if (chosen.empty()) {
        return text;
    }
    std::string out;
    out.reserve(text.raw.size());
    std::size_t cursor = 0;
    for (const auto& [position, replacement] : chosen) { // std::map: ascending positions
        const Span span = span_for(text, level, position);
        out.append(text.raw, cursor, span.begin - cursor);
        out.append(replacement);
        cursor = span.end;
    }
    out.append(text.raw, cursor, std::string::npos);
    return segmenter.segment(out);
}

} // namespace sico
