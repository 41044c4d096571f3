#pragma once

#include <filesystem>
#include <map>
#include <memory>
#include <string>
#include <string_view>
#include <vector>

namespace sico {

/// Tags are normalized to the four content-word classes plus OTHER.
enum class PosTag { noun, verb, adjective, adverb, other };

PosTag pos_tag_from_string(std::string_view s);
std::string_view to_string(PosTag tag);

constexpr bool is_content_tag(PosTag tag) {
    return tag != PosTag::other;
}

/// Half-open byte range [begin, end) into the owning text.
struct Span {
    std::size_t begin = 0;
    std::size_t end = 0;

    std::size_t length() const { return end - begin; }
    bool operator==(const Span&) const = default;
};

/// A text with aligned word and sentence segmentations. Word spans are
/// non-overlapping and ordered; the bytes between them (whitespace) are
/// preserved, so splicing any span back into `raw` reproduces it exactly.
struct SegmentedText {
    std::string raw;
    std::vector<Span> words;
    std::vector<Span> sentences;
    std::vector<PosTag> pos_tags;     // one per word
    std::vector<bool> content_mask;   // derived from pos_tags

    std::string_view word(std::size_t i) const;
    std::string_view sentence(std::size_t i) const;
};

class PosTagger {
public:
    virtual ~PosTagger() = default;
    virtual std::vector<PosTag> tag(const std::vector<std::string>& words) const = 0;
};

/// Word -> tag dictionary with optional suffix heuristics for unknown words.
/// Lookups are case-insensitive. The dictionary file is JSON:
/// {"word": "noun", ...}.
class DictionaryPosTagger : public PosTagger {
public:
    explicit DictionaryPosTagger(std::map<std::string, PosTag> entries,
                                 bool suffix_fallback = true);
    static DictionaryPosTagger load(const std::filesystem::path& path,
                                    bool suffix_fallback = true);

    std::vector<PosTag> tag(const std::vector<std::string>& words) const override;

private:
    std::map<std::string, PosTag> entries_;
    bool suffix_fallback_;
};

/// Splits text into word tokens (letter/digit runs, with internal
/// apostrophes and hyphens; punctuation marks are single-character tokens).
std::vector<Span> tokenize_word_spans(std::string_view text);
std::vector<std::string> tokenize_words(std::string_view text);

bool is_word_like(std::string_view token);

/// Deterministic rule-based segmenter: sentence boundaries after terminal
/// punctuation followed by whitespace and an upper-case/digit/quote start,
/// except after known abbreviations and single-letter initials.
class Segmenter {
public:
    explicit Segmenter(std::shared_ptr<const PosTagger> tagger,
                       std::vector<std::string> abbreviations = default_abbreviations());

    SegmentedText segment(const std::string& text) const;

    static std::vector<std::string> default_abbreviations();

private:
    std::shared_ptr<const PosTagger> tagger_;
    std::vector<std::string> abbreviations_;
};

} // namespace sico
