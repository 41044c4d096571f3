#include "sico/segmentation.hpp"

#include <algorithm>
#include <cctype>

#include <nlohmann/json.hpp>

#include "sico/errors.hpp"
#include "sico/io_util.hpp"

namespace sico {

using nlohmann::json;

PosTag pos_tag_from_string(std::string_view s) {
    const std::string t = to_lower(s);
    if (t == "noun" || t == "n" || t == "nn" || t == "nns" || t == "nnp") return PosTag::noun;
    if (t == "verb" || t == "v" || t == "vb" || t == "vbd" || t == "vbg" || t == "vbn" ||
        t == "vbp" || t == "vbz") {
        return PosTag::verb;
    }
    if (t == "adj" || t == "adjective" || t == "a" || t == "jj") return PosTag::adjective;
    if (t == "adv" || t == "adverb" || t == "r" || t == "rb") return PosTag::adverb;
    if (t == "other" || t == "x") return PosTag::other;
    throw ValidationError("unknown POS tag: \"" + std::string(s) + "\"");
}

std::string_view to_string(PosTag tag) {
    switch (tag) {
    case PosTag::noun: return "noun";
    case PosTag::verb: return "verb";
    case PosTag::adjective: return "adj";
    case PosTag::adverb: return "adv";
    case PosTag::other: return "other";
    }
    return "other";
}

std::string_view SegmentedText::word(std::size_t i) const {
    const Span& s = words.at(i);
    return std::string_view(raw).substr(s.begin, s.length());
}

std::string_view SegmentedText::sentence(std::size_t i) const {
    const Span& s = sentences.at(i);
    return std::string_view(raw).substr(s.begin, s.length());
}

namespace {

bool is_word_char(unsigned char c) {
    return std::isalnum(c) != 0;
}

bool is_inner_join_char(unsigned char c) {
    return c == '\'' || c == '-';
}

} // namespace

std::vector<Span> tokenize_word_spans(std::string_view text) {
    std::vector<Span> spans;
    std::size_t i = 0;
    const std::size_t n = text.size();
    while (i < n) {
        const unsigned char c = static_cast<unsigned char>(text[i]);
        if (std::isspace(c)) {
            ++i;
            continue;
        }
        if (is_word_char(c)) {
            std::size_t j = i + 1;
            while (j < n) {
                const unsigned char d = static_cast<unsigned char>(text[j]);
                if (is_word_char(d)) {
                    ++j;
                } else if (is_inner_join_char(d) && j + 1 < n &&
                           is_word_char(static_cast<unsigned char>(text[j + 1]))) {
                    j += 2;
                } else {
                    break;
                }
            }
            spans.push_back({i, j});
            i = j;
        } else {
            // punctuation and any other byte: single-character token
            spans.push_back({i, i + 1});
            ++i;
        }
    }
    return spans;
}

std::vector<std::string> tokenize_words(std::string_view text) {
    std::vector<std::string> out;
    for (const Span& s : tokenize_word_spans(text)) {
        out.emplace_back(text.substr(s.begin, s.length()));
    }
    return out;
}

bool is_word_like(std::string_view token) {
    return !token.empty() && is_word_char(static_cast<unsigned char>(token.front()));
}

DictionaryPosTagger::DictionaryPosTagger(std::map<std::string, PosTag> entries,
                                         bool suffix_fallback)
    : entries_(std::move(entries)), suffix_fallback_(suffix_fallback) {}

DictionaryPosTagger DictionaryPosTagger::load(const std::filesystem::path& path,
                                              bool suffix_fallback) {
    json doc = json::parse(read_file(path), nullptr, false);
    if (doc.is_discarded() || !doc.is_object()) {
        throw ParseError(path.string() + ": malformed tagger dictionary");
    }
    std::map<std::string, PosTag> entries;
    for (const auto& [word, tag] : doc.items()) {
        if (!tag.is_string()) {
            throw ParseError(path.string() + ": tag for \"" + word + "\" must be a string");
        }
        entries[to_lower(word)] = pos_tag_from_string(tag.get<std::string>());
    }
    return DictionaryPosTagger(std::move(entries), suffix_fallback);
}

namespace {

bool ends_with(std::string_view s, std::string_view suffix) {
    return s.size() >= suffix.size() && s.substr(s.size() - suffix.size()) == suffix;
}

PosTag suffix_guess(const std::string& lower) {
    if (lower.size() < 4) return PosTag::other;
    if (ends_with(lower, "ly")) return PosTag::adverb;
    if (ends_with(lower, "tion") || ends_with(lower, "ness") || ends_with(lower, "ment") ||
        ends_with(lower, "ity") || ends_with(lower, "ship")) {
        return PosTag::noun;
    }
    if (ends_with(lower, "ize") || ends_with(lower, "ise") || ends_with(lower, "ify") ||
        ends_with(lower, "ate")) {
        return PosTag::verb;
    }
    if (ends_with(lower, "ous") || ends_with(lower, "ive") || ends_with(lower, "ful") ||
        ends_with(lower, "able") || ends_with(lower, "ible") || ends_with(lower, "al")) {
        return PosTag::adjective;
    }
    return PosTag::other;
}

} // namespace

std::vector<PosTag> DictionaryPosTagger::tag(const std::vector<std::string>& words) const {
    std::vector<PosTag> tags;
    tags.reserve(words.size());
    for (const auto& w : words) {
        if (!is_word_like(w)) {
            tags.push_back(PosTag::other);
            continue;
        }
        const std::string lower = to_lower(w);
        auto it = entries_.find(lower);
        if (it != entries_.end()) {
            tags.push_back(it->second);
        } else {
            tags.push_back(suffix_fallback_ ? suffix_guess(lower) : PosTag::other);
        }
    }
    return tags;
}

std::vector<std::string> Segmenter::default_abbreviations() {
    return {"mr", "mrs", "ms", "dr", "prof", "sr", "jr", "st",
            "vs", "etc", "e.g", "i.e", "fig", "al", "no", "approx"};
}

Segmenter::Segmenter(std::shared_ptr<const PosTagger> tagger,
                     std::vector<std::string> abbreviations)
    : tagger_(std::move(tagger)), abbreviations_(std::move(abbreviations)) {
    if (!tagger_) {
        throw ConfigError("segmenter: POS tagger is required");
    }
}

namespace {

bool is_terminal(char c) {
    return c == '.' || c == '!' || c == '?';
}

// The alnum-or-dot run immediately before `pos`, without a trailing dot.
// Used to recognize abbreviations like "e.g" or "Dr".
std::string preceding_token(std::string_view text, std::size_t pos) {
    std::size_t end = pos;
    std::size_t begin = end;
    while (begin > 0) {
        const unsigned char c = static_cast<unsigned char>(text[begin - 1]);
        if (std::isalnum(c) || c == '.') {
            --begin;
        } else {
            break;
        }
    }
    std::string token(text.substr(begin, end - begin));
    while (!token.empty() && token.back() == '.') token.pop_back();
    return token;
}

bool starts_sentence(unsigned char c) {
    return std::isupper(c) || std::isdigit(c) || c == '"' || c == '\'' || c == '(';
}

} // namespace

SegmentedText Segmenter::segment(const std::string& text) const {
    if (text.empty()) {
        throw ValidationError("segment: empty text");
    }

    SegmentedText st;
    st.raw = text;
    st.words = tokenize_word_spans(st.raw);

    std::vector<std::string> tokens;
    tokens.reserve(st.words.size());
    for (const Span& s : st.words) {
        tokens.emplace_back(st.raw.substr(s.begin, s.length()));
    }
    st.pos_tags = tagger_->tag(tokens);
    if (st.pos_tags.size() != st.words.size()) {
        throw ValidationError("segment: tagger returned " + std::to_string(st.pos_tags.size()) +
                              " tags for " + std::to_string(st.words.size()) + " words");
    }
    st.content_mask.reserve(st.pos_tags.size());
    for (PosTag t : st.pos_tags) {
        st.content_mask.push_back(is_content_tag(t));
    }

    // Sentence boundaries. A boundary sits after a run of terminal
    // punctuation (plus closing quotes/brackets) that is followed by
    // whitespace and a sentence-initial character.
    std::vector<std::size_t> breaks; // index of first char of the next sentence
    const std::size_t n = st.raw.size();
    std::size_t i = 0;
    while (i < n) {
        if (!is_terminal(st.raw[i])) {
            ++i;
            continue;
        }
        const std::string before = preceding_token(st.raw, i);
        std::size_t j = i;
        while (j < n && (is_terminal(st.raw[j]) || st.raw[j] == '"' || st.raw[j] == '\'' ||
                         st.raw[j] == ')')) {
            ++j;
        }
        std::size_t k = j;
        while (k < n && std::isspace(static_cast<unsigned char>(st.raw[k]))) ++k;
        const bool is_abbrev =
            st.raw[i] == '.' &&
            (before.size() == 1 ||
             std::find_if(abbreviations_.begin(), abbreviations_.end(), [&](const auto& a) {
                 return iequals(a, before);
             }) != abbreviations_.end());
        if (k < n && k > j && !is_abbrev &&
            starts_sentence(static_cast<unsigned char>(st.raw[k]))) {
            breaks.push_back(k);
        }
        i = j;
    }

    // Sentence spans are trimmed extents; inter-sentence whitespace stays in
    // the gaps so substitutions never disturb it.
    auto trim_span = [&](std::size_t begin, std::size_t end) -> Span {
        while (begin < end && std::isspace(static_cast<unsigned char>(st.raw[begin]))) ++begin;
        while (end > begin && std::isspace(static_cast<unsigned char>(st.raw[end - 1]))) --end;
        return {begin, end};
    };
    std::size_t start = 0;
    for (std::size_t b : breaks) {
        const Span s = trim_span(start, b);
        if (s.length() > 0) st.sentences.push_back(s);
        start = b;
    }
    const Span last = trim_span(start, n);
    if (last.length() > 0) st.sentences.push_back(last);
    if (st.sentences.empty()) {
        st.sentences.push_back({0, n});
    }
    return st;
}

} // namespace sico
