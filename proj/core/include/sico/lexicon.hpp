#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "sico/segmentation.hpp"

namespace sico {

struct SynonymEntry {
    std::string text;
    PosTag pos = PosTag::other;

    bool operator==(const SynonymEntry&) const = default;
};

/// (lemma, POS) -> synonyms. Self-synonyms and multi-word synonyms are
/// dropped at load time; lookups are pure and case-insensitive on the lemma.
class SynonymLexicon {
public:
    SynonymLexicon() = default;

    /// JSONL loader: {"lemma": str, "pos": str, "synonyms": [{"text","pos"}]}.
    static SynonymLexicon load(const std::filesystem::path& path);

    void add(std::string_view lemma, PosTag pos, std::vector<SynonymEntry> synonyms);

    const std::vector<SynonymEntry>& lookup(std::string_view lemma, PosTag pos) const;

    std::size_t size() const { return entries_.size(); }

private:
    static std::string key(std::string_view lemma, PosTag pos);
    std::map<std::string, std::vector<SynonymEntry>> entries_;
};

} // namespace sico
