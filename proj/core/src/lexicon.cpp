#include "sico/lexicon.hpp"

#include <nlohmann/json.hpp>

#include "sico/errors.hpp"
#include "sico/io_util.hpp"

namespace sico {

using nlohmann::json;

std::string SynonymLexicon::key(std::string_view lemma, PosTag pos) {
    std::string k = to_lower(lemma);
    k += '\x1f';
    k += to_string(pos);
    return k;
}

void SynonymLexicon::add(std::string_view lemma, PosTag pos,
                         std::vector<SynonymEntry> synonyms) {
    const std::string lower = to_lower(lemma);
    std::vector<SynonymEntry> kept;
    for (auto& s : synonyms) {
        if (s.text.find(' ') != std::string::npos) continue; // single-token only
        if (iequals(s.text, lower)) continue;                // no self-synonyms
        if (s.text.empty()) continue;
        kept.push_back(std::move(s));
    }
    auto& slot = entries_[key(lower, pos)];
    slot.insert(slot.end(), kept.begin(), kept.end());
}

const std::vector<SynonymEntry>& SynonymLexicon::lookup(std::string_view lemma,
                                                        PosTag pos) const {
    static const std::vector<SynonymEntry> kEmpty;
    auto it = entries_.find(key(lemma, pos));
    return it == entries_.end() ? kEmpty : it->second;
}

SynonymLexicon SynonymLexicon::load(const std::filesystem::path& path) {
    SynonymLexicon lex;
    for_each_jsonl_line(path, [&](std::size_t number, const std::string& line) {
        json obj = json::parse(line, nullptr, false);
        if (obj.is_discarded() || !obj.is_object() || !obj.contains("lemma") ||
            !obj.contains("pos") || !obj.contains("synonyms")) {
            throw ParseError(path.string() + ": line " + std::to_string(number) +
                             ": expected {\"lemma\", \"pos\", \"synonyms\"}");
        }
        std::vector<SynonymEntry> synonyms;
        for (const auto& s : obj["synonyms"]) {
            if (!s.is_object() || !s.contains("text") || !s.contains("pos")) {
                throw ParseError(path.string() + ": line " + std::to_string(number) +
                                 ": synonym entries need \"text\" and \"pos\"");
            }
            synonyms.push_back(
                {s["text"].get<std::string>(), pos_tag_from_string(s["pos"].get<std::string>())});
        }
        lex.add(obj["lemma"].get<std::string>(),
                pos_tag_from_string(obj["pos"].get<std::string>()), std::move(synonyms));
    });
    return lex;
}

} // namespace sico
