#include "sico/runtime.hpp"

#include <cstdlib>

#include "sico/errors.hpp"
#include "sico/http_gateway.hpp"

namespace sico {

namespace {

std::string env_or(const char* name, const std::string& fallback) {
    if (!fallback.empty()) return fallback;
    const char* value = std::getenv(name);
    return value ? std::string(value) : std::string{};
}

} // namespace

Runtime build_runtime(const AppConfig& config,
                      std::shared_ptr<GenerationBackend> generation_override,
                      std::shared_ptr<ScoringBackend> scoring_override) {
    Runtime rt;

    const std::string api_key = env_or(kApiKeyEnvVar, config.api_key);
    const std::string base_url = env_or(kBaseUrlEnvVar, config.gateway_base_url);

    std::shared_ptr<GenerationBackend> generation = std::move(generation_override);
    if (!generation && !base_url.empty()) {
        generation = std::make_shared<HttpGenerationBackend>(HttpOptions{base_url, api_key});
    }
    std::shared_ptr<ScoringBackend> scoring = std::move(scoring_override);
    if (!scoring && !config.scoring.base_url.empty()) {
        scoring = std::make_shared<HttpScoringBackend>(
            HttpOptions{config.scoring.base_url, api_key}, config.scoring.model_id);
    }

    GatewayConfig gateway_config = config.gateway;
    if (!config.price_table.empty()) {
        gateway_config.prices = PriceTable::load(config.price_table);
    }
    rt.gateway = std::make_shared<LlmGateway>(std::move(generation), std::move(scoring),
                                              std::move(gateway_config));

    std::shared_ptr<const PosTagger> tagger;
    if (!config.substitution.tagger_dict.empty()) {
        tagger = std::make_shared<DictionaryPosTagger>(
            DictionaryPosTagger::load(config.substitution.tagger_dict));
    } else {
        tagger = std::make_shared<DictionaryPosTagger>(std::map<std::string, PosTag>{});
    }
    rt.segmenter = std::make_shared<Segmenter>(std::move(tagger));

    rt.lexicon = std::make_shared<SynonymLexicon>();
    if (!config.substitution.lexicon.empty()) {
        *rt.lexicon = SynonymLexicon::load(config.substitution.lexicon);
    }

    rt.plausibility = std::make_shared<AcceptAllPlausibility>();
    return rt;
}

} // namespace sico
