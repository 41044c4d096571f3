#pragma once

#include <memory>

#include "sico/config.hpp"
#include "sico/detector_factory.hpp"
#include "sico/gateway.hpp"
#include "sico/lexicon.hpp"
#include "sico/segmentation.hpp"
#include "sico/substitution.hpp"

namespace sico {

/// Long-lived objects a run needs, wired from an AppConfig.
struct Runtime {
    std::shared_ptr<LlmGateway> gateway;
    std::shared_ptr<Segmenter> segmenter;
    std::shared_ptr<SynonymLexicon> lexicon;
    std::shared_ptr<PlausibilityFilter> plausibility;
};

/// Builds backends and shared components from config. Explicit backends
/// (tests, fixture tooling) win over config-derived HTTP ones; in replay
/// mode no live backend is required at all. The API key and base URL fall
/// back to the SICO_API_KEY / SICO_BASE_URL environment variables.
Runtime build_runtime(const AppConfig& config,
                      std::shared_ptr<GenerationBackend> generation_override = nullptr,
                      std::shared_ptr<ScoringBackend> scoring_override = nullptr);

} // namespace sico
