#pragma once

#include <filesystem>
#include <string>

#include "sico/detector_factory.hpp"
#include "sico/gateway.hpp"
#include "sico/optimizer.hpp"

namespace sico {

struct ScoringConfig {
    std::string base_url;
    std::string model_id = "gpt2-medium";
};

struct SubstitutionConfig {
    std::filesystem::path lexicon;
    std::filesystem::path tagger_dict;
};

struct DataConfig {
    std::filesystem::path triplets;
    std::filesystem::path eval_inputs;
};

/// Everything a run needs, sectioned like the config file. Field defaults are
/// the experimental defaults (k=8, iterations=6, eval_size=32,
/// feature_count=5, DetectGPT sample_count=100 / replacement_ratio=0.3).
struct AppConfig {
    RunConfig run;
    GatewayConfig gateway;
    std::string gateway_base_url;
    std::string api_key;
    std::filesystem::path price_table;
    ScoringConfig scoring;
    DetectorConfig detector;
    SubstitutionConfig substitution;
    DataConfig data;
};

AppConfig default_app_config();

/// Parses the sectioned key = value config format. Unknown keys are errors
/// naming the key; relative paths resolve against the config file's
/// directory.
AppConfig load_app_config(const std::filesystem::path& path);

/// Same parser over an in-memory string; `base_dir` anchors relative paths.
AppConfig parse_app_config(const std::string& text, const std::filesystem::path& base_dir);

/// Applies one "section.key=value" override (CLI --set).
void apply_override(AppConfig& config, const std::string& assignment,
                    const std::filesystem::path& base_dir);

} // namespace sico
