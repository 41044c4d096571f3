#pragma once

#include <memory>
#include <string>
#include <vector>

#include "sico/corpus.hpp"
#include "sico/detectors.hpp"

namespace sico {

/// Detector block of the run config.
struct DetectorConfig {
    std::string kind = "log_rank"; // log_rank|perplexity|detectgpt|remote|wordlist|ensemble
    std::string id;                // defaults to kind
    std::string endpoint;          // remote classifier (and first ensemble member)
    std::string endpoint2;         // second ensemble member
    std::string api_key;
    std::filesystem::path wordlist;
    CalibrationKind calibration = CalibrationKind::logistic;
    double calibration_a = 1.0;
    double calibration_b = 0.0;
    /// Fit the logistic map on the construction triplets' labeled outputs
    /// instead of using calibration_a/b.
    bool fit_on_triplets = false;
    bool use_raw_rank = false;
    PerturbationConfig perturbation;
    int timeout_ms = 30000;
    int retry_attempts = 3;
};

/// Mask filling through the generation LLM: asks for one replacement per
/// masked span, one per line. The paper-style binding would use a local
/// masked language model; this adapter keeps DetectGPT usable against a
/// chat-only backend and is fully record/replay-able.
class LlmMaskFill : public MaskFillModel {
public:
    explicit LlmMaskFill(LlmGateway& gateway);
    std::vector<std::string> fill(const std::string& masked_text, std::size_t mask_count,
                                  int sample_index, std::uint64_t seed) const override;

private:
    LlmGateway* gateway_;
};

/// Builds a detector from config. Statistical detectors score through the
/// gateway; when `fit_on_triplets` is set and calibration data is given, the
/// logistic map is fitted on the triplets' AI/human outputs and frozen.
std::shared_ptr<Detector> make_detector(const DetectorConfig& config, LlmGateway& gateway,
                                        const std::vector<TaskTriplet>* calibration_data);

} // namespace sico
