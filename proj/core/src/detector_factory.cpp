#include "sico/detector_factory.hpp"

#include "sico/errors.hpp"
#include "sico/io_util.hpp"

namespace sico {

LlmMaskFill::LlmMaskFill(LlmGateway& gateway) : gateway_(&gateway) {}

std::vector<std::string> LlmMaskFill::fill(const std::string& masked_text,
                                           std::size_t mask_count, int sample_index,
                                           std::uint64_t) const {
    std::string prompt =
        "Replace every <mask_k> marker in the text below with fluent words that fit the "
        "context. Reply with one replacement per line, in marker order, and nothing else.\n\n";
    prompt += masked_text;

    GenerationRequest request;
    request.prompt = std::move(prompt);
    request.temperature = 1.0; // sampled fills
    request.sample_index = sample_index;
    const std::string response = gateway_->generate(request);
    std::vector<std::string> fills;
    for (const std::string& line : split_lines(response)) {
        const std::string fill = trim(line);
        if (!fill.empty()) {
            fills.push_back(fill);
        }
        if (fills.size() == mask_count) break;
    }
    if (fills.size() != mask_count) {
        throw DetectorError("mask fill: model returned " + std::to_string(fills.size()) +
                            " replacements for " + std::to_string(mask_count) + " masks");
    }
    return fills;
}

namespace {

CalibrationMap calibration_from(const DetectorConfig& config) {
    if (config.calibration == CalibrationKind::identity) {
        return {CalibrationKind::identity, 1.0, 0.0};
    }
    CalibrationMap map{CalibrationKind::logistic, config.calibration_a, config.calibration_b};
    map.validate();
    return map;
}

/// Raw-score a detector over the triplets' labeled outputs and fit the
/// logistic calibration on them.
CalibrationMap fit_from_triplets(const Detector& raw_detector,
                                 const std::vector<TaskTriplet>& triplets) {
    std::vector<double> ai_scores;
    std::vector<double> human_scores;
    for (const auto& t : triplets) {
        ai_scores.push_back(raw_detector.score(t.ai_output).raw_score);
        human_scores.push_back(raw_detector.score(t.human_output).raw_score);
    }
    return fit_calibration(ai_scores, human_scores);
}

template <typename Make>
std::shared_ptr<Detector> build_calibrated(const DetectorConfig& config, const Make& make,
                                           const std::vector<TaskTriplet>* calibration_data) {
    CalibrationMap map = calibration_from(config);
    if (config.calibration == CalibrationKind::logistic && config.fit_on_triplets) {
        if (!calibration_data || calibration_data->size() < 2) {
            throw ConfigError("detector: fit_on_triplets needs at least 2 triplets");
        }
        // Score with a throwaway logistic map; raw scores ignore calibration.
        const auto probe = make(CalibrationMap{CalibrationKind::logistic, 1.0, 0.0});
        map = fit_from_triplets(*probe, *calibration_data);
    }
    return make(map);
}

} // namespace

std::shared_ptr<Detector> make_detector(const DetectorConfig& config, LlmGateway& gateway,
                                        const std::vector<TaskTriplet>* calibration_data) {
    const std::string id = config.id.empty() ? config.kind : config.id;

    if (config.kind == "wordlist") {
        if (config.wordlist.empty()) {
            throw ConfigError("detector: wordlist kind needs detector.wordlist = <path>");
        }
        return std::make_shared<WordlistDetector>(WordlistDetector::load(config.wordlist, id));
    }
    if (config.kind == "remote") {
        return std::make_shared<RemoteClassifierDetector>(config.endpoint, config.api_key,
                                                          config.timeout_ms,
                                                          config.retry_attempts, id);
    }
    if (config.kind == "ensemble") {
        if (config.endpoint.empty() || config.endpoint2.empty()) {
            throw ConfigError(
                "detector: ensemble kind needs detector.endpoint and detector.endpoint2");
        }
        auto first = std::make_shared<RemoteClassifierDetector>(
            config.endpoint, config.api_key, config.timeout_ms, config.retry_attempts,
            id + "-1");
        auto second = std::make_shared<RemoteClassifierDetector>(
            config.endpoint2, config.api_key, config.timeout_ms, config.retry_attempts,
            id + "-2");
        return std::make_shared<EnsembleMaxDetector>(std::move(first), std::move(second));
    }
    if (config.kind == "log_rank") {
        return build_calibrated(
            config,
            [&](CalibrationMap map) {
                return std::make_shared<LogRankDetector>(gateway, std::move(map),
                                                         config.use_raw_rank, id);
            },
            calibration_data);
    }
    if (config.kind == "perplexity") {
        return build_calibrated(
            config,
            [&](CalibrationMap map) {
                return std::make_shared<PerplexityDetector>(gateway, std::move(map), id);
            },
            calibration_data);
    }
    if (config.kind == "detectgpt") {
        auto mask_fill = std::make_shared<LlmMaskFill>(gateway);
        return build_calibrated(
            config,
            [&](CalibrationMap map) {
                return std::make_shared<DetectGptDetector>(gateway, mask_fill,
                                                           config.perturbation,
                                                           std::move(map), id);
            },
            calibration_data);
    }
    throw ConfigError("detector: unknown kind \"" + config.kind +
                      "\" (expected log_rank|perplexity|detectgpt|remote|wordlist|ensemble)");
}

} // namespace sico
