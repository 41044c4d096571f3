#pragma once

#include <filesystem>
#include <memory>
#include <set>
#include <string>
#include <vector>

#include "sico/calibration.hpp"
#include "sico/gateway.hpp"

namespace sico {

/// Raw score (oriented higher = more AI-like) plus the calibrated AI
/// probability Eq. consumers read.
struct DetectorVerdict {
    double raw_score = 0.0;
    double p_ai = 0.0;
    std::string detector_id;
};

class Detector {
public:
    virtual ~Detector() = default;
    virtual DetectorVerdict score(const std::string& text) const = 0;
    virtual const std::string& id() const = 0;
};

/// DetectGPT-style perturbation settings.
struct PerturbationConfig {
    int sample_count = 100;
    double replacement_ratio = 0.3;
    int span_length = 2;
    std::string mask_fill_model_id = "mask-fill";

    void validate() const;
};

/// Fills masked spans in a text. `sample_index` identifies the perturbation
/// being built (0-based); `seed` is a deterministic per-call seed derived
/// from the input text, so scoring stays reproducible for a fixed model.
class MaskFillModel {
public:
    virtual ~MaskFillModel() = default;
    virtual std::vector<std::string> fill(const std::string& masked_text,
                                          std::size_t mask_count, int sample_index,
                                          std::uint64_t seed) const = 0;
};

inline constexpr std::string_view kMaskMarkerPrefix = "<mask_";

/// Mask `replacement_ratio` of the word tokens of `text` in contiguous
/// `span_length`-token spans, replacing each span with "<mask_k>". Returns
/// the masked text and the number of masks. Exposed for tests.
std::pair<std::string, std::size_t> mask_spans(const std::string& text,
                                               const PerturbationConfig& config,
                                               std::uint64_t seed);

/// Mean log-rank statistic: raw = -(1/T) * sum(log rank_t). Smaller mean
/// log-rank means more AI-like, so the negation yields the higher-is-AI
/// orientation. `use_raw_rank` switches to -(1/T) * sum(rank_t).
class LogRankDetector : public Detector {
public:
    LogRankDetector(LlmGateway& gateway, CalibrationMap calibration,
                    bool use_raw_rank = false, std::string id = "log-rank");
    DetectorVerdict score(const std::string& text) const override;
    const std::string& id() const override { return id_; }

private:
    LlmGateway* gateway_;
    CalibrationMap calibration_;
    bool use_raw_rank_;
    std::string id_;
};

/// Mean token log-probability: raw = +(1/T) * sum(log_prob_t).
class PerplexityDetector : public Detector {
public:
    PerplexityDetector(LlmGateway& gateway, CalibrationMap calibration,
                       std::string id = "perplexity");
    DetectorVerdict score(const std::string& text) const override;
    const std::string& id() const override { return id_; }

private:
    LlmGateway* gateway_;
    CalibrationMap calibration_;
    std::string id_;
};

/// Perturbation z-score: (logp(x) - mean_i logp(x~_i)) / std_i logp(x~_i)
/// with the population standard deviation, replaced by 1e-6 when zero.
class DetectGptDetector : public Detector {
public:
    DetectGptDetector(LlmGateway& gateway, std::shared_ptr<const MaskFillModel> mask_fill,
                      PerturbationConfig config, CalibrationMap calibration,
                      std::string id = "detectgpt");
    DetectorVerdict score(const std::string& text) const override;
    const std::string& id() const override { return id_; }

private:
    LlmGateway* gateway_;
    std::shared_ptr<const MaskFillModel> mask_fill_;
    PerturbationConfig config_;
    CalibrationMap calibration_;
    std::string id_;
};

/// External classifier service: POST {"text": ...} -> {"p_ai": float}.
/// The returned probability is used as-is (identity calibration).
class RemoteClassifierDetector : public Detector {
public:
    explicit RemoteClassifierDetector(std::string endpoint, std::string api_key = "",
                                      int timeout_ms = 30000, int retry_attempts = 3,
                                      std::string id = "remote");
    DetectorVerdict score(const std::string& text) const override;
    const std::string& id() const override { return id_; }

private:
    std::string endpoint_;
    std::string api_key_;
    int timeout_ms_;
    int retry_attempts_;
    std::string id_;
};

/// Word-list proxy: p_ai = fraction of word tokens found in the list.
/// Deterministic and offline; used as the fixture proxy detector.
class WordlistDetector : public Detector {
public:
    explicit WordlistDetector(std::set<std::string> words, std::string id = "wordlist");
    static WordlistDetector load(const std::filesystem::path& path, std::string id = "wordlist");

    DetectorVerdict score(const std::string& text) const override;
    const std::string& id() const override { return id_; }

private:
    std::set<std::string> words_; // lowercased
    std::string id_;
};

/// Highest-probability combination of two verdicts.
DetectorVerdict ensemble_max(const DetectorVerdict& first, const DetectorVerdict& second);

class EnsembleMaxDetector : public Detector {
public:
    EnsembleMaxDetector(std::shared_ptr<const Detector> first,
                        std::shared_ptr<const Detector> second);
    DetectorVerdict score(const std::string& text) const override;
    const std::string& id() const override { return id_; }

private:
    std::shared_ptr<const Detector> first_;
    std::shared_ptr<const Detector> second_;
    std::string id_;
};

} // namespace sico
