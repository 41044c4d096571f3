#include "sico/detectors.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <thread>

#include <nlohmann/json.hpp>

#include "sico/errors.hpp"
#include "sico/hash.hpp"
#include "sico/http_gateway.hpp"
#include "sico/io_util.hpp"
#include "sico/segmentation.hpp"

namespace sico {

using nlohmann::json;

void PerturbationConfig::validate() const {
    if (sample_count < 2) {
        throw ValidationError("perturbation: sample_count must be >= 2");
    }
    if (!(replacement_ratio > 0.0 && replacement_ratio < 1.0)) {
        throw ValidationError("perturbation: replacement_ratio must be in (0, 1)");
    }
    if (span_length < 1) {
        throw ValidationError("perturbation: span_length must be >= 1");
    }
}

namespace {

double checked_probability(double p, const std::string& id) {
    if (!(p >= 0.0 && p <= 1.0)) {
        throw DetectorError(id + ": calibrated p_ai " + std::to_string(p) +
                            " outside [0, 1]; use logistic calibration for unbounded scores");
    }
    return p;
}

double sum_log_probs(const std::vector<TokenScore>& scores) {
    double total = 0.0;
    for (const auto& s : scores) total += s.log_prob;
    return total;
}

} // namespace

std::pair<std::string, std::size_t> mask_spans(const std::string& text,
                                               const PerturbationConfig& config,
                                               std::uint64_t seed) {
    const std::vector<Span> tokens = tokenize_word_spans(text);
    std::vector<std::size_t> word_indices;
    for (std::size_t i = 0; i < tokens.size(); ++i) {
        if (is_word_like(std::string_view(text).substr(tokens[i].begin, tokens[i].length()))) {
            word_indices.push_back(i);
        }
    }
    const std::size_t n = word_indices.size();
    if (n == 0) {
        return {text, 0};
    }
    const auto span_length = static_cast<std::size_t>(config.span_length);
    const std::size_t effective_span = std::min(span_length, n);
    const std::size_t target = static_cast<std::size_t>(
        std::ceil(config.replacement_ratio * static_cast<double>(n)));

    std::vector<std::size_t> starts;
    for (std::size_t s = 0; s + effective_span <= n; ++s) starts.push_back(s);

    SplitMix64 rng(seed);
    for (std::size_t i = starts.size(); i > 1; --i) {
        std::swap(starts[i - 1], starts[rng.next_below(i)]);
    }

    std::vector<bool> used(n, false);
    std::vector<std::pair<std::size_t, std::size_t>> chosen; // [first, last] word-index range
    std::size_t masked = 0;
    for (std::size_t s : starts) {
        if (masked >= target) break;
        bool free = true;
        for (std::size_t k = s; k < s + effective_span; ++k) {
            if (used[k]) {
                free = false;
                break;
            }
        }
        if (!free) continue;
        for (std::size_t k = s; k < s + effective_span; ++k) used[k] = true;
        chosen.emplace_back(s, s + effective_span - 1);
        masked += effective_span;
    }
    std::sort(chosen.begin(), chosen.end());

    std::string out;
    out.reserve(text.size());
    std::size_t cursor = 0;
    std::size_t mask_id = 0;
    for (const auto& [first, last] : chosen) {
        const std::size_t begin = tokens[word_indices[first]].begin;
        const std::size_t end = tokens[word_indices[last]].end;
        out.append(text, cursor, begin - cursor);
        out += std::string(kMaskMarkerPrefix) + std::to_string(mask_id++) + ">";
        cursor = end;
    }
    out.append(text, cursor, std::string::npos);
    return {out, chosen.size()};
}

LogRankDetector::LogRankDetector(LlmGateway& gateway, CalibrationMap calibration,
                                 bool use_raw_rank, std::string id)
    : gateway_(&gateway), calibration_(std::move(calibration)), use_raw_rank_(use_raw_rank),
      id_(std::move(id)) {}

DetectorVerdict LogRankDetector::score(const std::string& text) const {
    if (text.empty()) {
        throw DetectorError(id_ + ": empty text");
    }
    const std::vector<TokenScore> scores = gateway_->score_tokens(text);
    if (scores.empty()) {
        throw DetectorError(id_ + ": text has no scored tokens");
    }
    double total = 0.0;
    for (const auto& s : scores) {
        if (s.rank < 1) {
            throw DetectorError(id_ + ": scoring backend returned rank < 1");
        }
        total += use_raw_rank_ ? static_cast<double>(s.rank)
                               : std::log(static_cast<double>(s.rank));
    }
    const double raw = -total / static_cast<double>(scores.size());
    return {raw, checked_probability(calibration_.apply(raw), id_), id_};
}

PerplexityDetector::PerplexityDetector(LlmGateway& gateway, CalibrationMap calibration,
                                       std::string id)
    : gateway_(&gateway), calibration_(std::move(calibration)), id_(std::move(id)) {}

DetectorVerdict PerplexityDetector::score(const std::string& text) const {
    if (text.empty()) {
        throw DetectorError(id_ + ": empty text");
    }
    const std::vector<TokenScore> scores = gateway_->score_tokens(text);
    if (scores.empty()) {
        throw DetectorError(id_ + ": text has no scored tokens");
    }
    const double raw = sum_log_probs(scores) / static_cast<double>(scores.size());
    return {raw, checked_probability(calibration_.apply(raw), id_), id_};
}

DetectGptDetector::DetectGptDetector(LlmGateway& gateway,
                                     std::shared_ptr<const MaskFillModel> mask_fill,
                                     PerturbationConfig config, CalibrationMap calibration,
                                     std::string id)
    : gateway_(&gateway), mask_fill_(std::move(mask_fill)), config_(std::move(config)),
      calibration_(std::move(calibration)), id_(std::move(id)) {
    config_.validate();
}

DetectorVerdict DetectGptDetector::score(const std::string& text) const {
    if (!mask_fill_) {
        throw ConfigError(id_ + ": no mask-fill backend configured");
    }
    if (text.empty()) {
        throw DetectorError(id_ + ": empty text");
    }
    const std::vector<TokenScore> original = gateway_->score_tokens(text);
    if (original.empty()) {
        throw DetectorError(id_ + ": text has no scored tokens");
    }
    const double log_prob = sum_log_probs(original);

    const std::uint64_t base_seed = fnv1a64(text);
    std::vector<double> perturbed_log_probs;
    perturbed_log_probs.reserve(static_cast<std::size_t>(config_.sample_count));
    for (int i = 0; i < config_.sample_count; ++i) {
        const std::uint64_t seed = mix_seed(base_seed, static_cast<std::uint64_t>(i));
        auto [masked, mask_count] = mask_spans(text, config_, seed);
        std::string perturbed = masked;
        if (mask_count > 0) {
            const std::vector<std::string> fills =
                mask_fill_->fill(masked, mask_count, i, seed);
            if (fills.size() != mask_count) {
                throw DetectorError(id_ + ": mask-fill returned " +
                                    std::to_string(fills.size()) + " fills for " +
                                    std::to_string(mask_count) + " masks");
            }
            for (std::size_t k = 0; k < mask_count; ++k) {
                const std::string marker =
                    std::string(kMaskMarkerPrefix) + std::to_string(k) + ">";
                const auto pos = perturbed.find(marker);
                if (pos == std::string::npos) {
                    throw DetectorError(id_ + ": internal mask marker missing");
                }
                perturbed.replace(pos, marker.size(), fills[k]);
            }
        }
        perturbed_log_probs.push_back(sum_log_probs(gateway_->score_tokens(perturbed)));
    }

    double mean = 0.0;
    for (double v : perturbed_log_probs) mean += v;
    mean /= static_cast<double>(perturbed_log_probs.size());
    double variance = 0.0;
    for (double v : perturbed_log_probs) variance += (v - mean) * (v - mean);
    variance /= static_cast<double>(perturbed_log_probs.size()); // population
    double std_dev = std::sqrt(variance);
    if (std_dev == 0.0) {
        std_dev = 1e-6;
    }
    const double raw = (log_prob - mean) / std_dev;
    return {raw, checked_probability(calibration_.apply(raw), id_), id_};
}

RemoteClassifierDetector::RemoteClassifierDetector(std::string endpoint, std::string api_key,
                                                   int timeout_ms, int retry_attempts,
                                                   std::string id)
    : endpoint_(std::move(endpoint)), api_key_(std::move(api_key)), timeout_ms_(timeout_ms),
      retry_attempts_(retry_attempts), id_(std::move(id)) {
    if (endpoint_.empty()) {
        throw ConfigError(id_ + ": endpoint not configured");
    }
}

DetectorVerdict RemoteClassifierDetector::score(const std::string& text) const {
    const json body = {{"text", text}};
    std::string response;
    int delay_ms = 100;
    for (int attempt = 1;; ++attempt) {
        try {
            response = http_post_json(endpoint_, body.dump(), api_key_, timeout_ms_);
            break;
        } catch (const TransportError& e) {
            if (attempt >= retry_attempts_) {
                throw DetectorError(id_ + ": " + e.what());
            }
            std::this_thread::sleep_for(std::chrono::milliseconds(delay_ms));
            delay_ms *= 2;
        }
    }
    json doc = json::parse(response, nullptr, false);
    if (doc.is_discarded() || !doc.is_object() || !doc.contains("p_ai") ||
        !doc["p_ai"].is_number()) {
        throw DetectorError(id_ + ": response missing numeric \"p_ai\"");
    }
    const double p = doc["p_ai"].get<double>();
    if (!(p >= 0.0 && p <= 1.0)) {
        throw DetectorError(id_ + ": p_ai " + std::to_string(p) + " outside [0, 1]");
    }
    return {p, p, id_};
}

WordlistDetector::WordlistDetector(std::set<std::string> words, std::string id)
    : words_(std::move(words)), id_(std::move(id)) {}

WordlistDetector WordlistDetector::load(const std::filesystem::path& path, std::string id) {
    std::set<std::string> words;
    for (const std::string& line : split_lines(read_file(path))) {
        const std::string w = trim(line);
        if (!w.empty() && w.front() != '#') {
            words.insert(to_lower(w));
        }
    }
    if (words.empty()) {
        throw ValidationError(path.string() + ": empty word list");
    }
    return WordlistDetector(std::move(words), std::move(id));
}

DetectorVerdict WordlistDetector::score(const std::string& text) const {
    std::size_t total = 0;
    std::size_t hits = 0;
    for (const std::string& token : tokenize_words(text)) {
        if (!is_word_like(token)) continue;
        ++total;
        if (words_.count(to_lower(token)) > 0) ++hits;
    }
    if (total == 0) {
        throw DetectorError(id_ + ": no word tokens in text");
    }
    const double p = static_cast<double>(hits) / static_cast<double>(total);
    return {p, p, id_};
}

DetectorVerdict ensemble_max(const DetectorVerdict& first, const DetectorVerdict& second) {
    auto check = [](const DetectorVerdict& v) {
        if (!(v.p_ai >= 0.0 && v.p_ai <= 1.0)) {
            throw DetectorError("ensemble: constituent p_ai outside [0, 1]");
        }
    };
    check(first);
    check(second);
    DetectorVerdict out;
    out.p_ai = std::max(first.p_ai, second.p_ai);
    out.raw_score = out.p_ai;
    out.detector_id = "max(" + first.detector_id + "," + second.detector_id + ")";
    return out;
}

EnsembleMaxDetector::EnsembleMaxDetector(std::shared_ptr<const Detector> first,
                                         std::shared_ptr<const Detector> second)
    : first_(std::move(first)), second_(std::move(second)) {
    if (!first_ || !second_) {
        throw ConfigError("ensemble: two constituent detectors are required");
    }
    id_ = "max(" + first_->id() + "," + second_->id() + ")";
}

DetectorVerdict EnsembleMaxDetector::score(const std::string& text) const {
    return ensemble_max(first_->score(text), second_->score(text));
}

} // namespace sico
