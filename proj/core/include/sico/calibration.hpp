#pragma once

#include <string_view>
#include <vector>

namespace sico {

enum class CalibrationKind { identity, logistic };

CalibrationKind calibration_kind_from_string(std::string_view s);
std::string_view to_string(CalibrationKind kind);

/// Maps a detector's raw score to an AI probability. Identity is only valid
/// when raw scores already live in [0, 1]; the logistic map is
/// p = 1 / (1 + exp(-(a*s + b))) with a > 0, so calibrated probabilities are
/// non-decreasing in the raw score.
struct CalibrationMap {
    CalibrationKind kind = CalibrationKind::identity;
    double slope = 1.0;     // a
    double intercept = 0.0; // b

    double apply(double raw_score) const;
    void validate() const;

    bool operator==(const CalibrationMap&) const = default;
};

/// Maximum-likelihood logistic fit of P(ai | score) on the pooled labeled
/// scores (ai = 1, human = 0), with a tiny L2 penalty so separable data stays
/// finite. Requires >= 2 scores per class, distinct class means, and scores
/// oriented higher = more AI-like (otherwise the fitted slope would not be
/// positive and the fit is rejected).
CalibrationMap fit_calibration(const std::vector<double>& ai_scores,
                               const std::vector<double>& human_scores);

} // namespace sico
