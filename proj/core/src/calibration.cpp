#include "sico/calibration.hpp"

#include <cmath>
#include <numeric>

#include "sico/errors.hpp"

namespace sico {

CalibrationKind calibration_kind_from_string(std::string_view s) {
    if (s == "identity") return CalibrationKind::identity;
    if (s == "logistic") return CalibrationKind::logistic;
    throw ValidationError("unknown calibration kind: \"" + std::string(s) +
                          "\" (expected identity|logistic)");
}

std::string_view to_string(CalibrationKind kind) {
    return kind == CalibrationKind::identity ? "identity" : "logistic";
}

namespace {

double sigmoid(double z) {
    if (z >= 0) {
        return 1.0 / (1.0 + std::exp(-std::min(z, 500.0)));
    }
    const double e = std::exp(std::max(z, -500.0));
    return e / (1.0 + e);
}

double mean(const std::vector<double>& xs) {
    return std::accumulate(xs.begin(), xs.end(), 0.0) / static_cast<double>(xs.size());
}

} // namespace

double CalibrationMap::apply(double raw_score) const {
    if (kind == CalibrationKind::identity) {
        return raw_score;
    }
    return sigmoid(slope * raw_score + intercept);
}

void CalibrationMap::validate() const {
    if (kind == CalibrationKind::logistic && slope <= 0.0) {
        throw ValidationError("calibration: logistic slope must be > 0");
    }
}

CalibrationMap fit_calibration(const std::vector<double>& ai_scores,
                               const std::vector<double>& human_scores) {
    if (ai_scores.size() < 2 || human_scores.size() < 2) {
        throw ValidationError("calibration fit: need at least 2 scores per class");
    }
    const double ai_mean = mean(ai_scores);
    const double human_mean = mean(human_scores);
    if (ai_mean == human_mean) {
        throw ValidationError("calibration fit: degenerate separation (equal class means)");
    }

    // Newton iterations on the penalized log-likelihood. lambda keeps the
    // Hessian invertible under perfect separation.
    constexpr double kLambda = 1e-6;
    constexpr int kMaxIterations = 200;
    constexpr double kTolerance = 1e-12;
    constexpr double kMaxStep = 10.0;

    std::vector<std::pair<double, int>> data;
    data.reserve(ai_scores.size() + human_scores.size());
    for (double s : ai_scores) data.emplace_back(s, 1);
    for (double s : human_scores) data.emplace_back(s, 0);

    double a = 0.0;
    double b = 0.0;
    for (int iter = 0; iter < kMaxIterations; ++iter) {
        double ga = -kLambda * a;
        double gb = -kLambda * b;
        double haa = kLambda;
        double hab = 0.0;
        double hbb = kLambda;
        for (const auto& [s, y] : data) {
            const double p = sigmoid(a * s + b);
            const double r = static_cast<double>(y) - p;
            ga += r * s;
            gb += r;
            const double w = p * (1.0 - p);
            haa += w * s * s;
            hab += w * s;
            hbb += w;
        }
        const double det = haa * hbb - hab * hab;
        if (det <= 0.0) break;
        double da = (hbb * ga - hab * gb) / det;
        double db = (haa * gb - hab * ga) / det;
        const double norm = std::sqrt(da * da + db * db);
        if (norm > kMaxStep) {
            da *= kMaxStep / norm;
            db *= kMaxStep / norm;
        }
        a += da;
        b += db;
        if (norm < kTolerance) break;
    }

    if (!(a > 0.0)) {
        throw ValidationError(
            "calibration fit: non-positive slope; scores are not oriented higher = more AI");
    }
    return {CalibrationKind::logistic, a, b};
}

} // namespace sico
