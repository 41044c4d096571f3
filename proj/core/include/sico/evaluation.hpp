#pragma once

#include <string>
#include <vector>

#include "sico/gateway.hpp"

namespace sico {

/// Detector scores for one (detector, evasion method) cell, oriented
/// higher = more AI-like.
struct ScoreSet {
    std::vector<double> human_scores;
    std::vector<double> ai_scores;
    std::string detector_id;
    std::string method_id; // e.g. "none", "sico-para"
};

/// Mann-Whitney AUC with half credit for ties; equals the trapezoidal area
/// under the ROC curve.
double auc(const ScoreSet& scores);

/// ROC polyline swept over the union of observed scores (predicate:
/// score >= threshold), sorted by FPR, including (0,0) and (1,1).
std::vector<std::pair<double, double>> roc_points(const ScoreSet& scores);

double polyline_area(const std::vector<std::pair<double, double>>& points);

/// Minimal threshold t with fraction(human > t) <= fpr_target; -infinity
/// when every threshold qualifies (accept-all sentinel).
double threshold_at_fpr(const std::vector<double>& human_scores, double fpr_target = 0.05);

/// Maximal observed threshold t with fraction(ai_baseline > t) >= tpr_target;
/// -infinity when no observed score qualifies.
double threshold_at_tpr(const std::vector<double>& ai_baseline_scores,
                        double tpr_target = 0.9);

/// Fraction of scores strictly above the threshold.
double detection_rate(const std::vector<double>& scores, double threshold);

class SentenceEncoder {
public:
    virtual ~SentenceEncoder() = default;
    virtual std::vector<double> encode(const std::string& text) const = 0;
};

/// Cosine similarity of the two embeddings, in [-1, 1].
double semantic_similarity(const std::string& a, const std::string& b,
                           const SentenceEncoder& encoder);

struct SimilarityStat {
    std::string method_id;
    double mean_similarity = 0.0;
    std::size_t count = 0;
};

struct ReportRow {
    std::string detector_id;
    std::string method_id;
    double auc = 0.0;
    double high_threshold = 0.0; // FPR-anchored
    double low_threshold = 0.0;  // TPR-anchored on the baseline AI scores
    double detection_rate_high = 0.0;
    double detection_rate_low = 0.0;
};

struct Report {
    std::vector<ReportRow> rows;
    std::vector<SimilarityStat> similarity;
    CostLedgerSnapshot cost;
};

/// Assembles the AUC/detection-rate matrix. Thresholds are fixed per
/// detector from its baseline set (method "none" when present, otherwise the
/// detector's first set): the high threshold pins FPR on the baseline human
/// scores, the low threshold pins TPR on the baseline AI scores.
Report build_report(const std::vector<ScoreSet>& score_sets,
                    const std::vector<SimilarityStat>& similarity_stats,
                    const CostLedgerSnapshot& ledger);

std::string report_to_json(const Report& report);
Report report_from_json(const std::string& json_text);
std::string report_to_table(const Report& report);
std::string auc_matrix_csv(const Report& report);
std::string roc_csv(const std::vector<std::pair<double, double>>& points);

std::string score_set_to_json(const ScoreSet& scores);
ScoreSet score_set_from_json(const std::string& json_text);

} // namespace sico
