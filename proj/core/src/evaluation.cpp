#include "sico/evaluation.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>
#include <sstream>

#include <nlohmann/json.hpp>

#include "sico/errors.hpp"

namespace sico {

using nlohmann::json;

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

void require_non_empty(const ScoreSet& scores) {
    if (scores.human_scores.empty() || scores.ai_scores.empty()) {
        throw ValidationError("score set \"" + scores.detector_id + "/" + scores.method_id +
                              "\": both classes must be non-empty");
    }
}

} // namespace

double auc(const ScoreSet& scores) {
    require_non_empty(scores);
    // Rank-sum formulation with average ranks for ties; O((m+n) log (m+n)).
    struct Item {
        double score;
        bool is_ai;
    };
    std::vector<Item> items;
    items.reserve(scores.human_scores.size() + scores.ai_scores.size());
    for (double s : scores.human_scores) items.push_back({s, false});
    for (double s : scores.ai_scores) items.push_back({s, true});
    std::sort(items.begin(), items.end(),
              [](const Item& a, const Item& b) { return a.score < b.score; });

    const double m = static_cast<double>(scores.ai_scores.size());
    const double n = static_cast<double>(scores.human_scores.size());
    double rank_sum_ai = 0.0;
    std::size_t i = 0;
    while (i < items.size()) {
        std::size_t j = i;
        while (j < items.size() && items[j].score == items[i].score) ++j;
        const double average_rank = (static_cast<double>(i + 1) + static_cast<double>(j)) / 2.0;
        for (std::size_t k = i; k < j; ++k) {
            if (items[k].is_ai) rank_sum_ai += average_rank;
        }
        i = j;
    }
    const double u = rank_sum_ai - m * (m + 1.0) / 2.0;
    return u / (m * n);
}

std::vector<std::pair<double, double>> roc_points(const ScoreSet& scores) {
    require_non_empty(scores);
    std::set<double, std::greater<double>> thresholds(scores.human_scores.begin(),
                                                      scores.human_scores.end());
    thresholds.insert(scores.ai_scores.begin(), scores.ai_scores.end());

    auto fraction_at_least = [](const std::vector<double>& xs, double t) {
        std::size_t count = 0;
        for (double x : xs) {
            if (x >= t) ++count;
        }
        return static_cast<double>(count) / static_cast<double>(xs.size());
    };

    std::vector<std::pair<double, double>> points;
    points.emplace_back(0.0, 0.0);
    for (double t : thresholds) {
        const double fpr = fraction_at_least(scores.human_scores, t);
        const double tpr = fraction_at_least(scores.ai_scores, t);
        if (points.back() != std::make_pair(fpr, tpr)) {
            points.emplace_back(fpr, tpr);
        }
    }
    if (points.back() != std::make_pair(1.0, 1.0)) {
        points.emplace_back(1.0, 1.0);
    }
    return points;
}

double polyline_area(const std::vector<std::pair<double, double>>& points) {
    double area = 0.0;
    for (std::size_t i = 1; i < points.size(); ++i) {
        const auto& [x0, y0] = points[i - 1];
        const auto& [x1, y1] = points[i];
        area += (x1 - x0) * (y0 + y1) / 2.0;
    }
    return area;
}

double detection_rate(const std::vector<double>& scores, double threshold) {
    if (scores.empty()) {
        throw ValidationError("detection rate: empty score list");
    }
    std::size_t count = 0;
    for (double s : scores) {
        if (s > threshold) ++count;
    }
    return static_cast<double>(count) / static_cast<double>(scores.size());
}

double threshold_at_fpr(const std::vector<double>& human_scores, double fpr_target) {
    if (human_scores.empty()) {
        throw ValidationError("threshold_at_fpr: empty score list");
    }
    if (detection_rate(human_scores, -kInf) <= fpr_target) {
        return -kInf; // every threshold qualifies: accept-all sentinel
    }
    std::vector<double> sorted(human_scores);
    std::sort(sorted.begin(), sorted.end());
    sorted.erase(std::unique(sorted.begin(), sorted.end()), sorted.end());
    for (double t : sorted) {
        if (detection_rate(human_scores, t) <= fpr_target) {
            return t;
        }
    }
    return sorted.back(); // unreachable: the max score always gives rate 0
}

double threshold_at_tpr(const std::vector<double>& ai_baseline_scores, double tpr_target) {
    if (ai_baseline_scores.empty()) {
        throw ValidationError("threshold_at_tpr: empty score list");
    }
    std::vector<double> sorted(ai_baseline_scores);
    std::sort(sorted.begin(), sorted.end(), std::greater<double>());
    sorted.erase(std::unique(sorted.begin(), sorted.end()), sorted.end());
    for (double t : sorted) {
        if (detection_rate(ai_baseline_scores, t) >= tpr_target) {
            return t;
        }
    }
    return -kInf;
}

double semantic_similarity(const std::string& a, const std::string& b,
                           const SentenceEncoder& encoder) {
    const std::vector<double> va = encoder.encode(a);
    const std::vector<double> vb = encoder.encode(b);
    if (va.size() != vb.size() || va.empty()) {
        throw ValidationError("semantic similarity: encoder returned mismatched dimensions");
    }
    double dot = 0.0;
    double na = 0.0;
    double nb = 0.0;
    for (std::size_t i = 0; i < va.size(); ++i) {
        dot += va[i] * vb[i];
        na += va[i] * va[i];
        nb += vb[i] * vb[i];
    }
    if (na == 0.0 || nb == 0.0) {
        throw ValidationError("semantic similarity: zero-norm embedding");
    }
    return dot / (std::sqrt(na) * std::sqrt(nb));
}

Report build_report(const std::vector<ScoreSet>& score_sets,
                    const std::vector<SimilarityStat>& similarity_stats,
                    const CostLedgerSnapshot& ledger) {
    Report report;
    report.similarity = similarity_stats;
    report.cost = ledger;

    auto baseline_for = [&](const std::string& detector_id) -> const ScoreSet* {
        const ScoreSet* first = nullptr;
        for (const auto& s : score_sets) {
            if (s.detector_id != detector_id) continue;
            if (s.method_id == "none") return &s;
            if (!first) first = &s;
        }
        return first;
    };

    for (const auto& set : score_sets) {
        const ScoreSet* baseline = baseline_for(set.detector_id);
        ReportRow row;
        row.detector_id = set.detector_id;
        row.method_id = set.method_id;
        row.auc = auc(set);
        row.high_threshold = threshold_at_fpr(baseline->human_scores);
        row.low_threshold = threshold_at_tpr(baseline->ai_scores);
        row.detection_rate_high = detection_rate(set.ai_scores, row.high_threshold);
        row.detection_rate_low = detection_rate(set.ai_scores, row.low_threshold);
        report.rows.push_back(std::move(row));
    }
    return report;
}

namespace {

json row_to_json(const ReportRow& row) {
    return {{"detector_id", row.detector_id},
            {"method_id", row.method_id},
            {"auc", row.auc},
            {"high_threshold", row.high_threshold},
            {"low_threshold", row.low_threshold},
            {"detection_rate_high", row.detection_rate_high},
            {"detection_rate_low", row.detection_rate_low}};
}

double json_number(const json& value) {
    // -inf round-trips as null in JSON.
    if (value.is_null()) return -kInf;
    return value.get<double>();
}

json number_to_json(double value) {
    if (std::isinf(value) && value < 0) return nullptr;
    return value;
}

} // namespace

std::string report_to_json(const Report& report) {
    json rows = json::array();
    for (const auto& row : report.rows) {
        json r = row_to_json(row);
        r["high_threshold"] = number_to_json(row.high_threshold);
        r["low_threshold"] = number_to_json(row.low_threshold);
        rows.push_back(std::move(r));
    }
    json similarity = json::array();
    for (const auto& s : report.similarity) {
        similarity.push_back({{"method_id", s.method_id},
                              {"mean_similarity", s.mean_similarity},
                              {"count", s.count}});
    }
    const json doc = {{"rows", rows},
                      {"similarity", similarity},
                      {"cost",
                       {{"calls", report.cost.calls},
                        {"input_tokens", report.cost.input_tokens},
                        {"output_tokens", report.cost.output_tokens},
                        {"estimated_cost", report.cost.estimated_cost}}}};
    return doc.dump(2) + "\n";
}

Report report_from_json(const std::string& json_text) {
    json doc = json::parse(json_text, nullptr, false);
    if (doc.is_discarded() || !doc.is_object()) {
        throw ParseError("report: malformed JSON");
    }
    try {
        Report report;
        for (const auto& r : doc.at("rows")) {
            ReportRow row;
            row.detector_id = r.at("detector_id").get<std::string>();
            row.method_id = r.at("method_id").get<std::string>();
            row.auc = r.at("auc").get<double>();
            row.high_threshold = json_number(r.at("high_threshold"));
            row.low_threshold = json_number(r.at("low_threshold"));
            row.detection_rate_high = r.at("detection_rate_high").get<double>();
            row.detection_rate_low = r.at("detection_rate_low").get<double>();
            report.rows.push_back(std::move(row));
        }
        for (const auto& s : doc.at("similarity")) {
            report.similarity.push_back({s.at("method_id").get<std::string>(),
                                         s.at("mean_similarity").get<double>(),
                                         s.at("count").get<std::size_t>()});
        }
        const auto& cost = doc.at("cost");
        report.cost.calls = cost.at("calls").get<std::uint64_t>();
        report.cost.input_tokens = cost.at("input_tokens").get<std::uint64_t>();
        report.cost.output_tokens = cost.at("output_tokens").get<std::uint64_t>();
        report.cost.estimated_cost = cost.at("estimated_cost").get<double>();
        return report;
    } catch (const json::exception& e) {
        throw ParseError(std::string("report: ") + e.what());
    }
}

std::string report_to_table(const Report& report) {
    std::ostringstream out;
    out << "detector              method          AUC     rate@FPR=0.05  rate@TPR=0.90\n";
    for (const auto& row : report.rows) {
        char line[160];
        std::snprintf(line, sizeof(line), "%-20s  %-14s  %.4f  %12.1f%%  %12.1f%%\n",
                      row.detector_id.c_str(), row.method_id.c_str(), row.auc,
                      row.detection_rate_high * 100.0, row.detection_rate_low * 100.0);
        out << line;
    }
    if (!report.similarity.empty()) {
        out << "\nmethod          mean similarity (n)\n";
        for (const auto& s : report.similarity) {
            char line[120];
            std::snprintf(line, sizeof(line), "%-14s  %.4f (%zu)\n", s.method_id.c_str(),
                          s.mean_similarity, s.count);
            out << line;
        }
    }
    char cost_line[160];
    std::snprintf(cost_line, sizeof(cost_line),
                  "\ncost: %llu calls, %llu input tokens, %llu output tokens, %.4f USD\n",
                  static_cast<unsigned long long>(report.cost.calls),
                  static_cast<unsigned long long>(report.cost.input_tokens),
                  static_cast<unsigned long long>(report.cost.output_tokens),
                  report.cost.estimated_cost);
    out << cost_line;
    return out.str();
}

std::string auc_matrix_csv(const Report& report) {
    std::ostringstream out;
    out << "detector_id,method_id,auc,detection_rate_high,detection_rate_low\n";
    for (const auto& row : report.rows) {
        out << row.detector_id << ',' << row.method_id << ',' << row.auc << ','
            << row.detection_rate_high << ',' << row.detection_rate_low << '\n';
    }
    return out.str();
}

std::string roc_csv(const std::vector<std::pair<double, double>>& points) {
    std::ostringstream out;
    out << "fpr,tpr\n";
    for (const auto& [fpr, tpr] : points) {
        out << fpr << ',' << tpr << '\n';
    }
    return out.str();
}

std::string score_set_to_json(const ScoreSet& scores) {
    const json doc = {{"detector_id", scores.detector_id},
                      {"method_id", scores.method_id},
                      {"human_scores", scores.human_scores},
                      {"ai_scores", scores.ai_scores}};
    return doc.dump(2) + "\n";
}

ScoreSet score_set_from_json(const std::string& json_text) {
    json doc = json::parse(json_text, nullptr, false);
    if (doc.is_discarded() || !doc.is_object()) {
        throw ParseError("score set: malformed JSON");
    }
    try {
        ScoreSet out;
        out.detector_id = doc.at("detector_id").get<std::string>();
        out.method_id = doc.at("method_id").get<std::string>();
        out.human_scores = doc.at("human_scores").get<std::vector<double>>();
        out.ai_scores = doc.at("ai_scores").get<std::vector<double>>();
        return out;
    } catch (const json::exception& e) {
        throw ParseError(std::string("score set: ") + e.what());
    }
}

} // namespace sico
