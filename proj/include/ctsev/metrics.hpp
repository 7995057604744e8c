#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "ctsev/canonical_json.hpp"
#include "ctsev/prediction.hpp"

namespace ctsev {

/// Mann-Whitney AUC: (wins + ties / 2) / (n_pos * n_neg) over all
/// positive/negative pairs, computed by sorting with exact integer pair
/// counts. Labels are 0/1. Throws UndefinedMetricError for single-class input.
double roc_auc(std::span<const double> scores, std::span<const int> labels);

struct RocPoint {
    double threshold = 0.0; // +inf for the (0, 0) start
    double fpr = 0.0;
    double tpr = 0.0;
};

/// One point per distinct score (descending), preceded by (0, 0); the last
/// point is always (1, 1).
std::vector<RocPoint> roc_points(std::span<const double> scores, std::span<const int> labels);

double trapezoid_area(std::span<const RocPoint> points);

/// CSV `threshold,fpr,tpr`.
std::string render_roc_csv(std::span<const RocPoint> points);

struct ClassMetrics {
    std::string name;
    std::int64_t tp = 0, fp = 0, fn = 0, tn = 0;
    double accuracy = 0.0;
    double f1 = 0.0;
    double auc = 0.0;
};

/// Per-class one-vs-rest metrics under argmax assignment, plus the pooled
/// task AUCs that are available.
struct EvalReport {
    std::size_t n = 0;
    std::vector<ClassMetrics> classes;
    std::optional<double> infection_auc;      // 1 - P(Negative) vs. infected
    std::optional<double> severe_outcome_auc; // severity detector
};

/// 2TP / (2TP + FP + FN), 0 when the denominator is 0.
double f1_score(std::int64_t tp, std::int64_t fp, std::int64_t fn);

/// Index of the largest entry, lowest index on ties.
std::size_t argmax(std::span<const double> v);

/// Predicted class = argmax (lowest index on ties). Per class c:
/// accuracy = (TP + TN) / n, F1 = 2TP / (2TP + FP + FN) (0 when the
/// denominator is 0), AUC = roc_auc(P(c), truth == c). Presence predictions
/// also fill infection_auc, severity predictions severe_outcome_auc.
EvalReport multiclass_report(std::span<const Prediction> preds, std::span<const int> truths);

Json to_json(const EvalReport& report);

/// Aligned text table: per-class Acc./F1/AUC, then the task AUC block.
std::string render_table(const EvalReport& report);

} // namespace ctsev
