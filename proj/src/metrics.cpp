#include "ctsev/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <numeric>

#include "ctsev/errors.hpp"

namespace ctsev {

namespace {

void check_binary_input(std::span<const double> scores, std::span<const int> labels) {
    if (scores.size() != labels.size()) throw InvalidArgument("scores and labels differ in length");
    for (int l : labels)
        if (l != 0 && l != 1) throw InvalidArgument("labels must be 0 or 1");
    for (double s : scores)
        if (!std::isfinite(s)) throw InvalidArgument("scores must be finite");
}

std::vector<std::size_t> order_descending(std::span<const double> scores) {
    std::vector<std::size_t> order(scores.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return scores[a] > scores[b]; });
    return order;
}

} // namespace

double roc_auc(std::span<const double> scores, std::span<const int> labels) {
    check_binary_input(scores, labels);
    const auto n_pos = static_cast<std::int64_t>(std::count(labels.begin(), labels.end(), 1));
    const auto n_neg = static_cast<std::int64_t>(labels.size()) - n_pos;
    if (n_pos == 0 || n_neg == 0) throw UndefinedMetricError("AUC undefined: labels contain a single class");

    std::vector<std::size_t> order(scores.size());
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return scores[a] < scores[b]; });

    // Twice the Mann-Whitney U, kept in integers: 2 * wins + ties.
    std::int64_t doubled = 0;
    std::int64_t neg_below = 0;
    for (std::size_t i = 0; i < order.size();) {
        std::size_t j = i;
        std::int64_t pos = 0, neg = 0;
        while (j < order.size() && scores[order[j]] == scores[order[i]]) {
            (labels[order[j]] == 1 ? pos : neg) += 1;
            ++j;
        }
        doubled += 2 * pos * neg_below + pos * neg;
        neg_below += neg;
        i = j;
    }
    return static_cast<double>(doubled) / (2.0 * static_cast<double>(n_pos) * static_cast<double>(n_neg));
}

std::vector<RocPoint> roc_points(std::span<const double> scores, std::span<const int> labels) {
    check_binary_input(scores, labels);
    const auto n_pos = static_cast<double>(std::count(labels.begin(), labels.end(), 1));
    const auto n_neg = static_cast<double>(labels.size()) - n_pos;
    if (n_pos == 0 || n_neg == 0) throw UndefinedMetricError("ROC undefined: labels contain a single class");

    auto order = order_descending(scores);
    std::vector<RocPoint> points{{std::numeric_limits<double>::infinity(), 0.0, 0.0}};
    double tp = 0, fp = 0;
    for (std::size_t i = 0; i < order.size();) {
        const double threshold = scores[order[i]];
        while (i < order.size() && scores[order[i]] == threshold) {
            (labels[order[i]] == 1 ? tp : fp) += 1;
            ++i;
        }
        points.push_back({threshold, fp / n_neg, tp / n_pos});
    }
    return points;
}

double trapezoid_area(std::span<const RocPoint> points) {
    double area = 0.0;
    for (std::size_t i = 1; i < points.size(); ++i)
        area += (points[i].fpr - points[i - 1].fpr) * (points[i].tpr + points[i - 1].tpr) * 0.5;
    return area;
}

std::string render_roc_csv(std::span<const RocPoint> points) {
    std::string out = "threshold,fpr,tpr\n";
    for (const auto& p : points)
        out += (std::isinf(p.threshold) ? std::string("inf") : format_real(p.threshold)) + "," + format_real(p.fpr) + "," +
               format_real(p.tpr) + "\n";
    return out;
}

double f1_score(std::int64_t tp, std::int64_t fp, std::int64_t fn) {
    const auto denom = 2 * tp + fp + fn;
    return denom == 0 ? 0.0 : static_cast<double>(2 * tp) / static_cast<double>(denom);
}

std::size_t argmax(std::span<const double> v) {
    std::size_t best = 0;
    for (std::size_t i = 1; i < v.size(); ++i)
        if (v[i] > v[best]) best = i;
    return best;
}

EvalReport multiclass_report(std::span<const Prediction> preds, std::span<const int> truths) {
    if (preds.empty()) throw InvalidArgument("multiclass_report needs at least one prediction");
    if (preds.size() != truths.size()) throw InvalidArgument("predictions and truths differ in length");
    const auto& classes = preds.front().classes;
    for (const auto& p : preds) {
        if (p.classes != classes) throw InvalidArgument("predictions use different class lists");
        validate(p);
    }
    const std::size_t k = classes.size();
    for (int t : truths)
        if (t < 0 || static_cast<std::size_t>(t) >= k) throw InvalidArgument("truth class index out of range");

    EvalReport report;
    report.n = preds.size();
    std::vector<std::size_t> predicted(preds.size());
    for (std::size_t i = 0; i < preds.size(); ++i) predicted[i] = argmax(preds[i].probs);

    const auto n = static_cast<double>(preds.size());
    for (std::size_t c = 0; c < k; ++c) {
        ClassMetrics m;
        m.name = classes[c];
        std::vector<double> scores(preds.size());
        std::vector<int> is_c(preds.size());
        for (std::size_t i = 0; i < preds.size(); ++i) {
            const bool truth = static_cast<std::size_t>(truths[i]) == c;
            const bool guess = predicted[i] == c;
            m.tp += truth && guess;
            m.fp += !truth && guess;
            m.fn += truth && !guess;
            m.tn += !truth && !guess;
            scores[i] = preds[i].probs[c];
            is_c[i] = truth ? 1 : 0;
        }
        m.accuracy = static_cast<double>(m.tp + m.tn) / n;
        m.f1 = f1_score(m.tp, m.fp, m.fn);
        m.auc = roc_auc(scores, is_c);
        report.classes.push_back(std::move(m));
    }

    if (classes == class_names(Task::Presence)) {
        std::vector<double> infected_score(preds.size());
        std::vector<int> infected(preds.size());
        for (std::size_t i = 0; i < preds.size(); ++i) {
            infected_score[i] = 1.0 - preds[i].probs[0];
            infected[i] = truths[i] != 0 ? 1 : 0;
        }
        report.infection_auc = roc_auc(infected_score, infected);
    }
    if (classes == class_names(Task::Severity)) report.severe_outcome_auc = report.classes[1].auc;
    return report;
}

Json to_json(const EvalReport& report) {
    Json classes = Json::array();
    for (const auto& m : report.classes)
        classes.push_back(Json{{"class", m.name},
                               {"accuracy", m.accuracy},
                               {"f1", m.f1},
                               {"auc", m.auc},
                               {"tp", m.tp},
                               {"fp", m.fp},
                               {"fn", m.fn},
                               {"tn", m.tn}});
    Json tasks = Json::object();
    if (report.infection_auc) tasks["infection"] = *report.infection_auc;
    if (report.severe_outcome_auc) tasks["severe_outcome"] = *report.severe_outcome_auc;
    return Json{{"n", report.n},
                {"accuracy_definition", "one-vs-rest (TP+TN)/n under argmax assignment, ties to the lowest class index"},
                {"classes", std::move(classes)},
                {"task_auc", std::move(tasks)}};
}

namespace {

std::string fixed3(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.3f", v);
    return buf;
}

std::string pad_right(std::string s, std::size_t width) {
    if (s.size() < width) s.append(width - s.size(), ' ');
    return s;
}

} // namespace

std::string render_table(const EvalReport& report) {
    std::string out;
    if (!report.classes.empty()) {
        out += "Classifier\n";
        out += pad_right("Classes", 12) + pad_right("Acc.", 8) + pad_right("F1", 8) + "AUC\n";
        for (const auto& m : report.classes)
            out += pad_right(m.name, 12) + pad_right(fixed3(m.accuracy), 8) + pad_right(fixed3(m.f1), 8) + fixed3(m.auc) + "\n";
    }
    if (report.infection_auc || report.severe_outcome_auc) {
        out += "Classifier and Severity Detector\n";
        out += pad_right("Method", 12) + pad_right("Probability", 16) + "AUC\n";
        if (report.infection_auc)
            out += pad_right("Classifier", 12) + pad_right("infection", 16) + fixed3(*report.infection_auc) + "\n";
        if (report.severe_outcome_auc)
            out += pad_right("Detector", 12) + pad_right("severe outcome", 16) + fixed3(*report.severe_outcome_auc) + "\n";
    }
    return out;
}

} // namespace ctsev
