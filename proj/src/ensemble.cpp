#include "ctsev/ensemble.hpp"

#include <algorithm>
#include <limits>

#include "ctsev/errors.hpp"

namespace ctsev {

Prediction ensemble_mean(std::span<const Prediction> preds) {
    if (preds.empty()) throw InvalidArgument("ensemble_mean needs at least one prediction");
    Prediction out{preds.front().classes, std::vector<double>(preds.front().probs.size(), 0.0)};
    for (const auto& p : preds) {
        if (p.classes != out.classes) throw InvalidArgument("ensemble members use different class lists");
        if (p.probs.size() != out.probs.size()) throw InvalidArgument("ensemble members differ in length");
        for (std::size_t c = 0; c < p.probs.size(); ++c) out.probs[c] += p.probs[c];
    }
    const double inv_k = 1.0 / static_cast<double>(preds.size());
    for (double& v : out.probs) v *= inv_k;
    validate(out);
    return out;
}

std::size_t select_best_fold(std::span<const TrainingLog> logs) {
    if (logs.empty()) throw InvalidArgument("select_best_fold needs at least one log");
    std::size_t best = 0;
    double best_loss = std::numeric_limits<double>::infinity();
    for (std::size_t f = 0; f < logs.size(); ++f) {
        if (logs[f].empty()) throw InvalidArgument("training log " + std::to_string(f) + " is empty");
        double fold_min = std::numeric_limits<double>::infinity();
        for (const auto& r : logs[f]) fold_min = std::min(fold_min, r.val_loss);
        if (fold_min < best_loss) {
            best_loss = fold_min;
            best = f;
        }
    }
    return best;
}

double infection_probability(const Prediction& p) {
    if (p.classes != class_names(Task::Presence)) throw InvalidArgument("infection_probability needs a presence prediction");
    return 1.0 - p.probs[0];
}

double severe_probability(const Prediction& p) {
    if (p.classes != class_names(Task::Severity)) throw InvalidArgument("severe_probability needs a severity prediction");
    return p.probs[1];
}

PipelineOutput pipeline_predict(const PipelineSample& sample, std::span<const BaselineModel> presence_models,
                                std::span<const TrainingLog> presence_logs,
                                std::span<const BaselineModel> severity_models) {
    if (presence_models.empty() || presence_models.size() != presence_logs.size())
        throw InvalidArgument("one training log per presence model required");
    if (severity_models.empty()) throw InvalidArgument("no severity models given");

    const auto& chosen = presence_models[select_best_fold(presence_logs)];
    PipelineOutput out;
    out.p_infection = infection_probability(
        predict_baseline(chosen, sample.presence_features, chosen.uses_metadata ? &sample.meta : nullptr));

    std::vector<Prediction> fold_preds;
    fold_preds.reserve(severity_models.size());
    for (const auto& m : severity_models)
        fold_preds.push_back(predict_baseline(m, sample.severity_features, m.uses_metadata ? &sample.meta : nullptr));
    out.p_severe = severe_probability(ensemble_mean(fold_preds));
    return out;
}

} // namespace ctsev
