#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "ctsev/baseline.hpp"
#include "ctsev/ilr.hpp"
#include "ctsev/prediction.hpp"

namespace ctsev {

/// Elementwise mean of k predictions over identical class lists.
Prediction ensemble_mean(std::span<const Prediction> preds);

/// Fold whose minimum logged validation loss is smallest; lowest index on ties.
std::size_t select_best_fold(std::span<const TrainingLog> logs);

/// 1 - P(Negative) for a presence prediction (Severe is a subset of Positive).
double infection_probability(const Prediction& p);

/// P(severe) for a severity prediction.
double severe_probability(const Prediction& p);

/// Inputs for one patient: presence features come from the lung-masked
/// chain, severity features from the unmasked one.
struct PipelineSample {
    std::vector<double> presence_features;
    std::vector<double> severity_features;
    MetaVector meta;
};

struct PipelineOutput {
    double p_infection = 0.0;
    double p_severe = 0.0;
};

/// Presence from the single fold with the best validation loss; severity
/// from the mean over all severity fold models.
PipelineOutput pipeline_predict(const PipelineSample& sample, std::span<const BaselineModel> presence_models,
                                std::span<const TrainingLog> presence_logs,
                                std::span<const BaselineModel> severity_models);

} // namespace ctsev
