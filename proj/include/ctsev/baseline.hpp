#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "ctsev/canonical_json.hpp"
#include "ctsev/ilr.hpp"
#include "ctsev/loss.hpp"
#include "ctsev/prediction.hpp"
#include "ctsev/schedule.hpp"
#include "ctsev/volume.hpp"

namespace ctsev {

inline constexpr std::size_t kHistogramBins = 8;
/// Histogram bins, mean, standard deviation, fraction above 0.5.
inline constexpr std::size_t kImageFeatureCount = kHistogramBins + 3;

/// Intensity summary of a preprocessed volume in the grayscale domain.
/// Z-scored input is mapped back with (zmean, zstd) first. With a mask only
/// non-background voxels are summarized.
std::vector<double> extract_features(const Volume& v, const LabelMask* mask = nullptr, double zmean = 0.449,
                                     double zstd = 0.226);

struct Sample {
    std::vector<double> features;
    std::optional<MetaVector> meta;
    int label = 0;
};

/// Softmax-linear classifier over standardized (features ++ metadata).
struct BaselineModel {
    Task task = Task::Presence;
    bool uses_metadata = false;
    std::vector<double> input_mean;
    std::vector<double> input_scale;
    Matrix weights; // classes x inputs
    std::vector<double> bias;
    int best_epoch = -1;

    std::size_t classes() const { return bias.size(); }
    std::size_t inputs() const { return input_mean.size(); }
};

struct EpochRecord {
    int epoch = 0;
    std::string phase; // "transfer" or "finetune"
    double lr = 0.0;
    double train_loss = 0.0;
    double val_loss = 0.0;

    bool operator==(const EpochRecord&) const = default;
};

using TrainingLog = std::vector<EpochRecord>;

struct FitResult {
    BaselineModel model;
    TrainingLog log;
};

/// Full-batch gradient descent on combined_loss. Phase one runs the transfer
/// epochs at a fixed rate; phase two runs under schedule_step until it stops
/// or max_epochs is reached. The returned parameters are those of the logged
/// epoch with the lowest validation loss (earliest on ties). An empty
/// loss_cfg.alpha is replaced by inverse training-class frequencies.
/// Throws TrainingError if a loss becomes non-finite.
FitResult fit_baseline(std::span<const Sample> train, std::span<const Sample> val, Task task, const TrainConfig& train_cfg,
                       const LossConfig& loss_cfg, std::uint64_t seed);

/// Softmax over the model's linear scores.
Prediction predict_baseline(const BaselineModel& model, std::span<const double> features, const MetaVector* meta = nullptr);

/// Mean combined loss of the model on a sample set.
double evaluate_loss(const BaselineModel& model, std::span<const Sample> samples, const LossConfig& loss_cfg);

Json to_json(const BaselineModel& model);
BaselineModel baseline_from_json(const Json& j);

/// CSV `epoch,phase,lr,train_loss,val_loss`.
std::string render_log_csv(const TrainingLog& log);
TrainingLog read_log_csv(const std::filesystem::path& path);

} // namespace ctsev
