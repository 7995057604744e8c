#pragma once

#include <limits>

#include "ctsev/canonical_json.hpp"
#include "ctsev/prediction.hpp"

namespace ctsev {

/// Head-only phase at a fixed learning rate.
struct TransferPhase {
    int epochs = 10;
    double lr = 1e-4;
    int batch = 4;
};

/// Whole-model phase driven by the plateau / early-stopping schedule.
struct FinetunePhase {
    int max_epochs = 240;
    double lr_init = 1e-5;
    double lr_floor = 1e-7;
    double lr_factor = 0.1;
    int lr_patience = 8;
    int stop_patience = 36;
};

struct TrainConfig {
    TransferPhase transfer;
    FinetunePhase finetune;

    /// Batch 8 for the presence classifier, 4 for the severity detector.
    static TrainConfig for_task(Task task);
};

void validate(const TrainConfig& cfg);
Json to_json(const TrainConfig& cfg);
TrainConfig train_config_from_json(const Json& j, Task task);

/// Plateau learning-rate decay and early stopping sharing one improvement
/// signal (strict decrease of the validation loss) with separate patiences.
struct ScheduleState {
    int epoch = 0;
    double current_lr = 0.0;
    double best_val_loss = std::numeric_limits<double>::infinity();
    int epochs_since_improve_lr = 0;
    int epochs_since_improve_stop = 0;
    bool stopped = false;
    int best_epoch = -1;
    int decays = 0;
};

ScheduleState initial_schedule(const FinetunePhase& cfg);

/// Advances one epoch. On decay lr becomes max(lr_init * factor^decays,
/// lr_floor) and only the lr counter resets. Throws ContractError when the
/// state has already stopped.
ScheduleState schedule_step(const ScheduleState& state, double val_loss, const FinetunePhase& cfg);

} // namespace ctsev
