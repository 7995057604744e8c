#include "ctsev/schedule.hpp"

#include <cmath>
#include <string>

#include "ctsev/errors.hpp"

namespace ctsev {

TrainConfig TrainConfig::for_task(Task task) {
    TrainConfig cfg;
    cfg.transfer.batch = task == Task::Presence ? 8 : 4;
    return cfg;
}

void validate(const TrainConfig& cfg) {
    const auto& t = cfg.transfer;
    const auto& f = cfg.finetune;
    if (t.epochs < 0 || !(t.lr > 0.0) || t.batch < 1) throw InvalidArgument("transfer phase needs epochs >= 0, lr > 0, batch >= 1");
    if (f.max_epochs < 0 || !(f.lr_init > 0.0) || !(f.lr_floor > 0.0) || f.lr_floor > f.lr_init)
        throw InvalidArgument("finetune phase needs 0 < lr_floor <= lr_init");
    if (!(f.lr_factor > 0.0 && f.lr_factor < 1.0)) throw InvalidArgument("lr_factor must lie in (0, 1)");
    if (f.lr_patience < 1 || f.stop_patience < 1) throw InvalidArgument("patiences must be >= 1");
}

Json to_json(const TrainConfig& cfg) {
    const auto& t = cfg.transfer;
    const auto& f = cfg.finetune;
    return Json{{"transfer", {{"epochs", t.epochs}, {"lr", t.lr}, {"batch", t.batch}}},
                {"finetune",
                 {{"max_epochs", f.max_epochs},
                  {"lr_init", f.lr_init},
                  {"lr_floor", f.lr_floor},
                  {"lr_factor", f.lr_factor},
                  {"lr_patience", f.lr_patience},
                  {"stop_patience", f.stop_patience}}}};
}

TrainConfig train_config_from_json(const Json& j, Task task) {
    TrainConfig cfg = TrainConfig::for_task(task);
    require_known_keys(j, {"transfer", "finetune"}, "training config");
    if (j.contains("transfer")) require_known_keys(j.at("transfer"), {"epochs", "lr", "batch"}, "transfer config");
    if (j.contains("finetune"))
        require_known_keys(j.at("finetune"),
                           {"max_epochs", "lr_init", "lr_floor", "lr_factor", "lr_patience", "stop_patience"},
                           "finetune config");
    try {
        if (j.contains("transfer")) {
            const auto& t = j.at("transfer");
            cfg.transfer.epochs = t.value("epochs", cfg.transfer.epochs);
            cfg.transfer.lr = t.value("lr", cfg.transfer.lr);
            cfg.transfer.batch = t.value("batch", cfg.transfer.batch);
        }
        if (j.contains("finetune")) {
            const auto& f = j.at("finetune");
            cfg.finetune.max_epochs = f.value("max_epochs", cfg.finetune.max_epochs);
            cfg.finetune.lr_init = f.value("lr_init", cfg.finetune.lr_init);
            cfg.finetune.lr_floor = f.value("lr_floor", cfg.finetune.lr_floor);
            cfg.finetune.lr_factor = f.value("lr_factor", cfg.finetune.lr_factor);
            cfg.finetune.lr_patience = f.value("lr_patience", cfg.finetune.lr_patience);
            cfg.finetune.stop_patience = f.value("stop_patience", cfg.finetune.stop_patience);
        }
    } catch (const Json::exception& e) {
        throw InvalidArgument(std::string("bad training config: ") + e.what());
    }
    validate(cfg);
    return cfg;
}

ScheduleState initial_schedule(const FinetunePhase& cfg) {
    ScheduleState s;
    s.current_lr = cfg.lr_init;
    return s;
}

ScheduleState schedule_step(const ScheduleState& state, double val_loss, const FinetunePhase& cfg) {
    if (state.stopped) throw ContractError("schedule_step called on a stopped schedule");
    ScheduleState next = state;
    if (val_loss < state.best_val_loss) {
        next.best_val_loss = val_loss;
        next.best_epoch = state.epoch;
        next.epochs_since_improve_lr = 0;
        next.epochs_since_improve_stop = 0;
    } else {
        ++next.epochs_since_improve_lr;
        ++next.epochs_since_improve_stop;
    }
    if (next.epochs_since_improve_lr >= cfg.lr_patience) {
        ++next.decays;
        double lr = cfg.lr_init * std::pow(cfg.lr_factor, next.decays);
        // Snap values within rounding of the floor onto it.
        if (lr <= cfg.lr_floor * (1.0 + 1e-12)) lr = cfg.lr_floor;
        next.current_lr = lr;
        next.epochs_since_improve_lr = 0;
    }
    if (next.epochs_since_improve_stop >= cfg.stop_patience) next.stopped = true;
    ++next.epoch;
    return next;
}

} // namespace ctsev
