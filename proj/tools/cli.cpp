#include "cli.hpp"

#include <algorithm>
#include <filesystem>
#include <map>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "ctsev/augment.hpp"
#include "ctsev/baseline.hpp"
#include "ctsev/cohort.hpp"
#include "ctsev/ensemble.hpp"
#include "ctsev/errors.hpp"
#include "ctsev/ilr.hpp"
#include "ctsev/kfold.hpp"
#include "ctsev/metrics.hpp"
#include "ctsev/nifti.hpp"
#include "ctsev/parallel.hpp"
#include "ctsev/preprocess.hpp"
#include "ctsev/rng.hpp"
#include "ctsev/synth.hpp"
#include "manifest.hpp"

namespace ctsev::cli {

namespace fs = std::filesystem;

namespace {

/// A configuration problem detected by the CLI itself (exit 1).
struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct Case {
    std::string id;
    fs::path path;
};

std::optional<std::string> nifti_id(const fs::path& p) {
    const std::string name = p.filename().string();
    for (std::string_view ext : {".nii.gz", ".nii"}) {
        if (name.size() > ext.size() && name.compare(name.size() - ext.size(), ext.size(), ext) == 0)
            return name.substr(0, name.size() - ext.size());
    }
    return std::nullopt;
}

std::vector<Case> list_nifti(const fs::path& dir) {
    if (!fs::is_directory(dir)) throw ConfigError("not a directory: " + dir.string());
    std::map<std::string, fs::path> found;
    for (const auto& entry : fs::directory_iterator(dir)) {
        if (!entry.is_regular_file()) continue;
        if (auto id = nifti_id(entry.path())) {
            if (!found.emplace(*id, entry.path()).second)
                throw ConfigError("duplicate image for id '" + *id + "' in " + dir.string());
        }
    }
    std::vector<Case> cases;
    for (auto& [id, path] : found) cases.push_back({id, path});
    return cases;
}

std::optional<fs::path> find_nifti(const fs::path& dir, const std::string& id) {
    for (const char* ext : {".nii.gz", ".nii"}) {
        fs::path p = dir / (id + ext);
        if (fs::is_regular_file(p)) return p;
    }
    return std::nullopt;
}

std::uint64_t patient_seed(std::uint64_t seed, const std::string& id) { return Rng(seed).derive(id).seed(); }

/// Runs fn(i) for every index on `jobs` workers and collects per-item
/// failure messages in index order.
template <typename Fn>
std::vector<std::optional<std::string>> for_each_sample(std::size_t n, int jobs, Fn&& fn) {
    std::vector<std::optional<std::string>> failures(n);
    parallel_for(n, jobs, [&](std::size_t begin, std::size_t end) {
        for (std::size_t i = begin; i < end; ++i) {
            try {
                fn(i);
            } catch (const std::exception& e) {
                failures[i] = e.what();
            }
        }
    });
    return failures;
}

// ---------------------------------------------------------------------------

struct SynthOpts {
    int n = 0;
    std::uint64_t seed = 0;
    std::string out;
    int jobs = 1;
};

int cmd_synth(const SynthOpts& o, const std::vector<std::string>& args, std::ostream& out) {
    if (o.n < 0) throw ConfigError("--n must be >= 0");
    const fs::path root(o.out);
    fs::create_directories(root / "raw");
    fs::create_directories(root / "masks");
    RunManifest manifest("synth", args);
    manifest.seed("seed", o.seed);
    const SynthConfig cfg;

    std::vector<PatientRecord> records(static_cast<std::size_t>(o.n));
    std::vector<std::string> labels(static_cast<std::size_t>(o.n));
    auto failures = for_each_sample(records.size(), o.jobs, [&](std::size_t i) {
        SynthPatient p = synth_patient(static_cast<int>(i), o.seed, cfg);
        write_nifti(p.volume, root / "raw" / (p.record.patient_id + ".nii.gz"));
        write_nifti(p.mask, root / "masks" / (p.record.patient_id + ".nii.gz"));
        records[i] = p.record;
        labels[i] = p.label;
    });
    for (const auto& f : failures)
        if (f) throw IoError(*f);

    std::map<std::string, std::string> label_map;
    for (std::size_t i = 0; i < records.size(); ++i) label_map[records[i].patient_id] = labels[i];
    write_cohort_csv(records, root / "cohort.csv");
    write_labels_csv(label_map, root / "labels.csv");

    manifest.note("generator", Json{{"shape", {cfg.shape.nz, cfg.shape.ny, cfg.shape.nx}},
                                    {"spacing", {cfg.spacing.dx, cfg.spacing.dy, cfg.spacing.dz}},
                                    {"p_negative", cfg.p_negative},
                                    {"ilr_range", {cfg.ilr_lo, cfg.ilr_hi}},
                                    {"severe_threshold", cfg.severe_threshold}});
    manifest.output(root);
    manifest.write(manifest_path_for(root, true));
    out << "synth: " << o.n << " patients written to " << root.string() << "\n";
    return kExitOk;
}

// ---------------------------------------------------------------------------

struct PreprocessOpts {
    std::string in, masks, out, config, augment;
    std::string mode = "infer";
    std::uint64_t seed = 0;
    int jobs = 1;
};

int cmd_preprocess(const PreprocessOpts& o, const std::vector<std::string>& args, std::ostream& out,
                   std::ostream& err) {
    PrepConfig cfg;
    if (!o.config.empty()) cfg = prep_config_from_json(read_json_file(o.config));
    validate(cfg);
    const bool train = o.mode == "train";
    if (!train && o.mode != "infer") throw ConfigError("--mode must be train or infer");
    if (cfg.lung_masking && o.masks.empty()) throw ConfigError("lung_masking requires --masks");
    std::optional<AugmentConfig> augment;
    if (!o.augment.empty()) {
        if (!train) throw ConfigError("--augment requires --mode train");
        augment = augment_config_from_json(read_json_file(o.augment));
    }

    const auto cases = list_nifti(o.in);
    const fs::path dst(o.out);
    fs::create_directories(dst);
    RunManifest manifest("preprocess", args);
    manifest.config("prep", to_json(cfg));
    if (augment) manifest.config("augment", to_json(*augment));
    manifest.seed("seed", o.seed);
    manifest.note("mode", o.mode);
    manifest.input(o.in);
    if (!o.masks.empty() && cfg.lung_masking) manifest.input(o.masks);

    if (cases.empty()) err << "warning: no NIfTI images in " << o.in << "\n";

    auto failures = for_each_sample(cases.size(), o.jobs, [&](std::size_t i) {
        const Case& c = cases[i];
        const Volume v = read_nifti_volume(c.path);
        std::optional<LabelMask> mask;
        if (cfg.lung_masking) {
            auto mp = find_nifti(o.masks, c.id);
            if (!mp) throw IoError("no mask for '" + c.id + "' in " + o.masks);
            mask = read_nifti_mask(*mp);
        }
        const PrepMode mode = train ? PrepMode::training(patient_seed(o.seed, c.id), augment) : PrepMode::inference();
        write_nifti(preprocess(v, mask ? &*mask : nullptr, cfg, mode, 1), dst / (c.id + ".nii.gz"));
    });

    std::size_t failed = 0;
    for (std::size_t i = 0; i < cases.size(); ++i) {
        if (failures[i]) {
            ++failed;
            err << "error: " << cases[i].id << ": " << *failures[i] << "\n";
        }
    }
    manifest.output(dst);
    manifest.note("failed", failed);
    manifest.write(manifest_path_for(dst, true));
    out << "preprocess: " << cases.size() - failed << " written, " << failed << " failed\n";
    return failed == 0 ? kExitOk : kExitPartial;
}

// ---------------------------------------------------------------------------

struct IlrOpts {
    std::string masks, mask, out;
    int jobs = 1;
};

int cmd_ilr(const IlrOpts& o, const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    if (!o.mask.empty()) {
        if (!o.masks.empty()) throw ConfigError("--mask and --masks are exclusive");
        out << format_real(compute_ilr(read_nifti_mask(o.mask))) << "\n";
        return kExitOk;
    }
    if (o.masks.empty() || o.out.empty()) throw ConfigError("batch mode needs --masks and --out");
    const auto cases = list_nifti(o.masks);
    std::vector<double> ratios(cases.size());
    auto failures = for_each_sample(cases.size(), o.jobs,
                                    [&](std::size_t i) { ratios[i] = compute_ilr(read_nifti_mask(cases[i].path)); });

    std::map<std::string, double> table;
    std::size_t failed = 0;
    for (std::size_t i = 0; i < cases.size(); ++i) {
        if (failures[i]) {
            ++failed;
            err << "error: " << cases[i].id << ": " << *failures[i] << "\n";
        } else {
            table[cases[i].id] = ratios[i];
        }
    }
    const fs::path dst(o.out);
    if (dst.has_parent_path()) fs::create_directories(dst.parent_path());
    write_ilr_csv(table, dst);
    RunManifest manifest("ilr", args);
    manifest.input(o.masks);
    manifest.output(dst);
    manifest.note("failed", failed);
    manifest.write(manifest_path_for(dst, false));
    out << "ilr: " << table.size() << " ratios written, " << failed << " failed\n";
    return failed == 0 ? kExitOk : kExitPartial;
}

// ---------------------------------------------------------------------------

struct SplitOpts {
    std::string cohort, labels, out;
    int k = 5;
    std::uint64_t seed = 0;
};

int cmd_split(const SplitOpts& o, const std::vector<std::string>& args, std::ostream& out) {
    const auto labels = read_labels_csv(o.labels);
    if (!o.cohort.empty()) {
        std::map<std::string, bool> known;
        for (const auto& r : read_cohort_csv(o.cohort)) known[r.patient_id] = true;
        for (const auto& [id, _] : labels)
            if (!known.count(id)) throw ConfigError("labelled patient '" + id + "' missing from cohort");
    }
    std::vector<std::string> ids;
    std::vector<int> classes;
    for (const auto& [id, name] : labels) {
        ids.push_back(id);
        classes.push_back(class_index(Task::Presence, name));
    }
    const FoldPlan plan = kfold_split(ids, classes, o.k, o.seed);
    const fs::path dst(o.out);
    if (dst.has_parent_path()) fs::create_directories(dst.parent_path());
    write_canonical_json(to_json(plan), dst);

    RunManifest manifest("split", args);
    manifest.seed("seed", o.seed);
    manifest.note("k", o.k);
    manifest.input(o.labels);
    if (!o.cohort.empty()) manifest.input(o.cohort);
    manifest.output(dst);
    manifest.write(manifest_path_for(dst, false));
    out << "split: " << ids.size() << " patients into " << o.k << " folds\n";
    return kExitOk;
}

// ---------------------------------------------------------------------------

int truth_label(Task task, const std::string& name) {
    const int presence = class_index(Task::Presence, name);
    return task == Task::Presence ? presence : (presence == 2 ? 1 : 0);
}

struct Inputs {
    std::string features, cohort, ilr;
};

/// Image features (and metadata when cohort + ilr are given) for `ids`.
std::vector<Sample> load_samples(const Inputs& in, const std::vector<std::string>& ids, int jobs) {
    if (in.cohort.empty() != in.ilr.empty()) throw ConfigError("--cohort and --ilr must be given together");
    std::map<std::string, PatientRecord> records;
    std::map<std::string, double> ratios;
    if (!in.cohort.empty()) {
        for (auto& r : read_cohort_csv(in.cohort)) records[r.patient_id] = r;
        ratios = read_ilr_csv(in.ilr);
    }
    std::vector<Sample> samples(ids.size());
    auto failures = for_each_sample(ids.size(), jobs, [&](std::size_t i) {
        const auto path = find_nifti(in.features, ids[i]);
        if (!path) throw IoError("no preprocessed volume in " + in.features);
        samples[i].features = extract_features(read_nifti_volume(*path));
        if (!in.cohort.empty()) {
            auto r = records.find(ids[i]);
            auto q = ratios.find(ids[i]);
            if (r == records.end()) throw ConfigError("missing from cohort");
            if (q == ratios.end()) throw ConfigError("missing from ilr table");
            samples[i].meta = assemble_metadata(r->second, q->second);
        }
    });
    for (std::size_t i = 0; i < ids.size(); ++i)
        if (failures[i]) throw ConfigError(ids[i] + ": " + *failures[i]);
    return samples;
}

struct TrainOpts {
    std::string task, labels, plan, config, loss, out;
    Inputs inputs;
    std::uint64_t seed = 0;
    int jobs = 1;
};

fs::path model_path(const fs::path& dir, std::size_t fold) { return dir / ("fold" + std::to_string(fold) + ".json"); }

fs::path log_path(const fs::path& dir, std::size_t fold) {
    return dir / ("fold" + std::to_string(fold) + ".log.csv");
}

int cmd_train(const TrainOpts& o, const std::vector<std::string>& args, std::ostream& out) {
    const Task task = task_from_string(o.task);
    const FoldPlan plan = fold_plan_from_json(read_json_file(o.plan));
    const auto labels = read_labels_csv(o.labels);
    const TrainConfig tcfg = o.config.empty() ? TrainConfig::for_task(task)
                                              : train_config_from_json(read_json_file(o.config), task);
    const LossConfig lcfg = o.loss.empty() ? LossConfig{} : loss_config_from_json(read_json_file(o.loss));

    std::vector<Sample> samples = load_samples(o.inputs, plan.ids, o.jobs);
    for (std::size_t i = 0; i < plan.ids.size(); ++i) {
        auto it = labels.find(plan.ids[i]);
        if (it == labels.end()) throw ConfigError("no label for '" + plan.ids[i] + "'");
        samples[i].label = truth_label(task, it->second);
    }

    const fs::path dst(o.out);
    fs::create_directories(dst);
    const Rng root(o.seed);
    std::vector<FitResult> fits(plan.folds.size());
    auto failures = for_each_sample(plan.folds.size(), o.jobs, [&](std::size_t f) {
        auto pick = [&](const std::vector<std::size_t>& idx) {
            std::vector<Sample> subset;
            for (auto i : idx) subset.push_back(samples.at(i));
            return subset;
        };
        const auto train = pick(plan.folds[f].train);
        const auto val = pick(plan.folds[f].val);
        fits[f] = fit_baseline(train, val, task, tcfg, lcfg, root.derive("fold-" + std::to_string(f)).seed());
    });
    for (std::size_t f = 0; f < fits.size(); ++f)
        if (failures[f]) throw TrainingError(-1, "fold " + std::to_string(f) + ": " + *failures[f]);

    for (std::size_t f = 0; f < fits.size(); ++f) {
        write_canonical_json(to_json(fits[f].model), model_path(dst, f));
        write_text_file(log_path(dst, f), render_log_csv(fits[f].log));
    }

    RunManifest manifest("train", args);
    manifest.config("train", to_json(tcfg));
    manifest.config("loss", to_json(lcfg));
    manifest.seed("seed", o.seed);
    manifest.note("task", std::string(to_string(task)));
    manifest.input(o.plan);
    manifest.input(o.labels);
    manifest.input(o.inputs.features);
    if (!o.inputs.cohort.empty()) {
        manifest.input(o.inputs.cohort);
        manifest.input(o.inputs.ilr);
    }
    manifest.output(dst);
    manifest.write(manifest_path_for(dst, true));
    out << "train: " << fits.size() << " " << to_string(task) << " fold models written to " << dst.string() << "\n";
    return kExitOk;
}

// ---------------------------------------------------------------------------

struct PredictOpts {
    std::string task, models, out, plan;
    std::string ensemble = "auto";
    Inputs inputs;
    bool oof = false;
    int jobs = 1;
};

int cmd_predict(const PredictOpts& o, const std::vector<std::string>& args, std::ostream& out) {
    const Task task = task_from_string(o.task);
    const fs::path dir(o.models);
    std::vector<BaselineModel> models;
    std::vector<TrainingLog> logs;
    while (fs::is_regular_file(model_path(dir, models.size()))) {
        const std::size_t f = models.size();
        models.push_back(baseline_from_json(read_json_file(model_path(dir, f))));
        logs.push_back(read_log_csv(log_path(dir, f)));
        if (models.back().task != task)
            throw ConfigError(model_path(dir, f).string() + " is a " + std::string(to_string(models.back().task)) +
                              " model");
    }
    if (models.empty()) throw ConfigError("no fold models in " + o.models);
    if (models.front().uses_metadata && o.inputs.cohort.empty())
        throw ConfigError("models use metadata: --cohort and --ilr are required");

    std::vector<std::string> ids;
    std::vector<std::size_t> owner; // fold whose test set holds the id (oof mode)
    if (o.oof) {
        if (o.plan.empty()) throw ConfigError("--oof requires --plan");
        const FoldPlan plan = fold_plan_from_json(read_json_file(o.plan));
        if (plan.folds.size() != models.size())
            throw ConfigError("plan has " + std::to_string(plan.folds.size()) + " folds but " +
                              std::to_string(models.size()) + " models were found");
        std::map<std::string, std::size_t> by_id;
        for (std::size_t f = 0; f < plan.folds.size(); ++f)
            for (auto i : plan.folds[f].test) by_id[plan.ids.at(i)] = f;
        for (auto& [id, f] : by_id) {
            ids.push_back(id);
            owner.push_back(f);
        }
    } else {
        for (const auto& c : list_nifti(o.inputs.features)) ids.push_back(c.id);
    }

    bool use_mean = task == Task::Severity;
    if (o.ensemble == "mean") use_mean = true;
    else if (o.ensemble == "best") use_mean = false;
    else if (o.ensemble != "auto") throw ConfigError("--ensemble must be auto, mean or best");
    const std::size_t best = select_best_fold(logs);

    const auto samples = load_samples(o.inputs, ids, o.jobs);
    PredictionFile result{task, {}};
    for (std::size_t i = 0; i < ids.size(); ++i) {
        const MetaVector* meta = samples[i].meta ? &*samples[i].meta : nullptr;
        Prediction p;
        if (o.oof) {
            p = predict_baseline(models[owner[i]], samples[i].features, meta);
        } else if (use_mean) {
            std::vector<Prediction> per_fold;
            for (const auto& m : models) per_fold.push_back(predict_baseline(m, samples[i].features, meta));
            p = ensemble_mean(per_fold);
        } else {
            p = predict_baseline(models[best], samples[i].features, meta);
        }
        result.items[ids[i]] = p.probs;
    }
    const fs::path dst(o.out);
    if (dst.has_parent_path()) fs::create_directories(dst.parent_path());
    write_predictions(result, dst);

    RunManifest manifest("predict", args);
    manifest.note("task", std::string(to_string(task)));
    manifest.note("mode", o.oof ? "out-of-fold" : (use_mean ? "mean" : "best-fold"));
    if (!o.oof && !use_mean) manifest.note("best_fold", best);
    manifest.input(o.models);
    manifest.input(o.inputs.features);
    if (!o.plan.empty()) manifest.input(o.plan);
    if (!o.inputs.cohort.empty()) {
        manifest.input(o.inputs.cohort);
        manifest.input(o.inputs.ilr);
    }
    manifest.output(dst);
    manifest.write(manifest_path_for(dst, false));
    out << "predict: " << ids.size() << " " << to_string(task) << " predictions written to " << dst.string() << "\n";
    return kExitOk;
}

// ---------------------------------------------------------------------------

struct EvaluateOpts {
    std::vector<std::string> preds;
    std::string truth, out, roc, roc_severe, table;
};

int cmd_evaluate(const EvaluateOpts& o, const std::vector<std::string>& args, std::ostream& out) {
    const auto truth = read_labels_csv(o.truth);
    std::optional<EvalReport> presence, severity;
    std::map<Task, std::pair<std::vector<double>, std::vector<int>>> curves;
    for (const auto& file : o.preds) {
        const PredictionFile pf = read_predictions(file);
        auto& slot = pf.task == Task::Presence ? presence : severity;
        if (slot) throw ConfigError("more than one " + std::string(to_string(pf.task)) + " prediction file");
        std::vector<Prediction> preds;
        std::vector<int> labels;
        auto& [scores, positives] = curves[pf.task];
        for (const auto& [id, probs] : pf.items) {
            auto it = truth.find(id);
            if (it == truth.end()) throw ConfigError("no truth label for '" + id + "'");
            Prediction p{class_names(pf.task), probs};
            labels.push_back(truth_label(pf.task, it->second));
            scores.push_back(pf.task == Task::Presence ? infection_probability(p) : severe_probability(p));
            positives.push_back(pf.task == Task::Presence ? (labels.back() != 0) : labels.back());
            preds.push_back(std::move(p));
        }
        slot = multiclass_report(preds, labels);
    }
    if (!presence && !severity) throw ConfigError("no prediction files given");

    EvalReport merged = presence ? *presence : *severity;
    if (presence && severity) merged.severe_outcome_auc = severity->severe_outcome_auc;

    const fs::path dst(o.out);
    if (dst.has_parent_path()) fs::create_directories(dst.parent_path());
    write_canonical_json(to_json(merged), dst);
    RunManifest manifest("evaluate", args);
    for (const auto& file : o.preds) manifest.input(file);
    manifest.input(o.truth);
    manifest.output(dst);

    auto write_roc = [&](const std::string& path, Task task) {
        if (path.empty()) return;
        auto it = curves.find(task);
        if (it == curves.end())
            throw ConfigError("ROC requested for " + std::string(to_string(task)) + " but no such predictions given");
        write_text_file(path, render_roc_csv(roc_points(it->second.first, it->second.second)));
        manifest.output(path);
    };
    write_roc(o.roc, Task::Presence);
    write_roc(o.roc_severe, Task::Severity);

    const std::string table = render_table(merged);
    if (!o.table.empty()) {
        write_text_file(o.table, table);
        manifest.output(o.table);
    }
    manifest.write(manifest_path_for(dst, false));
    out << table;
    return kExitOk;
}

} // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Deterministic CT pipeline: preprocessing, ILR, folds, baseline training, evaluation"};
    app.set_version_flag("--version", std::string("ctsev ") + kVersion);
    app.require_subcommand(1);

    SynthOpts synth;
    auto* s = app.add_subcommand("synth", "Generate a synthetic thorax-like cohort");
    s->add_option("--n", synth.n, "Number of patients")->required();
    s->add_option("--seed", synth.seed, "Generator seed");
    s->add_option("--out", synth.out, "Output directory")->required();
    s->add_option("--jobs", synth.jobs, "Worker threads");

    PreprocessOpts prep;
    auto* p = app.add_subcommand("preprocess", "Resample, clip, standardize, crop and z-score volumes");
    p->add_option("--in", prep.in, "Directory of input NIfTI volumes")->required();
    p->add_option("--masks", prep.masks, "Directory of label masks (same ids)");
    p->add_option("--out", prep.out, "Output directory")->required();
    p->add_option("--config", prep.config, "PrepConfig JSON");
    p->add_option("--mode", prep.mode, "train or infer");
    p->add_option("--seed", prep.seed, "Seed for random crop and augmentation");
    p->add_option("--augment", prep.augment, "AugmentConfig JSON (train mode)");
    p->add_option("--jobs", prep.jobs, "Worker threads");

    IlrOpts ilr;
    auto* i = app.add_subcommand("ilr", "Infection-lung ratio from label masks");
    i->add_option("--masks", ilr.masks, "Directory of label masks");
    i->add_option("--mask", ilr.mask, "Single mask; prints the ratio");
    i->add_option("--out", ilr.out, "Output CSV (batch mode)");
    i->add_option("--jobs", ilr.jobs, "Worker threads");

    SplitOpts split;
    auto* sp = app.add_subcommand("split", "Stratified k-fold plan");
    sp->add_option("--cohort", split.cohort, "Cohort CSV");
    sp->add_option("--labels", split.labels, "Labels CSV")->required();
    sp->add_option("--k", split.k, "Number of folds");
    sp->add_option("--seed", split.seed, "Shuffle seed");
    sp->add_option("--out", split.out, "Output plan JSON")->required();

    TrainOpts train;
    auto* t = app.add_subcommand("train", "Train one baseline model per fold");
    t->add_option("--task", train.task, "presence or severity")->required();
    t->add_option("--features", train.inputs.features, "Directory of preprocessed volumes")->required();
    t->add_option("--labels", train.labels, "Labels CSV")->required();
    t->add_option("--plan", train.plan, "Fold plan JSON")->required();
    t->add_option("--cohort", train.inputs.cohort, "Cohort CSV (enables metadata)");
    t->add_option("--ilr", train.inputs.ilr, "ILR CSV (enables metadata)");
    t->add_option("--config", train.config, "TrainConfig JSON");
    t->add_option("--loss", train.loss, "LossConfig JSON");
    t->add_option("--seed", train.seed, "Initialization seed");
    t->add_option("--out", train.out, "Output model directory")->required();
    t->add_option("--jobs", train.jobs, "Worker threads");

    PredictOpts predict;
    auto* pr = app.add_subcommand("predict", "Predict with trained fold models");
    pr->add_option("--task", predict.task, "presence or severity")->required();
    pr->add_option("--models", predict.models, "Model directory from train")->required();
    pr->add_option("--features", predict.inputs.features, "Directory of preprocessed volumes")->required();
    pr->add_option("--cohort", predict.inputs.cohort, "Cohort CSV");
    pr->add_option("--ilr", predict.inputs.ilr, "ILR CSV");
    pr->add_option("--plan", predict.plan, "Fold plan JSON (with --oof)");
    pr->add_flag("--oof", predict.oof, "Predict each patient with the model whose test fold holds it");
    pr->add_option("--ensemble", predict.ensemble, "auto, mean or best");
    pr->add_option("--out", predict.out, "Output prediction JSON")->required();
    pr->add_option("--jobs", predict.jobs, "Worker threads");

    EvaluateOpts eval;
    auto* e = app.add_subcommand("evaluate", "Accuracy, F1 and AUC report");
    e->add_option("--preds", eval.preds, "Prediction JSON (presence and/or severity)")->required();
    e->add_option("--truth", eval.truth, "Labels CSV")->required();
    e->add_option("--out", eval.out, "Output report JSON")->required();
    e->add_option("--roc", eval.roc, "Infection ROC CSV");
    e->add_option("--roc-severe", eval.roc_severe, "Severe-outcome ROC CSV");
    e->add_option("--table", eval.table, "Write the text table to a file");

    try {
        std::vector<std::string> reversed(args.rbegin(), args.rend());
        app.parse(reversed);
    } catch (const CLI::ParseError& ex) {
        const int code = app.exit(ex, out, err);
        return code == 0 ? kExitOk : kExitFatal;
    }

    try {
        if (s->parsed()) return cmd_synth(synth, args, out);
        if (p->parsed()) return cmd_preprocess(prep, args, out, err);
        if (i->parsed()) return cmd_ilr(ilr, args, out, err);
        if (sp->parsed()) return cmd_split(split, args, out);
        if (t->parsed()) return cmd_train(train, args, out);
        if (pr->parsed()) return cmd_predict(predict, args, out);
        if (e->parsed()) return cmd_evaluate(eval, args, out);
    } catch (const std::exception& ex) {
        err << "error: " << ex.what() << "\n";
        return kExitFatal;
    }
    return kExitFatal;
}

} // namespace ctsev::cli
