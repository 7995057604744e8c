#include "ctsev/baseline.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

#include "ctsev/cohort.hpp"
#include "ctsev/errors.hpp"
#include "ctsev/rng.hpp"

namespace ctsev {

std::vector<double> extract_features(const Volume& v, const LabelMask* mask, double zmean, double zstd) {
    if (v.unit() == Unit::HU) throw ContractError("extract_features expects a grayscale or z-scored volume");
    if (mask && mask->shape() != v.shape()) throw InvalidArgument("feature mask shape differs from the volume");
    const bool zscored = v.unit() == Unit::ZScored;

    std::vector<double> hist(kHistogramBins, 0.0);
    double sum = 0.0, sum_sq = 0.0;
    std::size_t above = 0, n = 0;
    auto data = v.data();
    for (std::size_t i = 0; i < data.size(); ++i) {
        if (mask && mask->data()[i] == 0) continue;
        double g = data[i];
        if (zscored) g = g * zstd + zmean;
        g = std::clamp(g, 0.0, 1.0);
        auto bin = std::min<std::size_t>(kHistogramBins - 1, static_cast<std::size_t>(g * kHistogramBins));
        hist[bin] += 1.0;
        sum += g;
        sum_sq += g * g;
        if (g > 0.5) ++above;
        ++n;
    }
    std::vector<double> out(kImageFeatureCount, 0.0);
    if (n == 0) return out;
    const double inv_n = 1.0 / static_cast<double>(n);
    for (std::size_t b = 0; b < kHistogramBins; ++b) out[b] = hist[b] * inv_n;
    const double mean = sum * inv_n;
    out[kHistogramBins] = mean;
    out[kHistogramBins + 1] = std::sqrt(std::max(0.0, sum_sq * inv_n - mean * mean));
    out[kHistogramBins + 2] = static_cast<double>(above) * inv_n;
    return out;
}

namespace {

std::vector<double> model_input(std::span<const double> features, const MetaVector* meta) {
    std::vector<double> x(features.begin(), features.end());
    if (meta) {
        x.push_back(meta->age_norm);
        x.push_back(meta->sex_code);
        x.push_back(meta->ilr);
    }
    return x;
}

void softmax_inplace(std::span<double> z) {
    const double mx = *std::max_element(z.begin(), z.end());
    double sum = 0.0;
    for (double& v : z) {
        v = std::exp(v - mx);
        sum += v;
    }
    for (double& v : z) v /= sum;
}

/// Standardized design matrix (rows = samples).
Matrix design(const BaselineModel& m, std::span<const Sample> samples) {
    Matrix x(samples.size(), m.inputs());
    for (std::size_t i = 0; i < samples.size(); ++i) {
        const auto& s = samples[i];
        if (s.features.size() + (m.uses_metadata ? 3u : 0u) != m.inputs())
            throw InvalidArgument("sample feature length does not match the model");
        if (m.uses_metadata && !s.meta) throw InvalidArgument("model expects metadata for every sample");
        auto raw = model_input(s.features, m.uses_metadata ? &*s.meta : nullptr);
        for (std::size_t d = 0; d < raw.size(); ++d) x(i, d) = (raw[d] - m.input_mean[d]) / m.input_scale[d];
    }
    return x;
}

Matrix forward(const BaselineModel& m, const Matrix& x) {
    const std::size_t classes = m.classes();
    Matrix probs(x.rows, classes);
    std::vector<double> z(classes);
    for (std::size_t i = 0; i < x.rows; ++i) {
        for (std::size_t c = 0; c < classes; ++c) {
            double acc = m.bias[c];
            for (std::size_t d = 0; d < x.cols; ++d) acc += m.weights(c, d) * x(i, d);
            z[c] = acc;
        }
        softmax_inplace(z);
        for (std::size_t c = 0; c < classes; ++c) probs(i, c) = z[c];
    }
    return probs;
}

std::vector<int> labels_of(std::span<const Sample> samples, std::size_t classes) {
    std::vector<int> y;
    y.reserve(samples.size());
    for (const auto& s : samples) {
        if (s.label < 0 || static_cast<std::size_t>(s.label) >= classes) throw InvalidArgument("sample label out of range");
        y.push_back(s.label);
    }
    return y;
}

} // namespace

double evaluate_loss(const BaselineModel& model, std::span<const Sample> samples, const LossConfig& loss_cfg) {
    Matrix x = design(model, samples);
    auto y = labels_of(samples, model.classes());
    return combined_loss(forward(model, x), y, loss_cfg).loss;
}

FitResult fit_baseline(std::span<const Sample> train, std::span<const Sample> val, Task task, const TrainConfig& train_cfg,
                       const LossConfig& loss_cfg, std::uint64_t seed) {
    if (train.empty() || val.empty()) throw InvalidArgument("fit_baseline needs non-empty train and val subsets");
    validate(train_cfg);
    const std::size_t classes = class_names(task).size();

    BaselineModel model;
    model.task = task;
    model.uses_metadata = train.front().meta.has_value();
    const std::size_t dims = train.front().features.size() + (model.uses_metadata ? 3u : 0u);

    // Input standardization from the training subset.
    model.input_mean.assign(dims, 0.0);
    model.input_scale.assign(dims, 0.0);
    for (const auto& s : train) {
        if (s.meta.has_value() != model.uses_metadata) throw InvalidArgument("metadata present for some samples only");
        auto raw = model_input(s.features, s.meta ? &*s.meta : nullptr);
        if (raw.size() != dims) throw InvalidArgument("inconsistent feature lengths");
        for (std::size_t d = 0; d < dims; ++d) model.input_mean[d] += raw[d];
    }
    const double inv_n = 1.0 / static_cast<double>(train.size());
    for (double& m : model.input_mean) m *= inv_n;
    for (const auto& s : train) {
        auto raw = model_input(s.features, s.meta ? &*s.meta : nullptr);
        for (std::size_t d = 0; d < dims; ++d) {
            const double dev = raw[d] - model.input_mean[d];
            model.input_scale[d] += dev * dev;
        }
    }
    for (double& sc : model.input_scale) {
        sc = std::sqrt(sc * inv_n);
        if (!(sc > 1e-12)) sc = 1.0;
    }

    // Near-zero seeded initialization; the first descent steps dominate it.
    model.weights = Matrix(classes, dims);
    model.bias.assign(classes, 0.0);
    RngStream init = Rng(seed).stream("baseline-init");
    for (double& w : model.weights.data) w = init.uniform(-1e-6, 1e-6);

    const Matrix x_train = design(model, train);
    const Matrix x_val = design(model, val);
    const auto y_train = labels_of(train, classes);
    const auto y_val = labels_of(val, classes);

    LossConfig lcfg = loss_cfg;
    if (lcfg.alpha.empty()) lcfg.alpha = inverse_frequency_alpha(y_train, classes);
    validate(lcfg, classes);

    FitResult result;
    BaselineModel best = model;
    double best_val = std::numeric_limits<double>::infinity();
    int epoch = 0;

    auto run_epoch = [&](double lr, const char* phase) {
        const Matrix probs = forward(model, x_train);
        auto lg = combined_loss(probs, y_train, lcfg);
        if (!std::isfinite(lg.loss)) throw TrainingError(epoch, "non-finite training loss");
        // Back through the softmax: dz = p * (g - <g, p>).
        Matrix grad_w(classes, dims);
        std::vector<double> grad_b(classes, 0.0);
        for (std::size_t i = 0; i < probs.rows; ++i) {
            double dot = 0.0;
            for (std::size_t c = 0; c < classes; ++c) dot += lg.grad(i, c) * probs(i, c);
            for (std::size_t c = 0; c < classes; ++c) {
                const double dz = probs(i, c) * (lg.grad(i, c) - dot);
                grad_b[c] += dz;
                for (std::size_t d = 0; d < dims; ++d) grad_w(c, d) += dz * x_train(i, d);
            }
        }
        for (std::size_t j = 0; j < model.weights.data.size(); ++j) model.weights.data[j] -= lr * grad_w.data[j];
        for (std::size_t c = 0; c < classes; ++c) model.bias[c] -= lr * grad_b[c];

        const double val_loss = combined_loss(forward(model, x_val), y_val, lcfg).loss;
        if (!std::isfinite(val_loss)) throw TrainingError(epoch, "non-finite validation loss");
        result.log.push_back({epoch, phase, lr, lg.loss, val_loss});
        if (val_loss < best_val) {
            best_val = val_loss;
            best = model;
            best.best_epoch = epoch;
        }
        ++epoch;
        return val_loss;
    };

    for (int e = 0; e < train_cfg.transfer.epochs; ++e) run_epoch(train_cfg.transfer.lr, "transfer");

    ScheduleState state = initial_schedule(train_cfg.finetune);
    for (int e = 0; e < train_cfg.finetune.max_epochs && !state.stopped; ++e) {
        const double val_loss = run_epoch(state.current_lr, "finetune");
        state = schedule_step(state, val_loss, train_cfg.finetune);
    }

    result.model = std::move(best);
    return result;
}

Prediction predict_baseline(const BaselineModel& model, std::span<const double> features, const MetaVector* meta) {
    if (model.uses_metadata && !meta) throw InvalidArgument("model expects metadata");
    auto raw = model_input(features, model.uses_metadata ? meta : nullptr);
    if (raw.size() != model.inputs()) throw InvalidArgument("feature length does not match the model");
    std::vector<double> z(model.classes());
    for (std::size_t c = 0; c < z.size(); ++c) {
        double acc = model.bias[c];
        for (std::size_t d = 0; d < raw.size(); ++d)
            acc += model.weights(c, d) * (raw[d] - model.input_mean[d]) / model.input_scale[d];
        z[c] = acc;
    }
    softmax_inplace(z);
    return Prediction{class_names(model.task), std::move(z)};
}

Json to_json(const BaselineModel& model) {
    Json weights = Json::array();
    for (std::size_t c = 0; c < model.weights.rows; ++c) {
        auto r = model.weights.row(c);
        weights.push_back(std::vector<double>(r.begin(), r.end()));
    }
    return Json{{"task", std::string(to_string(model.task))},
                {"classes", class_names(model.task)},
                {"uses_metadata", model.uses_metadata},
                {"input_mean", model.input_mean},
                {"input_scale", model.input_scale},
                {"weights", std::move(weights)},
                {"bias", model.bias},
                {"best_epoch", model.best_epoch}};
}

BaselineModel baseline_from_json(const Json& j) {
    BaselineModel m;
    try {
        m.task = task_from_string(j.at("task").get<std::string>());
        m.uses_metadata = j.at("uses_metadata").get<bool>();
        m.input_mean = j.at("input_mean").get<std::vector<double>>();
        m.input_scale = j.at("input_scale").get<std::vector<double>>();
        m.bias = j.at("bias").get<std::vector<double>>();
        m.best_epoch = j.value("best_epoch", -1);
        auto rows = j.at("weights").get<std::vector<std::vector<double>>>();
        m.weights = Matrix(rows.size(), m.input_mean.size());
        for (std::size_t c = 0; c < rows.size(); ++c) {
            if (rows[c].size() != m.input_mean.size()) throw InvalidArgument("weight row length mismatch");
            for (std::size_t d = 0; d < rows[c].size(); ++d) m.weights(c, d) = rows[c][d];
        }
    } catch (const Json::exception& e) {
        throw InvalidArgument(std::string("bad model file: ") + e.what());
    }
    if (m.bias.size() != class_names(m.task).size() || m.weights.rows != m.bias.size() ||
        m.input_scale.size() != m.input_mean.size())
        throw InvalidArgument("model dimensions are inconsistent");
    for (double s : m.input_scale)
        if (!(s > 0.0)) throw InvalidArgument("model input scales must be positive");
    return m;
}

std::string render_log_csv(const TrainingLog& log) {
    std::string out = "epoch,phase,lr,train_loss,val_loss\n";
    for (const auto& r : log)
        out += std::to_string(r.epoch) + "," + r.phase + "," + format_real(r.lr) + "," + format_real(r.train_loss) + "," +
               format_real(r.val_loss) + "\n";
    return out;
}

TrainingLog read_log_csv(const std::filesystem::path& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw IoError("cannot open " + path.string());
    std::string line;
    std::size_t row = 0;
    TrainingLog log;
    while (std::getline(f, line)) {
        ++row;
        auto cells = split_csv_line(line);
        if (row == 1) {
            if (cells != std::vector<std::string>{"epoch", "phase", "lr", "train_loss", "val_loss"})
                throw ParseError(path.string(), row, "unexpected training log header");
            continue;
        }
        if (cells.size() == 1 && cells[0].empty()) continue;
        if (cells.size() != 5) throw ParseError(path.string(), row, "expected 5 columns");
        try {
            log.push_back({static_cast<int>(parse_real(cells[0])), cells[1], parse_real(cells[2]), parse_real(cells[3]),
                           parse_real(cells[4])});
        } catch (const std::exception&) {
            throw ParseError(path.string(), row, "unparsable number");
        }
    }
    return log;
}

} // namespace ctsev
