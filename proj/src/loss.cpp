#include "ctsev/loss.hpp"

#include <cmath>
#include <string>

#include "ctsev/errors.hpp"

namespace ctsev {

Matrix one_hot(std::span<const int> targets, std::size_t classes) {
    Matrix m(targets.size(), classes);
    for (std::size_t i = 0; i < targets.size(); ++i) {
        if (targets[i] < 0 || static_cast<std::size_t>(targets[i]) >= classes)
            throw InvalidArgument("target " + std::to_string(targets[i]) + " out of range");
        m(i, static_cast<std::size_t>(targets[i])) = 1.0;
    }
    return m;
}

void validate(const LossConfig& cfg, std::size_t classes) {
    if (!(cfg.gamma >= 0.0) || !std::isfinite(cfg.gamma)) throw InvalidArgument("focal gamma must be >= 0");
    if (!cfg.alpha.empty()) {
        if (cfg.alpha.size() != classes)
            throw InvalidArgument("alpha has " + std::to_string(cfg.alpha.size()) + " weights for " +
                                  std::to_string(classes) + " classes");
        for (double a : cfg.alpha)
            if (!(a > 0.0) || !std::isfinite(a)) throw InvalidArgument("alpha weights must be positive");
    }
    if (!(cfg.epsilon >= 0.0)) throw InvalidArgument("epsilon must be >= 0");
}

LossGrad focal_loss(std::span<const double> probs, int target, const LossConfig& cfg) {
    if (target < 0 || static_cast<std::size_t>(target) >= probs.size())
        throw InvalidArgument("target index out of range");
    const auto t = static_cast<std::size_t>(target);
    const double p = probs[t];
    if (!(p > 0.0)) throw DomainError("focal loss undefined for p_t <= 0");
    const double alpha = cfg.alpha.empty() ? 1.0 : cfg.alpha.at(t);
    const double q = 1.0 - p;
    const double log_p = std::log(p);
    const double modulator = cfg.gamma == 0.0 ? 1.0 : std::pow(q, cfg.gamma);

    LossGrad out;
    out.loss = -alpha * modulator * log_p;
    out.grad.assign(probs.size(), 0.0);
    // d/dp of the modulator term; its limit is 0 as q -> 0 for every gamma > 0.
    double dmod = 0.0;
    if (cfg.gamma != 0.0 && q > 0.0) dmod = cfg.gamma * std::pow(q, cfg.gamma - 1.0) * log_p;
    out.grad[t] = alpha * (dmod - modulator / p);
    return out;
}

BatchLossGrad soft_f1_loss(const Matrix& probs, const Matrix& targets, double epsilon) {
    if (probs.rows != targets.rows || probs.cols != targets.cols)
        throw InvalidArgument("soft_f1_loss: probs and targets shapes differ");
    if (probs.cols == 0) throw InvalidArgument("soft_f1_loss: no classes");
    const std::size_t n = probs.rows, classes = probs.cols;
    std::vector<double> overlap(classes, 0.0), psum(classes, 0.0), ysum(classes, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t c = 0; c < classes; ++c) {
            overlap[c] += probs(i, c) * targets(i, c);
            psum[c] += probs(i, c);
            ysum[c] += targets(i, c);
        }
    }
    BatchLossGrad out;
    out.grad = Matrix(n, classes);
    double f1_sum = 0.0;
    const double inv_c = 1.0 / static_cast<double>(classes);
    for (std::size_t c = 0; c < classes; ++c) {
        const double denom = psum[c] + ysum[c] + epsilon;
        if (denom == 0.0) continue; // no mass and no targets: f1_c = 0 with zero gradient
        f1_sum += 2.0 * overlap[c] / denom;
        for (std::size_t i = 0; i < n; ++i) {
            const double df1 = (2.0 * targets(i, c) * denom - 2.0 * overlap[c]) / (denom * denom);
            out.grad(i, c) = -inv_c * df1;
        }
    }
    out.loss = 1.0 - f1_sum * inv_c;
    return out;
}

BatchLossGrad combined_loss(const Matrix& probs, std::span<const int> targets, const LossConfig& cfg) {
    if (targets.size() != probs.rows) throw InvalidArgument("combined_loss: one target per row required");
    if (probs.rows == 0) throw InvalidArgument("combined_loss: empty batch");
    validate(cfg, probs.cols);
    BatchLossGrad out;
    if (cfg.soft_f1) {
        out = soft_f1_loss(probs, one_hot(targets, probs.cols), cfg.epsilon);
    } else {
        out.grad = Matrix(probs.rows, probs.cols);
    }
    const double inv_n = 1.0 / static_cast<double>(probs.rows);
    for (std::size_t i = 0; i < probs.rows; ++i) {
        auto f = focal_loss(probs.row(i), targets[i], cfg);
        out.loss += f.loss * inv_n;
        for (std::size_t c = 0; c < probs.cols; ++c) out.grad(i, c) += f.grad[c] * inv_n;
    }
    return out;
}

std::vector<double> inverse_frequency_alpha(std::span<const int> labels, std::size_t classes) {
    std::vector<double> counts(classes, 0.0);
    for (int l : labels) {
        if (l < 0 || static_cast<std::size_t>(l) >= classes) throw InvalidArgument("label out of range");
        counts[static_cast<std::size_t>(l)] += 1.0;
    }
    std::vector<double> alpha(classes);
    double sum = 0.0;
    for (std::size_t c = 0; c < classes; ++c) {
        alpha[c] = 1.0 / std::max(counts[c], 1.0);
        sum += alpha[c];
    }
    for (double& a : alpha) a *= static_cast<double>(classes) / sum;
    return alpha;
}

Json to_json(const LossConfig& cfg) {
    return Json{{"gamma", cfg.gamma}, {"alpha", cfg.alpha}, {"epsilon", cfg.epsilon}, {"soft_f1", cfg.soft_f1}};
}

LossConfig loss_config_from_json(const Json& j) {
    LossConfig cfg;
    require_known_keys(j, {"gamma", "alpha", "epsilon", "soft_f1"}, "loss config");
    try {
        cfg.gamma = j.value("gamma", cfg.gamma);
        cfg.alpha = j.value("alpha", cfg.alpha);
        cfg.epsilon = j.value("epsilon", cfg.epsilon);
        cfg.soft_f1 = j.value("soft_f1", cfg.soft_f1);
    } catch (const Json::exception& e) {
        throw InvalidArgument(std::string("bad loss config: ") + e.what());
    }
    if (!std::isfinite(cfg.gamma) || cfg.gamma < 0.0) throw InvalidArgument("loss gamma must be finite and >= 0");
    if (!(cfg.epsilon > 0.0)) throw InvalidArgument("loss epsilon must be positive");
    return cfg;
}

} // namespace ctsev
