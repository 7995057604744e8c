#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "ctsev/canonical_json.hpp"

namespace ctsev {

/// Row-major dense matrix of doubles; rows are samples, columns classes.
struct Matrix {
    std::size_t rows = 0;
    std::size_t cols = 0;
    std::vector<double> data;

    Matrix() = default;
    Matrix(std::size_t r, std::size_t c, double fill = 0.0) : rows(r), cols(c), data(r * c, fill) {}

    double& operator()(std::size_t r, std::size_t c) { return data[r * cols + c]; }
    double operator()(std::size_t r, std::size_t c) const { return data[r * cols + c]; }
    std::span<const double> row(std::size_t r) const { return {data.data() + r * cols, cols}; }
};

Matrix one_hot(std::span<const int> targets, std::size_t classes);

struct LossConfig {
    double gamma = 2.0;
    /// Per-class focal weights. Empty means all ones.
    std::vector<double> alpha;
    double epsilon = 1e-7;
    /// When false, combined_loss reduces to the focal term alone.
    bool soft_f1 = true;
};

void validate(const LossConfig& cfg, std::size_t classes);
Json to_json(const LossConfig& cfg);
/// Missing keys keep their defaults.
LossConfig loss_config_from_json(const Json& j);

struct LossGrad {
    double loss = 0.0;
    std::vector<double> grad;
};

struct BatchLossGrad {
    double loss = 0.0;
    Matrix grad;
};

/// -alpha_t (1 - p_t)^gamma ln p_t and its gradient with respect to probs
/// (non-zero only at the target). Throws DomainError when p_t <= 0.
LossGrad focal_loss(std::span<const double> probs, int target, const LossConfig& cfg);

/// 1 - mean_c f1_c with the Dice-style soft F1
/// f1_c = 2 sum_i p_ic y_ic / (sum_i p_ic + sum_i y_ic + eps).
BatchLossGrad soft_f1_loss(const Matrix& probs, const Matrix& targets, double epsilon);

/// soft-F1 loss plus batch-mean focal loss; gradients add.
BatchLossGrad combined_loss(const Matrix& probs, std::span<const int> targets, const LossConfig& cfg);

/// Inverse class frequency normalized to mean 1. Classes absent from
/// `labels` are counted as if seen once.
std::vector<double> inverse_frequency_alpha(std::span<const int> labels, std::size_t classes);

} // namespace ctsev
