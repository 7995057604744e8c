#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <vector>

#include "ctsev/loss.hpp"
#include "ctsev/volume.hpp"

/// Reference computations written straight from the definitions. They share
/// no code with the library beyond its plain data types.
namespace ctsev::oracles {

struct Affine {
    double a, bx, by, bz;
    double operator()(double px, double py, double pz) const { return a + bx * px + by * py + bz * pz; }
};

/// Affine field sampled at voxel centers.
inline Volume affine_volume(Shape s, Spacing sp, const Affine& f) {
    std::vector<float> data(s.voxels());
    for (int z = 0; z < s.nz; ++z)
        for (int y = 0; y < s.ny; ++y)
            for (int x = 0; x < s.nx; ++x)
                data[s.index(z, y, x)] =
                    static_cast<float>(f((x + 0.5) * sp.dx, (y + 0.5) * sp.dy, (z + 0.5) * sp.dz));
    return Volume(s, sp, Unit::HU, std::move(data));
}

/// Physical source coordinate seen by output index i: the output center mapped
/// into source index space, clamped to the first/last source center.
inline double source_coord(int i, int n, double s, double t) {
    const double u = std::clamp((i + 0.5) * t / s - 0.5, 0.0, static_cast<double>(n - 1));
    return (u + 0.5) * s;
}

inline int expected_extent(int n, double s, double t) { return std::max(1, static_cast<int>(std::lround(n * s / t))); }

inline double max_relative_error(const Volume& out, const Shape& in, const Spacing& src, const Affine& f) {
    const Shape& o = out.shape();
    const Spacing& t = out.spacing();
    double worst = 0.0;
    for (int z = 0; z < o.nz; ++z)
        for (int y = 0; y < o.ny; ++y)
            for (int x = 0; x < o.nx; ++x) {
                const double expect = f(source_coord(x, in.nx, src.dx, t.dx), source_coord(y, in.ny, src.dy, t.dy),
                                        source_coord(z, in.nz, src.dz, t.dz));
                worst = std::max(worst, std::abs(out.at(z, y, x) - expect) / std::abs(expect));
            }
    return worst;
}

/// Batch loss from the definitions, without gradients.
inline double combined_loss_value(const Matrix& p, const std::vector<int>& t, double gamma,
                                  const std::vector<double>& alpha, double eps, bool soft_f1) {
    double focal = 0.0;
    for (std::size_t i = 0; i < p.rows; ++i) {
        const double pt = p(i, static_cast<std::size_t>(t[i]));
        focal += -alpha[static_cast<std::size_t>(t[i])] * std::pow(1.0 - pt, gamma) * std::log(pt);
    }
    focal /= static_cast<double>(p.rows);
    if (!soft_f1) return focal;
    double f1_sum = 0.0;
    for (std::size_t c = 0; c < p.cols; ++c) {
        double inter = 0.0, psum = 0.0, ysum = 0.0;
        for (std::size_t i = 0; i < p.rows; ++i) {
            const double y = t[i] == static_cast<int>(c) ? 1.0 : 0.0;
            inter += p(i, c) * y;
            psum += p(i, c);
            ysum += y;
        }
        f1_sum += 2.0 * inter / (psum + ysum + eps);
    }
    return focal + 1.0 - f1_sum / static_cast<double>(p.cols);
}

/// Worst relative gap between the analytic gradient and central differences
/// of combined_loss_value at step h.
inline double gradient_error(const Matrix& p, const std::vector<int>& t, const LossConfig& cfg, double h = 1e-6) {
    const auto lg = combined_loss(p, t, cfg);
    double worst = 0.0;
    for (std::size_t j = 0; j < p.data.size(); ++j) {
        Matrix up = p, down = p;
        up.data[j] += h;
        down.data[j] -= h;
        const double fd = (combined_loss_value(up, t, cfg.gamma, cfg.alpha, cfg.epsilon, cfg.soft_f1) -
                           combined_loss_value(down, t, cfg.gamma, cfg.alpha, cfg.epsilon, cfg.soft_f1)) /
                          (2 * h);
        const double g = lg.grad.data[j];
        worst = std::max(worst, std::abs(g - fd) / std::max({std::abs(g), std::abs(fd), 1e-8}));
    }
    return worst;
}

/// Rows drawn from U(0.05, 1) and normalized, so every entry is >= 0.05 / cols.
inline Matrix random_probs(std::mt19937_64& gen, std::size_t rows, std::size_t cols) {
    std::uniform_real_distribution<double> u(0.05, 1.0);
    Matrix m(rows, cols);
    for (std::size_t i = 0; i < rows; ++i) {
        double sum = 0.0;
        for (std::size_t c = 0; c < cols; ++c) sum += (m(i, c) = u(gen));
        for (std::size_t c = 0; c < cols; ++c) m(i, c) /= sum;
    }
    return m;
}

/// Mann-Whitney AUC by exhaustive pair counting.
inline double pair_count_auc(const std::vector<double>& s, const std::vector<int>& y) {
    std::int64_t twice_wins = 0, pairs = 0;
    for (std::size_t i = 0; i < s.size(); ++i)
        for (std::size_t j = 0; j < s.size(); ++j) {
            if (y[i] != 1 || y[j] != 0) continue;
            ++pairs;
            twice_wins += s[i] > s[j] ? 2 : (s[i] == s[j] ? 1 : 0);
        }
    return static_cast<double>(twice_wins) / (2.0 * static_cast<double>(pairs));
}

/// Plateau/early-stop counters kept independently of ScheduleState.
struct PlateauOracle {
    double best = std::numeric_limits<double>::infinity();
    int since = 0;
    int last_best = -1;
    int epoch = 0;

    void observe(double loss) {
        if (loss < best) best = loss, since = 0, last_best = epoch;
        else ++since;
        ++epoch;
    }
    bool stopped(int patience) const { return since >= patience; }
};

} // namespace ctsev::oracles
