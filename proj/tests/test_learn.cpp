#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <map>
#include <random>
#include <set>

#include "ctsev/baseline.hpp"
#include "ctsev/errors.hpp"
#include "ctsev/kfold.hpp"
#include "ctsev/loss.hpp"
#include "ctsev/metrics.hpp"
#include "ctsev/schedule.hpp"
#include "oracles.hpp"
#include "test_util.hpp"

using namespace ctsev;

using namespace ctsev::oracles;

TEST(FocalLoss, PerfectTargetIsZero) {
    EXPECT_EQ(focal_loss(std::vector<double>{0.0, 1.0}, 1, {}).loss, 0.0);
}

TEST(FocalLoss, GammaZeroIsCrossEntropy) {
    LossConfig cfg;
    cfg.gamma = 0.0;
    EXPECT_NEAR(focal_loss(std::vector<double>{0.5, 0.5}, 0, cfg).loss, std::log(2.0), 1e-15);
    std::mt19937_64 gen(81);
    for (int trial = 0; trial < 100; ++trial) {
        const auto p = random_probs(gen, 1, 3);
        for (int t = 0; t < 3; ++t)
            EXPECT_NEAR(focal_loss(p.row(0), t, cfg).loss, -std::log(p(0, static_cast<std::size_t>(t))), 1e-12);
    }
}

TEST(FocalLoss, GammaTwoArithmetic) {
    EXPECT_NEAR(focal_loss(std::vector<double>{0.1, 0.9}, 1, {}).loss, 0.01 * -std::log(0.9), 1e-15);
    EXPECT_NEAR(focal_loss(std::vector<double>{0.1, 0.9}, 1, {}).loss, 1.05361e-3, 1e-8);
}

TEST(FocalLoss, GradientFormulaAtTarget) {
    LossConfig cfg;
    cfg.alpha = {0.5, 2.0};
    const double pt = 0.3, g = 2.0;
    const auto lg = focal_loss(std::vector<double>{0.7, 0.3}, 1, cfg);
    EXPECT_EQ(lg.grad[0], 0.0);
    EXPECT_NEAR(lg.grad[1], 2.0 * (g * (1 - pt) * std::log(pt) - (1 - pt) * (1 - pt) / pt), 1e-12);
}

TEST(FocalLoss, NonPositiveTargetProbabilityRaises) {
    EXPECT_THROW(focal_loss(std::vector<double>{1.0, 0.0}, 1, {}), DomainError);
}

TEST(SoftF1, PerfectPredictionNearZero) {
    const std::vector<int> t{0, 1, 1, 0};
    const auto lg = soft_f1_loss(one_hot(t, 2), one_hot(t, 2), 1e-7);
    EXPECT_LT(lg.loss, 1e-7);
}

TEST(SoftF1, UniformOnBalancedTargetsIsHalf) {
    const std::vector<int> t{0, 1, 0, 1, 0, 1};
    const Matrix p(6, 2, 0.5);
    // Per class 2 * 1.5 / (3 + 3) = 0.5.
    EXPECT_NEAR(soft_f1_loss(p, one_hot(t, 2), 0.0).loss, 0.5, 1e-15);
}

TEST(SoftF1, ShapeMismatchRaises) {
    EXPECT_THROW(soft_f1_loss(Matrix(2, 2, 0.5), Matrix(3, 2, 0.0), 1e-7), InvalidArgument);
}

TEST(CombinedLoss, ValueMatchesOracleAndFocalOnlyMode) {
    std::mt19937_64 gen(82);
    std::uniform_int_distribution<int> cls(0, 2);
    for (int trial = 0; trial < 50; ++trial) {
        const auto p = random_probs(gen, 7, 3);
        std::vector<int> t(7);
        for (auto& x : t) x = cls(gen);
        LossConfig cfg;
        cfg.alpha = {0.7, 1.1, 1.3};
        EXPECT_NEAR(combined_loss(p, t, cfg).loss, combined_loss_value(p, t, 2.0, cfg.alpha, 1e-7, true), 1e-12);
        cfg.soft_f1 = false;
        EXPECT_NEAR(combined_loss(p, t, cfg).loss, combined_loss_value(p, t, 2.0, cfg.alpha, 1e-7, false), 1e-12);
    }
}

TEST(CombinedLoss, GradientMatchesCentralDifferences) {
    std::mt19937_64 gen(83);
    std::uniform_real_distribution<double> a(0.2, 3.0);
    double worst = 0.0;
    for (double gamma : {0.0, 1.0, 2.0, 5.0}) {
        for (int trial = 0; trial < 50; ++trial) {
            const std::size_t classes = 2 + static_cast<std::size_t>(trial % 2);
            const auto p = random_probs(gen, 6, classes);
            std::vector<int> t(6);
            for (std::size_t i = 0; i < 6; ++i) t[i] = static_cast<int>((i + static_cast<std::size_t>(trial)) % classes);
            LossConfig cfg;
            cfg.gamma = gamma;
            cfg.alpha.resize(classes);
            for (auto& x : cfg.alpha) x = a(gen);
            worst = std::max(worst, gradient_error(p, t, cfg));
        }
    }
    EXPECT_LE(worst, 1e-6);
}

TEST(LossConfig, AlphaLengthAndJson) {
    LossConfig cfg;
    cfg.alpha = {1.0, 2.0};
    EXPECT_THROW(validate(cfg, 3), InvalidArgument);
    cfg.alpha = {1.0, -2.0};
    EXPECT_THROW(validate(cfg, 2), InvalidArgument);
    cfg.alpha = {0.5, 1.5};
    cfg.gamma = 1.0;
    EXPECT_EQ(to_json(loss_config_from_json(to_json(cfg))), to_json(cfg));
    EXPECT_THROW(loss_config_from_json(Json{{"gama", 2.0}}), InvalidArgument);
}

TEST(LossConfig, InverseFrequencyAlphaHasMeanOne) {
    const std::vector<int> labels{0, 0, 0, 1, 2, 2};
    const auto a = inverse_frequency_alpha(labels, 3);
    EXPECT_NEAR((a[0] + a[1] + a[2]) / 3.0, 1.0, 1e-15);
    EXPECT_NEAR(a[1] / a[0], 3.0, 1e-12);
    EXPECT_NEAR(a[2] / a[0], 1.5, 1e-12);
}

TEST(Schedule, DecreasingLossNeverDecaysOrStops) {
    const FinetunePhase cfg;
    auto s = initial_schedule(cfg);
    for (int e = 0; e < 240; ++e) s = schedule_step(s, 10.0 - 0.01 * e, cfg);
    EXPECT_EQ(s.current_lr, 1e-5);
    EXPECT_FALSE(s.stopped);
    EXPECT_EQ(s.best_epoch, 239);
}

TEST(Schedule, FlatAfterFirstEpochTranscript) {
    const FinetunePhase cfg;
    auto s = schedule_step(initial_schedule(cfg), 1.0, cfg);
    EXPECT_EQ(s.best_epoch, 0);
    for (int j = 1; j <= 36; ++j) {
        s = schedule_step(s, 1.0, cfg);
        const double expect = j < 8 ? 1e-5 : (j < 16 ? 1e-6 : 1e-7);
        EXPECT_DOUBLE_EQ(s.current_lr, expect) << j;
        EXPECT_EQ(s.stopped, j == 36) << j;
    }
    EXPECT_THROW(schedule_step(s, 0.5, cfg), ContractError);
}

TEST(Schedule, EqualLossIsNotImprovement) {
    const FinetunePhase cfg;
    auto s = schedule_step(initial_schedule(cfg), 1.0, cfg);
    s = schedule_step(s, 1.0, cfg);
    EXPECT_EQ(s.best_epoch, 0);
    EXPECT_EQ(s.epochs_since_improve_stop, 1);
}

TEST(Schedule, FuzzedSequencesRespectBoundsAndStopRule) {
    const FinetunePhase cfg;
    std::mt19937_64 gen(84);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int run = 0; run < 2000; ++run) {
        auto s = initial_schedule(cfg);
        PlateauOracle oracle;
        double prev_lr = s.current_lr;
        for (int e = 0; e < 240 && !s.stopped; ++e) {
            const double loss = u(gen);
            s = schedule_step(s, loss, cfg);
            oracle.observe(loss);
            ASSERT_LE(s.current_lr, cfg.lr_init);
            ASSERT_GE(s.current_lr, cfg.lr_floor);
            ASSERT_LE(s.current_lr, prev_lr);
            prev_lr = s.current_lr;
            ASSERT_EQ(s.best_epoch, oracle.last_best);
            ASSERT_EQ(s.stopped, oracle.stopped(cfg.stop_patience));
        }
    }
}

TEST(TrainConfig, TaskDefaultsAndJson) {
    const auto p = TrainConfig::for_task(Task::Presence);
    const auto s = TrainConfig::for_task(Task::Severity);
    EXPECT_EQ(p.transfer.batch, 8);
    EXPECT_EQ(s.transfer.batch, 4);
    EXPECT_EQ(p.finetune.max_epochs, 240);
    EXPECT_EQ(to_json(train_config_from_json(to_json(p), Task::Presence)), to_json(p));
    Json bad = to_json(p);
    bad["finetune"]["lr_floor"] = 1.0;
    EXPECT_THROW(train_config_from_json(bad, Task::Presence), InvalidArgument);
}

namespace {

std::vector<std::string> make_ids(std::size_t n) {
    std::vector<std::string> ids;
    for (std::size_t i = 0; i < n; ++i) ids.push_back("s" + std::to_string(i));
    return ids;
}

} // namespace

TEST(KFold, TenSamplesGiveDisjointPairs) {
    const auto ids = make_ids(10);
    const std::vector<int> labels{0, 1, 0, 1, 0, 1, 0, 1, 0, 1};
    const auto plan = kfold_split(ids, labels, 5, 1);
    std::multiset<std::size_t> seen;
    for (const auto& f : plan.folds) {
        EXPECT_EQ(f.test.size(), 2u);
        seen.insert(f.test.begin(), f.test.end());
    }
    EXPECT_EQ(seen.size(), 10u);
    EXPECT_EQ(std::set<std::size_t>(seen.begin(), seen.end()).size(), 10u);
}

TEST(KFold, BalancedHundredDealsTenPerClass) {
    const auto ids = make_ids(100);
    std::vector<int> labels(100);
    for (std::size_t i = 0; i < 100; ++i) labels[i] = static_cast<int>(i % 2);
    const auto plan = kfold_split(ids, labels, 5, 2);
    for (const auto& f : plan.folds) {
        int per[2] = {0, 0};
        for (auto i : f.test) ++per[labels[i]];
        EXPECT_EQ(per[0], 10);
        EXPECT_EQ(per[1], 10);
        EXPECT_EQ(f.val.size(), 10u);
        EXPECT_EQ(f.train.size(), 70u);
    }
}

TEST(KFold, SeedDeterminism) {
    const auto ids = make_ids(40);
    std::vector<int> labels(40);
    for (std::size_t i = 0; i < 40; ++i) labels[i] = static_cast<int>(i % 3 == 0);
    const auto a = kfold_split(ids, labels, 5, 3);
    EXPECT_EQ(kfold_split(ids, labels, 5, 3), a);
    const auto b = kfold_split(ids, labels, 5, 4);
    EXPECT_NE(b, a);
    for (std::size_t f = 0; f < 5; ++f) EXPECT_EQ(b.folds[f].test.size(), a.folds[f].test.size());
}

TEST(KFold, ProportionsWithinOnePerClass) {
    std::mt19937_64 gen(85);
    for (std::size_t n = 50; n <= 200; n += 7) {
        for (int classes = 2; classes <= 3; ++classes) {
            std::vector<int> labels(n);
            const std::vector<double> w = classes == 2 ? std::vector<double>{0.7, 0.3}
                                                       : std::vector<double>{0.3, 0.25, 0.45};
            std::discrete_distribution<int> d(w.begin(), w.end());
            for (auto& l : labels) l = d(gen);
            std::map<int, double> count;
            for (int l : labels) count[l] += 1;
            if (std::any_of(count.begin(), count.end(), [](auto& kv) { return kv.second < 5; })) continue;
            const auto plan = kfold_split(make_ids(n), labels, 5, n);
            for (const auto& f : plan.folds) {
                for (auto& [c, total] : count) {
                    auto in = [&](const std::vector<std::size_t>& idx) {
                        return static_cast<double>(std::count_if(idx.begin(), idx.end(), [&](auto i) { return labels[i] == c; }));
                    };
                    EXPECT_LE(std::abs(in(f.train) - 0.7 * total), 1.0 + 1e-9);
                    EXPECT_LE(std::abs(in(f.val) - 0.1 * total), 1.0 + 1e-9);
                    EXPECT_LE(std::abs(in(f.test) - 0.2 * total), 1.0 + 1e-9);
                }
            }
        }
    }
}

TEST(KFold, SmallClassRaises) {
    const auto ids = make_ids(12);
    std::vector<int> labels(12, 0);
    labels[0] = labels[1] = 1;
    EXPECT_THROW(kfold_split(ids, labels, 5, 1), StratificationError);
}

TEST(KFold, JsonRoundTrip) {
    const auto ids = make_ids(30);
    std::vector<int> labels(30);
    for (std::size_t i = 0; i < 30; ++i) labels[i] = static_cast<int>(i % 3);
    const auto plan = kfold_split(ids, labels, 5, 9);
    EXPECT_EQ(fold_plan_from_json(to_json(plan)), plan);
}

TEST(Features, ConstantVolumes) {
    const Volume zero({2, 2, 2}, {}, Unit::Grayscale, std::vector<float>(8, 0.0f));
    auto f = extract_features(zero);
    ASSERT_EQ(f.size(), kImageFeatureCount);
    EXPECT_EQ(f[0], 1.0);
    EXPECT_EQ(f[kHistogramBins], 0.0);
    EXPECT_EQ(f[kHistogramBins + 1], 0.0);
    EXPECT_EQ(f[kHistogramBins + 2], 0.0);
    const Volume one({2, 2, 2}, {}, Unit::Grayscale, std::vector<float>(8, 1.0f));
    f = extract_features(one);
    EXPECT_EQ(f[kHistogramBins - 1], 1.0);
    EXPECT_EQ(f[kHistogramBins + 2], 1.0);
}

TEST(Features, HistogramSumsToOne) {
    std::mt19937_64 gen(86);
    for (int trial = 0; trial < 20; ++trial) {
        const auto v = fixtures::random_volume(gen, {4, 5, 6}, {}, -2.0f, 2.5f, Unit::ZScored);
        const auto f = extract_features(v);
        double sum = 0.0;
        for (std::size_t b = 0; b < kHistogramBins; ++b) sum += f[b];
        EXPECT_NEAR(sum, 1.0, 1e-9);
    }
}

namespace {

/// Two-class cohort whose label is ILR > 0.25, with noise image features.
std::vector<Sample> ilr_cohort(std::mt19937_64& gen, std::size_t n) {
    std::uniform_real_distribution<double> ilr(0.0, 0.6), noise(0.0, 1.0);
    std::uniform_int_distribution<int> age(20, 90);
    std::vector<Sample> out;
    for (std::size_t i = 0; i < n; ++i) {
        Sample s;
        for (std::size_t f = 0; f < kImageFeatureCount; ++f) s.features.push_back(noise(gen));
        const double r = ilr(gen);
        s.meta = assemble_metadata(PatientMeta{age(gen), i % 2 ? Sex::Male : Sex::Female, r});
        s.label = r > 0.25 ? 1 : 0;
        out.push_back(std::move(s));
    }
    return out;
}

} // namespace

TEST(Baseline, LearnsSeparableSetAndKeepsBestEpoch) {
    std::mt19937_64 gen(87);
    const auto train = ilr_cohort(gen, 80);
    const auto val = ilr_cohort(gen, 20);
    const auto fit = fit_baseline(train, val, Task::Severity, TrainConfig::for_task(Task::Severity), {}, 5);
    ASSERT_FALSE(fit.log.empty());
    EXPECT_LT(fit.log.back().val_loss, fit.log.front().val_loss);
    const auto best = std::min_element(fit.log.begin(), fit.log.end(),
                                       [](const auto& a, const auto& b) { return a.val_loss < b.val_loss; });
    EXPECT_EQ(fit.model.best_epoch, best->epoch);
    EXPECT_EQ(fit.log.front().phase, "transfer");
    EXPECT_EQ(fit.log[10].phase, "finetune");
    EXPECT_EQ(fit.log[10].lr, 1e-5);
}

TEST(Baseline, HeldOutAucOnIlrLabels) {
    std::mt19937_64 gen(88);
    const auto train = ilr_cohort(gen, 70);
    const auto val = ilr_cohort(gen, 10);
    const auto test = ilr_cohort(gen, 40);
    const auto fit = fit_baseline(train, val, Task::Severity, TrainConfig::for_task(Task::Severity), {}, 6);
    std::vector<double> scores;
    std::vector<int> labels;
    for (const auto& s : test) {
        scores.push_back(predict_baseline(fit.model, s.features, &*s.meta).probs[1]);
        labels.push_back(s.label);
    }
    EXPECT_GE(roc_auc(scores, labels), 0.95);
}

TEST(Baseline, DeterministicLogs) {
    std::mt19937_64 gen(89);
    const auto train = ilr_cohort(gen, 30);
    const auto val = ilr_cohort(gen, 10);
    const auto cfg = TrainConfig::for_task(Task::Severity);
    const auto a = fit_baseline(train, val, Task::Severity, cfg, {}, 7);
    const auto b = fit_baseline(train, val, Task::Severity, cfg, {}, 7);
    EXPECT_EQ(render_log_csv(a.log), render_log_csv(b.log));
    EXPECT_EQ(a.log, b.log);
}

TEST(Baseline, EmptySubsetRaises) {
    std::mt19937_64 gen(90);
    const auto train = ilr_cohort(gen, 10);
    EXPECT_THROW(fit_baseline(train, {}, Task::Severity, TrainConfig::for_task(Task::Severity), {}, 1),
                 InvalidArgument);
}

namespace {

BaselineModel two_by_two(const std::vector<double>& w, const std::vector<double>& b) {
    BaselineModel m;
    m.task = Task::Severity;
    m.input_mean = {0.0, 0.0};
    m.input_scale = {1.0, 1.0};
    m.weights = Matrix(2, 2);
    m.weights.data = w;
    m.bias = b;
    return m;
}

} // namespace

TEST(Baseline, PredictionArithmetic) {
    const std::vector<double> x{0.5, -1.0};
    const auto zero = predict_baseline(two_by_two({0, 0, 0, 0}, {0, 0}), x);
    EXPECT_DOUBLE_EQ(zero.probs[0], 0.5);

    const auto m = two_by_two({1.0, 2.0, -0.5, 0.25}, {0.1, -0.2});
    const double z0 = 1.0 * 0.5 + 2.0 * -1.0 + 0.1, z1 = -0.5 * 0.5 + 0.25 * -1.0 - 0.2;
    const double p1 = std::exp(z1) / (std::exp(z0) + std::exp(z1));
    const auto p = predict_baseline(m, x);
    EXPECT_NEAR(p.probs[1], p1, 1e-15);
    EXPECT_NEAR(p.probs[0] + p.probs[1], 1.0, 1e-9);

    const auto scaled = predict_baseline(two_by_two({3.0, 6.0, -1.5, 0.75}, {0.3, -0.6}), x);
    EXPECT_EQ(argmax(scaled.probs), argmax(p.probs));
}

TEST(Baseline, ModelJsonAndLogCsvRoundTrip) {
    std::mt19937_64 gen(91);
    const auto train = ilr_cohort(gen, 20);
    const auto val = ilr_cohort(gen, 6);
    const auto fit = fit_baseline(train, val, Task::Severity, TrainConfig::for_task(Task::Severity), {}, 8);
    const Json j = to_json(fit.model);
    EXPECT_EQ(canonical_dump(to_json(baseline_from_json(j))), canonical_dump(j));

    fixtures::TempDir dir("log");
    write_text_file(dir / "log.csv", render_log_csv(fit.log));
    const auto back = read_log_csv(dir / "log.csv");
    ASSERT_EQ(back.size(), fit.log.size());
    EXPECT_EQ(render_log_csv(back), render_log_csv(fit.log));
}
