// One PASS/FAIL line per acceptance criterion; exit status 1 if any fails.

#include <chrono>
#include <cmath>
#include <cstring>
#include <functional>
#include <iomanip>
#include <iostream>
#include <map>
#include <random>
#include <set>
#include <sstream>

#include "cli.hpp"
#include "ctsev/baseline.hpp"
#include "ctsev/canonical_json.hpp"
#include "ctsev/cohort.hpp"
#include "ctsev/ensemble.hpp"
#include "ctsev/ilr.hpp"
#include "ctsev/kfold.hpp"
#include "ctsev/metrics.hpp"
#include "ctsev/nifti.hpp"
#include "ctsev/prediction.hpp"
#include "ctsev/preprocess.hpp"
#include "ctsev/schedule.hpp"
#include "oracles.hpp"
#include "test_util.hpp"

using namespace ctsev;
using namespace ctsev::oracles;
namespace fs = std::filesystem;

namespace {

struct Outcome {
    bool pass = true;
    std::string detail;

    void require(bool ok, const std::string& what) {
        if (!ok && pass) {
            pass = false;
            detail = what;
        }
    }
};

std::string fmt(double x, int precision = 3) {
    std::ostringstream s;
    s << std::setprecision(precision) << x;
    return s.str();
}

// ---------------------------------------------------------------------------

Outcome ilr_oracle() {
    Outcome o;
    std::mt19937_64 gen(1);
    std::uniform_int_distribution<int> ext(1, 24);
    std::uniform_real_distribution<double> u(0.0, 0.6);
    double worst = 0.0;
    for (int trial = 0; trial < 1000; ++trial) {
        const Shape s{ext(gen), ext(gen), ext(gen)};
        auto mask = fixtures::random_mask(gen, s, {1.0, 1.0, 1.0}, u(gen) + 0.05, u(gen) * (trial % 10 == 0 ? 0 : 1));
        std::int64_t lung = 0, infection = 0;
        for (auto l : mask.data()) {
            lung += l == 1;
            infection += l == 2;
        }
        if (lung + infection == 0) continue;
        const double expect = static_cast<double>(infection) / static_cast<double>(lung + infection);
        worst = std::max(worst, std::abs(compute_ilr(mask) - expect));
    }
    o.require(worst <= 1e-12, "max |ilr - oracle| = " + fmt(worst));
    if (o.pass) o.detail = "1000 maps, max error " + fmt(worst);
    return o;
}

Outcome auc_oracle() {
    Outcome o;
    std::mt19937_64 gen(2);
    std::uniform_int_distribution<int> len(2, 500);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    double worst_trap = 0.0;
    int mismatches = 0;
    for (int trial = 0; trial < 1000; ++trial) {
        const auto n = static_cast<std::size_t>(len(gen));
        const bool coarse = trial % 2 == 0;
        std::vector<double> s(n);
        std::vector<int> y(n);
        for (std::size_t i = 0; i < n; ++i) {
            s[i] = coarse ? std::floor(u(gen) * 8) / 8 : u(gen);
            y[i] = u(gen) < 0.4 ? 1 : 0;
        }
        y[0] = 0;
        y[1] = 1;
        const double auc = roc_auc(s, y);
        mismatches += auc != pair_count_auc(s, y);
        worst_trap = std::max(worst_trap, std::abs(trapezoid_area(roc_points(s, y)) - auc));
    }
    o.require(mismatches == 0, std::to_string(mismatches) + " instances differ from pair counting");
    o.require(worst_trap <= 1e-12, "trapezoid gap " + fmt(worst_trap));
    if (o.pass) o.detail = "1000 instances exact, trapezoid gap " + fmt(worst_trap);
    return o;
}

Outcome loss_gradient() {
    Outcome o;
    std::mt19937_64 gen(3);
    std::uniform_real_distribution<double> a(0.1, 3.0);
    std::uniform_int_distribution<int> rows(1, 16), cls(2, 3);
    const double gammas[] = {0.0, 1.0, 2.0, 5.0};
    double worst = 0.0;
    for (int trial = 0; trial < 1000; ++trial) {
        const auto c = static_cast<std::size_t>(cls(gen));
        const auto n = static_cast<std::size_t>(rows(gen));
        const auto p = random_probs(gen, n, c);
        std::vector<int> t(n);
        for (auto& x : t) x = static_cast<int>(gen() % c);
        LossConfig cfg;
        cfg.gamma = gammas[trial % 4];
        cfg.epsilon = 1e-7;
        cfg.alpha.resize(c);
        for (auto& x : cfg.alpha) x = a(gen);
        worst = std::max(worst, gradient_error(p, t, cfg));
    }
    double ce_gap = 0.0;
    LossConfig ce;
    ce.gamma = 0.0;
    for (int trial = 0; trial < 1000; ++trial) {
        const auto p = random_probs(gen, 1, 3);
        const int t = static_cast<int>(gen() % 3);
        ce_gap = std::max(ce_gap, std::abs(focal_loss(p.row(0), t, ce).loss + std::log(p(0, static_cast<std::size_t>(t)))));
    }
    o.require(worst <= 1e-6, "max relative gradient error " + fmt(worst));
    o.require(ce_gap <= 1e-12, "focal(gamma=0) vs cross-entropy gap " + fmt(ce_gap));
    if (o.pass) o.detail = "1000 batches, max rel error " + fmt(worst) + ", CE gap " + fmt(ce_gap);
    return o;
}

Outcome scheduler() {
    Outcome o;
    const FinetunePhase cfg;
    auto s = schedule_step(initial_schedule(cfg), 1.0, cfg);
    for (int j = 1; j <= 36 && o.pass; ++j) {
        s = schedule_step(s, 1.0, cfg);
        const double expect = j < 8 ? 1e-5 : (j < 16 ? 1e-6 : 1e-7);
        o.require(std::abs(s.current_lr - expect) <= 1e-12 * expect, "non-improving epoch " + std::to_string(j) + ": lr " + fmt(s.current_lr));
        o.require(s.stopped == (j == 36), "non-improving epoch " + std::to_string(j) + ": stop flag wrong");
    }
    std::mt19937_64 gen(4);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int run = 0; run < 10000 && o.pass; ++run) {
        auto st = initial_schedule(cfg);
        PlateauOracle oracle;
        // Mix of noisy and plateauing sequences.
        const double drift = u(gen) * 0.02;
        for (int e = 0; e < cfg.max_epochs && !st.stopped; ++e) {
            const double loss = 1.0 - drift * e + u(gen) * 0.1;
            const double prev = st.current_lr;
            st = schedule_step(st, loss, cfg);
            oracle.observe(loss);
            if (st.current_lr > prev || st.current_lr > cfg.lr_init || st.current_lr < cfg.lr_floor)
                o.require(false, "run " + std::to_string(run) + ": lr out of bounds");
            if (st.stopped != oracle.stopped(cfg.stop_patience) || st.best_epoch != oracle.last_best)
                o.require(false, "run " + std::to_string(run) + ": stop semantics differ");
        }
    }
    if (o.pass) o.detail = "transcript matches, 10000 fuzzed runs clean";
    return o;
}

Outcome resampling() {
    Outcome o;
    const Affine f{900.0, 1.5, -0.8, 2.2};
    const Shape in{14, 17, 19};
    const Spacing src{0.8, 0.8, 2.5};
    const Volume v = affine_volume(in, src, f);
    double worst = 0.0;
    for (const Spacing& t : {Spacing{0.4, 0.4, 1.25}, Spacing{1.6, 1.6, 5.0}, kTargetSpacing}) {
        const Volume r = resample_trilinear(v, t);
        o.require(r.shape() == Shape{expected_extent(in.nz, src.dz, t.dz), expected_extent(in.ny, src.dy, t.dy),
                                     expected_extent(in.nx, src.dx, t.dx)},
                  "output shape");
        worst = std::max(worst, max_relative_error(r, in, src, f));
        const auto [lo, hi] = std::minmax_element(v.data().begin(), v.data().end());
        for (float x : r.data())
            if (x < *lo || x > *hi) o.require(false, "value outside input range");
    }
    o.require(worst <= 1e-6, "max relative error " + fmt(worst));
    std::mt19937_64 gen(5);
    const auto noise = fixtures::random_volume(gen, {9, 10, 11}, {0.7, 0.9, 3.0}, -1000.0f, 400.0f);
    o.require(resample_trilinear(noise, noise.spacing()) == noise, "identity spacing changed values");
    if (o.pass) o.detail = "max relative error " + fmt(worst) + ", identity exact";
    return o;
}

bool bitwise_equal(const Volume& a, const Volume& b) {
    return a.shape() == b.shape() && a.spacing() == b.spacing() && a.unit() == b.unit() &&
           std::memcmp(a.data().data(), b.data().data(), a.data().size_bytes()) == 0;
}

Outcome preprocess_determinism() {
    Outcome o;
    std::mt19937_64 gen(6);
    const auto v = fixtures::random_volume(gen, {152, 230, 230}, kTargetSpacing, -1100.0f, 300.0f);
    AugmentConfig aug;
    aug.p_flip = aug.p_rotate = aug.p_scale = aug.p_elastic = aug.p_gamma = 1.0;
    const PrepConfig cfg;
    const auto mode = PrepMode::training(20260101, aug);
    const Volume ref = preprocess(v, nullptr, cfg, mode, 1);
    o.require(ref.shape() == kTargetShape, "output shape");
    o.require(bitwise_equal(preprocess(v, nullptr, cfg, mode, 1), ref), "second run differs");
    for (int jobs : {4, 8}) o.require(bitwise_equal(preprocess(v, nullptr, cfg, mode, jobs), ref),
                                      "jobs=" + std::to_string(jobs) + " differs");
    if (o.pass) o.detail = "148x224x224, runs and jobs {1,4,8} bitwise equal";
    return o;
}

Outcome fold_partition() {
    Outcome o;
    std::mt19937_64 gen(7);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    int plans = 0;
    for (std::size_t n = 50; n <= 500 && o.pass; n += 3) {
        for (int classes = 2; classes <= 3 && o.pass; ++classes) {
            std::vector<double> w(static_cast<std::size_t>(classes));
            for (auto& x : w) x = 0.2 + u(gen);
            std::discrete_distribution<int> d(w.begin(), w.end());
            std::vector<int> labels(n);
            std::vector<std::string> ids(n);
            for (std::size_t i = 0; i < n; ++i) {
                labels[i] = i < static_cast<std::size_t>(classes) * 5 ? static_cast<int>(i) % classes : d(gen);
                ids[i] = "s" + std::to_string(i);
            }
            std::map<int, double> total;
            for (int l : labels) total[l] += 1;
            const auto plan = kfold_split(ids, labels, 5, n * 10 + static_cast<std::size_t>(classes));
            ++plans;
            std::vector<int> test_hits(n, 0);
            for (const auto& f : plan.folds) {
                for (auto i : f.test) ++test_hits[i];
                std::vector<int> role_hits(n, 0);
                for (const auto* part : {&f.train, &f.val, &f.test})
                    for (auto i : *part) ++role_hits[i];
                o.require(std::all_of(role_hits.begin(), role_hits.end(), [](int h) { return h == 1; }),
                          "n=" + std::to_string(n) + ": train/val/test do not partition");
                for (auto& [c, t] : total) {
                    auto count = [&](const std::vector<std::size_t>& idx) {
                        return static_cast<double>(
                            std::count_if(idx.begin(), idx.end(), [&](auto i) { return labels[i] == c; }));
                    };
                    const bool ok = std::abs(count(f.train) - 0.7 * t) <= 1.0 + 1e-9 &&
                                    std::abs(count(f.val) - 0.1 * t) <= 1.0 + 1e-9 &&
                                    std::abs(count(f.test) - 0.2 * t) <= 1.0 + 1e-9;
                    o.require(ok, "n=" + std::to_string(n) + " class " + std::to_string(c) + ": share off by > 1");
                }
            }
            o.require(std::all_of(test_hits.begin(), test_hits.end(), [](int h) { return h == 1; }),
                      "n=" + std::to_string(n) + ": test folds do not partition");
        }
    }
    if (o.pass) o.detail = std::to_string(plans) + " plans, n=50..500, 2-3 classes";
    return o;
}

int call(Outcome& o, std::vector<std::string> args) {
    std::ostringstream out, err;
    const std::string name = args.front();
    const int code = cli::run(args, out, err);
    o.require(code == 0, name + " exited " + std::to_string(code) + ": " + err.str());
    return code;
}

Outcome end_to_end() {
    Outcome o;
    const auto t0 = std::chrono::steady_clock::now();
    fixtures::TempDir dir("acceptance-e2e");
    auto p = [&](const std::string& name) { return (dir / name).string(); };
    const std::string data = p("data");
    PrepConfig prep;
    prep.target_shape = {64, 96, 96};
    prep.lung_masking = true;
    write_canonical_json(to_json(prep), dir / "prep_p.json");
    prep.lung_masking = false;
    write_canonical_json(to_json(prep), dir / "prep_s.json");

    const std::vector<std::vector<std::string>> steps{
        {"synth", "--n", "60", "--seed", "7", "--out", data},
        {"preprocess", "--in", data + "/raw", "--masks", data + "/masks", "--out", p("prep_p"), "--config", p("prep_p.json")},
        {"preprocess", "--in", data + "/raw", "--out", p("prep_s"), "--config", p("prep_s.json")},
        {"ilr", "--masks", data + "/masks", "--out", p("ilr.csv")},
        {"split", "--cohort", data + "/cohort.csv", "--labels", data + "/labels.csv", "--k", "5", "--seed", "7", "--out", p("plan.json")},
        {"train", "--task", "presence", "--features", p("prep_p"), "--labels", data + "/labels.csv", "--plan", p("plan.json"),
         "--seed", "7", "--out", p("models_p")},
        {"train", "--task", "severity", "--features", p("prep_s"), "--labels", data + "/labels.csv", "--plan", p("plan.json"),
         "--cohort", data + "/cohort.csv", "--ilr", p("ilr.csv"), "--seed", "7", "--out", p("models_s")},
        {"predict", "--task", "presence", "--models", p("models_p"), "--features", p("prep_p"), "--plan", p("plan.json"),
         "--oof", "--out", p("pred_p.json")},
        {"predict", "--task", "severity", "--models", p("models_s"), "--features", p("prep_s"), "--cohort",
         data + "/cohort.csv", "--ilr", p("ilr.csv"), "--plan", p("plan.json"), "--oof", "--out", p("pred_s.json")},
        {"evaluate", "--preds", p("pred_p.json"), "--preds", p("pred_s.json"), "--truth", data + "/labels.csv", "--out",
         p("report.json"), "--table", p("table.txt")}};
    for (const auto& s : steps)
        if (call(o, s) != 0) return o;
    const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

    const Json report = read_json_file(dir / "report.json");
    const double inf_auc = report["task_auc"]["infection"].get<double>();
    const double sev_auc = report["task_auc"]["severe_outcome"].get<double>();
    o.require(seconds < 180.0, "pipeline took " + fmt(seconds) + " s");
    o.require(inf_auc >= 0.90, "held-out infection AUC " + fmt(inf_auc));
    o.require(sev_auc >= 0.90, "held-out severe-outcome AUC " + fmt(sev_auc));

    const std::string table = fixtures::slurp(dir / "table.txt");
    std::istringstream lines(table);
    std::string line;
    bool header = false;
    while (std::getline(lines, line)) {
        std::istringstream words(line);
        std::vector<std::string> w{std::istream_iterator<std::string>(words), {}};
        header |= w == std::vector<std::string>{"Classes", "Acc.", "F1", "AUC"};
    }
    o.require(header, "table lacks the Classes/Acc./F1/AUC header");
    for (const char* c : {"Negative", "Positive", "Severe"})
        o.require(table.find(c) != std::string::npos, std::string("table lacks row ") + c);

    // Five copies of one fold model must pool to that model's own output.
    const auto pres = baseline_from_json(read_json_file(dir / "models_p" / "fold0.json"));
    const auto sev = baseline_from_json(read_json_file(dir / "models_s" / "fold0.json"));
    const auto records = read_cohort_csv(data + "/cohort.csv");
    const auto ilr = read_ilr_csv(dir / "ilr.csv");
    PipelineSample sample{extract_features(read_nifti_volume(dir / "prep_p" / "p0001.nii.gz")),
                          extract_features(read_nifti_volume(dir / "prep_s" / "p0001.nii.gz")),
                          assemble_metadata(records.front(), ilr.at("p0001"))};
    const std::vector<BaselineModel> pres5(5, pres), sev5(5, sev);
    const std::vector<TrainingLog> logs(5, read_log_csv(dir / "models_p" / "fold0.log.csv"));
    const auto pooled = pipeline_predict(sample, pres5, logs, sev5);
    const double single_sev = predict_baseline(sev, sample.severity_features, &sample.meta).probs[1];
    const double single_inf = infection_probability(predict_baseline(pres, sample.presence_features));
    o.require(std::abs(pooled.p_severe - single_sev) <= 1e-12 && std::abs(pooled.p_infection - single_inf) <= 1e-12,
              "identical-fold pooling differs from the single model");

    if (o.pass)
        o.detail = "infection AUC " + fmt(inf_auc) + ", severe-outcome AUC " + fmt(sev_auc) + ", " +
                   fmt(seconds, 3) + " s";
    return o;
}

Outcome io_roundtrips() {
    Outcome o;
    fixtures::TempDir dir("acceptance-io");
    std::mt19937_64 gen(9);
    std::uniform_int_distribution<int> ext(1, 20), mm(10, 500);
    const Unit units[] = {Unit::HU, Unit::Grayscale, Unit::ZScored};
    for (int i = 0; i < 100 && o.pass; ++i) {
        const Shape s{ext(gen), ext(gen), ext(gen)};
        const Spacing sp{mm(gen) / 100.0, mm(gen) / 100.0, mm(gen) / 100.0};
        const Unit unit = units[i % 3];
        const auto v = unit == Unit::Grayscale ? fixtures::random_volume(gen, s, sp, 0.0f, 1.0f, unit)
                                               : fixtures::random_volume(gen, s, sp, -1200.0f, 1200.0f, unit);
        const auto m = fixtures::random_mask(gen, s, sp, 0.4, 0.2);
        const std::string ext_name = i % 2 ? ".nii.gz" : ".nii";
        const auto vp = dir / ("v" + std::to_string(i) + ext_name);
        const auto mp = dir / ("m" + std::to_string(i) + ext_name);
        write_nifti(v, vp);
        write_nifti(m, mp);
        o.require(read_nifti_volume(vp) == v, "volume " + std::to_string(i) + " changed");
        o.require(read_nifti_mask(mp) == m, "mask " + std::to_string(i) + " changed");
    }
    std::uniform_real_distribution<double> u(0.0, 1.0);
    std::uniform_int_distribution<int> items(1, 30);
    for (int i = 0; i < 100 && o.pass; ++i) {
        PredictionFile f;
        f.task = i % 2 ? Task::Severity : Task::Presence;
        const std::size_t c = f.task == Task::Presence ? 3 : 2;
        for (int k = items(gen); k > 0; --k) {
            std::vector<double> probs(c);
            double sum = 0.0;
            for (auto& x : probs) sum += (x = u(gen));
            for (auto& x : probs) x = parse_real(format_real(x / sum));
            f.items["id" + std::to_string(gen() % 100000)] = probs;
        }
        const auto path = dir / ("pred" + std::to_string(i) + ".json");
        write_predictions(f, path);
        o.require(read_predictions(path) == f, "prediction file " + std::to_string(i) + " changed");
        const std::string bytes = fixtures::slurp(path);
        write_canonical_json(read_json_file(path), path);
        o.require(fixtures::slurp(path) == bytes, "canonical JSON rewrite of file " + std::to_string(i) + " changed bytes");
    }
    if (o.pass) o.detail = "100 volumes + masks, 100 prediction files, byte-stable JSON";
    return o;
}

} // namespace

int main() {
    struct Criterion {
        const char* name;
        double budget_s;
        std::function<Outcome()> run;
    };
    const std::vector<Criterion> criteria{
        {"ilr-oracle", 5, ilr_oracle},
        {"auc-oracle", 30, auc_oracle},
        {"loss-gradient", 0, loss_gradient},
        {"scheduler-transcript", 5, scheduler},
        {"resampling-exactness", 10, resampling},
        {"preprocess-determinism", 60, preprocess_determinism},
        {"fold-partition", 5, fold_partition},
        {"end-to-end", 180, end_to_end},
        {"io-roundtrips", 0, io_roundtrips},
    };
    int failed = 0;
    for (const auto& c : criteria) {
        const auto t0 = std::chrono::steady_clock::now();
        Outcome o;
        try {
            o = c.run();
        } catch (const std::exception& e) {
            o = {false, std::string("exception: ") + e.what()};
        }
        const double s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        if (c.budget_s > 0 && s >= c.budget_s) o.require(false, "runtime " + fmt(s) + " s over " + fmt(c.budget_s) + " s");
        failed += !o.pass;
        std::cout << (o.pass ? "PASS " : "FAIL ") << c.name << ": " << o.detail << " [" << std::fixed
                  << std::setprecision(2) << s << " s]" << std::defaultfloat << std::endl;
    }
    std::cout << (failed == 0 ? "all criteria passed" : std::to_string(failed) + " criteria failed") << std::endl;
    return failed == 0 ? 0 : 1;
}
