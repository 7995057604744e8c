#include "ctsev/kfold.hpp"

#include <algorithm>
#include <map>
#include <set>

#include "ctsev/errors.hpp"
#include "ctsev/rng.hpp"

namespace ctsev {

namespace {

void shuffle(std::vector<std::size_t>& v, RngStream& stream) {
    for (std::size_t i = v.size(); i > 1; --i) {
        auto j = static_cast<std::size_t>(stream.uniform_int(0, static_cast<std::int64_t>(i) - 1));
        std::swap(v[i - 1], v[j]);
    }
}

/// floor(a / b) for b > 0.
long floor_div(long a, long b) { return a >= 0 ? a / b : -((-a + b - 1) / b); }

} // namespace

FoldPlan kfold_split(std::span<const std::string> ids, std::span<const int> labels, int k, std::uint64_t seed) {
    if (k < 2) throw InvalidArgument("k must be >= 2");
    if (ids.size() != labels.size()) throw InvalidArgument("ids and labels differ in length");
    if (std::set<std::string>(ids.begin(), ids.end()).size() != ids.size())
        throw InvalidArgument("sample ids must be unique");

    std::map<int, std::vector<std::size_t>> by_class;
    for (std::size_t i = 0; i < labels.size(); ++i) by_class[labels[i]].push_back(i);
    for (const auto& [label, members] : by_class) {
        if (members.size() < static_cast<std::size_t>(k))
            throw StratificationError("class " + std::to_string(label) + " has " + std::to_string(members.size()) +
                                      " samples, fewer than k = " + std::to_string(k));
    }

    const Rng rng(seed);
    RngStream deal_stream = rng.stream("kfold");
    std::vector<int> test_fold(ids.size(), -1);
    std::size_t position = 0;
    for (auto& [label, members] : by_class) {
        shuffle(members, deal_stream);
        for (std::size_t m : members) test_fold[m] = static_cast<int>(position++ % static_cast<std::size_t>(k));
    }

    FoldPlan plan;
    plan.k = k;
    plan.seed = seed;
    plan.ids.assign(ids.begin(), ids.end());
    plan.folds.resize(static_cast<std::size_t>(k));
    for (int f = 0; f < k; ++f) {
        Fold& fold = plan.folds[static_cast<std::size_t>(f)];
        RngStream split_stream = rng.stream("fold-" + std::to_string(f));
        for (const auto& [label, members] : by_class) {
            std::vector<std::size_t> rest;
            long in_test = 0;
            for (std::size_t m : members) {
                if (test_fold[m] == f) {
                    fold.test.push_back(m);
                    ++in_test;
                } else {
                    rest.push_back(m);
                }
            }
            // The non-test share (k-1)/k splits 7:1 into train and val. Taking
            // val = round((k-1)N/(8k) - (T - N/k)/2) spreads the test fold's
            // rounding over both, keeping each within one sample of its share.
            const long n = static_cast<long>(members.size());
            const long kk = k;
            long n_val = floor_div((kk + 3) * n - 4 * kk * in_test + 4 * kk, 8 * kk);
            n_val = std::clamp<long>(n_val, 0, static_cast<long>(rest.size()));
            shuffle(rest, split_stream);
            fold.val.insert(fold.val.end(), rest.begin(), rest.begin() + n_val);
            fold.train.insert(fold.train.end(), rest.begin() + n_val, rest.end());
        }
        std::sort(fold.train.begin(), fold.train.end());
        std::sort(fold.val.begin(), fold.val.end());
        std::sort(fold.test.begin(), fold.test.end());
    }
    return plan;
}

Json to_json(const FoldPlan& plan) {
    Json folds = Json::array();
    auto names = [&](const std::vector<std::size_t>& idx) {
        Json a = Json::array();
        for (std::size_t i : idx) a.push_back(plan.ids[i]);
        return a;
    };
    for (const auto& f : plan.folds) folds.push_back(Json{{"train", names(f.train)}, {"val", names(f.val)}, {"test", names(f.test)}});
    return Json{{"k", plan.k}, {"seed", plan.seed}, {"ids", plan.ids}, {"folds", std::move(folds)}};
}

FoldPlan fold_plan_from_json(const Json& j) {
    FoldPlan plan;
    try {
        plan.k = j.at("k").get<int>();
        plan.seed = j.at("seed").get<std::uint64_t>();
        plan.ids = j.at("ids").get<std::vector<std::string>>();
        std::map<std::string, std::size_t> index;
        for (std::size_t i = 0; i < plan.ids.size(); ++i) index.emplace(plan.ids[i], i);
        auto lookup = [&](const Json& a) {
            std::vector<std::size_t> out;
            for (const auto& id : a) {
                auto it = index.find(id.get<std::string>());
                if (it == index.end()) throw InvalidArgument("fold plan names unknown id '" + id.get<std::string>() + "'");
                out.push_back(it->second);
            }
            std::sort(out.begin(), out.end());
            return out;
        };
        for (const auto& f : j.at("folds")) plan.folds.push_back({lookup(f.at("train")), lookup(f.at("val")), lookup(f.at("test"))});
    } catch (const Json::exception& e) {
        throw InvalidArgument(std::string("bad fold plan: ") + e.what());
    }
    if (plan.folds.size() != static_cast<std::size_t>(plan.k)) throw InvalidArgument("fold plan lists a different number of folds than k");
    return plan;
}

} // namespace ctsev
