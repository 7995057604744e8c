#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "ctsev/canonical_json.hpp"

namespace ctsev {

/// Sample indices (into FoldPlan::ids) for one cross-validation fold.
struct Fold {
    std::vector<std::size_t> train;
    std::vector<std::size_t> val;
    std::vector<std::size_t> test;

    bool operator==(const Fold&) const = default;
};

struct FoldPlan {
    int k = 5;
    std::uint64_t seed = 0;
    std::vector<std::string> ids;
    std::vector<Fold> folds;

    bool operator==(const FoldPlan&) const = default;
};

/// Stratified k-fold plan. Each class is shuffled with the seed and dealt
/// round-robin into k test folds (the dealing position carries over between
/// classes). Per fold, the other k-1 folds are split per class into train and
/// val so that, for k = 5, every subset stays within one sample of its
/// 70/10/20 share of the class. Index lists are sorted ascending.
/// Throws StratificationError when a present class has fewer than k samples.
FoldPlan kfold_split(std::span<const std::string> ids, std::span<const int> labels, int k, std::uint64_t seed);

/// `{k, seed, ids, folds: [{train: [ids], val: [...], test: [...]}]}`.
Json to_json(const FoldPlan& plan);
FoldPlan fold_plan_from_json(const Json& j);

} // namespace ctsev
