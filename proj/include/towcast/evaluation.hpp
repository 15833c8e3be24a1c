#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "towcast/models.hpp"

namespace towcast {

/// Disjoint, exhaustive fold assignment; per-stratum counts across folds
/// differ by at most 1. strata records the post-merge groups the deal ran
/// over, so the balance invariant is directly checkable.
struct FoldAssignment {
    int k = 2;
    std::vector<int> fold_of;  // per-sample fold index in [0, k)
    std::uint64_t seed = 0;
    std::vector<std::vector<int>> strata;  // sample indices per merged stratum
};

/// Strata are the distinct count values; a stratum with fewer than k
/// members is merged into the nearest count value (ascending order, ties
/// toward the smaller value) until every stratum can fill every fold.
/// Within a stratum, members are shuffled by seed and dealt round-robin.
/// Throws DomainError when there are fewer samples than folds.
FoldAssignment stratified_kfold(std::span<const double> targets, int k, std::uint64_t seed);

/// Mean absolute error (1/n) sum |actual - predicted|.
/// Throws ContractError on a length mismatch or empty input.
double mae(std::span<const double> actual, std::span<const double> predicted);

struct FoldScore {
    int fold = 0;
    int n = 0;
    double mae = 0.0;
    bool ok = true;
    std::string error;  // set when the fold's fit failed (e.g. all-zero targets)
};

struct CvReport {
    ModelFamily family = ModelFamily::kPoisson;
    int k = 2;
    std::uint64_t seed = 0;
    std::vector<FoldScore> per_fold;
    double mean_mae = 0.0;  // over successful folds
    std::vector<std::string> feature_subset;
    bool has_fold_errors = false;
};

/// Fits on each fold's complement and scores the held-out fold. A fold
/// whose fit fails (all-zero Poisson targets) is recorded as an error and
/// excluded from the mean, with the report flagged.
CvReport cross_validate(const DesignMatrix& data, ModelFamily family, const Hyperparams& hyper,
                        const FoldAssignment& folds);

struct RfecvResult {
    ModelFamily family = ModelFamily::kPoisson;
    int k = 2;
    std::uint64_t seed = 0;
    std::vector<std::string> elimination_order;           // first eliminated first
    std::vector<int> trace_sizes;                          // p, p-1, ..., 1
    std::vector<double> trace_scores;                      // -mean MAE at each size
    std::vector<std::vector<std::string>> trace_subsets;   // subset evaluated at each size
    std::vector<std::string> chosen;
    int chosen_size = 0;
};

/// Recursive feature elimination: score the current subset by CV (negative
/// mean MAE), fit on all rows, drop the least important feature
/// (importance ties eliminate the alphabetically last name), down to one
/// feature. The chosen size maximizes the score; ties prefer fewer
/// features.
RfecvResult rfecv(const DesignMatrix& data, ModelFamily family, const Hyperparams& hyper, int k,
                  std::uint64_t seed);

/// How many results retained each feature, sorted by descending count,
/// ties alphabetical.
std::vector<std::pair<std::string, int>> selection_frequency(std::span<const RfecvResult> results);

}  // namespace towcast
