#include "towcast/evaluation.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>

#include "towcast/errors.hpp"
#include "towcast/rng.hpp"

namespace towcast {

FoldAssignment stratified_kfold(std::span<const double> targets, int k, std::uint64_t seed) {
    if (k < 2) throw DomainError("stratified_kfold: k must be >= 2");
    const int n = static_cast<int>(targets.size());
    if (n < k) throw DomainError("stratified_kfold: fewer samples than folds");

    // Strata keyed by count value, members in sample order.
    std::map<double, std::vector<int>> strata;
    for (int i = 0; i < n; ++i) strata[targets[static_cast<std::size_t>(i)]].push_back(i);

    // Merge sparse strata upward into the nearest count value, smallest
    // sparse value first, until every stratum can fill every fold.
    while (strata.size() > 1) {
        auto sparse = strata.end();
        for (auto it = strata.begin(); it != strata.end(); ++it) {
            if (static_cast<int>(it->second.size()) < k) {
                sparse = it;
                break;  // ascending order: smallest sparse count first
            }
        }
        if (sparse == strata.end()) break;
        auto nearest = strata.end();
        double best_dist = 0.0;
        for (auto it = strata.begin(); it != strata.end(); ++it) {
            if (it == sparse) continue;
            const double dist = std::abs(it->first - sparse->first);
            if (nearest == strata.end() || dist < best_dist ||
                (dist == best_dist && it->first < nearest->first)) {
                nearest = it;
                best_dist = dist;
            }
        }
        auto& dst = nearest->second;
        dst.insert(dst.end(), sparse->second.begin(), sparse->second.end());
        std::sort(dst.begin(), dst.end());
        strata.erase(sparse);
    }

    FoldAssignment assignment;
    assignment.k = k;
    assignment.seed = seed;
    assignment.fold_of.assign(static_cast<std::size_t>(n), 0);
    Rng rng(seed);
    for (auto& [value, members] : strata) {
        rng.shuffle(members);
        for (std::size_t pos = 0; pos < members.size(); ++pos) {
            assignment.fold_of[static_cast<std::size_t>(members[pos])] =
                static_cast<int>(pos % static_cast<std::size_t>(k));
        }
        assignment.strata.push_back(members);
    }
    return assignment;
}

double mae(std::span<const double> actual, std::span<const double> predicted) {
    if (actual.size() != predicted.size()) {
        throw ContractError("mae: length mismatch");
    }
    if (actual.empty()) {
        throw ContractError("mae: empty input");
    }
    double sum = 0.0;
    for (std::size_t i = 0; i < actual.size(); ++i) {
        sum += std::abs(actual[i] - predicted[i]);
    }
    return sum / static_cast<double>(actual.size());
}

CvReport cross_validate(const DesignMatrix& data, ModelFamily family, const Hyperparams& hyper,
                        const FoldAssignment& folds) {
    if (folds.fold_of.size() != data.n_rows()) {
        throw ContractError("cross_validate: fold assignment does not cover the data");
    }
    CvReport report;
    report.family = family;
    report.k = folds.k;
    report.seed = folds.seed;
    report.feature_subset = data.feature_names;

    double mae_sum = 0.0;
    int ok_folds = 0;
    for (int f = 0; f < folds.k; ++f) {
        std::vector<int> train_idx, test_idx;
        for (std::size_t i = 0; i < folds.fold_of.size(); ++i) {
            (folds.fold_of[i] == f ? test_idx : train_idx).push_back(static_cast<int>(i));
        }
        FoldScore score;
        score.fold = f;
        score.n = static_cast<int>(test_idx.size());
        try {
            const DesignMatrix train = data.subset_rows(train_idx);
            const DesignMatrix test = data.subset_rows(test_idx);
            const TrainedModel model = fit_model(train, family, hyper, folds.seed);
            score.mae = mae(test.targets, predict(model, test));
            mae_sum += score.mae;
            ++ok_folds;
        } catch (const DomainError& e) {
            score.ok = false;
            score.error = e.what();
            report.has_fold_errors = true;
        }
        report.per_fold.push_back(std::move(score));
    }
    report.mean_mae = ok_folds > 0 ? mae_sum / ok_folds
                                   : std::numeric_limits<double>::quiet_NaN();
    return report;
}

RfecvResult rfecv(const DesignMatrix& data, ModelFamily family, const Hyperparams& hyper, int k,
                  std::uint64_t seed) {
    data.validate();
    if (data.n_features() < 2) {
        // A single feature still yields a one-entry trace.
        if (data.n_features() == 0) throw DomainError("rfecv: no features");
    }
    const FoldAssignment folds = stratified_kfold(data.targets, k, seed);

    RfecvResult result;
    result.family = family;
    result.k = k;
    result.seed = seed;

    std::vector<std::string> current = data.feature_names;
    while (!current.empty()) {
        const DesignMatrix view = data.select_features(current);
        const CvReport report = cross_validate(view, family, hyper, folds);
        result.trace_sizes.push_back(static_cast<int>(current.size()));
        result.trace_scores.push_back(-report.mean_mae);
        result.trace_subsets.push_back(current);
        if (current.size() == 1) break;

        const TrainedModel full_fit = fit_model(view, family, hyper, seed);
        const std::vector<double> importance = feature_importance(full_fit);
        // Least important goes; ties eliminate the alphabetically last name.
        std::size_t victim = 0;
        for (std::size_t j = 1; j < current.size(); ++j) {
            if (importance[j] < importance[victim] ||
                (importance[j] == importance[victim] && current[j] > current[victim])) {
                victim = j;
            }
        }
        result.elimination_order.push_back(current[victim]);
        current.erase(current.begin() + static_cast<std::ptrdiff_t>(victim));
    }

    // Best score wins; ties go to the smaller subset (later trace entry).
    std::size_t best = 0;
    for (std::size_t i = 1; i < result.trace_scores.size(); ++i) {
        if (result.trace_scores[i] >= result.trace_scores[best]) best = i;
    }
    result.chosen = result.trace_subsets[best];
    result.chosen_size = result.trace_sizes[best];
    return result;
}

std::vector<std::pair<std::string, int>> selection_frequency(std::span<const RfecvResult> results) {
    std::map<std::string, int> counts;
    for (const auto& result : results) {
        for (const auto& name : result.chosen) ++counts[name];
    }
    std::vector<std::pair<std::string, int>> table(counts.begin(), counts.end());
    std::sort(table.begin(), table.end(), [](const auto& a, const auto& b) {
        if (a.second != b.second) return a.second > b.second;
        return a.first < b.first;
    });
    return table;
}

}  // namespace towcast
