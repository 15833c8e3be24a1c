#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "towcast/tree.hpp"

namespace towcast {

enum class ModelFamily { kPoisson, kElasticNet, kRandomForest, kAdaBoostR2 };

std::string family_name(ModelFamily family);
std::optional<ModelFamily> family_from_name(std::string_view name);

/// Samples x named features plus count targets. No missing values.
struct DesignMatrix {
    std::vector<std::string> feature_names;
    std::vector<std::vector<double>> rows;  // n x p
    std::vector<double> targets;            // non-negative integers

    std::size_t n_rows() const { return rows.size(); }
    std::size_t n_features() const { return feature_names.size(); }

    /// Throws ContractError on shape problems and DomainError on invalid
    /// values (non-finite cells, negative or fractional targets, dup names).
    void validate() const;

    DesignMatrix select_features(const std::vector<std::string>& names) const;
    DesignMatrix subset_rows(std::span<const int> idx) const;
};

/// Per-column standardization. A constant column keeps std 1 and is
/// flagged so it standardizes to exactly zero.
struct ScalerParams {
    std::vector<double> means;
    std::vector<double> stds;
    std::vector<bool> constant;

    static ScalerParams fit(const std::vector<std::vector<double>>& rows, std::size_t n_features);
    std::vector<double> transform(std::span<const double> row) const;
};

/// One bag of hyperparameters; each family reads its own subset.
struct Hyperparams {
    // poisson
    double poisson_l2 = 1e-6;
    double poisson_tol = 1e-8;
    int poisson_max_iter = 100;
    // elasticnet
    double enet_alpha = 1.0;
    double enet_l1_ratio = 0.5;
    double enet_tol = 1e-7;
    int enet_max_sweeps = 1000;
    // random forest
    int rf_trees = 100;
    int rf_mtry = 0;  // 0 -> max(1, p/3)
    int rf_min_leaf = 1;
    int rf_max_depth = 0;  // 0 -> unlimited
    bool rf_bootstrap = true;
    // adaboost
    int ada_estimators = 50;
    int ada_depth = 3;
};

/// A fitted regressor: family tag, scaler, feature names in training
/// order, and the family-specific parameters.
struct TrainedModel {
    ModelFamily family = ModelFamily::kPoisson;
    ScalerParams scaler;
    std::vector<std::string> feature_names;
    Hyperparams hyper;
    std::uint64_t seed = 0;

    // Linear families (standardized feature space).
    std::vector<double> coef;
    double intercept = 0.0;

    // Tree ensembles. tree_weights holds the AdaBoost estimator weights;
    // it stays empty for random forests (uniform averaging).
    std::vector<Tree> trees;
    std::vector<double> tree_weights;
    std::vector<double> tree_importance;  // accumulated impurity decrease per feature

    // Fit diagnostics (not persisted): penalized deviance per IRLS iterate
    // or coordinate-descent objective per sweep.
    std::vector<double> fit_trace;
};

/// Poisson GLM (log link) by iteratively reweighted least squares with
/// step-halving; ridge penalty l2 * ||beta||^2 excludes the intercept.
/// The monitored penalized deviance is non-increasing across accepted
/// steps. Throws DomainError when every target is zero.
TrainedModel fit_poisson(const DesignMatrix& data, double l2 = 1e-6, double tol = 1e-8,
                         int max_iter = 100);

/// ElasticNet by cyclic coordinate descent with soft-thresholding on
/// standardized features and centered targets. Objective:
/// (1/2n)||y - b0 - X b||^2 + alpha (l1 ||b||_1 + (1-l1)/2 ||b||_2^2).
TrainedModel fit_elasticnet(const DesignMatrix& data, double alpha = 1.0, double l1_ratio = 0.5,
                            double tol = 1e-7, int max_sweeps = 1000);

/// Random forest of CART trees on bootstrap samples; tree t draws from its
/// own generator seeded seed + t, so results are identical no matter how
/// fitting is scheduled.
TrainedModel fit_random_forest(const DesignMatrix& data, int n_trees = 100, int mtry = 0,
                               int min_leaf = 1, int max_depth = 0, std::uint64_t seed = 0,
                               bool bootstrap = true);

/// AdaBoost.R2 with linear loss: weighted bootstrap per round, losses
/// normalized by the round's max error, stop when average loss >= 0.5,
/// weighted-median aggregation.
TrainedModel fit_adaboost(const DesignMatrix& data, int n_estimators = 50, int base_depth = 3,
                          std::uint64_t seed = 0);

/// Dispatch on family using the relevant entries of hyper.
TrainedModel fit_model(const DesignMatrix& data, ModelFamily family, const Hyperparams& hyper,
                       std::uint64_t seed);

/// Predicted counts (>= 0) for rows carrying exactly the model's features
/// (any column order). Throws ContractError naming the symmetric
/// difference on a name mismatch.
std::vector<double> predict(const TrainedModel& model, const std::vector<std::string>& names,
                            const std::vector<std::vector<double>>& rows);
std::vector<double> predict(const TrainedModel& model, const DesignMatrix& data);

/// Non-negative per-feature scores aligned with model.feature_names.
/// Linear families score |standardized coefficient|; tree families use
/// impurity decrease, normalized to sum 1.
std::vector<double> feature_importance(const TrainedModel& model);

/// JSON persistence. Floating values keep full round-trip precision.
std::string model_to_json(const TrainedModel& model);
TrainedModel model_from_json(const std::string& text);
void save_model(const TrainedModel& model, const std::string& path);
TrainedModel load_model(const std::string& path);

/// Penalized Poisson log-likelihood sum(y eta - exp(eta)) - l2 ||beta||^2
/// evaluated with the model's scaler, plus its analytic gradient in
/// standardized space (index 0 is the intercept). Exposed for the solver's
/// finite-difference verification.
double poisson_penalized_loglik(const TrainedModel& model, const DesignMatrix& data);
std::vector<double> poisson_gradient(const TrainedModel& model, const DesignMatrix& data);

}  // namespace towcast
