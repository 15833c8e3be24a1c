#include "towcast/models.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <numeric>
#include <set>
#include <sstream>

#include <json.hpp>

#include "towcast/errors.hpp"

namespace towcast {
namespace {

using json = nlohmann::ordered_json;

constexpr double kCappedEstimatorLoss = 1e-10;  // loss floor for a perfect round

std::vector<std::vector<double>> standardize_rows(const ScalerParams& scaler,
                                                  const std::vector<std::vector<double>>& rows) {
    std::vector<std::vector<double>> out;
    out.reserve(rows.size());
    for (const auto& row : rows) out.push_back(scaler.transform(row));
    return out;
}

double target_mean(const DesignMatrix& data) {
    return std::accumulate(data.targets.begin(), data.targets.end(), 0.0) /
           static_cast<double>(data.targets.size());
}

// Poisson deviance 2 sum[y ln(y/mu) - (y - mu)] plus the ridge term
// 2 l2 ||beta||^2 (the quantity IRLS monotonically decreases). Accumulated
// in extended precision: the final Newton polish steps improve it by less
// than double resolution, and step-halving must still see the descent.
long double penalized_deviance(const Eigen::VectorXd& y, const Eigen::VectorXd& eta,
                               const Eigen::VectorXd& beta, double l2) {
    long double dev = 0.0L;
    for (Eigen::Index i = 0; i < y.size(); ++i) {
        const long double mu = std::exp(static_cast<long double>(eta[i]));
        if (y[i] > 0.0) {
            dev += static_cast<long double>(y[i]) *
                       (std::log(static_cast<long double>(y[i])) -
                        static_cast<long double>(eta[i])) -
                   (static_cast<long double>(y[i]) - mu);
        } else {
            dev += mu;
        }
    }
    return 2.0L * dev + 2.0L * static_cast<long double>(l2) *
                            static_cast<long double>(beta.squaredNorm());
}

double soft_threshold(double value, double threshold) {
    if (value > threshold) return value - threshold;
    if (value < -threshold) return value + threshold;
    return 0.0;
}

std::vector<int> bootstrap_indices(int n, Rng& rng) {
    std::vector<int> idx(static_cast<std::size_t>(n));
    for (auto& v : idx) v = static_cast<int>(rng.uniform_u32(static_cast<std::uint32_t>(n)));
    return idx;
}

double weighted_median_prediction(const std::vector<Tree>& trees,
                                  const std::vector<double>& weights,
                                  std::span<const double> row) {
    std::vector<std::pair<double, double>> preds;  // (prediction, weight)
    preds.reserve(trees.size());
    for (std::size_t t = 0; t < trees.size(); ++t) {
        preds.emplace_back(trees[t].predict(row), weights[t]);
    }
    std::stable_sort(preds.begin(), preds.end(),
                     [](const auto& a, const auto& b) { return a.first < b.first; });
    const double total = std::accumulate(preds.begin(), preds.end(), 0.0,
                                         [](double acc, const auto& p) { return acc + p.second; });
    double cum = 0.0;
    for (const auto& [pred, w] : preds) {
        cum += w;
        if (cum >= 0.5 * total) return pred;
    }
    return preds.back().first;
}

json tree_node_to_json(const Tree& tree, int id) {
    const TreeNode& node = tree.nodes[static_cast<std::size_t>(id)];
    json j;
    if (node.feature < 0) {
        j["leaf_value"] = node.value;
    } else {
        j["split_feature"] = node.feature;
        j["threshold"] = node.threshold;
        j["left"] = tree_node_to_json(tree, node.left);
        j["right"] = tree_node_to_json(tree, node.right);
    }
    return j;
}

int tree_node_from_json(const json& j, Tree& tree) {
    const int id = static_cast<int>(tree.nodes.size());
    tree.nodes.emplace_back();
    if (j.contains("leaf_value")) {
        tree.nodes[static_cast<std::size_t>(id)].value = j.at("leaf_value").get<double>();
    } else {
        tree.nodes[static_cast<std::size_t>(id)].feature = j.at("split_feature").get<int>();
        tree.nodes[static_cast<std::size_t>(id)].threshold = j.at("threshold").get<double>();
        const int left = tree_node_from_json(j.at("left"), tree);
        const int right = tree_node_from_json(j.at("right"), tree);
        tree.nodes[static_cast<std::size_t>(id)].left = left;
        tree.nodes[static_cast<std::size_t>(id)].right = right;
    }
    return id;
}

}  // namespace

std::string family_name(ModelFamily family) {
    switch (family) {
        case ModelFamily::kPoisson: return "poisson";
        case ModelFamily::kElasticNet: return "elasticnet";
        case ModelFamily::kRandomForest: return "random_forest";
        case ModelFamily::kAdaBoostR2: return "adaboost_r2";
    }
    return "unknown";
}

std::optional<ModelFamily> family_from_name(std::string_view name) {
    if (name == "poisson") return ModelFamily::kPoisson;
    if (name == "elasticnet") return ModelFamily::kElasticNet;
    if (name == "random_forest") return ModelFamily::kRandomForest;
    if (name == "adaboost_r2" || name == "adaboost") return ModelFamily::kAdaBoostR2;
    return std::nullopt;
}

void DesignMatrix::validate() const {
    if (rows.size() != targets.size()) {
        throw ContractError("design matrix: row/target count mismatch");
    }
    if (rows.size() < 2) {
        throw DomainError("design matrix needs at least 2 rows");
    }
    std::set<std::string> seen;
    for (const auto& name : feature_names) {
        if (!seen.insert(name).second) {
            throw DomainError("duplicate feature name: " + name);
        }
    }
    for (const auto& row : rows) {
        if (row.size() != feature_names.size()) {
            throw ContractError("design matrix: ragged row");
        }
        for (double v : row) {
            if (!std::isfinite(v)) throw DomainError("design matrix contains a non-finite value");
        }
    }
    for (double t : targets) {
        if (!std::isfinite(t) || t < 0.0 || std::floor(t) != t) {
            throw DomainError("targets must be non-negative integers");
        }
    }
}

DesignMatrix DesignMatrix::select_features(const std::vector<std::string>& names) const {
    std::vector<std::size_t> cols;
    cols.reserve(names.size());
    for (const auto& name : names) {
        const auto it = std::find(feature_names.begin(), feature_names.end(), name);
        if (it == feature_names.end()) {
            throw ContractError("unknown feature: " + name);
        }
        cols.push_back(static_cast<std::size_t>(it - feature_names.begin()));
    }
    DesignMatrix out;
    out.feature_names = names;
    out.targets = targets;
    out.rows.reserve(rows.size());
    for (const auto& row : rows) {
        std::vector<double> r;
        r.reserve(cols.size());
        for (std::size_t c : cols) r.push_back(row[c]);
        out.rows.push_back(std::move(r));
    }
    return out;
}

DesignMatrix DesignMatrix::subset_rows(std::span<const int> idx) const {
    DesignMatrix out;
    out.feature_names = feature_names;
    out.rows.reserve(idx.size());
    out.targets.reserve(idx.size());
    for (int i : idx) {
        out.rows.push_back(rows[static_cast<std::size_t>(i)]);
        out.targets.push_back(targets[static_cast<std::size_t>(i)]);
    }
    return out;
}

ScalerParams ScalerParams::fit(const std::vector<std::vector<double>>& rows, std::size_t n_features) {
    ScalerParams s;
    s.means.assign(n_features, 0.0);
    s.stds.assign(n_features, 1.0);
    s.constant.assign(n_features, false);
    const double n = static_cast<double>(rows.size());
    for (std::size_t j = 0; j < n_features; ++j) {
        double sum = 0.0;
        for (const auto& row : rows) sum += row[j];
        const double mean = sum / n;
        double ss = 0.0;
        for (const auto& row : rows) ss += (row[j] - mean) * (row[j] - mean);
        const double std_pop = std::sqrt(ss / n);
        s.means[j] = mean;
        if (std_pop == 0.0) {
            s.constant[j] = true;
            s.stds[j] = 1.0;
        } else {
            s.stds[j] = std_pop;
        }
    }
    return s;
}

std::vector<double> ScalerParams::transform(std::span<const double> row) const {
    std::vector<double> out(row.size());
    for (std::size_t j = 0; j < row.size(); ++j) {
        out[j] = constant[j] ? 0.0 : (row[j] - means[j]) / stds[j];
    }
    return out;
}

TrainedModel fit_poisson(const DesignMatrix& data, double l2, double tol, int max_iter) {
    data.validate();
    if (std::all_of(data.targets.begin(), data.targets.end(), [](double y) { return y == 0.0; })) {
        throw DomainError("poisson fit: all targets are zero (intercept unbounded below)");
    }

    TrainedModel model;
    model.family = ModelFamily::kPoisson;
    model.feature_names = data.feature_names;
    model.scaler = ScalerParams::fit(data.rows, data.n_features());
    model.hyper.poisson_l2 = l2;
    model.hyper.poisson_tol = tol;
    model.hyper.poisson_max_iter = max_iter;

    const auto n = static_cast<Eigen::Index>(data.n_rows());
    const auto p = static_cast<Eigen::Index>(data.n_features());
    Eigen::MatrixXd X(n, p);
    {
        const auto xs = standardize_rows(model.scaler, data.rows);
        for (Eigen::Index i = 0; i < n; ++i) {
            for (Eigen::Index j = 0; j < p; ++j) {
                X(i, j) = xs[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
            }
        }
    }
    Eigen::VectorXd y(n);
    for (Eigen::Index i = 0; i < n; ++i) y[i] = data.targets[static_cast<std::size_t>(i)];

    double b0 = std::log(target_mean(data));
    Eigen::VectorXd beta = Eigen::VectorXd::Zero(p);
    Eigen::VectorXd eta = Eigen::VectorXd::Constant(n, b0);
    long double dev = penalized_deviance(y, eta, beta, l2);
    model.fit_trace.push_back(static_cast<double>(dev));

    constexpr double kGradTol = 1e-8;
    for (int iter = 0; iter < max_iter; ++iter) {
        const Eigen::VectorXd mu = eta.array().exp().matrix();
        Eigen::VectorXd grad(p + 1);
        grad[0] = (y - mu).sum();
        grad.tail(p) = X.transpose() * (y - mu) - 2.0 * l2 * beta;

        Eigen::MatrixXd hess(p + 1, p + 1);
        hess(0, 0) = mu.sum();
        const Eigen::VectorXd xmu = X.transpose() * mu;
        hess.block(0, 1, 1, p) = xmu.transpose();
        hess.block(1, 0, p, 1) = xmu;
        hess.block(1, 1, p, p) =
            X.transpose() * mu.asDiagonal() * X + 2.0 * l2 * Eigen::MatrixXd::Identity(p, p);

        const Eigen::VectorXd step = hess.ldlt().solve(grad);
        if (!step.allFinite()) {
            throw DomainError("poisson fit: singular weighted least-squares system");
        }

        // Step-halving keeps the penalized deviance non-increasing.
        double t = 1.0;
        long double new_dev = std::numeric_limits<long double>::infinity();
        double new_b0 = b0;
        Eigen::VectorXd new_beta = beta;
        Eigen::VectorXd new_eta = eta;
        bool accepted = false;
        for (int halving = 0; halving < 50; ++halving) {
            new_b0 = b0 + t * step[0];
            new_beta = beta + t * step.tail(p);
            new_eta = (Eigen::VectorXd::Constant(n, new_b0) + X * new_beta);
            new_dev = penalized_deviance(y, new_eta, new_beta, l2);
            if (std::isfinite(static_cast<double>(new_dev)) && new_dev <= dev) {
                accepted = true;
                break;
            }
            t *= 0.5;
        }
        if (!accepted) break;  // no descent direction progress left

        const double change = static_cast<double>(dev - new_dev);
        b0 = new_b0;
        beta = new_beta;
        eta = new_eta;
        dev = new_dev;
        model.fit_trace.push_back(static_cast<double>(dev));

        const Eigen::VectorXd mu_new = eta.array().exp().matrix();
        Eigen::VectorXd grad_new(p + 1);
        grad_new[0] = (y - mu_new).sum();
        grad_new.tail(p) = X.transpose() * (y - mu_new) - 2.0 * l2 * beta;
        if (change < tol && grad_new.lpNorm<Eigen::Infinity>() < kGradTol) break;
    }

    model.intercept = b0;
    model.coef.assign(beta.data(), beta.data() + p);
    return model;
}

TrainedModel fit_elasticnet(const DesignMatrix& data, double alpha, double l1_ratio, double tol,
                            int max_sweeps) {
    data.validate();

    TrainedModel model;
    model.family = ModelFamily::kElasticNet;
    model.feature_names = data.feature_names;
    model.scaler = ScalerParams::fit(data.rows, data.n_features());
    model.hyper.enet_alpha = alpha;
    model.hyper.enet_l1_ratio = l1_ratio;
    model.hyper.enet_tol = tol;
    model.hyper.enet_max_sweeps = max_sweeps;

    const std::size_t n = data.n_rows();
    const std::size_t p = data.n_features();
    // Column-major copy of the standardized matrix.
    std::vector<std::vector<double>> cols(p, std::vector<double>(n));
    {
        const auto xs = standardize_rows(model.scaler, data.rows);
        for (std::size_t i = 0; i < n; ++i) {
            for (std::size_t j = 0; j < p; ++j) cols[j][i] = xs[i][j];
        }
    }
    const double y_mean = target_mean(data);
    std::vector<double> residual(n);
    for (std::size_t i = 0; i < n; ++i) residual[i] = data.targets[i] - y_mean;

    std::vector<double> col_sq_norm(p, 0.0);  // (1/n) ||x_j||^2
    for (std::size_t j = 0; j < p; ++j) {
        double ss = 0.0;
        for (double v : cols[j]) ss += v * v;
        col_sq_norm[j] = ss / static_cast<double>(n);
    }

    std::vector<double> beta(p, 0.0);
    const double l1_penalty = alpha * l1_ratio;
    const double l2_penalty = alpha * (1.0 - l1_ratio);

    auto objective = [&]() {
        double rss = 0.0;
        for (double r : residual) rss += r * r;
        double l1 = 0.0, l2 = 0.0;
        for (double b : beta) {
            l1 += std::abs(b);
            l2 += b * b;
        }
        return rss / (2.0 * static_cast<double>(n)) + alpha * (l1_ratio * l1 + (1.0 - l1_ratio) / 2.0 * l2);
    };

    for (int sweep = 0; sweep < max_sweeps; ++sweep) {
        double max_change = 0.0;
        for (std::size_t j = 0; j < p; ++j) {
            if (col_sq_norm[j] == 0.0) {
                beta[j] = 0.0;
                continue;
            }
            double dot = 0.0;
            for (std::size_t i = 0; i < n; ++i) dot += cols[j][i] * residual[i];
            const double rho = dot / static_cast<double>(n) + col_sq_norm[j] * beta[j];
            const double updated = soft_threshold(rho, l1_penalty) / (col_sq_norm[j] + l2_penalty);
            const double delta = updated - beta[j];
            if (delta != 0.0) {
                for (std::size_t i = 0; i < n; ++i) residual[i] -= cols[j][i] * delta;
                beta[j] = updated;
            }
            max_change = std::max(max_change, std::abs(delta));
        }
        model.fit_trace.push_back(objective());
        if (max_change < tol) break;
    }

    model.intercept = y_mean;
    model.coef = std::move(beta);
    return model;
}

TrainedModel fit_random_forest(const DesignMatrix& data, int n_trees, int mtry, int min_leaf,
                               int max_depth, std::uint64_t seed, bool bootstrap) {
    data.validate();

    TrainedModel model;
    model.family = ModelFamily::kRandomForest;
    model.feature_names = data.feature_names;
    model.scaler = ScalerParams::fit(data.rows, data.n_features());
    model.seed = seed;
    model.hyper.rf_trees = n_trees;
    model.hyper.rf_mtry = mtry;
    model.hyper.rf_min_leaf = min_leaf;
    model.hyper.rf_max_depth = max_depth;
    model.hyper.rf_bootstrap = bootstrap;

    const auto xs = standardize_rows(model.scaler, data.rows);
    const int n = static_cast<int>(data.n_rows());
    const auto p = static_cast<int>(data.n_features());
    TreeOptions options;
    options.mtry = mtry > 0 ? mtry : std::max(1, p / 3);
    options.min_leaf = min_leaf;
    options.max_depth = max_depth;

    model.tree_importance.assign(static_cast<std::size_t>(p), 0.0);
    model.trees.reserve(static_cast<std::size_t>(n_trees));
    for (int t = 0; t < n_trees; ++t) {
        // Independent per-tree stream so any fitting schedule agrees bitwise.
        Rng rng(seed + static_cast<std::uint64_t>(t));
        std::vector<int> idx;
        if (bootstrap) {
            idx = bootstrap_indices(n, rng);
        } else {
            idx.resize(static_cast<std::size_t>(n));
            std::iota(idx.begin(), idx.end(), 0);
        }
        model.trees.push_back(fit_tree(xs, data.targets, idx, options, rng, &model.tree_importance));
    }
    return model;
}

TrainedModel fit_adaboost(const DesignMatrix& data, int n_estimators, int base_depth,
                          std::uint64_t seed) {
    data.validate();

    TrainedModel model;
    model.family = ModelFamily::kAdaBoostR2;
    model.feature_names = data.feature_names;
    model.scaler = ScalerParams::fit(data.rows, data.n_features());
    model.seed = seed;
    model.hyper.ada_estimators = n_estimators;
    model.hyper.ada_depth = base_depth;

    const auto xs = standardize_rows(model.scaler, data.rows);
    const std::size_t n = data.n_rows();
    const auto p = data.n_features();
    model.tree_importance.assign(p, 0.0);

    TreeOptions options;
    options.mtry = 0;  // boosting uses every feature
    options.min_leaf = 1;
    options.max_depth = base_depth;

    Rng rng(seed);
    std::vector<double> weights(n, 1.0 / static_cast<double>(n));
    std::vector<double> cum(n);

    auto add_importance = [&](const std::vector<double>& raw, double estimator_weight) {
        const double total = std::accumulate(raw.begin(), raw.end(), 0.0);
        if (total <= 0.0) return;
        for (std::size_t j = 0; j < p; ++j) {
            model.tree_importance[j] += estimator_weight * raw[j] / total;
        }
    };

    for (int round = 0; round < n_estimators; ++round) {
        // Weighted bootstrap by inverse-CDF sampling.
        std::partial_sum(weights.begin(), weights.end(), cum.begin());
        const double total_w = cum.back();
        std::vector<int> idx(n);
        for (std::size_t i = 0; i < n; ++i) {
            const double u = rng.uniform01() * total_w;
            idx[i] = static_cast<int>(std::upper_bound(cum.begin(), cum.end(), u) - cum.begin());
            if (idx[i] >= static_cast<int>(n)) idx[i] = static_cast<int>(n) - 1;
        }

        std::vector<double> raw_importance(p, 0.0);
        Tree tree = fit_tree(xs, data.targets, idx, options, rng, &raw_importance);

        std::vector<double> errors(n);
        double max_error = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            errors[i] = std::abs(tree.predict(xs[i]) - data.targets[i]);
            max_error = std::max(max_error, errors[i]);
        }
        if (max_error == 0.0) {
            // Perfect round: infinite confidence is capped via a loss floor.
            const double w = std::log((1.0 - kCappedEstimatorLoss) / kCappedEstimatorLoss);
            model.trees.push_back(std::move(tree));
            model.tree_weights.push_back(w);
            add_importance(raw_importance, w);
            break;
        }

        double avg_loss = 0.0;
        for (std::size_t i = 0; i < n; ++i) avg_loss += weights[i] * (errors[i] / max_error);
        if (avg_loss >= 0.5) {
            if (model.trees.empty()) {
                // Keep something usable; a lone estimator's weight only has
                // to be positive because the weighted median of one tree is
                // that tree.
                model.trees.push_back(std::move(tree));
                model.tree_weights.push_back(1.0);
                add_importance(raw_importance, 1.0);
            }
            break;
        }

        const double beta = avg_loss / (1.0 - avg_loss);
        const double estimator_weight = std::log(1.0 / beta);
        model.trees.push_back(std::move(tree));
        model.tree_weights.push_back(estimator_weight);
        add_importance(raw_importance, estimator_weight);

        double norm = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            weights[i] *= std::pow(beta, 1.0 - errors[i] / max_error);
            norm += weights[i];
        }
        for (auto& w : weights) w /= norm;
    }
    return model;
}

TrainedModel fit_model(const DesignMatrix& data, ModelFamily family, const Hyperparams& hyper,
                       std::uint64_t seed) {
    switch (family) {
        case ModelFamily::kPoisson: {
            auto model = fit_poisson(data, hyper.poisson_l2, hyper.poisson_tol, hyper.poisson_max_iter);
            model.seed = seed;
            return model;
        }
        case ModelFamily::kElasticNet: {
            auto model = fit_elasticnet(data, hyper.enet_alpha, hyper.enet_l1_ratio, hyper.enet_tol,
                                        hyper.enet_max_sweeps);
            model.seed = seed;
            return model;
        }
        case ModelFamily::kRandomForest:
            return fit_random_forest(data, hyper.rf_trees, hyper.rf_mtry, hyper.rf_min_leaf,
                                     hyper.rf_max_depth, seed, hyper.rf_bootstrap);
        case ModelFamily::kAdaBoostR2:
            return fit_adaboost(data, hyper.ada_estimators, hyper.ada_depth, seed);
    }
    throw ContractError("unknown model family");
}

std::vector<double> predict(const TrainedModel& model, const std::vector<std::string>& names,
                            const std::vector<std::vector<double>>& rows) {
    // The rows must carry exactly the model's features, in any order.
    std::vector<std::size_t> perm(model.feature_names.size());
    {
        std::set<std::string> given(names.begin(), names.end());
        std::set<std::string> wanted(model.feature_names.begin(), model.feature_names.end());
        if (given != wanted || names.size() != model.feature_names.size()) {
            std::string diff;
            for (const auto& name : wanted) {
                if (!given.count(name)) diff += " -" + name;
            }
            for (const auto& name : given) {
                if (!wanted.count(name)) diff += " +" + name;
            }
            throw ContractError("feature-name mismatch:" + diff);
        }
        for (std::size_t j = 0; j < model.feature_names.size(); ++j) {
            const auto it = std::find(names.begin(), names.end(), model.feature_names[j]);
            perm[j] = static_cast<std::size_t>(it - names.begin());
        }
    }

    std::vector<double> out;
    out.reserve(rows.size());
    std::vector<double> reordered(model.feature_names.size());
    for (const auto& row : rows) {
        if (row.size() != names.size()) throw ContractError("prediction row has wrong width");
        for (std::size_t j = 0; j < perm.size(); ++j) reordered[j] = row[perm[j]];
        const std::vector<double> xs = model.scaler.transform(reordered);
        double value = 0.0;
        switch (model.family) {
            case ModelFamily::kPoisson: {
                double eta = model.intercept;
                for (std::size_t j = 0; j < xs.size(); ++j) eta += model.coef[j] * xs[j];
                value = std::exp(eta);
                break;
            }
            case ModelFamily::kElasticNet: {
                value = model.intercept;
                for (std::size_t j = 0; j < xs.size(); ++j) value += model.coef[j] * xs[j];
                break;
            }
            case ModelFamily::kRandomForest: {
                double sum = 0.0;
                for (const auto& tree : model.trees) sum += tree.predict(xs);
                value = sum / static_cast<double>(model.trees.size());
                break;
            }
            case ModelFamily::kAdaBoostR2: {
                value = weighted_median_prediction(model.trees, model.tree_weights, xs);
                break;
            }
        }
        out.push_back(std::max(value, 0.0));
    }
    return out;
}

std::vector<double> predict(const TrainedModel& model, const DesignMatrix& data) {
    return predict(model, data.feature_names, data.rows);
}

std::vector<double> feature_importance(const TrainedModel& model) {
    const std::size_t p = model.feature_names.size();
    std::vector<double> scores(p, 0.0);
    switch (model.family) {
        case ModelFamily::kPoisson:
        case ModelFamily::kElasticNet:
            for (std::size_t j = 0; j < p; ++j) scores[j] = std::abs(model.coef[j]);
            break;
        case ModelFamily::kRandomForest:
        case ModelFamily::kAdaBoostR2: {
            scores = model.tree_importance;
            const double total = std::accumulate(scores.begin(), scores.end(), 0.0);
            if (total > 0.0) {
                for (auto& s : scores) s /= total;
            }
            break;
        }
    }
    return scores;
}

double poisson_penalized_loglik(const TrainedModel& model, const DesignMatrix& data) {
    if (model.family != ModelFamily::kPoisson) {
        throw ContractError("poisson_penalized_loglik: not a poisson model");
    }
    double ll = 0.0;
    for (std::size_t i = 0; i < data.n_rows(); ++i) {
        const auto xs = model.scaler.transform(data.rows[i]);
        double eta = model.intercept;
        for (std::size_t j = 0; j < xs.size(); ++j) eta += model.coef[j] * xs[j];
        ll += data.targets[i] * eta - std::exp(eta);
    }
    double penalty = 0.0;
    for (double b : model.coef) penalty += b * b;
    return ll - model.hyper.poisson_l2 * penalty;
}

std::vector<double> poisson_gradient(const TrainedModel& model, const DesignMatrix& data) {
    if (model.family != ModelFamily::kPoisson) {
        throw ContractError("poisson_gradient: not a poisson model");
    }
    const std::size_t p = model.feature_names.size();
    std::vector<double> grad(p + 1, 0.0);
    for (std::size_t i = 0; i < data.n_rows(); ++i) {
        const auto xs = model.scaler.transform(data.rows[i]);
        double eta = model.intercept;
        for (std::size_t j = 0; j < p; ++j) eta += model.coef[j] * xs[j];
        const double resid = data.targets[i] - std::exp(eta);
        grad[0] += resid;
        for (std::size_t j = 0; j < p; ++j) grad[j + 1] += resid * xs[j];
    }
    for (std::size_t j = 0; j < p; ++j) grad[j + 1] -= 2.0 * model.hyper.poisson_l2 * model.coef[j];
    return grad;
}

std::string model_to_json(const TrainedModel& model) {
    json j;
    j["schema_version"] = 1;
    j["family"] = family_name(model.family);
    j["feature_names"] = model.feature_names;
    j["scaler"] = {{"means", model.scaler.means},
                   {"stds", model.scaler.stds},
                   {"constant_flags", model.scaler.constant}};

    json params;
    switch (model.family) {
        case ModelFamily::kPoisson:
        case ModelFamily::kElasticNet:
            params["coefficients"] = model.coef;
            params["intercept"] = model.intercept;
            break;
        case ModelFamily::kRandomForest:
        case ModelFamily::kAdaBoostR2: {
            json trees = json::array();
            for (const auto& tree : model.trees) trees.push_back(tree_node_to_json(tree, 0));
            params["trees"] = std::move(trees);
            if (model.family == ModelFamily::kAdaBoostR2) {
                params["estimator_weights"] = model.tree_weights;
            }
            params["impurity_importance"] = model.tree_importance;
            break;
        }
    }
    j["params"] = std::move(params);

    json hyper;
    switch (model.family) {
        case ModelFamily::kPoisson:
            hyper = {{"l2", model.hyper.poisson_l2},
                     {"tol", model.hyper.poisson_tol},
                     {"max_iter", model.hyper.poisson_max_iter}};
            break;
        case ModelFamily::kElasticNet:
            hyper = {{"alpha", model.hyper.enet_alpha},
                     {"l1_ratio", model.hyper.enet_l1_ratio},
                     {"tol", model.hyper.enet_tol},
                     {"max_sweeps", model.hyper.enet_max_sweeps}};
            break;
        case ModelFamily::kRandomForest:
            hyper = {{"n_trees", model.hyper.rf_trees},
                     {"mtry", model.hyper.rf_mtry},
                     {"min_leaf", model.hyper.rf_min_leaf},
                     {"max_depth", model.hyper.rf_max_depth},
                     {"bootstrap", model.hyper.rf_bootstrap}};
            break;
        case ModelFamily::kAdaBoostR2:
            hyper = {{"n_estimators", model.hyper.ada_estimators},
                     {"base_depth", model.hyper.ada_depth}};
            break;
    }
    j["hyperparams"] = std::move(hyper);
    j["seed"] = model.seed;
    return j.dump(2);
}

TrainedModel model_from_json(const std::string& text) {
    const json j = json::parse(text);
    TrainedModel model;
    const auto family = family_from_name(j.at("family").get<std::string>());
    if (!family.has_value()) {
        throw DomainError("model JSON: unknown family");
    }
    model.family = *family;
    model.feature_names = j.at("feature_names").get<std::vector<std::string>>();
    model.scaler.means = j.at("scaler").at("means").get<std::vector<double>>();
    model.scaler.stds = j.at("scaler").at("stds").get<std::vector<double>>();
    model.scaler.constant = j.at("scaler").at("constant_flags").get<std::vector<bool>>();
    model.seed = j.value("seed", std::uint64_t{0});

    const json& params = j.at("params");
    const json& hyper = j.at("hyperparams");
    switch (model.family) {
        case ModelFamily::kPoisson:
            model.coef = params.at("coefficients").get<std::vector<double>>();
            model.intercept = params.at("intercept").get<double>();
            model.hyper.poisson_l2 = hyper.at("l2").get<double>();
            model.hyper.poisson_tol = hyper.at("tol").get<double>();
            model.hyper.poisson_max_iter = hyper.at("max_iter").get<int>();
            break;
        case ModelFamily::kElasticNet:
            model.coef = params.at("coefficients").get<std::vector<double>>();
            model.intercept = params.at("intercept").get<double>();
            model.hyper.enet_alpha = hyper.at("alpha").get<double>();
            model.hyper.enet_l1_ratio = hyper.at("l1_ratio").get<double>();
            model.hyper.enet_tol = hyper.at("tol").get<double>();
            model.hyper.enet_max_sweeps = hyper.at("max_sweeps").get<int>();
            break;
        case ModelFamily::kRandomForest:
        case ModelFamily::kAdaBoostR2:
            for (const auto& tj : params.at("trees")) {
                Tree tree;
                tree_node_from_json(tj, tree);
                model.trees.push_back(std::move(tree));
            }
            model.tree_importance = params.at("impurity_importance").get<std::vector<double>>();
            if (model.family == ModelFamily::kAdaBoostR2) {
                model.tree_weights = params.at("estimator_weights").get<std::vector<double>>();
                model.hyper.ada_estimators = hyper.at("n_estimators").get<int>();
                model.hyper.ada_depth = hyper.at("base_depth").get<int>();
            } else {
                model.hyper.rf_trees = hyper.at("n_trees").get<int>();
                model.hyper.rf_mtry = hyper.at("mtry").get<int>();
                model.hyper.rf_min_leaf = hyper.at("min_leaf").get<int>();
                model.hyper.rf_max_depth = hyper.at("max_depth").get<int>();
                model.hyper.rf_bootstrap = hyper.at("bootstrap").get<bool>();
            }
            break;
    }
    return model;
}

void save_model(const TrainedModel& model, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot write model file: " + path);
    out << model_to_json(model) << "\n";
}

TrainedModel load_model(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot read model file: " + path);
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return model_from_json(buffer.str());
}

}  // namespace towcast
