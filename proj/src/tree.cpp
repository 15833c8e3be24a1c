#include "towcast/tree.hpp"

#include <algorithm>
#include <limits>
#include <numeric>

namespace towcast {
namespace {

struct SplitCandidate {
    bool valid = false;
    double gain = -std::numeric_limits<double>::infinity();
    int feature = -1;
    double threshold = 0.0;
    // Samples with x[feature] <= threshold go left.
};

bool better(const SplitCandidate& a, const SplitCandidate& b) {
    if (!b.valid) return a.valid;
    if (!a.valid) return false;
    if (a.gain != b.gain) return a.gain > b.gain;
    if (a.feature != b.feature) return a.feature < b.feature;
    return a.threshold < b.threshold;
}

struct Builder {
    const std::vector<std::vector<double>>& X;
    std::span<const double> y;
    const TreeOptions& options;
    Rng& rng;
    std::vector<double>* importance;
    Tree tree;

    // Scratch: (value, node position) pairs sorted per candidate feature.
    std::vector<std::pair<double, int>> order;

    int build(std::vector<int>& samples, int depth) {
        const auto n = static_cast<int>(samples.size());
        double sum = 0.0;
        for (int idx : samples) sum += y[static_cast<std::size_t>(idx)];
        const double mean = sum / n;

        bool pure = true;
        for (int idx : samples) {
            if (y[static_cast<std::size_t>(idx)] != y[static_cast<std::size_t>(samples[0])]) {
                pure = false;
                break;
            }
        }
        const bool depth_capped = options.max_depth > 0 && depth >= options.max_depth;
        if (pure || n < 2 * options.min_leaf || depth_capped) {
            return add_leaf(mean);
        }

        const SplitCandidate split = find_split(samples, sum);
        if (!split.valid) {
            return add_leaf(mean);
        }

        std::vector<int> left_samples, right_samples;
        left_samples.reserve(samples.size());
        right_samples.reserve(samples.size());
        for (int idx : samples) {
            const double v = X[static_cast<std::size_t>(idx)][static_cast<std::size_t>(split.feature)];
            (v <= split.threshold ? left_samples : right_samples).push_back(idx);
        }
        samples.clear();
        samples.shrink_to_fit();

        const int node_id = static_cast<int>(tree.nodes.size());
        tree.nodes.push_back(TreeNode{split.feature, split.threshold, -1, -1, 0.0});
        const int left_id = build(left_samples, depth + 1);
        const int right_id = build(right_samples, depth + 1);
        tree.nodes[static_cast<std::size_t>(node_id)].left = left_id;
        tree.nodes[static_cast<std::size_t>(node_id)].right = right_id;
        return node_id;
    }

    int add_leaf(double value) {
        tree.nodes.push_back(TreeNode{-1, 0.0, -1, -1, value});
        return static_cast<int>(tree.nodes.size() - 1);
    }

    SplitCandidate find_split(const std::vector<int>& samples, double y_sum) {
        const auto p = static_cast<int>(X[0].size());
        const auto n = static_cast<int>(samples.size());
        const int want = options.mtry > 0 ? std::min(options.mtry, p) : p;

        std::vector<int> feature_order(static_cast<std::size_t>(p));
        std::iota(feature_order.begin(), feature_order.end(), 0);
        rng.shuffle(feature_order);

        SplitCandidate best;
        const double parent_proxy = y_sum * y_sum / n;
        int scored = 0;
        for (int f : feature_order) {
            if (scored >= want) break;
            order.clear();
            for (int pos = 0; pos < n; ++pos) {
                const int idx = samples[static_cast<std::size_t>(pos)];
                order.emplace_back(X[static_cast<std::size_t>(idx)][static_cast<std::size_t>(f)], pos);
            }
            std::sort(order.begin(), order.end());
            if (order.front().first == order.back().first) {
                continue;  // constant in this node; does not count toward mtry
            }

            SplitCandidate feature_best;
            double left_sum = 0.0;
            for (int k = 1; k < n; ++k) {
                const int idx = samples[static_cast<std::size_t>(order[static_cast<std::size_t>(k - 1)].second)];
                left_sum += y[static_cast<std::size_t>(idx)];
                const double v_prev = order[static_cast<std::size_t>(k - 1)].first;
                const double v_next = order[static_cast<std::size_t>(k)].first;
                if (v_prev == v_next) continue;
                if (k < options.min_leaf || n - k < options.min_leaf) continue;
                const double right_sum = y_sum - left_sum;
                const double proxy = left_sum * left_sum / k + right_sum * right_sum / (n - k);
                const double gain = proxy - parent_proxy;
                SplitCandidate cand{true, gain, f, 0.5 * (v_prev + v_next)};
                if (better(cand, feature_best)) feature_best = cand;
            }
            if (!feature_best.valid) {
                continue;  // min_leaf left no admissible position
            }
            ++scored;
            if (better(feature_best, best)) best = feature_best;
        }
        if (best.valid && importance != nullptr && best.gain > 0.0) {
            (*importance)[static_cast<std::size_t>(best.feature)] += best.gain;
        }
        return best;
    }
};

}  // namespace

double Tree::predict(std::span<const double> row) const {
    int id = 0;
    while (true) {
        const TreeNode& node = nodes[static_cast<std::size_t>(id)];
        if (node.feature < 0) return node.value;
        id = row[static_cast<std::size_t>(node.feature)] <= node.threshold ? node.left : node.right;
    }
}

Tree fit_tree(const std::vector<std::vector<double>>& X, std::span<const double> y,
              std::span<const int> sample_idx, const TreeOptions& options, Rng& rng,
              std::vector<double>* impurity_decrease) {
    Builder builder{X, y, options, rng, impurity_decrease, {}, {}};
    std::vector<int> samples(sample_idx.begin(), sample_idx.end());
    builder.tree.nodes.reserve(2 * samples.size());
    builder.build(samples, 0);
    return std::move(builder.tree);
}

}  // namespace towcast
