#pragma once

#include <span>
#include <vector>

#include "towcast/rng.hpp"

namespace towcast {

/// One CART node. feature < 0 marks a leaf.
struct TreeNode {
    int feature = -1;
    double threshold = 0.0;
    int left = -1;
    int right = -1;
    double value = 0.0;
};

/// Regression tree with variance (SSE) splits.
struct Tree {
    std::vector<TreeNode> nodes;  // node 0 is the root

    double predict(std::span<const double> row) const;
    bool empty() const { return nodes.empty(); }
};

struct TreeOptions {
    int mtry = 0;       // features to consider per node; 0 means all
    int min_leaf = 1;   // minimum samples per leaf
    int max_depth = 0;  // 0 means unlimited
};

/// Fits a CART regression tree on X restricted to sample_idx (which may
/// repeat rows, encoding a bootstrap). Split search walks features in a
/// random order until mtry splittable features have been scored; the best
/// split wins with ties broken toward the lowest feature index, then the
/// lowest threshold, so identical seeds give identical trees.
///
/// When impurity_decrease is non-null it accumulates, per feature, the
/// total SSE reduction of every split in this tree.
Tree fit_tree(const std::vector<std::vector<double>>& X, std::span<const double> y,
              std::span<const int> sample_idx, const TreeOptions& options, Rng& rng,
              std::vector<double>* impurity_decrease = nullptr);

}  // namespace towcast
