#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "ipss/dataio.hpp"

namespace ipss {

enum class Task { regression, classification };

inline Task task_for(ResponseKind kind) {
    return kind == ResponseKind::binary ? Task::classification : Task::regression;
}

struct TreeConfig {
    std::size_t n_trees = 100;
    std::size_t max_depth = 0;  // 0 = unlimited
    double feature_fraction = 1.0 / 3.0;
    double learning_rate = 0.3;   // boosting only
    double l2_leaf_reg = 1.0;     // boosting only
    bool bootstrap = true;        // forest only
    std::size_t min_samples_leaf = 1;
    std::uint64_t seed = 0;

    // Random-forest backend: fully grown trees on bootstrap resamples with a
    // third of the features tried per split.
    static TreeConfig forest_defaults();
    // Boosting backend: 100 stump rounds, learning rate 0.3, L2 leaf
    // regularization 1, a third of the features tried per split, no row
    // subsampling.
    static TreeConfig boosting_defaults();

    void validate() const;
};

struct TreeNode {
    int feature = -1;  // -1 marks a leaf
    double threshold = 0.0;
    double impurity = 0.0;        // response impurity of the node's samples
    double delta_impurity = 0.0;  // forest: impurity decrease; boosting: regularized gain
    std::size_t n_samples = 0;
    int left = -1;
    int right = -1;
    double leaf_value = 0.0;

    bool is_leaf() const { return feature < 0; }
};

struct Tree {
    std::vector<TreeNode> nodes;  // nodes[0] is the root
};

enum class EnsembleKind { forest, boosting };

struct Ensemble {
    std::vector<Tree> trees;
    Task task = Task::regression;
    EnsembleKind kind = EnsembleKind::forest;
    double learning_rate = 0.0;  // boosting only
    double base_score = 0.0;     // boosting initial prediction (margin scale)
};

// Node impurity: mean squared deviation for regression, Gini index 2*p0*p1
// for classification (labels must be 0/1). Throws on an empty node.
double impurity(std::span<const double> values, Task task);

struct NodeStats {
    double impurity = 0.0;
    std::size_t count = 0;
};

// Impurity decrease of a split: parent impurity minus the sample-weighted
// mean of the child impurities. Throws if a child is empty or counts do not
// add up.
double delta_impurity(const NodeStats& parent, const NodeStats& left, const NodeStats& right);

// Greedy CART forest. Candidate thresholds are midpoints between consecutive
// distinct sorted feature values; splits with gain <= 0 are rejected; ties in
// gain break toward the lower feature index, then the lower threshold.
// Deterministic given cfg.seed for any worker count.
Ensemble fit_forest(const Dataset& d, const TreeConfig& cfg, int threads = 1);

// Second-order gradient boosting on depth-1 stumps. Squared-error objective
// for regression, logistic for classification; per-round split maximizes the
// regularized gain 0.5*[gL^2/(hL+reg) + gR^2/(hR+reg) - gP^2/(hP+reg)].
Ensemble fit_boosting(const Dataset& d, const TreeConfig& cfg);

// Mean decrease impurity: per feature, the sum of delta_impurity over split
// nodes using that feature, averaged over trees. For boosting the stored
// delta_impurity is the regularized objective gain.
std::vector<double> mdi_importance(const Ensemble& e, std::size_t p);

// Training-scale predictions: forest returns the mean leaf value, boosting
// the additive margin including base_score (apply a sigmoid yourself for
// classification probabilities).
std::vector<double> predict(const Ensemble& e, const Dataset& d);

}  // namespace ipss
