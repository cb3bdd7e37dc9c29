#include "ipss/trees.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>
#include <utility>

#include "ipss/parallel.hpp"
#include "ipss/rng.hpp"

namespace ipss {

namespace {

// Single-pass impurity from running moments. For classification sum is the
// count of 1-labels and sum_sq is ignored.
double moment_impurity(double sum, double sum_sq, std::size_t n, Task task) {
    const double m = static_cast<double>(n);
    if (task == Task::classification) {
        const double q = sum / m;
        return 2.0 * q * (1.0 - q);
    }
    const double v = sum_sq / m - (sum / m) * (sum / m);
    return v > 0.0 ? v : 0.0;
}

std::size_t features_per_split(double fraction, std::size_t p) {
    const auto k = static_cast<std::size_t>(fraction * static_cast<double>(p));
    return std::max<std::size_t>(1, std::min(k, p));
}

struct SplitChoice {
    bool found = false;
    int feature = -1;
    double threshold = 0.0;
    double gain = 0.0;
    std::size_t n_left = 0;
    double g_left = 0.0;  // boosting only
    double h_left = 0.0;  // boosting only
};

// Ties in gain go to the lower feature index, then the lower threshold, so
// the result does not depend on the order features were tried in.
bool better_than(const SplitChoice& cand, const SplitChoice& best) {
    if (!best.found) return true;
    if (cand.gain != best.gain) return cand.gain > best.gain;
    if (cand.feature != best.feature) return cand.feature < best.feature;
    return cand.threshold < best.threshold;
}

// Midpoint between consecutive distinct values, guarded so the rule
// x <= threshold keeps lo on the left even if the midpoint rounds onto hi.
double split_threshold(double lo, double hi) {
    double t = 0.5 * (lo + hi);
    if (t >= hi) t = lo;
    return t;
}

// Draws the next random feature into pool[k] (partial Fisher-Yates step).
int draw_feature(std::vector<int>& pool, std::size_t k, Rng& rng) {
    const std::size_t j = k + rng.uniform_index(pool.size() - k);
    std::swap(pool[k], pool[j]);
    return pool[k];
}

struct CartWork {
    int node = 0;
    std::vector<std::size_t> rows;
    std::size_t depth = 0;
};

Tree build_cart_tree(const Dataset& d, const TreeConfig& cfg, Task task,
                     std::vector<std::size_t> root_rows, Rng& rng) {
    const std::size_t p = d.p();
    const std::size_t mtry = features_per_split(cfg.feature_fraction, p);
    const auto& y = d.response.values;

    std::vector<int> pool(p);
    std::iota(pool.begin(), pool.end(), 0);
    std::vector<std::pair<double, double>> sorted;  // (feature value, response)

    Tree tree;
    tree.nodes.emplace_back();
    std::vector<CartWork> stack;
    stack.push_back({0, std::move(root_rows), 0});

    while (!stack.empty()) {
        CartWork w = std::move(stack.back());
        stack.pop_back();

        const std::size_t m = w.rows.size();
        double sum = 0.0, sum_sq = 0.0;
        double y_lo = std::numeric_limits<double>::infinity();
        double y_hi = -y_lo;
        for (std::size_t r : w.rows) {
            const double v = y[r];
            sum += v;
            sum_sq += v * v;
            y_lo = std::min(y_lo, v);
            y_hi = std::max(y_hi, v);
        }
        const double node_imp = moment_impurity(sum, sum_sq, m, task);
        tree.nodes[w.node].n_samples = m;
        tree.nodes[w.node].impurity = node_imp;

        const bool depth_ok = cfg.max_depth == 0 || w.depth < cfg.max_depth;
        SplitChoice best;
        if (depth_ok && m >= 2 * cfg.min_samples_leaf && m >= 2 && y_lo < y_hi) {
            for (std::size_t k = 0; k < mtry; ++k) {
                const int f = draw_feature(pool, k, rng);
                const auto& col = d.columns[f];
                sorted.clear();
                for (std::size_t r : w.rows) sorted.emplace_back(col[r], y[r]);
                std::sort(sorted.begin(), sorted.end(),
                          [](const auto& a, const auto& b) { return a.first < b.first; });
                double run_sum = 0.0, run_sq = 0.0;
                for (std::size_t i = 0; i + 1 < m; ++i) {
                    run_sum += sorted[i].second;
                    run_sq += sorted[i].second * sorted[i].second;
                    if (sorted[i].first == sorted[i + 1].first) continue;
                    const std::size_t n_left = i + 1;
                    const std::size_t n_right = m - n_left;
                    if (n_left < cfg.min_samples_leaf || n_right < cfg.min_samples_leaf) continue;
                    const double imp_l = moment_impurity(run_sum, run_sq, n_left, task);
                    const double imp_r =
                        moment_impurity(sum - run_sum, sum_sq - run_sq, n_right, task);
                    const double frac_l = static_cast<double>(n_left) / static_cast<double>(m);
                    const double frac_r = static_cast<double>(n_right) / static_cast<double>(m);
                    const double gain = node_imp - frac_l * imp_l - frac_r * imp_r;
                    if (gain <= 0.0) continue;
                    SplitChoice cand;
                    cand.found = true;
                    cand.feature = f;
                    cand.threshold = split_threshold(sorted[i].first, sorted[i + 1].first);
                    cand.gain = gain;
                    cand.n_left = n_left;
                    if (better_than(cand, best)) best = cand;
                }
            }
        }

        if (best.found) {
            std::vector<std::size_t> left_rows, right_rows;
            left_rows.reserve(best.n_left);
            right_rows.reserve(m - best.n_left);
            const auto& col = d.columns[best.feature];
            for (std::size_t r : w.rows) {
                (col[r] <= best.threshold ? left_rows : right_rows).push_back(r);
            }
            if (!left_rows.empty() && !right_rows.empty()) {
                const int li = static_cast<int>(tree.nodes.size());
                tree.nodes.emplace_back();
                const int ri = static_cast<int>(tree.nodes.size());
                tree.nodes.emplace_back();
                TreeNode& nd = tree.nodes[w.node];
                nd.feature = best.feature;
                nd.threshold = best.threshold;
                nd.delta_impurity = best.gain;
                nd.left = li;
                nd.right = ri;
                stack.push_back({ri, std::move(right_rows), w.depth + 1});
                stack.push_back({li, std::move(left_rows), w.depth + 1});
                continue;
            }
        }
        tree.nodes[w.node].leaf_value = sum / static_cast<double>(m);
    }
    return tree;
}

double tree_value(const Tree& t, const Dataset& d, std::size_t row) {
    int node = 0;
    while (!t.nodes[node].is_leaf()) {
        const TreeNode& nd = t.nodes[node];
        node = d.columns[nd.feature][row] <= nd.threshold ? nd.left : nd.right;
    }
    return t.nodes[node].leaf_value;
}

}  // namespace

TreeConfig TreeConfig::forest_defaults() {
    TreeConfig cfg;
    cfg.n_trees = 100;
    cfg.max_depth = 0;
    cfg.feature_fraction = 1.0 / 3.0;
    cfg.bootstrap = true;
    cfg.min_samples_leaf = 1;
    return cfg;
}

TreeConfig TreeConfig::boosting_defaults() {
    TreeConfig cfg;
    cfg.n_trees = 100;
    cfg.max_depth = 1;
    cfg.feature_fraction = 1.0 / 3.0;
    cfg.learning_rate = 0.3;
    cfg.l2_leaf_reg = 1.0;
    cfg.bootstrap = false;
    cfg.min_samples_leaf = 1;
    return cfg;
}

void TreeConfig::validate() const {
    if (n_trees == 0) throw std::invalid_argument("n_trees must be positive");
    if (!(feature_fraction > 0.0) || feature_fraction > 1.0)
        throw std::invalid_argument("feature_fraction must be in (0, 1]");
    if (!(learning_rate > 0.0)) throw std::invalid_argument("learning_rate must be positive");
    if (!(l2_leaf_reg >= 0.0)) throw std::invalid_argument("l2_leaf_reg must be nonnegative");
    if (min_samples_leaf == 0) throw std::invalid_argument("min_samples_leaf must be positive");
}

double impurity(std::span<const double> values, Task task) {
    if (values.empty()) throw std::invalid_argument("impurity: empty node");
    const double m = static_cast<double>(values.size());
    if (task == Task::classification) {
        double ones = 0.0;
        for (double v : values) {
            if (v != 0.0 && v != 1.0)
                throw std::invalid_argument("impurity: classification labels must be 0 or 1");
            ones += v;
        }
        const double q = ones / m;
        return 2.0 * q * (1.0 - q);
    }
    double mean = 0.0;
    for (double v : values) mean += v;
    mean /= m;
    double acc = 0.0;
    for (double v : values) acc += (v - mean) * (v - mean);
    return acc / m;
}

double delta_impurity(const NodeStats& parent, const NodeStats& left, const NodeStats& right) {
    if (left.count == 0 || right.count == 0)
        throw std::invalid_argument("delta_impurity: empty child");
    if (left.count + right.count != parent.count)
        throw std::invalid_argument("delta_impurity: child counts do not sum to parent");
    const double m = static_cast<double>(parent.count);
    return parent.impurity - (static_cast<double>(left.count) / m) * left.impurity -
           (static_cast<double>(right.count) / m) * right.impurity;
}

Ensemble fit_forest(const Dataset& d, const TreeConfig& cfg, int threads) {
    cfg.validate();
    const std::size_t n = d.n();
    if (n < 2) throw std::invalid_argument("fit_forest: need at least 2 samples");

    Ensemble e;
    e.task = task_for(d.response.kind);
    e.kind = EnsembleKind::forest;
    e.trees.resize(cfg.n_trees);

    std::vector<std::uint64_t> seeds(cfg.n_trees);
    for (std::size_t t = 0; t < cfg.n_trees; ++t) seeds[t] = derive_seed(cfg.seed, t);

    parallel_for(cfg.n_trees, threads, [&](std::size_t t) {
        Rng rng(seeds[t]);
        std::vector<std::size_t> rows(n);
        if (cfg.bootstrap) {
            for (std::size_t i = 0; i < n; ++i) rows[i] = rng.uniform_index(n);
        } else {
            std::iota(rows.begin(), rows.end(), std::size_t{0});
        }
        e.trees[t] = build_cart_tree(d, cfg, e.task, std::move(rows), rng);
    });
    return e;
}

Ensemble fit_boosting(const Dataset& d, const TreeConfig& cfg) {
    cfg.validate();
    const std::size_t n = d.n();
    const std::size_t p = d.p();
    if (n < 2) throw std::invalid_argument("fit_boosting: need at least 2 samples");

    const Task task = task_for(d.response.kind);
    const auto& y = d.response.values;
    const double reg = cfg.l2_leaf_reg;
    const std::size_t mtry = features_per_split(cfg.feature_fraction, p);

    // Rows sorted by feature value, shared across rounds (no row subsampling).
    std::vector<std::vector<std::size_t>> order(p);
    for (std::size_t f = 0; f < p; ++f) {
        auto& ord = order[f];
        ord.resize(n);
        std::iota(ord.begin(), ord.end(), std::size_t{0});
        const auto& col = d.columns[f];
        std::sort(ord.begin(), ord.end(),
                  [&](std::size_t a, std::size_t b) { return col[a] < col[b]; });
    }

    double y_sum = 0.0, y_sq = 0.0;
    for (double v : y) {
        y_sum += v;
        y_sq += v * v;
    }
    const double y_imp = moment_impurity(y_sum, y_sq, n, task);

    double base = y_sum / static_cast<double>(n);
    if (task == Task::classification) {
        const double pbar = std::clamp(base, 1e-12, 1.0 - 1e-12);
        base = std::log(pbar / (1.0 - pbar));
    }

    Ensemble e;
    e.task = task;
    e.kind = EnsembleKind::boosting;
    e.learning_rate = cfg.learning_rate;
    e.base_score = base;
    e.trees.reserve(cfg.n_trees);

    std::vector<int> pool(p);
    std::iota(pool.begin(), pool.end(), 0);
    std::vector<double> margin(n, base), g(n), h(n);

    for (std::size_t round = 0; round < cfg.n_trees; ++round) {
        Rng rng(derive_seed(cfg.seed, round));

        double g_tot = 0.0, h_tot = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            if (task == Task::classification) {
                double pr = 1.0 / (1.0 + std::exp(-margin[i]));
                pr = std::clamp(pr, 1e-12, 1.0 - 1e-12);
                g[i] = pr - y[i];
                h[i] = pr * (1.0 - pr);
            } else {
                g[i] = margin[i] - y[i];
                h[i] = 1.0;
            }
            g_tot += g[i];
            h_tot += h[i];
        }
        const double parent_term = 0.5 * g_tot * g_tot / (h_tot + reg);

        SplitChoice best;
        for (std::size_t k = 0; k < mtry; ++k) {
            const int f = draw_feature(pool, k, rng);
            const auto& col = d.columns[f];
            const auto& ord = order[f];
            double gl = 0.0, hl = 0.0;
            for (std::size_t i = 0; i + 1 < n; ++i) {
                const std::size_t r = ord[i];
                gl += g[r];
                hl += h[r];
                if (col[r] == col[ord[i + 1]]) continue;
                const std::size_t n_left = i + 1;
                const std::size_t n_right = n - n_left;
                if (n_left < cfg.min_samples_leaf || n_right < cfg.min_samples_leaf) continue;
                const double gr = g_tot - gl;
                const double hr = h_tot - hl;
                const double gain =
                    0.5 * (gl * gl / (hl + reg) + gr * gr / (hr + reg)) - parent_term;
                if (gain <= 0.0) continue;
                SplitChoice cand;
                cand.found = true;
                cand.feature = f;
                cand.threshold = split_threshold(col[r], col[ord[i + 1]]);
                cand.gain = gain;
                cand.n_left = n_left;
                cand.g_left = gl;
                cand.h_left = hl;
                if (better_than(cand, best)) best = cand;
            }
        }

        Tree tr;
        if (best.found) {
            const double w_left = -best.g_left / (best.h_left + reg);
            const double w_right = -(g_tot - best.g_left) / ((h_tot - best.h_left) + reg);
            const auto& col = d.columns[best.feature];

            double ls = 0.0, lq = 0.0, rs = 0.0, rq = 0.0;
            std::size_t lc = 0, rc = 0;
            for (std::size_t i = 0; i < n; ++i) {
                if (col[i] <= best.threshold) {
                    ls += y[i];
                    lq += y[i] * y[i];
                    ++lc;
                } else {
                    rs += y[i];
                    rq += y[i] * y[i];
                    ++rc;
                }
            }

            TreeNode root;
            root.feature = best.feature;
            root.threshold = best.threshold;
            root.impurity = y_imp;
            root.delta_impurity = best.gain;
            root.n_samples = n;
            root.left = 1;
            root.right = 2;

            TreeNode left;
            left.n_samples = lc;
            left.impurity = moment_impurity(ls, lq, lc, task);
            left.leaf_value = w_left;

            TreeNode right;
            right.n_samples = rc;
            right.impurity = moment_impurity(rs, rq, rc, task);
            right.leaf_value = w_right;

            tr.nodes = {root, left, right};
            for (std::size_t i = 0; i < n; ++i) {
                margin[i] += cfg.learning_rate * (col[i] <= best.threshold ? w_left : w_right);
            }
        } else {
            // No useful split this round; take the global Newton step instead.
            TreeNode leaf;
            leaf.n_samples = n;
            leaf.impurity = y_imp;
            leaf.leaf_value = -g_tot / (h_tot + reg);
            tr.nodes.push_back(leaf);
            const double step = cfg.learning_rate * leaf.leaf_value;
            for (std::size_t i = 0; i < n; ++i) margin[i] += step;
        }
        e.trees.push_back(std::move(tr));
    }
    return e;
}

std::vector<double> mdi_importance(const Ensemble& e, std::size_t p) {
    if (e.trees.empty()) throw std::invalid_argument("mdi_importance: empty ensemble");
    std::vector<double> imp(p, 0.0);
    for (const Tree& t : e.trees) {
        for (const TreeNode& nd : t.nodes) {
            if (nd.is_leaf()) continue;
            if (static_cast<std::size_t>(nd.feature) >= p)
                throw std::out_of_range("mdi_importance: feature index out of range");
            imp[nd.feature] += nd.delta_impurity;
        }
    }
    const double scale = 1.0 / static_cast<double>(e.trees.size());
    for (double& v : imp) v *= scale;
    return imp;
}

std::vector<double> predict(const Ensemble& e, const Dataset& d) {
    std::vector<double> out(d.n(), 0.0);
    for (std::size_t i = 0; i < d.n(); ++i) {
        if (e.kind == EnsembleKind::forest) {
            double acc = 0.0;
            for (const Tree& t : e.trees) acc += tree_value(t, d, i);
            out[i] = e.trees.empty() ? 0.0 : acc / static_cast<double>(e.trees.size());
        } else {
            double acc = e.base_score;
            for (const Tree& t : e.trees) acc += e.learning_rate * tree_value(t, d, i);
            out[i] = acc;
        }
    }
    return out;
}

}  // namespace ipss
