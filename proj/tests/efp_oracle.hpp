#pragma once

// Reference implementations used by the unit tests and the acceptance
// checks: plain loops that re-derive every quantity from its definition,
// sharing no arithmetic shortcuts with the library.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <vector>

#include "ipss/core.hpp"
#include "ipss/dataio.hpp"

namespace oracle {

inline ipss::ScoreMatrix score_matrix_from(const ipss::FeatureMatrix& m) {
    ipss::ScoreMatrix s;
    s.p = m.p();
    s.rows.assign(m.n(), std::vector<double>(s.p));
    for (std::size_t i = 0; i < m.n(); ++i)
        for (std::size_t j = 0; j < s.p; ++j) s.rows[i][j] = m.columns[j][i];
    return s;
}

inline double q_at(const ipss::ScoreMatrix& s, double lambda) {
    std::size_t count = 0;
    for (const auto& row : s.rows)
        for (double v : row)
            if (v >= lambda) ++count;
    return static_cast<double>(count) / static_cast<double>(s.rows.size());
}

inline double pi_at(const ipss::ScoreMatrix& s, std::size_t j, double lambda) {
    std::size_t count = 0;
    for (const auto& row : s.rows)
        if (row[j] >= lambda) ++count;
    return static_cast<double>(count) / static_cast<double>(s.rows.size());
}

inline std::vector<double> weights(const std::vector<double>& grid, std::size_t k, double delta) {
    std::vector<double> w(k);
    double total = 0.0;
    for (std::size_t i = 0; i < k; ++i) {
        const double hi = grid[i], lo = grid[i + 1];
        w[i] = delta == 1.0 ? std::log(hi) - std::log(lo)
                            : (std::pow(hi, 1.0 - delta) - std::pow(lo, 1.0 - delta)) / (1.0 - delta);
        total += w[i];
    }
    for (double& x : w) x /= total;
    return w;
}

inline double integrand(const ipss::ScoreMatrix& s, double q) {
    const double B = static_cast<double>(s.rows.size()) / 2.0;
    const double p = static_cast<double>(s.p);
    return q * q / (B * B * p) + 3.0 * std::pow(q, 4.0) / (B * std::pow(p, 3.0)) +
           std::pow(q, 6.0) / std::pow(p, 5.0);
}

inline double integral_at(const ipss::ScoreMatrix& s, const std::vector<double>& grid,
                          std::size_t k, double delta) {
    const auto w = weights(grid, k, delta);
    double total = 0.0;
    for (std::size_t i = 0; i < k; ++i)
        total += w[i] * integrand(s, q_at(s, std::sqrt(grid[i] * grid[i + 1])));
    return total;
}

struct Stop {
    std::size_t k_star = 0;
    double integral = 0.0;
};

inline Stop stopping(const ipss::ScoreMatrix& s, const std::vector<double>& grid, double cutoff,
                     double delta) {
    Stop st;
    for (std::size_t k = 1; k + 1 <= grid.size(); ++k) {
        st.k_star = k;
        st.integral = integral_at(s, grid, k, delta);
        if (st.integral >= cutoff) return st;
        if (k + 1 == grid.size()) break;
    }
    return st;
}

inline std::vector<double> efp(const ipss::ScoreMatrix& s, const std::vector<double>& grid,
                               const Stop& st, int power, double delta) {
    const auto w = weights(grid, st.k_star, delta);
    const double cap = static_cast<double>(s.p);
    std::vector<double> out(s.p, cap);
    for (std::size_t j = 0; j < s.p; ++j) {
        double denom = 0.0;
        for (std::size_t i = 0; i < st.k_star; ++i) {
            const double pi = pi_at(s, j, grid[i + 1]);
            if (pi >= 0.5) denom += w[i] * std::pow(2.0 * pi - 1.0, static_cast<double>(power));
        }
        if (denom > 0.0) out[j] = std::min(st.integral / denom, cap);
    }
    return out;
}

// Largest selection passing the FDR estimate, found by scanning candidate
// thresholds directly. The candidates are a dense uniform grid, optionally
// joined by the efp values themselves, since the selection step function
// can jump and leave again between two grid points.
inline std::vector<std::size_t> fdr_selection_dense(const std::vector<double>& efp_scores,
                                                    double alpha, std::size_t grid_points,
                                                    bool include_efp_values = false) {
    double tmax = 0.0;
    for (double v : efp_scores) tmax = std::max(tmax, v);
    std::vector<double> candidates;
    for (std::size_t g = 0; g <= grid_points; ++g)
        candidates.push_back(tmax * static_cast<double>(g) / static_cast<double>(grid_points));
    if (include_efp_values)
        candidates.insert(candidates.end(), efp_scores.begin(), efp_scores.end());
    std::vector<std::size_t> best;
    for (double t : candidates) {
        std::vector<std::size_t> sel;
        for (std::size_t j = 0; j < efp_scores.size(); ++j)
            if (efp_scores[j] <= t) sel.push_back(j);
        if (!sel.empty() && t / static_cast<double>(sel.size()) <= alpha && sel.size() > best.size())
            best = sel;
    }
    return best;
}

// q-value straight from the definition, O(p^2).
inline std::vector<double> q_values_direct(const std::vector<double>& efp_scores) {
    std::vector<double> q(efp_scores.size());
    for (std::size_t j = 0; j < efp_scores.size(); ++j) {
        double best = 1.0;
        for (double t : efp_scores) {
            if (t < efp_scores[j]) continue;
            std::size_t size = 0;
            for (double v : efp_scores)
                if (v <= t) ++size;
            best = std::min(best, t / static_cast<double>(size));
        }
        q[j] = best;
    }
    return q;
}

}  // namespace oracle
