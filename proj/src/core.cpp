#include "ipss/core.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <functional>
#include <limits>
#include <numeric>
#include <stdexcept>

#include "ipss/control.hpp"
#include "ipss/parallel.hpp"
#include "ipss/preselect.hpp"
#include "ipss/rng.hpp"

namespace ipss {

namespace {

// Mass of [lo, hi] under the density lambda^(-exponent), unnormalized.
double segment_mass(double hi, double lo, double exponent) {
    if (exponent == 1.0) return std::log(hi / lo);
    const double e = 1.0 - exponent;
    return (std::pow(hi, e) - std::pow(lo, e)) / e;
}

}  // namespace

double ScoreMatrix::max_score() const {
    double best = 0.0;
    for (const auto& row : rows)
        for (double v : row) best = std::max(best, v);
    return best;
}

SubsamplePlan make_subsample_plan(std::size_t n, std::size_t pairs, std::uint64_t seed) {
    if (n < 4) throw std::invalid_argument("make_subsample_plan: need at least 4 samples");
    if (pairs == 0) throw std::invalid_argument("make_subsample_plan: need at least one pair");
    const std::size_t half = n / 2;

    SubsamplePlan plan;
    plan.pairs.resize(pairs);
    std::vector<std::size_t> rows(n);
    std::iota(rows.begin(), rows.end(), std::size_t{0});
    Rng rng(seed);
    for (auto& pr : plan.pairs) {
        rng.shuffle(rows);
        pr.first.assign(rows.begin(), rows.begin() + half);
        pr.second.assign(rows.begin() + half, rows.begin() + 2 * half);
        std::sort(pr.first.begin(), pr.first.end());
        std::sort(pr.second.begin(), pr.second.end());
    }
    return plan;
}

ScoreMatrix compute_scores(const Dataset& d, const SubsamplePlan& plan, const Backend& backend,
                           std::uint64_t seed, int threads) {
    if (plan.pairs.empty()) throw std::invalid_argument("compute_scores: empty subsample plan");
    if (!backend.importance)
        throw std::invalid_argument("compute_scores: backend has no importance function");
    const std::size_t n = d.n();
    for (const auto& pr : plan.pairs) {
        for (const auto* half : {&pr.first, &pr.second}) {
            if (half->size() < 2)
                throw std::invalid_argument("compute_scores: subsample half too small");
            for (std::size_t r : *half)
                if (r >= n) throw std::out_of_range("compute_scores: row index out of range");
        }
    }

    ScoreMatrix scores;
    scores.p = d.p();
    scores.rows.assign(2 * plan.pairs.size(), {});
    parallel_for(scores.rows.size(), threads, [&](std::size_t t) {
        const std::size_t b = t / 2;
        const auto& half = (t % 2 == 0) ? plan.pairs[b].first : plan.pairs[b].second;
        const Dataset sub = d.subset_rows(half);
        std::vector<double> imp = backend.importance(sub, derive_seed(derive_seed(seed, b), t % 2));
        if (imp.size() != scores.p)
            throw std::runtime_error("compute_scores: backend returned wrong length");
        for (double v : imp)
            if (!std::isfinite(v) || v < 0.0)
                throw std::runtime_error("compute_scores: backend returned invalid importance");
        scores.rows[t] = std::move(imp);
    });
    return scores;
}

LambdaGrid lambda_grid(double max_score, std::size_t steps) {
    if (!std::isfinite(max_score) || !(max_score > 0.0))
        throw std::invalid_argument("lambda_grid: max score must be positive and finite");
    if (steps < 1) throw std::invalid_argument("lambda_grid: need at least one step");
    LambdaGrid grid;
    grid.values.resize(steps + 1);
    for (std::size_t k = 0; k <= steps; ++k) {
        grid.values[k] =
            max_score * std::pow(10.0, -8.0 * static_cast<double>(k) / static_cast<double>(steps));
    }
    return grid;
}

SelectionCurves selection_probabilities(const ScoreMatrix& scores, const LambdaGrid& grid) {
    const std::size_t m = scores.n_rows();
    if (m == 0) throw std::invalid_argument("selection_probabilities: empty score matrix");
    if (grid.values.empty()) throw std::invalid_argument("selection_probabilities: empty grid");

    SelectionCurves curves;
    curves.pi.assign(grid.values.size(), std::vector<double>(scores.p, 0.0));
    std::vector<double> col(m);
    for (std::size_t j = 0; j < scores.p; ++j) {
        for (std::size_t b = 0; b < m; ++b) col[b] = scores.rows[b][j];
        std::sort(col.begin(), col.end(), std::greater<>());
        std::size_t cnt = 0;
        for (std::size_t k = 0; k < grid.values.size(); ++k) {
            while (cnt < m && col[cnt] >= grid.values[k]) ++cnt;
            curves.pi[k][j] = static_cast<double>(cnt) / static_cast<double>(m);
        }
    }
    return curves;
}

double q_hat(const ScoreMatrix& scores, double lambda) {
    const std::size_t m = scores.n_rows();
    if (m == 0) throw std::invalid_argument("q_hat: empty score matrix");
    std::size_t cnt = 0;
    for (const auto& row : scores.rows)
        for (double v : row)
            if (v >= lambda) ++cnt;
    return static_cast<double>(cnt) / static_cast<double>(m);
}

std::vector<double> q_hat(const ScoreMatrix& scores, const LambdaGrid& grid) {
    std::vector<double> out(grid.values.size());
    for (std::size_t k = 0; k < grid.values.size(); ++k) out[k] = q_hat(scores, grid.values[k]);
    return out;
}

double bound_integrand(double q, std::size_t pairs, std::size_t p) {
    if (pairs == 0 || p == 0)
        throw std::invalid_argument("bound_integrand: pairs and p must be positive");
    const double B = static_cast<double>(pairs);
    const double pd = static_cast<double>(p);
    const double q2 = q * q;
    const double q4 = q2 * q2;
    return q2 / (B * B * pd) + 3.0 * q4 / (B * pd * pd * pd) +
           q4 * q2 / (pd * pd * pd * pd * pd);
}

std::vector<double> mu_weights(std::span<const double> lambdas, double measure_exponent) {
    if (lambdas.size() < 2) throw std::invalid_argument("mu_weights: need at least two grid values");
    for (std::size_t i = 0; i + 1 < lambdas.size(); ++i)
        if (!(lambdas[i] > lambdas[i + 1]))
            throw std::invalid_argument("mu_weights: grid must be strictly decreasing");
    const double tail = lambdas.back();
    if (!(tail >= 0.0) || (measure_exponent >= 1.0 && tail == 0.0))
        throw std::invalid_argument("mu_weights: grid not positive where the measure needs it");

    std::vector<double> w(lambdas.size() - 1);
    double total = 0.0;
    for (std::size_t i = 0; i + 1 < lambdas.size(); ++i) {
        w[i] = segment_mass(lambdas[i], lambdas[i + 1], measure_exponent);
        total += w[i];
    }
    for (double& v : w) v /= total;
    return w;
}

IntegralStop find_lambda_min(const ScoreMatrix& scores, const LambdaGrid& grid, double cutoff,
                             double measure_exponent) {
    const std::size_t steps = grid.steps();
    if (steps == 0) throw std::invalid_argument("find_lambda_min: grid too small");
    if (!(cutoff > 0.0)) throw std::invalid_argument("find_lambda_min: cutoff must be positive");
    if (scores.n_rows() == 0 || scores.n_rows() % 2 != 0)
        throw std::invalid_argument("find_lambda_min: score matrix must hold pairs of fits");

    std::vector<double> integrand(steps), seg(steps);
    for (std::size_t i = 0; i < steps; ++i) {
        const double mid = std::sqrt(grid.values[i] * grid.values[i + 1]);
        integrand[i] = bound_integrand(q_hat(scores, mid), scores.n_pairs(), scores.p);
        seg[i] = segment_mass(grid.values[i], grid.values[i + 1], measure_exponent);
    }

    IntegralStop stop;
    double num = 0.0, den = 0.0;
    for (std::size_t k = 1; k <= steps; ++k) {
        num += integrand[k - 1] * seg[k - 1];
        den += seg[k - 1];
        stop.k_star = k;
        stop.integral = num / den;
        if (stop.integral >= cutoff) return stop;
    }
    return stop;  // cutoff never reached; stops at the grid's smallest value
}

double score_transform(double x, int power) {
    if (power < 1) throw std::invalid_argument("score_transform: power must be at least 1");
    if (x < 0.5) return 0.0;
    const double base = 2.0 * x - 1.0;
    double out = 1.0;
    for (int i = 0; i < power; ++i) out *= base;
    return out;
}

std::vector<double> efp_scores(const ScoreMatrix& scores, const LambdaGrid& grid,
                               const SelectionCurves& curves, const IntegralStop& stop,
                               int transform_power, double measure_exponent) {
    const std::size_t k = stop.k_star;
    if (k == 0 || k > grid.steps()) throw std::invalid_argument("efp_scores: bad stopping index");
    if (curves.pi.size() != grid.values.size())
        throw std::invalid_argument("efp_scores: curves do not match grid");

    const std::vector<double> w =
        mu_weights(std::span<const double>(grid.values.data(), k + 1), measure_exponent);
    const double cap = static_cast<double>(scores.p);
    std::vector<double> efp(scores.p, cap);
    for (std::size_t j = 0; j < scores.p; ++j) {
        double denom = 0.0;
        for (std::size_t i = 0; i < k; ++i)
            denom += w[i] * score_transform(curves.pi[i + 1][j], transform_power);
        if (denom > 0.0) efp[j] = std::min(stop.integral / denom, cap);
    }
    return efp;
}

IpssConfig IpssConfig::gb_defaults() {
    IpssConfig cfg;
    cfg.backend = BackendKind::gb;
    return cfg;
}

IpssConfig IpssConfig::rf_defaults() {
    IpssConfig cfg;
    cfg.backend = BackendKind::rf;
    return cfg;
}

std::size_t IpssConfig::resolved_subsample_pairs() const {
    if (subsample_pairs > 0) return subsample_pairs;
    if (backend == BackendKind::custom)
        throw std::invalid_argument("subsample_pairs must be set explicitly for custom backends");
    return default_subsample_pairs(backend);
}

void IpssConfig::validate() const {
    if (grid_size < 1) throw std::invalid_argument("grid_size must be at least 1");
    if (!std::isfinite(cutoff) || !(cutoff > 0.0))
        throw std::invalid_argument("cutoff must be positive");
    if (!std::isfinite(measure_exponent) || !(measure_exponent >= 0.0))
        throw std::invalid_argument("measure_exponent must be nonnegative");
    if (transform_power < 1) throw std::invalid_argument("transform_power must be at least 1");
    if (backend == BackendKind::custom && !custom_backend.importance)
        throw std::invalid_argument("custom backend has no importance function");
    resolved_subsample_pairs();
}

IpssResult run_ipss(const Dataset& d, const IpssConfig& cfg) {
    const auto t0 = std::chrono::steady_clock::now();
    cfg.validate();
    d.validate();
    if (d.p() == 0) throw std::invalid_argument("run_ipss: dataset has no features");

    const Backend backend =
        cfg.backend == BackendKind::custom ? cfg.custom_backend : make_backend(cfg.backend);
    const std::size_t p_orig = d.p();
    const double p_cap = static_cast<double>(p_orig);

    IpssResult res;
    PreselectionResult pre = preselect(d, backend, derive_seed(cfg.seed, 0), cfg.threads);
    res.preselected = pre.kept;
    const Dataset reduced = pre.active ? d.subset_columns(pre.kept) : d;

    const SubsamplePlan plan =
        make_subsample_plan(d.n(), cfg.resolved_subsample_pairs(), derive_seed(cfg.seed, 1));
    res.scores = compute_scores(reduced, plan, backend, derive_seed(cfg.seed, 2), cfg.threads);

    const auto done = [&t0](IpssResult& r) {
        r.runtime_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    };

    if (!(res.scores.max_score() > 0.0)) {
        res.efp.assign(p_orig, p_cap);
        res.q_values.assign(p_orig, 1.0);
        res.warnings.push_back("all importance scores are zero; nothing to rank");
        done(res);
        return res;
    }

    const LambdaGrid grid = lambda_grid(res.scores.max_score(), cfg.grid_size);
    res.curves = selection_probabilities(res.scores, grid);
    const IntegralStop stop =
        find_lambda_min(res.scores, grid, cfg.cutoff, cfg.measure_exponent);
    res.k_star = stop.k_star;
    res.integral = stop.integral;
    res.lambda_interval = {grid.values[stop.k_star], grid.values[0]};
    if (stop.integral < cfg.cutoff)
        res.warnings.push_back(
            "integral cutoff not reached on the grid; stopped at the smallest threshold");

    const std::vector<double> efp_reduced =
        efp_scores(res.scores, grid, res.curves, stop, cfg.transform_power, cfg.measure_exponent);

    // Features dropped by preselection keep the worst possible score.
    res.efp.assign(p_orig, p_cap);
    for (std::size_t i = 0; i < res.preselected.size(); ++i)
        res.efp[res.preselected[i]] = efp_reduced[i];
    res.q_values = q_values(res.efp);

    done(res);
    return res;
}

}  // namespace ipss
