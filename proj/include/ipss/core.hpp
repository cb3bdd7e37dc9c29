#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "ipss/backend.hpp"
#include "ipss/dataio.hpp"

namespace ipss {

// B pairs of disjoint row subsets, each of size floor(n/2), drawn by
// shuffling the rows and splitting; with odd n one row per pair is unused.
// Halves are stored sorted ascending.
struct SubsamplePair {
    std::vector<std::size_t> first;
    std::vector<std::size_t> second;
};

struct SubsamplePlan {
    std::vector<SubsamplePair> pairs;
};

SubsamplePlan make_subsample_plan(std::size_t n, std::size_t pairs, std::uint64_t seed);

// Importance scores from the 2B subsample fits: row 2b is the fit on pair
// b's first half, row 2b+1 the second half. All entries are nonnegative.
struct ScoreMatrix {
    std::size_t p = 0;
    std::vector<std::vector<double>> rows;

    std::size_t n_rows() const { return rows.size(); }
    std::size_t n_pairs() const { return rows.size() / 2; }
    double max_score() const;
};

// Runs backend.importance on every half; the per-fit seed comes from (seed,
// pair index, half index), so results do not depend on the worker count.
// backend.importance must be safe to call concurrently.
ScoreMatrix compute_scores(const Dataset& d, const SubsamplePlan& plan, const Backend& backend,
                           std::uint64_t seed, int threads = 0);

// Geometric threshold grid: values[k] = max_score * r^k for k = 0..steps,
// with r chosen so the grid spans eight decades (values[steps] = 1e-8 *
// max_score). Throws unless max_score is positive and finite.
struct LambdaGrid {
    std::vector<double> values;  // strictly decreasing

    std::size_t steps() const { return values.empty() ? 0 : values.size() - 1; }
};

LambdaGrid lambda_grid(double max_score, std::size_t steps = 100);

// pi[k][j]: fraction of the 2B fits whose score for feature j is at or
// above grid value k. Rows are nondecreasing in k since the grid decreases.
struct SelectionCurves {
    std::vector<std::vector<double>> pi;
};

SelectionCurves selection_probabilities(const ScoreMatrix& scores, const LambdaGrid& grid);

// Mean number of features scoring at or above lambda, over the 2B fits.
double q_hat(const ScoreMatrix& scores, double lambda);
std::vector<double> q_hat(const ScoreMatrix& scores, const LambdaGrid& grid);

// Per-threshold bound on expected false positives:
// q^2/(B^2 p) + 3 q^4/(B p^3) + q^6/p^5.
double bound_integrand(double q, std::size_t pairs, std::size_t p);

// Normalized weights of the measure with density proportional to
// lambda^(-exponent) over consecutive segments of a decreasing grid
// lambdas[0] > ... > lambdas[m]; returns m weights summing to 1.
std::vector<double> mu_weights(std::span<const double> lambdas, double measure_exponent);

// Integrates the false-positive bound from the top of the grid downward,
// evaluating the integrand at geometric midpoints sqrt(l_i * l_{i+1}),
// and stops at the first k where the integral reaches the cutoff. If the
// cutoff is never reached, k_star is the last grid index.
struct IntegralStop {
    std::size_t k_star = 0;
    double integral = 0.0;  // realized value at the stopping index
};

IntegralStop find_lambda_min(const ScoreMatrix& scores, const LambdaGrid& grid, double cutoff,
                             double measure_exponent);

// (2x - 1)^power for x >= 1/2, else 0.
double score_transform(double x, int power);

// Expected-false-positive score per feature: the realized integral divided
// by the weighted average of the transformed selection probabilities over
// [lambda_{k_star}, lambda_0], capped at p (also used when the denominator
// vanishes).
std::vector<double> efp_scores(const ScoreMatrix& scores, const LambdaGrid& grid,
                               const SelectionCurves& curves, const IntegralStop& stop,
                               int transform_power, double measure_exponent);

struct IpssConfig {
    BackendKind backend = BackendKind::gb;
    Backend custom_backend;           // consulted only when backend == custom
    std::size_t subsample_pairs = 0;  // 0 = backend default (gb 100, rf 50)
    std::size_t grid_size = 100;      // geometric steps in the threshold grid
    double cutoff = 0.05;             // integral stopping level
    double measure_exponent = 1.0;    // density exponent of the measure
    int transform_power = 3;          // power in the probability transform
    std::uint64_t seed = 0;
    int threads = 0;  // 0 = all available (capped by IPSS_THREADS)

    static IpssConfig gb_defaults();
    static IpssConfig rf_defaults();

    std::size_t resolved_subsample_pairs() const;
    void validate() const;
};

struct IpssResult {
    // Per original feature. Features dropped in preselection get efp equal
    // to the original feature count and q-value 1.
    std::vector<double> efp;
    std::vector<double> q_values;

    std::pair<double, double> lambda_interval{0.0, 0.0};  // (lambda_{k_star}, lambda_0)
    double integral = 0.0;
    std::size_t k_star = 0;

    // Original indices of the features the pipeline scored, ascending.
    // Identity when preselection was inactive. scores and curves are in
    // this reduced coordinate space.
    std::vector<std::size_t> preselected;
    ScoreMatrix scores;
    SelectionCurves curves;

    std::vector<std::string> warnings;
    double runtime_seconds = 0.0;
};

// Full pipeline: preselection (when p > 200), subsample plan, importance
// scores, threshold grid, integral stop, efp scores, q-values.
IpssResult run_ipss(const Dataset& d, const IpssConfig& cfg);

}  // namespace ipss
