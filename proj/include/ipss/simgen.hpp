#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "ipss/dataio.hpp"

namespace ipss {

// Nonlinear per-group signal: either delta1/2 * (1 + tanh(alpha * (delta2*x
// - beta))) or delta1 * exp(-gamma * x^2), picked by a fair coin. Both stay
// in [-1, 1]. Parameter ranges: alpha in (0.5, 1.5), beta in (-1, 1), gamma
// in (1, 3), delta1 and delta2 in {-1, +1}.
enum class SignalBranch { shifted_tanh, gaussian_bump };

struct ThetaParams {
    SignalBranch branch = SignalBranch::shifted_tanh;
    double alpha = 1.0;
    double beta = 0.0;
    double gamma = 1.0;
    double delta1 = 1.0;
    double delta2 = 1.0;
};

double eval_f_theta(const ThetaParams& theta, double x);

struct SimConfig {
    std::size_t n = 300;
    std::size_t p = 500;
    ResponseKind response = ResponseKind::continuous;
    std::string source_csv;  // empty = synthetic factor-model features
    std::uint64_t seed = 0;

    void validate() const;
};

// One generated trial, with everything needed to score a selection against
// the truth. signal is the noiseless response eta; for classification u
// scales the logistic link and sigma2 stays 0.
struct SimTrial {
    Dataset dataset;
    std::vector<std::size_t> support;   // true feature indices, ascending
    std::vector<std::size_t> group_of;  // group id per support entry
    std::vector<ThetaParams> thetas;    // one per group
    std::vector<double> signal;
    double sigma2 = 0.0;
    double snr = 0.0;
    double u = 0.0;
};

// Draws a trial: features (from the source matrix or a 10-factor synthetic
// model), standardization, a support of 10-30 features split into random
// nonempty groups, per-group signal parameters, then the response with
// noise variance sum(eta^2) / (n * snr) for regression or a Bernoulli draw
// through a logistic link for classification.
SimTrial generate_trial(const SimConfig& cfg, const FeatureMatrix* source = nullptr);

struct SelectionMetrics {
    std::size_t tp = 0;
    std::size_t fp = 0;
    std::size_t fn = 0;
    double fdr = 0.0;  // fp / (tp + fp), 0 when nothing selected
    double tpr = 0.0;  // tp / (tp + fn), 0 when the support is empty
};

SelectionMetrics selection_metrics(const std::vector<std::size_t>& selected,
                                   const std::vector<std::size_t>& support);

}  // namespace ipss
