#include "ipss/simgen.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <unordered_set>

#include "ipss/rng.hpp"

namespace ipss {

namespace {

constexpr std::size_t kFactors = 10;

// X = F * L + E with F ~ N(0,1), L ~ U(-1,1), E ~ N(0,1): correlated
// columns with a shared low-rank structure.
std::vector<std::vector<double>> synthetic_columns(std::size_t n, std::size_t p, Rng& rng) {
    std::vector<std::vector<double>> factors(n, std::vector<double>(kFactors));
    for (auto& row : factors)
        for (double& v : row) v = rng.normal();
    std::vector<std::vector<double>> loadings(kFactors, std::vector<double>(p));
    for (auto& row : loadings)
        for (double& v : row) v = rng.uniform(-1.0, 1.0);

    std::vector<std::vector<double>> cols(p, std::vector<double>(n));
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < p; ++j) {
            double acc = 0.0;
            for (std::size_t k = 0; k < kFactors; ++k) acc += factors[i][k] * loadings[k][j];
            cols[j][i] = acc + rng.normal();
        }
    }
    return cols;
}

std::vector<std::size_t> sorted_sample(Rng& rng, std::size_t n, std::size_t k) {
    auto out = rng.sample_without_replacement(n, k);
    std::sort(out.begin(), out.end());
    return out;
}

// In-place center/scale to mean 0, variance 1 (divisor n); all-equal input
// becomes all zeros.
void standardize_vector(std::vector<double>& v) {
    const double n = static_cast<double>(v.size());
    double mean = 0.0;
    for (double x : v) mean += x;
    mean /= n;
    double var = 0.0;
    for (double x : v) var += (x - mean) * (x - mean);
    var /= n;
    if (var == 0.0) {
        std::fill(v.begin(), v.end(), 0.0);
        return;
    }
    const double sd = std::sqrt(var);
    for (double& x : v) x = (x - mean) / sd;
}

// Every group must be nonempty; empty ones take a member from the largest
// group (ties to the lower group id, donating the highest-index member).
void repair_groups(std::vector<std::size_t>& group_of, std::size_t n_groups) {
    std::vector<std::size_t> sizes(n_groups, 0);
    for (std::size_t g : group_of) ++sizes[g];
    for (std::size_t g = 0; g < n_groups; ++g) {
        if (sizes[g] > 0) continue;
        const std::size_t donor = static_cast<std::size_t>(
            std::max_element(sizes.begin(), sizes.end()) - sizes.begin());
        for (std::size_t s = group_of.size(); s-- > 0;) {
            if (group_of[s] == donor) {
                group_of[s] = g;
                --sizes[donor];
                ++sizes[g];
                break;
            }
        }
    }
}

}  // namespace

double eval_f_theta(const ThetaParams& theta, double x) {
    if (theta.branch == SignalBranch::shifted_tanh)
        return 0.5 * theta.delta1 * (1.0 + std::tanh(theta.alpha * (theta.delta2 * x - theta.beta)));
    return theta.delta1 * std::exp(-theta.gamma * x * x);
}

void SimConfig::validate() const {
    if (n < 4) throw std::invalid_argument("simulation needs at least 4 samples");
    if (p < 30) throw std::invalid_argument("simulation needs at least 30 features");
}

SimTrial generate_trial(const SimConfig& cfg, const FeatureMatrix* source) {
    cfg.validate();
    Rng rng(cfg.seed);

    FeatureMatrix loaded;
    if (source == nullptr && !cfg.source_csv.empty()) {
        loaded = load_matrix_csv(cfg.source_csv);
        source = &loaded;
    }

    SimTrial trial;
    auto& d = trial.dataset;
    if (source != nullptr) {
        if (source->n() < cfg.n) throw std::invalid_argument("source matrix has too few rows");
        if (source->p() < cfg.p) throw std::invalid_argument("source matrix has too few columns");
        const auto rows = sorted_sample(rng, source->n(), cfg.n);
        const auto cols = sorted_sample(rng, source->p(), cfg.p);
        d.columns.reserve(cfg.p);
        d.feature_names.reserve(cfg.p);
        for (std::size_t j : cols) {
            d.feature_names.push_back(source->names[j]);
            auto& col = d.columns.emplace_back();
            col.reserve(cfg.n);
            for (std::size_t r : rows) col.push_back(source->columns[j][r]);
        }
    } else {
        d.columns = synthetic_columns(cfg.n, cfg.p, rng);
        d.feature_names.reserve(cfg.p);
        for (std::size_t j = 0; j < cfg.p; ++j) d.feature_names.push_back("x" + std::to_string(j + 1));
    }
    for (auto& col : d.columns) standardize_vector(col);

    // Support, groups, and per-group signal parameters.
    const std::size_t p_true = static_cast<std::size_t>(rng.uniform_int(10, 30));
    trial.support = sorted_sample(rng, cfg.p, p_true);
    const std::size_t n_groups = static_cast<std::size_t>(
        rng.uniform_int(static_cast<long>(p_true / 2), static_cast<long>(p_true)));
    trial.group_of.resize(p_true);
    for (auto& g : trial.group_of) g = rng.uniform_index(n_groups);
    repair_groups(trial.group_of, n_groups);

    trial.thetas.resize(n_groups);
    for (auto& theta : trial.thetas) {
        theta.branch = rng.coin() ? SignalBranch::shifted_tanh : SignalBranch::gaussian_bump;
        theta.alpha = rng.uniform(0.5, 1.5);
        theta.beta = rng.uniform(-1.0, 1.0);
        theta.gamma = rng.uniform(1.0, 3.0);
        theta.delta1 = rng.coin() ? 1.0 : -1.0;
        theta.delta2 = rng.coin() ? 1.0 : -1.0;
    }
    trial.snr = rng.uniform(0.5, 2.0);
    trial.u = rng.uniform(1.0, 3.0);

    // eta_i = sum over groups of f_theta applied to the standardized sum of
    // the group's support columns.
    trial.signal.assign(cfg.n, 0.0);
    std::vector<double> xi(cfg.n);
    for (std::size_t g = 0; g < n_groups; ++g) {
        std::fill(xi.begin(), xi.end(), 0.0);
        for (std::size_t s = 0; s < p_true; ++s) {
            if (trial.group_of[s] != g) continue;
            const auto& col = d.columns[trial.support[s]];
            for (std::size_t i = 0; i < cfg.n; ++i) xi[i] += col[i];
        }
        standardize_vector(xi);
        for (std::size_t i = 0; i < cfg.n; ++i) trial.signal[i] += eval_f_theta(trial.thetas[g], xi[i]);
    }

    d.response.kind = cfg.response;
    d.response.values.resize(cfg.n);
    if (cfg.response == ResponseKind::binary) {
        for (std::size_t i = 0; i < cfg.n; ++i) {
            const double prob = 1.0 / (1.0 + std::exp(-trial.u * trial.signal[i]));
            d.response.values[i] = rng.bernoulli(prob) ? 1.0 : 0.0;
        }
    } else {
        double energy = 0.0;
        for (double e : trial.signal) energy += e * e;
        trial.sigma2 = energy / (static_cast<double>(cfg.n) * trial.snr);
        const double sd = std::sqrt(trial.sigma2);
        for (std::size_t i = 0; i < cfg.n; ++i)
            d.response.values[i] = trial.signal[i] + sd * rng.normal();
    }

    d.validate();
    return trial;
}

SelectionMetrics selection_metrics(const std::vector<std::size_t>& selected,
                                   const std::vector<std::size_t>& support) {
    const std::unordered_set<std::size_t> truth(support.begin(), support.end());
    SelectionMetrics m;
    for (std::size_t j : selected) {
        if (truth.count(j))
            ++m.tp;
        else
            ++m.fp;
    }
    m.fn = truth.size() - m.tp;
    if (m.tp + m.fp > 0) m.fdr = static_cast<double>(m.fp) / static_cast<double>(m.tp + m.fp);
    if (!truth.empty()) m.tpr = static_cast<double>(m.tp) / static_cast<double>(truth.size());
    return m;
}

}  // namespace ipss
