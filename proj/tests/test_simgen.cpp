#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <set>
#include <string>
#include <vector>

#include "doctest.h"
#include "ipss/rng.hpp"
#include "ipss/simgen.hpp"

using ipss::FeatureMatrix;
using ipss::Rng;
using ipss::SignalBranch;
using ipss::SimConfig;
using ipss::ThetaParams;

namespace {

FeatureMatrix grid_matrix(std::size_t n, std::size_t p) {
    FeatureMatrix m;
    m.names.resize(p);
    m.columns.assign(p, std::vector<double>(n));
    for (std::size_t j = 0; j < p; ++j) {
        m.names[j] = "c" + std::to_string(j + 1);
        for (std::size_t i = 0; i < n; ++i)
            m.columns[j][i] = 100.0 * static_cast<double>(j) + static_cast<double>(i);
    }
    return m;
}

}  // namespace

TEST_CASE("signal functions match their closed forms") {
    ThetaParams bump;
    bump.branch = SignalBranch::gaussian_bump;
    bump.gamma = 2.0;
    bump.delta1 = -1.0;
    CHECK(ipss::eval_f_theta(bump, 0.0) == -1.0);
    CHECK(ipss::eval_f_theta(bump, 1.0) == -std::exp(-2.0));

    ThetaParams th;
    th.branch = SignalBranch::shifted_tanh;
    th.alpha = 1.0;
    th.beta = 0.0;
    th.delta1 = 1.0;
    th.delta2 = 1.0;
    CHECK(ipss::eval_f_theta(th, 0.0) == 0.5);
    CHECK(ipss::eval_f_theta(th, 100.0) == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(ipss::eval_f_theta(th, -100.0) == doctest::Approx(0.0).epsilon(1e-12));

    // delta2 mirrors the argument, delta1 flips the sign of the output
    ThetaParams mirrored = th;
    mirrored.delta2 = -1.0;
    CHECK(ipss::eval_f_theta(mirrored, 2.0) == ipss::eval_f_theta(th, -2.0));
    ThetaParams flipped = bump;
    flipped.delta1 = 1.0;
    CHECK(ipss::eval_f_theta(flipped, 0.7) == -ipss::eval_f_theta(bump, 0.7));

    // both branches stay inside [-1, 1] for every admissible parameter draw
    Rng rng(77);
    for (int rep = 0; rep < 500; ++rep) {
        ThetaParams t;
        t.branch = rng.coin() ? SignalBranch::shifted_tanh : SignalBranch::gaussian_bump;
        t.alpha = rng.uniform(0.5, 1.5);
        t.beta = rng.uniform(-1.0, 1.0);
        t.gamma = rng.uniform(1.0, 3.0);
        t.delta1 = rng.coin() ? 1.0 : -1.0;
        t.delta2 = rng.coin() ? 1.0 : -1.0;
        const double x = rng.uniform(-5.0, 5.0);
        const double f = ipss::eval_f_theta(t, x);
        CHECK(std::abs(f) <= 1.0);
    }
}

TEST_CASE("generated trials respect every documented parameter range") {
    for (std::uint64_t seed = 0; seed < 100; ++seed) {
        CAPTURE(seed);
        SimConfig cfg;
        cfg.n = 50;
        cfg.p = 60;
        cfg.seed = seed;
        const auto t = ipss::generate_trial(cfg);
        const auto& d = t.dataset;

        REQUIRE(d.n() == 50);
        REQUIRE(d.p() == 60);

        // support: 10 to 30 distinct sorted features
        const std::size_t p_true = t.support.size();
        REQUIRE(p_true >= 10);
        REQUIRE(p_true <= 30);
        REQUIRE(std::is_sorted(t.support.begin(), t.support.end()));
        REQUIRE(std::adjacent_find(t.support.begin(), t.support.end()) == t.support.end());
        REQUIRE(t.support.back() < 60);

        // groups: between floor(p_true/2) and p_true of them, all nonempty
        const std::size_t n_groups = t.thetas.size();
        REQUIRE(n_groups >= p_true / 2);
        REQUIRE(n_groups <= p_true);
        REQUIRE(t.group_of.size() == p_true);
        std::vector<std::size_t> counts(n_groups, 0);
        for (std::size_t g : t.group_of) {
            REQUIRE(g < n_groups);
            ++counts[g];
        }
        for (std::size_t c : counts) REQUIRE(c > 0);

        for (const auto& th : t.thetas) {
            REQUIRE(th.alpha >= 0.5);
            REQUIRE(th.alpha < 1.5);
            REQUIRE(th.beta >= -1.0);
            REQUIRE(th.beta < 1.0);
            REQUIRE(th.gamma >= 1.0);
            REQUIRE(th.gamma < 3.0);
            REQUIRE(std::abs(th.delta1) == 1.0);
            REQUIRE(std::abs(th.delta2) == 1.0);
        }
        REQUIRE(t.snr >= 0.5);
        REQUIRE(t.snr < 2.0);
        REQUIRE(t.u >= 1.0);
        REQUIRE(t.u < 3.0);

        // columns standardized to mean 0, variance 1
        for (const auto& col : d.columns) {
            double mean = 0.0;
            for (double v : col) mean += v;
            mean /= static_cast<double>(col.size());
            double var = 0.0;
            for (double v : col) var += (v - mean) * (v - mean);
            var /= static_cast<double>(col.size());
            REQUIRE(std::abs(mean) < 1e-8);
            REQUIRE(std::abs(var - 1.0) < 1e-8);
        }

        // signal is a sum of n_groups functions bounded by one each
        REQUIRE(t.signal.size() == 50);
        for (double e : t.signal) REQUIRE(std::abs(e) <= static_cast<double>(n_groups) + 1e-12);

        // regression noise variance is exactly sum(eta^2) / (n * snr)
        double energy = 0.0;
        for (double e : t.signal) energy += e * e;
        REQUIRE(t.sigma2 == energy / (50.0 * t.snr));
        REQUIRE(d.response.kind == ipss::ResponseKind::continuous);
    }
}

TEST_CASE("classification trials draw labels through the logistic link") {
    std::size_t ones = 0, zeros = 0;
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        SimConfig cfg;
        cfg.n = 60;
        cfg.p = 40;
        cfg.response = ipss::ResponseKind::binary;
        cfg.seed = 1000 + seed;
        const auto t = ipss::generate_trial(cfg);
        CHECK(t.dataset.response.kind == ipss::ResponseKind::binary);
        CHECK(t.sigma2 == 0.0);
        for (double y : t.dataset.response.values) {
            REQUIRE((y == 0.0 || y == 1.0));
            if (y == 1.0)
                ++ones;
            else
                ++zeros;
        }
    }
    CHECK(ones > 0);
    CHECK(zeros > 0);
}

TEST_CASE("trials are reproducible from the seed") {
    SimConfig cfg;
    cfg.n = 40;
    cfg.p = 35;
    cfg.seed = 9;
    const auto a = ipss::generate_trial(cfg);
    const auto b = ipss::generate_trial(cfg);
    CHECK(a.dataset.columns == b.dataset.columns);
    CHECK(a.dataset.response.values == b.dataset.response.values);
    CHECK(a.support == b.support);
    CHECK(a.sigma2 == b.sigma2);

    cfg.seed = 10;
    const auto c = ipss::generate_trial(cfg);
    CHECK(a.dataset.response.values != c.dataset.response.values);
}

TEST_CASE("a source matrix is subsampled instead of simulated") {
    const auto m = grid_matrix(12, 35);
    SimConfig cfg;
    cfg.n = 8;
    cfg.p = 30;
    cfg.seed = 4;
    const auto t = ipss::generate_trial(cfg, &m);
    REQUIRE(t.dataset.n() == 8);
    REQUIRE(t.dataset.p() == 30);

    // names come from the source, distinct and in source order
    std::set<std::string> source_names(m.names.begin(), m.names.end());
    std::vector<std::size_t> positions;
    for (const auto& name : t.dataset.feature_names) {
        REQUIRE(source_names.count(name) == 1);
        positions.push_back(static_cast<std::size_t>(
            std::find(m.names.begin(), m.names.end(), name) - m.names.begin()));
    }
    CHECK(std::is_sorted(positions.begin(), positions.end()));
    CHECK(std::adjacent_find(positions.begin(), positions.end()) == positions.end());

    const auto again = ipss::generate_trial(cfg, &m);
    CHECK(again.dataset.columns == t.dataset.columns);

    SimConfig too_big = cfg;
    too_big.n = 13;
    CHECK_THROWS_AS(ipss::generate_trial(too_big, &m), std::invalid_argument);
    too_big = cfg;
    too_big.p = 36;
    CHECK_THROWS_AS(ipss::generate_trial(too_big, &m), std::invalid_argument);
}

TEST_CASE("a source csv file works like an in-memory matrix") {
    const auto m = grid_matrix(10, 32);
    const std::string path = "simgen_source_test.csv";
    {
        std::ofstream out(path);
        for (std::size_t j = 0; j < m.p(); ++j) out << (j ? "," : "") << m.names[j];
        out << "\n";
        for (std::size_t i = 0; i < m.n(); ++i) {
            for (std::size_t j = 0; j < m.p(); ++j)
                out << (j ? "," : "") << ipss::format_double(m.columns[j][i]);
            out << "\n";
        }
    }
    SimConfig cfg;
    cfg.n = 6;
    cfg.p = 30;
    cfg.seed = 8;
    cfg.source_csv = path;
    const auto from_file = ipss::generate_trial(cfg);
    cfg.source_csv.clear();
    const auto from_memory = ipss::generate_trial(cfg, &m);
    CHECK(from_file.dataset.columns == from_memory.dataset.columns);
    CHECK(from_file.dataset.feature_names == from_memory.dataset.feature_names);
    std::remove(path.c_str());
}

TEST_CASE("simulation config validation") {
    SimConfig cfg;
    cfg.n = 3;
    CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
    cfg.n = 300;
    cfg.p = 29;
    CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
    cfg.p = 30;
    CHECK_NOTHROW(cfg.validate());
}

TEST_CASE("selection metrics count hits and misses") {
    const std::vector<std::size_t> support = {1, 2, 3};
    const auto m = ipss::selection_metrics({2, 3, 4}, support);
    CHECK(m.tp == 2);
    CHECK(m.fp == 1);
    CHECK(m.fn == 1);
    CHECK(m.fdr == 1.0 / 3.0);
    CHECK(m.tpr == 2.0 / 3.0);

    const auto none = ipss::selection_metrics({}, support);
    CHECK(none.tp == 0);
    CHECK(none.fn == 3);
    CHECK(none.fdr == 0.0);
    CHECK(none.tpr == 0.0);

    const auto junk = ipss::selection_metrics({7, 8}, {});
    CHECK(junk.fp == 2);
    CHECK(junk.fdr == 1.0);
    CHECK(junk.tpr == 0.0);

    const auto perfect = ipss::selection_metrics(support, support);
    CHECK(perfect.fdr == 0.0);
    CHECK(perfect.tpr == 1.0);
}
