#include <algorithm>
#include <chrono>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <set>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "ipss/control.hpp"
#include "ipss/core.hpp"
#include "ipss/dataio.hpp"
#include "ipss/rng.hpp"
#include "ipss/simgen.hpp"

using json = nlohmann::ordered_json;

namespace {

constexpr int kSchemaVersion = 1;

struct SelectOpts {
    std::string data;
    std::string response;
    std::string response_file;
    std::string method = "gb";
    double target_efp = -1.0;
    double target_fdr = -1.0;
    bool has_efp = false;
    bool has_fdr = false;
    std::size_t pairs = 0;
    double cutoff = 0.05;
    double delta = 1.0;
    std::size_t grid_size = 100;
    std::uint64_t seed = 0;
    std::string out;
    std::string format = "json";
    int threads = 0;
};

struct SimulateOpts {
    std::size_t n = 300;
    std::size_t p = 500;
    std::string task = "regression";
    std::size_t trials = 1;
    std::uint64_t seed = 0;
    std::string source = "surrogate";
    std::string out_dir;
};

struct BenchmarkOpts {
    std::size_t trials = 10;
    std::size_t n = 300;
    std::size_t p = 500;
    std::string task = "regression";
    std::string method = "gb";
    std::vector<double> target_efp;
    std::vector<double> target_fdr;
    std::uint64_t seed = 0;
    std::string out;
    int threads = 0;
};

int usage_error(const std::string& msg) {
    std::cerr << "error: " << msg << "\n";
    return 2;
}

void write_text(const std::string& path, const std::string& content) {
    if (path.empty()) {
        std::cout << content;
        return;
    }
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open output file: " + path);
    out << content;
    if (!out) throw std::runtime_error("cannot write output file: " + path);
}

ipss::IpssConfig make_config(const std::string& method, std::size_t pairs, double cutoff,
                             double delta, std::size_t grid_size, std::uint64_t seed, int threads) {
    ipss::IpssConfig cfg;
    cfg.backend = method == "rf" ? ipss::BackendKind::rf : ipss::BackendKind::gb;
    cfg.subsample_pairs = pairs;
    cfg.cutoff = cutoff;
    cfg.measure_exponent = delta;
    cfg.grid_size = grid_size;
    cfg.seed = seed;
    cfg.threads = threads;
    cfg.validate();
    return cfg;
}

std::string method_name(const std::string& method) {
    return method == "rf" ? "ipssrf" : "ipssgb";
}

// Per-feature records sorted by efp ascending, ties broken by name.
std::vector<std::size_t> report_order(const ipss::Dataset& d, const std::vector<double>& efp) {
    std::vector<std::size_t> order(efp.size());
    for (std::size_t j = 0; j < efp.size(); ++j) order[j] = j;
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        if (efp[a] != efp[b]) return efp[a] < efp[b];
        return d.feature_names[a] < d.feature_names[b];
    });
    return order;
}

int run_select(const SelectOpts& o) {
    if (o.has_efp == o.has_fdr)
        return usage_error("exactly one of --target-efp and --target-fdr is required");

    ipss::ResponseSpec spec;
    spec.source = o.response_file.empty() ? ipss::ResponseSource::column : ipss::ResponseSource::file;
    spec.value = o.response_file.empty() ? o.response : o.response_file;
    const auto d = ipss::load_csv(o.data, spec);

    const auto cfg =
        make_config(o.method, o.pairs, o.cutoff, o.delta, o.grid_size, o.seed, o.threads);
    const auto res = ipss::run_ipss(d, cfg);
    const auto outcome = o.has_efp ? ipss::select_at_efp(res.efp, o.target_efp)
                                   : ipss::select_at_fdr(res.efp, o.target_fdr);
    const std::set<std::size_t> selected(outcome.selected.begin(), outcome.selected.end());
    const auto order = report_order(d, res.efp);

    if (o.format == "csv") {
        std::string csv = "feature,efp,q_value,selected\n";
        for (std::size_t j : order) {
            csv += d.feature_names[j] + ',' + ipss::format_double(res.efp[j]) + ',' +
                   ipss::format_double(res.q_values[j]) + ',' + (selected.count(j) ? "1" : "0") +
                   '\n';
        }
        write_text(o.out, csv);
        return 0;
    }

    json report;
    report["schema_version"] = kSchemaVersion;
    report["command"] = "select";
    report["method"] = method_name(o.method);
    json config;
    config["data"] = o.data;
    config["response"] = o.response_file.empty() ? o.response : o.response_file;
    config["n"] = d.n();
    config["p"] = d.p();
    config["dropped_rows"] = d.dropped_rows;
    config["subsample_pairs"] = cfg.resolved_subsample_pairs();
    config["grid_size"] = cfg.grid_size;
    config["cutoff"] = cfg.cutoff;
    config["delta"] = cfg.measure_exponent;
    config["seed"] = cfg.seed;
    config["target_kind"] = o.has_efp ? "efp" : "fdr";
    config["target_value"] = o.has_efp ? o.target_efp : o.target_fdr;
    report["config"] = std::move(config);
    json features = json::array();
    for (std::size_t j : order) {
        json rec;
        rec["name"] = d.feature_names[j];
        rec["efp"] = res.efp[j];
        rec["q_value"] = res.q_values[j];
        rec["selected"] = selected.count(j) > 0;
        features.push_back(std::move(rec));
    }
    report["features"] = std::move(features);
    report["selected_count"] = outcome.selected.size();
    report["selection_threshold"] = outcome.threshold;
    report["fdr_estimate"] = outcome.fdr_estimate;
    report["lambda_interval"] = {res.lambda_interval.first, res.lambda_interval.second};
    report["integral_value"] = res.integral;
    report["runtime_seconds"] = res.runtime_seconds;
    report["warnings"] = res.warnings;
    write_text(o.out, report.dump(2) + "\n");
    return 0;
}

json trial_sidecar(const ipss::SimTrial& trial, std::size_t index, std::uint64_t seed,
                   const std::string& task) {
    json side;
    side["schema_version"] = kSchemaVersion;
    side["command"] = "simulate";
    side["trial"] = index;
    side["seed"] = seed;
    side["task"] = task;
    side["n"] = trial.dataset.n();
    side["p"] = trial.dataset.p();
    side["support"] = trial.support;
    json names = json::array();
    for (std::size_t j : trial.support) names.push_back(trial.dataset.feature_names[j]);
    side["support_names"] = std::move(names);
    // groups as lists of support-member feature indices
    json groups = json::array();
    for (std::size_t g = 0; g < trial.thetas.size(); ++g) {
        json members = json::array();
        for (std::size_t s = 0; s < trial.group_of.size(); ++s)
            if (trial.group_of[s] == g) members.push_back(trial.support[s]);
        groups.push_back(std::move(members));
    }
    side["groups"] = std::move(groups);
    json thetas = json::array();
    for (const auto& th : trial.thetas) {
        json t;
        t["branch"] = th.branch == ipss::SignalBranch::shifted_tanh ? "shifted_tanh" : "gaussian_bump";
        t["alpha"] = th.alpha;
        t["beta"] = th.beta;
        t["gamma"] = th.gamma;
        t["delta1"] = th.delta1;
        t["delta2"] = th.delta2;
        thetas.push_back(std::move(t));
    }
    side["signal_params"] = std::move(thetas);
    side["snr"] = trial.snr;
    side["sigma2"] = trial.sigma2;
    side["u"] = trial.u;
    return side;
}

int run_simulate(const SimulateOpts& o) {
    if (o.p < 30) return usage_error("p_true range exceeds p: need at least 30 features");
    if (o.n < 4) return usage_error("need at least 4 samples");
    if (o.trials < 1) return usage_error("need at least one trial");
    if (o.out_dir.empty()) return usage_error("--out-dir is required");

    ipss::FeatureMatrix source;
    const bool surrogate = o.source == "surrogate";
    if (!surrogate) source = ipss::load_matrix_csv(o.source);

    std::filesystem::create_directories(o.out_dir);
    for (std::size_t i = 0; i < o.trials; ++i) {
        ipss::SimConfig cfg;
        cfg.n = o.n;
        cfg.p = o.p;
        cfg.response = o.task == "classification" ? ipss::ResponseKind::binary
                                                  : ipss::ResponseKind::continuous;
        cfg.seed = ipss::derive_seed(o.seed, i);
        const auto trial = ipss::generate_trial(cfg, surrogate ? nullptr : &source);

        const auto base = std::filesystem::path(o.out_dir) / ("trial_" + std::to_string(i));
        ipss::write_csv(trial.dataset, base.string() + ".csv");
        write_text(base.string() + ".json",
                   trial_sidecar(trial, i, cfg.seed, o.task).dump(2) + "\n");
    }
    return 0;
}

int run_benchmark(const BenchmarkOpts& o) {
    if (o.p < 30) return usage_error("p_true range exceeds p: need at least 30 features");
    if (o.n < 4) return usage_error("need at least 4 samples");
    if (o.trials < 1) return usage_error("need at least one trial");
    if (o.target_efp.empty() && o.target_fdr.empty())
        return usage_error("need at least one --target-efp or --target-fdr value");

    struct Target {
        std::string kind;
        double value;
    };
    std::vector<Target> targets;
    for (double t : o.target_efp) targets.push_back({"efp", t});
    for (double a : o.target_fdr) targets.push_back({"fdr", a});

    struct Sums {
        double fp = 0.0, tp = 0.0, fdr = 0.0, tpr = 0.0;
    };
    std::vector<Sums> sums(targets.size());
    json trial_records = json::array();
    const auto t0 = std::chrono::steady_clock::now();

    for (std::size_t i = 0; i < o.trials; ++i) {
        ipss::SimConfig sim;
        sim.n = o.n;
        sim.p = o.p;
        sim.response = o.task == "classification" ? ipss::ResponseKind::binary
                                                  : ipss::ResponseKind::continuous;
        sim.seed = ipss::derive_seed(o.seed, i);
        const auto trial = ipss::generate_trial(sim);

        const auto cfg = make_config(o.method, 0, 0.05, 1.0, 100, sim.seed, o.threads);
        const auto res = ipss::run_ipss(trial.dataset, cfg);

        json rec;
        rec["trial"] = i;
        rec["seed"] = sim.seed;
        rec["support_size"] = trial.support.size();
        json per_target = json::array();
        for (std::size_t t = 0; t < targets.size(); ++t) {
            const auto outcome = targets[t].kind == "efp"
                                     ? ipss::select_at_efp(res.efp, targets[t].value)
                                     : ipss::select_at_fdr(res.efp, targets[t].value);
            const auto m = ipss::selection_metrics(outcome.selected, trial.support);
            sums[t].fp += static_cast<double>(m.fp);
            sums[t].tp += static_cast<double>(m.tp);
            sums[t].fdr += m.fdr;
            sums[t].tpr += m.tpr;
            json tr;
            tr["target_kind"] = targets[t].kind;
            tr["target_value"] = targets[t].value;
            tr["selected"] = outcome.selected.size();
            tr["tp"] = m.tp;
            tr["fp"] = m.fp;
            tr["fdr"] = m.fdr;
            tr["tpr"] = m.tpr;
            per_target.push_back(std::move(tr));
        }
        rec["targets"] = std::move(per_target);
        rec["runtime_seconds"] = res.runtime_seconds;
        trial_records.push_back(std::move(rec));
    }

    const double nt = static_cast<double>(o.trials);
    std::string csv = "target_kind,target_value,mean_fp,mean_tp,mean_fdr,mean_tpr,trials\n";
    json rows = json::array();
    for (std::size_t t = 0; t < targets.size(); ++t) {
        csv += targets[t].kind + ',' + ipss::format_double(targets[t].value) + ',' +
               ipss::format_double(sums[t].fp / nt) + ',' + ipss::format_double(sums[t].tp / nt) +
               ',' + ipss::format_double(sums[t].fdr / nt) + ',' +
               ipss::format_double(sums[t].tpr / nt) + ',' + std::to_string(o.trials) + '\n';
        json row;
        row["target_kind"] = targets[t].kind;
        row["target_value"] = targets[t].value;
        row["mean_fp"] = sums[t].fp / nt;
        row["mean_tp"] = sums[t].tp / nt;
        row["mean_fdr"] = sums[t].fdr / nt;
        row["mean_tpr"] = sums[t].tpr / nt;
        row["trials"] = o.trials;
        rows.push_back(std::move(row));
    }
    write_text(o.out, csv);

    // JSON summary with per-trial records next to the CSV
    if (!o.out.empty()) {
        const double elapsed =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        json summary;
        summary["schema_version"] = kSchemaVersion;
        summary["command"] = "benchmark";
        json config;
        config["trials"] = o.trials;
        config["n"] = o.n;
        config["p"] = o.p;
        config["task"] = o.task;
        config["method"] = method_name(o.method);
        config["seed"] = o.seed;
        summary["config"] = std::move(config);
        summary["results"] = std::move(rows);
        summary["trials"] = std::move(trial_records);
        summary["total_runtime_seconds"] = elapsed;
        const auto json_path = std::filesystem::path(o.out).replace_extension("json");
        write_text(json_path.string(), summary.dump(2) + "\n");
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"integrated path stability selection"};
    app.require_subcommand(1);

    SelectOpts sel;
    auto* select = app.add_subcommand("select", "score features and select at a target");
    select->add_option("--data", sel.data, "CSV with a header row, one sample per row")->required();
    auto* resp = select->add_option("--response", sel.response, "response column name");
    auto* resp_file =
        select->add_option("--response-file", sel.response_file, "one-column response file");
    resp->excludes(resp_file);
    auto* tefp = select->add_option("--target-efp", sel.target_efp,
                                    "select features with efp at or below this count");
    auto* tfdr = select->add_option("--target-fdr", sel.target_fdr,
                                    "largest selection with estimated FDR at or below this level");
    select->add_option("--method", sel.method, "importance backend")
        ->check(CLI::IsMember({"gb", "rf"}));
    select->add_option("--B", sel.pairs, "subsample pairs (default: gb 100, rf 50)");
    select->add_option("--cutoff", sel.cutoff, "integral stopping level");
    select->add_option("--delta", sel.delta, "measure density exponent");
    select->add_option("--grid-size", sel.grid_size, "geometric grid steps");
    select->add_option("--seed", sel.seed, "master seed");
    select->add_option("--out", sel.out, "output file (default: stdout)");
    select->add_option("--format", sel.format, "report format")
        ->check(CLI::IsMember({"json", "csv"}));
    select->add_option("--threads", sel.threads, "worker cap, 0 = all");

    SimulateOpts sim;
    auto* simulate = app.add_subcommand("simulate", "generate benchmark trials");
    simulate->add_option("--n", sim.n, "samples per trial");
    simulate->add_option("--p", sim.p, "features per trial");
    simulate->add_option("--task", sim.task, "response type")
        ->check(CLI::IsMember({"regression", "classification"}));
    simulate->add_option("--trials", sim.trials, "number of trials");
    simulate->add_option("--seed", sim.seed, "master seed");
    simulate->add_option("--source", sim.source, "feature source: surrogate or a CSV path");
    simulate->add_option("--out-dir", sim.out_dir, "directory for trial files")->required();

    BenchmarkOpts bench;
    auto* benchmark = app.add_subcommand("benchmark", "error-control benchmark on generated trials");
    benchmark->add_option("--trials", bench.trials, "number of trials");
    benchmark->add_option("--n", bench.n, "samples per trial");
    benchmark->add_option("--p", bench.p, "features per trial");
    benchmark->add_option("--task", bench.task, "response type")
        ->check(CLI::IsMember({"regression", "classification"}));
    benchmark->add_option("--method", bench.method, "importance backend")
        ->check(CLI::IsMember({"gb", "rf"}));
    benchmark->add_option("--target-efp", bench.target_efp, "efp targets, one summary row each");
    benchmark->add_option("--target-fdr", bench.target_fdr, "fdr targets, one summary row each");
    benchmark->add_option("--seed", bench.seed, "master seed");
    benchmark->add_option("--out", bench.out,
                          "summary CSV path; a .json summary lands next to it (default: stdout)");
    benchmark->add_option("--threads", bench.threads, "worker cap, 0 = all");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    }
    sel.has_efp = tefp->count() > 0;
    sel.has_fdr = tfdr->count() > 0;
    if (select->parsed() && sel.response.empty() && sel.response_file.empty())
        return usage_error("one of --response and --response-file is required");

    try {
        if (select->parsed()) return run_select(sel);
        if (simulate->parsed()) return run_simulate(sim);
        return run_benchmark(bench);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}
