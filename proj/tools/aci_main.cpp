// aci: run active-inference batch-size experiments, calibrate the simulated
// engine, and validate replay datasets.

#include <cstdio>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "aci/errors.hpp"
#include "aci/experiment.hpp"
#include "aci/simulator.hpp"

namespace {

aci::KeyValues load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw aci::ConfigError("cannot open config file " + path);
    return aci::parse_key_values(in);
}

struct RunArgs {
    std::string scenario;
    std::string policy;
    int start_bs = 0;
    long long cycles = 0;
    long long seed = -1;
    std::string replay;
    std::string out;
    std::size_t sweep = 0;
};

int cmd_run(const RunArgs& a) {
    aci::ExperimentSpec spec;
    if (!a.scenario.empty()) spec = aci::apply_experiment_keys(spec, load_config(a.scenario));
    if (!a.policy.empty()) spec.policy = aci::parse_policy(a.policy);
    if (a.start_bs != 0) spec.start_bs = a.start_bs;
    if (a.cycles != 0) {
        if (a.cycles < 1) throw aci::ConfigError("cycles must be at least 1");
        spec.cycles = static_cast<std::size_t>(a.cycles);
    }
    if (a.seed >= 0) spec.scenario.seed = static_cast<std::uint64_t>(a.seed);
    if (!a.replay.empty()) spec.replay = a.replay;
    if (!a.out.empty()) spec.output_dir = a.out;

    if (a.sweep > 0) {
        const auto summaries = aci::run_seed_sweep(spec, spec.scenario.seed, a.sweep);
        std::cout << "seed,converged_bs,stability_cycle,violation_rate,oscillating\n";
        for (std::size_t i = 0; i < summaries.size(); ++i) {
            const auto& s = summaries[i];
            std::cout << spec.scenario.seed + i << ','
                      << (s.converged_bs ? std::to_string(*s.converged_bs) : "") << ','
                      << (s.stability_cycle ? std::to_string(*s.stability_cycle) : "") << ','
                      << s.violation_rate << ',' << (s.oscillating ? 1 : 0) << '\n';
        }
        return aci::kExitOk;
    }

    const aci::RunOutcome outcome = aci::run_experiment(spec);
    if (!outcome.warning.empty()) std::cerr << "warning: " << outcome.warning << '\n';
    aci::write_summary_json(std::cout, outcome.summary);
    return outcome.exit_code;
}

struct CalibrateArgs {
    std::string scenario;
    long long samples = 10000;
    long long seed = 7;
    bool serial = false;
};

int cmd_calibrate(const CalibrateArgs& a) {
    if (a.samples < 1000) {
        std::cerr << "error: --samples must be at least 1000\n";
        return aci::kExitConfig;
    }
    aci::ScenarioConfig cfg = aci::calibrate_defaults();
    if (!a.scenario.empty()) cfg = aci::apply_scenario_keys(cfg, load_config(a.scenario));
    cfg.validate();

    const auto rates = aci::violation_rates(
        cfg, static_cast<std::size_t>(a.samples), static_cast<std::uint64_t>(a.seed),
        a.serial ? aci::Execution::kSerial : aci::Execution::kParallel);
    const auto report = aci::evaluate_calibration(rates);

    std::cout << "batch_size,violation_rate,pv_minus_risk\n";
    for (int bs = aci::kMinBatchSize; bs <= aci::kMaxBatchSize; ++bs) {
        std::cout << bs << ',' << std::fixed << std::setprecision(4) << rates.rate(bs) << ','
                  << std::setprecision(2) << bs * 100.0 / 30.0 - 100.0 * rates.rate(bs) << '\n';
    }
    std::cout.unsetf(std::ios::floatfield);
    std::cout << "oracle_optimum," << aci::oracle_optimum(rates) << '\n';
    for (const auto& c : report.checks) {
        std::cout << (c.passed ? "PASS " : "FAIL ") << c.name << ": " << c.detail << '\n';
    }
    return report.passed() ? aci::kExitOk : aci::kExitConfig;
}

int cmd_replay_check(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        std::cerr << "error: cannot open " << path << '\n';
        return aci::kExitConfig;
    }
    const auto batches = aci::parse_dataset(in);
    std::map<int, std::size_t> per_size;
    for (const auto& b : batches) ++per_size[b.observation.batch_size];
    std::cout << "ok: " << batches.size() << " batches\n";
    for (const auto& [bs, n] : per_size) std::cout << "  bs=" << bs << ": " << n << '\n';
    return aci::kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Active-inference batch-size agent for a simulated factory engine"};
    app.require_subcommand(1);

    RunArgs run_args;
    auto* run = app.add_subcommand("run", "Run an aci or baseline experiment");
    run->add_option("--scenario", run_args.scenario, "key = value configuration file");
    run->add_option("--policy", run_args.policy, "aci or baseline");
    run->add_option("--start-bs", run_args.start_bs, "First batch size (12..30)");
    run->add_option("--cycles", run_args.cycles, "Number of action-perception cycles");
    run->add_option("--seed", run_args.seed, "Simulator seed");
    run->add_option("--replay", run_args.replay, "Replay dataset CSV instead of the simulator");
    run->add_option("--out", run_args.out, "Output directory");
    run->add_option("--sweep", run_args.sweep,
                    "Run N consecutive seeds in parallel and print one summary line per seed");

    CalibrateArgs cal_args;
    auto* cal = app.add_subcommand("calibrate", "Monte-Carlo check of the scenario calibration");
    cal->add_option("--scenario", cal_args.scenario, "key = value scenario overrides");
    cal->add_option("--samples", cal_args.samples, "Batches per batch size (>= 1000)");
    cal->add_option("--seed", cal_args.seed, "Monte-Carlo seed");
    cal->add_flag("--serial", cal_args.serial, "Use the serial reference kernel");

    std::string dataset;
    auto* check = app.add_subcommand("replay-check", "Validate a replay dataset");
    check->add_option("dataset", dataset, "Dataset CSV")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : aci::kExitConfig;
    }

    try {
        if (*run) return cmd_run(run_args);
        if (*cal) return cmd_calibrate(cal_args);
        if (*check) return cmd_replay_check(dataset);
    } catch (const aci::ConfigError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return aci::kExitConfig;
    } catch (const aci::Error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return aci::kExitConfig;
    }
    return aci::kExitOk;
}
