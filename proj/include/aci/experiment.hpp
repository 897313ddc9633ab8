#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <istream>
#include <map>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "aci/agent.hpp"
#include "aci/execution.hpp"
#include "aci/simulator.hpp"

namespace aci {

// ---------------------------------------------------------------------------
// Configuration: flat "key = value" text, '#' starts a comment.

using KeyValues = std::map<std::string, std::string>;

/// Throws ParseError on a line without '=' or a duplicated key.
[[nodiscard]] KeyValues parse_key_values(std::istream& in);

/// Applies scenario keys (seed, util_slope, ..., regression_degree and
/// slo.<variable> = <op> <threshold>) on top of `base`. Unknown keys are
/// ignored here so experiment keys can share the file.
[[nodiscard]] ScenarioConfig apply_scenario_keys(ScenarioConfig base, const KeyValues& kv);

struct ExperimentSpec {
    Policy policy = Policy::kAci;
    int start_bs = kMaxBatchSize;
    std::size_t cycles = 100;
    ScenarioConfig scenario = calibrate_defaults();
    std::optional<std::filesystem::path> replay;  // replay dataset instead of the simulator
    std::filesystem::path output_dir = "out";

    /// Throws ConfigError on a broken invariant.
    void validate() const;

    /// Agent configuration implied by the scenario (SLOs, regression degree).
    [[nodiscard]] AgentConfig agent_config() const;
};

/// Reads experiment keys (policy, start_bs, cycles, replay, out) plus the
/// scenario keys from `kv` on top of `base`.
[[nodiscard]] ExperimentSpec apply_experiment_keys(ExperimentSpec base, const KeyValues& kv);

// ---------------------------------------------------------------------------
// Running

struct ExperimentResult {
    std::vector<CycleTrace> traces;
    AgentState final_state;
    std::optional<int> exhausted_at;  // replay ran out for this batch size
};

/// Runs up to spec.cycles action-perception cycles against `source`.
/// Replay exhaustion stops the loop early and is reported in the result.
[[nodiscard]] ExperimentResult run_loop(const ExperimentSpec& spec, ObservationSource& source);

/// Convenience: simulator source seeded from spec.scenario.seed.
[[nodiscard]] ExperimentResult simulate(const ExperimentSpec& spec);

// ---------------------------------------------------------------------------
// Trace and factor table files

inline constexpr const char* kTraceHeader = "cycle,chosen_bs,slo_ok,surprise,pv,ra,ig,cf";
inline constexpr const char* kFactorsHeader = "batch_size,pv,ra,ig,cf,samples,valid";

struct ChosenFactors {
    double pv = 0.0;
    double ra = 0.0;
    double ig = 0.0;
    double cf = 0.0;

    friend bool operator==(const ChosenFactors&, const ChosenFactors&) = default;
};

struct TraceRow {
    std::size_t cycle = 0;
    int chosen_bs = 0;
    bool slo_ok = false;
    std::optional<double> surprise;
    std::optional<ChosenFactors> factors;  // row of chosen_bs; absent for baseline

    friend bool operator==(const TraceRow&, const TraceRow&) = default;
};

[[nodiscard]] std::vector<TraceRow> trace_rows(const std::vector<CycleTrace>& traces);

void write_trace_csv(std::ostream& out, const std::vector<TraceRow>& rows);
[[nodiscard]] std::vector<TraceRow> parse_trace_csv(std::istream& in);

void write_factors_csv(std::ostream& out, const FactorTable& table);
[[nodiscard]] FactorTable parse_factors_csv(std::istream& in);

// ---------------------------------------------------------------------------
// Summaries

/// First index after which every selection stays within a band of +/- 1
/// around the settled value (max - min <= 2 over the tail).
[[nodiscard]] std::size_t stability_index(const std::vector<int>& selections);

/// Number of consecutive pairs with different selections in [begin, end).
[[nodiscard]] std::size_t selection_changes(const std::vector<int>& selections,
                                            std::size_t begin, std::size_t end);

/// Fraction of settled cycles with a selection change above which a run is
/// reported as oscillating instead of converged.
inline constexpr double kOscillationChangeRate = 0.2;

struct Summary {
    Policy policy = Policy::kAci;
    int start_bs = 0;
    std::size_t cycles = 0;
    std::optional<int> converged_bs;
    std::optional<std::size_t> stability_cycle;
    double violation_rate = 0.0;
    double total_surprise = 0.0;
    int regression_degree = 2;
    bool oscillating = false;
    std::size_t changes_after_stability = 0;

    friend bool operator==(const Summary&, const Summary&) = default;
};

/// Everything except the configuration echo is derived from the trace rows.
[[nodiscard]] Summary summarize(const std::vector<TraceRow>& rows, Policy policy, int start_bs,
                                int regression_degree);

void write_summary_json(std::ostream& out, const Summary& s);

/// Final regression model plus predictions on the holdout utilization grid.
/// `truth`, when given, adds the noise-free ground truth to each grid point.
void write_regression_json(std::ostream& out, const std::optional<PolyModel>& model,
                           const ScenarioConfig* truth);

/// Holdout utilizations: 1, 5, 10, ..., 100.
[[nodiscard]] std::vector<double> holdout_grid();

// ---------------------------------------------------------------------------
// End-to-end

inline constexpr int kExitOk = 0;
inline constexpr int kExitConfig = 1;
inline constexpr int kExitReplayExhausted = 2;

struct RunOutcome {
    int exit_code = kExitOk;
    Summary summary;
    std::string warning;
};

/// Runs the experiment and writes trace.csv, factors_final.csv,
/// regression.json, summary.json and observations.csv into spec.output_dir.
/// Configuration problems throw before anything is written.
[[nodiscard]] RunOutcome run_experiment(const ExperimentSpec& spec);

/// Runs the same spec for seeds first_seed .. first_seed + count - 1 on the
/// simulator, one isolated experiment per seed, without writing files.
[[nodiscard]] std::vector<Summary> run_seed_sweep(const ExperimentSpec& spec,
                                                  std::uint64_t first_seed, std::size_t count,
                                                  Execution exec = Execution::kParallel);

}  // namespace aci
