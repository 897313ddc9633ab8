#include "aci/experiment.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "aci/csv.hpp"
#include "aci/errors.hpp"

namespace aci {

namespace {

std::string trim(std::string_view s) {
    const auto b = s.find_first_not_of(" \t");
    if (b == std::string_view::npos) return {};
    const auto e = s.find_last_not_of(" \t");
    return std::string(s.substr(b, e - b + 1));
}

double number_key(const KeyValues& kv, const std::string& key, double fallback) {
    auto it = kv.find(key);
    if (it == kv.end()) return fallback;
    try {
        return csv::parse_double(it->second, 0);
    } catch (const ParseError&) {
        throw ConfigError("key '" + key + "': expected a number, got '" + it->second + "'");
    }
}

long long integer_key(const KeyValues& kv, const std::string& key, long long fallback) {
    auto it = kv.find(key);
    if (it == kv.end()) return fallback;
    try {
        return csv::parse_int(it->second, 0);
    } catch (const ParseError&) {
        throw ConfigError("key '" + key + "': expected an integer, got '" + it->second + "'");
    }
}

void write_file(const std::filesystem::path& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ConfigError("cannot write " + path.string());
    out << content;
}

std::string optional_number(const std::optional<double>& v) {
    return v ? csv::format_double(*v) : std::string();
}

}  // namespace

KeyValues parse_key_values(std::istream& in) {
    KeyValues kv;
    std::string line;
    std::size_t line_no = 0;
    while (csv::read_line(in, line)) {
        ++line_no;
        const auto hash = line.find('#');
        const std::string body = trim(std::string_view(line).substr(0, hash));
        if (body.empty()) continue;
        const auto eq = body.find('=');
        if (eq == std::string::npos) throw ParseError(line_no, "expected key = value");
        std::string key = trim(std::string_view(body).substr(0, eq));
        std::string value = trim(std::string_view(body).substr(eq + 1));
        if (key.empty()) throw ParseError(line_no, "empty key");
        if (!kv.emplace(key, value).second) throw ParseError(line_no, "duplicate key '" + key + "'");
    }
    return kv;
}

ScenarioConfig apply_scenario_keys(ScenarioConfig cfg, const KeyValues& kv) {
    cfg.seed = static_cast<std::uint64_t>(integer_key(kv, "seed", static_cast<long long>(cfg.seed)));
    cfg.util_slope = number_key(kv, "util_slope", cfg.util_slope);
    cfg.util_noise_std = number_key(kv, "util_noise_std", cfg.util_noise_std);
    cfg.delay_base = number_key(kv, "delay_base", cfg.delay_base);
    cfg.delay_quad_coeff = number_key(kv, "delay_quad_coeff", cfg.delay_quad_coeff);
    cfg.delay_noise_std = number_key(kv, "delay_noise_std", cfg.delay_noise_std);
    cfg.dist_numerator = number_key(kv, "dist_numerator", cfg.dist_numerator);
    cfg.dist_noise_std = number_key(kv, "dist_noise_std", cfg.dist_noise_std);
    cfg.regression_degree =
        static_cast<int>(integer_key(kv, "regression_degree", cfg.regression_degree));

    // slo.<variable> = <op> <threshold> replaces the whole default set.
    SloSet slos;
    for (const auto& [key, value] : kv) {
        if (key.rfind("slo.", 0) != 0) continue;
        std::istringstream ss(value);
        std::string op;
        std::string threshold;
        ss >> op >> threshold;
        if (threshold.empty() && op.size() > 2) {
            threshold = op.substr(2);
            op = op.substr(0, 2);
        }
        double t = 0.0;
        try {
            t = csv::parse_double(threshold, 0);
        } catch (const ParseError&) {
            throw ConfigError("key '" + key + "': expected '<op> <threshold>', got '" + value + "'");
        }
        slos.slos.push_back({key.substr(4), parse_comparator(op), t});
    }
    if (!slos.slos.empty()) cfg.slos = std::move(slos);
    cfg.slos.validate();
    return cfg;
}

void ExperimentSpec::validate() const {
    if (cycles < 1) throw ConfigError("cycles must be at least 1");
    if (!valid_batch_size(start_bs)) {
        throw ConfigError("start_bs " + std::to_string(start_bs) + " outside [12, 30]");
    }
    scenario.validate();
    if (replay && !std::filesystem::exists(*replay)) {
        throw ConfigError("replay file " + replay->string() + " does not exist");
    }
}

AgentConfig ExperimentSpec::agent_config() const {
    AgentConfig cfg;
    cfg.slos = scenario.slos;
    cfg.regression_degree = scenario.regression_degree;
    return cfg;
}

ExperimentSpec apply_experiment_keys(ExperimentSpec spec, const KeyValues& kv) {
    if (auto it = kv.find("policy"); it != kv.end()) spec.policy = parse_policy(it->second);
    spec.start_bs = static_cast<int>(integer_key(kv, "start_bs", spec.start_bs));
    const long long cycles = integer_key(kv, "cycles", static_cast<long long>(spec.cycles));
    if (cycles < 1) throw ConfigError("cycles must be at least 1");
    spec.cycles = static_cast<std::size_t>(cycles);
    if (auto it = kv.find("replay"); it != kv.end() && !it->second.empty()) spec.replay = it->second;
    if (auto it = kv.find("out"); it != kv.end()) spec.output_dir = it->second;
    spec.scenario = apply_scenario_keys(spec.scenario, kv);
    return spec;
}

ExperimentResult run_loop(const ExperimentSpec& spec, ObservationSource& source) {
    const AgentConfig cfg = spec.agent_config();
    ExperimentResult result{{}, AgentState::initial(spec.start_bs), std::nullopt};
    result.traces.reserve(spec.cycles);
    for (std::size_t i = 0; i < spec.cycles; ++i) {
        BatchObservation obs;
        try {
            obs = source.next(result.final_state.current_bs, result.final_state.cycle);
        } catch (const ReplayExhausted& e) {
            result.exhausted_at = e.batch_size();
            break;
        }
        StepResult step = spec.policy == Policy::kAci
                              ? step_aci(std::move(result.final_state), obs, cfg)
                              : step_baseline(std::move(result.final_state), obs, cfg);
        result.final_state = std::move(step.state);
        result.traces.push_back(std::move(step.trace));
    }
    return result;
}

ExperimentResult simulate(const ExperimentSpec& spec) {
    Simulator sim(spec.scenario);
    return run_loop(spec, sim);
}

std::vector<TraceRow> trace_rows(const std::vector<CycleTrace>& traces) {
    std::vector<TraceRow> rows;
    rows.reserve(traces.size());
    for (const auto& t : traces) {
        TraceRow r;
        r.cycle = t.cycle;
        r.chosen_bs = t.chosen_bs;
        r.slo_ok = t.slo_ok;
        r.surprise = t.surprise;
        if (t.table) {
            const FactorRow& f = t.table->row(t.chosen_bs);
            r.factors = ChosenFactors{f.pv, f.ra, f.ig, f.cf};
        }
        rows.push_back(r);
    }
    return rows;
}

void write_trace_csv(std::ostream& out, const std::vector<TraceRow>& rows) {
    out << kTraceHeader << '\n';
    for (const auto& r : rows) {
        out << r.cycle << ',' << r.chosen_bs << ',' << (r.slo_ok ? 1 : 0) << ','
            << optional_number(r.surprise);
        if (r.factors) {
            out << ',' << csv::format_double(r.factors->pv) << ',' << csv::format_double(r.factors->ra)
                << ',' << csv::format_double(r.factors->ig) << ',' << csv::format_double(r.factors->cf);
        } else {
            out << ",,,,";
        }
        out << '\n';
    }
}

std::vector<TraceRow> parse_trace_csv(std::istream& in) {
    csv::expect_header(in, kTraceHeader);
    std::vector<TraceRow> rows;
    std::string line;
    std::size_t line_no = 1;
    while (csv::read_line(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        const auto f = csv::split(line);
        if (f.size() != 8) throw ParseError(line_no, "expected 8 fields, got " + std::to_string(f.size()));
        TraceRow r;
        r.cycle = static_cast<std::size_t>(csv::parse_int(f[0], line_no));
        r.chosen_bs = static_cast<int>(csv::parse_int(f[1], line_no));
        r.slo_ok = csv::parse_bool(f[2], line_no);
        if (!f[3].empty()) r.surprise = csv::parse_double(f[3], line_no);
        const bool any = !f[4].empty() || !f[5].empty() || !f[6].empty() || !f[7].empty();
        if (any) {
            r.factors = ChosenFactors{csv::parse_double(f[4], line_no), csv::parse_double(f[5], line_no),
                                      csv::parse_double(f[6], line_no), csv::parse_double(f[7], line_no)};
        }
        rows.push_back(r);
    }
    return rows;
}

void write_factors_csv(std::ostream& out, const FactorTable& table) {
    out << kFactorsHeader << '\n';
    for (const auto& r : table.rows()) {
        out << r.batch_size << ',' << csv::format_double(r.pv) << ',' << csv::format_double(r.ra) << ','
            << csv::format_double(r.ig) << ',' << csv::format_double(r.cf) << ',' << r.samples << ','
            << r.valid << '\n';
    }
}

FactorTable parse_factors_csv(std::istream& in) {
    csv::expect_header(in, kFactorsHeader);
    FactorTable table;
    std::vector<bool> seen(kCandidateCount, false);
    std::string line;
    std::size_t line_no = 1;
    while (csv::read_line(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        const auto f = csv::split(line);
        if (f.size() != 7) throw ParseError(line_no, "expected 7 fields, got " + std::to_string(f.size()));
        const auto bs = static_cast<int>(csv::parse_int(f[0], line_no));
        if (!valid_batch_size(bs)) throw ParseError(line_no, "batch_size outside [12, 30]");
        if (seen[static_cast<std::size_t>(bs - kMinBatchSize)]) {
            throw ParseError(line_no, "duplicate batch_size " + std::to_string(bs));
        }
        seen[static_cast<std::size_t>(bs - kMinBatchSize)] = true;
        FactorRow& r = table.row(bs);
        r.batch_size = bs;
        r.pv = csv::parse_double(f[1], line_no);
        r.ra = csv::parse_double(f[2], line_no);
        r.ig = csv::parse_double(f[3], line_no);
        r.cf = csv::parse_double(f[4], line_no);
        r.samples = static_cast<std::size_t>(csv::parse_int(f[5], line_no));
        r.valid = static_cast<std::size_t>(csv::parse_int(f[6], line_no));
    }
    if (std::find(seen.begin(), seen.end(), false) != seen.end()) {
        throw ParseError(line_no, "factor table must list every batch size in [12, 30]");
    }
    return table;
}

std::size_t stability_index(const std::vector<int>& selections) {
    if (selections.empty()) return 0;
    int lo = selections.back();
    int hi = selections.back();
    std::size_t idx = selections.size() - 1;
    while (idx > 0) {
        const int v = selections[idx - 1];
        if (std::max(hi, v) - std::min(lo, v) > 2) break;
        lo = std::min(lo, v);
        hi = std::max(hi, v);
        --idx;
    }
    return idx;
}

std::size_t selection_changes(const std::vector<int>& selections, std::size_t begin,
                              std::size_t end) {
    std::size_t changes = 0;
    end = std::min(end, selections.size());
    for (std::size_t i = begin + 1; i < end; ++i) {
        if (selections[i] != selections[i - 1]) ++changes;
    }
    return changes;
}

Summary summarize(const std::vector<TraceRow>& rows, Policy policy, int start_bs,
                  int regression_degree) {
    Summary s;
    s.policy = policy;
    s.start_bs = start_bs;
    s.cycles = rows.size();
    s.regression_degree = regression_degree;
    if (rows.empty()) return s;

    std::vector<int> sel;
    sel.reserve(rows.size());
    std::size_t violations = 0;
    for (const auto& r : rows) {
        sel.push_back(r.chosen_bs);
        if (!r.slo_ok) ++violations;
        if (r.surprise) s.total_surprise += *r.surprise;
    }
    s.violation_rate = static_cast<double>(violations) / static_cast<double>(rows.size());

    const std::size_t idx = stability_index(sel);
    s.changes_after_stability = selection_changes(sel, idx, sel.size());
    const std::size_t settled = sel.size() - idx;
    s.oscillating = settled > 1 && static_cast<double>(s.changes_after_stability) >
                                       kOscillationChangeRate * static_cast<double>(settled - 1);
    if (!s.oscillating) {
        s.stability_cycle = rows[idx].cycle;
        std::map<int, std::size_t> freq;
        for (std::size_t i = idx; i < sel.size(); ++i) ++freq[sel[i]];
        int mode = freq.begin()->first;
        for (const auto& [bs, n] : freq) {
            if (n > freq[mode]) mode = bs;
        }
        s.converged_bs = mode;
    }
    return s;
}

void write_summary_json(std::ostream& out, const Summary& s) {
    nlohmann::ordered_json j;
    j["policy"] = std::string(to_string(s.policy));
    j["start_bs"] = s.start_bs;
    j["cycles"] = s.cycles;
    j["converged_bs"] = s.converged_bs ? nlohmann::ordered_json(*s.converged_bs) : nullptr;
    j["stability_cycle"] =
        s.stability_cycle ? nlohmann::ordered_json(*s.stability_cycle) : nullptr;
    j["violation_rate"] = s.violation_rate;
    j["total_surprise"] = s.total_surprise;
    j["regression_degree"] = s.regression_degree;
    j["oscillating"] = s.oscillating;
    j["changes_after_stability"] = s.changes_after_stability;
    out << j.dump(2) << '\n';
}

std::vector<double> holdout_grid() {
    std::vector<double> grid{1.0};
    for (int u = 5; u <= 100; u += 5) grid.push_back(u);
    return grid;
}

void write_regression_json(std::ostream& out, const std::optional<PolyModel>& model,
                           const ScenarioConfig* truth) {
    nlohmann::ordered_json j;
    if (!model) {
        j["degree"] = nullptr;
        j["coefficients"] = nlohmann::ordered_json::array();
        j["training_count"] = 0;
        j["holdout"] = nlohmann::ordered_json::array();
        out << j.dump(2) << '\n';
        return;
    }
    j["degree"] = model->degree;
    j["coefficients"] = model->coefficients;
    j["training_count"] = model->training_count;
    j["utilization_range"] = {model->x_min, model->x_max};
    auto holdout = nlohmann::ordered_json::array();
    for (double u : holdout_grid()) {
        nlohmann::ordered_json p;
        p["utilization"] = u;
        p["part_delay"] = predict(*model, u);
        p["extrapolated"] = model->extrapolates(u);
        if (truth != nullptr) p["truth"] = truth->true_part_delay(u);
        holdout.push_back(std::move(p));
    }
    j["holdout"] = std::move(holdout);
    out << j.dump(2) << '\n';
}

RunOutcome run_experiment(const ExperimentSpec& spec) {
    spec.validate();

    std::optional<ReplaySource> replay;
    if (spec.replay) {
        std::ifstream in(*spec.replay, std::ios::binary);
        if (!in) throw ConfigError("cannot open replay file " + spec.replay->string());
        replay.emplace(parse_dataset(in));
    }
    std::error_code ec;
    std::filesystem::create_directories(spec.output_dir, ec);
    if (ec) throw ConfigError("cannot create output directory " + spec.output_dir.string());

    ExperimentResult result;
    if (replay) {
        result = run_loop(spec, *replay);
    } else {
        Simulator sim(spec.scenario);
        result = run_loop(spec, sim);
    }

    const auto rows = trace_rows(result.traces);
    RunOutcome outcome;
    outcome.summary = summarize(rows, spec.policy, spec.start_bs, spec.scenario.regression_degree);

    std::ostringstream trace;
    write_trace_csv(trace, rows);
    write_file(spec.output_dir / "trace.csv", trace.str());

    const AgentState& st = result.final_state;
    std::ostringstream factors;
    write_factors_csv(factors, build_factor_table(st.kb, spec.scenario.slos, st.log,
                                                  spec.agent_config().lower_edge));
    write_file(spec.output_dir / "factors_final.csv", factors.str());

    std::ostringstream regression;
    write_regression_json(regression, st.poly, spec.replay ? nullptr : &spec.scenario);
    write_file(spec.output_dir / "regression.json", regression.str());

    std::ostringstream summary;
    write_summary_json(summary, outcome.summary);
    write_file(spec.output_dir / "summary.json", summary.str());

    std::vector<DatasetBatch> batches;
    batches.reserve(result.traces.size());
    for (const auto& t : result.traces) {
        batches.push_back({"c" + std::to_string(t.cycle), t.observed});
    }
    std::ostringstream dataset;
    write_dataset(dataset, batches);
    write_file(spec.output_dir / "observations.csv", dataset.str());

    if (result.exhausted_at) {
        outcome.exit_code = kExitReplayExhausted;
        outcome.warning = "replay exhausted for bs=" + std::to_string(*result.exhausted_at) +
                          " after " + std::to_string(result.traces.size()) + " cycles";
    }
    return outcome;
}

std::vector<Summary> run_seed_sweep(const ExperimentSpec& spec, std::uint64_t first_seed,
                                    std::size_t count, Execution exec) {
    spec.validate();
    std::vector<Summary> out(count);
    auto one = [&](std::size_t i) {
        ExperimentSpec local = spec;
        local.replay.reset();
        local.scenario.seed = first_seed + i;
        const auto result = simulate(local);
        out[i] = summarize(trace_rows(result.traces), local.policy, local.start_bs,
                           local.scenario.regression_degree);
    };
    const auto n = static_cast<long>(count);
    if (exec == Execution::kParallel) {
#pragma omp parallel for schedule(dynamic, 1)
        for (long i = 0; i < n; ++i) one(static_cast<std::size_t>(i));
    } else {
        for (long i = 0; i < n; ++i) one(static_cast<std::size_t>(i));
    }
    return out;
}

}  // namespace aci
