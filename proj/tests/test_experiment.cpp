#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "aci/errors.hpp"
#include "aci/experiment.hpp"
#include "helpers.hpp"

using namespace aci;
namespace fs = std::filesystem;

namespace {

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
}

fs::path scratch_dir(const std::string& name) {
    const fs::path p = fs::temp_directory_path() / ("aci_test_" + name);
    fs::remove_all(p);
    return p;
}

KeyValues kv_from(const std::string& text) {
    std::istringstream in(text);
    return parse_key_values(in);
}

}  // namespace

TEST_CASE("key-value configuration") {
    const auto kv = kv_from("# comment\npolicy = baseline\n  cycles=40  # trailing\n\nslo.batch_delay = <= 450\n");
    CHECK(kv.at("policy") == "baseline");
    CHECK(kv.at("cycles") == "40");
    CHECK_THROWS_AS((void)kv_from("policy aci\n"), ParseError);
    CHECK_THROWS_AS((void)kv_from("a = 1\na = 2\n"), ParseError);

    const auto spec = apply_experiment_keys({}, kv);
    CHECK(spec.policy == Policy::kBaseline);
    CHECK(spec.cycles == 40);
    REQUIRE(spec.scenario.slos.slos.size() == 1);
    CHECK(spec.scenario.slos.slos[0].threshold == 450.0);

    CHECK_THROWS_AS((void)apply_experiment_keys({}, kv_from("cycles = 0\n")), ConfigError);
    CHECK_THROWS_AS(apply_experiment_keys({}, kv_from("start_bs = 40\n")).validate(), ConfigError);
    CHECK_THROWS_AS((void)apply_experiment_keys({}, kv_from("util_slope = fast\n")), ConfigError);
    CHECK_THROWS_AS((void)apply_experiment_keys({}, kv_from("slo.noise = <= 1\n")), ConfigError);
    CHECK_THROWS_AS((void)apply_experiment_keys({}, kv_from("policy = random\n")), ConfigError);
}

TEST_CASE("stability index") {
    CHECK(stability_index({}) == 0);
    CHECK(stability_index({30, 29, 28, 21, 21, 22, 20, 21}) == 3);
    CHECK(stability_index({21, 21, 21}) == 0);
    CHECK(stability_index({20, 24, 20, 24}) == 3);
    CHECK(selection_changes({1, 1, 2, 2, 3}, 0, 5) == 2);
    CHECK(selection_changes({1, 1, 2, 2, 3}, 2, 5) == 1);
}

TEST_CASE("summary from trace rows") {
    std::vector<TraceRow> rows;
    std::vector<int> sel{30, 25, 21, 21, 22, 21};
    sel.resize(20, 21);
    for (std::size_t i = 0; i < sel.size(); ++i) {
        TraceRow r;
        r.cycle = i;
        r.chosen_bs = sel[i];
        r.slo_ok = i >= 2;
        if (i >= 2) r.surprise = 1.5;
        rows.push_back(r);
    }
    const auto s = summarize(rows, Policy::kAci, 30, 2);
    CHECK(s.cycles == 20);
    REQUIRE(s.converged_bs);
    CHECK(*s.converged_bs == 21);
    REQUIRE(s.stability_cycle);
    CHECK(*s.stability_cycle == 2);
    CHECK(s.violation_rate == doctest::Approx(2.0 / 20.0));
    CHECK(s.total_surprise == doctest::Approx(1.5 * 18));
    CHECK(s.changes_after_stability == 2);
    CHECK_FALSE(s.oscillating);

    std::vector<TraceRow> flip;
    for (std::size_t i = 0; i < 40; ++i) {
        TraceRow r;
        r.cycle = i;
        r.chosen_bs = i % 2 ? 21 : 22;
        flip.push_back(r);
    }
    const auto o = summarize(flip, Policy::kBaseline, 21, 2);
    CHECK(o.oscillating);
    CHECK_FALSE(o.converged_bs);
    CHECK_FALSE(o.stability_cycle);
}

TEST_CASE("summary json keys") {
    Summary s;
    s.converged_bs = 21;
    s.stability_cycle = 4;
    std::ostringstream out;
    write_summary_json(out, s);
    const auto j = nlohmann::ordered_json::parse(out.str());
    std::vector<std::string> keys;
    for (auto it = j.begin(); it != j.end(); ++it) keys.push_back(it.key());
    const std::vector<std::string> expected{"policy",          "start_bs",      "cycles",
                                            "converged_bs",    "stability_cycle", "violation_rate",
                                            "total_surprise",  "regression_degree"};
    REQUIRE(keys.size() >= expected.size());
    for (std::size_t i = 0; i < expected.size(); ++i) CHECK(keys[i] == expected[i]);
    CHECK(j["policy"] == "aci");
    CHECK(j["converged_bs"] == 21);

    s.converged_bs.reset();
    std::ostringstream again;
    write_summary_json(again, s);
    CHECK(nlohmann::json::parse(again.str())["converged_bs"].is_null());
}

TEST_CASE("trace and factor CSV round trips") {
    ExperimentSpec spec;
    spec.cycles = 40;
    const auto result = simulate(spec);
    const auto rows = trace_rows(result.traces);

    std::ostringstream out;
    write_trace_csv(out, rows);
    CHECK(out.str().rfind(std::string(kTraceHeader) + "\n", 0) == 0);
    std::istringstream in(out.str());
    CHECK(parse_trace_csv(in) == rows);

    const auto& st = result.final_state;
    const auto table = build_factor_table(st.kb, spec.scenario.slos, st.log);
    std::ostringstream fout;
    write_factors_csv(fout, table);
    CHECK(fout.str().rfind(std::string(kFactorsHeader) + "\n", 0) == 0);
    std::istringstream fin(fout.str());
    CHECK(parse_factors_csv(fin) == table);

    std::istringstream missing(std::string(kFactorsHeader) + "\n12,40,0,100,140,0,0\n");
    CHECK_THROWS_AS((void)parse_factors_csv(missing), ParseError);
}

TEST_CASE("baseline rows leave factor columns empty") {
    ExperimentSpec spec;
    spec.policy = Policy::kBaseline;
    spec.cycles = 5;
    const auto rows = trace_rows(simulate(spec).traces);
    std::ostringstream out;
    write_trace_csv(out, rows);
    std::istringstream in(out.str());
    std::string line;
    std::getline(in, line);
    std::getline(in, line);
    CHECK(line.substr(line.size() - 4) == ",,,,");
}

TEST_CASE("run_experiment writes every output and is reproducible") {
    ExperimentSpec spec;
    spec.cycles = 60;
    spec.output_dir = scratch_dir("run_a");
    const auto a = run_experiment(spec);
    CHECK(a.exit_code == kExitOk);
    for (const char* f :
         {"trace.csv", "factors_final.csv", "regression.json", "summary.json", "observations.csv"}) {
        CHECK(fs::exists(spec.output_dir / f));
    }

    ExperimentSpec again = spec;
    again.output_dir = scratch_dir("run_b");
    (void)run_experiment(again);
    CHECK(slurp(spec.output_dir / "trace.csv") == slurp(again.output_dir / "trace.csv"));
    CHECK(slurp(spec.output_dir / "summary.json") == slurp(again.output_dir / "summary.json"));

    // The summary is recomputable from trace.csv alone.
    std::ifstream trace(spec.output_dir / "trace.csv");
    const auto rows = parse_trace_csv(trace);
    CHECK(summarize(rows, spec.policy, spec.start_bs, spec.scenario.regression_degree) == a.summary);

    const auto reg = nlohmann::json::parse(slurp(spec.output_dir / "regression.json"));
    CHECK(reg["degree"] == 2);
    CHECK(reg["coefficients"].size() == 3);
    CHECK(reg["training_count"] == 60);
    CHECK(reg["holdout"].size() == holdout_grid().size());

    // Observations replay into the same trace.
    ExperimentSpec replay = spec;
    replay.replay = spec.output_dir / "observations.csv";
    replay.output_dir = scratch_dir("run_replay");
    const auto r = run_experiment(replay);
    CHECK(r.exit_code == kExitOk);
    CHECK(slurp(replay.output_dir / "trace.csv") == slurp(spec.output_dir / "trace.csv"));
}

TEST_CASE("replay exhaustion flushes partial output") {
    const fs::path dir = scratch_dir("exhaust");
    fs::create_directories(dir);
    {
        std::vector<DatasetBatch> batches{{"a", test::good_batch(30)}, {"b", test::good_batch(30)}};
        std::ofstream out(dir / "data.csv");
        write_dataset(out, batches);
    }
    ExperimentSpec spec;
    spec.replay = dir / "data.csv";
    spec.output_dir = dir / "out";
    spec.cycles = 10;
    const auto r = run_experiment(spec);
    CHECK(r.exit_code == kExitReplayExhausted);
    CHECK(r.warning.find("replay exhausted for bs=30") != std::string::npos);
    CHECK(r.summary.cycles == 2);
    CHECK(fs::exists(spec.output_dir / "trace.csv"));
}

TEST_CASE("configuration errors surface before output") {
    ExperimentSpec spec;
    spec.output_dir = scratch_dir("bad");
    spec.start_bs = 5;
    CHECK_THROWS_AS((void)run_experiment(spec), ConfigError);
    CHECK_FALSE(fs::exists(spec.output_dir));

    spec.start_bs = 30;
    spec.replay = spec.output_dir / "missing.csv";
    CHECK_THROWS_AS((void)run_experiment(spec), ConfigError);
}

TEST_CASE("seed sweep matches individual runs") {
    ExperimentSpec spec;
    spec.cycles = 50;
    const auto par = run_seed_sweep(spec, 3, 4, Execution::kParallel);
    const auto ser = run_seed_sweep(spec, 3, 4, Execution::kSerial);
    CHECK(par == ser);
    ExperimentSpec one = spec;
    one.scenario.seed = 5;
    CHECK(summarize(trace_rows(simulate(one).traces), one.policy, one.start_bs, 2) == par[2]);
}
