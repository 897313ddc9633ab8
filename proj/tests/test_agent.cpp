#include <doctest.h>

#include <random>

#include "aci/agent.hpp"
#include "aci/errors.hpp"
#include "aci/simulator.hpp"
#include "helpers.hpp"

using namespace aci;

TEST_CASE("policy names") {
    CHECK(parse_policy("aci") == Policy::kAci);
    CHECK(parse_policy("baseline") == Policy::kBaseline);
    CHECK(to_string(Policy::kBaseline) == "baseline");
    CHECK_THROWS_AS((void)parse_policy("greedy"), ConfigError);
}

TEST_CASE("first aci cycle uses the cold-start priors") {
    const AgentConfig cfg;
    const auto r = step_aci(AgentState::initial(30), test::good_batch(30), cfg);
    CHECK_FALSE(r.trace.surprise.has_value());
    REQUIRE(r.trace.table.has_value());
    // One compliant sample at 30 means ra = 0 everywhere.
    for (const auto& row : r.trace.table->rows()) {
        CHECK(row.ra == 0.0);
        CHECK(row.ig == 100.0);
    }
    CHECK(r.trace.chosen_bs == 30);
    CHECK(r.state.cycle == 1);
    CHECK(r.state.kb.total_count() == 1);
    CHECK(r.state.log.empty());
}

TEST_CASE("surprise starts once two batches are known") {
    const AgentConfig cfg;
    Simulator sim(calibrate_defaults());
    auto st = AgentState::initial(20);
    for (int i = 0; i < 4; ++i) {
        auto r = step_aci(st, sim.next(st.current_bs, st.cycle), cfg);
        CHECK(r.trace.surprise.has_value() == (i >= static_cast<int>(kMinSurpriseHistory)));
        st = std::move(r.state);
    }
    CHECK(st.log.size() == 2);
}

TEST_CASE("a size that always violates is abandoned") {
    const AgentConfig cfg;
    auto st = AgentState::initial(30);
    for (int i = 0; i < 3; ++i) {
        auto r = step_aci(st, test::bad_batch(st.current_bs), cfg);
        st = std::move(r.state);
        if (i == 0) CHECK(r.trace.chosen_bs < 30);
    }
    CHECK(st.current_bs < 30);
    // With compliant evidence lower down, ra(30) = 100 keeps 30 out.
    auto kb = st.kb;
    kb.record(test::good_batch(12));
    const auto t = build_factor_table(kb, cfg.slos, st.log, cfg.lower_edge);
    CHECK(t.row(30).ra == 100.0);
    CHECK(select_batch_size(t, 30) != 30);
}

TEST_CASE("protocol violation") {
    const AgentConfig cfg;
    CHECK_THROWS_AS((void)step_aci(AgentState::initial(30), test::good_batch(29), cfg),
                    ProtocolError);
    CHECK_THROWS_AS((void)step_baseline(AgentState::initial(30), test::good_batch(29), cfg),
                    ProtocolError);
    CHECK_THROWS_AS((void)AgentState::initial(31), DomainError);
}

TEST_CASE("baseline rule") {
    const AgentConfig cfg;
    auto r = step_baseline(AgentState::initial(21), test::good_batch(21), cfg);
    CHECK(r.trace.chosen_bs == 22);
    CHECK_FALSE(r.trace.table.has_value());
    CHECK(step_baseline(AgentState::initial(21), test::bad_batch(21), cfg).trace.chosen_bs == 20);
    CHECK(step_baseline(AgentState::initial(30), test::good_batch(30), cfg).trace.chosen_bs == 30);
    CHECK(step_baseline(AgentState::initial(12), test::bad_batch(12), cfg).trace.chosen_bs == 12);
}

TEST_CASE("regression refits once enough batches are known") {
    const AgentConfig cfg;
    Simulator sim(calibrate_defaults());
    auto st = AgentState::initial(15);
    for (int i = 0; i < 2; ++i) st = step_aci(st, sim.next(st.current_bs, i), cfg).state;
    CHECK_FALSE(st.poly.has_value());
    st = step_aci(st, sim.next(st.current_bs, 2), cfg).state;
    REQUIRE(st.poly.has_value());
    CHECK(st.poly->degree == 2);
    CHECK(st.poly->training_count == 3);
    CHECK(regression_points(st.kb).size() == 3);
}

TEST_CASE("property: agent invariants on random scenarios") {
    std::mt19937 gen(31);
    for (int trial = 0; trial < 20; ++trial) {
        ScenarioConfig sc = calibrate_defaults();
        sc.seed = gen();
        sc.util_noise_std = std::uniform_real_distribution<double>(0.0, 30.0)(gen);
        sc.dist_noise_std = std::uniform_real_distribution<double>(0.0, 1.0)(gen);
        Simulator sim(sc);
        const AgentConfig cfg;
        const bool aci = trial % 2 == 0;
        auto st = AgentState::initial(12 + static_cast<int>(gen() % 19));
        for (std::size_t i = 0; i < 60; ++i) {
            const auto before = st.kb.total_count();
            const auto obs = sim.next(st.current_bs, i);
            auto r = aci ? step_aci(st, obs, cfg) : step_baseline(st, obs, cfg);
            CHECK(r.state.kb.total_count() == before + 1);
            CHECK(r.state.cycle == i + 1);
            CHECK(valid_batch_size(r.trace.chosen_bs));
            CHECK(r.state.current_bs == r.trace.chosen_bs);
            if (aci) CHECK(r.trace.chosen_bs == select_batch_size(*r.trace.table, st.current_bs));
            st = std::move(r.state);
        }
    }
}
