#include "aci/agent.hpp"

#include <algorithm>

#include "aci/errors.hpp"

namespace aci {

std::string_view to_string(Policy p) noexcept {
    return p == Policy::kAci ? "aci" : "baseline";
}

Policy parse_policy(std::string_view text) {
    if (text == "aci") return Policy::kAci;
    if (text == "baseline") return Policy::kBaseline;
    throw ConfigError("unknown policy '" + std::string(text) + "' (expected aci or baseline)");
}

AgentState AgentState::initial(int start_bs) {
    require_batch_size(start_bs, "start batch size");
    AgentState s;
    s.current_bs = start_bs;
    return s;
}

std::vector<Point> regression_points(const KnowledgeBase& kb) {
    std::vector<Point> pts;
    pts.reserve(kb.total_count());
    kb.for_each([&](const BatchObservation& o) { pts.push_back({o.utilization, o.mean_part_delay()}); });
    return pts;
}

namespace {

// Shared perception half of the cycle; returns the trace skeleton.
CycleTrace perceive(AgentState& state, const BatchObservation& obs, const AgentConfig& cfg) {
    if (obs.batch_size != state.current_bs) {
        throw ProtocolError("engine executed bs=" + std::to_string(obs.batch_size) +
                            " but the agent instructed bs=" + std::to_string(state.current_bs));
    }
    CycleTrace trace;
    trace.cycle = state.cycle;
    trace.observed = obs;
    trace.observed.cycle_index = state.cycle;
    trace.slo_ok = slo_fulfilled(obs, cfg.slos);

    if (state.kb.total_count() >= kMinSurpriseHistory) {
        trace.surprise = observation_surprise(obs, state.kb);
    }
    if (trace.surprise) state.log.append(obs.batch_size, *trace.surprise);

    state.kb.record(trace.observed);

    if (state.kb.total_count() >= static_cast<std::size_t>(cfg.regression_degree) + 1) {
        const auto pts = regression_points(state.kb);
        try {
            state.poly = fit_poly(pts, cfg.regression_degree);
        } catch (const DegenerateInputs&) {
            // Too few distinct utilizations so far; keep the previous model.
        }
    }
    return trace;
}

}  // namespace

StepResult step_aci(AgentState state, const BatchObservation& obs, const AgentConfig& cfg) {
    CycleTrace trace = perceive(state, obs, cfg);
    trace.table = build_factor_table(state.kb, cfg.slos, state.log, cfg.lower_edge);
    trace.chosen_bs = select_batch_size(*trace.table, state.current_bs);
    state.current_bs = trace.chosen_bs;
    ++state.cycle;
    return {std::move(state), std::move(trace)};
}

StepResult step_baseline(AgentState state, const BatchObservation& obs, const AgentConfig& cfg) {
    CycleTrace trace = perceive(state, obs, cfg);
    trace.chosen_bs = trace.slo_ok ? std::min(kMaxBatchSize, state.current_bs + 1)
                                   : std::max(kMinBatchSize, state.current_bs - 1);
    state.current_bs = trace.chosen_bs;
    ++state.cycle;
    return {std::move(state), std::move(trace)};
}

}  // namespace aci
