#pragma once

#include <cstddef>
#include <optional>
#include <string_view>

#include "aci/domain.hpp"
#include "aci/factors.hpp"
#include "aci/model.hpp"

namespace aci {

enum class Policy { kAci, kBaseline };

[[nodiscard]] std::string_view to_string(Policy p) noexcept;
[[nodiscard]] Policy parse_policy(std::string_view text);

/// Recorded batches required before a new batch is scored for surprise.
inline constexpr std::size_t kMinSurpriseHistory = 2;

struct AgentConfig {
    SloSet slos = SloSet::defaults();
    int regression_degree = 2;
    LowerEdge lower_edge = LowerEdge::kPriorUntilCompliant;
};

struct AgentState {
    KnowledgeBase kb;
    SurpriseLog log;
    int current_bs = kMaxBatchSize;
    std::size_t cycle = 0;
    std::optional<PolyModel> poly;

    /// Fresh state that will instruct `start_bs` for the first batch.
    [[nodiscard]] static AgentState initial(int start_bs);
};

struct CycleTrace {
    std::size_t cycle = 0;
    BatchObservation observed;
    std::optional<double> surprise;
    std::optional<FactorTable> table;  // absent for the baseline policy
    int chosen_bs = kMinBatchSize;
    bool slo_ok = false;
};

struct StepResult {
    AgentState state;
    CycleTrace trace;
};

/// One action-perception cycle: score the observation's surprise against
/// prior knowledge, log it, record the observation, refit the
/// utilization -> part_delay regression, rebuild the factor table and pick
/// the next batch size. Throws ProtocolError when obs.batch_size differs from
/// the instructed size.
[[nodiscard]] StepResult step_aci(AgentState state, const BatchObservation& obs,
                                  const AgentConfig& cfg);

/// Naive reference policy: one size up after a compliant batch, one down after
/// a violation. Perception (surprise, knowledge, regression) matches step_aci.
[[nodiscard]] StepResult step_baseline(AgentState state, const BatchObservation& obs,
                                       const AgentConfig& cfg);

/// (utilization, mean part delay) per recorded batch, ascending batch size.
[[nodiscard]] std::vector<Point> regression_points(const KnowledgeBase& kb);

}  // namespace aci
