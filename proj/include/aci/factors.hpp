#pragma once

#include <array>
#include <cstddef>
#include <optional>
#include <span>

#include "aci/domain.hpp"

namespace aci {

/// Throughput incentive: bs * 100 / 30, in [40, 100].
[[nodiscard]] double pragmatic_value(int bs);

/// Number of samples recorded for bs that satisfy every SLO.
[[nodiscard]] std::size_t valid_count(const KnowledgeBase& kb, const SloSet& slos, int bs);

/// How an unsampled size without a sampled neighbour below is resolved.
enum class LowerEdge {
    kClamp,                // copy the nearest sampled size above
    kPriorUntilCompliant,  // prior ra = 0 until some batch has met the SLOs, then clamp
};

/// Risk of violating the SLOs at bs, in [0, 100].
///
/// Sampled sizes use 100 - 100 * valid / samples. Unsampled sizes interpolate
/// the fulfillment rate linearly between the nearest sampled sizes below and
/// above; a missing upper neighbour clamps to the nearest sampled value and a
/// missing lower one is resolved by `lower`. Returns nullopt when the
/// knowledge base is empty.
[[nodiscard]] std::optional<double> risk_assigned(const KnowledgeBase& kb, const SloSet& slos,
                                                  int bs, LowerEdge lower = LowerEdge::kClamp);

/// Sum of Gaussian negative log-likelihoods of new_values under a normal fitted
/// to known_values (population std, floored at 1e-6). Returns nullopt when
/// fewer than two known values exist.
[[nodiscard]] std::optional<double> batch_surprise(std::span<const double> new_values,
                                                   std::span<const double> known_values);

/// Surprise of a fresh observation against everything already in kb: the
/// part_delay and distance streams are scored separately and summed.
[[nodiscard]] std::optional<double> observation_surprise(const BatchObservation& obs,
                                                         const KnowledgeBase& kb);

/// Exploration incentive for bs in [0, 100]: median(S_bs) / mean(S) * 100.
/// An unseen size borrows max(S) as its median; an empty log yields 100.
[[nodiscard]] double information_gain(const SurpriseLog& log, int bs);

struct FactorRow {
    int batch_size = 0;
    double pv = 0.0;
    double ra = 0.0;
    double ig = 0.0;
    double cf = 0.0;
    std::size_t samples = 0;
    std::size_t valid = 0;

    friend bool operator==(const FactorRow&, const FactorRow&) = default;
};

class FactorTable {
public:
    using Rows = std::array<FactorRow, kCandidateCount>;

    FactorTable() = default;
    explicit FactorTable(Rows rows) : rows_(rows) {}

    [[nodiscard]] const Rows& rows() const noexcept { return rows_; }
    [[nodiscard]] const FactorRow& row(int bs) const;
    [[nodiscard]] FactorRow& row(int bs);

    friend bool operator==(const FactorTable&, const FactorTable&) = default;

private:
    Rows rows_{};
};

/// Evaluates pv, ra, ig and cf = pv - ra + ig for every bs in [12, 30].
/// An empty knowledge base yields ra = 0 everywhere.
[[nodiscard]] FactorTable build_factor_table(const KnowledgeBase& kb, const SloSet& slos,
                                             const SurpriseLog& log,
                                             LowerEdge lower = LowerEdge::kClamp);

/// Argmax of cf. Ties prefer the smallest |bs - current|, then the smaller bs.
[[nodiscard]] int select_batch_size(const FactorTable& table, int current);

}  // namespace aci
