#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <deque>
#include <istream>
#include <map>
#include <ostream>
#include <string>
#include <vector>

#include "aci/domain.hpp"
#include "aci/execution.hpp"
#include "aci/rng.hpp"

namespace aci {

/// Ground-truth factory engine:
///   utilization = clamp(util_slope * bs + N(0, util_noise_std), 1, 100)
///   part_delay  = max(1, delay_base + delay_quad_coeff * utilization^2 + N(0, delay_noise_std))
///   distance    = max(1, dist_numerator / bs + N(0, dist_noise_std))
///   batch_delay = sum of part delays
struct ScenarioConfig {
    std::uint64_t seed = 1;
    double util_slope = 0.0;
    double util_noise_std = 0.0;
    double delay_base = 0.0;
    double delay_quad_coeff = 0.0;
    double delay_noise_std = 0.0;
    double dist_numerator = 0.0;
    double dist_noise_std = 0.0;
    int regression_degree = 2;
    SloSet slos = SloSet::defaults();

    /// Throws ConfigError when an invariant is broken.
    void validate() const;

    /// Noise-free part delay at a utilization (the relation the agent learns).
    [[nodiscard]] double true_part_delay(double utilization) const noexcept;

    friend bool operator==(const ScenarioConfig&, const ScenarioConfig&) = default;
};

/// The shipped calibrated constants (see `aci calibrate`).
[[nodiscard]] ScenarioConfig calibrate_defaults();

/// Draws one batch. Consumes 2 + 4 * bs uniforms from rng: the utilization
/// deviate first, then (part_delay, distance) deviates part by part.
[[nodiscard]] BatchObservation generate_batch(const ScenarioConfig& cfg, Rng& rng, int bs,
                                              std::size_t cycle = 0);

/// Something that executes a commanded batch size and reports the result.
class ObservationSource {
public:
    virtual ~ObservationSource() = default;
    virtual BatchObservation next(int bs, std::size_t cycle) = 0;
};

/// Simulated engine owning its generator state.
class Simulator final : public ObservationSource {
public:
    explicit Simulator(ScenarioConfig cfg) : cfg_(std::move(cfg)), rng_(cfg_.seed) {}

    BatchObservation next(int bs, std::size_t cycle) override;

    [[nodiscard]] const ScenarioConfig& config() const noexcept { return cfg_; }

private:
    ScenarioConfig cfg_;
    Rng rng_;
};

// ---------------------------------------------------------------------------
// Monte-Carlo violation rates

/// Batches per generator sub-stream. Work is split into (bs, chunk) streams so
/// the serial and OpenMP paths draw exactly the same batches.
inline constexpr std::size_t kMonteCarloChunk = 1024;

struct ViolationRates {
    std::size_t samples_per_bs = 0;
    std::array<std::size_t, kCandidateCount> violations{};

    [[nodiscard]] double rate(int bs) const;
};

/// Empirical P(violation | bs) for every bs in [12, 30].
[[nodiscard]] ViolationRates violation_rates(const ScenarioConfig& cfg, std::size_t samples_per_bs,
                                             std::uint64_t seed,
                                             Execution exec = Execution::kParallel);

/// Brute-force optimum: argmax over bs of pv(bs) - 100 * P(violation | bs).
[[nodiscard]] int oracle_optimum(const ViolationRates& rates);

struct CalibrationCheck {
    std::string name;
    bool passed;
    std::string detail;
};

struct CalibrationReport {
    ViolationRates rates;
    std::vector<CalibrationCheck> checks;

    [[nodiscard]] bool passed() const;
};

inline constexpr int kCalibrationPivot = 21;
inline constexpr double kCalibrationTargetRate = 0.12;
inline constexpr double kCalibrationRateTolerance = 0.05;
inline constexpr double kCalibrationJumpFactor = 3.0;
inline constexpr double kCalibrationFloorRate = 0.01;

/// Checks: (a) non-decreasing rates up to Monte-Carlo noise, (b) P(21) near
/// 0.12, (c) P(22) >= 3 P(21), (d) P(12) <= 0.01.
[[nodiscard]] CalibrationReport evaluate_calibration(const ViolationRates& rates);

// ---------------------------------------------------------------------------
// Replay datasets
//
// CSV with header batch_id,batch_size,utilization,part_index,part_delay,distance,batch_delay
// and one row per part.

inline constexpr const char* kDatasetHeader =
    "batch_id,batch_size,utilization,part_index,part_delay,distance,batch_delay";

struct DatasetBatch {
    std::string batch_id;
    BatchObservation observation;
};

/// Parses and validates a dataset. Throws ParseError naming the offending line.
[[nodiscard]] std::vector<DatasetBatch> parse_dataset(std::istream& in);

void write_dataset(std::ostream& out, const std::vector<DatasetBatch>& batches);

/// Re-emits recorded batches in file order, restricted to the commanded size.
class ReplaySource final : public ObservationSource {
public:
    explicit ReplaySource(std::vector<DatasetBatch> batches);

    /// Throws ReplayExhausted when no unused batch of size bs remains.
    BatchObservation next(int bs, std::size_t cycle) override;

    [[nodiscard]] std::size_t remaining(int bs) const;

private:
    std::map<int, std::deque<BatchObservation>> pending_;
};

}  // namespace aci
