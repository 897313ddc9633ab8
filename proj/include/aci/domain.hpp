#pragma once

#include <cstddef>
#include <limits>
#include <map>
#include <string>
#include <string_view>
#include <vector>

namespace aci {

inline constexpr int kMinBatchSize = 12;
inline constexpr int kMaxBatchSize = 30;
inline constexpr int kCandidateCount = kMaxBatchSize - kMinBatchSize + 1;

[[nodiscard]] constexpr bool valid_batch_size(int bs) noexcept {
    return bs >= kMinBatchSize && bs <= kMaxBatchSize;
}

/// Throws DomainError unless bs is in [12, 30].
void require_batch_size(int bs, std::string_view context);

// Variable identifiers used by SLOs, the causal graph and the CSV formats.
namespace var {
inline constexpr std::string_view kBatchSize = "batch_size";
inline constexpr std::string_view kUtilization = "utilization";
inline constexpr std::string_view kDistance = "distance";
inline constexpr std::string_view kPartDelay = "part_delay";
inline constexpr std::string_view kBatchDelay = "batch_delay";
}  // namespace var

struct VariableSpec {
    std::string name;
    std::string unit;
    double lower_bound;
    double upper_bound;  // +inf when unbounded
};

/// The five model variables with their admissible ranges.
[[nodiscard]] const std::vector<VariableSpec>& default_variables();

/// Lookup by name; nullptr when unknown.
[[nodiscard]] const VariableSpec* find_variable(std::string_view name);

struct PartRecord {
    double part_delay;  // ms
    double distance;    // cm

    friend bool operator==(const PartRecord&, const PartRecord&) = default;
};

struct BatchObservation {
    std::size_t cycle_index = 0;
    int batch_size = kMinBatchSize;
    double utilization = 1.0;  // percent
    std::vector<PartRecord> parts;
    double batch_delay = 0.0;  // ms

    /// Throws DomainError when a type invariant is broken.
    void validate() const;

    [[nodiscard]] double mean_part_delay() const;

    friend bool operator==(const BatchObservation&, const BatchObservation&) = default;
};

inline constexpr double kBatchDelayTolerance = 1e-9;

/// Builds an observation whose batch_delay is the sum of the part delays.
[[nodiscard]] BatchObservation make_observation(std::size_t cycle, double utilization,
                                                std::vector<PartRecord> parts);

enum class Comparator { kLessEqual, kGreaterEqual };

struct Slo {
    std::string variable;
    Comparator comparator;
    double threshold;

    [[nodiscard]] bool admits(double value) const noexcept {
        return comparator == Comparator::kLessEqual ? value <= threshold : value >= threshold;
    }

    friend bool operator==(const Slo&, const Slo&) = default;
};

/// Parses "<=" / ">=" (also accepts "≤" / "≥").
[[nodiscard]] Comparator parse_comparator(std::string_view text);
[[nodiscard]] std::string_view to_string(Comparator c) noexcept;

struct SloSet {
    std::vector<Slo> slos;

    /// batch_delay <= 500 ms, distance >= 5 cm.
    [[nodiscard]] static SloSet defaults();

    /// Throws ConfigError when an SLO names an unknown variable.
    void validate() const;

    friend bool operator==(const SloSet&, const SloSet&) = default;
};

/// True iff the observation satisfies every SLO in the set. Per-part variables
/// (part_delay, distance) must hold for every part of the batch.
[[nodiscard]] bool slo_fulfilled(const BatchObservation& obs, const SloSet& slos);

/// Known samples partitioned by batch size.
class KnowledgeBase {
public:
    void record(BatchObservation obs);

    [[nodiscard]] std::size_t total_count() const noexcept { return total_; }
    [[nodiscard]] std::size_t count(int bs) const;
    [[nodiscard]] bool empty() const noexcept { return total_ == 0; }

    /// Samples for one batch size (empty span when never observed).
    [[nodiscard]] const std::vector<BatchObservation>& samples(int bs) const;

    /// Batch sizes that have at least one sample, ascending.
    [[nodiscard]] std::vector<int> sampled_sizes() const;

    /// Visits every observation, ascending batch size then recording order.
    template <typename Fn>
    void for_each(Fn&& fn) const {
        for (const auto& [bs, list] : by_size_) {
            for (const auto& obs : list) fn(obs);
        }
    }

    friend bool operator==(const KnowledgeBase&, const KnowledgeBase&) = default;

private:
    std::map<int, std::vector<BatchObservation>> by_size_;
    std::size_t total_ = 0;
};

/// Functional form of KnowledgeBase::record.
[[nodiscard]] KnowledgeBase record(KnowledgeBase kb, BatchObservation obs);

struct SurpriseEntry {
    int batch_size;
    double surprise;

    friend bool operator==(const SurpriseEntry&, const SurpriseEntry&) = default;
};

class SurpriseLog {
public:
    /// Throws DomainError on a non-finite value.
    void append(int bs, double surprise);

    [[nodiscard]] const std::vector<SurpriseEntry>& entries() const noexcept { return entries_; }
    [[nodiscard]] bool empty() const noexcept { return entries_.empty(); }
    [[nodiscard]] std::size_t size() const noexcept { return entries_.size(); }

    /// S_x: every surprise recorded under one batch size, in order.
    [[nodiscard]] std::vector<double> for_size(int bs) const;

    [[nodiscard]] double mean() const;
    [[nodiscard]] double max() const;

    friend bool operator==(const SurpriseLog&, const SurpriseLog&) = default;

private:
    std::vector<SurpriseEntry> entries_;
};

}  // namespace aci
