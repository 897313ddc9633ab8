#include "aci/factors.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <vector>

#include "aci/errors.hpp"
#include "aci/model.hpp"

namespace aci {

namespace {

double fulfillment_rate(const KnowledgeBase& kb, const SloSet& slos, int bs) {
    return 100.0 * static_cast<double>(valid_count(kb, slos, bs)) /
           static_cast<double>(kb.count(bs));
}

double median(std::vector<double> v) {
    std::sort(v.begin(), v.end());
    const std::size_t n = v.size();
    return n % 2 == 1 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

}  // namespace

double pragmatic_value(int bs) {
    require_batch_size(bs, "pragmatic_value");
    return bs * 100.0 / 30.0;
}

std::size_t valid_count(const KnowledgeBase& kb, const SloSet& slos, int bs) {
    const auto& list = kb.samples(bs);
    return static_cast<std::size_t>(std::count_if(
        list.begin(), list.end(), [&](const BatchObservation& o) { return slo_fulfilled(o, slos); }));
}

std::optional<double> risk_assigned(const KnowledgeBase& kb, const SloSet& slos, int bs,
                                    LowerEdge lower) {
    require_batch_size(bs, "risk_assigned");
    if (kb.empty()) return std::nullopt;
    if (kb.count(bs) > 0) return 100.0 - fulfillment_rate(kb, slos, bs);

    std::optional<int> below;
    std::optional<int> above;
    for (int s : kb.sampled_sizes()) {
        if (s < bs) below = s;
        if (s > bs && !above) above = s;
    }

    if (below) {
        const double lo_x = *below;
        const double lo_rate = fulfillment_rate(kb, slos, *below);
        if (!above) return 100.0 - lo_rate;
        const double hi_x = *above;
        const double hi_rate = fulfillment_rate(kb, slos, *above);
        const double rate = lo_rate + (bs - lo_x) * (hi_rate - lo_rate) / (hi_x - lo_x);
        return std::clamp(100.0 - rate, 0.0, 100.0);
    }
    if (lower == LowerEdge::kPriorUntilCompliant) {
        const auto sizes = kb.sampled_sizes();
        const bool any_valid = std::any_of(sizes.begin(), sizes.end(),
                                           [&](int s) { return valid_count(kb, slos, s) > 0; });
        if (!any_valid) return 0.0;
    }
    return 100.0 - fulfillment_rate(kb, slos, *above);
}

std::optional<double> batch_surprise(std::span<const double> new_values,
                                     std::span<const double> known_values) {
    if (known_values.size() < 2) return std::nullopt;
    const GaussianStats stats = gaussian_stats(known_values);
    double total = 0.0;
    for (double v : new_values) total += gaussian_nll(v, stats);
    return total;
}

std::optional<double> observation_surprise(const BatchObservation& obs, const KnowledgeBase& kb) {
    std::vector<double> known_delay;
    std::vector<double> known_distance;
    known_delay.reserve(kb.total_count() * kMaxBatchSize);
    known_distance.reserve(kb.total_count() * kMaxBatchSize);
    kb.for_each([&](const BatchObservation& o) {
        for (const auto& p : o.parts) {
            known_delay.push_back(p.part_delay);
            known_distance.push_back(p.distance);
        }
    });

    std::vector<double> new_delay;
    std::vector<double> new_distance;
    for (const auto& p : obs.parts) {
        new_delay.push_back(p.part_delay);
        new_distance.push_back(p.distance);
    }

    const auto delay = batch_surprise(new_delay, known_delay);
    const auto distance = batch_surprise(new_distance, known_distance);
    if (!delay || !distance) return std::nullopt;
    return *delay + *distance;
}

double information_gain(const SurpriseLog& log, int bs) {
    require_batch_size(bs, "information_gain");
    if (log.empty()) return 100.0;
    const double mean = log.mean();
    const std::vector<double> own = log.for_size(bs);
    const double typical = own.empty() ? log.max() : median(own);
    if (!(mean > 0.0)) {
        // Non-positive average surprise: the ratio loses its meaning, so fall
        // back to the ordering of the numerator.
        return typical >= mean ? 100.0 : 0.0;
    }
    return std::clamp(typical / mean * 100.0, 0.0, 100.0);
}

const FactorRow& FactorTable::row(int bs) const {
    require_batch_size(bs, "FactorTable::row");
    return rows_[static_cast<std::size_t>(bs - kMinBatchSize)];
}

FactorRow& FactorTable::row(int bs) {
    require_batch_size(bs, "FactorTable::row");
    return rows_[static_cast<std::size_t>(bs - kMinBatchSize)];
}

FactorTable build_factor_table(const KnowledgeBase& kb, const SloSet& slos,
                               const SurpriseLog& log, LowerEdge lower) {
    FactorTable::Rows rows{};
    for (int bs = kMinBatchSize; bs <= kMaxBatchSize; ++bs) {
        FactorRow& r = rows[static_cast<std::size_t>(bs - kMinBatchSize)];
        r.batch_size = bs;
        r.pv = pragmatic_value(bs);
        r.ra = risk_assigned(kb, slos, bs, lower).value_or(0.0);
        r.ig = information_gain(log, bs);
        r.cf = r.pv - r.ra + r.ig;
        r.samples = kb.count(bs);
        r.valid = valid_count(kb, slos, bs);
    }
    return FactorTable(rows);
}

int select_batch_size(const FactorTable& table, int current) {
    const FactorRow* best = nullptr;
    for (const auto& r : table.rows()) {
        if (best == nullptr || r.cf > best->cf) {
            best = &r;
            continue;
        }
        if (r.cf == best->cf) {
            const int d_new = std::abs(r.batch_size - current);
            const int d_old = std::abs(best->batch_size - current);
            if (d_new < d_old || (d_new == d_old && r.batch_size < best->batch_size)) best = &r;
        }
    }
    return best->batch_size;
}

}  // namespace aci
