#pragma once

#include <vector>

#include "aci/domain.hpp"

namespace aci::test {

// A batch of bs identical parts.
inline BatchObservation uniform_batch(int bs, double part_delay, double distance,
                                      double utilization = 50.0) {
    std::vector<PartRecord> parts(static_cast<std::size_t>(bs), PartRecord{part_delay, distance});
    return make_observation(0, utilization, std::move(parts));
}

// Compliant under the default SLOs (batch_delay <= 500, distance >= 5).
inline BatchObservation good_batch(int bs) { return uniform_batch(bs, 400.0 / bs, 6.0); }

// Violates the batch-delay SLO.
inline BatchObservation bad_batch(int bs) { return uniform_batch(bs, 600.0 / bs, 6.0); }

}  // namespace aci::test
