#include "aci/simulator.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "aci/csv.hpp"
#include "aci/errors.hpp"
#include "aci/factors.hpp"

namespace aci {

void ScenarioConfig::validate() const {
    if (util_noise_std < 0.0 || delay_noise_std < 0.0 || dist_noise_std < 0.0) {
        throw ConfigError("noise standard deviations must be non-negative");
    }
    if (!(util_slope > 0.0)) throw ConfigError("util_slope must be positive");
    if (!(dist_numerator > 0.0)) throw ConfigError("dist_numerator must be positive");
    if (regression_degree < 1 || regression_degree > 8) {
        throw ConfigError("regression_degree must be in [1, 8]");
    }
    slos.validate();
}

double ScenarioConfig::true_part_delay(double utilization) const noexcept {
    return std::max(1.0, delay_base + delay_quad_coeff * utilization * utilization);
}

ScenarioConfig calibrate_defaults() {
    ScenarioConfig cfg;
    cfg.seed = 1;
    cfg.util_slope = 2.0;
    cfg.util_noise_std = 19.0;
    cfg.delay_base = 1.0;
    cfg.delay_quad_coeff = 0.0056;
    cfg.delay_noise_std = 2.0;
    cfg.dist_numerator = 115.5;
    cfg.dist_noise_std = 0.136;
    cfg.regression_degree = 2;
    cfg.slos = SloSet::defaults();
    return cfg;
}

BatchObservation generate_batch(const ScenarioConfig& cfg, Rng& rng, int bs, std::size_t cycle) {
    require_batch_size(bs, "generate_batch");
    const double util =
        std::clamp(cfg.util_slope * bs + rng.normal(0.0, cfg.util_noise_std), 1.0, 100.0);
    const double mean_delay = cfg.delay_base + cfg.delay_quad_coeff * util * util;
    const double mean_distance = cfg.dist_numerator / bs;

    std::vector<PartRecord> parts;
    parts.reserve(static_cast<std::size_t>(bs));
    for (int i = 0; i < bs; ++i) {
        const double delay = std::max(1.0, mean_delay + rng.normal(0.0, cfg.delay_noise_std));
        const double distance = std::max(1.0, mean_distance + rng.normal(0.0, cfg.dist_noise_std));
        parts.push_back({delay, distance});
    }
    return make_observation(cycle, util, std::move(parts));
}

BatchObservation Simulator::next(int bs, std::size_t cycle) {
    return generate_batch(cfg_, rng_, bs, cycle);
}

double ViolationRates::rate(int bs) const {
    require_batch_size(bs, "ViolationRates::rate");
    if (samples_per_bs == 0) return 0.0;
    return static_cast<double>(violations[static_cast<std::size_t>(bs - kMinBatchSize)]) /
           static_cast<double>(samples_per_bs);
}

namespace {

std::size_t count_violations(const ScenarioConfig& cfg, int bs, std::size_t chunk,
                             std::size_t batches, std::uint64_t seed) {
    const auto stream = static_cast<std::uint64_t>(bs - kMinBatchSize) * 0x100000000ULL + chunk;
    Rng rng(Rng::stream_seed(seed, stream));
    std::size_t violated = 0;
    for (std::size_t i = 0; i < batches; ++i) {
        if (!slo_fulfilled(generate_batch(cfg, rng, bs), cfg.slos)) ++violated;
    }
    return violated;
}

}  // namespace

ViolationRates violation_rates(const ScenarioConfig& cfg, std::size_t samples_per_bs,
                               std::uint64_t seed, Execution exec) {
    ViolationRates out;
    out.samples_per_bs = samples_per_bs;
    const std::size_t chunks = (samples_per_bs + kMonteCarloChunk - 1) / kMonteCarloChunk;
    const auto tasks = static_cast<long>(chunks * kCandidateCount);

    auto run_task = [&](long task) {
        const auto t = static_cast<std::size_t>(task);
        const int bs = kMinBatchSize + static_cast<int>(t / chunks);
        const std::size_t chunk = t % chunks;
        const std::size_t begin = chunk * kMonteCarloChunk;
        const std::size_t batches = std::min(kMonteCarloChunk, samples_per_bs - begin);
        return count_violations(cfg, bs, chunk, batches, seed);
    };

    std::vector<std::size_t> per_task(static_cast<std::size_t>(tasks), 0);
    if (exec == Execution::kParallel) {
#pragma omp parallel for schedule(dynamic, 1)
        for (long task = 0; task < tasks; ++task) per_task[static_cast<std::size_t>(task)] = run_task(task);
    } else {
        for (long task = 0; task < tasks; ++task) per_task[static_cast<std::size_t>(task)] = run_task(task);
    }
    for (std::size_t t = 0; t < per_task.size(); ++t) out.violations[t / chunks] += per_task[t];
    return out;
}

int oracle_optimum(const ViolationRates& rates) {
    int best = kMinBatchSize;
    double best_score = -1e300;
    for (int bs = kMinBatchSize; bs <= kMaxBatchSize; ++bs) {
        const double score = pragmatic_value(bs) - 100.0 * rates.rate(bs);
        if (score > best_score) {
            best_score = score;
            best = bs;
        }
    }
    return best;
}

bool CalibrationReport::passed() const {
    return std::all_of(checks.begin(), checks.end(),
                       [](const CalibrationCheck& c) { return c.passed; });
}

CalibrationReport evaluate_calibration(const ViolationRates& rates) {
    CalibrationReport report{rates, {}};
    const auto n = static_cast<double>(std::max<std::size_t>(rates.samples_per_bs, 1));

    {
        // Three standard errors of the difference of two binomial proportions.
        bool ok = true;
        std::ostringstream detail;
        for (int bs = kMinBatchSize; bs < kMaxBatchSize; ++bs) {
            const double p0 = rates.rate(bs);
            const double p1 = rates.rate(bs + 1);
            const double tol = 3.0 * std::sqrt((p0 * (1 - p0) + p1 * (1 - p1)) / n) + 1.0 / n;
            if (p1 < p0 - tol) {
                ok = false;
                detail << "P(" << bs + 1 << ")=" << p1 << " < P(" << bs << ")=" << p0 << "; ";
            }
        }
        if (ok) detail << "rates non-decreasing over [12, 30]";
        report.checks.push_back({"a_monotone", ok, detail.str()});
    }
    {
        const double p = rates.rate(kCalibrationPivot);
        const bool ok = std::abs(p - kCalibrationTargetRate) <= kCalibrationRateTolerance;
        std::ostringstream detail;
        detail << "P(21)=" << p << ", target 0.12 +/- 0.05";
        report.checks.push_back({"b_pivot_rate", ok, detail.str()});
    }
    {
        const double p = rates.rate(kCalibrationPivot);
        const double q = rates.rate(kCalibrationPivot + 1);
        const bool ok = q >= kCalibrationJumpFactor * p && q > 0.0;
        std::ostringstream detail;
        detail << "P(22)=" << q << " vs 3 * P(21)=" << kCalibrationJumpFactor * p;
        report.checks.push_back({"c_risk_jump", ok, detail.str()});
    }
    {
        const double p = rates.rate(kMinBatchSize);
        const bool ok = p <= kCalibrationFloorRate;
        std::ostringstream detail;
        detail << "P(12)=" << p << ", limit 0.01";
        report.checks.push_back({"d_safe_floor", ok, detail.str()});
    }
    return report;
}

std::vector<DatasetBatch> parse_dataset(std::istream& in) {
    csv::expect_header(in, kDatasetHeader);

    struct Pending {
        DatasetBatch batch;
        std::size_t first_line;
        double batch_delay;
    };
    std::vector<Pending> groups;
    std::map<std::string, std::size_t> index;

    std::string line;
    std::size_t line_no = 1;
    while (csv::read_line(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        const auto f = csv::split(line);
        if (f.size() != 7) {
            throw ParseError(line_no, "expected 7 fields, got " + std::to_string(f.size()));
        }
        const std::string id(f[0]);
        if (id.empty()) throw ParseError(line_no, "empty batch_id");
        const auto bs = csv::parse_int(f[1], line_no);
        const double util = csv::parse_double(f[2], line_no);
        const auto part_index = csv::parse_int(f[3], line_no);
        const double delay = csv::parse_double(f[4], line_no);
        const double distance = csv::parse_double(f[5], line_no);
        const double batch_delay = csv::parse_double(f[6], line_no);

        if (!valid_batch_size(static_cast<int>(bs)) || bs != static_cast<int>(bs)) {
            throw ParseError(line_no, "batch_size " + std::string(f[1]) + " outside [12, 30]");
        }

        auto [it, inserted] = index.try_emplace(id, groups.size());
        if (inserted) {
            Pending p{{id, {}}, line_no, batch_delay};
            p.batch.observation.batch_size = static_cast<int>(bs);
            p.batch.observation.utilization = util;
            groups.push_back(std::move(p));
        }
        Pending& g = groups[it->second];
        BatchObservation& obs = g.batch.observation;
        if (obs.batch_size != bs) throw ParseError(line_no, "inconsistent batch_size in batch " + id);
        if (obs.utilization != util) throw ParseError(line_no, "inconsistent utilization in batch " + id);
        if (g.batch_delay != batch_delay) throw ParseError(line_no, "inconsistent batch_delay in batch " + id);
        if (part_index != static_cast<long long>(obs.parts.size())) {
            throw ParseError(line_no, "part_index " + std::string(f[3]) + " out of sequence");
        }
        obs.parts.push_back({delay, distance});
    }

    std::vector<DatasetBatch> out;
    out.reserve(groups.size());
    for (auto& g : groups) {
        BatchObservation& obs = g.batch.observation;
        obs.batch_delay = g.batch_delay;
        try {
            obs.validate();
        } catch (const DomainError& e) {
            throw ParseError(g.first_line, "batch " + g.batch.batch_id + ": " + e.what());
        }
        out.push_back(std::move(g.batch));
    }
    return out;
}

void write_dataset(std::ostream& out, const std::vector<DatasetBatch>& batches) {
    out << kDatasetHeader << '\n';
    for (const auto& b : batches) {
        const auto& o = b.observation;
        const std::string util = csv::format_double(o.utilization);
        const std::string bd = csv::format_double(o.batch_delay);
        for (std::size_t i = 0; i < o.parts.size(); ++i) {
            out << b.batch_id << ',' << o.batch_size << ',' << util << ',' << i << ','
                << csv::format_double(o.parts[i].part_delay) << ','
                << csv::format_double(o.parts[i].distance) << ',' << bd << '\n';
        }
    }
}

ReplaySource::ReplaySource(std::vector<DatasetBatch> batches) {
    for (auto& b : batches) {
        pending_[b.observation.batch_size].push_back(std::move(b.observation));
    }
}

BatchObservation ReplaySource::next(int bs, std::size_t cycle) {
    auto it = pending_.find(bs);
    if (it == pending_.end() || it->second.empty()) throw ReplayExhausted(bs);
    BatchObservation obs = std::move(it->second.front());
    it->second.pop_front();
    obs.cycle_index = cycle;
    return obs;
}

std::size_t ReplaySource::remaining(int bs) const {
    auto it = pending_.find(bs);
    return it == pending_.end() ? 0 : it->second.size();
}

}  // namespace aci
