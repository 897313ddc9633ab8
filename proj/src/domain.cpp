#include "aci/domain.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "aci/errors.hpp"

namespace aci {

void require_batch_size(int bs, std::string_view context) {
    if (!valid_batch_size(bs)) {
        throw DomainError(std::string(context) + ": batch size " + std::to_string(bs) +
                          " outside [12, 30]");
    }
}

const std::vector<VariableSpec>& default_variables() {
    static const std::vector<VariableSpec> specs = [] {
        constexpr double inf = std::numeric_limits<double>::infinity();
        return std::vector<VariableSpec>{
            {std::string(var::kBatchSize), "count", 12.0, 30.0},
            {std::string(var::kUtilization), "%", 1.0, 100.0},
            {std::string(var::kDistance), "cm", 1.0, inf},
            {std::string(var::kPartDelay), "ms", 1.0, inf},
            {std::string(var::kBatchDelay), "ms", 1.0, inf},
        };
    }();
    return specs;
}

const VariableSpec* find_variable(std::string_view name) {
    const auto& specs = default_variables();
    auto it = std::find_if(specs.begin(), specs.end(),
                           [&](const VariableSpec& s) { return s.name == name; });
    return it == specs.end() ? nullptr : &*it;
}

void BatchObservation::validate() const {
    require_batch_size(batch_size, "observation");
    if (parts.size() != static_cast<std::size_t>(batch_size)) {
        throw DomainError("observation has " + std::to_string(parts.size()) +
                          " parts but batch size " + std::to_string(batch_size));
    }
    if (!(utilization >= 1.0 && utilization <= 100.0)) {
        throw DomainError("utilization " + std::to_string(utilization) + " outside [1, 100]");
    }
    double sum = 0.0;
    for (const auto& p : parts) {
        if (!(p.part_delay >= 1.0) || !(p.distance >= 1.0)) {
            throw DomainError("part record below lower bound 1");
        }
        sum += p.part_delay;
    }
    if (!(std::abs(sum - batch_delay) <= kBatchDelayTolerance)) {
        throw DomainError("batch_delay does not equal the sum of part delays");
    }
}

double BatchObservation::mean_part_delay() const {
    if (parts.empty()) return 0.0;
    double sum = 0.0;
    for (const auto& p : parts) sum += p.part_delay;
    return sum / static_cast<double>(parts.size());
}

BatchObservation make_observation(std::size_t cycle, double utilization,
                                  std::vector<PartRecord> parts) {
    BatchObservation obs;
    obs.cycle_index = cycle;
    obs.batch_size = static_cast<int>(parts.size());
    obs.utilization = utilization;
    obs.batch_delay = 0.0;
    for (const auto& p : parts) obs.batch_delay += p.part_delay;
    obs.parts = std::move(parts);
    return obs;
}

Comparator parse_comparator(std::string_view text) {
    if (text == "<=" || text == "\xE2\x89\xA4") return Comparator::kLessEqual;
    if (text == ">=" || text == "\xE2\x89\xA5") return Comparator::kGreaterEqual;
    throw ConfigError("unknown comparator '" + std::string(text) + "'");
}

std::string_view to_string(Comparator c) noexcept {
    return c == Comparator::kLessEqual ? "<=" : ">=";
}

SloSet SloSet::defaults() {
    return SloSet{{
        Slo{std::string(var::kBatchDelay), Comparator::kLessEqual, 500.0},
        Slo{std::string(var::kDistance), Comparator::kGreaterEqual, 5.0},
    }};
}

void SloSet::validate() const {
    for (const auto& slo : slos) {
        if (find_variable(slo.variable) == nullptr) {
            throw ConfigError("SLO names unknown variable '" + slo.variable + "'");
        }
    }
}

bool slo_fulfilled(const BatchObservation& obs, const SloSet& slos) {
    for (const auto& slo : slos.slos) {
        const std::string_view v = slo.variable;
        if (v == var::kBatchDelay) {
            if (!slo.admits(obs.batch_delay)) return false;
        } else if (v == var::kUtilization) {
            if (!slo.admits(obs.utilization)) return false;
        } else if (v == var::kBatchSize) {
            if (!slo.admits(static_cast<double>(obs.batch_size))) return false;
        } else if (v == var::kDistance) {
            for (const auto& p : obs.parts) {
                if (!slo.admits(p.distance)) return false;
            }
        } else if (v == var::kPartDelay) {
            for (const auto& p : obs.parts) {
                if (!slo.admits(p.part_delay)) return false;
            }
        } else {
            throw ConfigError("SLO names unknown variable '" + slo.variable + "'");
        }
    }
    return true;
}

void KnowledgeBase::record(BatchObservation obs) {
    obs.validate();
    by_size_[obs.batch_size].push_back(std::move(obs));
    ++total_;
}

std::size_t KnowledgeBase::count(int bs) const {
    auto it = by_size_.find(bs);
    return it == by_size_.end() ? 0 : it->second.size();
}

const std::vector<BatchObservation>& KnowledgeBase::samples(int bs) const {
    static const std::vector<BatchObservation> none;
    auto it = by_size_.find(bs);
    return it == by_size_.end() ? none : it->second;
}

std::vector<int> KnowledgeBase::sampled_sizes() const {
    std::vector<int> out;
    out.reserve(by_size_.size());
    for (const auto& [bs, list] : by_size_) {
        if (!list.empty()) out.push_back(bs);
    }
    return out;
}

KnowledgeBase record(KnowledgeBase kb, BatchObservation obs) {
    kb.record(std::move(obs));
    return kb;
}

void SurpriseLog::append(int bs, double surprise) {
    if (!std::isfinite(surprise)) {
        throw DomainError("surprise must be finite");
    }
    entries_.push_back({bs, surprise});
}

std::vector<double> SurpriseLog::for_size(int bs) const {
    std::vector<double> out;
    for (const auto& e : entries_) {
        if (e.batch_size == bs) out.push_back(e.surprise);
    }
    return out;
}

double SurpriseLog::mean() const {
    if (entries_.empty()) throw DomainError("mean of empty surprise log");
    double sum = 0.0;
    for (const auto& e : entries_) sum += e.surprise;
    return sum / static_cast<double>(entries_.size());
}

double SurpriseLog::max() const {
    if (entries_.empty()) throw DomainError("max of empty surprise log");
    double m = entries_.front().surprise;
    for (const auto& e : entries_) m = std::max(m, e.surprise);
    return m;
}

}  // namespace aci
