#pragma once

#include <cstddef>
#include <set>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "aci/execution.hpp"

namespace aci {

/// Directed acyclic graph over model variables. Construction rejects cycles,
/// self-loops and edges touching unknown nodes.
class CausalGraph {
public:
    using Edge = std::pair<std::string, std::string>;  // (parent, child)

    CausalGraph(std::set<std::string> nodes, std::set<Edge> edges);

    /// batch_size -> {utilization, distance, batch_delay},
    /// utilization -> part_delay, part_delay -> batch_delay.
    [[nodiscard]] static CausalGraph defaults();

    [[nodiscard]] const std::set<std::string>& nodes() const noexcept { return nodes_; }
    [[nodiscard]] const std::set<Edge>& edges() const noexcept { return edges_; }
    [[nodiscard]] bool contains(const std::string& v) const { return nodes_.contains(v); }

    [[nodiscard]] std::set<std::string> parents(const std::string& v) const;
    [[nodiscard]] std::set<std::string> children(const std::string& v) const;

private:
    std::set<std::string> nodes_;
    std::set<Edge> edges_;
};

/// Parents, children and co-parents of v's children, without v itself.
/// Throws DomainError when v is not a node of g.
[[nodiscard]] std::set<std::string> markov_blanket(const CausalGraph& g, const std::string& v);

struct Point {
    double x;
    double y;
};

struct PolyModel {
    int degree = 0;
    std::vector<double> coefficients;  // constant term first
    std::size_t training_count = 0;
    double x_min = 0.0;  // observed training range, used to flag extrapolation
    double x_max = 0.0;

    [[nodiscard]] bool extrapolates(double x) const noexcept { return x < x_min || x > x_max; }
};

/// Power sums used by the normal equations: sx[k] = sum x^k for k in [0, 2d],
/// sxy[k] = sum y x^k for k in [0, d].
struct NormalMoments {
    std::vector<double> sx;
    std::vector<double> sxy;
};

/// Accumulates normal-equation moments. The parallel path reduces per-thread
/// partial sums, so it agrees with the serial path only up to rounding.
[[nodiscard]] NormalMoments accumulate_moments(std::span<const Point> points, int degree,
                                               Execution exec = Execution::kSerial);

/// Least-squares polynomial fit through the normal equations.
/// Throws InsufficientData when |points| < degree + 1 or degree < 1, and
/// DegenerateInputs when the system is singular.
[[nodiscard]] PolyModel fit_poly(std::span<const Point> points, int degree,
                                 Execution exec = Execution::kSerial);

/// Horner evaluation without clamping.
[[nodiscard]] double evaluate(const PolyModel& m, double x) noexcept;

/// Predicted part delay (ms) for a utilization, never below 1 ms.
[[nodiscard]] double predict(const PolyModel& m, double utilization) noexcept;

inline constexpr double kSigmaFloor = 1e-6;

struct GaussianStats {
    double mean;
    double std;  // population std, floored at kSigmaFloor
};

/// Throws DomainError on an empty input.
[[nodiscard]] GaussianStats gaussian_stats(std::span<const double> values);

/// -ln of the normal density at x.
[[nodiscard]] double gaussian_nll(double x, const GaussianStats& stats) noexcept;

/// Solves A x = b for a dense row-major n x n system by Gaussian elimination
/// with partial pivoting. Throws DegenerateInputs when A is singular.
[[nodiscard]] std::vector<double> solve_linear(std::vector<double> a, std::vector<double> b);

}  // namespace aci
