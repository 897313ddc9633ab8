#include "aci/model.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "aci/errors.hpp"

#ifdef ACI_HAVE_OPENMP
#include <omp.h>
#endif

namespace aci {

namespace {

bool reaches(const std::set<CausalGraph::Edge>& edges, const std::string& from,
             const std::string& to) {
    std::vector<std::string> stack{from};
    std::set<std::string> seen;
    while (!stack.empty()) {
        std::string cur = stack.back();
        stack.pop_back();
        if (cur == to) return true;
        if (!seen.insert(cur).second) continue;
        for (const auto& [p, c] : edges) {
            if (p == cur) stack.push_back(c);
        }
    }
    return false;
}

}  // namespace

CausalGraph::CausalGraph(std::set<std::string> nodes, std::set<Edge> edges)
    : nodes_(std::move(nodes)) {
    for (const auto& e : edges) {
        if (!nodes_.contains(e.first) || !nodes_.contains(e.second)) {
            throw DomainError("edge " + e.first + " -> " + e.second + " references unknown node");
        }
        if (e.first == e.second || reaches(edges_, e.second, e.first)) {
            throw DomainError("edge " + e.first + " -> " + e.second + " creates a cycle");
        }
        edges_.insert(e);
    }
}

CausalGraph CausalGraph::defaults() {
    return CausalGraph({"batch_size", "utilization", "distance", "part_delay", "batch_delay"},
                       {
                           {"batch_size", "utilization"},
                           {"batch_size", "distance"},
                           {"batch_size", "batch_delay"},
                           {"utilization", "part_delay"},
                           {"part_delay", "batch_delay"},
                       });
}

std::set<std::string> CausalGraph::parents(const std::string& v) const {
    std::set<std::string> out;
    for (const auto& [p, c] : edges_) {
        if (c == v) out.insert(p);
    }
    return out;
}

std::set<std::string> CausalGraph::children(const std::string& v) const {
    std::set<std::string> out;
    for (const auto& [p, c] : edges_) {
        if (p == v) out.insert(c);
    }
    return out;
}

std::set<std::string> markov_blanket(const CausalGraph& g, const std::string& v) {
    if (!g.contains(v)) throw DomainError("unknown variable '" + v + "'");
    std::set<std::string> blanket = g.parents(v);
    for (const auto& child : g.children(v)) {
        blanket.insert(child);
        for (const auto& spouse : g.parents(child)) blanket.insert(spouse);
    }
    blanket.erase(v);
    return blanket;
}

NormalMoments accumulate_moments(std::span<const Point> points, int degree, Execution exec) {
    const auto n_sx = static_cast<std::size_t>(2 * degree + 1);
    const auto n_sxy = static_cast<std::size_t>(degree + 1);
    NormalMoments m{std::vector<double>(n_sx, 0.0), std::vector<double>(n_sxy, 0.0)};

    auto add_point = [&](const Point& p, double* sx, double* sxy) {
        double xp = 1.0;
        for (std::size_t k = 0; k < n_sx; ++k) {
            sx[k] += xp;
            if (k < n_sxy) sxy[k] += p.y * xp;
            xp *= p.x;
        }
    };

#ifdef ACI_HAVE_OPENMP
    if (exec == Execution::kParallel) {
        const auto count = static_cast<long>(points.size());
#pragma omp parallel
        {
            std::vector<double> sx(n_sx, 0.0), sxy(n_sxy, 0.0);
#pragma omp for schedule(static) nowait
            for (long i = 0; i < count; ++i) add_point(points[i], sx.data(), sxy.data());
#pragma omp critical
            {
                for (std::size_t k = 0; k < n_sx; ++k) m.sx[k] += sx[k];
                for (std::size_t k = 0; k < n_sxy; ++k) m.sxy[k] += sxy[k];
            }
        }
        return m;
    }
#else
    (void)exec;
#endif
    for (const auto& p : points) add_point(p, m.sx.data(), m.sxy.data());
    return m;
}

std::vector<double> solve_linear(std::vector<double> a, std::vector<double> b) {
    const std::size_t n = b.size();
    if (a.size() != n * n) throw DomainError("solve_linear: matrix/vector size mismatch");

    double scale = 0.0;
    for (double v : a) scale = std::max(scale, std::abs(v));
    const double tiny = scale * 1e-13;

    for (std::size_t col = 0; col < n; ++col) {
        std::size_t pivot = col;
        for (std::size_t r = col + 1; r < n; ++r) {
            if (std::abs(a[r * n + col]) > std::abs(a[pivot * n + col])) pivot = r;
        }
        if (!(std::abs(a[pivot * n + col]) > tiny)) {
            throw DegenerateInputs("singular normal equations");
        }
        if (pivot != col) {
            for (std::size_t k = 0; k < n; ++k) std::swap(a[col * n + k], a[pivot * n + k]);
            std::swap(b[col], b[pivot]);
        }
        for (std::size_t r = col + 1; r < n; ++r) {
            const double f = a[r * n + col] / a[col * n + col];
            if (f == 0.0) continue;
            for (std::size_t k = col; k < n; ++k) a[r * n + k] -= f * a[col * n + k];
            b[r] -= f * b[col];
        }
    }
    std::vector<double> x(n, 0.0);
    for (std::size_t i = n; i-- > 0;) {
        double acc = b[i];
        for (std::size_t k = i + 1; k < n; ++k) acc -= a[i * n + k] * x[k];
        x[i] = acc / a[i * n + i];
    }
    return x;
}

PolyModel fit_poly(std::span<const Point> points, int degree, Execution exec) {
    if (degree < 1) throw InsufficientData("polynomial degree must be at least 1");
    if (points.size() < static_cast<std::size_t>(degree) + 1) {
        throw InsufficientData("need at least " + std::to_string(degree + 1) + " points, got " +
                               std::to_string(points.size()));
    }
    std::vector<double> xs;
    xs.reserve(points.size());
    for (const auto& p : points) xs.push_back(p.x);
    std::sort(xs.begin(), xs.end());
    const auto distinct =
        static_cast<std::size_t>(std::unique(xs.begin(), xs.end()) - xs.begin());
    if (distinct < static_cast<std::size_t>(degree) + 1) {
        throw DegenerateInputs("need " + std::to_string(degree + 1) + " distinct x values, got " +
                               std::to_string(distinct));
    }

    const NormalMoments mom = accumulate_moments(points, degree, exec);
    const auto n = static_cast<std::size_t>(degree + 1);
    std::vector<double> a(n * n);
    for (std::size_t r = 0; r < n; ++r) {
        for (std::size_t c = 0; c < n; ++c) a[r * n + c] = mom.sx[r + c];
    }

    PolyModel model;
    model.degree = degree;
    model.coefficients = solve_linear(std::move(a), mom.sxy);
    model.training_count = points.size();
    model.x_min = xs.front();
    model.x_max = xs[distinct - 1];
    for (double c : model.coefficients) {
        if (!std::isfinite(c)) throw DegenerateInputs("non-finite coefficient");
    }
    return model;
}

double evaluate(const PolyModel& m, double x) noexcept {
    double acc = 0.0;
    for (auto it = m.coefficients.rbegin(); it != m.coefficients.rend(); ++it) acc = acc * x + *it;
    return acc;
}

double predict(const PolyModel& m, double utilization) noexcept {
    return std::max(1.0, evaluate(m, utilization));
}

GaussianStats gaussian_stats(std::span<const double> values) {
    if (values.empty()) throw DomainError("gaussian_stats of empty list");
    double sum = 0.0;
    for (double v : values) sum += v;
    const double mean = sum / static_cast<double>(values.size());
    double ss = 0.0;
    for (double v : values) ss += (v - mean) * (v - mean);
    const double sd = std::sqrt(ss / static_cast<double>(values.size()));
    return {mean, std::max(sd, kSigmaFloor)};
}

double gaussian_nll(double x, const GaussianStats& stats) noexcept {
    const double z = (x - stats.mean) / stats.std;
    return 0.5 * z * z + std::log(stats.std) + 0.5 * std::log(2.0 * std::numbers::pi);
}

int max_threads() noexcept {
#ifdef ACI_HAVE_OPENMP
    return omp_get_max_threads();
#else
    return 1;
#endif
}

}  // namespace aci
