// Serial reference paths against the OpenMP kernels.
#include <doctest.h>

#include <cmath>
#include <random>

#include "aci/execution.hpp"
#include "aci/model.hpp"
#include "aci/simulator.hpp"

using namespace aci;

namespace {

double normal_cdf(double z) { return 0.5 * std::erfc(-z / std::sqrt(2.0)); }

}  // namespace

TEST_CASE("violation rates are identical on both paths") {
    const auto cfg = calibrate_defaults();
    for (std::size_t n : {1000u, 2500u, 4096u}) {
        const auto s = violation_rates(cfg, n, 11, Execution::kSerial);
        const auto p = violation_rates(cfg, n, 11, Execution::kParallel);
        CHECK(s.samples_per_bs == n);
        CHECK(s.violations == p.violations);
    }
    const auto a = violation_rates(cfg, 2000, 1, Execution::kSerial);
    const auto b = violation_rates(cfg, 2000, 2, Execution::kSerial);
    CHECK(a.violations != b.violations);
}

TEST_CASE("Monte-Carlo rates match a closed form") {
    // Only utilization is random: a batch violates the delay SLO exactly when
    // utilization exceeds sqrt((500 / bs - base) / q), and the distance SLO
    // holds iff numerator / bs >= 5.
    ScenarioConfig cfg;
    cfg.util_slope = 3.0;
    cfg.util_noise_std = 8.0;
    cfg.delay_base = 2.0;
    cfg.delay_quad_coeff = 0.005;
    cfg.dist_numerator = 130.0;
    const std::size_t n = 20000;
    const auto rates = violation_rates(cfg, n, 5);
    for (int bs = kMinBatchSize; bs <= kMaxBatchSize; ++bs) {
        double p = 1.0;
        if (cfg.dist_numerator / bs >= 5.0) {
            const double u_star = std::sqrt((500.0 / bs - cfg.delay_base) / cfg.delay_quad_coeff);
            p = u_star >= 100.0 ? 0.0 : 1.0 - normal_cdf((u_star - cfg.util_slope * bs) / cfg.util_noise_std);
        }
        const double se = std::sqrt(std::max(p * (1.0 - p), 1e-6) / n);
        INFO("bs=" << bs << " p=" << p);
        CHECK(std::abs(rates.rate(bs) - p) <= 4.0 * se + 1e-4);
    }
}

TEST_CASE("normal-equation moments agree across paths") {
    std::mt19937 gen(3);
    std::uniform_real_distribution<double> x(1.0, 100.0);
    std::normal_distribution<double> e(0.0, 2.0);
    std::vector<Point> pts(50000);
    for (auto& p : pts) {
        p.x = x(gen);
        p.y = 1.0 + 0.005 * p.x * p.x + e(gen);
    }
    for (int d = 1; d <= 4; ++d) {
        const auto s = accumulate_moments(pts, d, Execution::kSerial);
        const auto p = accumulate_moments(pts, d, Execution::kParallel);
        REQUIRE(s.sx.size() == static_cast<std::size_t>(2 * d + 1));
        REQUIRE(s.sxy.size() == static_cast<std::size_t>(d + 1));
        for (std::size_t k = 0; k < s.sx.size(); ++k) CHECK(p.sx[k] == doctest::Approx(s.sx[k]).epsilon(1e-12));
        for (std::size_t k = 0; k < s.sxy.size(); ++k) CHECK(p.sxy[k] == doctest::Approx(s.sxy[k]).epsilon(1e-12));
        CHECK(s.sx[0] == static_cast<double>(pts.size()));
    }
    const auto fs = fit_poly(pts, 2, Execution::kSerial);
    const auto fp = fit_poly(pts, 2, Execution::kParallel);
    for (int k = 0; k <= 2; ++k) CHECK(fp.coefficients[k] == doctest::Approx(fs.coefficients[k]).epsilon(1e-9));
    CHECK(fs.coefficients[2] == doctest::Approx(0.005).epsilon(0.02));
}

TEST_CASE("thread count is positive") { CHECK(max_threads() >= 1); }
