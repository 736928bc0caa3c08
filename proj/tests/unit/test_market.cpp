#include <cmath>
#include <sstream>
#include <string>
#include <vector>

#include "doctest.h"

#include "entstop/errors.hpp"
#include "entstop/market.hpp"

using namespace entstop;

namespace {

MarketConfig table_market() { return MarketConfig{{100.0, 100.0}, 0.05, 0.1, 0.2, 3.0}; }

}  // namespace

TEST_SUITE("market") {

TEST_CASE("time grid") {
    const TimeGrid g(3.0, 100);
    CHECK(g.dt() == doctest::Approx(0.03));
    CHECK(g.time(0) == 0.0);
    CHECK(std::abs(g.time(100) - 3.0) <= 1e-12);
    CHECK_THROWS_AS(TimeGrid(3.0, 0), ConfigError);
    CHECK_THROWS_AS(TimeGrid(-1.0, 10), ConfigError);
}

TEST_CASE("config validation") {
    CHECK_NOTHROW(table_market().validate());
    auto m = table_market();
    m.s0 = {100.0, -1.0};
    CHECK_THROWS_AS(m.validate(), ConfigError);
    m = table_market();
    m.T = 0.0;
    CHECK_THROWS_AS(m.validate(), ConfigError);
    m = table_market();
    m.s0.clear();
    CHECK_THROWS_AS(m.validate(), ConfigError);
    CHECK_THROWS_AS(simulate_paths(table_market(), TimeGrid(2.0, 10), 10, 1), ConfigError);
}

TEST_CASE("paths start at s0, are positive and reproducible") {
    const auto a = simulate_paths(table_market(), TimeGrid(3.0, 20), 500, 11);
    const auto b = simulate_paths(table_market(), TimeGrid(3.0, 20), 500, 11);
    CHECK(a.raw() == b.raw());
    const auto c = simulate_paths(table_market(), TimeGrid(3.0, 20), 500, 12);
    CHECK(a.raw() != c.raw());
    for (std::size_t p = 0; p < a.n_paths(); ++p) {
        CHECK(a.at(p, 0, 0) == 100.0);
        CHECK(a.at(p, 0, 1) == 100.0);
    }
    for (double v : a.raw()) {
        REQUIRE(std::isfinite(v));
        REQUIRE(v > 0.0);
    }
}

TEST_CASE("path prefix does not depend on the number of paths") {
    const auto small = simulate_paths(table_market(), TimeGrid(3.0, 10), 50, 3);
    const auto large = simulate_paths(table_market(), TimeGrid(3.0, 10), 400, 3);
    for (std::size_t p = 0; p < small.n_paths(); ++p) {
        for (int k = 0; k <= 10; ++k) {
            CHECK(small.at(p, k, 1) == large.at(p, k, 1));
        }
    }
}

TEST_CASE("zero volatility follows the deterministic drift") {
    auto m = table_market();
    m.sigma = 0.0;
    const auto g = TimeGrid(3.0, 30);
    const auto paths = simulate_paths(m, g, 4, 5);
    for (int k = 0; k <= 30; ++k) {
        CHECK(paths.at(2, k, 0) == doctest::Approx(100.0 * std::exp(-0.05 * g.time(k))).epsilon(1e-14));
    }
}

TEST_CASE("terminal mean and martingale property") {
    const std::size_t n = 100000;
    const auto paths = simulate_paths(table_market(), TimeGrid(3.0, 10), n, 2024);
    for (int k : {1, 5, 10}) {
        const double t = paths.grid().time(k);
        double s1 = 0.0;
        double s2 = 0.0;
        for (std::size_t p = 0; p < n; ++p) {
            const double x = std::exp(0.05 * t) * paths.at(p, k, 0);
            s1 += x;
            s2 += x * x;
        }
        const double mean = s1 / n;
        const double se = std::sqrt((s2 / n - mean * mean) / n);
        CAPTURE(k);
        CHECK(std::abs(mean - 100.0) <= 3.0 * se);
    }
    double sum_t = 0.0;
    double sum_t2 = 0.0;
    for (std::size_t p = 0; p < n; ++p) {
        sum_t += paths.at(p, 10, 1);
        sum_t2 += paths.at(p, 10, 1) * paths.at(p, 10, 1);
    }
    const double mean_t = sum_t / n;
    const double se_t = std::sqrt((sum_t2 / n - mean_t * mean_t) / n);
    CHECK(std::abs(mean_t - 86.070797642505781) <= 3.0 * se_t);
}

TEST_CASE("assets are independent") {
    const std::size_t n = 20000;
    const int steps = 10;
    const auto paths = simulate_paths(table_market(), TimeGrid(3.0, steps), n, 77);
    double sx = 0, sy = 0, sxx = 0, syy = 0, sxy = 0;
    for (std::size_t p = 0; p < n; ++p) {
        for (int k = 0; k < steps; ++k) {
            const double x = std::log(paths.at(p, k + 1, 0) / paths.at(p, k, 0));
            const double y = std::log(paths.at(p, k + 1, 1) / paths.at(p, k, 1));
            sx += x;
            sy += y;
            sxx += x * x;
            syy += y * y;
            sxy += x * y;
        }
    }
    const double m = static_cast<double>(n * steps);
    const double cov = sxy / m - (sx / m) * (sy / m);
    const double corr = cov / std::sqrt((sxx / m - sx * sx / m / m) * (syy / m - sy * sy / m / m));
    CHECK(std::abs(corr) <= 3.0 / std::sqrt(m));
}

TEST_CASE("max-call payoff") {
    const PayoffSpec spec{PayoffKind::max_call, 100.0};
    CHECK(payoff(spec, std::vector<double>{100.0, 100.0}) == 0.0);
    CHECK(payoff(spec, std::vector<double>{110.0, 95.0}) == 10.0);
    CHECK(payoff(spec, std::vector<double>{95.0, 112.0}) == 12.0);
    CHECK(payoff(PayoffSpec{PayoffKind::max_call, 50.0}, std::vector<double>{40.0, 30.0}) == 0.0);
    CHECK_THROWS_AS((PayoffSpec{PayoffKind::max_call, 0.0}.validate()), ConfigError);
}

TEST_CASE("path export") {
    auto m = table_market();
    const auto paths = simulate_paths(m, TimeGrid(3.0, 2), 2, 1);
    std::ostringstream out;
    write_paths_csv(paths, out);
    std::istringstream in(out.str());
    std::string line;
    std::getline(in, line);
    CHECK(line == "path,step,asset,price");
    int rows = 0;
    while (std::getline(in, line)) {
        ++rows;
    }
    CHECK(rows == 2 * 3 * 2);
}

}  // TEST_SUITE
