#include <algorithm>
#include <cmath>
#include <vector>

#include "doctest.h"

#include "entstop/errors.hpp"
#include "entstop/schemes.hpp"

using namespace entstop;

namespace {

struct Fixture {
    MarketConfig market{{100.0, 100.0}, 0.05, 0.1, 0.2, 1.0};
    PayoffSpec spec{PayoffKind::max_call, 100.0};
    BasisSpec basis = BasisSpec::default_for(2, 100.0);
    PathGrid paths = simulate_paths(market, TimeGrid(1.0, 20), 4000, 99);
};

SchemeConfig config(double lambda, double n) {
    SchemeConfig c;
    c.params = DriverParams{lambda, n, 0.05};
    return c;
}

double discounted_terminal_mean(const Fixture& f) {
    double sum = 0.0;
    for (std::size_t p = 0; p < f.paths.n_paths(); ++p) {
        sum += payoff(f.spec, f.paths.state(p, f.paths.steps()));
    }
    return std::exp(-0.05 * 1.0) * sum / static_cast<double>(f.paths.n_paths());
}

}  // namespace

TEST_SUITE("schemes") {

TEST_CASE("classical with n = 0 is the discounted European estimate") {
    Fixture f;
    const auto s = classical_penalization(f.paths, f.spec, config(1.0, 0.0), f.basis);
    CHECK(std::abs(s.price - discounted_terminal_mean(f)) <= 1e-10);
    for (std::size_t p = 0; p < f.paths.n_paths(); ++p) {
        REQUIRE(s.value(p, 20) == payoff(f.spec, f.paths.state(p, 20)));
    }
}

TEST_CASE("classical penalization grows with n and stays above the payoff at t0") {
    Fixture f;
    ContinuationEstimator est(f.paths, f.spec, f.basis);
    double last = -1.0;
    for (double n : {0.0, 1.0, 10.0, 100.0}) {
        const auto s = classical_penalization(est, config(1.0, n));
        CHECK(s.price >= last - 1e-12);
        last = s.price;
    }
}

TEST_CASE("entropy implicit: terminal slice, residuals and monotonicity in n") {
    Fixture f;
    ContinuationEstimator est(f.paths, f.spec, f.basis);
    double last = -1.0;
    for (double n : {10.0, 100.0, 1000.0}) {
        const auto s = entropy_implicit(est, config(0.01, n));
        CAPTURE(n);
        CHECK(s.diagnostics.at("newton_warnings") == 0.0);
        CHECK(s.diagnostics.at("max_newton_residual") < 1e-10);
        CHECK(s.price >= last - 0.02);
        last = s.price;
        for (std::size_t p = 0; p < f.paths.n_paths(); ++p) {
            REQUIRE(s.value(p, 20) == est.payoff(p, 20));
        }
    }
}

TEST_CASE("entropy implicit approaches classical as lambda -> 0 at fixed n") {
    Fixture f;
    ContinuationEstimator est(f.paths, f.spec, f.basis);
    const double classical = classical_penalization(est, config(1.0, 50.0)).price;
    double last_gap = 1e300;
    for (double lambda : {0.5, 0.1, 0.01, 0.001}) {
        const double gap = std::abs(entropy_implicit(est, config(lambda, 50.0)).price - classical);
        CAPTURE(lambda);
        CHECK(gap < last_gap);
        last_gap = gap;
    }
    CHECK(last_gap < 0.01);
}

TEST_CASE("too few Newton iterations are reported, never silent") {
    Fixture f;
    auto c = config(0.001, 1000.0);
    c.newton_max_iter = 1;
    const auto s = entropy_implicit(f.paths, f.spec, c, f.basis);
    CHECK(s.diagnostics.at("newton_warnings") > 0.0);
}

TEST_CASE("theta = 0 and theta = 1 converge together as dt shrinks") {
    Fixture f;
    auto gap = [&](int steps) {
        const PathGrid paths = simulate_paths(f.market, TimeGrid(1.0, steps), 4000, 99);
        ContinuationEstimator est(paths, f.spec, f.basis);
        auto c = config(0.1, 10.0);
        const double implicit = entropy_implicit(est, c).price;
        c.theta = 0.0;
        return std::abs(implicit - entropy_implicit(est, c).price);
    };
    const double coarse = gap(20);
    const double fine = gap(80);
    CHECK(coarse < 0.2);
    CHECK(fine < 0.6 * coarse);
}

TEST_CASE("PIA iterates are non-decreasing and approach the implicit scheme") {
    Fixture f;
    ContinuationEstimator est(f.paths, f.spec, f.basis);
    auto c = config(0.01, 100.0);
    std::vector<double> prices;
    const auto last = pia(est, c, [&](const PIAState& st) {
        prices.push_back(st.surface->price);
        for (double mu : *st.policy_mean) {
            REQUIRE(mu > 0.0);
            REQUIRE(mu < 100.0);
        }
    });
    REQUIRE(prices.size() == 10);
    for (std::size_t m = 1; m < prices.size(); ++m) {
        CHECK(prices[m] >= prices[m - 1] - 0.02);
    }
    const double implicit = entropy_implicit(est, c).price;
    CHECK(std::abs(last.price - implicit) < 0.1);
}

TEST_CASE("PIA linear step") {
    CHECK(pia_linear_step(2.0, 0.0, 0.1, 5.0) == doctest::Approx(std::exp(-0.2) * 5.0).epsilon(1e-15));
    CHECK(pia_linear_step(0.0, 3.0, 0.1, 5.0) == doctest::Approx(5.3));
    CHECK(pia_linear_step(1e-300, 3.0, 0.1, 5.0) == doctest::Approx(5.3));
}

TEST_CASE("time-zero step of every scheme is the sample mean") {
    Fixture f;
    ContinuationEstimator est(f.paths, f.spec, f.basis);
    Eigen::VectorXd targets(static_cast<Eigen::Index>(f.paths.n_paths()));
    for (Eigen::Index i = 0; i < targets.size(); ++i) {
        targets[i] = static_cast<double>(i % 7);
    }
    Eigen::VectorXd coef;
    const auto fitted = est.project(0, targets, &coef);
    CHECK(fitted[0] == doctest::Approx(targets.mean()));
    CHECK(coef[0] == doctest::Approx(targets.mean()));
    CHECK(coef.tail(coef.size() - 1).isZero());
}

TEST_CASE("randomized policy") {
    Fixture f;
    const std::size_t cells = f.paths.n_paths() * 20;
    const auto euro = classical_penalization(f.paths, f.spec, config(1.0, 0.0), f.basis);
    const auto zero = evaluate_randomized_policy(f.paths, f.spec, std::vector<double>(cells, 0.0), 0.05);
    CHECK(std::abs(zero.price - euro.price) <= 1e-10);

    const auto now = evaluate_randomized_policy(f.paths, f.spec, std::vector<double>(cells, 1e6), 0.05);
    CHECK(std::abs(now.price - payoff(f.spec, f.paths.state(0, 0))) <= 0.01);

    std::vector<double> bad(cells, 1.0);
    bad[5] = -1.0;
    CHECK_THROWS_AS(evaluate_randomized_policy(f.paths, f.spec, bad, 0.05), DomainError);
    CHECK_THROWS_AS(evaluate_randomized_policy(f.paths, f.spec, std::vector<double>(3, 0.0), 0.05),
                    ConfigError);
}

TEST_CASE("entropy stopping intensity is bounded by n") {
    Fixture f;
    ContinuationEstimator est(f.paths, f.spec, f.basis);
    const auto c = config(0.1, 10.0);
    const auto s = entropy_implicit(est, c);
    const auto gamma = entropy_stopping_intensity(s, est, c.params);
    REQUIRE(gamma.size() == f.paths.n_paths() * 20);
    for (double g : gamma) {
        REQUIRE(g >= 0.0);
        REQUIRE(g <= 10.0);
    }
    const auto pol = evaluate_randomized_policy(f.paths, f.spec, gamma, 0.05);
    CHECK(pol.price <= s.price + 0.1 * std::log(10.0) * 1.0 + 3.0 * pol.std_error);
}

TEST_CASE("configuration errors") {
    Fixture f;
    auto c = config(0.1, 10.0);
    c.theta = 1.5;
    CHECK_THROWS_AS(entropy_implicit(f.paths, f.spec, c, f.basis), ConfigError);
    c = config(0.1, 10.0);
    c.pia_iterations = 0;
    CHECK_THROWS_AS(pia(f.paths, f.spec, c, f.basis), ConfigError);
    c = config(0.0, 10.0);
    CHECK_THROWS_AS(entropy_implicit(f.paths, f.spec, c, f.basis), ConfigError);
    c = config(0.5, 10.0);
    c.couple_lambda_n = true;
    CHECK(c.effective_params().lambda == doctest::Approx(0.1));
    CHECK_THROWS_AS(ContinuationEstimator(simulate_paths(f.market, TimeGrid(1.0, 5), 50, 1), f.spec,
                                          f.basis),
                    InsufficientDataError);
}

TEST_CASE("diagnostics rendering") {
    CHECK(format_diagnostics({{"a", 1.0}, {"b", 0.5}}) == "a=1;b=0.5");
    CHECK(format_diagnostics({}).empty());
}

}  // TEST_SUITE
