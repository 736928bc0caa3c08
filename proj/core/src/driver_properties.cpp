#include "entstop/driver_properties.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <sstream>

#include "entstop/drivers.hpp"

namespace entstop {

namespace {

std::vector<double> linspace(double a, double b, int count) {
    std::vector<double> out(static_cast<std::size_t>(count));
    for (int i = 0; i < count; ++i) {
        out[static_cast<std::size_t>(i)] = a + (b - a) * i / (count - 1);
    }
    return out;
}

PropertyResult finish(std::string name, double worst, std::string detail) {
    PropertyResult res;
    res.name = std::move(name);
    res.worst = worst;
    res.passed = worst >= 0.0;
    res.detail = std::move(detail);
    return res;
}

}  // namespace

PropertyResult check_phi_lipschitz() {
    const auto xs = linspace(-50.0, 50.0, 1001);
    std::vector<double> vals(xs.size());
    std::transform(xs.begin(), xs.end(), vals.begin(), [](double x) { return phi(x); });

    double worst = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < xs.size(); ++i) {
        for (std::size_t j = i + 1; j < xs.size(); ++j) {
            const double slope = (vals[j] - vals[i]) / (xs[j] - xs[i]);
            worst = std::min({worst, slope, 1.0 + 1e-9 - slope});
        }
    }
    return finish("phi Lipschitz-1", worst, "0 <= secant slope <= 1 over all pairs in [-50,50]");
}

PropertyResult check_phi_n_slope_bound() {
    const auto xs = linspace(-10.0, 10.0, 2001);
    double worst = std::numeric_limits<double>::infinity();
    for (double n : {1.0, 2.0, 5.0, 100.0}) {
        const double tol = 1e-7 * n;
        for (std::size_t i = 0; i + 1 < xs.size(); ++i) {
            const double slope = (phi_n(xs[i + 1], n) - phi_n(xs[i], n)) / (xs[i + 1] - xs[i]);
            worst = std::min({worst, (slope + tol) / n, (n + tol - slope) / n});
        }
    }
    return finish("phi_n slope in [0,n]", worst, "secant slopes, n in {1,2,5,100}");
}

PropertyResult check_phi_n_monotone_in_n() {
    const auto xs = linspace(-10.0, 10.0, 401);
    constexpr std::array<double, 7> levels{1.0, 1.5, 2.0, 5.0, 10.0, 100.0, 1000.0};
    double worst = std::numeric_limits<double>::infinity();
    for (double x : xs) {
        for (std::size_t k = 0; k + 1 < levels.size(); ++k) {
            const double lo = phi_n(x, levels[k]);
            const double hi = phi_n(x, levels[k + 1]);
            worst = std::min(worst, hi - lo + 1e-12 * (1.0 + std::abs(hi)));
        }
    }
    return finish("phi_n non-decreasing in n", worst, "x in [-10,10], n up to 1000");
}

PropertyResult check_psi_is_cdf() {
    const auto xs = linspace(-50.0, 50.0, 2001);
    double worst = std::numeric_limits<double>::infinity();
    double prev = psi(xs.front());
    for (double x : xs) {
        const double v = psi(x);
        worst = std::min({worst, v, 1.0 - v, v - prev + 1e-14});
        prev = v;
    }
    worst = std::min({worst, 0.1 - psi(-50.0), psi(50.0) - 0.9});
    return finish("psi is a CDF", worst, "monotone, in [0,1], psi(-50)<0.1, psi(50)>0.9");
}

PropertyResult check_penalization_gap() {
    const auto xs = linspace(-20.0, 20.0, 801);
    double worst = std::numeric_limits<double>::infinity();
    for (double c : {0.01, 0.1, 1.0}) {
        for (double eps : {0.1, 0.5, 0.9}) {
            for (double x : xs) {
                const double gap = std::max(x, 0.0) - c * phi(x / c);
                const double log_abs = x == 0.0 ? 0.0 : std::max(std::log(std::abs(x)), 0.0);
                const double bound =
                    eps - c * std::log(-std::expm1(-eps / c)) + c * log_abs - c * std::log(c);
                const double tol = 1e-12 * (1.0 + std::abs(x));
                worst = std::min({worst, gap + tol, bound - gap + tol});
            }
        }
    }
    return finish("x+ - c Phi(x/c) gap bound", worst, "c in {.01,.1,1}, eps in {.1,.5,.9}");
}

PropertyResult check_ratio_monotonicity() {
    const auto xs = linspace(1e-3, 1.0 - 1e-3, 999);
    double worst = std::numeric_limits<double>::infinity();
    for (auto [hi, lo] : {std::pair{3, 2}, std::pair{5, 2}, std::pair{10, 7}}) {
        auto f = [hi, lo](double x) { return (std::pow(x, hi) - 1.0) / (std::pow(x, lo) - 1.0); };
        for (std::size_t i = 0; i + 1 < xs.size(); ++i) {
            worst = std::min(worst, f(xs[i + 1]) - f(xs[i]) + 1e-12);
        }
    }
    return finish("(x^n-1)/(x^m-1) increasing on (0,1)", worst, "(n,m) in {(3,2),(5,2),(10,7)}");
}

PropertyResult check_root_ordering() {
    double worst = std::numeric_limits<double>::infinity();
    double prev = phi_n_root(1.0);
    for (int k = 1; k <= 1000; ++k) {
        const double n = k;
        const double root = phi_n_root(n);
        // -1 < root <= 0, non-increasing in n, |root + 1| <= 1/n (with solver tolerance)
        worst = std::min({worst, root + 1.0, -root, prev - root + 1e-12,
                          1.0 / n + 1e-12 - std::abs(root + 1.0)});
        prev = root;
    }
    // root + 1 is exactly representable and strictly positive, so a zero margin is a violation.
    const bool strictly_above = phi_n_root(1000.0) > -1.0;
    auto res = finish("phi_n root ordering", worst, "n = 1..1000");
    res.passed = res.passed && strictly_above;
    return res;
}

PropertyResult check_truncation_derivative_bound() {
    const double bound = std::max(1.0, 1.0 / std::abs(phi_n_root(2.0))) + 1e-6;
    double worst = std::numeric_limits<double>::infinity();
    const double p = 3.0;
    for (double lambda : {0.01, 0.1, 0.5, 1.0}) {
        for (double n : {1.0, 2.0, 3.0, 10.0, 100.0, 1000.0}) {
            const DriverParams params{lambda, n, 0.0};
            const double start = p - lambda * phi_n_root(n);
            const auto xs = linspace(start, p + 10.0, 4001);
            for (std::size_t i = 0; i + 1 < xs.size(); ++i) {
                const double slope = (phi_lambda_n(p, xs[i + 1], params) -
                                      phi_lambda_n(p, xs[i], params)) /
                                     (xs[i + 1] - xs[i]);
                worst = std::min(worst, bound - std::abs(slope));
            }
        }
    }
    std::ostringstream detail;
    detail << "|d/dx Phi_{l,n}| <= " << bound << " above the root";
    return finish("truncation derivative bound", worst, detail.str());
}

PropertyResult check_two_route_consistency() {
    // Route 1: phi_lambda_n (rescaled Phi plus lambda ln n).
    // Route 2: lambda ln((e^{ny} - 1)/y) evaluated directly in extended precision.
    double worst = std::numeric_limits<double>::infinity();
    const auto ys = linspace(-5.0, 5.0, 1000);  // even count: skips y = 0
    for (double lambda : {0.05, 0.5, 1.0}) {
        for (double n : {1.0, 3.0, 10.0, 100.0}) {
            const DriverParams params{lambda, n, 0.0};
            for (double y : ys) {
                const double via_phi = phi_lambda_n(lambda * y, 0.0, params);
                const long double ly = y;
                const long double direct =
                    lambda * std::log(std::expm1(static_cast<long double>(n) * ly) / ly);
                // relative to the magnitude of the summands lambda Phi(ny) and lambda ln n
                const double scale = lambda * (std::abs(phi(n * y)) + std::log(n)) + 1e-300;
                const double rel = std::abs(via_phi - static_cast<double>(direct)) / scale;
                worst = std::min(worst, 1e-10 - rel);
            }
        }
    }
    return finish("two-route Phi_{l,n} consistency", worst, "relative agreement 1e-10");
}

std::vector<PropertyResult> run_driver_properties() {
    return {check_phi_lipschitz(),         check_phi_n_slope_bound(),
            check_phi_n_monotone_in_n(),   check_psi_is_cdf(),
            check_penalization_gap(),      check_ratio_monotonicity(),
            check_root_ordering(),         check_truncation_derivative_bound(),
            check_two_route_consistency()};
}

}  // namespace entstop
