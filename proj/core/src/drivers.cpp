#include "entstop/drivers.hpp"

#include <cmath>
#include <limits>
#include <string>

#include "entstop/errors.hpp"

namespace entstop {

namespace {

constexpr double kAsymptoticCut = 30.0;
constexpr double kTaylorCut = 1e-4;
constexpr double kMeanSeriesCut = 1e-4;
constexpr double kRootLowerBracket = -1.0 + 1e-15;
constexpr double kRootTol = 1e-12;

void require_finite(double x, const char* fn) {
    if (!std::isfinite(x)) {
        throw DomainError(std::string(fn) + ": non-finite argument");
    }
}

void require_level(double n, const char* fn) {
    if (!(n >= 1.0) || !std::isfinite(n)) {
        throw DomainError(std::string(fn) + ": truncation level n must be >= 1, got " +
                          std::to_string(n));
    }
}

}  // namespace

void DriverParams::validate() const {
    if (!(lambda > 0.0 && lambda <= 1.0)) {
        throw ConfigError("DriverParams: lambda must lie in (0, 1], got " +
                          std::to_string(lambda));
    }
    if (!(n >= 1.0) || !std::isfinite(n)) {
        throw ConfigError("DriverParams: n must be >= 1, got " + std::to_string(n));
    }
    if (!(r >= 0.0) || !std::isfinite(r)) {
        throw ConfigError("DriverParams: r must be >= 0, got " + std::to_string(r));
    }
}

double phi(double x) {
    require_finite(x, "phi");
    if (x >= kAsymptoticCut) {
        return x - std::log(x) + std::log1p(-std::exp(-x));
    }
    if (x <= -kAsymptoticCut) {
        return std::log1p(-std::exp(x)) - std::log(-x);
    }
    if (std::abs(x) < kTaylorCut) {
        const double x2 = x * x;
        return x / 2.0 + x2 / 24.0 - x2 * x2 / 2880.0;
    }
    return std::log(std::expm1(x) / x);
}

double psi(double x) {
    require_finite(x, "psi");
    if (std::abs(x) < kTaylorCut) {
        return 0.5 + x / 24.0 - x * x * x / 2880.0;
    }
    return phi(x) / x;
}

double phi_prime(double x) {
    require_finite(x, "phi_prime");
    return gibbs_mean(x, 1.0);
}

double phi_n(double x, double n) {
    require_finite(x, "phi_n");
    require_level(n, "phi_n");
    // ln((e^{nx}-1)/x) = ln((e^{nx}-1)/(nx)) + ln n
    return phi(n * x) + std::log(n);
}

double phi_lambda_n(double p, double x, const DriverParams& params) {
    return params.lambda * phi_n((p - x) / params.lambda, params.n);
}

double phi_lambda_inf(double p, double x, double lambda) {
    if (x <= p) {
        return std::numeric_limits<double>::infinity();
    }
    return lambda * std::log(lambda / (x - p));
}

double phi_n_root(double n) {
    require_level(n, "phi_n_root");
    if (n == 1.0) {
        return 0.0;
    }
    auto f = [n](double x) { return std::exp(n * x) - (x + 1.0); };

    double lo = kRootLowerBracket;
    double hi = -std::log(n) / n;  // minimizer of f, where f < 0
    // For n beyond ~35 the root is closer to -1 than the bracket resolution.
    if (f(lo) <= 0.0) {
        return lo;
    }
    while (hi - lo > kRootTol) {
        const double mid = 0.5 * (lo + hi);
        if (f(mid) > 0.0) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    return 0.5 * (lo + hi);
}

double gibbs_density(double alpha, double n, double u) {
    require_finite(alpha, "gibbs_density");
    if (!(n > 0.0)) {
        throw DomainError("gibbs_density: n must be positive");
    }
    if (!(u >= 0.0 && u <= n)) {
        throw DomainError("gibbs_density: u outside [0, n]");
    }
    if (alpha == 0.0) {
        return 1.0 / n;
    }
    if (alpha > 0.0) {
        // alpha e^{alpha(u-n)} / (1 - e^{-alpha n})
        return alpha * std::exp(alpha * (u - n)) / -std::expm1(-alpha * n);
    }
    return alpha * std::exp(alpha * u) / std::expm1(alpha * n);
}

double gibbs_mean(double alpha, double n) {
    require_finite(alpha, "gibbs_mean");
    require_level(n, "gibbs_mean");
    const double an = alpha * n;
    if (std::abs(an) < kMeanSeriesCut) {
        return n / 2.0 + alpha * n * n / 12.0;
    }
    // expm1 overflows to +inf for an << 0, giving n/(-inf) = -0 as required.
    return n / -std::expm1(-an) - 1.0 / alpha;
}

}  // namespace entstop
