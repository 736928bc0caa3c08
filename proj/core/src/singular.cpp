#include "entstop/singular.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "entstop/errors.hpp"
#include "entstop/rng.hpp"

namespace entstop {

void SimulationSetup::validate() const {
    market.validate();
    payoff.validate();
    if (steps < 1) {
        throw ConfigError("SimulationSetup: steps must be >= 1");
    }
    if (n_paths < 2) {
        throw ConfigError("SimulationSetup: at least two paths are required");
    }
    basis.validate();
    scheme.validate();
}

NSweepReport n_sweep(const SimulationSetup& setup, double lambda,
                     const std::vector<double>& n_values) {
    setup.validate();
    if (!(lambda > 0.0 && lambda <= 1.0)) {
        throw ConfigError("n_sweep: lambda must lie in (0, 1]");
    }
    if (n_values.empty()) {
        throw ConfigError("n_sweep: no truncation levels given");
    }
    for (std::size_t i = 1; i < n_values.size(); ++i) {
        if (!(n_values[i] > n_values[i - 1])) {
            throw ConfigError("n_sweep: n_values must be strictly increasing");
        }
    }

    const TimeGrid grid(setup.market.T, setup.steps);
    const PathGrid paths = simulate_paths(setup.market, grid, setup.n_paths, setup.seed);
    ContinuationEstimator est(paths, setup.payoff, setup.basis, setup.scheme.regress_itm_only,
                              setup.scheme.min_paths_per_feature);

    NSweepReport report;
    report.lambda = lambda;
    report.n_values = n_values;
    for (double n : n_values) {
        SchemeConfig cfg = setup.scheme;
        cfg.couple_lambda_n = false;
        cfg.params = DriverParams{lambda, n, setup.market.r};
        const ValueSurface s = entropy_implicit(est, cfg);
        report.prices.push_back(s.price);
        report.std_errors.push_back(s.std_error);
    }
    for (std::size_t i = 1; i < report.prices.size(); ++i) {
        report.monotone_violation =
            std::min(report.monotone_violation, report.prices[i] - report.prices[i - 1]);
    }
    return report;
}

double default_intensity(double p, double v, double lambda, double cap) {
    const double gap = v - p;
    if (!(gap > 0.0)) {
        return cap;
    }
    const double u = (gap - lambda) / lambda;
    const double gamma = std::abs(u) < 1e-8 ? 1.0 - 0.5 * u : std::log1p(u) / u;
    return std::min(gamma, cap);
}

DefaultCheckReport defaultable_mc_check(const SimulationSetup& setup, double lambda,
                                        double n_proxy, double epsilon_stop,
                                        std::uint64_t seed,
                                        const DefaultCheckOptions& options) {
    setup.validate();
    if (!(lambda > 0.0 && lambda <= 1.0)) {
        throw ConfigError("defaultable_mc_check: lambda must lie in (0, 1]");
    }
    if (!(epsilon_stop > 0.0)) {
        throw ConfigError("defaultable_mc_check: epsilon_stop must be positive");
    }
    if (!(options.intensity_cap >= 0.0)) {
        throw ConfigError("defaultable_mc_check: intensity cap must be non-negative");
    }

    const TimeGrid grid(setup.market.T, setup.steps);
    const PathGrid paths = simulate_paths(setup.market, grid, setup.n_paths, setup.seed);
    ContinuationEstimator est(paths, setup.payoff, setup.basis, setup.scheme.regress_itm_only,
                              setup.scheme.min_paths_per_feature);
    SchemeConfig cfg = setup.scheme;
    cfg.couple_lambda_n = false;
    cfg.params = DriverParams{lambda, n_proxy, setup.market.r};
    const ValueSurface surface = entropy_implicit(est, cfg);

    const std::size_t n_paths = paths.n_paths();
    const int steps = paths.steps();
    const double dt = grid.dt();
    const double r = options.discounted ? setup.market.r : 0.0;
    const StreamRng clock(seed, StreamRng::Purpose::default_clock);

    std::vector<double> pathwise(n_paths);
    std::vector<double> survival_freq(static_cast<std::size_t>(steps), 0.0);
    std::vector<double> survival_prob(static_cast<std::size_t>(steps), 0.0);
    std::vector<double> gamma(static_cast<std::size_t>(steps));
    std::vector<double> big_gamma(static_cast<std::size_t>(steps));
    std::vector<char> capped(static_cast<std::size_t>(steps));
    std::int64_t cap_engagements = 0;

    for (std::size_t p = 0; p < n_paths; ++p) {
        // Intensity on t_0..t_{N-1}; the claim pays P_T at T whatever the clock says.
        for (int k = 0; k < steps; ++k) {
            const auto uk = static_cast<std::size_t>(k);
            const double pay = est.payoff(p, k);
            const double v = surface.value(p, k);
            gamma[uk] = default_intensity(pay, v, lambda, options.intensity_cap);
            capped[uk] = (v <= pay) || gamma[uk] >= options.intensity_cap;
        }
        // Trapezoidal Gamma. A capped node stands for a singular intensity and
        // is replaced by its uncapped neighbour on that interval.
        big_gamma[0] = 0.0;
        for (int k = 1; k < steps; ++k) {
            const auto a = static_cast<std::size_t>(k - 1);
            const auto b = static_cast<std::size_t>(k);
            double left = gamma[a];
            double right = gamma[b];
            if (capped[a] != capped[b]) {
                left = right = capped[a] ? gamma[b] : gamma[a];
            }
            big_gamma[b] = big_gamma[a] + 0.5 * dt * (left + right);
        }

        const double threshold = clock.exponential(p, 0, 0);
        int tau = steps;
        for (int k = 0; k < steps; ++k) {
            if (surface.value(p, k) <= est.payoff(p, k) + epsilon_stop) {
                tau = k;
                break;
            }
        }
        int sigma = steps + 1;  // no default on the grid before T
        for (int k = 0; k < steps; ++k) {
            const auto uk = static_cast<std::size_t>(k);
            survival_prob[uk] += std::exp(-big_gamma[uk]);
            if (big_gamma[uk] >= threshold && sigma > steps) {
                sigma = k;
            }
            if (sigma > k) {
                survival_freq[uk] += 1.0;
            }
        }
        for (int k = 0; k <= std::min(tau, steps - 1); ++k) {
            cap_engagements += capped[static_cast<std::size_t>(k)] ? 1 : 0;
        }

        double value;
        if (sigma <= tau) {
            value = (est.payoff(p, sigma) + lambda) * std::exp(-r * grid.time(sigma));
        } else {
            value = est.payoff(p, tau) * std::exp(-r * grid.time(tau));
        }
        pathwise[p] = value;
    }

    DefaultCheckReport report;
    report.v_lambda_0 = surface.price;
    report.epsilon_stop = epsilon_stop;
    report.cap_engagements = cap_engagements;
    const Eigen::Map<const Eigen::VectorXd> x(pathwise.data(), static_cast<Eigen::Index>(n_paths));
    report.rep_estimate = x.mean();
    const double var = (x.array() - report.rep_estimate).square().sum() /
                       static_cast<double>(n_paths - 1);
    report.std_error = std::sqrt(var / static_cast<double>(n_paths));
    for (int k = 0; k < steps; ++k) {
        const auto uk = static_cast<std::size_t>(k);
        const double gap = std::abs(survival_freq[uk] - survival_prob[uk]) /
                           static_cast<double>(n_paths);
        report.survival_gap = std::max(report.survival_gap, gap);
    }
    report.survival_tolerance = 3.0 / std::sqrt(static_cast<double>(n_paths));
    return report;
}

}  // namespace entstop
