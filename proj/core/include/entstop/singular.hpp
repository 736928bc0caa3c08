#pragma once

#include <cstdint>
#include <vector>

#include "entstop/market.hpp"
#include "entstop/regression.hpp"
#include "entstop/schemes.hpp"

namespace entstop {

// Market, payoff, discretization and regression shared by the n -> infinity studies.
struct SimulationSetup {
    MarketConfig market;
    PayoffSpec payoff;
    int steps = 100;
    std::size_t n_paths = 10000;
    std::uint64_t seed = 20240601;
    BasisSpec basis = BasisSpec::default_for(2, 100.0);
    SchemeConfig scheme;  // theta / Newton settings; lambda and n are overridden

    void validate() const;
};

struct NSweepReport {
    double lambda = 0.0;
    std::vector<double> n_values;
    std::vector<double> prices;
    std::vector<double> std_errors;
    double monotone_violation = 0.0;  // min(0, smallest successive price difference)
};

// entropy_implicit at fixed lambda for each n on one common PathGrid.
NSweepReport n_sweep(const SimulationSetup& setup, double lambda,
                     const std::vector<double>& n_values);

inline constexpr double kDefaultIntensityCap = 1e6;

// gamma = lambda / (p + lambda - v) * ln(lambda / (v - p)) for v > p, evaluated
// as log1p(u)/u with u = (v - p - lambda)/lambda (equal to 1 at v - p = lambda).
// Returns `cap` when v <= p and never exceeds it.
double default_intensity(double p, double v, double lambda, double cap = kDefaultIntensityCap);

struct DefaultCheckOptions {
    double intensity_cap = kDefaultIntensityCap;
    bool discounted = false;
};

struct DefaultCheckReport {
    double v_lambda_0 = 0.0;     // V^{lambda, n_proxy}_0
    double rep_estimate = 0.0;   // defaultable-claim value of the hitting rule
    double std_error = 0.0;
    double epsilon_stop = 0.0;
    std::int64_t cap_engagements = 0;
    double survival_gap = 0.0;   // max_k |P(sigma > t_k) - mean e^{-Gamma_k}|
    double survival_tolerance = 0.0;  // 3 / sqrt(paths)
};

// Monte Carlo of the defaultable American claim (exercise payoff P, recovery
// P + lambda at default) under the stopping rule tau = first t_k with
// V_k <= P_k + epsilon_stop, using V^{lambda, n_proxy} as proxy for the
// singular-limit value and a default clock with trapezoidal Gamma.
DefaultCheckReport defaultable_mc_check(const SimulationSetup& setup, double lambda,
                                        double n_proxy, double epsilon_stop,
                                        std::uint64_t seed,
                                        const DefaultCheckOptions& options = {});

}  // namespace entstop
