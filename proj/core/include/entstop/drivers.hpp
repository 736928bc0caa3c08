#pragma once

// Special functions behind every penalized / entropy-regularized generator.
//
//   Phi(x)      = ln((e^x - 1) / x),            Phi(0) = 0
//   Psi(x)      = Phi(x) / x,                   Psi(0) = 1/2
//   Phi_n(x)    = ln((e^{nx} - 1) / x),         Phi_n(0) = ln n
//   Phi_{l,n}   = l * Phi_n((p - x) / l)
//   Phi_{l,inf} = l * ln(l / (x - p)) for x > p, +inf otherwise
//
// All functions are pure and thread-safe. Arguments that make the naive
// formulas overflow (|x| in the hundreds or thousands is routine inside the
// schemes) are handled by asymptotic branches.

namespace entstop {

struct DriverParams {
    double lambda = 1.0;  // temperature
    double n = 1.0;       // truncation / penalization level
    double r = 0.0;       // continuously compounded discount rate

    // Throws ConfigError unless lambda in (0, 1], n >= 1, r >= 0.
    void validate() const;
};

double phi(double x);
double psi(double x);

// Phi'(x) = 1/(1 - e^{-x}) - 1/x, which lies in [0, 1].
double phi_prime(double x);

double phi_n(double x, double n);

// lambda * Phi_n((p - x) / lambda). Decreasing in x with a unique root at
// p - lambda * phi_n_root(n).
double phi_lambda_n(double p, double x, const DriverParams& params);

// Singular limit of phi_lambda_n as n -> infinity. Returns
// +std::numeric_limits<double>::infinity() when x <= p.
double phi_lambda_inf(double p, double x, double lambda);

// Root of Phi_n in (-1, 0], i.e. the non-zero solution of e^{nx} - x - 1 = 0
// (0 for n = 1). Bisection to 1e-12 absolute.
double phi_n_root(double n);

// Gibbs density alpha e^{alpha u} / (e^{alpha n} - 1) on [0, n];
// uniform 1/n at alpha = 0.
double gibbs_density(double alpha, double n, double u);

// Mean of the Gibbs density: n / (1 - e^{-alpha n}) - 1/alpha, in (0, n).
double gibbs_mean(double alpha, double n);

}  // namespace entstop
