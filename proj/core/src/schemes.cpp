#include "entstop/schemes.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>
#include <string>

#include "entstop/errors.hpp"

namespace entstop {

DriverParams SchemeConfig::effective_params() const {
    DriverParams out = params;
    if (couple_lambda_n) {
        out.lambda = 1.0 / params.n;
    }
    return out;
}

void SchemeConfig::validate() const {
    if (!(theta >= 0.0 && theta <= 1.0)) {
        throw ConfigError("SchemeConfig: theta must lie in [0, 1]");
    }
    if (newton_max_iter < 1) {
        throw ConfigError("SchemeConfig: newton_max_iter must be >= 1");
    }
    if (!(newton_tol > 0.0)) {
        throw ConfigError("SchemeConfig: newton_tol must be positive");
    }
    if (pia_iterations < 1) {
        throw ConfigError("SchemeConfig: pia_iterations must be >= 1");
    }
}

// ---------------------------------------------------------------------------
// ContinuationEstimator

ContinuationEstimator::ContinuationEstimator(const PathGrid& paths, PayoffSpec payoff,
                                             BasisSpec basis, bool itm_only,
                                             std::size_t min_paths_per_feature)
    : paths_(&paths),
      payoff_(payoff),
      basis_(std::move(basis)),
      itm_only_(itm_only),
      steps_(paths.steps()),
      cache_(static_cast<std::size_t>(paths.steps())) {
    payoff_.validate();
    basis_.validate();
    if (basis_.kind == BasisKind::polynomial_sorted && basis_.degree > 0 &&
        basis_.dim != paths.dim()) {
        throw ConfigError("ContinuationEstimator: basis dimension does not match the market");
    }
    const std::size_t count = basis_.count();
    if (count * min_paths_per_feature > paths.n_paths()) {
        throw InsufficientDataError("ContinuationEstimator: " + std::to_string(paths.n_paths()) +
                                    " paths is too few for " + std::to_string(count) +
                                    " basis functions");
    }

    const std::size_t stride = static_cast<std::size_t>(steps_ + 1);
    payoffs_.resize(paths.n_paths() * stride);
    for (std::size_t p = 0; p < paths.n_paths(); ++p) {
        for (int k = 0; k <= steps_; ++k) {
            payoffs_[p * stride + static_cast<std::size_t>(k)] = entstop::payoff(payoff_, paths.state(p, k));
        }
    }
}

void ContinuationEstimator::build_design(int step) {
    if (design_step_ == step) {
        return;
    }
    const auto n = static_cast<Eigen::Index>(paths_->n_paths());
    const auto cols = static_cast<Eigen::Index>(basis_.count());
    // Row-major scratch so each path writes one contiguous row.
    Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> rows(n, cols);
#pragma omp parallel for schedule(static)
    for (Eigen::Index p = 0; p < n; ++p) {
        const auto path = static_cast<std::size_t>(p);
        eval_basis_into(basis_, paths_->state(path, step), payoff(path, step),
                        std::span<double>(rows.row(p).data(), static_cast<std::size_t>(cols)));
    }
    design_ = rows;
    design_step_ = step;
}

ContinuationEstimator::StepCache& ContinuationEstimator::prepare(int step) {
    auto& cache = cache_[static_cast<std::size_t>(step)];
    if (cache.ready) {
        return cache;
    }
    build_design(step);

    const Eigen::Index n = design_.rows();
    bool same = true;
    for (Eigen::Index p = 1; p < n && same; ++p) {
        same = design_.row(p) == design_.row(0);
    }
    cache.degenerate = same;

    if (!same) {
        if (itm_only_) {
            for (Eigen::Index p = 0; p < n; ++p) {
                if (payoff(static_cast<std::size_t>(p), step) > 0.0) {
                    cache.rows.push_back(p);
                }
            }
            if (cache.rows.size() < basis_.count() * 10) {
                cache.rows.clear();  // too few in the money; fall back to all paths
            }
        }
        if (cache.rows.empty()) {
            cache.solver = std::make_unique<LeastSquaresStep>(design_);
        } else {
            cache.solver = std::make_unique<LeastSquaresStep>(design_(cache.rows, Eigen::all));
        }
        if (cache.solver->rank_deficient()) {
            ++rank_deficient_steps_;
        }
    }
    cache.ready = true;
    return cache;
}

Eigen::VectorXd ContinuationEstimator::project(int step, const Eigen::VectorXd& targets,
                                               Eigen::VectorXd* coefficients) {
    if (step < 0 || step >= steps_) {
        throw StateError("ContinuationEstimator: step out of range");
    }
    if (static_cast<std::size_t>(targets.size()) != paths_->n_paths()) {
        throw ConfigError("ContinuationEstimator: one target per path is required");
    }
    auto& cache = prepare(step);
    const auto cols = static_cast<Eigen::Index>(basis_.count());

    if (cache.degenerate) {
        const double mean = targets.mean();
        if (coefficients != nullptr) {
            // The first feature is the constant 1 for every built-in basis.
            *coefficients = Eigen::VectorXd::Zero(cols);
            (*coefficients)[0] = mean;
        }
        return Eigen::VectorXd::Constant(targets.size(), mean);
    }

    build_design(step);
    Eigen::VectorXd coef = cache.rows.empty()
                               ? cache.solver->solve(design_, targets)
                               : cache.solver->solve(design_(cache.rows, Eigen::all),
                                                     targets(cache.rows));
    Eigen::VectorXd fitted = design_ * coef;
    if (coefficients != nullptr) {
        *coefficients = std::move(coef);
    }
    return fitted;
}

// ---------------------------------------------------------------------------
// Backward induction shared by the two penalization schemes.

namespace {

ValueSurface make_surface(const ContinuationEstimator& est) {
    ValueSurface s;
    s.n_paths = est.paths().n_paths();
    s.steps = est.paths().steps();
    s.values.assign(s.n_paths * static_cast<std::size_t>(s.steps + 1), 0.0);
    s.model = RegressionModel(est.basis(), s.steps);
    for (std::size_t p = 0; p < s.n_paths; ++p) {
        s.value(p, s.steps) = est.payoff(p, s.steps);
    }
    return s;
}

double sample_sd(const Eigen::VectorXd& x) {
    if (x.size() < 2) {
        return 0.0;
    }
    const double mean = x.mean();
    return std::sqrt((x.array() - mean).square().sum() / static_cast<double>(x.size() - 1));
}

void finish_surface(ValueSurface& s) {
    double sum = 0.0;
    for (std::size_t p = 0; p < s.n_paths; ++p) {
        sum += s.value(p, 0);
    }
    s.price = sum / static_cast<double>(s.n_paths);
    if (!std::isfinite(s.price)) {
        throw NumericError("backward induction produced a non-finite price");
    }
}

// `driver(P, V)` is the generator without the discount term; `solve(P, D)`
// returns the implicit-step solution for discounted continuation value D.
template <class Driver, class Solve>
ValueSurface backward_pass(ContinuationEstimator& est, double r, double theta, Driver driver,
                           Solve solve) {
    ValueSurface s = make_surface(est);
    const auto n_paths = static_cast<std::int64_t>(s.n_paths);
    const double dt = est.paths().grid().dt();
    const double disc = std::exp(-r * dt);
    const double explicit_weight = dt * (1.0 - theta);
    Eigen::VectorXd targets(n_paths);
    Eigen::VectorXd coef;

    for (int k = s.steps - 1; k >= 0; --k) {
#pragma omp parallel for schedule(static)
        for (std::int64_t ip = 0; ip < n_paths; ++ip) {
            const auto p = static_cast<std::size_t>(ip);
            const double next = s.value(p, k + 1);
            targets[ip] = explicit_weight > 0.0
                              ? next + explicit_weight * driver(est.payoff(p, k + 1), next)
                              : next;
        }
        const Eigen::VectorXd cont = est.project(k, targets, &coef);
        s.model.set(k, coef);
        if (k == 0) {
            s.std_error = disc * sample_sd(targets) / std::sqrt(static_cast<double>(n_paths));
        }
#pragma omp parallel for schedule(static)
        for (std::int64_t ip = 0; ip < n_paths; ++ip) {
            const auto p = static_cast<std::size_t>(ip);
            s.value(p, k) = solve(p, k, est.payoff(p, k), disc * cont[ip]);
        }
    }
    finish_surface(s);
    s.diagnostics["rank_deficient_steps"] = static_cast<double>(est.rank_deficient_steps());
    return s;
}


}  // namespace

// ---------------------------------------------------------------------------

ValueSurface classical_penalization(ContinuationEstimator& est, const SchemeConfig& cfg) {
    cfg.validate();
    const double n = cfg.params.n;
    const double r = cfg.params.r;
    if (!(n >= 0.0) || !std::isfinite(n)) {
        throw ConfigError("classical_penalization: n must be >= 0");
    }
    if (!(r >= 0.0) || !std::isfinite(r)) {
        throw ConfigError("classical_penalization: r must be >= 0");
    }
    const double implicit_rate = est.paths().grid().dt() * cfg.theta * n;

    auto driver = [n](double p, double v) { return n * std::max(p - v, 0.0); };
    // v = D + h (P - v)^+ is piecewise linear in v: either v = D (P <= D) or
    // v = (D + h P) / (1 + h) with P > v.
    auto solve = [implicit_rate](std::size_t, int, double p, double d) {
        return p <= d ? d : (d + implicit_rate * p) / (1.0 + implicit_rate);
    };
    return backward_pass(est, r, cfg.theta, driver, solve);
}

ValueSurface classical_penalization(const PathGrid& paths, const PayoffSpec& spec,
                                    const SchemeConfig& cfg, const BasisSpec& basis) {
    ContinuationEstimator est(paths, spec, basis, cfg.regress_itm_only, cfg.min_paths_per_feature);
    return classical_penalization(est, cfg);
}

ValueSurface entropy_implicit(ContinuationEstimator& est, const SchemeConfig& cfg) {
    cfg.validate();
    const DriverParams params = cfg.effective_params();
    params.validate();

    const double lambda = params.lambda;
    const double n = params.n;
    const double log_n = std::log(n);
    const double h = est.paths().grid().dt() * cfg.theta;
    const int max_iter = cfg.newton_max_iter;
    const double tol = cfg.newton_tol;

    auto driver = [lambda, n, log_n](double p, double v) {
        return lambda * phi(n * (p - v) / lambda) + lambda * log_n;
    };

    const std::size_t cells = est.paths().n_paths() * static_cast<std::size_t>(est.paths().steps());
    std::vector<int> iterations(cells, 0);
    std::vector<double> residuals(cells, 0.0);
    const auto steps = static_cast<std::size_t>(est.paths().steps());

    // F(v) = v - D - h f(v) is increasing and concave with F' >= 1.
    auto solve = [&](std::size_t path, int k, double p, double d) {
        double v = std::max(d, p);
        double resid = 0.0;
        int it = 0;
        for (;;) {
            const double y = n * (p - v) / lambda;
            resid = v - d - h * (lambda * phi(y) + lambda * log_n);
            if (std::abs(resid) < tol || it >= max_iter) {
                break;
            }
            const double slope = 1.0 + h * n * phi_prime(y);
            v -= resid / slope;
            ++it;
        }
        const std::size_t cell = path * steps + static_cast<std::size_t>(k);
        iterations[cell] = it;
        residuals[cell] = std::abs(resid);
        return v;
    };

    ValueSurface s = backward_pass(est, params.r, cfg.theta, driver, solve);

    double total_iter = 0.0;
    double warnings = 0.0;
    double max_resid = 0.0;
    for (std::size_t c = 0; c < cells; ++c) {
        total_iter += iterations[c];
        if (residuals[c] >= tol) {
            warnings += 1.0;
        } else {
            max_resid = std::max(max_resid, residuals[c]);
        }
    }
    s.diagnostics["newton_iterations"] = total_iter;
    s.diagnostics["newton_warnings"] = warnings;
    s.diagnostics["max_newton_residual"] = max_resid;
    return s;
}

ValueSurface entropy_implicit(const PathGrid& paths, const PayoffSpec& spec,
                              const SchemeConfig& cfg, const BasisSpec& basis) {
    ContinuationEstimator est(paths, spec, basis, cfg.regress_itm_only, cfg.min_paths_per_feature);
    return entropy_implicit(est, cfg);
}

// ---------------------------------------------------------------------------

double pia_linear_step(double a, double b, double dt, double continuation) {
    const double one_minus = -std::expm1(-a * dt);
    const double source = a != 0.0 ? b * one_minus / a : b * dt;
    return (1.0 - one_minus) * continuation + source;
}

ValueSurface pia(ContinuationEstimator& est, const SchemeConfig& cfg,
                 const PIAObserver& observer) {
    cfg.validate();
    const DriverParams params = cfg.effective_params();
    params.validate();

    const double lambda = params.lambda;
    const double n = params.n;
    const double r = params.r;
    const double log_n = std::log(n);
    const double dt = est.paths().grid().dt();
    const std::size_t n_paths = est.paths().n_paths();
    const int steps = est.paths().steps();
    const auto stride = static_cast<std::size_t>(steps);

    // Initial guess V^0_{t_k} = P_{t_k} + 1.
    ValueSurface prev = make_surface(est);
    for (std::size_t p = 0; p < n_paths; ++p) {
        for (int k = 0; k < steps; ++k) {
            prev.value(p, k) = est.payoff(p, k) + 1.0;
        }
    }

    // Linearization point of the next policy update; V^0 on the first pass.
    std::vector<double> reference(n_paths * stride);
    for (std::size_t p = 0; p < n_paths; ++p) {
        for (int k = 0; k < steps; ++k) {
            reference[p * stride + static_cast<std::size_t>(k)] = prev.value(p, k);
        }
    }
    const bool use_continuation = cfg.pia_reference == PIAReference::continuation;
    const double disc = std::exp(-r * dt);

    std::vector<double> policy_mean(n_paths * stride);
    std::vector<double> decay(n_paths * stride);   // e^{-a dt}
    std::vector<double> source(n_paths * stride);  // (b / a)(1 - e^{-a dt})
    Eigen::VectorXd targets(static_cast<Eigen::Index>(n_paths));
    Eigen::VectorXd coef;

    ValueSurface cur;
    for (int m = 0; m < cfg.pia_iterations; ++m) {
        // Policy update.
#pragma omp parallel for schedule(static)
        for (std::int64_t ip = 0; ip < static_cast<std::int64_t>(n_paths); ++ip) {
            const auto p = static_cast<std::size_t>(ip);
            for (int k = 0; k < steps; ++k) {
                const std::size_t cell = p * stride + static_cast<std::size_t>(k);
                const double pay = est.payoff(p, k);
                const double v = reference[cell];
                const double alpha = (pay - v) / lambda;
                const double mu = gibbs_mean(alpha, n);
                const double a = mu + r;
                const double b = lambda * phi(n * alpha) + lambda * log_n + v * mu;
                const double one_minus = -std::expm1(-a * dt);
                policy_mean[cell] = mu;
                decay[cell] = 1.0 - one_minus;
                source[cell] = a > 0.0 ? b * one_minus / a : b * dt;
            }
        }

        // Policy evaluation.
        cur = make_surface(est);
        for (int k = steps - 1; k >= 0; --k) {
            for (std::size_t p = 0; p < n_paths; ++p) {
                targets[static_cast<Eigen::Index>(p)] = cur.value(p, k + 1);
            }
            const Eigen::VectorXd cont = est.project(k, targets, &coef);
            cur.model.set(k, coef);
            if (k == 0) {
                cur.std_error = decay[0] * sample_sd(targets) /
                                std::sqrt(static_cast<double>(n_paths));
            }
#pragma omp parallel for schedule(static)
            for (std::int64_t ip = 0; ip < static_cast<std::int64_t>(n_paths); ++ip) {
                const auto p = static_cast<std::size_t>(ip);
                const std::size_t cell = p * stride + static_cast<std::size_t>(k);
                cur.value(p, k) = decay[cell] * cont[ip] + source[cell];
                reference[cell] = use_continuation ? disc * cont[ip] : cur.value(p, k);
            }
        }
        finish_surface(cur);
        cur.diagnostics["pia_iterations"] = m + 1;
        cur.diagnostics["rank_deficient_steps"] = static_cast<double>(est.rank_deficient_steps());

        if (observer) {
            observer(PIAState{m + 1, &cur, &policy_mean});
        }
        if (m + 1 < cfg.pia_iterations) {
            std::swap(prev, cur);
        }
    }
    return cur;
}

ValueSurface pia(const PathGrid& paths, const PayoffSpec& spec, const SchemeConfig& cfg,
                 const BasisSpec& basis, const PIAObserver& observer) {
    ContinuationEstimator est(paths, spec, basis, cfg.regress_itm_only, cfg.min_paths_per_feature);
    return pia(est, cfg, observer);
}

// ---------------------------------------------------------------------------

PolicyEstimate evaluate_randomized_policy(const PathGrid& paths, const PayoffSpec& spec,
                                          const std::vector<double>& intensity, double r) {
    const std::size_t n_paths = paths.n_paths();
    const int steps = paths.steps();
    const auto stride = static_cast<std::size_t>(steps);
    if (intensity.size() != n_paths * stride) {
        throw ConfigError("evaluate_randomized_policy: intensity must be P x N");
    }
    for (double g : intensity) {
        if (!(g >= 0.0) || !std::isfinite(g)) {
            throw DomainError("evaluate_randomized_policy: intensity must be finite and non-negative");
        }
    }
    const double dt = paths.grid().dt();

    std::vector<double> pathwise(n_paths);
#pragma omp parallel for schedule(static)
    for (std::int64_t ip = 0; ip < static_cast<std::int64_t>(n_paths); ++ip) {
        const auto p = static_cast<std::size_t>(ip);
        double survival = 1.0;
        double value = 0.0;
        for (int k = 0; k < steps; ++k) {
            const double next_survival =
                survival * std::exp(-intensity[p * stride + static_cast<std::size_t>(k)] * dt);
            value += std::exp(-r * paths.grid().time(k)) * payoff(spec, paths.state(p, k)) *
                     (survival - next_survival);
            survival = next_survival;
        }
        value += std::exp(-r * paths.grid().horizon()) * payoff(spec, paths.state(p, steps)) * survival;
        pathwise[p] = value;
    }

    const Eigen::Map<const Eigen::VectorXd> x(pathwise.data(), static_cast<Eigen::Index>(n_paths));
    return PolicyEstimate{x.mean(), sample_sd(x) / std::sqrt(static_cast<double>(n_paths))};
}

std::vector<double> entropy_stopping_intensity(const ValueSurface& surface,
                                               const ContinuationEstimator& est,
                                               const DriverParams& params) {
    const auto stride = static_cast<std::size_t>(surface.steps);
    std::vector<double> out(surface.n_paths * stride);
    for (std::size_t p = 0; p < surface.n_paths; ++p) {
        for (int k = 0; k < surface.steps; ++k) {
            const double y = params.n * (est.payoff(p, k) - surface.value(p, k)) / params.lambda;
            out[p * stride + static_cast<std::size_t>(k)] = params.n * psi(y);
        }
    }
    return out;
}

std::string format_diagnostics(const Diagnostics& diagnostics) {
    std::ostringstream out;
    bool first = true;
    for (const auto& [key, value] : diagnostics) {
        if (!first) {
            out << ';';
        }
        first = false;
        out << key << '=' << value;
    }
    return out.str();
}

}  // namespace entstop
