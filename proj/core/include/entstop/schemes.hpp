#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include "entstop/drivers.hpp"
#include "entstop/market.hpp"
#include "entstop/regression.hpp"

namespace entstop {

// Point around which the PIA linearizes the driver at (t_k, path).
//   value:        the previous iterate V^m_{t_k} itself.
//   continuation: e^{-r dt} E[V^m_{t_{k+1}} | F_{t_k}], the value of the previous
//                 policy before the decision at t_k is taken.
enum class PIAReference { value, continuation };

struct SchemeConfig {
    DriverParams params;
    double theta = 1.0;  // weight of the implicit endpoint in the time step
    int newton_max_iter = 20;
    double newton_tol = 1e-10;
    int pia_iterations = 10;
    PIAReference pia_reference = PIAReference::continuation;
    bool couple_lambda_n = false;    // when set, lambda is taken as 1/n
    bool regress_itm_only = false;   // fit continuation values on in-the-money paths only
    std::size_t min_paths_per_feature = 10;

    // Returns params with the lambda = 1/n coupling applied.
    DriverParams effective_params() const;
    void validate() const;
};

using Diagnostics = std::map<std::string, double>;

// Per-path value estimates V_{t_k}, path-major (P x (N+1)).
struct ValueSurface {
    std::size_t n_paths = 0;
    int steps = 0;
    std::vector<double> values;
    double price = 0.0;
    double std_error = 0.0;
    Diagnostics diagnostics;
    RegressionModel model;  // continuation-value regressions of the last backward pass

    double value(std::size_t path, int step) const {
        return values[path * static_cast<std::size_t>(steps + 1) + static_cast<std::size_t>(step)];
    }
    double& value(std::size_t path, int step) {
        return values[path * static_cast<std::size_t>(steps + 1) + static_cast<std::size_t>(step)];
    }
};

// Conditional expectations E[ . | F_{t_k}] by regression on one PathGrid.
//
// The QR factor of each step's design is computed once and reused by every
// subsequent projection at that step, so all schemes run on one estimator
// share the factorization cost. Steps at which every path sits at the same
// state (t_0) are projected onto the constant, i.e. by the sample mean.
class ContinuationEstimator {
public:
    ContinuationEstimator(const PathGrid& paths, PayoffSpec payoff, BasisSpec basis,
                          bool itm_only = false, std::size_t min_paths_per_feature = 10);

    const PathGrid& paths() const noexcept { return *paths_; }
    const PayoffSpec& payoff_spec() const noexcept { return payoff_; }
    const BasisSpec& basis() const noexcept { return basis_; }

    // Payoff P_{t_k} on path p.
    double payoff(std::size_t path, int step) const noexcept {
        return payoffs_[path * static_cast<std::size_t>(steps_ + 1) + static_cast<std::size_t>(step)];
    }

    // Fitted values of `targets` (one per path) regressed on the step-k basis.
    // The coefficients are written to `coefficients` when non-null.
    Eigen::VectorXd project(int step, const Eigen::VectorXd& targets,
                            Eigen::VectorXd* coefficients = nullptr);

    std::int64_t rank_deficient_steps() const noexcept { return rank_deficient_steps_; }

private:
    struct StepCache {
        bool ready = false;
        bool degenerate = false;  // all paths share one state
        std::vector<Eigen::Index> rows;  // fitting rows (empty = all)
        std::unique_ptr<LeastSquaresStep> solver;
    };

    void build_design(int step);
    StepCache& prepare(int step);

    const PathGrid* paths_;
    PayoffSpec payoff_;
    BasisSpec basis_;
    bool itm_only_;
    int steps_;
    std::vector<double> payoffs_;
    std::vector<StepCache> cache_;
    Eigen::MatrixXd design_;
    int design_step_ = -1;
    std::int64_t rank_deficient_steps_ = 0;
};

// V_{t_k} = e^{-r dt} E[V_{t_{k+1}} + dt (1-theta) f_{k+1} | F_{t_k}] + dt theta n (P_{t_k} - V_{t_k})^+
// with f = n (P - V)^+. Discounting enters through the exact factor e^{-r dt};
// the implicit kink equation is solved in closed form. n = 0 gives the
// European price.
ValueSurface classical_penalization(const PathGrid& paths, const PayoffSpec& spec,
                                    const SchemeConfig& cfg, const BasisSpec& basis);
ValueSurface classical_penalization(ContinuationEstimator& estimator, const SchemeConfig& cfg);

// Same recursion with the entropy-regularized generator
// f(v) = lambda Phi(n (P - v) / lambda) + lambda ln n; the implicit equation
// is solved per path by Newton's method started at max(e^{-r dt} C_k, P_{t_k}).
ValueSurface entropy_implicit(const PathGrid& paths, const PayoffSpec& spec,
                              const SchemeConfig& cfg, const BasisSpec& basis);
ValueSurface entropy_implicit(ContinuationEstimator& estimator, const SchemeConfig& cfg);

// Snapshot handed to the PIA observer after each policy evaluation.
struct PIAState {
    int iterate = 0;                 // m + 1
    const ValueSurface* surface = nullptr;
    const std::vector<double>* policy_mean = nullptr;  // P x N, mean of pi^{m+1}
};

using PIAObserver = std::function<void(const PIAState&)>;

// Policy improvement: starting from V^0_{t_k} = P_{t_k} + 1, alternate the
// Gibbs policy update (through its mean mu) and the linear evaluation
//   V_{t_k} = e^{-a dt} E[V_{t_{k+1}} | F_{t_k}] + (b / a)(1 - e^{-a dt}),
//   a = mu + r,  b = lambda Phi(n (P - R) / lambda) + lambda ln n + R mu,
// mu = mu((P - R) / lambda, n), with R the reference of cfg.pia_reference
// (R = V^0 on the first iteration). Returns the last iterate.
//
// With R = V^m a cell where V^m < P is stopped at rate ~n and its next value
// is P again, so a wrongly stopped cell only recovers through e^{-n dt}; for
// n dt >> 1 the iteration stalls near its first policy.
ValueSurface pia(const PathGrid& paths, const PayoffSpec& spec, const SchemeConfig& cfg,
                 const BasisSpec& basis, const PIAObserver& observer = {});
ValueSurface pia(ContinuationEstimator& estimator, const SchemeConfig& cfg,
                 const PIAObserver& observer = {});

// One step of the linear evaluation: e^{-a dt} continuation + (b / a)(1 - e^{-a dt}),
// with the a -> 0 limit continuation + b dt.
double pia_linear_step(double a, double b, double dt, double continuation);

struct PolicyEstimate {
    double price = 0.0;
    double std_error = 0.0;
};

// Value of the randomized stopping rule with piecewise-constant intensity
// gamma_{p,k} on [t_k, t_{k+1}) (P x N, path-major):
//   E[ sum_k e^{-r t_k} P_{t_k} (e^{-Gamma_k} - e^{-Gamma_{k+1}}) + e^{-rT} P_T e^{-Gamma_N} ].
PolicyEstimate evaluate_randomized_policy(const PathGrid& paths, const PayoffSpec& spec,
                                          const std::vector<double>& intensity, double r);

// Stopping intensity n Psi(n (P - V) / lambda) implied by an entropy surface.
std::vector<double> entropy_stopping_intensity(const ValueSurface& surface,
                                               const ContinuationEstimator& estimator,
                                               const DriverParams& params);

// "name=value;..." rendering of diagnostics for reports.
std::string format_diagnostics(const Diagnostics& diagnostics);

}  // namespace entstop
