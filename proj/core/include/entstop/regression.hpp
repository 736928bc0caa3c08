#pragma once

#include <Eigen/Dense>
#include <functional>
#include <iosfwd>
#include <optional>
#include <span>
#include <vector>

namespace entstop {

enum class BasisKind { polynomial_sorted, custom };

// Regression features for conditional expectations.
//
// polynomial_sorted: prices are sorted in decreasing order (y1 >= y2 >= ...)
// and divided by `scale`; the features are every monomial of total degree
// <= `degree` in graded order, followed (if include_payoff_terms) by
// g, g^2, g*yd where g = payoff / scale and yd is the smallest price (g^3
// when d = 1). With d = 2, degree 3 and payoff terms this is the
// 13-function default:
//   1, y1, y2, y1^2, y1 y2, y2^2, y1^3, y1^2 y2, y1 y2^2, y2^3, g, g^2, g y2
struct BasisSpec {
    using CustomFn =
        std::function<void(std::span<const double> state, double payoff, std::span<double> out)>;

    BasisKind kind = BasisKind::polynomial_sorted;
    int degree = 3;
    bool include_payoff_terms = true;
    double scale = 1.0;
    std::size_t dim = 2;     // number of assets the basis is built for
    std::size_t custom_count = 0;
    CustomFn custom;

    std::size_t count() const;
    void validate() const;

    static BasisSpec constant_only();
    static BasisSpec default_for(std::size_t dim, double scale);
};

void eval_basis_into(const BasisSpec& spec, std::span<const double> state, double payoff_value,
                     std::span<double> out);
std::vector<double> eval_basis(const BasisSpec& spec, std::span<const double> state,
                               double payoff_value);

struct FitResult {
    Eigen::VectorXd coefficients;
    bool rank_deficient = false;
};

inline constexpr double kRidge = 1e-10;

// Least squares by column-pivoted Householder QR. A rank-deficient design
// gets a ridge term kRidge * I and the flag set.
FitResult fit(const Eigen::MatrixXd& design, const Eigen::VectorXd& targets);

// Least-squares projector for one fixed design matrix. The triangular factor
// of the QR is kept so that many target vectors can be regressed on the same
// design (all backward passes on one path set share their designs); each
// solve runs the corrected semi-normal equations on that factor.
class LeastSquaresStep {
public:
    explicit LeastSquaresStep(const Eigen::MatrixXd& design);

    Eigen::VectorXd solve(const Eigen::MatrixXd& design, const Eigen::VectorXd& targets) const;
    bool rank_deficient() const noexcept { return rank_deficient_; }
    Eigen::Index cols() const noexcept { return r_.cols(); }

private:
    Eigen::VectorXd apply_normal_inverse(const Eigen::VectorXd& rhs) const;

    Eigen::MatrixXd r_;  // R of [X; sqrt(ridge) I] * P, upper triangular
    Eigen::PermutationMatrix<Eigen::Dynamic, Eigen::Dynamic> perm_;
    double ridge_ = 0.0;
    bool rank_deficient_ = false;
};

// Per-timestep fitted coefficients.
class RegressionModel {
public:
    RegressionModel() = default;
    RegressionModel(BasisSpec spec, int steps);

    const BasisSpec& spec() const noexcept { return spec_; }
    int steps() const noexcept { return static_cast<int>(coefficients_.size()); }

    void set(int step, Eigen::VectorXd coefficients);
    bool fitted(int step) const;
    const Eigen::VectorXd& coefficients(int step) const;

    // Throws StateError if `step` has not been fitted.
    double predict(int step, std::span<const double> state, double payoff_value) const;

    // step,index,coefficient
    void write_csv(std::ostream& out) const;

private:
    BasisSpec spec_;
    std::vector<std::optional<Eigen::VectorXd>> coefficients_;
};

}  // namespace entstop
