#include "entstop/regression.hpp"

#include <array>
#include <algorithm>
#include <cmath>
#include <functional>
#include <ostream>
#include <string>

#include "entstop/errors.hpp"

namespace entstop {

namespace {

constexpr std::size_t kMaxSortedDim = 16;

// Number of monomials of total degree <= deg in `dim` variables.
std::size_t monomial_count(std::size_t dim, int deg) {
    // C(dim + deg, deg)
    std::size_t num = 1;
    for (int j = 1; j <= deg; ++j) {
        num = num * (dim + static_cast<std::size_t>(j)) / static_cast<std::size_t>(j);
    }
    return num;
}

// Writes every monomial of exact degree `deg` in y[first..dim) times `prefix`,
// in graded lexicographic order.
void emit_monomials(std::span<const double> y, std::size_t first, int deg, double prefix,
                    std::span<double> out, std::size_t& pos) {
    if (deg == 0) {
        out[pos++] = prefix;
        return;
    }
    for (std::size_t i = first; i < y.size(); ++i) {
        emit_monomials(y, i, deg - 1, prefix * y[i], out, pos);
    }
}

}  // namespace

std::size_t BasisSpec::count() const {
    if (kind == BasisKind::custom) {
        return custom_count;
    }
    return monomial_count(dim, degree) + (include_payoff_terms ? 3 : 0);
}

void BasisSpec::validate() const {
    if (kind == BasisKind::custom) {
        if (custom_count < 1 || !custom) {
            throw ConfigError("BasisSpec: custom basis needs a function and count >= 1");
        }
        return;
    }
    if (degree < 0 || degree > 8) {
        throw ConfigError("BasisSpec: degree must be in [0, 8]");
    }
    if (dim < 1 || dim > kMaxSortedDim) {
        throw ConfigError("BasisSpec: dimension must be in [1, 16]");
    }
    if (!(scale > 0.0)) {
        throw ConfigError("BasisSpec: scale must be positive");
    }
}

BasisSpec BasisSpec::constant_only() {
    BasisSpec spec;
    spec.degree = 0;
    spec.include_payoff_terms = false;
    spec.dim = 1;
    return spec;
}

BasisSpec BasisSpec::default_for(std::size_t dim, double scale) {
    BasisSpec spec;
    spec.dim = dim;
    spec.scale = scale;
    return spec;
}

void eval_basis_into(const BasisSpec& spec, std::span<const double> state, double payoff_value,
                     std::span<double> out) {
    if (spec.kind == BasisKind::custom) {
        spec.custom(state, payoff_value, out);
        return;
    }
    std::array<double, kMaxSortedDim> sorted{};
    const std::size_t d = spec.degree == 0 ? 0 : spec.dim;
    std::transform(state.begin(), state.begin() + static_cast<std::ptrdiff_t>(d), sorted.begin(),
                   [&](double s) { return s / spec.scale; });
    std::sort(sorted.begin(), sorted.begin() + static_cast<std::ptrdiff_t>(d),
              std::greater<>());
    const std::span<const double> y(sorted.data(), d);

    std::size_t pos = 0;
    for (int deg = 0; deg <= spec.degree; ++deg) {
        emit_monomials(y, 0, deg, 1.0, out, pos);
    }
    if (spec.include_payoff_terms) {
        const double g = payoff_value / spec.scale;
        out[pos++] = g;
        out[pos++] = g * g;
        // g * y1 would equal g^2 + g for a max-call, so pair g with the lowest price.
        out[pos++] = d > 1 ? g * y[d - 1] : g * g * g;
    }
}

std::vector<double> eval_basis(const BasisSpec& spec, std::span<const double> state,
                               double payoff_value) {
    std::vector<double> out(spec.count());
    eval_basis_into(spec, state, payoff_value, out);
    return out;
}

FitResult fit(const Eigen::MatrixXd& design, const Eigen::VectorXd& targets) {
    const Eigen::Index rows = design.rows();
    const Eigen::Index cols = design.cols();
    if (rows < cols) {
        throw InsufficientDataError("fit: " + std::to_string(rows) + " samples for " +
                                    std::to_string(cols) + " basis functions");
    }
    if (targets.size() != rows) {
        throw ConfigError("fit: design and target sizes differ");
    }

    FitResult res;
    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(design);
    if (qr.rank() == cols) {
        res.coefficients = qr.solve(targets);
    } else {
        Eigen::MatrixXd augmented(rows + cols, cols);
        augmented << design, std::sqrt(kRidge) * Eigen::MatrixXd::Identity(cols, cols);
        Eigen::VectorXd rhs = Eigen::VectorXd::Zero(rows + cols);
        rhs.head(rows) = targets;
        res.coefficients = augmented.householderQr().solve(rhs);
        res.rank_deficient = true;
    }
    if (!res.coefficients.allFinite()) {
        throw NumericError("fit: non-finite regression coefficients");
    }
    return res;
}

LeastSquaresStep::LeastSquaresStep(const Eigen::MatrixXd& design) {
    const Eigen::Index rows = design.rows();
    const Eigen::Index cols = design.cols();
    if (rows < cols) {
        throw InsufficientDataError("LeastSquaresStep: " + std::to_string(rows) +
                                    " samples for " + std::to_string(cols) +
                                    " basis functions");
    }
    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(design);
    if (qr.rank() < cols) {
        rank_deficient_ = true;
        ridge_ = kRidge;
        Eigen::MatrixXd augmented(rows + cols, cols);
        augmented << design, std::sqrt(kRidge) * Eigen::MatrixXd::Identity(cols, cols);
        qr.compute(augmented);
    }
    r_ = qr.matrixR().topRows(cols).triangularView<Eigen::Upper>();
    perm_ = qr.colsPermutation();
}

Eigen::VectorXd LeastSquaresStep::apply_normal_inverse(const Eigen::VectorXd& rhs) const {
    // (X^T X + ridge I)^{-1} rhs with X P = Q R  =>  P R^{-1} R^{-T} P^T rhs
    Eigen::VectorXd z = perm_.transpose() * rhs;
    r_.triangularView<Eigen::Upper>().transpose().solveInPlace(z);
    r_.triangularView<Eigen::Upper>().solveInPlace(z);
    return perm_ * z;
}

Eigen::VectorXd LeastSquaresStep::solve(const Eigen::MatrixXd& design,
                                        const Eigen::VectorXd& targets) const {
    Eigen::VectorXd coef = apply_normal_inverse(design.transpose() * targets);
    // One step of refinement on the residual.
    const Eigen::VectorXd residual = targets - design * coef;
    Eigen::VectorXd grad = design.transpose() * residual;
    if (ridge_ > 0.0) {
        grad -= ridge_ * coef;
    }
    coef += apply_normal_inverse(grad);
    if (!coef.allFinite()) {
        throw NumericError("LeastSquaresStep: non-finite regression coefficients");
    }
    return coef;
}

RegressionModel::RegressionModel(BasisSpec spec, int steps)
    : spec_(std::move(spec)), coefficients_(static_cast<std::size_t>(steps)) {}

void RegressionModel::set(int step, Eigen::VectorXd coefficients) {
    if (step < 0 || step >= steps()) {
        throw StateError("RegressionModel: step out of range");
    }
    if (!coefficients.allFinite()) {
        throw NumericError("RegressionModel: non-finite coefficients");
    }
    coefficients_[static_cast<std::size_t>(step)] = std::move(coefficients);
}

bool RegressionModel::fitted(int step) const {
    return step >= 0 && step < steps() && coefficients_[static_cast<std::size_t>(step)].has_value();
}

const Eigen::VectorXd& RegressionModel::coefficients(int step) const {
    if (!fitted(step)) {
        throw StateError("RegressionModel: step " + std::to_string(step) + " is not fitted");
    }
    return *coefficients_[static_cast<std::size_t>(step)];
}

double RegressionModel::predict(int step, std::span<const double> state,
                                double payoff_value) const {
    const auto& coef = coefficients(step);
    const auto features = eval_basis(spec_, state, payoff_value);
    return Eigen::Map<const Eigen::VectorXd>(features.data(),
                                             static_cast<Eigen::Index>(features.size()))
        .dot(coef);
}

void RegressionModel::write_csv(std::ostream& out) const {
    const auto old_precision = out.precision(17);
    out << "step,index,coefficient\n";
    for (int k = 0; k < steps(); ++k) {
        if (!fitted(k)) {
            continue;
        }
        const auto& coef = coefficients(k);
        for (Eigen::Index j = 0; j < coef.size(); ++j) {
            out << k << ',' << j << ',' << coef[j] << '\n';
        }
    }
    out.precision(old_precision);
}

}  // namespace entstop
