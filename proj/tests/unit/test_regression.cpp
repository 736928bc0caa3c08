#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <sstream>
#include <vector>

#include <Eigen/Dense>

#include "doctest.h"

#include "entstop/errors.hpp"
#include "entstop/regression.hpp"

using namespace entstop;

namespace {

Eigen::MatrixXd random_design(int rows, int cols, unsigned seed) {
    std::mt19937_64 gen(seed);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    Eigen::MatrixXd x(rows, cols);
    for (int i = 0; i < rows; ++i) {
        x(i, 0) = 1.0;
        for (int j = 1; j < cols; ++j) {
            x(i, j) = u(gen);
        }
    }
    return x;
}

}  // namespace

TEST_SUITE("regression") {

TEST_CASE("basis evaluation") {
    const auto c = BasisSpec::constant_only();
    CHECK(c.count() == 1);
    CHECK(eval_basis(c, std::vector<double>{3.0, 4.0}, 1.0) == std::vector<double>{1.0});

    BasisSpec lin;
    lin.degree = 1;
    lin.include_payoff_terms = false;
    CHECK(eval_basis(lin, std::vector<double>{5.0, 7.0}, 0.0) == std::vector<double>{1.0, 7.0, 5.0});

    const auto def = BasisSpec::default_for(2, 100.0);
    CHECK(def.count() == 13);
    const auto f = eval_basis(def, std::vector<double>{100.0, 90.0}, 0.0);
    REQUIRE(f.size() == 13);
    const std::vector<double> expected{1.0, 1.0, 0.9, 1.0, 0.9, 0.81, 1.0, 0.9, 0.81, 0.729,
                                       0.0, 0.0, 0.0};
    for (std::size_t i = 0; i < 13; ++i) {
        CHECK(f[i] == doctest::Approx(expected[i]).epsilon(1e-15));
    }
    const auto itm = eval_basis(def, std::vector<double>{90.0, 120.0}, 20.0);
    CHECK(itm[10] == doctest::Approx(0.2));
    CHECK(itm[11] == doctest::Approx(0.04));
    CHECK(itm[12] == doctest::Approx(0.2 * 0.9));
}

TEST_CASE("default basis has full column rank on a spread of max-call states") {
    const auto def = BasisSpec::default_for(2, 100.0);
    std::mt19937_64 gen(3);
    std::lognormal_distribution<double> ln(std::log(100.0), 0.3);
    Eigen::MatrixXd x(2000, 13);
    for (int i = 0; i < 2000; ++i) {
        const std::vector<double> s{ln(gen), ln(gen)};
        const auto row = eval_basis(def, s, std::max(0.0, std::max(s[0], s[1]) - 100.0));
        for (int j = 0; j < 13; ++j) {
            x(i, j) = row[static_cast<std::size_t>(j)];
        }
    }
    CHECK_FALSE(fit(x, Eigen::VectorXd::Ones(2000)).rank_deficient);
}

TEST_CASE("exact span and constants") {
    const auto x = random_design(200, 4, 1);
    const Eigen::Vector4d beta(1.5, -2.0, 0.25, 3.0);
    const Eigen::VectorXd y = x * beta;
    const auto res = fit(x, y);
    CHECK((x * res.coefficients - y).norm() <= 1e-8 * y.norm());

    const Eigen::MatrixXd ones = Eigen::MatrixXd::Ones(50, 1);
    const auto c = fit(ones, Eigen::VectorXd::Constant(50, 4.25));
    CHECK(c.coefficients[0] == doctest::Approx(4.25).epsilon(1e-14));
}

TEST_CASE("noisy linear data against the normal equations") {
    std::mt19937_64 gen(2024);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    std::normal_distribution<double> noise(0.0, 0.01);
    const int n = 10000;
    Eigen::MatrixXd x(n, 2);
    Eigen::VectorXd y(n);
    for (int i = 0; i < n; ++i) {
        const double xi = u(gen);
        x(i, 0) = 1.0;
        x(i, 1) = xi;
        y[i] = 2.0 + 3.0 * xi + noise(gen);
    }
    const auto res = fit(x, y);
    const Eigen::VectorXd normal = (x.transpose() * x).ldlt().solve(x.transpose() * y);
    CHECK((res.coefficients - normal).cwiseAbs().maxCoeff() <= 1e-6);
    CHECK(std::abs(res.coefficients[0] - 2.0) <= 0.01);
    CHECK(std::abs(res.coefficients[1] - 3.0) <= 0.01);

    RegressionModel model(BasisSpec{}, 1);
    BasisSpec lin;
    lin.degree = 1;
    lin.dim = 1;
    lin.include_payoff_terms = false;
    RegressionModel m1(lin, 1);
    m1.set(0, res.coefficients);
    CHECK(std::abs(m1.predict(0, std::vector<double>{0.4}, 0.0) - (2.0 + 3.0 * 0.4)) <= 0.02);
}

TEST_CASE("cached factorization reproduces direct fits") {
    const auto x = random_design(500, 6, 5);
    std::mt19937_64 gen(6);
    std::normal_distribution<double> z;
    const LeastSquaresStep step(x);
    CHECK_FALSE(step.rank_deficient());
    for (int trial = 0; trial < 3; ++trial) {
        Eigen::VectorXd y(500);
        for (auto& v : y) {
            v = z(gen);
        }
        const Eigen::VectorXd normal = (x.transpose() * x).ldlt().solve(x.transpose() * y);
        CHECK((step.solve(x, y) - normal).cwiseAbs().maxCoeff() <= 1e-10);
        CHECK((fit(x, y).coefficients - normal).cwiseAbs().maxCoeff() <= 1e-10);
    }
}

TEST_CASE("residuals are orthogonal to the basis") {
    const auto x = random_design(1000, 5, 8);
    std::mt19937_64 gen(9);
    std::normal_distribution<double> z;
    Eigen::VectorXd y(1000);
    for (int i = 0; i < 1000; ++i) {
        y[i] = std::sin(3.0 * x(i, 1)) + x(i, 2) * x(i, 3) + 0.1 * z(gen);
    }
    const auto res = fit(x, y);
    const Eigen::VectorXd resid = y - x * res.coefficients;
    for (int j = 0; j < 5; ++j) {
        CHECK(std::abs(x.col(j).dot(resid)) <= 1e-6 * x.col(j).norm() * y.norm());
    }
}

TEST_CASE("fit is invariant under row reordering") {
    const auto x = random_design(300, 4, 10);
    Eigen::VectorXd y = x.col(1).array().square() + x.col(2).array();
    std::vector<int> perm(300);
    std::iota(perm.begin(), perm.end(), 0);
    std::shuffle(perm.begin(), perm.end(), std::mt19937(1));
    Eigen::MatrixXd xp(300, 4);
    Eigen::VectorXd yp(300);
    for (int i = 0; i < 300; ++i) {
        xp.row(i) = x.row(perm[static_cast<std::size_t>(i)]);
        yp[i] = y[perm[static_cast<std::size_t>(i)]];
    }
    CHECK((fit(x, y).coefficients - fit(xp, yp).coefficients).cwiseAbs().maxCoeff() <= 1e-12);
}

TEST_CASE("rank deficiency is flagged and still solved") {
    auto x = random_design(100, 4, 12);
    x.col(3) = 2.0 * x.col(1);
    const Eigen::VectorXd y = x.col(1) + x.col(2);
    const auto res = fit(x, y);
    CHECK(res.rank_deficient);
    CHECK((x * res.coefficients - y).norm() <= 1e-4 * y.norm());
    CHECK(LeastSquaresStep(x).rank_deficient());
}

TEST_CASE("errors") {
    CHECK_THROWS_AS(fit(Eigen::MatrixXd::Ones(3, 5), Eigen::VectorXd::Ones(3)), InsufficientDataError);
    RegressionModel model(BasisSpec::constant_only(), 3);
    CHECK_FALSE(model.fitted(1));
    CHECK_THROWS_AS(model.predict(1, std::vector<double>{1.0}, 0.0), StateError);
    model.set(1, Eigen::VectorXd::Constant(1, 2.5));
    CHECK(model.predict(1, std::vector<double>{123.0, 4.0}, 7.0) == 2.5);
    std::ostringstream out;
    model.write_csv(out);
    CHECK(out.str() == "step,index,coefficient\n1,0,2.5\n");
}

}  // TEST_SUITE
