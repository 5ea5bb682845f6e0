#include "oracle.hpp"
#include "support.hpp"

#include "tsreg/cpd.hpp"
#include "tsreg/error.hpp"

#include <doctest.h>

#include <cmath>
#include <random>

using namespace tsreg;
using namespace tsreg::cpd;
using doctest::Approx;

namespace {

double max_abs(const Eigen::MatrixXd& a) { return a.cwiseAbs().maxCoeff(); }

// smooth deformation of a smooth curve: a bump field plus a small rotation
PointSet deformed(const PointSet& Y, std::mt19937& rng) {
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    const double a = 0.2 * u(rng);
    const Eigen::Vector2d shift(0.3 * u(rng), 0.3 * u(rng));
    const Eigen::Vector2d bump(0.2 * u(rng), 0.2 * u(rng));
    PointSet X(Y.rows(), 2);
    for (Eigen::Index i = 0; i < Y.rows(); ++i) {
        const Eigen::Vector2d y = Y.row(i).transpose();
        Eigen::Vector2d r(std::cos(a) * y.x() - std::sin(a) * y.y(), std::sin(a) * y.x() + std::cos(a) * y.y());
        X.row(i) = (r + shift + bump * std::exp(-y.squaredNorm())).transpose();
    }
    return X;
}

} // namespace

TEST_CASE("gaussian_kernel") {
    PointSet two(2, 2);
    two << 0, 0, 1, 1;
    const Eigen::MatrixXd G = gaussian_kernel(two, 1.0);
    CHECK(G(0, 0) == 1.0);
    CHECK(G(1, 1) == 1.0);
    CHECK(G(0, 1) == Approx(std::exp(-1.0)).epsilon(1e-15));

    std::mt19937 rng(1);
    const PointSet Y = testsupport::random_points(rng, 5);
    for (double beta : {0.3, 1.0, 2.5}) {
        const Eigen::MatrixXd K = gaussian_kernel(Y, beta);
        CHECK(max_abs(K - oracle::kernel(Y, beta)) < 1e-15);
        CHECK(K == K.transpose());
    }
}

TEST_CASE("initial_sigma2") {
    PointSet x(1, 2), y(1, 2);
    x << 0, 0;
    y << 3, 4;
    CHECK(initial_sigma2(x, y) == Approx(12.5));
    CHECK(initial_sigma2(x, x) == 0.0);
    std::mt19937 rng(2);
    const PointSet X = testsupport::random_points(rng, 7), Y = testsupport::random_points(rng, 4);
    CHECK(initial_sigma2(X, Y) == Approx(oracle::initial_sigma2(X, Y)).epsilon(1e-14));
}

TEST_CASE("posterior") {
    std::mt19937 rng(3);
    SUBCASE("single component takes all the mass") {
        const PointSet X = testsupport::random_points(rng, 6);
        PointSet Z(1, 2);
        Z << 0.2, -0.1;
        const Eigen::MatrixXd P = posterior(X, Z, 0.5, 0.0, 1.0);
        CHECK(max_abs(P - Eigen::MatrixXd::Ones(1, 6)) < 1e-15);
    }
    SUBCASE("equidistant point splits evenly") {
        PointSet X(1, 2), Z(2, 2);
        X << 0, 0;
        Z << -1, 0, 1, 0;
        const Eigen::MatrixXd P = posterior(X, Z, 0.7, 0.0, 1.0);
        CHECK(P(0, 0) == Approx(0.5));
        CHECK(P(1, 0) == Approx(0.5));
    }
    SUBCASE("matches the literal Bayes quotient") {
        for (double omega : {0.0, 0.1, 0.3}) {
            const PointSet X = testsupport::random_points(rng, 6), Z = testsupport::random_points(rng, 5);
            const Eigen::MatrixXd P = posterior(X, Z, 0.4, omega, 4.0);
            CHECK(max_abs(P - oracle::posterior(X, Z, 0.4, omega, 4.0)) < 1e-12);
        }
    }
    SUBCASE("columns sum to one without outliers, survives far points") {
        PointSet X = testsupport::random_points(rng, 8), Z = testsupport::random_points(rng, 6);
        X.row(0) << 1e3, 1e3;
        const Eigen::MatrixXd P = posterior(X, Z, 1e-4, 0.0, 1.0);
        CHECK(P.allFinite());
        for (Eigen::Index n = 0; n < P.cols(); ++n) CHECK(std::abs(P.col(n).sum() - 1.0) < 1e-12);
    }
    CHECK_THROWS_AS(posterior(PointSet::Zero(2, 2), PointSet::Zero(2, 2), 0.0, 0.0, 1.0), Error);
}

TEST_CASE("transform matches the pointwise Green's function sum") {
    std::mt19937 rng(4);
    for (int t = 0; t < 10; ++t) {
        const PointSet Y = testsupport::random_points(rng, 6);
        const Eigen::MatrixXd W = testsupport::random_points(rng, 6, 0.2);
        const double beta = 0.5 + 0.2 * t;
        const PointSet Z = transform(Y, W, gaussian_kernel(Y, beta));
        CHECK(max_abs(Z - oracle::green_sum(Y, Y, W, beta)) < 1e-12);
    }
    const PointSet Y = testsupport::random_points(rng, 4);
    CHECK(transform(Y, Eigen::MatrixXd::Zero(4, 2), gaussian_kernel(Y, 1.0)) == Y);
    PointSet one(1, 2);
    one << 1, 2;
    Eigen::MatrixXd w(1, 2);
    w << 0.5, -0.5;
    CHECK(transform(one, w, gaussian_kernel(one, 1.0)) == one + w);
    CHECK_THROWS_AS(transform(Y, Eigen::MatrixXd::Zero(3, 2), gaussian_kernel(Y, 1.0)), Error);
}

TEST_CASE("objective matches the literal bound") {
    std::mt19937 rng(5);
    for (double omega : {0.0, 0.2}) {
        RegistrationConfig cfg;
        cfg.omega = omega;
        cfg.area = 3.0;
        cfg.lambda = 2.0;
        const PointSet X = testsupport::random_points(rng, 5), Y = testsupport::random_points(rng, 4);
        const Eigen::MatrixXd G = gaussian_kernel(Y, 1.0);
        const Eigen::MatrixXd W = testsupport::random_points(rng, 4, 0.3);
        const PointSet Z = transform(Y, W, G);
        const Eigen::MatrixXd P = posterior(X, Z, 0.3, omega, cfg.area);
        const double q = objective(X, Z, P, W, G, 0.3, cfg);
        CHECK(std::abs(q - oracle::objective(X, Z, P, W, G, 0.3, cfg.lambda, omega, cfg.area)) < 1e-10);
    }
}

TEST_CASE("objective structure") {
    std::mt19937 rng(6);
    const PointSet Y = testsupport::random_points(rng, 5);
    const Eigen::MatrixXd G = gaussian_kernel(Y, 1.0);
    const Eigen::MatrixXd P = Eigen::MatrixXd::Identity(5, 5);
    RegistrationConfig cfg;
    SUBCASE("coincident sets leave only the variance term") {
        const Eigen::MatrixXd W0 = Eigen::MatrixXd::Zero(5, 2);
        for (double s2 : {0.1, 1.0, 7.0}) {
            const double q = objective(Y, Y, P, W0, G, s2, cfg);
            const double constant = 5.0 * (std::log(5.0) + std::log(2.0 * std::numbers::pi));
            CHECK(q == Approx(5.0 * 2.0 / 2.0 * std::log(s2) + constant).epsilon(1e-12));
        }
    }
    SUBCASE("regulariser is quadratic in W") {
        const Eigen::MatrixXd W = testsupport::random_points(rng, 5, 0.1);
        const double base = objective(Y, Y, P, Eigen::MatrixXd::Zero(5, 2), G, 1.0, cfg);
        const double r1 = objective(Y, Y, P, W, G, 1.0, cfg) - base;
        const double r2 = objective(Y, Y, P, 2.0 * W, G, 1.0, cfg) - base;
        CHECK(r1 > 0.0);
        CHECK(r2 == Approx(4.0 * r1).epsilon(1e-10));
    }
}

TEST_CASE("m_step") {
    SUBCASE("already registered") {
        std::mt19937 rng(7);
        const PointSet Y = testsupport::random_points(rng, 6);
        const MStepResult r = m_step(Y, Y, Eigen::MatrixXd::Identity(6, 6), gaussian_kernel(Y, 1.0), 10.0, 0.5);
        CHECK(max_abs(r.W) < 1e-8);
        CHECK(r.collapsed);
    }
    SUBCASE("two-point one-dimensional system") {
        const std::array<double, 2> x{0.3, 1.4}, y{0.0, 1.0};
        const std::array<std::array<double, 2>, 2> Pa{{{0.7, 0.2}, {0.3, 0.8}}};
        PointSet X(2, 1), Y(2, 1);
        X << x[0], x[1];
        Y << y[0], y[1];
        Eigen::MatrixXd P(2, 2);
        P << Pa[0][0], Pa[0][1], Pa[1][0], Pa[1][1];
        const double lambda = 3.0, sigma2 = 0.25;
        const MStepResult r = m_step(X, Y, P, gaussian_kernel(Y, 1.0), lambda, sigma2);
        const auto w = oracle::m_step_2x2(x, y, Pa, 1.0, lambda, sigma2);
        CHECK(r.W(0, 0) == Approx(w[0]).epsilon(1e-12));
        CHECK(r.W(1, 0) == Approx(w[1]).epsilon(1e-12));
        // new variance: posterior-weighted squared residual over N_P * D
        const double z0 = y[0] + w[0] + std::exp(-0.5) * w[1];
        const double z1 = y[1] + std::exp(-0.5) * w[0] + w[1];
        const double res = Pa[0][0] * (x[0] - z0) * (x[0] - z0) + Pa[0][1] * (x[1] - z0) * (x[1] - z0) +
                           Pa[1][0] * (x[0] - z1) * (x[0] - z1) + Pa[1][1] * (x[1] - z1) * (x[1] - z1);
        CHECK(r.sigma2 == Approx(res / 2.0).epsilon(1e-12));
        CHECK_FALSE(r.collapsed);
    }
    SUBCASE("empty posterior row is regularised") {
        PointSet X(2, 2), Y(3, 2);
        X << 0, 0, 1, 0;
        Y << 0, 0, 1, 0, 5, 5;
        Eigen::MatrixXd P(3, 2);
        P << 1, 0, 0, 1, 0, 0;
        const MStepResult r = m_step(X, Y, P, gaussian_kernel(Y, 1.0), 10.0, 1.0);
        CHECK(r.W.allFinite());
    }
}

TEST_CASE("register_points self-registration is a fixpoint") {
    std::mt19937 rng(8);
    const Curve c = testsupport::random_curve(rng, 20);
    const PointSet Y = testsupport::to_matrix(c.nodes());
    const RegistrationResult r = register_points(Y, Y);
    CHECK(r.converged);
    const double diameter = (Y.colwise().maxCoeff() - Y.colwise().minCoeff()).norm();
    CHECK(max_abs(r.Z - Y) < 1e-6 * diameter);
    CHECK(max_abs(r.W) < 1e-6);
}

TEST_CASE("register_points recovers a translation") {
    // a non-periodic planar shape, so no shifted copy also fits
    PointSet Y(20, 2);
    for (int i = 0; i < 20; ++i) {
        const double t = 0.15 * i;
        Y.row(i) << t, 0.3 * std::sin(2.0 * t) + 0.05 * t * t;
    }
    PointSet X = Y;
    X.rowwise() += Eigen::RowVector2d(0.04, -0.03);
    const RegistrationResult r = register_points(X, Y);
    const double diameter = (Y.colwise().maxCoeff() - Y.colwise().minCoeff()).norm();
    CHECK(r.iterations <= 100);
    CHECK(max_abs(r.Z - X) < 1e-2 * diameter);
}

TEST_CASE("register_points is monotone and consistent") {
    std::mt19937 rng(9);
    for (int t = 0; t < 10; ++t) {
        const Curve c = testsupport::random_curve(rng, 15 + static_cast<std::size_t>(t) * 3);
        PointSet Y = testsupport::to_matrix(c.nodes());
        Y /= (Y.colwise().maxCoeff() - Y.colwise().minCoeff()).norm();
        const PointSet X = deformed(Y, rng);
        const RegistrationResult r = register_points(X, Y);
        for (std::size_t k = 1; k < r.objective_trace.size(); ++k) {
            CHECK(r.objective_trace[k] <= r.objective_trace[k - 1] + 1e-8);
        }
        CHECK(max_abs(r.Z - (r.Y + gaussian_kernel(r.Y, r.beta) * r.W)) < 1e-12);
        for (Eigen::Index n = 0; n < r.P.cols(); ++n) CHECK(std::abs(r.P.col(n).sum() - 1.0) < 1e-12);
    }
}

TEST_CASE("register_points is deterministic") {
    std::mt19937 rng(10);
    const PointSet Y = testsupport::random_points(rng, 12), X = testsupport::random_points(rng, 14);
    const RegistrationResult a = register_points(X, Y), b = register_points(X, Y);
    CHECK(a.Z == b.Z);
    CHECK(a.P == b.P);
    CHECK(a.objective_trace == b.objective_trace);
}

TEST_CASE("apply agrees with the matrix transform on the reference set") {
    std::mt19937 rng(12);
    const PointSet Y = testsupport::random_points(rng, 8), X = testsupport::random_points(rng, 8);
    const RegistrationResult r = register_points(X, Y);
    CHECK(max_abs(r.apply(Y) - r.Z) < 1e-12);
}

TEST_CASE("register_points input errors") {
    PointSet one(1, 2);
    one << 0, 0;
    PointSet two(2, 2);
    two << 0, 0, 1, 1;
    CHECK_THROWS_AS(register_points(one, two), Error);
    PointSet bad = two;
    bad(1, 1) = NAN;
    CHECK_THROWS_AS(register_points(bad, two), Error);
    PointSet same(3, 2);
    same.setZero();
    CHECK_THROWS_AS(register_points(same, same), Error);
    RegistrationConfig cfg;
    cfg.lambda = 0.0;
    CHECK_THROWS_AS(register_points(two, two, cfg), Error);
    cfg = {};
    cfg.omega = 1.0;
    CHECK_THROWS_AS(register_points(two, two, cfg), Error);
}
