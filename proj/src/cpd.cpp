#include "tsreg/cpd.hpp"

#include "tsreg/error.hpp"

#include <Eigen/Cholesky>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>
#include <string>

namespace tsreg::cpd {

namespace {

double squared_distance(const PointSet& A, Eigen::Index i, const PointSet& B, Eigen::Index j) {
    return (A.row(i) - B.row(j)).squaredNorm();
}

void require_same_dim(const PointSet& A, const PointSet& B, const char* what) {
    if (A.cols() != B.cols()) {
        std::ostringstream os;
        os << what << ": dimension mismatch (" << A.cols() << " vs " << B.cols() << ")";
        throw Error(os.str());
    }
}

} // namespace

void RegistrationConfig::validate() const {
    if (!(lambda > 0.0)) throw Error("lambda must be positive");
    if (!(beta > 0.0)) throw Error("beta must be positive");
    if (!(omega >= 0.0 && omega < 1.0)) throw Error("omega must lie in [0, 1)");
    if (max_iter < 1) throw Error("max_iter must be at least 1");
    if (!(tol >= 0.0)) throw Error("tol must be non-negative");
    if (omega > 0.0 && !(area > 0.0)) throw Error("area must be positive when omega > 0");
}

Eigen::MatrixXd gaussian_kernel(const PointSet& A, const PointSet& Y, double beta) {
    require_same_dim(A, Y, "gaussian_kernel");
    if (!(beta > 0.0)) throw Error("beta must be positive");
    const double k = 1.0 / (2.0 * beta * beta);
    Eigen::MatrixXd G(A.rows(), Y.rows());
    for (Eigen::Index i = 0; i < A.rows(); ++i) {
        for (Eigen::Index j = 0; j < Y.rows(); ++j) G(i, j) = std::exp(-k * squared_distance(A, i, Y, j));
    }
    return G;
}

Eigen::MatrixXd gaussian_kernel(const PointSet& Y, double beta) {
    Eigen::MatrixXd G = gaussian_kernel(Y, Y, beta);
    // exact symmetry regardless of summation order
    for (Eigen::Index i = 0; i < G.rows(); ++i) {
        G(i, i) = 1.0;
        for (Eigen::Index j = i + 1; j < G.cols(); ++j) G(j, i) = G(i, j);
    }
    return G;
}

double initial_sigma2(const PointSet& X, const PointSet& Y) {
    require_same_dim(X, Y, "initial_sigma2");
    if (X.rows() == 0 || Y.rows() == 0) throw Error("initial_sigma2: empty point set");
    double total = 0.0;
    for (Eigen::Index n = 0; n < X.rows(); ++n) {
        for (Eigen::Index m = 0; m < Y.rows(); ++m) total += squared_distance(X, n, Y, m);
    }
    return total / static_cast<double>(X.cols() * X.rows() * Y.rows());
}

Eigen::MatrixXd posterior(const PointSet& X, const PointSet& Z, double sigma2, double omega, double area) {
    require_same_dim(X, Z, "posterior");
    if (!(sigma2 > 0.0)) throw Error("posterior: sigma2 must be positive");
    const Eigen::Index M = Z.rows();
    const Eigen::Index N = X.rows();
    const double D = static_cast<double>(X.cols());

    // outlier term relative to a unit-weight Gaussian component, in log form
    double log_outlier = -std::numeric_limits<double>::infinity();
    if (omega > 0.0) {
        log_outlier = std::log(omega / (1.0 - omega)) + std::log(static_cast<double>(M)) +
                      0.5 * D * std::log(2.0 * std::numbers::pi * sigma2) - std::log(area);
    }

    Eigen::MatrixXd P(M, N);
    Eigen::VectorXd expo(M);
    for (Eigen::Index n = 0; n < N; ++n) {
        double top = -std::numeric_limits<double>::infinity();
        for (Eigen::Index m = 0; m < M; ++m) {
            expo(m) = -squared_distance(X, n, Z, m) / (2.0 * sigma2);
            top = std::max(top, expo(m));
        }
        double denom = 0.0;
        for (Eigen::Index m = 0; m < M; ++m) {
            P(m, n) = std::exp(expo(m) - top);
            denom += P(m, n);
        }
        if (omega > 0.0) denom += std::exp(log_outlier - top);
        P.col(n) /= denom;
    }
    return P;
}

MStepResult m_step(const PointSet& X, const PointSet& Y, const Eigen::MatrixXd& P, const Eigen::MatrixXd& G,
                   double lambda, double sigma2) {
    require_same_dim(X, Y, "m_step");
    const Eigen::Index M = Y.rows();
    const Eigen::Index N = X.rows();
    if (P.rows() != M || P.cols() != N) throw Error("m_step: posterior must be M x N");
    if (G.rows() != M || G.cols() != M) throw Error("m_step: kernel must be M x M");
    if (!(sigma2 > 0.0)) throw Error("m_step: sigma2 must be positive");

    Eigen::VectorXd p1 = P.rowwise().sum();
    for (Eigen::Index m = 0; m < M; ++m) p1(m) = std::max(p1(m), kRowMassEpsilon);
    const Eigen::MatrixXd PX = P * X;

    Eigen::MatrixXd A = G;
    A.diagonal() += (lambda * sigma2) * p1.cwiseInverse();
    const Eigen::MatrixXd rhs = p1.cwiseInverse().asDiagonal() * PX - Y;

    Eigen::LLT<Eigen::MatrixXd> llt(A);
    MStepResult out;
    if (llt.info() == Eigen::Success) out.W = llt.solve(rhs);
    if (llt.info() != Eigen::Success || !out.W.allFinite()) {
        std::ostringstream os;
        os << "m_step: singular system (M=" << M << ", sigma2=" << sigma2 << ", lambda=" << lambda
           << ", min row mass=" << p1.minCoeff() << ")";
        throw Error(os.str());
    }

    const PointSet Z = Y + G * out.W;
    const double np = P.sum();
    if (!(np > 0.0)) throw Error("m_step: posterior has no inlier mass");
    double residual = 0.0;
    for (Eigen::Index n = 0; n < N; ++n) {
        for (Eigen::Index m = 0; m < M; ++m) residual += P(m, n) * squared_distance(X, n, Z, m);
    }
    out.sigma2 = residual / (np * static_cast<double>(X.cols()));
    out.collapsed = !(out.sigma2 >= kSigma2Floor);
    return out;
}

PointSet transform(const PointSet& Y, const Eigen::MatrixXd& W, const Eigen::MatrixXd& G) {
    if (W.rows() != Y.rows() || W.cols() != Y.cols() || G.rows() != Y.rows() || G.cols() != Y.rows()) {
        std::ostringstream os;
        os << "transform: shape mismatch (Y " << Y.rows() << "x" << Y.cols() << ", W " << W.rows() << "x" << W.cols()
           << ", G " << G.rows() << "x" << G.cols() << ")";
        throw Error(os.str());
    }
    return Y + G * W;
}

double objective(const PointSet& X, const PointSet& Z, const Eigen::MatrixXd& P, const Eigen::MatrixXd& W,
                 const Eigen::MatrixXd& G, double sigma2, const RegistrationConfig& config) {
    require_same_dim(X, Z, "objective");
    if (!(sigma2 > 0.0)) throw Error("objective: sigma2 must be positive");
    const Eigen::Index M = Z.rows();
    const Eigen::Index N = X.rows();
    const double D = static_cast<double>(X.cols());
    const double log_prior = std::log((1.0 - config.omega) / static_cast<double>(M));
    const double log_norm = 0.5 * D * std::log(2.0 * std::numbers::pi * sigma2);

    double q = 0.0;
    for (Eigen::Index n = 0; n < N; ++n) {
        double inlier = 0.0;
        for (Eigen::Index m = 0; m < M; ++m) {
            const double p = P(m, n);
            if (p == 0.0) continue;
            q -= p * (log_prior - log_norm - squared_distance(X, n, Z, m) / (2.0 * sigma2));
            inlier += p;
        }
        if (config.omega > 0.0) {
            const double outlier = std::max(0.0, 1.0 - inlier);
            if (outlier > 0.0) q -= outlier * std::log(config.omega / config.area);
        }
    }
    q += 0.5 * config.lambda * (W.transpose() * G * W).trace();
    return q;
}

double posterior_neg_entropy(const Eigen::MatrixXd& P) {
    double s = 0.0;
    for (Eigen::Index n = 0; n < P.cols(); ++n) {
        double inlier = 0.0;
        for (Eigen::Index m = 0; m < P.rows(); ++m) {
            const double p = P(m, n);
            if (p > 0.0) s += p * std::log(p);
            inlier += p;
        }
        const double outlier = 1.0 - inlier;
        if (outlier > 1e-15) s += outlier * std::log(outlier);
    }
    return s;
}

Eigen::RowVectorXd RegistrationResult::apply(const Eigen::RowVectorXd& x) const {
    if (x.size() != Y.cols()) throw Error("apply: dimension mismatch");
    const double k = 1.0 / (2.0 * beta * beta);
    Eigen::RowVectorXd out = x;
    for (Eigen::Index m = 0; m < Y.rows(); ++m) out += W.row(m) * std::exp(-k * (x - Y.row(m)).squaredNorm());
    return out;
}

PointSet RegistrationResult::apply(const PointSet& points) const {
    PointSet out(points.rows(), points.cols());
    for (Eigen::Index i = 0; i < points.rows(); ++i) out.row(i) = apply(Eigen::RowVectorXd(points.row(i)));
    return out;
}

RegistrationResult register_points(const PointSet& X, const PointSet& Y, const RegistrationConfig& config) {
    config.validate();
    require_same_dim(X, Y, "register_points");
    if (X.rows() < 2 || Y.rows() < 2) throw Error("register_points: both point sets need at least 2 points");
    if (!X.allFinite() || !Y.allFinite()) throw Error("register_points: non-finite input coordinates");

    RegistrationResult r;
    r.Y = Y;
    r.beta = config.beta;
    const Eigen::MatrixXd G = gaussian_kernel(Y, config.beta);
    r.W = Eigen::MatrixXd::Zero(Y.rows(), Y.cols());
    r.Z = Y;
    r.sigma2 = initial_sigma2(X, Y);
    if (!(r.sigma2 >= kSigma2Floor)) throw Error("register_points: all points coincide; nothing to register");

    bool collapsed = false;
    for (int it = 1; it <= config.max_iter; ++it) {
        r.P = posterior(X, r.Z, r.sigma2, config.omega, config.area);
        MStepResult ms = m_step(X, Y, r.P, G, config.lambda, r.sigma2);
        r.W = std::move(ms.W);
        r.Z = Y + G * r.W;
        r.iterations = it;
        if (ms.collapsed) {
            // The fit is exact to within the variance floor. One more E/M
            // pass at the floor makes the posterior one-to-one and settles
            // the weights at that fixpoint; going lower would leave the
            // kernel system without the lambda sigma2 ridge it needs.
            const double s2 = kSigma2Floor;
            r.P = posterior(X, r.Z, s2, config.omega, config.area);
            MStepResult last = m_step(X, Y, r.P, G, config.lambda, s2);
            r.W = std::move(last.W);
            r.Z = Y + G * r.W;
            r.sigma2 = std::max(last.sigma2, 0.0);
            collapsed = true;
            r.converged = true;
            break;
        }
        const double f = objective(X, r.Z, r.P, r.W, G, ms.sigma2, config) + posterior_neg_entropy(r.P);
        if (!std::isfinite(f) || !r.Z.allFinite()) {
            throw Error("register_points: non-finite objective at iteration " + std::to_string(it));
        }
        r.sigma2 = ms.sigma2;
        r.objective_trace.push_back(f);
        const auto k = r.objective_trace.size();
        if (k >= 2 && r.objective_trace[k - 2] - f < config.tol) {
            r.converged = true;
            break;
        }
    }
    if (!collapsed) r.P = posterior(X, r.Z, r.sigma2, config.omega, config.area);
    return r;
}

} // namespace tsreg::cpd
