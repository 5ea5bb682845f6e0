#pragma once

// Independent brute-force evaluations used as test oracles. Everything here
// is written as plain loops straight from the defining formulas, without
// log-domain tricks or matrix algebra, so it shares no code path with the
// library.

#include <Eigen/Core>

#include <array>
#include <cmath>
#include <numbers>

namespace oracle {

inline double sqdist(const Eigen::MatrixXd& A, Eigen::Index i, const Eigen::MatrixXd& B, Eigen::Index j) {
    double s = 0.0;
    for (Eigen::Index d = 0; d < A.cols(); ++d) s += (A(i, d) - B(j, d)) * (A(i, d) - B(j, d));
    return s;
}

/// G_ij = exp(-|y_i - y_j|^2 / (2 beta^2))
inline Eigen::MatrixXd kernel(const Eigen::MatrixXd& Y, double beta) {
    Eigen::MatrixXd G(Y.rows(), Y.rows());
    for (Eigen::Index i = 0; i < Y.rows(); ++i)
        for (Eigen::Index j = 0; j < Y.rows(); ++j) G(i, j) = std::exp(-sqdist(Y, i, Y, j) / (2.0 * beta * beta));
    return G;
}

/// Mean squared pairwise distance divided by the dimension.
inline double initial_sigma2(const Eigen::MatrixXd& X, const Eigen::MatrixXd& Y) {
    double s = 0.0;
    for (Eigen::Index n = 0; n < X.rows(); ++n)
        for (Eigen::Index m = 0; m < Y.rows(); ++m) s += sqdist(X, n, Y, m);
    return s / static_cast<double>(X.rows() * Y.rows() * X.cols());
}

/// Gaussian component density p(x_n | m).
inline double component_density(const Eigen::MatrixXd& X, Eigen::Index n, const Eigen::MatrixXd& Z, Eigen::Index m,
                                double sigma2) {
    const double D = static_cast<double>(X.cols());
    return std::exp(-sqdist(X, n, Z, m) / (2.0 * sigma2)) / std::pow(2.0 * std::numbers::pi * sigma2, D / 2.0);
}

/// Bayes quotient p(m | x_n) over M Gaussian components plus a uniform
/// outlier component of weight omega and density 1/A.
inline Eigen::MatrixXd posterior(const Eigen::MatrixXd& X, const Eigen::MatrixXd& Z, double sigma2, double omega,
                                 double area) {
    const Eigen::Index M = Z.rows();
    Eigen::MatrixXd P(M, X.rows());
    for (Eigen::Index n = 0; n < X.rows(); ++n) {
        double denom = omega / area;
        for (Eigen::Index k = 0; k < M; ++k)
            denom += component_density(X, n, Z, k, sigma2) * (1.0 - omega) / static_cast<double>(M);
        for (Eigen::Index m = 0; m < M; ++m)
            P(m, n) = component_density(X, n, Z, m, sigma2) * (1.0 - omega) / static_cast<double>(M) / denom;
    }
    return P;
}

/// -sum_n sum_{m=1}^{M+1} p(m|x_n) ln[p(m) p(x_n|m)] + lambda/2 sum_ij G_ij <w_i, w_j>
inline double objective(const Eigen::MatrixXd& X, const Eigen::MatrixXd& Z, const Eigen::MatrixXd& P,
                        const Eigen::MatrixXd& W, const Eigen::MatrixXd& G, double sigma2, double lambda, double omega,
                        double area) {
    const Eigen::Index M = Z.rows();
    double q = 0.0;
    for (Eigen::Index n = 0; n < X.rows(); ++n) {
        double inlier = 0.0;
        for (Eigen::Index m = 0; m < M; ++m) {
            const double prior = (1.0 - omega) / static_cast<double>(M);
            q -= P(m, n) * std::log(prior * component_density(X, n, Z, m, sigma2));
            inlier += P(m, n);
        }
        const double outlier = 1.0 - inlier;
        if (omega > 0.0 && outlier > 0.0) q -= outlier * std::log(omega / area);
    }
    double reg = 0.0;
    for (Eigen::Index i = 0; i < M; ++i)
        for (Eigen::Index j = 0; j < M; ++j) {
            double dot = 0.0;
            for (Eigen::Index d = 0; d < W.cols(); ++d) dot += W(i, d) * W(j, d);
            reg += G(i, j) * dot;
        }
    return q + 0.5 * lambda * reg;
}

/// f(x) = x + sum_m w_m exp(-|x - y_m|^2 / (2 beta^2)), applied to every row of `points`.
inline Eigen::MatrixXd green_sum(const Eigen::MatrixXd& points, const Eigen::MatrixXd& Y, const Eigen::MatrixXd& W,
                                 double beta) {
    Eigen::MatrixXd out = points;
    for (Eigen::Index i = 0; i < points.rows(); ++i)
        for (Eigen::Index m = 0; m < Y.rows(); ++m) {
            const double g = std::exp(-sqdist(points, i, Y, m) / (2.0 * beta * beta));
            for (Eigen::Index d = 0; d < Y.cols(); ++d) out(i, d) += W(m, d) * g;
        }
    return out;
}

/// One-dimensional, two-point M-step solved by Cramer's rule:
///   (G + lambda sigma2 diag(1/p1)) w = diag(1/p1) P x - y
inline std::array<double, 2> m_step_2x2(const std::array<double, 2>& x, const std::array<double, 2>& y,
                                        const std::array<std::array<double, 2>, 2>& P, double beta, double lambda,
                                        double sigma2) {
    const double g = std::exp(-(y[0] - y[1]) * (y[0] - y[1]) / (2.0 * beta * beta));
    const double p1[2] = {P[0][0] + P[0][1], P[1][0] + P[1][1]};
    const double a = 1.0 + lambda * sigma2 / p1[0];
    const double d = 1.0 + lambda * sigma2 / p1[1];
    const double b = g;
    const double r0 = (P[0][0] * x[0] + P[0][1] * x[1]) / p1[0] - y[0];
    const double r1 = (P[1][0] * x[0] + P[1][1] * x[1]) / p1[1] - y[1];
    const double det = a * d - b * b;
    return {(r0 * d - b * r1) / det, (a * r1 - b * r0) / det};
}

} // namespace oracle
