#pragma once

#include <Eigen/Core>

#include <vector>

namespace tsreg::cpd {

/// Point sets are stored one point per row (N x D).
using PointSet = Eigen::MatrixXd;

/// Below this variance the mixture is considered collapsed onto the data.
inline constexpr double kSigma2Floor = 1e-12;
/// Substituted for zero posterior row mass in the M-step.
inline constexpr double kRowMassEpsilon = 1e-10;

struct RegistrationConfig {
    double lambda = 10.0;  // regularization weight
    double omega = 0.0;    // outlier weight, [0, 1)
    double beta = 1.0;     // Gaussian kernel width
    int max_iter = 100;
    double tol = 1e-8;     // absolute objective decrease
    double area = 1.0;     // observed area H*W, used only when omega > 0

    void validate() const;
};

struct MStepResult {
    Eigen::MatrixXd W;
    double sigma2 = 0.0;
    bool collapsed = false;
};

struct RegistrationResult {
    PointSet Y;          // reference set the transform is anchored on
    double beta = 1.0;
    Eigen::MatrixXd W;   // M x D kernel weights
    PointSet Z;          // Y + G W
    Eigen::MatrixXd P;   // M x N posterior p(m | x_n)
    double sigma2 = 0.0;
    std::vector<double> objective_trace;
    int iterations = 0;
    bool converged = false;

    /// Evaluates the displacement field anywhere: x + sum_m w_m G(x, y_m).
    Eigen::RowVectorXd apply(const Eigen::RowVectorXd& x) const;
    PointSet apply(const PointSet& points) const;
};

/// G(i, j) = exp(-|y_i - y_j|^2 / (2 beta^2))
Eigen::MatrixXd gaussian_kernel(const PointSet& Y, double beta);

/// Kernel between arbitrary points and the reference set (rows of A vs rows of Y).
Eigen::MatrixXd gaussian_kernel(const PointSet& A, const PointSet& Y, double beta);

/// Mean squared pairwise distance divided by D.
double initial_sigma2(const PointSet& X, const PointSet& Y);

/// E-step. Entry (m, n) is the posterior that x_n was drawn from
/// component m; the outlier component's share is 1 - column sum.
/// Columns are evaluated with the largest exponent factored out.
Eigen::MatrixXd posterior(const PointSet& X, const PointSet& Z, double sigma2, double omega, double area);

/// Solves (G + lambda sigma2 diag(P1)^-1) W = diag(P1)^-1 P X - Y for W,
/// then re-estimates sigma2 at Z = Y + G W.
MStepResult m_step(const PointSet& X, const PointSet& Y, const Eigen::MatrixXd& P, const Eigen::MatrixXd& G,
                   double lambda, double sigma2);

PointSet transform(const PointSet& Y, const Eigen::MatrixXd& W, const Eigen::MatrixXd& G);

/// Expected complete-data negative log-likelihood under P (including the
/// outlier component and all constants) plus (lambda/2) tr(W^T G W).
double objective(const PointSet& X, const PointSet& Z, const Eigen::MatrixXd& P, const Eigen::MatrixXd& W,
                 const Eigen::MatrixXd& G, double sigma2, const RegistrationConfig& config = {});

/// sum over all components (outlier included) of P ln P, with 0 ln 0 = 0.
double posterior_neg_entropy(const Eigen::MatrixXd& P);

/// Registers the reference set Y onto the observation set X by EM.
///
/// Each iteration runs the E-step at the current transform, solves the
/// M-step, and records objective() + posterior_neg_entropy() for that
/// posterior, which is the tight form of the Jensen bound and cannot
/// increase between iterations. Stops when the decrease drops below
/// config.tol, when sigma2 falls under kSigma2Floor (reported as
/// converged), or after config.max_iter iterations.
RegistrationResult register_points(const PointSet& X, const PointSet& Y, const RegistrationConfig& config = {});

} // namespace tsreg::cpd
