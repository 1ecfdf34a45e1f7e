#pragma once

#include <Eigen/Dense>

namespace esig {

/// Lower Cholesky factor of a symmetric PSD matrix, retrying with lambda*I for
/// lambda in {0, 1e-12, 1e-10, 1e-8}. Throws std::runtime_error past the last rung.
Eigen::MatrixXd cholesky_with_jitter(const Eigen::MatrixXd& m, double* jitter_used = nullptr);

/// Matrix exponential (Pade approximant with scaling and squaring).
Eigen::MatrixXd expm(const Eigen::MatrixXd& m);

/// Solves A X + X A^T = Q.
Eigen::MatrixXd solve_lyapunov(const Eigen::MatrixXd& A, const Eigen::MatrixXd& Q);

/// Pseudo-inverse dropping singular values below rel_tol * largest. Sets *truncated when any were dropped.
Eigen::MatrixXd pseudo_inverse(const Eigen::MatrixXd& m, double rel_tol = 1e-10, bool* truncated = nullptr);

}  // namespace esig
