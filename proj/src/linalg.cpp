#include "esig/linalg.hpp"

#include <stdexcept>
#include <unsupported/Eigen/MatrixFunctions>

namespace esig {

Eigen::MatrixXd cholesky_with_jitter(const Eigen::MatrixXd& m, double* jitter_used) {
  if (m.rows() != m.cols()) throw std::invalid_argument("cholesky: matrix must be square");
  if (m.rows() == 0) return m;
  for (double jitter : {0.0, 1e-12, 1e-10, 1e-8}) {
    Eigen::MatrixXd a = m;
    a.diagonal().array() += jitter;
    Eigen::LLT<Eigen::MatrixXd> llt(a);
    if (llt.info() == Eigen::Success) {
      if (jitter_used) *jitter_used = jitter;
      return llt.matrixL();
    }
  }
  throw std::runtime_error("covariance matrix is not positive semi-definite even with jitter 1e-8");
}

Eigen::MatrixXd expm(const Eigen::MatrixXd& m) { return m.exp(); }

Eigen::MatrixXd solve_lyapunov(const Eigen::MatrixXd& A, const Eigen::MatrixXd& Q) {
  const Eigen::Index n = A.rows();
  const Eigen::MatrixXd I = Eigen::MatrixXd::Identity(n, n);
  // vec(A X + X A^T) = (I (x) A + A (x) I) vec(X), column-major vec
  Eigen::MatrixXd L = Eigen::MatrixXd::Zero(n * n, n * n);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < n; ++j) {
      L.block(i * n, j * n, n, n) += I(i, j) * A;
      L.block(i * n, j * n, n, n) += A(i, j) * I;
    }
  Eigen::VectorXd q = Eigen::Map<const Eigen::VectorXd>(Q.data(), n * n);
  Eigen::FullPivLU<Eigen::MatrixXd> lu(L);
  if (!lu.isInvertible()) throw std::runtime_error("Lyapunov equation has no unique solution");
  Eigen::VectorXd x = lu.solve(q);
  Eigen::MatrixXd X = Eigen::Map<Eigen::MatrixXd>(x.data(), n, n);
  return 0.5 * (X + X.transpose());
}

Eigen::MatrixXd pseudo_inverse(const Eigen::MatrixXd& m, double rel_tol, bool* truncated) {
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(m, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const auto& s = svd.singularValues();
  const double cutoff = s.size() ? rel_tol * s(0) : 0.0;
  Eigen::VectorXd inv(s.size());
  bool dropped = false;
  for (Eigen::Index i = 0; i < s.size(); ++i) {
    if (s(i) > cutoff && s(i) > 0.0) {
      inv(i) = 1.0 / s(i);
    } else {
      inv(i) = 0.0;
      dropped = true;
    }
  }
  if (truncated) *truncated = dropped;
  return svd.matrixV() * inv.asDiagonal() * svd.matrixU().transpose();
}

}  // namespace esig
