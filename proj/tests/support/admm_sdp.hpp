#pragma once

// Independent conic reference solver (test only): operator-splitting ADMM
// over min C.X s.t. B_i.X = rhs_i, X >= 0. Shares nothing with the
// interior-point engine beyond the instance container.

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>

#include "certidop/sdp.hpp"

namespace admm {

struct Result {
  Eigen::MatrixXd X;
  double cost = 0.0;
  int iterations = 0;
  double split_residual = 0.0;   // ||X - Z||_F
  double affine_residual = 0.0;  // max |B_i.X - rhs_i|
};

inline Result solve(const certidop::SdpInstance& inst, int max_iterations = 400000,
                    double tolerance = 1e-11) {
  using Eigen::MatrixXd;
  using Eigen::VectorXd;
  const int n = inst.dim;
  const int m = static_cast<int>(inst.B.size());

  // Gram matrix of the constraint blocks for the affine projection.
  MatrixXd gram(m, m);
  std::vector<MatrixXd> dense_b(m);
  for (int i = 0; i < m; ++i) dense_b[i] = inst.B[i].to_dense();
  for (int i = 0; i < m; ++i) {
    for (int j = i; j < m; ++j) {
      gram(i, j) = gram(j, i) = (dense_b[i].cwiseProduct(dense_b[j])).sum();
    }
  }
  const Eigen::LDLT<MatrixXd> gram_ldlt(gram);

  const double rho = std::max(1.0, inst.C.norm() / n);
  auto project_affine = [&](const MatrixXd& mat) {
    VectorXd values(m);
    for (int i = 0; i < m; ++i) values(i) = (dense_b[i].cwiseProduct(mat)).sum();
    const VectorXd nu = gram_ldlt.solve(values - inst.rhs);
    MatrixXd out = mat;
    for (int i = 0; i < m; ++i) out -= nu(i) * dense_b[i];
    return out;
  };

  MatrixXd x = MatrixXd::Identity(n, n);
  MatrixXd z = x, u = MatrixXd::Zero(n, n);
  Result result;
  for (int it = 0; it < max_iterations; ++it) {
    x = project_affine(z - u - inst.C / rho);
    const MatrixXd z_prev = z;
    Eigen::SelfAdjointEigenSolver<MatrixXd> eig(x + u);
    const VectorXd clipped = eig.eigenvalues().cwiseMax(0.0);
    z = eig.eigenvectors() * clipped.asDiagonal() * eig.eigenvectors().transpose();
    u += x - z;
    result.iterations = it + 1;
    if (it % 50 == 0 || it + 1 == max_iterations) {
      const double split = (x - z).norm();
      const double dual_move = rho * (z - z_prev).norm();
      if (split < tolerance && dual_move < tolerance) break;
    }
  }
  result.X = z;
  result.cost = (inst.C.cwiseProduct(z)).sum();
  result.split_residual = (x - z).norm();
  double aff = 0.0;
  for (int i = 0; i < m; ++i) {
    aff = std::max(aff, std::abs((dense_b[i].cwiseProduct(z)).sum() - inst.rhs(i)));
  }
  result.affine_residual = aff;
  return result;
}

}  // namespace admm
