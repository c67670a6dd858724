#pragma once

#include <Eigen/Core>

#include <iosfwd>
#include <memory>
#include <string>
#include <vector>

#include "certidop/sparse_sym.hpp"

namespace certidop {

struct LiftedProblem;

/// Dense equality-constrained SDP in standard form:
///   min  C . S   s.t.  B_i . S = rhs_i,  S >= 0.
///
/// Instances produced by make_sdp_instance are the homogenized moment
/// relaxation (homogeneous coordinate last): 2N constraints with zero RHS,
/// C = [[F, l0/2], [l0^T/2, c0]], B_i = [[G_i, l_i/2], [l_i^T/2, c_i]], plus
/// the normalization S_mm = 1 as the final row.
struct SdpInstance {
  int dim = 0;                 // moment dimension m
  Eigen::MatrixXd C;           // m x m symmetric
  std::vector<SparseSym> B;    // equality blocks
  Eigen::VectorXd rhs;         // right-hand sides, one per block
  int normalization_index = -1;  // index of the S_mm = 1 row, -1 when absent
};

SdpInstance make_sdp_instance(const LiftedProblem& problem);

enum class SdpStatus { solved, inaccurate, infeasible, numerical_failure };

std::string to_string(SdpStatus status);

struct SdpOptions {
  double tol_target = 1e-9;
  double tol_accept = 1e-7;
  int max_iterations = 100;
  double step_fraction = 0.98;
  // Run the interior-point core in long double; roughly three more digits of
  // achievable gap, used for the certifying solves so the moment spectrum
  // separates cleanly.
  bool extended_precision = false;
  // Minimum-trace tie-break, in units of the equilibrated cost. When the
  // optimal face is a ray (small instances), the tie-break selects its
  // rank-1 vertex; elsewhere it perturbs the solve by O(value^2). Reported
  // costs always use the original objective.
  double trace_tie_break = 1e-7;
  bool verbose = false;
};

struct MomentSolution {
  Eigen::MatrixXd S;          // m x m, PSD up to tolerance
  double p_star = 0.0;        // C . S
  double d_star = 0.0;        // rhs^T y
  Eigen::VectorXd lambda;     // equality multipliers, sign per H = C + sum lambda_i B_i
  double nu = 0.0;            // multiplier of the normalization row (0 when absent)
  SdpStatus status = SdpStatus::numerical_failure;
  int iterations = 0;
  double solve_seconds = 0.0;
  double max_constraint_residual = 0.0;  // max_i |B_i . S - rhs_i|
  double min_eigenvalue = 0.0;           // of S
  double relative_gap = 0.0;

  Eigen::MatrixXd moment_block() const { return S.topLeftCorner(S.rows() - 1, S.cols() - 1); }
  Eigen::VectorXd linear_block() const { return S.topRightCorner(S.rows() - 1, 1); }
};

/// Dense primal-dual interior-point solve (HKM direction, Mehrotra
/// predictor-corrector, infeasible start). Deterministic for a fixed
/// instance and options.
MomentSolution solve_sdp(const SdpInstance& instance, const SdpOptions& options = {});

/// H(lambda) = C + sum_i lambda_i B_i over the non-normalization rows;
/// lambda must have one entry per such row.
Eigen::MatrixXd dual_matrix(const SdpInstance& instance, const Eigen::VectorXd& lambda);

/// Dual slack including the normalization multiplier:
/// Z = H(lambda) - nu * e_m e_m^T. Complementary to S at the optimum.
Eigen::MatrixXd dual_slack_matrix(const SdpInstance& instance, const Eigen::VectorXd& lambda,
                                  double nu);

/// Sparse text export (SDPA-style layout, documented in the README) and the
/// matching parser, used for cross-validation against independent solvers.
void write_sdpa(const SdpInstance& instance, std::ostream& out);
SdpInstance read_sdpa(std::istream& in);

}  // namespace certidop
