#pragma once

#include <Eigen/Core>

#include <functional>
#include <iosfwd>
#include <memory>
#include <string>
#include <vector>

#include "certidop/sparse_sym.hpp"
#include "certidop/types.hpp"

namespace certidop {

/// One quadratic equality constraint y^T G y + l^T y + c = 0 of the lifted
/// problem, kept sparse (G has at most four structural entries).
struct QcqpConstraint {
  SparseSym G;         // d x d
  Eigen::VectorXd l;   // d
  double c = 0.0;
};

/// The lifted QCQP instance in scaled units.
///
/// State layout (0-based): y = [p_r (0..2), b (3), rho_1..rho_N (4..3+N),
/// z_1..z_N (4+N..3+2N)], d = 4 + 2N. Constraints 1..N pin rho_i^2 to the
/// squared satellite-receiver distance, constraints N+1..2N pin z_i = b*rho_i
/// through the moment matrix.
struct LiftedProblem {
  int n = 0;  // N measurements
  int state_dim() const { return 4 + 2 * n; }
  int moment_dim() const { return 5 + 2 * n; }

  Eigen::MatrixXd A;       // N x d
  Eigen::VectorXd k;       // N
  Eigen::VectorXd q_diag;  // N, positive weight diagonal
  Eigen::VectorXd sigmas;  // N, measurement sigmas in scaled units

  Eigen::MatrixXd F;   // A^T Q^-1 A
  Eigen::VectorXd l0;  // 2 A^T Q^-1 k
  double c0 = 0.0;     // k^T Q^-1 k, so the cost is ||A y + k||^2 weighted by Q^-1

  std::vector<QcqpConstraint> constraints;  // 2N

  bool scaled = false;
  ScalingConfig scaling;
};

/// Accessor views over a lifted state vector.
struct LiftedState {
  Eigen::VectorXd y;
  int n = 0;

  Eigen::Vector3d position() const { return y.head<3>(); }
  double clock_term() const { return y(3); }
  double range(int i) const { return y(4 + i); }          // 0-based i < n
  double product(int i) const { return y(4 + n + i); }    // z_i = b * rho_i
};

/// Builds A, k, Q, F, l0, c0 and the 2N constraints from scaled inputs.
/// Throws std::logic_error on unscaled inputs and std::invalid_argument on
/// dimension mismatches.
LiftedProblem build_lifted_problem(const std::vector<SatelliteState>& satellites,
                                   const std::vector<DopplerMeasurement>& measurements,
                                   const Eigen::VectorXd& q_diag, const ScalingConfig& scaling);

/// Exact lift of a receiver state: ranges from geometry, z_i = b * rho_i.
LiftedState lift_state(const ReceiverState& receiver_scaled,
                       const std::vector<SatelliteState>& satellites_scaled, int n);

/// F . (y y^T) + l0^T y + c0.
double qcqp_cost(const LiftedProblem& problem, const LiftedState& state);

/// Gradient 2 F y + l0 of the cost at y.
Eigen::VectorXd qcqp_cost_gradient(const LiftedProblem& problem, const Eigen::VectorXd& y);

/// g_i(y) = y^T G_i y + l_i^T y + c_i for all 2N constraints.
Eigen::VectorXd constraint_values(const LiftedProblem& problem, const Eigen::VectorXd& y);

/// G_i . Y + l_i^T y + c_i with an explicit moment matrix Y.
Eigen::VectorXd constraint_values_moment(const LiftedProblem& problem, const Eigen::MatrixXd& Y,
                                         const Eigen::VectorXd& y);

/// Rows (2 G_i y + l_i)^T of the constraint gradient, a 2N x d matrix.
Eigen::MatrixXd constraint_gradient(const LiftedProblem& problem, const Eigen::VectorXd& y);

/// Numeric rank via singular values above tolerance * largest.
int numeric_rank(const Eigen::MatrixXd& m, double tolerance = 1e-8);

/// Writes (F, l0, c0, constraints) in a plain matrix-text layout for
/// cross-checking against other implementations; see README for the format.
void write_problem_text(const LiftedProblem& problem, std::ostream& out);

// ---------------------------------------------------------------------------
// Graduated weighting approximation
// ---------------------------------------------------------------------------

// Forward declarations; the SDP side lives in sdp.hpp.
struct SdpInstance;
struct MomentSolution;

using SdpSolverHandle = std::function<MomentSolution(const SdpInstance&)>;

struct GwaConfig {
  int max_iterations = 1000;      // T
  double eta_threshold = 1e-3;    // 0.1%, relative trace change
  double range_floor_m = 1.0;     // clamp for non-positive extracted ranges
  // Clock bracketing: coarse grid size and golden-section width (scaled
  // rate units, 5e-5 = 0.05 m/s at the default scaling).
  int clock_search_points = 17;
  double clock_search_tolerance = 5e-5;
  // Convergence tolerance on the per-iteration clock refit, scaled rate
  // units (1e-6 = 1 mm/s at the default scaling).
  double clock_tolerance = 1e-6;
  // Optional cheaper handle for the bracketing grid; the main handle is
  // used when empty.
  SdpSolverHandle clock_search_solver;
  // Optional handle for the golden refinement: needs enough accuracy to
  // resolve the trace tie-break on cost-degenerate instances.
  SdpSolverHandle clock_refine_solver;
};

struct GwaIterationRecord {
  int iteration = 0;
  double eta = 0.0;
  double clock_term = 0.0;  // scaled units
  double solver_cost = 0.0;
  std::string solver_status;
};

/// The moment relaxation the engine actually solves is conditioned on the
/// scalar clock term: moments over [p_r, rho_1..rho_N; 1] with the N range
/// constraints. The full lifted problem's dual carries no curvature on the
/// clock coordinate (every G_i and F are zero there), so its relaxation has
/// optimal value zero for any data; conditioning removes that null direction
/// and the relaxation becomes generically tight. The clock term itself is
/// re-estimated in closed form from the recovered geometry inside the
/// weighting loop below.
SdpInstance make_conditioned_instance(const std::vector<SatelliteState>& satellites_scaled,
                                      const std::vector<DopplerMeasurement>& measurements_scaled,
                                      const Eigen::VectorXd& q_diag, double clock_term_scaled);

struct GwaResult {
  bool converged = false;
  int solves = 0;            // SDP solves performed
  int iterations = 0;        // t at termination
  double final_eta = 0.0;
  double clock_term = 0.0;   // final conditioned clock term, scaled units
  Eigen::VectorXd final_q;   // diagonal of the last built Q
  std::vector<GwaIterationRecord> trace;
  bool ranges_clamped = false;
  // Final solve embedded into the full moment layout, plus the problem it
  // certifies against and the raw conditioned solve for dual checks.
  std::shared_ptr<const MomentSolution> solution;
  std::shared_ptr<const LiftedProblem> problem;
  std::shared_ptr<const SdpInstance> reduced_instance;
  std::shared_ptr<const MomentSolution> reduced_solution;
};

/// Maps a conditioned solve onto the full moment layout: b row/column set to
/// clock_term * homogeneous, z rows to clock_term * rho. Rank and feasibility
/// carry over exactly.
MomentSolution embed_conditioned_solution(const MomentSolution& reduced, int n_measurements,
                                          double clock_term_scaled);

/// Algorithm: Q starts at identity and the clock term at zero; each pass
/// solves the conditioned SDP, extracts (position, ranges) from the rank-1
/// projection, re-estimates the clock term as the weighted mean of
/// D_i - predicted range-rate, and recomputes Q = diag(sigma_i^2 / rho_i)
/// normalized to unit mean diagonal. eta is the relative trace change
/// between consecutive unnormalized Q's; the loop stops once |eta| falls
/// below the threshold (and the clock update is commensurately small) or T
/// is reached. Solver failures propagate with the iteration index attached.
GwaResult run_gwa(const std::vector<SatelliteState>& satellites_scaled,
                  const std::vector<DopplerMeasurement>& measurements_scaled,
                  const SdpSolverHandle& solve, const GwaConfig& config,
                  const ScalingConfig& scaling);

}  // namespace certidop
