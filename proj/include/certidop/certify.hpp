#pragma once

#include <Eigen/Core>

#include <string>
#include <vector>

#include "certidop/lift.hpp"
#include "certidop/sdp.hpp"
#include "certidop/sim.hpp"
#include "certidop/types.hpp"

namespace certidop {

enum class Verdict { certified_optimal, not_tight, solver_failed };

std::string to_string(Verdict verdict);

struct Certificate {
  double eigenvalue_ratio = 0.0;      // lambda_max(S) / max(lambda_2(S), 1e-16)
  bool rank_tight = false;            // ratio > 1e5 and solver status solved
  double constraint_residual_max = 0.0;  // max |g_i(y)| at the recovered y
  double dual_psd_margin = 0.0;       // min eigenvalue of the dual slack
  double dual_null_residual = 0.0;    // || dual slack * [y; 1] ||
  double duality_gap = 0.0;           // q* - p*
  double p_star = 0.0;
  double d_star = 0.0;
  double q_star = 0.0;
  Verdict verdict = Verdict::solver_failed;
};

struct Recovery {
  LiftedState lifted;       // scaled units
  ReceiverState receiver;   // SI units
  double homogeneous_coord = 0.0;
};

/// Rank-1 recovery: y = top eigenvector of S normalized so the homogeneous
/// coordinate is 1, receiver read from the leading entries and unscaled.
/// Throws std::runtime_error when the homogeneous coordinate vanishes.
Recovery recover_solution(const MomentSolution& solution, const LiftedProblem& problem);

/// Evaluates rank tightness, the dual conditions, and the duality chain.
/// The dual checks run against the instance the engine actually solved; the
/// GwaResult overload wires the conditioned solve through automatically.
Certificate certify(const MomentSolution& solution, const LiftedProblem& problem);
Certificate certify(const GwaResult& gwa);

// ---------------------------------------------------------------------------
// A priori noise bound
// ---------------------------------------------------------------------------

struct NoiseBoundReport {
  double sigma_n = 0.0;          // N-th largest singular value of grad g(y_bar)
  double g_norm = 0.0;           // 2-norm of the summed range-constraint blocks
  double grad_f_norm = 0.0;      // || 2 F_theta y_bar + l0_theta ||
  double f_perturbation = 0.0;   // || F - F_theta ||_2
  double eig_threshold = 0.0;    // 4th-smallest eigenvalue of the conditioned F_theta
  double lhs = 0.0;
  bool satisfied = false;        // lhs < eig_threshold, strict
};

/// Evaluates the sufficient perturbation bound at the noiseless optimum
/// y_bar. Both problems must share dimensions and the weight diagonal.
NoiseBoundReport check_noise_bound(const LiftedProblem& problem_truth,
                                   const LiftedProblem& problem_perturbed,
                                   const LiftedState& y_bar);

struct NoiseBoundCell {
  double velocity_noise = 0.0;  // m/s
  double doppler_noise = 0.0;   // m/s
  bool predicted_satisfied = false;  // bound holds in every trial
  double tight_fraction = 0.0;       // empirical rank-tight fraction
  int trials = 0;
};

struct NoiseBoundGrid {
  std::vector<NoiseBoundCell> cells;
  Certificate baseline;  // noiseless certificate the grid is anchored to
};

struct NoiseBoundGridConfig {
  std::vector<double> velocity_levels;  // m/s
  std::vector<double> doppler_levels;   // m/s
  int trials_per_cell = 3;
  GwaConfig gwa;
  SdpOptions sdp;
  ScalingConfig scaling;
};

/// Per-cell Monte-Carlo over (velocity, Doppler) noise: records the bound
/// prediction and the empirical tightness fraction. Aborts with
/// std::runtime_error when the noiseless baseline does not certify.
NoiseBoundGrid noise_bound_grid(const ScenarioConfig& scenario, const NoiseBoundGridConfig& config);

void write_grid_csv(const NoiseBoundGrid& grid, std::ostream& out);

}  // namespace certidop
