#pragma once

#include <Eigen/Core>

#include <string>

#include "certidop/types.hpp"

namespace certidop {

struct LocalSolverConfig {
  int max_iterations = 100;
  double step_tolerance = 1e-4;       // m
  double residual_tolerance = 1e-8;   // m/s
  double trust_radius_initial = 1e5;  // m
  double trust_radius_max = 1e7;      // m
  double gain_low = 0.25;
  double gain_high = 0.75;
  double sanity_radius = 5e7;         // m, iterates beyond this diverged
};

struct LocalSolution {
  ReceiverState estimate;
  int iterations = 0;
  bool converged = false;
  double final_cost = 0.0;  // weighted NWLS objective
  std::string failure_reason;
};

/// Gauss-Newton on the state [p_r; b]: x <- x - (J^T W J)^-1 J^T W r.
/// Declares failure on a singular normal matrix, NaN, or an iterate leaving
/// the sanity ball.
LocalSolution solve_gauss_newton(const ReceiverState& initial,
                                 const std::vector<SatelliteState>& satellites,
                                 const std::vector<DopplerMeasurement>& measurements,
                                 const Eigen::VectorXd& weights, const LocalSolverConfig& config);

/// Powell dog-leg with gain-ratio trust-radius updates; same convergence and
/// failure contract as Gauss-Newton.
LocalSolution solve_dog_leg(const ReceiverState& initial,
                            const std::vector<SatelliteState>& satellites,
                            const std::vector<DopplerMeasurement>& measurements,
                            const Eigen::VectorXd& weights, const LocalSolverConfig& config);

}  // namespace certidop
