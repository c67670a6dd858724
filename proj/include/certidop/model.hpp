#pragma once

#include <Eigen/Core>

#include "certidop/types.hpp"

namespace certidop {

/// Deterministic range-rate model:
///   (p_r - p_s)^T (v_r - v_s) / ||p_r - p_s||  +  b
/// Throws std::domain_error when receiver and satellite coincide.
double predict_doppler(const ReceiverState& receiver, const SatelliteState& satellite);

struct ResidualJacobian {
  Eigen::VectorXd residuals;  // N, m/s, residual_i = D_i - predicted_i
  Eigen::MatrixXd jacobian;   // N x 4, d residual / d [p_r; b]; column 4 is -1
};

/// Residuals and the analytic Jacobian of the weighted least-squares problem
/// over the state [p_r; b]. Requires aligned pairing and N >= 4.
ResidualJacobian residuals_and_jacobian(const ReceiverState& receiver,
                                        const std::vector<SatelliteState>& satellites,
                                        const std::vector<DopplerMeasurement>& measurements);

/// r^T diag(w) r for the N-vector of residuals.
double nwls_cost(const Eigen::VectorXd& residuals, const Eigen::VectorXd& weights);

/// Per-measurement weights 1/sigma_i^2.
Eigen::VectorXd inverse_variance_weights(const std::vector<DopplerMeasurement>& measurements);

}  // namespace certidop
