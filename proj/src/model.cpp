#include "certidop/model.hpp"

#include <cmath>
#include <stdexcept>

namespace certidop {

double predict_doppler(const ReceiverState& receiver, const SatelliteState& satellite) {
  const Vec3 delta_p = receiver.position - satellite.position;
  const double range = delta_p.norm();
  if (range < 1e-6) {
    throw std::domain_error("degenerate geometry: receiver and satellite coincide");
  }
  const Vec3 delta_v = receiver.velocity - satellite.velocity;
  return delta_p.dot(delta_v) / range + receiver.clock_drift_term;
}

ResidualJacobian residuals_and_jacobian(const ReceiverState& receiver,
                                        const std::vector<SatelliteState>& satellites,
                                        const std::vector<DopplerMeasurement>& measurements) {
  validate_pairing(satellites, measurements);
  const int n = static_cast<int>(measurements.size());
  ResidualJacobian out;
  out.residuals.resize(n);
  out.jacobian.resize(n, 4);
  for (int i = 0; i < n; ++i) {
    const Vec3 delta_p = receiver.position - satellites[i].position;
    const double range = delta_p.norm();
    if (range < 1e-6) {
      throw std::domain_error("degenerate geometry at measurement " + std::to_string(i));
    }
    const Vec3 delta_v = receiver.velocity - satellites[i].velocity;
    const double radial = delta_p.dot(delta_v) / range;
    out.residuals(i) = measurements[i].value - (radial + receiver.clock_drift_term);
    // d(predicted)/d p_r = delta_v / range - radial * delta_p / range^2
    const Vec3 d_pred = delta_v / range - delta_p * (radial / (range * range));
    out.jacobian.block<1, 3>(i, 0) = -d_pred.transpose();
    out.jacobian(i, 3) = -1.0;
  }
  return out;
}

double nwls_cost(const Eigen::VectorXd& residuals, const Eigen::VectorXd& weights) {
  return residuals.dot(weights.cwiseProduct(residuals));
}

Eigen::VectorXd inverse_variance_weights(const std::vector<DopplerMeasurement>& measurements) {
  Eigen::VectorXd w(measurements.size());
  for (std::size_t i = 0; i < measurements.size(); ++i) {
    if (!(measurements[i].sigma > 0.0)) {
      throw std::invalid_argument("measurement sigma must be positive");
    }
    w(i) = 1.0 / (measurements[i].sigma * measurements[i].sigma);
  }
  return w;
}

}  // namespace certidop
