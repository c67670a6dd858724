#pragma once

#include <Eigen/Core>

#include <stdexcept>
#include <string>
#include <vector>

namespace certidop {

using Vec3 = Eigen::Vector3d;

/// Physical constants and WGS-84 ellipsoid parameters (SI units).
struct Constants {
  double speed_of_light = 299792458.0;   // m/s
  double earth_mu = 3.986004418e14;      // m^3/s^2
  double wgs84_a = 6378137.0;            // m, semi-major axis
  double wgs84_f = 1.0 / 298.257223563;  // flattening
};

inline constexpr Constants kEarth{};

/// ECEF position/velocity of an emitter at one epoch.
struct SatelliteState {
  std::string sat_id;
  double epoch = 0.0;             // s, opaque timescale, monotone within a dataset
  Vec3 position = Vec3::Zero();   // m
  Vec3 velocity = Vec3::Zero();   // m/s
};

/// Static ground receiver: ECEF position plus the aggregated clock term
/// b = c * d(dt_r)/dt carried in m/s. Velocity stays zero in every solver path.
struct ReceiverState {
  Vec3 position = Vec3::Zero();   // m
  Vec3 velocity = Vec3::Zero();   // m/s, zero for the static problem
  double clock_drift_term = 0.0;  // m/s
};

/// One range-rate observation, tagged by satellite.
struct DopplerMeasurement {
  std::string sat_id;
  double epoch = 0.0;  // s
  double value = 0.0;  // m/s
  double sigma = 1.0;  // m/s, > 0
};

/// Unit scaling applied on entry to the convex pipeline and inverted on exit.
/// Positions and ranges are multiplied by length_scale, velocities / Doppler
/// values / the clock term by rate_scale.
struct ScalingConfig {
  double length_scale = 1e-7;
  double rate_scale = 1e-3;
};

/// A paired set of satellite states and Doppler measurements, aligned
/// one-to-one by (sat_id, epoch). The scaled flag guards double scaling.
struct MeasurementSet {
  std::vector<SatelliteState> satellites;
  std::vector<DopplerMeasurement> measurements;
  bool scaled = false;

  std::size_t size() const { return measurements.size(); }
};

/// True when the emitter radius is inside the plausible LEO shell.
inline bool plausible_leo_radius(const SatelliteState& sat) {
  const double r = sat.position.norm();
  return r >= 6.4e6 && r <= 8.5e6;
}

/// Checks pairwise (sat_id, epoch) alignment; throws std::invalid_argument on
/// a mismatch and std::invalid_argument when fewer than 4 pairs are present.
void validate_pairing(const std::vector<SatelliteState>& satellites,
                      const std::vector<DopplerMeasurement>& measurements);

}  // namespace certidop
