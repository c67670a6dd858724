#pragma once

#include <Eigen/Core>

#include "certidop/types.hpp"

namespace certidop {

struct GeodeticCoord {
  double lat_deg = 0.0;
  double lon_deg = 0.0;
  double height_m = 0.0;
};

/// WGS-84 geodetic (degrees, meters) to ECEF (meters). |lat| must be <= 90.
Vec3 geodetic_to_ecef(double lat_deg, double lon_deg, double height_m);

/// ECEF (meters) to WGS-84 geodetic. Round-trips geodetic_to_ecef to
/// < 1e-6 m in height and < 1e-9 deg in latitude/longitude.
GeodeticCoord ecef_to_geodetic(const Vec3& ecef);

/// Rotation from ECEF deltas to local east-north-up at the given site.
Eigen::Matrix3d enu_rotation(double lat_deg, double lon_deg);

/// Horizontal (east-north) distance in meters between an estimate and the
/// truth, evaluated in the ENU frame anchored at the truth.
double horizontal_error_m(const Vec3& estimate_ecef, const Vec3& truth_ecef);

}  // namespace certidop
