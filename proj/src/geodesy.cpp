#include "certidop/geodesy.hpp"

#include <cmath>
#include <stdexcept>

namespace certidop {

namespace {
constexpr double kDeg2Rad = M_PI / 180.0;
constexpr double kRad2Deg = 180.0 / M_PI;
}  // namespace

Vec3 geodetic_to_ecef(double lat_deg, double lon_deg, double height_m) {
  if (std::abs(lat_deg) > 90.0) {
    throw std::invalid_argument("latitude out of range: " + std::to_string(lat_deg));
  }
  const double a = kEarth.wgs84_a;
  const double f = kEarth.wgs84_f;
  const double e2 = f * (2.0 - f);
  const double lat = lat_deg * kDeg2Rad;
  const double lon = lon_deg * kDeg2Rad;
  const double sin_lat = std::sin(lat);
  const double cos_lat = std::cos(lat);
  const double nrad = a / std::sqrt(1.0 - e2 * sin_lat * sin_lat);
  return {(nrad + height_m) * cos_lat * std::cos(lon),
          (nrad + height_m) * cos_lat * std::sin(lon),
          (nrad * (1.0 - e2) + height_m) * sin_lat};
}

GeodeticCoord ecef_to_geodetic(const Vec3& ecef) {
  const double a = kEarth.wgs84_a;
  const double f = kEarth.wgs84_f;
  const double e2 = f * (2.0 - f);
  const double b = a * (1.0 - f);
  const double p = std::hypot(ecef.x(), ecef.y());
  const double lon = std::atan2(ecef.y(), ecef.x());

  // Bowring's iteration on the reduced latitude; machine precision in a few
  // passes for terrestrial and LEO radii.
  double beta = std::atan2(ecef.z() * a, p * b);
  double lat = 0.0;
  const double ep2 = e2 / (1.0 - e2);
  for (int i = 0; i < 6; ++i) {
    const double sb = std::sin(beta);
    const double cb = std::cos(beta);
    lat = std::atan2(ecef.z() + ep2 * b * sb * sb * sb, p - e2 * a * cb * cb * cb);
    const double beta_next = std::atan2((1.0 - f) * std::sin(lat), std::cos(lat));
    if (std::abs(beta_next - beta) < 1e-15) {
      beta = beta_next;
      break;
    }
    beta = beta_next;
  }
  const double sin_lat = std::sin(lat);
  const double nrad = a / std::sqrt(1.0 - e2 * sin_lat * sin_lat);
  double height;
  if (std::abs(std::cos(lat)) > 1e-10) {
    height = p / std::cos(lat) - nrad;
  } else {
    height = std::abs(ecef.z()) - b;
  }
  return {lat * kRad2Deg, lon * kRad2Deg, height};
}

Eigen::Matrix3d enu_rotation(double lat_deg, double lon_deg) {
  const double lat = lat_deg * kDeg2Rad;
  const double lon = lon_deg * kDeg2Rad;
  Eigen::Matrix3d r;
  r << -std::sin(lon), std::cos(lon), 0.0,                                              // east
      -std::sin(lat) * std::cos(lon), -std::sin(lat) * std::sin(lon), std::cos(lat),   // north
      std::cos(lat) * std::cos(lon), std::cos(lat) * std::sin(lon), std::sin(lat);     // up
  return r;
}

double horizontal_error_m(const Vec3& estimate_ecef, const Vec3& truth_ecef) {
  const GeodeticCoord site = ecef_to_geodetic(truth_ecef);
  const Eigen::Vector3d enu = enu_rotation(site.lat_deg, site.lon_deg) * (estimate_ecef - truth_ecef);
  return std::hypot(enu.x(), enu.y());
}

}  // namespace certidop
