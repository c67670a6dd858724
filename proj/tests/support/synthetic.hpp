#pragma once

// Shared scenario builders for the test suites.

#include <cmath>
#include <random>

#include "certidop/geodesy.hpp"
#include "certidop/model.hpp"
#include "certidop/sim.hpp"
#include "certidop/types.hpp"

namespace synthetic {

struct Instance {
  certidop::ReceiverState truth;
  certidop::MeasurementSet observed;
};

// Noiseless default 49-satellite scenario.
inline Instance default_noiseless(std::uint64_t seed = 1) {
  certidop::ScenarioConfig config;
  config.rng_seed = seed;
  const auto constellation = certidop::generate_constellation(config);
  Instance out;
  out.truth = certidop::place_receiver(config, constellation);
  auto rng = certidop::make_stream(seed, 1);
  out.observed =
      certidop::synthesize_measurements(out.truth, constellation, certidop::NoiseConfig{}, rng)
          .observed;
  return out;
}

// Small random instance: n satellites spread over a cap, receiver on the
// ellipsoid, random clock term; exact measurements.
inline Instance random_small(int n, std::uint64_t seed) {
  auto rng = certidop::make_stream(seed, 0xabcdULL);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  std::normal_distribution<double> g(0.0, 1.0);

  Instance out;
  const double lat = 25.0 * u(rng), lon = 180.0 * u(rng);
  out.truth.position = certidop::geodetic_to_ecef(lat, lon, 100.0 * (1.0 + u(rng)));
  out.truth.clock_drift_term = 150.0 * u(rng);

  const double radius = certidop::kEarth.wgs84_a + 800e3;
  const double speed = std::sqrt(certidop::kEarth.earth_mu / radius);
  const certidop::Vec3 up = out.truth.position.normalized();

  for (int i = 0; i < n; ++i) {
    certidop::Vec3 dir = (up + 0.8 * certidop::Vec3{u(rng), u(rng), u(rng)}).normalized();
    certidop::SatelliteState sat;
    sat.sat_id = "R" + std::to_string(i + 1);
    sat.epoch = 0.0;
    sat.position = radius * dir;
    certidop::Vec3 tangent{g(rng), g(rng), g(rng)};
    tangent -= tangent.dot(dir) * dir;
    sat.velocity = speed * tangent.normalized();

    certidop::DopplerMeasurement meas;
    meas.sat_id = sat.sat_id;
    meas.epoch = 0.0;
    meas.value = certidop::predict_doppler(out.truth, sat);
    meas.sigma = 1e-3;
    out.observed.satellites.push_back(sat);
    out.observed.measurements.push_back(meas);
  }
  return out;
}

// Multi-epoch pass shaped like the real experiment: n_sats polar-style
// orbits over the given site, n_meas measurements spread across duration_s.
inline Instance table2_pass(int n_sats, int n_meas, double duration_s, double clock_truth_mps,
                            double doppler_sigma_mps = 1e-3, std::uint64_t seed = 3) {
  Instance out;
  out.truth.position = certidop::geodetic_to_ecef(22.3045966, 114.180121, 61.384);
  out.truth.clock_drift_term = clock_truth_mps;

  const double radius = certidop::kEarth.wgs84_a + 780e3;
  const double speed = std::sqrt(certidop::kEarth.earth_mu / radius);
  const double omega = speed / radius;
  auto rng = certidop::make_stream(seed, 9);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  const certidop::Vec3 up = out.truth.position.normalized();

  for (int s = 0; s < n_sats; ++s) {
    const double lon_off = u(rng) * 0.3, tilt = u(rng) * 0.2;
    certidop::Vec3 normal = (certidop::Vec3::UnitX() * std::cos(lon_off) +
                             certidop::Vec3::UnitY() * std::sin(lon_off) +
                             certidop::Vec3::UnitZ() * tilt)
                                .normalized();
    if (s % 2) normal = -normal;
    const certidop::Vec3 in_plane = (up - up.dot(normal) * normal).normalized();
    const double phase0 = u(rng) * 0.12;
    const int here = n_meas / n_sats + (s < n_meas % n_sats ? 1 : 0);
    for (int k = 0; k < here; ++k) {
      const double t = duration_s * k / std::max(1, here - 1);
      const double phase = phase0 + omega * t;
      certidop::SatelliteState sat;
      sat.sat_id = "IR" + std::to_string(s + 1);
      sat.epoch = t;
      sat.position = radius * (std::cos(phase) * in_plane + std::sin(phase) * normal.cross(in_plane));
      sat.velocity = speed * (-std::sin(phase) * in_plane + std::cos(phase) * normal.cross(in_plane));
      certidop::DopplerMeasurement meas;
      meas.sat_id = sat.sat_id;
      meas.epoch = t;
      meas.value = certidop::predict_doppler(out.truth, sat);
      meas.sigma = std::max(doppler_sigma_mps, 1e-3);
      out.observed.satellites.push_back(sat);
      out.observed.measurements.push_back(meas);
    }
  }
  if (doppler_sigma_mps > 1e-3) {
    auto noise_rng = certidop::make_stream(seed, 10);
    std::normal_distribution<double> gauss(0.0, doppler_sigma_mps);
    for (auto& m : out.observed.measurements) m.value += gauss(noise_rng);
  }
  return out;
}

}  // namespace synthetic
