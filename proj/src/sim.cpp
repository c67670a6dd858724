#include "certidop/sim.hpp"

#include <Eigen/Geometry>

#include <cmath>
#include <stdexcept>

#include "certidop/geodesy.hpp"
#include "certidop/model.hpp"

namespace certidop {

namespace {

constexpr double kDeg2Rad = M_PI / 180.0;
constexpr double kSigmaFloor = 1e-3;  // m/s, keeps weights finite at zero noise

std::uint64_t splitmix64(std::uint64_t& state) {
  state += 0x9e3779b97f4a7c15ULL;
  std::uint64_t z = state;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

}  // namespace

std::mt19937_64 make_stream(std::uint64_t seed, std::uint64_t stream) {
  std::uint64_t state = seed ^ (0xd1b54a32d192ed03ULL * (stream + 1));
  const std::uint64_t a = splitmix64(state);
  const std::uint64_t b = splitmix64(state);
  std::seed_seq seq{static_cast<std::uint32_t>(a), static_cast<std::uint32_t>(a >> 32),
                    static_cast<std::uint32_t>(b), static_cast<std::uint32_t>(b >> 32)};
  return std::mt19937_64(seq);
}

std::vector<SatelliteState> generate_constellation(const ScenarioConfig& config) {
  const int side = static_cast<int>(std::lround(std::sqrt(static_cast<double>(config.grid_count))));
  if (side * side != config.grid_count || config.grid_count <= 0) {
    throw std::invalid_argument("grid_count must be a perfect square, got " +
                                std::to_string(config.grid_count));
  }
  if (config.altitude_km <= 200.0 || config.altitude_km >= 2000.0) {
    throw std::invalid_argument("altitude outside the LEO band (200, 2000) km");
  }

  const double radius = kEarth.wgs84_a + config.altitude_km * 1e3;
  const double speed = std::sqrt(kEarth.earth_mu / radius);
  const double half_extent = 0.5 * config.grid_extent_km * 1e3;
  const double lat0 = config.center_lat_deg * kDeg2Rad;
  const double lon0 = config.center_lon_deg * kDeg2Rad;

  std::mt19937_64 rng = make_stream(config.rng_seed, 0x5eedULL);
  const double spread = std::clamp(config.velocity_spread_deg, 0.0, 180.0) * kDeg2Rad;
  std::uniform_real_distribution<double> jitter(-spread, spread);
  std::uniform_real_distribution<double> full_circle(0.0, 2.0 * M_PI);

  std::vector<SatelliteState> constellation;
  constellation.reserve(config.grid_count);
  for (int row = 0; row < side; ++row) {
    for (int col = 0; col < side; ++col) {
      // Equal angular spacing of sub-satellite points across the extent.
      const double north = side == 1 ? 0.0 : -half_extent + 2.0 * half_extent * row / (side - 1);
      const double east = side == 1 ? 0.0 : -half_extent + 2.0 * half_extent * col / (side - 1);
      const double lat = lat0 + north / radius;
      const double lon = lon0 + east / (radius * std::cos(lat0));

      SatelliteState sat;
      sat.sat_id = "S" + std::to_string(row * side + col + 1);
      sat.epoch = 0.0;
      sat.position = radius * Vec3{std::cos(lat) * std::cos(lon), std::cos(lat) * std::sin(lon),
                                   std::sin(lat)};
      const Vec3 radial = sat.position.normalized();
      Vec3 east_dir = Vec3::UnitZ().cross(radial);
      if (east_dir.norm() < 1e-12) east_dir = Vec3::UnitY();
      east_dir.normalize();
      const Vec3 north_dir = radial.cross(east_dir).normalized();

      double theta = spread > 0.0 ? jitter(rng) : 0.0;
      Vec3 base;
      switch (config.velocity_pattern) {
        case VelocityPattern::east:
          base = std::cos(theta) * east_dir + std::sin(theta) * north_dir;
          break;
        case VelocityPattern::random:
          theta = full_circle(rng);
          base = std::cos(theta) * east_dir + std::sin(theta) * north_dir;
          break;
        case VelocityPattern::alternating:
        default:
          base = std::cos(theta) * north_dir + std::sin(theta) * east_dir;
          if ((row + col) % 2 == 1) base = -base;
          break;
      }
      sat.velocity = speed * base;
      constellation.push_back(std::move(sat));
    }
  }
  return constellation;
}

ReceiverState place_receiver(const ScenarioConfig& config,
                             const std::vector<SatelliteState>& constellation) {
  if (constellation.empty()) {
    throw std::invalid_argument("place_receiver: empty constellation");
  }
  Vec3 centroid = Vec3::Zero();
  for (const auto& sat : constellation) centroid += sat.position;
  centroid /= static_cast<double>(constellation.size());
  const Vec3 dir = centroid.normalized();

  // Intersection of the centroid ray with the WGS-84 ellipsoid.
  const double a = kEarth.wgs84_a;
  const double b = a * (1.0 - kEarth.wgs84_f);
  const double t = 1.0 / std::sqrt((dir.x() * dir.x() + dir.y() * dir.y()) / (a * a) +
                                   dir.z() * dir.z() / (b * b));
  ReceiverState receiver;
  receiver.position = t * dir;
  receiver.velocity = Vec3::Zero();
  receiver.clock_drift_term = config.receiver_clock_term_truth;
  return receiver;
}

SynthesizedData synthesize_measurements(const ReceiverState& receiver_truth,
                                        const std::vector<SatelliteState>& constellation_truth,
                                        const NoiseConfig& noise, std::mt19937_64& rng) {
  std::normal_distribution<double> gauss(0.0, 1.0);
  SynthesizedData out;
  out.observed.satellites.reserve(constellation_truth.size());
  out.observed.measurements.reserve(constellation_truth.size());
  const double sigma = std::max(noise.doppler_std, kSigmaFloor);
  for (const auto& sat : constellation_truth) {
    DopplerMeasurement m;
    m.sat_id = sat.sat_id;
    m.epoch = sat.epoch;
    m.value = predict_doppler(receiver_truth, sat);
    if (noise.doppler_std > 0.0) m.value += noise.doppler_std * gauss(rng);
    m.sigma = sigma;

    SatelliteState perturbed = sat;
    if (noise.sat_position_std > 0.0) {
      perturbed.position += noise.sat_position_std * Vec3{gauss(rng), gauss(rng), gauss(rng)};
    }
    if (noise.sat_velocity_std > 0.0) {
      perturbed.velocity += noise.sat_velocity_std * Vec3{gauss(rng), gauss(rng), gauss(rng)};
    }
    out.observed.measurements.push_back(std::move(m));
    out.observed.satellites.push_back(std::move(perturbed));
  }
  out.observed.scaled = false;
  return out;
}

CampaignResult run_monte_carlo(const ScenarioConfig& scenario, const NoiseConfig& noise,
                               const std::vector<Estimator>& estimators) {
  if (estimators.empty()) {
    throw std::invalid_argument("run_monte_carlo: need at least one estimator");
  }
  const auto constellation = generate_constellation(scenario);
  const auto truth = place_receiver(scenario, constellation);

  CampaignResult result;
  result.estimators.resize(estimators.size());
  for (std::size_t e = 0; e < estimators.size(); ++e) {
    result.estimators[e].name = estimators[e].name;
    result.estimators[e].trials.reserve(scenario.monte_carlo_trials);
  }

  for (int trial = 0; trial < scenario.monte_carlo_trials; ++trial) {
    auto rng = make_stream(scenario.rng_seed, static_cast<std::uint64_t>(trial) + 1);
    const SynthesizedData data = synthesize_measurements(truth, constellation, noise, rng);
    for (std::size_t e = 0; e < estimators.size(); ++e) {
      TrialRecord record;
      record.trial = trial;
      try {
        const EstimateOutcome outcome = estimators[e].run(data.observed, truth);
        record.success = outcome.success;
        record.note = outcome.note;
        if (outcome.success) {
          record.error_3d_m = (outcome.estimate.position - truth.position).norm();
          record.horizontal_m = horizontal_error_m(outcome.estimate.position, truth.position);
        }
      } catch (const std::exception& ex) {
        record.success = false;
        record.note = ex.what();
      }
      result.estimators[e].trials.push_back(std::move(record));
    }
  }

  for (auto& campaign : result.estimators) {
    double sum = 0.0;
    int successes = 0;
    for (const auto& t : campaign.trials) {
      if (t.success) {
        sum += t.error_3d_m;
        ++successes;
      } else {
        ++campaign.failures;
      }
    }
    campaign.mean_error_3d_m = successes > 0 ? sum / successes : 0.0;
  }
  return result;
}

}  // namespace certidop
