#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "certidop/types.hpp"

namespace certidop {

/// Velocity direction pattern over the grid; the speed is always the
/// circular-orbit value sqrt(mu/r) tangential to the sphere.
///  - alternating: checkerboard of +-north azimuths, the ascending/descending
///    mix of a polar constellation seen over one region;
///  - east: a co-rotating sheet, every velocity along local east;
///  - random: uniform random tangent direction per satellite.
enum class VelocityPattern { alternating, east, random };

/// Constellation / Monte-Carlo scenario description.
struct ScenarioConfig {
  int grid_count = 49;                  // satellites, must be a perfect square
  double grid_extent_km = 1500.0;       // side of the sub-satellite square
  double altitude_km = 800.0;
  double carrier_frequency_hz = 1.626e9;
  double center_lat_deg = 22.3;         // ground point under the grid center
  double center_lon_deg = 114.2;
  double receiver_clock_term_truth = 0.0;  // m/s
  int monte_carlo_trials = 40;
  std::uint64_t rng_seed = 1;
  VelocityPattern velocity_pattern = VelocityPattern::alternating;
  double velocity_spread_deg = 0.0;  // jitter half-angle around the base azimuth
};

/// Zero-mean Gaussian noise levels, isotropic per axis.
struct NoiseConfig {
  double sat_position_std = 0.0;  // m
  double sat_velocity_std = 0.0;  // m/s
  double doppler_std = 0.0;       // m/s
};

/// Uniform grid of sub-satellite points lifted to the orbit sphere, each with
/// circular-orbit speed sqrt(mu/r) tangential to the sphere.
std::vector<SatelliteState> generate_constellation(const ScenarioConfig& config);

/// Receiver on the WGS-84 surface along the constellation centroid direction.
ReceiverState place_receiver(const ScenarioConfig& config,
                             const std::vector<SatelliteState>& constellation);

/// What an estimator sees for one trial: noisy measurements paired with the
/// perturbed ephemerides that produced neither of them.
struct SynthesizedData {
  MeasurementSet observed;  // perturbed satellites + noisy measurements
};

SynthesizedData synthesize_measurements(const ReceiverState& receiver_truth,
                                        const std::vector<SatelliteState>& constellation_truth,
                                        const NoiseConfig& noise, std::mt19937_64& rng);

/// Deterministic per-trial RNG stream derived from (seed, stream index).
std::mt19937_64 make_stream(std::uint64_t seed, std::uint64_t stream);

struct EstimateOutcome {
  ReceiverState estimate;
  bool success = false;
  std::string note;
};

/// An estimator receives the observed (perturbed) data plus the truth so that
/// wrappers can derive initial points; convex pipelines ignore the truth.
struct Estimator {
  std::string name;
  std::function<EstimateOutcome(const MeasurementSet& observed, const ReceiverState& truth)> run;
};

struct TrialRecord {
  int trial = 0;
  bool success = false;        // rendered "-" in reports when false
  double error_3d_m = 0.0;
  double horizontal_m = 0.0;
  std::string note;
};

struct EstimatorCampaign {
  std::string name;
  std::vector<TrialRecord> trials;
  double mean_error_3d_m = 0.0;  // over successful trials
  int failures = 0;
};

struct CampaignResult {
  std::vector<EstimatorCampaign> estimators;
};

/// Runs monte_carlo_trials independent trials; every estimator sees identical
/// per-trial inputs and exceptions are recorded as failed trials.
CampaignResult run_monte_carlo(const ScenarioConfig& scenario, const NoiseConfig& noise,
                               const std::vector<Estimator>& estimators);

}  // namespace certidop
