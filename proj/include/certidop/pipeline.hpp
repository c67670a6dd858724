#pragma once

#include <optional>
#include <string>
#include <vector>

#include "certidop/certify.hpp"
#include "certidop/lift.hpp"
#include "certidop/local.hpp"
#include "certidop/sdp.hpp"
#include "certidop/sim.hpp"
#include "certidop/types.hpp"

namespace certidop {

enum class Method { gn, dl, sdp, sdp_gn, sdp_dl };

std::string to_string(Method method);
Method parse_method(const std::string& name);  // throws std::invalid_argument

struct DatasetMetadata {
  std::string constellation = "synthetic";
  double carrier_frequency_hz = 0.0;
  double duration_s = 0.0;
};

struct Dataset {
  std::vector<SatelliteState> ephemeris;
  std::vector<DopplerMeasurement> doppler;
  std::optional<ReceiverState> truth;
  DatasetMetadata metadata;

  /// All epochs pooled into one static batch, aligned by (epoch, sat_id).
  MeasurementSet batch() const;
};

/// Every tolerance the five pipelines need, bundled for config files.
struct PipelineConfig {
  ScenarioConfig scenario;
  NoiseConfig noise;
  LocalSolverConfig local;
  SdpOptions sdp;
  GwaConfig gwa;
  ScalingConfig scaling;
};

struct RunEntry {
  Method method = Method::sdp;
  bool success = false;
  ReceiverState estimate;
  std::optional<double> error_3d_km;      // present when truth is known
  std::optional<double> horizontal_m;
  int iterations = 0;
  double seconds = 0.0;
  std::optional<Certificate> certificate;  // sdp-prefixed methods
  std::string failure;
};

struct SweepRow {
  double init_distance_km = 0.0;
  std::vector<RunEntry> entries;  // one per method, method order preserved
};

struct RunReport {
  std::vector<Method> methods;
  std::vector<SweepRow> rows;
};

/// CSV + config ingestion with line-numbered parse errors. Joins every
/// doppler record to exactly one ephemeris record on (epoch, sat_id).
Dataset load_dataset(const std::string& ephemeris_path, const std::string& doppler_path,
                     const std::string& config_path);

void save_dataset(const Dataset& dataset, const std::string& ephemeris_path,
                  const std::string& doppler_path, const std::string& config_path);

PipelineConfig load_pipeline_config(const std::string& path);
void save_pipeline_config(const PipelineConfig& config, const std::string& path);

/// Result of the convex pipeline: scaling -> GWA(+SDP) -> recovery ->
/// certification.
struct CertifiableResult {
  ReceiverState estimate;
  Certificate certificate;
  GwaResult gwa;
};

CertifiableResult run_certifiable(const MeasurementSet& data_si, const GwaConfig& gwa,
                                  const SdpOptions& sdp, const ScalingConfig& scaling);

/// gn/dl require an initial state; sdp-prefixed methods ignore it.
RunEntry run_pipeline(const Dataset& dataset, Method method,
                      const std::optional<ReceiverState>& initial, const PipelineConfig& config);

/// Initial points placed at each distance from the truth along a documented
/// direction (local east by default, K random directions averaged when
/// directions_per_distance > 1).
RunReport initial_distance_sweep(const Dataset& dataset, const std::vector<double>& distances_km,
                                 const std::vector<Method>& methods, const PipelineConfig& config,
                                 int directions_per_distance = 1);

/// Initial point at the given 3D distance from truth along local east.
ReceiverState initial_at_distance(const ReceiverState& truth, double distance_km,
                                  int direction_index = 0, std::uint64_t seed = 0);

void write_report_csv(const RunReport& report, std::ostream& out);
void write_report_json(const RunReport& report, std::ostream& out);

}  // namespace certidop
