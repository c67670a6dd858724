#include <pybind11/functional.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "certidop/certify.hpp"
#include "certidop/geodesy.hpp"
#include "certidop/local.hpp"
#include "certidop/model.hpp"
#include "certidop/pipeline.hpp"
#include "certidop/scaling.hpp"
#include "certidop/sim.hpp"

namespace py = pybind11;
using namespace certidop;

namespace {

MeasurementSet set_from(const std::vector<SatelliteState>& satellites,
                        const std::vector<DopplerMeasurement>& measurements) {
  MeasurementSet set;
  set.satellites = satellites;
  set.measurements = measurements;
  return set;
}

// Plain-sequence conversions keep the module independent of the numpy C API.
std::array<double, 3> to_array(const Vec3& v) { return {v.x(), v.y(), v.z()}; }
Vec3 to_vec3(const std::array<double, 3>& a) { return {a[0], a[1], a[2]}; }

std::vector<double> to_list(const Eigen::VectorXd& v) {
  return std::vector<double>(v.data(), v.data() + v.size());
}

std::vector<std::vector<double>> to_rows(const Eigen::MatrixXd& m) {
  std::vector<std::vector<double>> rows(m.rows());
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    rows[r].assign(m.row(r).begin(), m.row(r).end());
  }
  return rows;
}

template <typename Owner>
void def_vec3_property(py::class_<Owner>& cls, const char* name, Vec3 Owner::*member) {
  cls.def_property(
      name, [member](const Owner& o) { return to_array(o.*member); },
      [member](Owner& o, const std::array<double, 3>& value) { o.*member = to_vec3(value); });
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Certifiably optimal LEO Doppler positioning";

  py::class_<SatelliteState> sat_cls(m, "SatelliteState");
  sat_cls.def(py::init<>())
      .def_readwrite("sat_id", &SatelliteState::sat_id)
      .def_readwrite("epoch", &SatelliteState::epoch);
  def_vec3_property(sat_cls, "position", &SatelliteState::position);
  def_vec3_property(sat_cls, "velocity", &SatelliteState::velocity);

  py::class_<ReceiverState> rec_cls(m, "ReceiverState");
  rec_cls.def(py::init<>())
      .def_readwrite("clock_drift_term", &ReceiverState::clock_drift_term);
  def_vec3_property(rec_cls, "position", &ReceiverState::position);
  def_vec3_property(rec_cls, "velocity", &ReceiverState::velocity);

  py::class_<DopplerMeasurement>(m, "DopplerMeasurement")
      .def(py::init<>())
      .def_readwrite("sat_id", &DopplerMeasurement::sat_id)
      .def_readwrite("epoch", &DopplerMeasurement::epoch)
      .def_readwrite("value", &DopplerMeasurement::value)
      .def_readwrite("sigma", &DopplerMeasurement::sigma);

  py::enum_<VelocityPattern>(m, "VelocityPattern")
      .value("alternating", VelocityPattern::alternating)
      .value("east", VelocityPattern::east)
      .value("random", VelocityPattern::random);

  py::class_<ScenarioConfig>(m, "ScenarioConfig")
      .def(py::init<>())
      .def_readwrite("grid_count", &ScenarioConfig::grid_count)
      .def_readwrite("grid_extent_km", &ScenarioConfig::grid_extent_km)
      .def_readwrite("altitude_km", &ScenarioConfig::altitude_km)
      .def_readwrite("carrier_frequency_hz", &ScenarioConfig::carrier_frequency_hz)
      .def_readwrite("center_lat_deg", &ScenarioConfig::center_lat_deg)
      .def_readwrite("center_lon_deg", &ScenarioConfig::center_lon_deg)
      .def_readwrite("receiver_clock_term_truth", &ScenarioConfig::receiver_clock_term_truth)
      .def_readwrite("monte_carlo_trials", &ScenarioConfig::monte_carlo_trials)
      .def_readwrite("rng_seed", &ScenarioConfig::rng_seed)
      .def_readwrite("velocity_pattern", &ScenarioConfig::velocity_pattern)
      .def_readwrite("velocity_spread_deg", &ScenarioConfig::velocity_spread_deg);

  py::class_<NoiseConfig>(m, "NoiseConfig")
      .def(py::init<>())
      .def_readwrite("sat_position_std", &NoiseConfig::sat_position_std)
      .def_readwrite("sat_velocity_std", &NoiseConfig::sat_velocity_std)
      .def_readwrite("doppler_std", &NoiseConfig::doppler_std);

  py::class_<LocalSolverConfig>(m, "LocalSolverConfig")
      .def(py::init<>())
      .def_readwrite("max_iterations", &LocalSolverConfig::max_iterations)
      .def_readwrite("step_tolerance", &LocalSolverConfig::step_tolerance)
      .def_readwrite("residual_tolerance", &LocalSolverConfig::residual_tolerance)
      .def_readwrite("trust_radius_initial", &LocalSolverConfig::trust_radius_initial)
      .def_readwrite("trust_radius_max", &LocalSolverConfig::trust_radius_max);

  py::class_<LocalSolution>(m, "LocalSolution")
      .def_readonly("estimate", &LocalSolution::estimate)
      .def_readonly("iterations", &LocalSolution::iterations)
      .def_readonly("converged", &LocalSolution::converged)
      .def_readonly("final_cost", &LocalSolution::final_cost)
      .def_readonly("failure_reason", &LocalSolution::failure_reason);

  py::class_<Certificate>(m, "Certificate")
      .def_readonly("eigenvalue_ratio", &Certificate::eigenvalue_ratio)
      .def_readonly("rank_tight", &Certificate::rank_tight)
      .def_readonly("constraint_residual_max", &Certificate::constraint_residual_max)
      .def_readonly("dual_psd_margin", &Certificate::dual_psd_margin)
      .def_readonly("dual_null_residual", &Certificate::dual_null_residual)
      .def_readonly("duality_gap", &Certificate::duality_gap)
      .def_readonly("p_star", &Certificate::p_star)
      .def_readonly("d_star", &Certificate::d_star)
      .def_readonly("q_star", &Certificate::q_star)
      .def_property_readonly("verdict",
                             [](const Certificate& c) { return to_string(c.verdict); });

  py::class_<DatasetMetadata>(m, "DatasetMetadata")
      .def(py::init<>())
      .def_readwrite("constellation", &DatasetMetadata::constellation)
      .def_readwrite("carrier_frequency_hz", &DatasetMetadata::carrier_frequency_hz)
      .def_readwrite("duration_s", &DatasetMetadata::duration_s);

  py::class_<Dataset>(m, "Dataset")
      .def(py::init<>())
      .def_readwrite("ephemeris", &Dataset::ephemeris)
      .def_readwrite("doppler", &Dataset::doppler)
      .def_readwrite("truth", &Dataset::truth)
      .def_readwrite("metadata", &Dataset::metadata);

  py::class_<RunEntry>(m, "RunEntry")
      .def_property_readonly("method", [](const RunEntry& e) { return to_string(e.method); })
      .def_readonly("success", &RunEntry::success)
      .def_readonly("estimate", &RunEntry::estimate)
      .def_readonly("error_3d_km", &RunEntry::error_3d_km)
      .def_readonly("horizontal_m", &RunEntry::horizontal_m)
      .def_readonly("iterations", &RunEntry::iterations)
      .def_readonly("seconds", &RunEntry::seconds)
      .def_readonly("certificate", &RunEntry::certificate)
      .def_readonly("failure", &RunEntry::failure);

  m.def("predict_doppler", &predict_doppler, py::arg("receiver"), py::arg("satellite"),
        "Deterministic range-rate plus clock term, m/s");
  m.def(
      "residuals_and_jacobian",
      [](const ReceiverState& receiver, const std::vector<SatelliteState>& satellites,
         const std::vector<DopplerMeasurement>& measurements) {
        const auto rj = residuals_and_jacobian(receiver, satellites, measurements);
        return py::make_tuple(to_list(rj.residuals), to_rows(rj.jacobian));
      },
      py::arg("receiver"), py::arg("satellites"), py::arg("measurements"));
  m.def(
      "geodetic_to_ecef",
      [](double lat_deg, double lon_deg, double height_m) {
        return to_array(geodetic_to_ecef(lat_deg, lon_deg, height_m));
      },
      py::arg("lat_deg"), py::arg("lon_deg"), py::arg("height_m"));
  m.def(
      "ecef_to_geodetic",
      [](const std::array<double, 3>& ecef) {
        const GeodeticCoord g = ecef_to_geodetic(to_vec3(ecef));
        return py::make_tuple(g.lat_deg, g.lon_deg, g.height_m);
      },
      py::arg("ecef"));

  m.def("generate_constellation", &generate_constellation, py::arg("config"));
  m.def("place_receiver", &place_receiver, py::arg("config"), py::arg("constellation"));
  m.def(
      "synthesize_measurements",
      [](const ReceiverState& truth, const std::vector<SatelliteState>& constellation,
         const NoiseConfig& noise, std::uint64_t seed, std::uint64_t stream) {
        auto rng = make_stream(seed, stream);
        const auto out = synthesize_measurements(truth, constellation, noise, rng);
        return py::make_tuple(out.observed.measurements, out.observed.satellites);
      },
      py::arg("truth"), py::arg("constellation"), py::arg("noise"), py::arg("seed") = 1,
      py::arg("stream") = 1,
      "Returns (measurements, perturbed_satellites) for one trial");

  m.def(
      "solve_gauss_newton",
      [](const ReceiverState& initial, const std::vector<SatelliteState>& satellites,
         const std::vector<DopplerMeasurement>& measurements, const LocalSolverConfig& config) {
        return solve_gauss_newton(initial, satellites, measurements,
                                  inverse_variance_weights(measurements), config);
      },
      py::arg("initial"), py::arg("satellites"), py::arg("measurements"),
      py::arg("config") = LocalSolverConfig{});
  m.def(
      "solve_dog_leg",
      [](const ReceiverState& initial, const std::vector<SatelliteState>& satellites,
         const std::vector<DopplerMeasurement>& measurements, const LocalSolverConfig& config) {
        return solve_dog_leg(initial, satellites, measurements,
                             inverse_variance_weights(measurements), config);
      },
      py::arg("initial"), py::arg("satellites"), py::arg("measurements"),
      py::arg("config") = LocalSolverConfig{});

  m.def(
      "solve_certifiable",
      [](const std::vector<SatelliteState>& satellites,
         const std::vector<DopplerMeasurement>& measurements) {
        PipelineConfig config;
        const CertifiableResult result = run_certifiable(set_from(satellites, measurements),
                                                         config.gwa, config.sdp, config.scaling);
        return py::make_tuple(result.estimate, result.certificate);
      },
      py::arg("satellites"), py::arg("measurements"),
      "Scaling -> graduated weighting -> moment relaxation -> recovery -> certificate; "
      "returns (receiver_estimate, certificate)");

  m.def("load_dataset", &load_dataset, py::arg("ephemeris_path"), py::arg("doppler_path"),
        py::arg("config_path") = std::string{});
  m.def("save_dataset", &save_dataset, py::arg("dataset"), py::arg("ephemeris_path"),
        py::arg("doppler_path"), py::arg("config_path") = std::string{});
  m.def(
      "run_pipeline",
      [](const Dataset& dataset, const std::string& method,
         const std::optional<ReceiverState>& initial) {
        return run_pipeline(dataset, parse_method(method), initial, PipelineConfig{});
      },
      py::arg("dataset"), py::arg("method"), py::arg("initial") = std::nullopt,
      "method is one of gn, dl, sdp, sdp-gn, sdp-dl");
  m.def("initial_at_distance", &initial_at_distance, py::arg("truth"), py::arg("distance_km"),
        py::arg("direction_index") = 0, py::arg("seed") = 0);
}
