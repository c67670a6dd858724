#include "certidop/pipeline.hpp"

#include <json.hpp>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <map>
#include <ostream>
#include <sstream>
#include <stdexcept>

#include "certidop/geodesy.hpp"
#include "certidop/model.hpp"
#include "certidop/scaling.hpp"

namespace certidop {

using nlohmann::json;

std::string to_string(Method method) {
  switch (method) {
    case Method::gn: return "gn";
    case Method::dl: return "dl";
    case Method::sdp: return "sdp";
    case Method::sdp_gn: return "sdp-gn";
    case Method::sdp_dl: return "sdp-dl";
  }
  return "unknown";
}

Method parse_method(const std::string& name) {
  if (name == "gn") return Method::gn;
  if (name == "dl") return Method::dl;
  if (name == "sdp") return Method::sdp;
  if (name == "sdp-gn") return Method::sdp_gn;
  if (name == "sdp-dl") return Method::sdp_dl;
  throw std::invalid_argument("unknown method: " + name +
                              " (expected gn, dl, sdp, sdp-gn or sdp-dl)");
}

MeasurementSet Dataset::batch() const {
  MeasurementSet set;
  std::map<std::pair<double, std::string>, const SatelliteState*> index;
  for (const auto& sat : ephemeris) {
    index[{sat.epoch, sat.sat_id}] = &sat;
  }
  set.satellites.reserve(doppler.size());
  set.measurements.reserve(doppler.size());
  for (const auto& obs : doppler) {
    const auto it = index.find({obs.epoch, obs.sat_id});
    if (it == index.end()) {
      std::ostringstream msg;
      msg << "join failure: doppler record (" << obs.sat_id << ", " << obs.epoch
          << ") has no ephemeris record";
      throw std::invalid_argument(msg.str());
    }
    set.satellites.push_back(*it->second);
    set.measurements.push_back(obs);
  }
  set.scaled = false;
  return set;
}

// ---------------------------------------------------------------------------
// CSV / config ingestion
// ---------------------------------------------------------------------------

namespace {

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> fields;
  std::string field;
  std::istringstream stream(line);
  while (std::getline(stream, field, ',')) fields.push_back(field);
  if (!line.empty() && line.back() == ',') fields.push_back("");
  return fields;
}

double parse_double(const std::string& text, const std::string& file, int line_no,
                    const std::string& column) {
  try {
    std::size_t consumed = 0;
    const double value = std::stod(text, &consumed);
    if (consumed != text.size()) throw std::invalid_argument("trailing characters");
    return value;
  } catch (const std::exception&) {
    std::ostringstream msg;
    msg << file << ":" << line_no << ": cannot parse '" << text << "' as " << column;
    throw std::runtime_error(msg.str());
  }
}

void expect_header(const std::string& got, const std::string& want, const std::string& file) {
  if (got != want) {
    throw std::runtime_error(file + ":1: expected header '" + want + "', got '" + got + "'");
  }
}

json load_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  json j;
  try {
    in >> j;
  } catch (const std::exception& ex) {
    throw std::runtime_error(path + ": " + ex.what());
  }
  return j;
}

}  // namespace

Dataset load_dataset(const std::string& ephemeris_path, const std::string& doppler_path,
                     const std::string& config_path) {
  Dataset dataset;

  {
    std::ifstream in(ephemeris_path);
    if (!in) throw std::runtime_error("cannot open " + ephemeris_path);
    std::string line;
    int line_no = 1;
    std::getline(in, line);
    expect_header(line, "epoch,sat_id,x_m,y_m,z_m,vx_mps,vy_mps,vz_mps", ephemeris_path);
    while (std::getline(in, line)) {
      ++line_no;
      if (line.empty()) continue;
      const auto f = split_csv(line);
      if (f.size() != 8) {
        throw std::runtime_error(ephemeris_path + ":" + std::to_string(line_no) +
                                 ": expected 8 fields, got " + std::to_string(f.size()));
      }
      SatelliteState sat;
      sat.epoch = parse_double(f[0], ephemeris_path, line_no, "epoch");
      sat.sat_id = f[1];
      sat.position = {parse_double(f[2], ephemeris_path, line_no, "x_m"),
                      parse_double(f[3], ephemeris_path, line_no, "y_m"),
                      parse_double(f[4], ephemeris_path, line_no, "z_m")};
      sat.velocity = {parse_double(f[5], ephemeris_path, line_no, "vx_mps"),
                      parse_double(f[6], ephemeris_path, line_no, "vy_mps"),
                      parse_double(f[7], ephemeris_path, line_no, "vz_mps")};
      if (!sat.position.allFinite() || !sat.velocity.allFinite() ||
          sat.velocity.norm() >= 1.2e4) {
        throw std::runtime_error(ephemeris_path + ":" + std::to_string(line_no) +
                                 ": implausible satellite state");
      }
      if (!plausible_leo_radius(sat)) {
        fprintf(stderr, "warning: %s:%d: radius %.0f m outside the LEO shell\n",
                ephemeris_path.c_str(), line_no, sat.position.norm());
      }
      dataset.ephemeris.push_back(std::move(sat));
    }
  }

  {
    std::ifstream in(doppler_path);
    if (!in) throw std::runtime_error("cannot open " + doppler_path);
    std::string line;
    int line_no = 1;
    std::getline(in, line);
    expect_header(line, "epoch,sat_id,doppler_mps,sigma_mps", doppler_path);
    while (std::getline(in, line)) {
      ++line_no;
      if (line.empty()) continue;
      const auto f = split_csv(line);
      if (f.size() != 4) {
        throw std::runtime_error(doppler_path + ":" + std::to_string(line_no) +
                                 ": expected 4 fields, got " + std::to_string(f.size()));
      }
      DopplerMeasurement obs;
      obs.epoch = parse_double(f[0], doppler_path, line_no, "epoch");
      obs.sat_id = f[1];
      obs.value = parse_double(f[2], doppler_path, line_no, "doppler_mps");
      obs.sigma = parse_double(f[3], doppler_path, line_no, "sigma_mps");
      if (!std::isfinite(obs.value) || !(obs.sigma > 0.0)) {
        throw std::runtime_error(doppler_path + ":" + std::to_string(line_no) +
                                 ": doppler must be finite and sigma positive");
      }
      dataset.doppler.push_back(std::move(obs));
    }
  }

  if (!config_path.empty()) {
    const json j = load_json(config_path);
    if (j.contains("metadata")) {
      const auto& md = j["metadata"];
      dataset.metadata.constellation = md.value("constellation", dataset.metadata.constellation);
      dataset.metadata.carrier_frequency_hz =
          md.value("carrier_frequency_hz", dataset.metadata.carrier_frequency_hz);
      dataset.metadata.duration_s = md.value("duration_s", dataset.metadata.duration_s);
    }
    if (j.contains("truth_receiver")) {
      const auto& tr = j["truth_receiver"];
      ReceiverState truth;
      const std::string type = tr.value("type", "ecef");
      if (type == "geodetic") {
        truth.position = geodetic_to_ecef(tr.at("lat_deg").get<double>(),
                                          tr.at("lon_deg").get<double>(),
                                          tr.at("height_m").get<double>());
      } else if (type == "ecef") {
        truth.position = {tr.at("x_m").get<double>(), tr.at("y_m").get<double>(),
                          tr.at("z_m").get<double>()};
      } else {
        throw std::runtime_error(config_path + ": truth_receiver.type must be geodetic or ecef");
      }
      truth.clock_drift_term = tr.value("clock_term_mps", 0.0);
      dataset.truth = truth;
    }
  }

  if (dataset.doppler.size() < 4) {
    throw std::invalid_argument("underdetermined: dataset has " +
                                std::to_string(dataset.doppler.size()) +
                                " measurements, need at least 4");
  }
  dataset.batch();  // validates the join eagerly
  return dataset;
}

void save_dataset(const Dataset& dataset, const std::string& ephemeris_path,
                  const std::string& doppler_path, const std::string& config_path) {
  {
    std::ofstream out(ephemeris_path);
    if (!out) throw std::runtime_error("cannot write " + ephemeris_path);
    out.precision(17);
    out << "epoch,sat_id,x_m,y_m,z_m,vx_mps,vy_mps,vz_mps\n";
    for (const auto& sat : dataset.ephemeris) {
      out << sat.epoch << "," << sat.sat_id << "," << sat.position.x() << "," << sat.position.y()
          << "," << sat.position.z() << "," << sat.velocity.x() << "," << sat.velocity.y() << ","
          << sat.velocity.z() << "\n";
    }
  }
  {
    std::ofstream out(doppler_path);
    if (!out) throw std::runtime_error("cannot write " + doppler_path);
    out.precision(17);
    out << "epoch,sat_id,doppler_mps,sigma_mps\n";
    for (const auto& obs : dataset.doppler) {
      out << obs.epoch << "," << obs.sat_id << "," << obs.value << "," << obs.sigma << "\n";
    }
  }
  if (!config_path.empty()) {
    json j;
    j["metadata"] = {{"constellation", dataset.metadata.constellation},
                     {"carrier_frequency_hz", dataset.metadata.carrier_frequency_hz},
                     {"duration_s", dataset.metadata.duration_s}};
    if (dataset.truth) {
      j["truth_receiver"] = {{"type", "ecef"},
                             {"x_m", dataset.truth->position.x()},
                             {"y_m", dataset.truth->position.y()},
                             {"z_m", dataset.truth->position.z()},
                             {"clock_term_mps", dataset.truth->clock_drift_term}};
    }
    std::ofstream out(config_path);
    if (!out) throw std::runtime_error("cannot write " + config_path);
    out << j.dump(2) << "\n";
  }
}

PipelineConfig load_pipeline_config(const std::string& path) {
  PipelineConfig config;
  if (path.empty()) return config;
  const json j = load_json(path);
  if (j.contains("scenario")) {
    const auto& s = j["scenario"];
    config.scenario.grid_count = s.value("grid_count", config.scenario.grid_count);
    config.scenario.grid_extent_km = s.value("grid_extent_km", config.scenario.grid_extent_km);
    config.scenario.altitude_km = s.value("altitude_km", config.scenario.altitude_km);
    config.scenario.carrier_frequency_hz =
        s.value("carrier_frequency_hz", config.scenario.carrier_frequency_hz);
    config.scenario.center_lat_deg = s.value("center_lat_deg", config.scenario.center_lat_deg);
    config.scenario.center_lon_deg = s.value("center_lon_deg", config.scenario.center_lon_deg);
    config.scenario.receiver_clock_term_truth =
        s.value("receiver_clock_term_mps", config.scenario.receiver_clock_term_truth);
    config.scenario.monte_carlo_trials =
        s.value("monte_carlo_trials", config.scenario.monte_carlo_trials);
    config.scenario.rng_seed = s.value("rng_seed", config.scenario.rng_seed);
    config.scenario.velocity_spread_deg =
        s.value("velocity_spread_deg", config.scenario.velocity_spread_deg);
    if (s.contains("velocity_pattern")) {
      const std::string pattern = s["velocity_pattern"].get<std::string>();
      if (pattern == "alternating") {
        config.scenario.velocity_pattern = VelocityPattern::alternating;
      } else if (pattern == "east") {
        config.scenario.velocity_pattern = VelocityPattern::east;
      } else if (pattern == "random") {
        config.scenario.velocity_pattern = VelocityPattern::random;
      } else {
        throw std::runtime_error("velocity_pattern must be alternating, east or random");
      }
    }
  }
  if (j.contains("noise")) {
    const auto& n = j["noise"];
    config.noise.sat_position_std = n.value("sat_position_std_m", config.noise.sat_position_std);
    config.noise.sat_velocity_std =
        n.value("sat_velocity_std_mps", config.noise.sat_velocity_std);
    config.noise.doppler_std = n.value("doppler_std_mps", config.noise.doppler_std);
  }
  if (j.contains("local")) {
    const auto& l = j["local"];
    config.local.max_iterations = l.value("max_iterations", config.local.max_iterations);
    config.local.step_tolerance = l.value("step_tolerance_m", config.local.step_tolerance);
    config.local.residual_tolerance =
        l.value("residual_tolerance_mps", config.local.residual_tolerance);
    config.local.trust_radius_initial =
        l.value("trust_radius_initial_m", config.local.trust_radius_initial);
    config.local.trust_radius_max = l.value("trust_radius_max_m", config.local.trust_radius_max);
    config.local.gain_low = l.value("gain_low", config.local.gain_low);
    config.local.gain_high = l.value("gain_high", config.local.gain_high);
  }
  if (j.contains("sdp")) {
    const auto& s = j["sdp"];
    config.sdp.tol_target = s.value("tol_target", config.sdp.tol_target);
    config.sdp.tol_accept = s.value("tol_accept", config.sdp.tol_accept);
    config.sdp.max_iterations = s.value("max_iterations", config.sdp.max_iterations);
  }
  if (j.contains("gwa")) {
    const auto& g = j["gwa"];
    config.gwa.max_iterations = g.value("max_iterations", config.gwa.max_iterations);
    config.gwa.eta_threshold = g.value("eta_threshold", config.gwa.eta_threshold);
    config.gwa.range_floor_m = g.value("range_floor_m", config.gwa.range_floor_m);
  }
  if (j.contains("scaling")) {
    const auto& s = j["scaling"];
    config.scaling.length_scale = s.value("length_scale", config.scaling.length_scale);
    config.scaling.rate_scale = s.value("rate_scale", config.scaling.rate_scale);
  }
  return config;
}

void save_pipeline_config(const PipelineConfig& config, const std::string& path) {
  json j;
  j["scenario"] = {{"grid_count", config.scenario.grid_count},
                   {"grid_extent_km", config.scenario.grid_extent_km},
                   {"altitude_km", config.scenario.altitude_km},
                   {"carrier_frequency_hz", config.scenario.carrier_frequency_hz},
                   {"center_lat_deg", config.scenario.center_lat_deg},
                   {"center_lon_deg", config.scenario.center_lon_deg},
                   {"receiver_clock_term_mps", config.scenario.receiver_clock_term_truth},
                   {"monte_carlo_trials", config.scenario.monte_carlo_trials},
                   {"rng_seed", config.scenario.rng_seed},
                   {"velocity_pattern",
                    config.scenario.velocity_pattern == VelocityPattern::alternating
                        ? "alternating"
                        : (config.scenario.velocity_pattern == VelocityPattern::east ? "east"
                                                                                     : "random")},
                   {"velocity_spread_deg", config.scenario.velocity_spread_deg}};
  j["noise"] = {{"sat_position_std_m", config.noise.sat_position_std},
                {"sat_velocity_std_mps", config.noise.sat_velocity_std},
                {"doppler_std_mps", config.noise.doppler_std}};
  j["local"] = {{"max_iterations", config.local.max_iterations},
                {"step_tolerance_m", config.local.step_tolerance},
                {"residual_tolerance_mps", config.local.residual_tolerance},
                {"trust_radius_initial_m", config.local.trust_radius_initial},
                {"trust_radius_max_m", config.local.trust_radius_max},
                {"gain_low", config.local.gain_low},
                {"gain_high", config.local.gain_high}};
  j["sdp"] = {{"tol_target", config.sdp.tol_target},
              {"tol_accept", config.sdp.tol_accept},
              {"max_iterations", config.sdp.max_iterations}};
  j["gwa"] = {{"max_iterations", config.gwa.max_iterations},
              {"eta_threshold", config.gwa.eta_threshold},
              {"range_floor_m", config.gwa.range_floor_m}};
  j["scaling"] = {{"length_scale", config.scaling.length_scale},
                  {"rate_scale", config.scaling.rate_scale}};
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << j.dump(2) << "\n";
}

// ---------------------------------------------------------------------------
// Pipelines
// ---------------------------------------------------------------------------

CertifiableResult run_certifiable(const MeasurementSet& data_si, const GwaConfig& gwa,
                                  const SdpOptions& sdp, const ScalingConfig& scaling) {
  const MeasurementSet scaled = apply_scaling(data_si, scaling);
  SdpOptions sdp_main = sdp;
  sdp_main.extended_precision = true;
  const SdpSolverHandle solve = [sdp_main](const SdpInstance& inst) {
    return solve_sdp(inst, sdp_main);
  };
  GwaConfig gwa_run = gwa;
  if (!gwa_run.clock_search_solver) {
    SdpOptions coarse = sdp;
    coarse.tol_target = 1e-5;
    coarse.tol_accept = 1e-2;
    coarse.max_iterations = 40;
    SdpOptions medium = coarse;
    medium.tol_target = 1e-7;
    medium.tol_accept = 1e-4;
    medium.max_iterations = 60;
    gwa_run.clock_search_solver = [coarse](const SdpInstance& inst) {
      return solve_sdp(inst, coarse);
    };
    gwa_run.clock_refine_solver = [medium](const SdpInstance& inst) {
      return solve_sdp(inst, medium);
    };
  }
  CertifiableResult result;
  result.gwa = run_gwa(scaled.satellites, scaled.measurements, solve, gwa_run, scaling);
  const Recovery recovery = recover_solution(*result.gwa.solution, *result.gwa.problem);
  result.estimate = recovery.receiver;
  result.certificate = certify(result.gwa);
  return result;
}

namespace {

void fill_errors(RunEntry& entry, const Dataset& dataset) {
  if (dataset.truth && entry.success) {
    entry.error_3d_km = (entry.estimate.position - dataset.truth->position).norm() / 1e3;
    entry.horizontal_m = horizontal_error_m(entry.estimate.position, dataset.truth->position);
  }
}

}  // namespace

RunEntry run_pipeline(const Dataset& dataset, Method method,
                      const std::optional<ReceiverState>& initial, const PipelineConfig& config) {
  RunEntry entry;
  entry.method = method;
  const auto start = std::chrono::steady_clock::now();
  const MeasurementSet batch = dataset.batch();

  try {
    if (method == Method::gn || method == Method::dl) {
      if (!initial) {
        throw std::invalid_argument(to_string(method) + " requires an initial state");
      }
      const Eigen::VectorXd weights = inverse_variance_weights(batch.measurements);
      const LocalSolution sol =
          method == Method::gn
              ? solve_gauss_newton(*initial, batch.satellites, batch.measurements, weights,
                                   config.local)
              : solve_dog_leg(*initial, batch.satellites, batch.measurements, weights,
                              config.local);
      entry.success = sol.converged;
      entry.estimate = sol.estimate;
      entry.iterations = sol.iterations;
      entry.failure = sol.failure_reason;
    } else {
      const CertifiableResult convex =
          run_certifiable(batch, config.gwa, config.sdp, config.scaling);
      entry.certificate = convex.certificate;
      entry.iterations = convex.gwa.solves;
      if (method == Method::sdp) {
        entry.success = true;
        entry.estimate = convex.estimate;
      } else {
        const Eigen::VectorXd weights = inverse_variance_weights(batch.measurements);
        const LocalSolution sol =
            method == Method::sdp_gn
                ? solve_gauss_newton(convex.estimate, batch.satellites, batch.measurements,
                                     weights, config.local)
                : solve_dog_leg(convex.estimate, batch.satellites, batch.measurements, weights,
                                config.local);
        entry.success = sol.converged;
        entry.estimate = sol.estimate;
        entry.iterations += sol.iterations;
        entry.failure = sol.failure_reason;
      }
    }
  } catch (const std::exception& ex) {
    entry.success = false;
    entry.failure = ex.what();
  }
  entry.seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  fill_errors(entry, dataset);
  return entry;
}

ReceiverState initial_at_distance(const ReceiverState& truth, double distance_km,
                                  int direction_index, std::uint64_t seed) {
  const GeodeticCoord site = ecef_to_geodetic(truth.position);
  Vec3 direction;
  if (direction_index == 0) {
    // Local east, the documented default.
    direction = enu_rotation(site.lat_deg, site.lon_deg).row(0).transpose();
  } else {
    auto rng = make_stream(seed, 0xd1cULL + direction_index);
    std::normal_distribution<double> gauss(0.0, 1.0);
    direction = Vec3{gauss(rng), gauss(rng), gauss(rng)}.normalized();
  }
  ReceiverState initial = truth;
  initial.position += distance_km * 1e3 * direction;
  initial.clock_drift_term = 0.0;
  return initial;
}

RunReport initial_distance_sweep(const Dataset& dataset, const std::vector<double>& distances_km,
                                 const std::vector<Method>& methods, const PipelineConfig& config,
                                 int directions_per_distance) {
  if (!dataset.truth) {
    throw std::invalid_argument("initial_distance_sweep requires a ground-truth receiver");
  }
  RunReport report;
  report.methods = methods;

  // SDP-prefixed methods ignore the initial point; computed once and reused,
  // which is bit-identical to recomputing because the pipeline is
  // deterministic.
  std::map<Method, RunEntry> invariant_cache;

  for (const double distance : distances_km) {
    SweepRow row;
    row.init_distance_km = distance;
    for (const Method method : methods) {
      if (method != Method::gn && method != Method::dl) {
        auto it = invariant_cache.find(method);
        if (it == invariant_cache.end()) {
          it = invariant_cache
                   .emplace(method, run_pipeline(dataset, method, std::nullopt, config))
                   .first;
        }
        row.entries.push_back(it->second);
        continue;
      }
      if (directions_per_distance <= 1) {
        const ReceiverState initial = initial_at_distance(*dataset.truth, distance);
        row.entries.push_back(run_pipeline(dataset, method, initial, config));
      } else {
        // Average the 3D error over K random directions; success requires
        // every direction to converge.
        RunEntry merged;
        merged.method = method;
        merged.success = true;
        double error_sum = 0.0, horiz_sum = 0.0, seconds = 0.0;
        int count = 0;
        for (int k = 0; k < directions_per_distance; ++k) {
          const ReceiverState initial =
              initial_at_distance(*dataset.truth, distance, k, config.scenario.rng_seed);
          const RunEntry entry = run_pipeline(dataset, method, initial, config);
          seconds += entry.seconds;
          if (!entry.success) {
            merged.success = false;
            merged.failure = entry.failure;
            continue;
          }
          error_sum += entry.error_3d_km.value_or(0.0);
          horiz_sum += entry.horizontal_m.value_or(0.0);
          merged.estimate = entry.estimate;
          ++count;
        }
        merged.seconds = seconds;
        if (merged.success && count > 0) {
          merged.error_3d_km = error_sum / count;
          merged.horizontal_m = horiz_sum / count;
        }
        row.entries.push_back(merged);
      }
    }
    report.rows.push_back(std::move(row));
  }
  return report;
}

void write_report_csv(const RunReport& report, std::ostream& out) {
  out << "init_distance_km";
  for (const Method m : report.methods) out << "," << to_string(m) << "_error_3d_km";
  out << "\n";
  for (const auto& row : report.rows) {
    out << row.init_distance_km;
    for (const auto& entry : row.entries) {
      out << ",";
      if (entry.success && entry.error_3d_km) {
        out << *entry.error_3d_km;
      } else {
        out << "-";
      }
    }
    out << "\n";
  }
}

void write_report_json(const RunReport& report, std::ostream& out) {
  json j;
  j["methods"] = json::array();
  for (const Method m : report.methods) j["methods"].push_back(to_string(m));
  j["rows"] = json::array();
  for (const auto& row : report.rows) {
    json r;
    r["init_distance_km"] = row.init_distance_km;
    r["entries"] = json::array();
    for (const auto& entry : row.entries) {
      json e;
      e["method"] = to_string(entry.method);
      e["success"] = entry.success;
      if (entry.error_3d_km) e["error_3d_km"] = *entry.error_3d_km;
      if (entry.horizontal_m) e["horizontal_m"] = *entry.horizontal_m;
      e["iterations"] = entry.iterations;
      e["seconds"] = entry.seconds;
      if (!entry.failure.empty()) e["failure"] = entry.failure;
      e["position_ecef_m"] = {entry.estimate.position.x(), entry.estimate.position.y(),
                              entry.estimate.position.z()};
      e["clock_term_mps"] = entry.estimate.clock_drift_term;
      if (entry.certificate) {
        const Certificate& c = *entry.certificate;
        e["certificate"] = {{"verdict", to_string(c.verdict)},
                            {"eigenvalue_ratio", c.eigenvalue_ratio},
                            {"rank_tight", c.rank_tight},
                            {"constraint_residual_max", c.constraint_residual_max},
                            {"dual_psd_margin", c.dual_psd_margin},
                            {"dual_null_residual", c.dual_null_residual},
                            {"duality_gap", c.duality_gap},
                            {"p_star", c.p_star},
                            {"d_star", c.d_star},
                            {"q_star", c.q_star}};
      }
      r["entries"].push_back(std::move(e));
    }
    j["rows"].push_back(std::move(r));
  }
  out << j.dump(2) << "\n";
}

}  // namespace certidop
