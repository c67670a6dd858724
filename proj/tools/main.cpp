#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <optional>

#include "certidop/certify.hpp"
#include "certidop/geodesy.hpp"
#include "certidop/pipeline.hpp"
#include "certidop/scaling.hpp"
#include "certidop/sim.hpp"

namespace {

using namespace certidop;

constexpr int kExitOk = 0;
constexpr int kExitParse = 2;
constexpr int kExitSolver = 3;
constexpr int kExitNotTight = 4;

struct CommonOpts {
  std::string config_path;
  std::string out_path;
  std::optional<std::uint64_t> seed;
};

PipelineConfig make_config(const CommonOpts& opts) {
  PipelineConfig config = load_pipeline_config(opts.config_path);
  if (opts.seed) config.scenario.rng_seed = *opts.seed;
  return config;
}

std::ofstream open_out(const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  return out;
}

Dataset simulate_dataset(const PipelineConfig& config) {
  const auto constellation = generate_constellation(config.scenario);
  const auto truth = place_receiver(config.scenario, constellation);
  auto rng = make_stream(config.scenario.rng_seed, 1);
  const auto synth = synthesize_measurements(truth, constellation, config.noise, rng);

  Dataset dataset;
  dataset.ephemeris = synth.observed.satellites;
  dataset.doppler = synth.observed.measurements;
  dataset.truth = truth;
  dataset.metadata.constellation = "synthetic";
  dataset.metadata.carrier_frequency_hz = config.scenario.carrier_frequency_hz;
  dataset.metadata.duration_s = 0.0;
  return dataset;
}

Dataset load_or_simulate(const std::string& eph, const std::string& dop,
                         const std::string& dataset_config, const PipelineConfig& config) {
  if (!eph.empty()) {
    return load_dataset(eph, dop, dataset_config);
  }
  return simulate_dataset(config);
}

void print_entry(const RunEntry& entry) {
  std::cout << to_string(entry.method) << ": ";
  if (!entry.success) {
    std::cout << "- (failure: " << entry.failure << ")";
  } else if (entry.error_3d_km) {
    std::cout << "3D error " << *entry.error_3d_km << " km";
    if (entry.horizontal_m) std::cout << ", horizontal " << *entry.horizontal_m << " m";
  } else {
    std::cout << "position " << entry.estimate.position.transpose() << " m";
  }
  if (entry.certificate) {
    std::cout << " [" << to_string(entry.certificate->verdict) << ", eig ratio "
              << entry.certificate->eigenvalue_ratio << "]";
  }
  std::cout << "\n";
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Certifiably optimal LEO Doppler positioning toolkit"};
  app.require_subcommand(1);

  CommonOpts opts;
  std::string eph_path, dop_path, dataset_config;
  std::string method_name = "sdp";
  double init_distance_km = 0.0;
  std::vector<double> sweep_distances{1, 10, 100, 580, 1000};
  std::vector<std::string> sweep_methods{"gn", "dl", "sdp", "sdp-gn", "sdp-dl"};
  bool strict = false;
  int grid_cells = 8;
  double grid_max = 0.1;
  int grid_trials = 3;

  app.add_option("--config", opts.config_path, "pipeline config JSON");
  app.add_option("--seed", opts.seed, "RNG seed override");
  app.add_option("--out", opts.out_path, "output path (or prefix)");

  auto add_dataset_opts = [&](CLI::App* cmd) {
    cmd->add_option("--ephemeris", eph_path, "ephemeris CSV");
    cmd->add_option("--doppler", dop_path, "doppler CSV");
    cmd->add_option("--dataset-config", dataset_config, "dataset metadata/truth JSON");
  };

  CLI::App* simulate = app.add_subcommand("simulate", "emit a synthetic dataset");

  CLI::App* solve = app.add_subcommand("solve", "run one method on one dataset");
  add_dataset_opts(solve);
  solve->add_option("--method", method_name, "gn, dl, sdp, sdp-gn or sdp-dl");
  solve->add_option("--init-distance-km", init_distance_km,
                    "initial distance from truth for gn/dl");

  CLI::App* sweep = app.add_subcommand("sweep", "initial-distance table");
  add_dataset_opts(sweep);
  sweep->add_option("--distances-km", sweep_distances, "initial distances");
  sweep->add_option("--methods", sweep_methods, "methods to compare");

  std::string dump_problem_path, export_sdpa_path;
  CLI::App* certify_cmd = app.add_subcommand("certify", "certificate details for one solve");
  add_dataset_opts(certify_cmd);
  certify_cmd->add_flag("--strict", strict, "exit 4 when the certificate is not tight");
  certify_cmd->add_option("--dump-problem", dump_problem_path,
                          "write the lifted problem in the matrix-text format");
  certify_cmd->add_option("--export-sdpa", export_sdpa_path,
                          "write the solved conic instance in the sparse text format");

  CLI::App* bound = app.add_subcommand("bound", "a priori noise-bound grid");
  bound->add_option("--cells", grid_cells, "cells per axis");
  bound->add_option("--max-noise", grid_max, "largest velocity/Doppler STD in m/s");
  bound->add_option("--trials", grid_trials, "trials per cell");

  CLI::App* bench = app.add_subcommand("bench", "Monte-Carlo campaign");
  bench->add_option("--method", method_name, "estimator under test");
  bench->add_option("--init-distance-km", init_distance_km, "initial distance for gn/dl");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitParse;
  }

  try {
    const PipelineConfig config = make_config(opts);

    if (simulate->parsed()) {
      const Dataset dataset = simulate_dataset(config);
      const std::string base = opts.out_path.empty() ? "scenario" : opts.out_path;
      save_dataset(dataset, base + "_ephemeris.csv", base + "_doppler.csv",
                   base + "_truth.json");
      std::cout << "wrote " << base << "_{ephemeris,doppler}.csv and " << base << "_truth.json ("
                << dataset.doppler.size() << " measurements, " << dataset.ephemeris.size()
                << " satellite states)\n";
      return kExitOk;
    }

    if (solve->parsed()) {
      const Dataset dataset = load_or_simulate(eph_path, dop_path, dataset_config, config);
      const Method method = parse_method(method_name);
      std::optional<ReceiverState> initial;
      if (method == Method::gn || method == Method::dl) {
        if (!dataset.truth) {
          std::cerr << "gn/dl need a ground-truth receiver to place the initial point\n";
          return kExitParse;
        }
        initial = initial_at_distance(*dataset.truth, init_distance_km);
      }
      const RunEntry entry = run_pipeline(dataset, method, initial, config);
      print_entry(entry);
      if (!opts.out_path.empty()) {
        RunReport report;
        report.methods = {method};
        report.rows.push_back({init_distance_km, {entry}});
        auto out = open_out(opts.out_path);
        write_report_json(report, out);
      }
      return entry.success ? kExitOk : kExitSolver;
    }

    if (sweep->parsed()) {
      const Dataset dataset = load_or_simulate(eph_path, dop_path, dataset_config, config);
      std::vector<Method> methods;
      for (const auto& name : sweep_methods) methods.push_back(parse_method(name));
      const RunReport report = initial_distance_sweep(dataset, sweep_distances, methods, config);
      write_report_csv(report, std::cout);
      if (!opts.out_path.empty()) {
        auto out = open_out(opts.out_path);
        write_report_json(report, out);
      }
      return kExitOk;
    }

    if (certify_cmd->parsed()) {
      const Dataset dataset = load_or_simulate(eph_path, dop_path, dataset_config, config);
      const CertifiableResult result =
          run_certifiable(dataset.batch(), config.gwa, config.sdp, config.scaling);
      if (!dump_problem_path.empty()) {
        auto out = open_out(dump_problem_path);
        write_problem_text(*result.gwa.problem, out);
      }
      if (!export_sdpa_path.empty()) {
        auto out = open_out(export_sdpa_path);
        write_sdpa(*result.gwa.reduced_instance, out);
      }
      const Certificate& c = result.certificate;
      std::cout << "verdict:                 " << to_string(c.verdict) << "\n"
                << "eigenvalue ratio:        " << c.eigenvalue_ratio << "\n"
                << "constraint residual max: " << c.constraint_residual_max << "\n"
                << "dual PSD margin:         " << c.dual_psd_margin << "\n"
                << "dual null residual:      " << c.dual_null_residual << "\n"
                << "duality gap (q*-p*):     " << c.duality_gap << "\n"
                << "p*: " << c.p_star << "  d*: " << c.d_star << "  q*: " << c.q_star << "\n"
                << "GWA solves: " << result.gwa.solves << ", eta " << result.gwa.final_eta << "\n";
      if (c.verdict == Verdict::solver_failed) return kExitSolver;
      if (strict && c.verdict != Verdict::certified_optimal) return kExitNotTight;
      return kExitOk;
    }

    if (bound->parsed()) {
      NoiseBoundGridConfig grid_config;
      grid_config.gwa = config.gwa;
      grid_config.sdp = config.sdp;
      grid_config.scaling = config.scaling;
      grid_config.trials_per_cell = grid_trials;
      for (int i = 0; i < grid_cells; ++i) {
        const double level = grid_cells == 1 ? 0.0 : grid_max * i / (grid_cells - 1);
        grid_config.velocity_levels.push_back(level);
        grid_config.doppler_levels.push_back(level);
      }
      const NoiseBoundGrid grid = noise_bound_grid(config.scenario, grid_config);
      if (!opts.out_path.empty()) {
        auto out = open_out(opts.out_path);
        write_grid_csv(grid, out);
      } else {
        write_grid_csv(grid, std::cout);
      }
      return kExitOk;
    }

    if (bench->parsed()) {
      const Method method = parse_method(method_name);
      const double dist = init_distance_km;
      std::vector<Estimator> estimators;
      estimators.push_back(Estimator{
          to_string(method),
          [method, dist, &config](const MeasurementSet& observed, const ReceiverState& truth) {
            Dataset scratch;
            scratch.ephemeris = observed.satellites;
            scratch.doppler = observed.measurements;
            scratch.truth = truth;
            std::optional<ReceiverState> initial;
            if (method == Method::gn || method == Method::dl) {
              initial = initial_at_distance(truth, dist);
            }
            const RunEntry entry = run_pipeline(scratch, method, initial, config);
            return EstimateOutcome{entry.estimate, entry.success, entry.failure};
          }});
      const CampaignResult result = run_monte_carlo(config.scenario, config.noise, estimators);
      for (const auto& campaign : result.estimators) {
        std::cout << campaign.name << ": mean 3D error " << campaign.mean_error_3d_m << " m over "
                  << campaign.trials.size() - campaign.failures << " successes, "
                  << campaign.failures << " failures\n";
      }
      if (!opts.out_path.empty()) {
        auto out = open_out(opts.out_path);
        out << "estimator,trial,success,error_3d_m,horizontal_m\n";
        for (const auto& campaign : result.estimators) {
          for (const auto& t : campaign.trials) {
            out << campaign.name << "," << t.trial << "," << (t.success ? 1 : 0) << ",";
            if (t.success) {
              out << t.error_3d_m << "," << t.horizontal_m;
            } else {
              out << "-,-";
            }
            out << "\n";
          }
        }
      }
      return kExitOk;
    }
  } catch (const std::invalid_argument& ex) {
    std::cerr << "error: " << ex.what() << "\n";
    return kExitParse;
  } catch (const std::runtime_error& ex) {
    const std::string what = ex.what();
    std::cerr << "error: " << what << "\n";
    const bool solver_side = what.find("GWA iteration") != std::string::npos ||
                             what.find("solver status") != std::string::npos ||
                             what.find("recovery degenerate") != std::string::npos ||
                             what.find("not certified") != std::string::npos;
    return solver_side ? kExitSolver : kExitParse;
  }
  return kExitOk;
}
