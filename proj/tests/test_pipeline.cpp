#include <doctest.h>

#include <cstdio>
#include <filesystem>
#include <unistd.h>
#include <fstream>

#include "certidop/pipeline.hpp"
#include "support/synthetic.hpp"

using namespace certidop;

TEST_SUITE_BEGIN("pipeline");

namespace {

namespace fs = std::filesystem;

struct TempDir {
  fs::path path;
  TempDir() {
    path = fs::temp_directory_path() / ("certidop_test_" + std::to_string(::getpid()));
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
  std::string file(const std::string& name) const { return (path / name).string(); }
};

Dataset make_dataset(const synthetic::Instance& instance) {
  Dataset dataset;
  dataset.ephemeris = instance.observed.satellites;
  dataset.doppler = instance.observed.measurements;
  dataset.truth = instance.truth;
  dataset.metadata.constellation = "synthetic";
  dataset.metadata.carrier_frequency_hz = 1.626e9;
  return dataset;
}

}  // namespace

TEST_CASE("dataset round-trips through the CSV + config files") {
  TempDir dir;
  const Dataset original = make_dataset(synthetic::random_small(6, 51));
  save_dataset(original, dir.file("eph.csv"), dir.file("dop.csv"), dir.file("cfg.json"));
  const Dataset loaded = load_dataset(dir.file("eph.csv"), dir.file("dop.csv"),
                                      dir.file("cfg.json"));

  REQUIRE(loaded.ephemeris.size() == original.ephemeris.size());
  REQUIRE(loaded.doppler.size() == original.doppler.size());
  for (std::size_t i = 0; i < original.ephemeris.size(); ++i) {
    CHECK(loaded.ephemeris[i].sat_id == original.ephemeris[i].sat_id);
    CHECK(loaded.ephemeris[i].position == original.ephemeris[i].position);
    CHECK(loaded.ephemeris[i].velocity == original.ephemeris[i].velocity);
  }
  for (std::size_t i = 0; i < original.doppler.size(); ++i) {
    CHECK(loaded.doppler[i].value == original.doppler[i].value);
    CHECK(loaded.doppler[i].sigma == original.doppler[i].sigma);
  }
  REQUIRE(loaded.truth.has_value());
  CHECK((loaded.truth->position - original.truth->position).norm() < 1e-9);
}

TEST_CASE("loader errors carry file and line information") {
  TempDir dir;
  SUBCASE("bad ephemeris header") {
    std::ofstream(dir.file("eph.csv")) << "epoch,sat,x\n";
    std::ofstream(dir.file("dop.csv")) << "epoch,sat_id,doppler_mps,sigma_mps\n";
    CHECK_THROWS_WITH_AS(load_dataset(dir.file("eph.csv"), dir.file("dop.csv"), ""),
                         doctest::Contains("expected header"), std::runtime_error);
  }
  SUBCASE("unparseable field is reported with its line number") {
    std::ofstream(dir.file("eph.csv"))
        << "epoch,sat_id,x_m,y_m,z_m,vx_mps,vy_mps,vz_mps\n"
        << "0,S1,7000000,0,0,0,oops,0\n";
    std::ofstream(dir.file("dop.csv")) << "epoch,sat_id,doppler_mps,sigma_mps\n";
    CHECK_THROWS_WITH_AS(load_dataset(dir.file("eph.csv"), dir.file("dop.csv"), ""),
                         doctest::Contains(":2:"), std::runtime_error);
  }
  SUBCASE("empty doppler file is underdetermined") {
    const Dataset original = make_dataset(synthetic::random_small(5, 52));
    save_dataset(original, dir.file("eph.csv"), dir.file("dop.csv"), "");
    std::ofstream(dir.file("dop.csv")) << "epoch,sat_id,doppler_mps,sigma_mps\n";
    CHECK_THROWS_WITH_AS(load_dataset(dir.file("eph.csv"), dir.file("dop.csv"), ""),
                         doctest::Contains("underdetermined"), std::invalid_argument);
  }
  SUBCASE("unjoinable doppler record") {
    const Dataset original = make_dataset(synthetic::random_small(5, 53));
    save_dataset(original, dir.file("eph.csv"), dir.file("dop.csv"), "");
    std::ofstream(dir.file("dop.csv"), std::ios::app) << "99,UNKNOWN,0,1\n";
    CHECK_THROWS_WITH_AS(load_dataset(dir.file("eph.csv"), dir.file("dop.csv"), ""),
                         doctest::Contains("join failure"), std::invalid_argument);
  }
}

TEST_CASE("pipeline config round-trips") {
  TempDir dir;
  PipelineConfig config;
  config.scenario.grid_count = 25;
  config.scenario.velocity_pattern = VelocityPattern::random;
  config.noise.doppler_std = 2.5;
  config.local.max_iterations = 55;
  config.gwa.eta_threshold = 5e-4;
  config.scaling.length_scale = 2e-7;
  save_pipeline_config(config, dir.file("pipe.json"));
  const PipelineConfig loaded = load_pipeline_config(dir.file("pipe.json"));
  CHECK(loaded.scenario.grid_count == 25);
  CHECK(loaded.scenario.velocity_pattern == VelocityPattern::random);
  CHECK(loaded.noise.doppler_std == doctest::Approx(2.5));
  CHECK(loaded.local.max_iterations == 55);
  CHECK(loaded.gwa.eta_threshold == doctest::Approx(5e-4));
  CHECK(loaded.scaling.length_scale == doctest::Approx(2e-7));
}

TEST_CASE("method parsing") {
  CHECK(parse_method("sdp-gn") == Method::sdp_gn);
  CHECK(to_string(Method::sdp_dl) == "sdp-dl");
  CHECK_THROWS_AS(parse_method("newton"), std::invalid_argument);
}

TEST_CASE("local methods require an initial state") {
  const Dataset dataset = make_dataset(synthetic::random_small(6, 54));
  const RunEntry entry = run_pipeline(dataset, Method::gn, std::nullopt, {});
  CHECK_FALSE(entry.success);
  CHECK(entry.failure.find("initial") != std::string::npos);
}

TEST_CASE("convex pipeline on a small instance") {
  const Dataset dataset = make_dataset(synthetic::random_small(8, 55));
  const RunEntry entry = run_pipeline(dataset, Method::sdp, std::nullopt, {});
  REQUIRE(entry.success);
  REQUIRE(entry.certificate.has_value());
  REQUIRE(entry.error_3d_km.has_value());
  CHECK(*entry.error_3d_km < 1.0);
  CHECK(entry.certificate->eigenvalue_ratio > 1e3);
}

TEST_CASE("sdp-prefixed methods ignore the initial point bit-identically") {
  const Dataset dataset = make_dataset(synthetic::random_small(8, 56));
  const ReceiverState far = initial_at_distance(*dataset.truth, 700.0);
  const RunEntry without = run_pipeline(dataset, Method::sdp_gn, std::nullopt, {});
  const RunEntry with = run_pipeline(dataset, Method::sdp_gn, far, {});
  REQUIRE(without.success);
  REQUIRE(with.success);
  CHECK(without.estimate.position == with.estimate.position);
  CHECK(without.estimate.clock_drift_term == with.estimate.clock_drift_term);
}

TEST_CASE("initial distance sweep emits the table shape") {
  const Dataset dataset = make_dataset(synthetic::random_small(8, 57));
  const std::vector<Method> methods{Method::gn, Method::sdp, Method::sdp_gn};
  const RunReport report = initial_distance_sweep(dataset, {0.0, 10.0, 100.0}, methods, {});
  REQUIRE(report.rows.size() == 3);
  for (const auto& row : report.rows) REQUIRE(row.entries.size() == 3);

  SUBCASE("distance zero converges local methods trivially") {
    CHECK(report.rows[0].entries[0].success);
    CHECK(*report.rows[0].entries[0].error_3d_km < 1e-3);
  }
  SUBCASE("sdp column is constant across rows") {
    for (const auto& row : report.rows) {
      CHECK(*row.entries[1].error_3d_km == *report.rows[0].entries[1].error_3d_km);
    }
  }
  SUBCASE("csv rendering marks failures with a dash") {
    RunReport failing = report;
    failing.rows[1].entries[0].success = false;
    std::ostringstream out;
    write_report_csv(failing, out);
    CHECK(out.str().find(",-") != std::string::npos);
    CHECK(out.str().find("init_distance_km,gn_error_3d_km,sdp_error_3d_km") == 0);
  }
  SUBCASE("json report carries certificates for convex methods") {
    std::ostringstream out;
    write_report_json(report, out);
    CHECK(out.str().find("\"certificate\"") != std::string::npos);
    CHECK(out.str().find("\"eigenvalue_ratio\"") != std::string::npos);
  }
}

TEST_CASE("initial_at_distance places the point at the requested distance") {
  const auto instance = synthetic::random_small(5, 58);
  for (const double km : {1.0, 580.0, 5000.0}) {
    const ReceiverState initial = initial_at_distance(instance.truth, km);
    CHECK((initial.position - instance.truth.position).norm() ==
          doctest::Approx(km * 1e3).epsilon(1e-12));
  }
}

TEST_SUITE_END();
