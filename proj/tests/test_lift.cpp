#include <doctest.h>

#include <random>
#include <sstream>

#include "certidop/geodesy.hpp"
#include "certidop/lift.hpp"
#include "certidop/scaling.hpp"
#include "certidop/sdp.hpp"
#include "certidop/sim.hpp"
#include "support/oracles.hpp"
#include "support/synthetic.hpp"

using namespace certidop;

TEST_SUITE_BEGIN("lifting");

namespace {

struct ScaledInstance {
  MeasurementSet scaled;
  ReceiverState truth_scaled;
  LiftedProblem problem;
};

ScaledInstance make_scaled(int n, std::uint64_t seed, double q_spread = 0.0) {
  const auto instance = synthetic::random_small(n, seed);
  ScaledInstance out;
  out.scaled = apply_scaling(instance.observed, {});
  out.truth_scaled = scale_receiver(instance.truth, {});
  Eigen::VectorXd q = Eigen::VectorXd::Ones(n);
  if (q_spread > 0.0) {
    std::mt19937_64 rng(seed ^ 0x9e37ULL);
    std::uniform_real_distribution<double> u(1.0 - q_spread, 1.0 + q_spread);
    for (int i = 0; i < n; ++i) q(i) = u(rng);
  }
  out.problem = build_lifted_problem(out.scaled.satellites, out.scaled.measurements, q, {});
  return out;
}

Eigen::VectorXd random_lifted_state(int n, std::mt19937_64& rng) {
  std::normal_distribution<double> g(0.0, 1.0);
  Eigen::VectorXd y(4 + 2 * n);
  for (int i = 0; i < y.size(); ++i) y(i) = g(rng);
  return y;
}

}  // namespace

TEST_CASE("dimensions follow d = 4 + 2N") {
  const auto si = make_scaled(8, 5);
  CHECK(si.problem.A.rows() == 8);
  CHECK(si.problem.A.cols() == 20);
  CHECK(si.problem.state_dim() == 20);
  CHECK(si.problem.moment_dim() == 21);
  CHECK(si.problem.constraints.size() == 16);
  const SdpInstance sdp = make_sdp_instance(si.problem);
  CHECK(sdp.dim == 21);
  CHECK(sdp.B.size() == 17);  // 2N plus normalization
}

TEST_CASE("the exact lift of the truth satisfies every constraint") {
  const auto si = make_scaled(8, 6);
  const LiftedState truth = lift_state(si.truth_scaled, si.scaled.satellites, 8);
  const Eigen::VectorXd g = constraint_values(si.problem, truth.y);
  CHECK(g.lpNorm<Eigen::Infinity>() < 1e-9);

  const Eigen::MatrixXd moment = truth.y * truth.y.transpose();
  CHECK(constraint_values_moment(si.problem, moment, truth.y).lpNorm<Eigen::Infinity>() < 1e-9);
}

TEST_CASE("cost identity against the weighted residual norm") {
  std::mt19937_64 rng(17);
  const auto si = make_scaled(6, 7, 0.5);
  const Eigen::VectorXd q_inv = si.problem.q_diag.cwiseInverse();
  for (int rep = 0; rep < 100; ++rep) {
    const Eigen::VectorXd y = random_lifted_state(6, rng);
    const double encoded = qcqp_cost(si.problem, LiftedState{y, 6});
    const Eigen::VectorXd r = si.problem.A * y + si.problem.k;
    const double direct = r.dot(q_inv.cwiseProduct(r));
    CHECK(encoded == doctest::Approx(direct).epsilon(1e-12));
  }
}

TEST_CASE("cost at the exact truth lift vanishes") {
  const auto si = make_scaled(9, 8);
  const LiftedState truth = lift_state(si.truth_scaled, si.scaled.satellites, 9);
  CHECK(qcqp_cost(si.problem, truth) < 1e-12);
}

TEST_CASE("cost equals the direct polynomial evaluation on consistent states") {
  std::mt19937_64 rng(23);
  std::normal_distribution<double> g(0.0, 1.0);
  const auto si = make_scaled(7, 9, 0.5);
  for (int rep = 0; rep < 100; ++rep) {
    // consistent state: ranges and products from a perturbed position/clock
    ReceiverState probe = si.truth_scaled;
    probe.position += 0.05 * Vec3{g(rng), g(rng), g(rng)};
    probe.clock_drift_term += 0.02 * g(rng);
    const LiftedState lifted = lift_state(probe, si.scaled.satellites, 7);
    const double encoded = qcqp_cost(si.problem, lifted);
    const double direct = oracles::direct_pop_cost(probe.position, probe.clock_drift_term,
                                                   si.scaled.satellites,
                                                   si.scaled.measurements, si.problem.q_diag);
    CHECK(encoded == doctest::Approx(direct).epsilon(1e-10));
  }
}

TEST_CASE("scaling the weights scales the cost inversely") {
  const auto instance = synthetic::random_small(6, 10);
  const MeasurementSet scaled = apply_scaling(instance.observed, {});
  const Eigen::VectorXd q = Eigen::VectorXd::Ones(6);
  const double alpha = 3.7;
  const auto p1 = build_lifted_problem(scaled.satellites, scaled.measurements, q, {});
  const auto p2 = build_lifted_problem(scaled.satellites, scaled.measurements, alpha * q, {});
  std::mt19937_64 rng(3);
  const Eigen::VectorXd y = random_lifted_state(6, rng);
  CHECK(qcqp_cost(p2, LiftedState{y, 6}) ==
        doctest::Approx(qcqp_cost(p1, LiftedState{y, 6}) / alpha).epsilon(1e-12));
}

TEST_CASE("constraint encoding matches the direct polynomials on random points") {
  std::mt19937_64 rng(31);
  const auto si = make_scaled(5, 12);
  for (int rep = 0; rep < 1000; ++rep) {
    const Eigen::VectorXd y = random_lifted_state(5, rng);
    const Eigen::MatrixXd moment = y * y.transpose();
    const Eigen::VectorXd encoded = constraint_values_moment(si.problem, moment, y);
    for (int i = 0; i < 5; ++i) {
      const Vec3 sat = si.scaled.satellites[i].position;
      const double direct_range =
          (y.head<3>() - sat).squaredNorm() - y(4 + i) * y(4 + i);
      CHECK(encoded(i) == doctest::Approx(direct_range).epsilon(1e-12));
      const double direct_product = y(3) * y(4 + i) - y(4 + 5 + i);
      CHECK(encoded(5 + i) == doctest::Approx(direct_product).epsilon(1e-12));
    }
  }
}

TEST_CASE("A has full row rank on generic geometry") {
  // The z-columns carry a negated identity, so rank(A) = N for any data; the
  // conditioned system [A_red | k] used by the engine then has the
  // N x (N+4) shape whose corank argument the certifier relies on.
  const auto si = make_scaled(8, 13);
  CHECK(numeric_rank(si.problem.A) == 8);
  const Eigen::MatrixXd grad =
      constraint_gradient(si.problem, lift_state(si.truth_scaled, si.scaled.satellites, 8).y);
  CHECK(numeric_rank(grad) == 16);  // LICQ at the truth
}

TEST_CASE("unscaled inputs are rejected") {
  const auto instance = synthetic::random_small(5, 14);
  CHECK_THROWS_AS(build_lifted_problem(instance.observed.satellites,
                                       instance.observed.measurements,
                                       Eigen::VectorXd::Ones(5), {}),
                  std::logic_error);
}

TEST_CASE("problem text dump is stable and complete") {
  const auto si = make_scaled(5, 15);
  std::ostringstream out;
  write_problem_text(si.problem, out);
  const std::string text = out.str();
  CHECK(text.find("certidop-lifted-problem 1") == 0);
  CHECK(text.find("n 5 d 14") != std::string::npos);
  CHECK(text.find("constraints 10") != std::string::npos);
}

TEST_CASE("graduated weighting approximation") {
  const SdpSolverHandle solve = [](const SdpInstance& inst) { return solve_sdp(inst); };

  SUBCASE("defaults match the documented algorithm") {
    GwaConfig config;
    CHECK(config.max_iterations == 1000);
    CHECK(config.eta_threshold == doctest::Approx(1e-3));
  }

  SUBCASE("equidistant ranges converge at t = 1 with eta = 0") {
    // The default constellation's directions and velocities, with every
    // satellite re-placed at the same range from the receiver: Q is already
    // proportional to the converged weights after one solve.
    ScenarioConfig config;
    const auto base = generate_constellation(config);
    ReceiverState truth = place_receiver(config, base);
    MeasurementSet set;
    for (const auto& sat_base : base) {
      SatelliteState sat = sat_base;
      const Vec3 dir = (sat_base.position - truth.position).normalized();
      sat.position = truth.position + 1.0e6 * dir;
      DopplerMeasurement meas;
      meas.sat_id = sat.sat_id;
      meas.value = predict_doppler(truth, sat);
      meas.sigma = 1e-3;
      set.satellites.push_back(sat);
      set.measurements.push_back(meas);
    }
    const MeasurementSet scaled = apply_scaling(set, {});
    const GwaResult result =
        run_gwa(scaled.satellites, scaled.measurements, solve, GwaConfig{}, {});
    CHECK(result.converged);
    CHECK(result.iterations == 1);
    CHECK(std::abs(result.final_eta) < 1e-9);
  }

  SUBCASE("noiseless default scenario converges quickly") {
    const auto instance = synthetic::default_noiseless();
    const MeasurementSet scaled = apply_scaling(instance.observed, {});
    const GwaResult result =
        run_gwa(scaled.satellites, scaled.measurements, solve, GwaConfig{}, {});
    CHECK(result.converged);
    CHECK(result.iterations <= 10);
    CHECK(std::abs(result.final_eta) < 1e-3);
    // final Q is the normalized diag(sigma^2 / rho) of the recovered ranges
    REQUIRE(result.final_q.size() == 49);
    CHECK(std::abs(result.final_q.mean() - 1.0) < 1e-12);
  }
}

TEST_SUITE_END();
