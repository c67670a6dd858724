#include <doctest.h>

#include <sstream>

#include "certidop/lift.hpp"
#include "certidop/scaling.hpp"
#include "certidop/sdp.hpp"
#include "support/admm_sdp.hpp"
#include "support/synthetic.hpp"

using namespace certidop;

TEST_SUITE_BEGIN("sdp_engine");

namespace {

// min C.X s.t. X_11 = X_22 = 1, X >= 0 for a 2x2 cost block.
SdpInstance miniature(double a, double b, double c) {
  SdpInstance inst;
  inst.dim = 2;
  inst.C.resize(2, 2);
  inst.C << a, c, c, b;
  SparseSym e1, e2;
  e1.dim = e2.dim = 2;
  e1.add(0, 0, 1.0);
  e2.add(1, 1, 1.0);
  inst.B = {e1, e2};
  inst.rhs = Eigen::Vector2d{1.0, 1.0};
  return inst;
}

SdpInstance conditioned_noiseless(int n, std::uint64_t seed) {
  const auto instance = synthetic::random_small(n, seed);
  const MeasurementSet scaled = apply_scaling(instance.observed, {});
  const ReceiverState truth_scaled = scale_receiver(instance.truth, {});
  return make_conditioned_instance(scaled.satellites, scaled.measurements,
                                   Eigen::VectorXd::Ones(n), truth_scaled.clock_drift_term);
}

}  // namespace

TEST_CASE("analytic miniature: unit diagonal") {
  SUBCASE("pure trace cost") {
    const auto sol = solve_sdp(miniature(1.0, 1.0, 0.0));
    CHECK(sol.status == SdpStatus::solved);
    CHECK(sol.p_star == doctest::Approx(2.0).epsilon(1e-9));
  }
  SUBCASE("off-diagonal cost drives the corner: p* = a + b - 2|c|") {
    const auto sol = solve_sdp(miniature(1.0, 1.0, 0.5));
    CHECK(sol.status == SdpStatus::solved);
    CHECK(sol.p_star == doctest::Approx(1.0).epsilon(1e-8));
    CHECK(sol.S(0, 1) == doctest::Approx(-1.0).epsilon(1e-6));
  }
}

TEST_CASE("noiseless conditioned instance solves to (near) zero cost") {
  const auto inst = conditioned_noiseless(8, 41);
  const auto sol = solve_sdp(inst);
  CHECK(sol.status == SdpStatus::solved);
  CHECK(sol.p_star < 1e-8);
  CHECK(sol.max_constraint_residual < 1e-7);
  CHECK(sol.min_eigenvalue > -1e-7);
}

TEST_CASE("full lifted instance admits the zero-cost truth lift") {
  const auto instance = synthetic::random_small(8, 42);
  const MeasurementSet scaled = apply_scaling(instance.observed, {});
  const auto problem = build_lifted_problem(scaled.satellites, scaled.measurements,
                                            Eigen::VectorXd::Ones(8), {});
  const auto sol = solve_sdp(make_sdp_instance(problem));
  CHECK(sol.status == SdpStatus::solved);
  CHECK(sol.p_star < 1e-8);
}

TEST_CASE("weak duality holds on solved instances") {
  for (std::uint64_t seed : {1ULL, 2ULL, 3ULL}) {
    const auto sol = solve_sdp(conditioned_noiseless(6, seed));
    REQUIRE(sol.status == SdpStatus::solved);
    CHECK(sol.d_star <= sol.p_star + 1e-7 * (1.0 + std::abs(sol.p_star)));
  }
}

TEST_CASE("solver is deterministic") {
  const auto inst = conditioned_noiseless(7, 77);
  const auto a = solve_sdp(inst);
  const auto b = solve_sdp(inst);
  CHECK(a.status == b.status);
  CHECK(a.p_star == doctest::Approx(b.p_star).epsilon(1e-10));
  CHECK((a.S - b.S).norm() == 0.0);
}

TEST_CASE("dual matrix assembly") {
  const auto inst = conditioned_noiseless(6, 5);
  const int n_eq = static_cast<int>(inst.B.size()) - 1;

  SUBCASE("zero multipliers return the cost block") {
    const Eigen::MatrixXd h = dual_matrix(inst, Eigen::VectorXd::Zero(n_eq));
    CHECK((h - inst.C).norm() == 0.0);
  }
  SUBCASE("dual conditions hold at the solved noiseless optimum") {
    const auto sol = solve_sdp(inst);
    REQUIRE(sol.status == SdpStatus::solved);
    const Eigen::MatrixXd slack = dual_slack_matrix(inst, sol.lambda, sol.nu);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(slack, Eigen::EigenvaluesOnly);
    CHECK(eig.eigenvalues().minCoeff() > -1e-6);

    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> top(sol.S);
    Eigen::VectorXd hom = top.eigenvectors().col(inst.dim - 1);
    hom /= hom(inst.dim - 1);
    CHECK((slack * hom).norm() < 1e-6 * (1.0 + slack.norm()));
  }
  SUBCASE("multiplier length is checked") {
    CHECK_THROWS_AS(dual_matrix(inst, Eigen::VectorXd::Zero(n_eq + 2)),
                    std::invalid_argument);
  }
}

TEST_CASE("sdpa export round-trips and cross-solves") {
  const auto inst = conditioned_noiseless(5, 9);
  std::stringstream stream;
  write_sdpa(inst, stream);
  const SdpInstance parsed = read_sdpa(stream);

  CHECK(parsed.dim == inst.dim);
  CHECK(parsed.B.size() == inst.B.size());
  CHECK(parsed.normalization_index == inst.normalization_index);
  CHECK((parsed.C - inst.C).norm() < 1e-12 * inst.C.norm());

  const auto direct = solve_sdp(inst);
  const auto reparsed = solve_sdp(parsed);
  CHECK(direct.p_star == doctest::Approx(reparsed.p_star).epsilon(1e-9));

  // Independent operator-splitting solver agrees on the optimal cost.
  const auto reference = admm::solve(parsed, 60000, 1e-10);
  CHECK(std::abs(reference.cost - direct.p_star) < 1e-6 * (1.0 + std::abs(direct.p_star)));
}

TEST_CASE("extended precision sharpens the final spectrum") {
  const auto inst = conditioned_noiseless(8, 12);
  SdpOptions plain, extended;
  extended.extended_precision = true;
  const auto a = solve_sdp(inst, plain);
  const auto b = solve_sdp(inst, extended);
  REQUIRE(a.status == SdpStatus::solved);
  REQUIRE(b.status == SdpStatus::solved);
  CHECK(b.relative_gap <= a.relative_gap * 10.0);  // never materially worse
}

TEST_SUITE_END();
