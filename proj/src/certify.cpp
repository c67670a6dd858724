#include "certidop/certify.hpp"

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>

#include <cmath>
#include <ostream>
#include <sstream>
#include <stdexcept>

#include "certidop/local.hpp"
#include "certidop/model.hpp"
#include "certidop/scaling.hpp"

namespace certidop {

namespace {
constexpr double kRatioThreshold = 1e5;
constexpr double kDualTolerance = 1e-6;
}  // namespace

std::string to_string(Verdict verdict) {
  switch (verdict) {
    case Verdict::certified_optimal: return "certified-optimal";
    case Verdict::not_tight: return "not-tight";
    case Verdict::solver_failed: return "solver-failed";
  }
  return "unknown";
}

Recovery recover_solution(const MomentSolution& solution, const LiftedProblem& problem) {
  if (solution.status == SdpStatus::infeasible ||
      solution.status == SdpStatus::numerical_failure) {
    throw std::runtime_error("recover_solution: solver status " + to_string(solution.status));
  }
  const int m = static_cast<int>(solution.S.rows());
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(solution.S);
  Eigen::VectorXd top = eig.eigenvectors().col(m - 1);
  const double homog = top(m - 1);
  if (std::abs(homog) < 1e-6) {
    throw std::runtime_error("recovery degenerate: homogeneous coordinate ~ 0");
  }
  Recovery rec;
  rec.homogeneous_coord = homog;
  rec.lifted.n = problem.n;
  rec.lifted.y = (top / homog).head(m - 1);

  ReceiverState scaled;
  scaled.position = rec.lifted.position();
  scaled.velocity = Vec3::Zero();
  scaled.clock_drift_term = rec.lifted.clock_term();
  rec.receiver = unscale_receiver(scaled, problem.scaling);
  return rec;
}

namespace {

struct DualChecks {
  double psd_margin = 0.0;
  double null_residual = 0.0;
  bool available = false;
};

// Evaluates the dual conditions H(lambda) >= 0, H(lambda)[y;1] = 0 on a
// certifying instance, polishing the interior-point multipliers with a
// least-squares solve of the stationarity system first: the certificate only
// needs some multiplier vector to exist.
DualChecks evaluate_dual(const SdpInstance& instance_raw, const Eigen::VectorXd& lambda_raw,
                         double nu_raw, const Eigen::VectorXd& hom) {
  DualChecks out;
  const int m = instance_raw.dim;
  const int n_eq =
      static_cast<int>(instance_raw.B.size()) - (instance_raw.normalization_index >= 0 ? 1 : 0);
  if (lambda_raw.size() != n_eq || hom.size() != m) return out;
  out.available = true;

  // The conditions are checked on the equilibrated instance (unit cost norm,
  // unit constraint norms) so the thresholds are commensurate with the
  // solver's own feasibility and gap tolerances.
  SdpInstance instance = instance_raw;
  const double c_scale = 1.0 / std::max(1.0, instance.C.norm());
  instance.C *= c_scale;
  Eigen::VectorXd lambda(n_eq);
  double nu = nu_raw * c_scale;
  {
    int j = 0;
    for (int i = 0; i < static_cast<int>(instance.B.size()); ++i) {
      const double norm = instance.B[i].frobenius_norm();
      instance.B[i].scale(1.0 / norm);
      if (i == instance.normalization_index) {
        nu = nu_raw * c_scale * norm;
      } else {
        lambda(j) = lambda_raw(j) * norm * c_scale;
        ++j;
      }
    }
  }

  auto dual_pair = [&](const Eigen::VectorXd& lam, double n_mult) {
    const Eigen::MatrixXd slack = dual_slack_matrix(instance, lam, n_mult);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> seig(slack, Eigen::EigenvaluesOnly);
    return std::make_pair(seig.eigenvalues().minCoeff(), (slack * hom).norm());
  };

  auto [margin, null_resid] = dual_pair(lambda, nu);
  if (null_resid > 0.1 * kDualTolerance) {
    Eigen::MatrixXd columns(m, n_eq + 1);
    int j = 0;
    for (int i = 0; i < static_cast<int>(instance.B.size()); ++i) {
      if (i == instance.normalization_index) continue;
      Eigen::VectorXd col = Eigen::VectorXd::Zero(m);
      instance.B[i].multiply_add(hom, col);
      columns.col(j++) = col;
    }
    Eigen::VectorXd norm_col = Eigen::VectorXd::Zero(m);
    if (instance.normalization_index >= 0) {
      instance.B[instance.normalization_index].multiply_add(hom, norm_col);
    }
    columns.col(n_eq) = -norm_col;
    const Eigen::VectorXd target = -(instance.C * hom);
    const Eigen::VectorXd polished =
        columns.bdcSvd(Eigen::ComputeThinU | Eigen::ComputeThinV).solve(target);
    auto [margin_p, null_p] = dual_pair(polished.head(n_eq), polished(n_eq));
    if (null_p < null_resid && margin_p >= std::min(margin, 0.0) - kDualTolerance) {
      margin = margin_p;
      null_resid = null_p;
    }
  }
  out.psd_margin = margin;
  out.null_residual = null_resid;
  return out;
}

Certificate certify_impl(const MomentSolution& solution, const LiftedProblem& problem,
                         const SdpInstance* certifying_instance,
                         const MomentSolution* certifying_solution) {
  Certificate cert;
  cert.p_star = solution.p_star;
  cert.d_star = solution.d_star;

  if (solution.status == SdpStatus::infeasible ||
      solution.status == SdpStatus::numerical_failure) {
    cert.verdict = Verdict::solver_failed;
    return cert;
  }

  // Rank tightness from the moment spectrum.
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(solution.S);
  const int m = static_cast<int>(solution.S.rows());
  const double top = eig.eigenvalues()(m - 1);
  const double second = std::max(eig.eigenvalues()(m - 2), 1e-16);
  cert.eigenvalue_ratio = top / second;
  cert.rank_tight = cert.eigenvalue_ratio > kRatioThreshold && solution.status == SdpStatus::solved;

  Eigen::VectorXd y = eig.eigenvectors().col(m - 1);
  const double homog = y(m - 1);
  if (std::abs(homog) < 1e-12) {
    cert.verdict = Verdict::not_tight;
    return cert;
  }
  const Eigen::VectorXd y_raw = (y / homog).head(m - 1);

  // Certify the variety-consistent point: ranges rebuilt from the recovered
  // geometry, z from the clock term. The certified candidate is then a
  // feasible QCQP point, so q* is attainable and the gap bounds its
  // suboptimality.
  const int n = problem.n;
  LiftedState recovered{y_raw, n};
  {
    Eigen::VectorXd y_fix = y_raw;
    const Vec3 position = y_raw.head<3>();
    const double clock = y_raw(3);
    for (int i = 0; i < n; ++i) {
      // Satellite position reconstructed from the range-constraint data.
      const auto& con = problem.constraints[i];
      const Vec3 sat = -0.5 * con.l.head<3>();
      const double rho = (position - sat).norm();
      y_fix(4 + i) = rho;
      y_fix(4 + n + i) = clock * rho;
    }
    recovered.y = y_fix;
  }

  cert.q_star = qcqp_cost(problem, recovered);
  cert.duality_gap = cert.q_star - cert.p_star;
  cert.constraint_residual_max =
      constraint_values(problem, recovered.y).lpNorm<Eigen::Infinity>();

  // Conditions (ii)-(iii) are complementarity checks of the solved SDP, so
  // they are evaluated at the solution's own top eigenvector rather than the
  // variety projection.
  DualChecks dual;
  if (certifying_instance != nullptr && certifying_solution != nullptr) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> red_eig(certifying_solution->S);
    const int mr = static_cast<int>(certifying_solution->S.rows());
    Eigen::VectorXd red_top = red_eig.eigenvectors().col(mr - 1);
    if (std::abs(red_top(mr - 1)) > 1e-12) {
      const Eigen::VectorXd hom = red_top / red_top(mr - 1);
      dual = evaluate_dual(*certifying_instance, certifying_solution->lambda,
                           certifying_solution->nu, hom);
    }
  } else {
    Eigen::VectorXd hom(m);
    hom << recovered.y, 1.0;
    const SdpInstance instance = make_sdp_instance(problem);
    dual = evaluate_dual(instance, solution.lambda, solution.nu, hom);
  }
  cert.dual_psd_margin = dual.psd_margin;
  cert.dual_null_residual = dual.null_residual;

  const bool gap_ok = cert.duality_gap <= kDualTolerance * (1.0 + std::abs(cert.p_star));
  const bool conditions_ok = dual.available && cert.dual_psd_margin >= -kDualTolerance &&
                             cert.dual_null_residual <= kDualTolerance &&
                             cert.constraint_residual_max <= kDualTolerance && gap_ok;
  cert.verdict =
      (cert.rank_tight && conditions_ok) ? Verdict::certified_optimal : Verdict::not_tight;
  return cert;
}

}  // namespace

Certificate certify(const MomentSolution& solution, const LiftedProblem& problem) {
  return certify_impl(solution, problem, nullptr, nullptr);
}

Certificate certify(const GwaResult& gwa) {
  if (!gwa.solution || !gwa.problem) {
    throw std::invalid_argument("certify: GWA result carries no solution");
  }
  return certify_impl(*gwa.solution, *gwa.problem, gwa.reduced_instance.get(),
                      gwa.reduced_solution.get());
}

// ---------------------------------------------------------------------------
// A priori noise bound
// ---------------------------------------------------------------------------

NoiseBoundReport check_noise_bound(const LiftedProblem& problem_truth,
                                   const LiftedProblem& problem_perturbed,
                                   const LiftedState& y_bar) {
  if (problem_truth.n != problem_perturbed.n ||
      problem_truth.state_dim() != static_cast<int>(y_bar.y.size())) {
    throw std::invalid_argument("check_noise_bound: dimension mismatch");
  }
  const int n = problem_truth.n;
  const int d = problem_truth.state_dim();

  NoiseBoundReport report;

  // sigma_N: N-th largest singular value of the 2N x d constraint gradient.
  const Eigen::MatrixXd grad_g = constraint_gradient(problem_truth, y_bar.y);
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(grad_g);
  report.sigma_n = svd.singularValues()(n - 1);

  // Sum of the first N constraint blocks (the range constraints).
  Eigen::MatrixXd g_sum = Eigen::MatrixXd::Zero(d, d);
  for (int i = 0; i < n; ++i) problem_truth.constraints[i].G.add_to(g_sum);
  {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(g_sum, Eigen::EigenvaluesOnly);
    report.g_norm = eig.eigenvalues().cwiseAbs().maxCoeff();
  }

  report.grad_f_norm = qcqp_cost_gradient(problem_perturbed, y_bar.y).norm();

  {
    const Eigen::MatrixXd diff = problem_truth.F - problem_perturbed.F;
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(diff, Eigen::EigenvaluesOnly);
    report.f_perturbation = eig.eigenvalues().cwiseAbs().maxCoeff();
  }

  // Eigenvalue threshold guarding the kernel structure under Weyl
  // perturbation. The full F has corank N+4 for any data (A carries N rows),
  // so the meaningful gap lives in the clock-conditioned curvature
  // A_red^T Q^-1 A_red over [p, rho]: corank exactly 3, threshold its 4th
  // smallest eigenvalue.
  {
    const double clock = y_bar.clock_term();
    Eigen::MatrixXd a_red = Eigen::MatrixXd::Zero(n, n + 3);
    a_red.leftCols<3>() = problem_perturbed.A.leftCols<3>();
    for (int i = 0; i < n; ++i) {
      a_red(i, 3 + i) = problem_perturbed.A(i, 4 + i) - clock;
    }
    const Eigen::VectorXd q_inv = problem_perturbed.q_diag.cwiseInverse();
    const Eigen::MatrixXd f_red = a_red.transpose() * q_inv.asDiagonal() * a_red;
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(f_red, Eigen::EigenvaluesOnly);
    report.eig_threshold = eig.eigenvalues()(3);
  }

  if (!(report.sigma_n > 0.0)) {
    throw std::runtime_error("check_noise_bound: constraint gradient is rank deficient");
  }
  report.lhs = report.g_norm * report.grad_f_norm / report.sigma_n + report.f_perturbation;
  report.satisfied = report.lhs < report.eig_threshold;
  return report;
}

NoiseBoundGrid noise_bound_grid(const ScenarioConfig& scenario,
                                const NoiseBoundGridConfig& config) {
  const auto constellation = generate_constellation(scenario);
  const auto truth = place_receiver(scenario, constellation);

  SdpOptions sdp_main = config.sdp;
  sdp_main.extended_precision = true;
  const SdpSolverHandle solve = [sdp_main](const SdpInstance& inst) {
    return solve_sdp(inst, sdp_main);
  };
  GwaConfig gwa_config = config.gwa;
  if (!gwa_config.clock_search_solver) {
    SdpOptions coarse = config.sdp;
    coarse.tol_target = 1e-5;
    coarse.tol_accept = 1e-2;
    coarse.max_iterations = 40;
    SdpOptions medium = coarse;
    medium.tol_target = 1e-7;
    medium.tol_accept = 1e-4;
    medium.max_iterations = 60;
    gwa_config.clock_search_solver = [coarse](const SdpInstance& inst) {
      return solve_sdp(inst, coarse);
    };
    gwa_config.clock_refine_solver = [medium](const SdpInstance& inst) {
      return solve_sdp(inst, medium);
    };
  }

  // Certified noiseless baseline.
  auto rng0 = make_stream(scenario.rng_seed, 0);
  const auto noiseless = synthesize_measurements(truth, constellation, NoiseConfig{}, rng0);
  const MeasurementSet base_scaled = apply_scaling(noiseless.observed, config.scaling);
  const GwaResult base_gwa =
      run_gwa(base_scaled.satellites, base_scaled.measurements, solve, gwa_config, config.scaling);
  NoiseBoundGrid grid;
  grid.baseline = certify(base_gwa);
  if (grid.baseline.verdict != Verdict::certified_optimal) {
    std::ostringstream msg;
    msg << "noise_bound_grid: noiseless baseline not certified (verdict "
        << to_string(grid.baseline.verdict) << ", eigenvalue ratio "
        << grid.baseline.eigenvalue_ratio << ")";
    throw std::runtime_error(msg.str());
  }
  const LiftedProblem& problem_truth = *base_gwa.problem;
  const Recovery baseline_recovery = recover_solution(*base_gwa.solution, problem_truth);

  // The bound is evaluated at the noiseless optimum; the certified recovery
  // is refined to machine precision first (the SDP fixes the basin, the
  // local step removes the order-100 m relaxation fuzz that would otherwise
  // dominate grad f.
  LiftedState y_bar = baseline_recovery.lifted;
  {
    const Eigen::VectorXd weights = inverse_variance_weights(noiseless.observed.measurements);
    const LocalSolution refined =
        solve_gauss_newton(baseline_recovery.receiver, noiseless.observed.satellites,
                           noiseless.observed.measurements, weights, LocalSolverConfig{});
    if (refined.converged) {
      const ReceiverState scaled_receiver = scale_receiver(refined.estimate, config.scaling);
      y_bar = lift_state(scaled_receiver, base_scaled.satellites, problem_truth.n);
    }
  }

  int cell_index = 0;
  for (const double vel : config.velocity_levels) {
    for (const double dop : config.doppler_levels) {
      NoiseBoundCell cell;
      cell.velocity_noise = vel;
      cell.doppler_noise = dop;
      cell.trials = config.trials_per_cell;
      bool all_satisfied = true;
      int tight_count = 0;
      for (int trial = 0; trial < config.trials_per_cell; ++trial) {
        auto rng = make_stream(scenario.rng_seed,
                               static_cast<std::uint64_t>(cell_index) * 1009 + trial + 1);
        NoiseConfig noise;
        noise.sat_velocity_std = vel;
        noise.doppler_std = dop;
        const auto synth = synthesize_measurements(truth, constellation, noise, rng);
        const MeasurementSet scaled = apply_scaling(synth.observed, config.scaling);

        const LiftedProblem perturbed = build_lifted_problem(
            scaled.satellites, scaled.measurements, problem_truth.q_diag, config.scaling);
        const NoiseBoundReport report = check_noise_bound(problem_truth, perturbed, y_bar);
        all_satisfied = all_satisfied && report.satisfied;

        try {
          const GwaResult gwa = run_gwa(scaled.satellites, scaled.measurements, solve,
                                        gwa_config, config.scaling);
          const Certificate cert = certify(gwa);
          if (cert.rank_tight) ++tight_count;
        } catch (const std::exception&) {
          // solver failure counts as not tight
        }
      }
      cell.predicted_satisfied = all_satisfied;
      cell.tight_fraction =
          config.trials_per_cell > 0 ? static_cast<double>(tight_count) / config.trials_per_cell : 0.0;
      grid.cells.push_back(cell);
      ++cell_index;
    }
  }
  return grid;
}

void write_grid_csv(const NoiseBoundGrid& grid, std::ostream& out) {
  out << "velocity_noise,doppler_noise,predicted_satisfied,tight_fraction,trials\n";
  for (const auto& cell : grid.cells) {
    out << cell.velocity_noise << "," << cell.doppler_noise << ","
        << (cell.predicted_satisfied ? 1 : 0) << "," << cell.tight_fraction << "," << cell.trials
        << "\n";
  }
}

}  // namespace certidop
