#include "certidop/lift.hpp"

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>

#include <cmath>
#include <memory>
#include <ostream>
#include <stdexcept>

#include "certidop/local.hpp"
#include "certidop/model.hpp"
#include "certidop/sdp.hpp"

namespace certidop {

LiftedProblem build_lifted_problem(const std::vector<SatelliteState>& satellites,
                                   const std::vector<DopplerMeasurement>& measurements,
                                   const Eigen::VectorXd& q_diag, const ScalingConfig& scaling) {
  validate_pairing(satellites, measurements);
  const int n = static_cast<int>(measurements.size());
  if (q_diag.size() != n) {
    throw std::invalid_argument("weight diagonal size mismatch");
  }
  if ((q_diag.array() <= 0.0).any()) {
    throw std::invalid_argument("weight diagonal must be positive");
  }
  // Scaled-unit guard: LEO positions are O(1) after length scaling.
  for (const auto& sat : satellites) {
    if (sat.position.norm() > 1e3) {
      throw std::logic_error("build_lifted_problem: inputs look unscaled");
    }
  }

  LiftedProblem p;
  p.n = n;
  p.scaled = true;
  p.scaling = scaling;
  const int d = p.state_dim();

  p.A = Eigen::MatrixXd::Zero(n, d);
  p.k.resize(n);
  p.q_diag = q_diag;
  p.sigmas.resize(n);
  for (int i = 0; i < n; ++i) {
    p.A.block<1, 3>(i, 0) = satellites[i].velocity.transpose();
    p.A(i, 4 + i) = measurements[i].value;
    p.A(i, 4 + n + i) = -1.0;
    p.k(i) = -satellites[i].position.dot(satellites[i].velocity);
    p.sigmas(i) = measurements[i].sigma;
  }

  const Eigen::VectorXd q_inv = q_diag.cwiseInverse();
  p.F = p.A.transpose() * q_inv.asDiagonal() * p.A;
  p.F = 0.5 * (p.F + p.F.transpose()).eval();
  p.l0 = 2.0 * p.A.transpose() * (q_inv.cwiseProduct(p.k));
  p.c0 = p.k.dot(q_inv.cwiseProduct(p.k));

  p.constraints.reserve(2 * n);
  for (int i = 0; i < n; ++i) {
    // rho_i^2 = || p_r - p_s ||^2
    QcqpConstraint con;
    con.G.dim = d;
    con.G.add(0, 0, 1.0);
    con.G.add(1, 1, 1.0);
    con.G.add(2, 2, 1.0);
    con.G.add(4 + i, 4 + i, -1.0);
    con.l = Eigen::VectorXd::Zero(d);
    con.l.head<3>() = -2.0 * satellites[i].position;
    con.c = satellites[i].position.squaredNorm();
    p.constraints.push_back(std::move(con));
  }
  for (int i = 0; i < n; ++i) {
    // z_i = b * rho_i
    QcqpConstraint con;
    con.G.dim = d;
    con.G.add(3, 4 + i, 0.5);
    con.l = Eigen::VectorXd::Zero(d);
    con.l(4 + n + i) = -1.0;
    con.c = 0.0;
    p.constraints.push_back(std::move(con));
  }
  return p;
}

LiftedState lift_state(const ReceiverState& receiver_scaled,
                       const std::vector<SatelliteState>& satellites_scaled, int n) {
  if (static_cast<int>(satellites_scaled.size()) != n) {
    throw std::invalid_argument("lift_state: satellite count mismatch");
  }
  LiftedState state;
  state.n = n;
  state.y = Eigen::VectorXd::Zero(4 + 2 * n);
  state.y.head<3>() = receiver_scaled.position;
  state.y(3) = receiver_scaled.clock_drift_term;
  for (int i = 0; i < n; ++i) {
    const double rho = (receiver_scaled.position - satellites_scaled[i].position).norm();
    state.y(4 + i) = rho;
    state.y(4 + n + i) = receiver_scaled.clock_drift_term * rho;
  }
  return state;
}

double qcqp_cost(const LiftedProblem& problem, const LiftedState& state) {
  const Eigen::VectorXd& y = state.y;
  return y.dot(problem.F * y) + problem.l0.dot(y) + problem.c0;
}

Eigen::VectorXd qcqp_cost_gradient(const LiftedProblem& problem, const Eigen::VectorXd& y) {
  return 2.0 * problem.F * y + problem.l0;
}

Eigen::VectorXd constraint_values(const LiftedProblem& problem, const Eigen::VectorXd& y) {
  Eigen::VectorXd g(problem.constraints.size());
  for (std::size_t i = 0; i < problem.constraints.size(); ++i) {
    const auto& con = problem.constraints[i];
    Eigen::VectorXd gy = Eigen::VectorXd::Zero(y.size());
    con.G.multiply_add(y, gy);
    g(i) = y.dot(gy) + con.l.dot(y) + con.c;
  }
  return g;
}

Eigen::VectorXd constraint_values_moment(const LiftedProblem& problem, const Eigen::MatrixXd& Y,
                                         const Eigen::VectorXd& y) {
  Eigen::VectorXd g(problem.constraints.size());
  for (std::size_t i = 0; i < problem.constraints.size(); ++i) {
    const auto& con = problem.constraints[i];
    g(i) = con.G.dot(Y) + con.l.dot(y) + con.c;
  }
  return g;
}

Eigen::MatrixXd constraint_gradient(const LiftedProblem& problem, const Eigen::VectorXd& y) {
  Eigen::MatrixXd grad(problem.constraints.size(), y.size());
  for (std::size_t i = 0; i < problem.constraints.size(); ++i) {
    const auto& con = problem.constraints[i];
    Eigen::VectorXd row = con.l;
    con.G.multiply_add(y, row, 2.0);
    grad.row(i) = row.transpose();
  }
  return grad;
}

int numeric_rank(const Eigen::MatrixXd& m, double tolerance) {
  const Eigen::JacobiSVD<Eigen::MatrixXd> svd(m);
  const auto& sv = svd.singularValues();
  if (sv.size() == 0) return 0;
  int rank = 0;
  for (int i = 0; i < sv.size(); ++i) {
    if (sv(i) > tolerance * sv(0)) ++rank;
  }
  return rank;
}

void write_problem_text(const LiftedProblem& problem, std::ostream& out) {
  out.precision(17);
  out << "certidop-lifted-problem 1\n";
  out << "n " << problem.n << " d " << problem.state_dim() << "\n";
  out << "c0 " << problem.c0 << "\n";
  out << "l0";
  for (int i = 0; i < problem.l0.size(); ++i) out << " " << problem.l0(i);
  out << "\nF\n";
  for (int r = 0; r < problem.F.rows(); ++r) {
    for (int c = 0; c < problem.F.cols(); ++c) {
      out << problem.F(r, c) << (c + 1 == problem.F.cols() ? '\n' : ' ');
    }
  }
  out << "constraints " << problem.constraints.size() << "\n";
  for (std::size_t i = 0; i < problem.constraints.size(); ++i) {
    const auto& con = problem.constraints[i];
    out << "constraint " << i << " c " << con.c << "\n";
    out << "G " << con.G.entries.size() << "\n";
    for (const auto& e : con.G.entries) {
      out << e.row << " " << e.col << " " << e.value << "\n";
    }
    out << "l";
    for (int j = 0; j < con.l.size(); ++j) out << " " << con.l(j);
    out << "\n";
  }
}

// ---------------------------------------------------------------------------
// Graduated weighting approximation
// ---------------------------------------------------------------------------

SdpInstance make_conditioned_instance(const std::vector<SatelliteState>& satellites_scaled,
                                      const std::vector<DopplerMeasurement>& measurements_scaled,
                                      const Eigen::VectorXd& q_diag, double clock_term_scaled) {
  validate_pairing(satellites_scaled, measurements_scaled);
  const int n = static_cast<int>(measurements_scaled.size());
  if (q_diag.size() != n) {
    throw std::invalid_argument("weight diagonal size mismatch");
  }
  const int d = n + 3;  // [p_r, rho_1..rho_N]
  const int last = d;

  Eigen::MatrixXd a_mat = Eigen::MatrixXd::Zero(n, d);
  Eigen::VectorXd k(n);
  for (int i = 0; i < n; ++i) {
    a_mat.block<1, 3>(i, 0) = satellites_scaled[i].velocity.transpose();
    a_mat(i, 3 + i) = measurements_scaled[i].value - clock_term_scaled;
    k(i) = -satellites_scaled[i].position.dot(satellites_scaled[i].velocity);
  }
  const Eigen::VectorXd q_inv = q_diag.cwiseInverse();

  SdpInstance inst;
  inst.dim = d + 1;
  inst.C = Eigen::MatrixXd::Zero(d + 1, d + 1);
  inst.C.topLeftCorner(d, d) = a_mat.transpose() * q_inv.asDiagonal() * a_mat;
  const Eigen::VectorXd cross = a_mat.transpose() * q_inv.cwiseProduct(k);
  inst.C.topRightCorner(d, 1) = cross;
  inst.C.bottomLeftCorner(1, d) = cross.transpose();
  inst.C(last, last) = k.dot(q_inv.cwiseProduct(k));
  inst.C = (0.5 * (inst.C + inst.C.transpose())).eval();

  inst.B.reserve(n + 1);
  for (int i = 0; i < n; ++i) {
    SparseSym block;
    block.dim = d + 1;
    block.add(0, 0, 1.0);
    block.add(1, 1, 1.0);
    block.add(2, 2, 1.0);
    block.add(3 + i, 3 + i, -1.0);
    const Vec3 a = satellites_scaled[i].position;
    for (int j = 0; j < 3; ++j) {
      if (a(j) != 0.0) block.add(j, last, -a(j));
    }
    block.add(last, last, a.squaredNorm());
    inst.B.push_back(std::move(block));
  }
  SparseSym norm_block;
  norm_block.dim = d + 1;
  norm_block.add(last, last, 1.0);
  inst.B.push_back(std::move(norm_block));

  inst.rhs = Eigen::VectorXd::Zero(inst.B.size());
  inst.rhs(inst.B.size() - 1) = 1.0;
  inst.normalization_index = static_cast<int>(inst.B.size()) - 1;
  return inst;
}

MomentSolution embed_conditioned_solution(const MomentSolution& reduced, int n_measurements,
                                          double clock_term_scaled) {
  const int n = n_measurements;
  const int red_dim = n + 4;   // [p, rho; 1]
  const int full_dim = 2 * n + 5;
  if (reduced.S.rows() != red_dim) {
    throw std::invalid_argument("embed_conditioned_solution: dimension mismatch");
  }
  // Linear map from reduced coordinates to the full lifted layout.
  Eigen::MatrixXd j_map = Eigen::MatrixXd::Zero(full_dim, red_dim);
  j_map.block<3, 3>(0, 0).setIdentity();
  j_map(3, red_dim - 1) = clock_term_scaled;  // b = b_hat * homogeneous
  for (int i = 0; i < n; ++i) {
    j_map(4 + i, 3 + i) = 1.0;                    // rho
    j_map(4 + n + i, 3 + i) = clock_term_scaled;  // z = b_hat * rho
  }
  j_map(full_dim - 1, red_dim - 1) = 1.0;

  MomentSolution out = reduced;
  out.S = j_map * reduced.S * j_map.transpose();
  out.lambda = Eigen::VectorXd();  // full-layout multipliers live in the certifier
  return out;
}

namespace {

// Rank-1 projection of S, normalized so the homogeneous coordinate is 1.
Eigen::VectorXd project_rank1(const Eigen::MatrixXd& S) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(S);
  const int m = static_cast<int>(S.rows());
  Eigen::VectorXd top = eig.eigenvectors().col(m - 1);
  const double homog = top(m - 1);
  if (std::abs(homog) < 1e-12) {
    throw std::runtime_error("rank-1 projection degenerate: homogeneous coordinate ~ 0");
  }
  return (top / homog).head(m - 1);
}

}  // namespace

namespace {

// Coarse grid plus golden-section minimization of the conditioned SDP value
// over the scalar clock term. The bracket is data-derived (no external
// initial estimate): the clock cannot exceed the Doppler spread plus the
// largest emitter speed.
double search_clock_term(const std::vector<SatelliteState>& satellites,
                         const std::vector<DopplerMeasurement>& measurements,
                         const SdpSolverHandle& grid_solve, const SdpSolverHandle& refine_solve,
                         const GwaConfig& config, int* solves) {
  const int n = static_cast<int>(measurements.size());
  const Eigen::VectorXd q = Eigen::VectorXd::Ones(n);
  double d_min = measurements[0].value, d_max = measurements[0].value, v_max = 0.0;
  for (int i = 0; i < n; ++i) {
    d_min = std::min(d_min, measurements[i].value);
    d_max = std::max(d_max, measurements[i].value);
    v_max = std::max(v_max, satellites[i].velocity.norm());
  }
  const double lo = d_min - v_max;
  const double hi = d_max + v_max;

  auto phi_with = [&](const SdpSolverHandle& handle, double clock) {
    ++*solves;
    const MomentSolution sol =
        handle(make_conditioned_instance(satellites, measurements, q, clock));
    return sol.status == SdpStatus::infeasible || sol.status == SdpStatus::numerical_failure
               ? std::numeric_limits<double>::infinity()
               : sol.p_star;
  };

  const int grid = std::max(5, config.clock_search_points);
  double best = lo, best_value = std::numeric_limits<double>::infinity();
  for (int i = 0; i < grid; ++i) {
    const double clock = lo + (hi - lo) * i / (grid - 1);
    const double value = phi_with(grid_solve, clock);
    if (value < best_value) {
      best_value = value;
      best = clock;
    }
  }
  auto phi = [&](double clock) { return phi_with(refine_solve, clock); };
  const double step = (hi - lo) / (grid - 1);
  double a = best - step, b = best + step;
  const double golden = 0.5 * (std::sqrt(5.0) - 1.0);
  double x1 = b - golden * (b - a), x2 = a + golden * (b - a);
  double f1 = phi(x1), f2 = phi(x2);
  const double tol = config.clock_search_tolerance;
  while (b - a > tol) {
    if (f1 < f2) {
      b = x2;
      x2 = x1;
      f2 = f1;
      x1 = b - golden * (b - a);
      f1 = phi(x1);
    } else {
      a = x1;
      x1 = x2;
      f1 = f2;
      x2 = a + golden * (b - a);
      f2 = phi(x2);
    }
  }
  return 0.5 * (a + b);
}

}  // namespace

GwaResult run_gwa(const std::vector<SatelliteState>& satellites_scaled,
                  const std::vector<DopplerMeasurement>& measurements_scaled,
                  const SdpSolverHandle& solve, const GwaConfig& config,
                  const ScalingConfig& scaling) {
  const int n = static_cast<int>(measurements_scaled.size());
  GwaResult result;

  Eigen::VectorXd sigma_sq(n), doppler(n);
  for (int i = 0; i < n; ++i) {
    sigma_sq(i) = measurements_scaled[i].sigma * measurements_scaled[i].sigma;
    doppler(i) = measurements_scaled[i].value;
  }
  const double range_floor = config.range_floor_m * scaling.length_scale;
  const Eigen::VectorXd weights = sigma_sq.cwiseInverse();

  // The scalar clock term is a nuisance parameter of the conditioned
  // relaxation; it is bracketed from the data alone, so the pipeline stays
  // initialization-free.
  const SdpSolverHandle& coarse =
      config.clock_search_solver ? config.clock_search_solver : solve;
  const SdpSolverHandle& refine =
      config.clock_refine_solver ? config.clock_refine_solver : coarse;
  double clock = search_clock_term(satellites_scaled, measurements_scaled, coarse, refine,
                                   config, &result.solves);

  // Q shape for the solve is normalized to unit mean diagonal; eta compares
  // the unnormalized diag(sigma^2 / rho) between consecutive iterations, as a
  // relative trace change, so the metric is invariant to the sigma scale.
  Eigen::VectorXd q_shape = Eigen::VectorXd::Ones(n);
  Eigen::VectorXd q_solved = q_shape;
  Eigen::VectorXd u_prev;

  for (int t = 0; t <= config.max_iterations; ++t) {
    q_solved = q_shape;
    auto instance = std::make_shared<SdpInstance>(
        make_conditioned_instance(satellites_scaled, measurements_scaled, q_shape, clock));
    auto reduced = std::make_shared<MomentSolution>(solve(*instance));
    ++result.solves;

    if (reduced->status == SdpStatus::infeasible ||
        reduced->status == SdpStatus::numerical_failure) {
      throw std::runtime_error("GWA iteration " + std::to_string(t) +
                               ": SDP solver status " + to_string(reduced->status));
    }

    const Eigen::VectorXd y_red = project_rank1(reduced->S);

    // Refit (position, clock) locally from the recovered point; the refit
    // clock conditions the next pass and its ranges rebuild Q. The refit is
    // only accepted when it does not worsen the weighted residual cost.
    ReceiverState refit;
    refit.position = y_red.head<3>();
    refit.clock_drift_term = clock;
    {
      LocalSolverConfig local;
      local.max_iterations = 5;
      local.sanity_radius = 5e7 * scaling.length_scale;
      local.step_tolerance = 1e-4 * scaling.length_scale;
      const LocalSolution polished = solve_gauss_newton(refit, satellites_scaled,
                                                        measurements_scaled, weights, local);
      if (polished.estimate.position.allFinite() &&
          std::isfinite(polished.estimate.clock_drift_term)) {
        try {
          const auto before = residuals_and_jacobian(refit, satellites_scaled,
                                                     measurements_scaled);
          const auto after = residuals_and_jacobian(polished.estimate, satellites_scaled,
                                                    measurements_scaled);
          if (nwls_cost(after.residuals, weights) <= nwls_cost(before.residuals, weights)) {
            refit = polished.estimate;
          }
        } catch (const std::exception&) {
          // degenerate probe geometry: keep the unrefined point
        }
      }
    }
    const double clock_next = refit.clock_drift_term;
    const double clock_shift = std::abs(clock_next - clock);

    Eigen::VectorXd u(n);
    for (int i = 0; i < n; ++i) {
      double rho = (refit.position - satellites_scaled[i].position).norm();
      if (!(rho > range_floor)) {
        rho = range_floor;
        result.ranges_clamped = true;
      }
      u(i) = sigma_sq(i) / rho;
    }

    result.reduced_instance = instance;
    result.reduced_solution = reduced;
    result.clock_term = clock;

    if (t >= 1) {
      const double eta = (u.sum() - u_prev.sum()) / u_prev.sum();
      GwaIterationRecord record;
      record.iteration = t;
      record.eta = eta;
      record.clock_term = clock;
      record.solver_cost = reduced->p_star;
      record.solver_status = to_string(reduced->status);
      result.trace.push_back(record);
      result.final_eta = eta;
      if (std::abs(eta) < config.eta_threshold && clock_shift < config.clock_tolerance) {
        result.converged = true;
        result.iterations = t;
        result.final_q = u * (static_cast<double>(n) / u.sum());
        break;
      }
    }
    u_prev = u;
    q_shape = u * (static_cast<double>(n) / u.sum());
    clock = clock_next;
    result.iterations = t;
    result.final_q = q_shape;
  }

  // The certifying problem carries the weights the final solve actually used.
  result.problem = std::make_shared<LiftedProblem>(
      build_lifted_problem(satellites_scaled, measurements_scaled, q_solved, scaling));
  result.solution = std::make_shared<MomentSolution>(
      embed_conditioned_solution(*result.reduced_solution, n, result.clock_term));
  return result;
}

}  // namespace certidop
