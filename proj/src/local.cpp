#include "certidop/local.hpp"

#include <Eigen/Dense>

#include <cmath>

#include "certidop/model.hpp"

namespace certidop {

namespace {

using Eigen::MatrixXd;
using Eigen::Vector4d;
using Eigen::VectorXd;

ReceiverState to_receiver(const Vector4d& x) {
  ReceiverState r;
  r.position = x.head<3>();
  r.velocity = Vec3::Zero();
  r.clock_drift_term = x(3);
  return r;
}

Vector4d to_state(const ReceiverState& r) {
  Vector4d x;
  x << r.position, r.clock_drift_term;
  return x;
}

bool sane(const Vector4d& x, const LocalSolverConfig& config) {
  return x.allFinite() && x.head<3>().norm() <= config.sanity_radius;
}

struct Evaluation {
  VectorXd r;
  MatrixXd jacobian;
  double cost;
};

Evaluation evaluate(const Vector4d& x, const std::vector<SatelliteState>& satellites,
                    const std::vector<DopplerMeasurement>& measurements, const VectorXd& weights) {
  const auto rj = residuals_and_jacobian(to_receiver(x), satellites, measurements);
  return {rj.residuals, rj.jacobian, nwls_cost(rj.residuals, weights)};
}

}  // namespace

LocalSolution solve_gauss_newton(const ReceiverState& initial,
                                 const std::vector<SatelliteState>& satellites,
                                 const std::vector<DopplerMeasurement>& measurements,
                                 const Eigen::VectorXd& weights, const LocalSolverConfig& config) {
  LocalSolution solution;
  Vector4d x = to_state(initial);
  for (int iter = 0; iter < config.max_iterations; ++iter) {
    solution.iterations = iter + 1;
    Evaluation eval;
    try {
      eval = evaluate(x, satellites, measurements, weights);
    } catch (const std::exception& ex) {
      solution.failure_reason = ex.what();
      solution.estimate = to_receiver(x);
      return solution;
    }
    if (eval.r.lpNorm<Eigen::Infinity>() <= config.residual_tolerance) {
      solution.converged = true;
      solution.final_cost = eval.cost;
      solution.estimate = to_receiver(x);
      return solution;
    }
    const MatrixXd jw = weights.asDiagonal() * eval.jacobian;
    const Eigen::Matrix4d normal = eval.jacobian.transpose() * jw;
    const Vector4d gradient = jw.transpose() * eval.r;
    const Eigen::LDLT<Eigen::Matrix4d> ldlt(normal);
    Vector4d step = -ldlt.solve(gradient);
    const double rcond_proxy = normal.diagonal().minCoeff() / normal.diagonal().maxCoeff();
    if (ldlt.info() != Eigen::Success || !step.allFinite() || rcond_proxy < 1e-300 ||
        (normal * step + gradient).norm() > 1e-3 * (1.0 + gradient.norm())) {
      solution.failure_reason = "singular normal equations";
      solution.estimate = to_receiver(x);
      solution.final_cost = eval.cost;
      return solution;
    }
    x += step;
    if (!sane(x, config)) {
      solution.failure_reason = "iterate diverged";
      solution.estimate = to_receiver(x);
      return solution;
    }
    if (step.norm() <= config.step_tolerance) {
      Evaluation final_eval = evaluate(x, satellites, measurements, weights);
      solution.converged = true;
      solution.final_cost = final_eval.cost;
      solution.estimate = to_receiver(x);
      return solution;
    }
  }
  solution.failure_reason = "max iterations reached";
  solution.estimate = to_receiver(x);
  return solution;
}

LocalSolution solve_dog_leg(const ReceiverState& initial,
                            const std::vector<SatelliteState>& satellites,
                            const std::vector<DopplerMeasurement>& measurements,
                            const Eigen::VectorXd& weights, const LocalSolverConfig& config) {
  LocalSolution solution;
  Vector4d x = to_state(initial);
  double radius = config.trust_radius_initial;

  Evaluation eval;
  try {
    eval = evaluate(x, satellites, measurements, weights);
  } catch (const std::exception& ex) {
    solution.failure_reason = ex.what();
    solution.estimate = to_receiver(x);
    return solution;
  }

  for (int iter = 0; iter < config.max_iterations; ++iter) {
    solution.iterations = iter + 1;
    if (eval.r.lpNorm<Eigen::Infinity>() <= config.residual_tolerance) {
      solution.converged = true;
      break;
    }
    const MatrixXd jw = weights.asDiagonal() * eval.jacobian;
    const Eigen::Matrix4d normal = eval.jacobian.transpose() * jw;  // B = J^T W J
    const Vector4d gradient = jw.transpose() * eval.r;              // of 0.5 * cost

    // Gauss-Newton and Cauchy points.
    const Eigen::LDLT<Eigen::Matrix4d> ldlt(normal);
    Vector4d gn_step = -ldlt.solve(gradient);
    const bool gn_ok = ldlt.info() == Eigen::Success && gn_step.allFinite();
    const double g_bg = gradient.dot(normal * gradient);
    if (g_bg <= 0.0 || !std::isfinite(g_bg)) {
      solution.failure_reason = "singular normal equations";
      break;
    }
    const Vector4d cauchy = -(gradient.squaredNorm() / g_bg) * gradient;

    Vector4d step;
    if (gn_ok && gn_step.norm() <= radius) {
      step = gn_step;
    } else if (cauchy.norm() >= radius) {
      step = (radius / gradient.norm()) * -gradient;
    } else if (gn_ok) {
      // Interpolate along the dog leg to the trust-region boundary.
      const Vector4d d = gn_step - cauchy;
      const double a = d.squaredNorm();
      const double b = 2.0 * cauchy.dot(d);
      const double c = cauchy.squaredNorm() - radius * radius;
      const double tau = (-b + std::sqrt(std::max(0.0, b * b - 4.0 * a * c))) / (2.0 * a);
      step = cauchy + tau * d;
    } else {
      step = (radius / cauchy.norm()) * cauchy;
    }

    const double predicted = -(gradient.dot(step) + 0.5 * step.dot(normal * step));
    const Vector4d x_next = x + step;
    if (!sane(x_next, config)) {
      solution.failure_reason = "iterate diverged";
      break;
    }
    Evaluation eval_next;
    try {
      eval_next = evaluate(x_next, satellites, measurements, weights);
    } catch (const std::exception& ex) {
      solution.failure_reason = ex.what();
      break;
    }
    const double actual = 0.5 * (eval.cost - eval_next.cost);
    const double gain = predicted > 0.0 ? actual / predicted : -1.0;

    if (gain > 0.0) {
      x = x_next;
      eval = eval_next;
      if (step.norm() <= config.step_tolerance) {
        solution.converged = true;
        break;
      }
    }
    if (gain < config.gain_low) {
      radius *= 0.5;
      if (radius < 1e-12) {
        solution.failure_reason = "trust region collapsed";
        break;
      }
    } else if (gain > config.gain_high && step.norm() > 0.99 * radius) {
      radius = std::min(2.0 * radius, config.trust_radius_max);
    }
  }

  if (!solution.converged && solution.failure_reason.empty() &&
      solution.iterations >= config.max_iterations) {
    solution.failure_reason = "max iterations reached";
  }
  solution.estimate = to_receiver(x);
  solution.final_cost = eval.cost;
  return solution;
}

}  // namespace certidop
