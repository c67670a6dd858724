#include "certidop/sdp.hpp"

#include <Eigen/Cholesky>
#include <Eigen/Dense>
#include <Eigen/Eigenvalues>

#include <chrono>
#include <cstdlib>
#include <cmath>
#include <istream>
#include <limits>
#include <ostream>
#include <sstream>
#include <stdexcept>

#include "certidop/lift.hpp"

namespace certidop {

std::string to_string(SdpStatus status) {
  switch (status) {
    case SdpStatus::solved: return "solved";
    case SdpStatus::inaccurate: return "inaccurate";
    case SdpStatus::infeasible: return "infeasible";
    case SdpStatus::numerical_failure: return "numerical-failure";
  }
  return "unknown";
}

SdpInstance make_sdp_instance(const LiftedProblem& problem) {
  const int d = problem.state_dim();
  const int m = problem.moment_dim();
  SdpInstance inst;
  inst.dim = m;

  inst.C = Eigen::MatrixXd::Zero(m, m);
  inst.C.topLeftCorner(d, d) = problem.F;
  inst.C.topRightCorner(d, 1) = 0.5 * problem.l0;
  inst.C.bottomLeftCorner(1, d) = 0.5 * problem.l0.transpose();
  inst.C(d, d) = problem.c0;

  inst.B.reserve(problem.constraints.size() + 1);
  for (const auto& con : problem.constraints) {
    SparseSym block;
    block.dim = m;
    block.entries = con.G.entries;
    for (int j = 0; j < con.l.size(); ++j) {
      if (con.l(j) != 0.0) block.add(j, d, 0.5 * con.l(j));
    }
    if (con.c != 0.0) block.add(d, d, con.c);
    inst.B.push_back(std::move(block));
  }
  SparseSym norm_block;
  norm_block.dim = m;
  norm_block.add(d, d, 1.0);
  inst.B.push_back(std::move(norm_block));

  inst.rhs = Eigen::VectorXd::Zero(inst.B.size());
  inst.rhs(inst.B.size() - 1) = 1.0;
  inst.normalization_index = static_cast<int>(inst.B.size()) - 1;
  return inst;
}

Eigen::MatrixXd dual_matrix(const SdpInstance& instance, const Eigen::VectorXd& lambda) {
  const int n_eq = static_cast<int>(instance.B.size()) -
                   (instance.normalization_index >= 0 ? 1 : 0);
  if (lambda.size() != n_eq) {
    throw std::invalid_argument("dual_matrix: multiplier length mismatch");
  }
  Eigen::MatrixXd h = instance.C;
  int j = 0;
  for (int i = 0; i < static_cast<int>(instance.B.size()); ++i) {
    if (i == instance.normalization_index) continue;
    instance.B[i].add_to(h, lambda(j++));
  }
  return h;
}

Eigen::MatrixXd dual_slack_matrix(const SdpInstance& instance, const Eigen::VectorXd& lambda,
                                  double nu) {
  Eigen::MatrixXd z = dual_matrix(instance, lambda);
  if (instance.normalization_index >= 0) {
    instance.B[instance.normalization_index].add_to(z, -nu);
  }
  return z;
}

namespace {

using Eigen::MatrixXd;
using Eigen::VectorXd;

struct ExpandedEntry {
  int row;
  int col;
  double value;
};

// Both triangles, so tr(B M) = sum value * M(col, row) without branching.
std::vector<ExpandedEntry> expand(const SparseSym& b) {
  std::vector<ExpandedEntry> out;
  out.reserve(2 * b.entries.size());
  for (const auto& e : b.entries) {
    out.push_back({e.row, e.col, e.value});
    if (e.row != e.col) out.push_back({e.col, e.row, e.value});
  }
  return out;
}

// Interior-point core, templated on the working scalar. Long double buys
// roughly three extra digits of achievable duality gap, which the final
// certifying solves need for a clean rank-1 spectrum.
template <typename Scalar>
struct IpmCore {
  using Mat = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
  using Vec = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

  int n = 0;
  int m = 0;
  Mat c_mat;
  Vec rhs;
  std::vector<std::vector<ExpandedEntry>> expanded;
  std::vector<double> b_scale;
  Scalar c_scale{};

  Mat x, z;
  Vec y;
  double pinf = 0.0, dinf = 0.0, relgap = 0.0;
  int iterations = 0;
  bool infeasible_flag = false;

  Scalar dot_full(const std::vector<ExpandedEntry>& entries, const Mat& mat) const {
    Scalar sum = 0;
    for (const auto& e : entries) sum += Scalar(e.value) * mat(e.col, e.row);
    return sum;
  }

  Vec a_of(const Mat& mat) const {
    Vec v(m);
    for (int i = 0; i < m; ++i) v(i) = dot_full(expanded[i], mat);
    return v;
  }

  void add_blocks(Mat& target, const Vec& scale_per_block) const {
    for (int i = 0; i < m; ++i) {
      const Scalar s = scale_per_block(i);
      if (s == Scalar(0)) continue;
      for (const auto& e : expanded[i]) target(e.row, e.col) += s * Scalar(e.value);
    }
  }

  static Scalar max_step(const Eigen::LLT<Mat>& llt, const Mat& dx) {
    Mat t = llt.matrixL().solve(dx);
    t = llt.matrixL().solve(t.transpose()).eval();
    Eigen::SelfAdjointEigenSolver<Mat> eig(t, Eigen::EigenvaluesOnly);
    const Scalar lambda_min = eig.eigenvalues().minCoeff();
    if (lambda_min >= Scalar(-1e-300)) return std::numeric_limits<Scalar>::infinity();
    return Scalar(-1) / lambda_min;
  }

  void run(const SdpOptions& options) {
    const Scalar init = std::max<Scalar>(10, std::sqrt(Scalar(n)));
    x = init * Mat::Identity(n, n);
    z = init * Mat::Identity(n, n);
    y = Vec::Zero(m);

    const Scalar rhs_norm = Scalar(1) + rhs.norm();
    Scalar best_measure = std::numeric_limits<Scalar>::infinity();
    int stall_count = 0;
    bool polish_phase = false;
    int polish_left = 20;

    int iter = 0;
    for (iter = 0; iter < options.max_iterations; ++iter) {
      const Vec ax = a_of(x);
      const Vec rp = rhs - ax;
      Mat rd = c_mat - z;
      add_blocks(rd, -y);

      const Scalar pobj = (c_mat.cwiseProduct(x)).sum();
      const Scalar dobj = rhs.dot(y);
      // Convergence is judged at the raw scale: absolute constraint
      // residuals |B_i . S - rhs_i| and the gap relative to the unscaled
      // objectives.
      Scalar pinf_raw = 0;
      for (int i = 0; i < m; ++i) {
        pinf_raw = std::max(pinf_raw, std::abs(ax(i) - rhs(i)) / Scalar(b_scale[i]));
      }
      pinf = double(std::max(rp.norm() / rhs_norm, pinf_raw));
      dinf = double(rd.norm());  // ||C_hat|| = 1 by construction
      relgap = double(std::abs(pobj - dobj) / (c_scale + std::abs(pobj) + std::abs(dobj)));
      if (options.verbose) {
        fprintf(stderr, "iter %d pinf %.3e dinf %.3e gap %.3e\n", iter, pinf, dinf, relgap);
      }
      if (pinf <= options.tol_target && dinf <= options.tol_target &&
          relgap <= options.tol_target) {
        polish_phase = true;  // feasible and converged: collapse mu with affine steps
      }
      if (!x.allFinite() || !z.allFinite() || !y.allFinite()) break;
      if (std::abs(dobj) > Scalar(1e12) && pinf > 1e-4) {
        infeasible_flag = true;
        break;
      }

      const Eigen::LLT<Mat> llt_z(z);
      const Eigen::LLT<Mat> llt_x(x);
      if (llt_z.info() != Eigen::Success || llt_x.info() != Eigen::Success) break;
      const Mat z_inv = llt_z.solve(Mat::Identity(n, n));

      const Scalar mu = x.cwiseProduct(z).sum() / n;
      const Scalar mu_floor =
          std::is_same_v<Scalar, long double> ? Scalar(1e-24) : Scalar(1e-19);
      if (mu < mu_floor * n) break;
      if (polish_phase && --polish_left < 0) break;
      const Scalar progress_measure = mu + Scalar(pinf) + Scalar(dinf);
      if (progress_measure < Scalar(0.995) * best_measure) {
        best_measure = std::min(best_measure, progress_measure);
        stall_count = 0;
      } else if (++stall_count >= 14) {
        break;  // no longer making progress; report what we have
      }

      // Schur complement M_ij = tr(B_i X B_j Z^-1), assembled entrywise from
      // the sparse constraint blocks.
      Mat schur = Mat::Zero(m, m);
      for (int i = 0; i < m; ++i) {
        for (int j = i; j < m; ++j) {
          Scalar sum = 0;
          for (const auto& ei : expanded[i]) {
            for (const auto& ej : expanded[j]) {
              sum += Scalar(ei.value) * Scalar(ej.value) * x(ei.col, ej.row) *
                     z_inv(ej.col, ei.row);
            }
          }
          schur(i, j) = sum;
          if (i != j) schur(j, i) = sum;
        }
      }
      Eigen::LDLT<Mat> ldlt(schur);
      if (ldlt.info() != Eigen::Success) {
        schur.diagonal().array() += Scalar(1e-13) * schur.trace() / m;
        ldlt.compute(schur);
        if (ldlt.info() != Eigen::Success) break;
      }

      const Mat x_rd_zi = x * rd * z_inv;
      const Vec a_zi = a_of(z_inv);
      const Vec a_xrdzi = a_of(x_rd_zi);

      auto direction = [&](Scalar nu_target, const Mat* corr) {
        Vec rhs_vec = rhs - nu_target * a_zi + a_xrdzi;
        Mat corr_zi;
        if (corr != nullptr) {
          corr_zi = (*corr) * z_inv;
          rhs_vec += a_of(corr_zi);
        }
        const Vec dy = ldlt.solve(rhs_vec);
        Mat dz = rd;
        add_blocks(dz, -dy);
        Mat dx = nu_target * z_inv - x - x * dz * z_inv;
        if (corr != nullptr) dx -= corr_zi;
        dx = (Scalar(0.5) * (dx + dx.transpose())).eval();
        return std::make_tuple(dx, dy, dz);
      };

      // Predictor.
      auto [dx_p, dy_p, dz_p] = direction(Scalar(0), nullptr);
      Scalar ap, ad;
      Mat dx, dz;
      Vec dy;
      if (polish_phase) {
        // Affine-only steps once converged: mu collapses while feasibility
        // stays pinned, sharpening the rank-1 spectrum.
        dx = std::move(dx_p);
        dy = std::move(dy_p);
        dz = std::move(dz_p);
        ap = ad = std::min<Scalar>(
            1, Scalar(0.999) * std::min(max_step(llt_x, dx), max_step(llt_z, dz)));
        if (ap < Scalar(0.05)) break;
      } else {
        const Scalar ap_aff = std::min<Scalar>(1, max_step(llt_x, dx_p));
        const Scalar ad_aff = std::min<Scalar>(1, max_step(llt_z, dz_p));
        const Scalar gap_aff = ((x + ap_aff * dx_p).cwiseProduct(z + ad_aff * dz_p)).sum();
        const Scalar gap = x.cwiseProduct(z).sum();
        Scalar sigma = gap > 0 ? Scalar(std::pow(double(std::max<Scalar>(0, gap_aff / gap)), 3.0))
                               : Scalar(0);
        sigma = std::min<Scalar>(1, std::max<Scalar>(0, sigma));

        // Corrector with the Mehrotra second-order term.
        const Mat w_corr = dx_p * dz_p;
        std::tie(dx, dy, dz) = direction(sigma * mu, &w_corr);

        // Longer steps once the iterates are deep in the convergent regime.
        const Scalar frac = mu < Scalar(1e-10)
                                ? std::min<Scalar>(0.995, Scalar(options.step_fraction) + 0.015)
                                : Scalar(options.step_fraction);
        ap = frac * max_step(llt_x, dx);
        ad = frac * max_step(llt_z, dz);
        // A shared step keeps the iterates better centered on problems whose
        // optimal moment matrix is nearly rank one.
        ap = ad = std::min<Scalar>(1, std::min(ap, ad));
      }
      if (!std::isfinite(double(ap)) || !std::isfinite(double(ad)) || ap <= 0 || ad <= 0) break;
      if (options.verbose) {
        fprintf(stderr, "   mu %.3Le ap %.3f%s\n", static_cast<long double>(mu), double(ap),
                polish_phase ? " (polish)" : "");
      }

      x += ap * dx;
      y += ad * dy;
      z += ad * dz;
    }
    iterations = iter;
  }
};

}  // namespace

MomentSolution solve_sdp(const SdpInstance& instance, const SdpOptions& options) {
  const auto start_time = std::chrono::steady_clock::now();
  const int n = instance.dim;
  const int m = static_cast<int>(instance.B.size());
  MomentSolution out;
  if (n <= 0 || m <= 0 || instance.rhs.size() != m) {
    throw std::invalid_argument("solve_sdp: malformed instance");
  }

  // Internal equilibration: unit Frobenius norm per constraint, cost scaled
  // to unit norm. Multipliers are mapped back on exit.
  std::vector<double> b_scale(m);
  std::vector<SparseSym> bs(m);
  VectorXd rhs(m);
  for (int i = 0; i < m; ++i) {
    const double norm = instance.B[i].frobenius_norm();
    if (!(norm > 0.0)) throw std::invalid_argument("solve_sdp: zero constraint block");
    b_scale[i] = 1.0 / norm;
    bs[i] = instance.B[i];
    bs[i].scale(b_scale[i]);
    rhs(i) = instance.rhs(i) * b_scale[i];
  }
  const double c_scale = 1.0 / std::max(1.0, instance.C.norm());

  MatrixXd x_out;
  VectorXd y_out;
  double pinf = 0.0, dinf = 0.0;
  bool infeasible_flag = false;
  auto run_core = [&](auto scalar_tag) {
    using Scalar = decltype(scalar_tag);
    IpmCore<Scalar> core;
    core.n = n;
    core.m = m;
    core.c_mat = (instance.C * c_scale).cast<Scalar>();
    core.c_mat.diagonal().array() += Scalar(options.trace_tie_break);
    core.rhs = rhs.cast<Scalar>();
    core.expanded.resize(m);
    for (int i = 0; i < m; ++i) core.expanded[i] = expand(bs[i]);
    core.b_scale = b_scale;
    core.c_scale = Scalar(c_scale);
    core.run(options);
    x_out = core.x.template cast<double>();
    y_out = core.y.template cast<double>();
    out.iterations = core.iterations;
    pinf = core.pinf;
    dinf = core.dinf;
    infeasible_flag = core.infeasible_flag;
  };
  if (options.extended_precision) {
    run_core(static_cast<long double>(0));
  } else {
    run_core(static_cast<double>(0));
  }
  if (infeasible_flag) out.status = SdpStatus::infeasible;
  const MatrixXd x = x_out;
  const VectorXd y = y_out;

  // Map back to the raw scale.
  out.S = x;

  out.p_star = (instance.C.cwiseProduct(x)).sum();
  VectorXd lambda_all(m);
  for (int i = 0; i < m; ++i) lambda_all(i) = -y(i) * b_scale[i] / c_scale;
  if (instance.normalization_index >= 0) {
    out.nu = -lambda_all(instance.normalization_index);
    VectorXd lam(m - 1);
    int j = 0;
    for (int i = 0; i < m; ++i) {
      if (i == instance.normalization_index) continue;
      lam(j++) = lambda_all(i);
    }
    out.lambda = lam;
  } else {
    out.nu = 0.0;
    out.lambda = lambda_all;
  }
  // The dual value is reported net of the tie-break contribution so that
  // weak duality holds against the original objective.
  out.d_star = instance.rhs.dot(-lambda_all) - options.trace_tie_break * x.trace() / c_scale;

  double max_resid = 0.0;
  for (int i = 0; i < m; ++i) {
    max_resid = std::max(max_resid, std::abs(instance.B[i].dot(x) - instance.rhs(i)));
  }
  out.max_constraint_residual = max_resid;
  {
    Eigen::SelfAdjointEigenSolver<MatrixXd> eig(x, Eigen::EigenvaluesOnly);
    out.min_eigenvalue = eig.eigenvalues().minCoeff();
  }
  out.relative_gap =
      std::abs(out.p_star - out.d_star) / (1.0 + std::abs(out.p_star) + std::abs(out.d_star));

  if (out.status != SdpStatus::infeasible) {
    const double accept = options.tol_accept;
    const bool feasible_enough = out.max_constraint_residual <= accept &&
                                 out.min_eigenvalue >= -accept && out.relative_gap <= accept &&
                                 dinf <= accept;
    if (feasible_enough) {
      out.status = SdpStatus::solved;
    } else if (out.max_constraint_residual <= 1e3 * accept && out.relative_gap <= 1e3 * accept &&
               out.min_eigenvalue >= -1e3 * accept) {
      out.status = SdpStatus::inaccurate;
    } else {
      out.status = SdpStatus::numerical_failure;
    }
  }
  out.solve_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start_time).count();
  return out;
}

// ---------------------------------------------------------------------------
// SDPA-style sparse text export
// ---------------------------------------------------------------------------

void write_sdpa(const SdpInstance& instance, std::ostream& out) {
  out.precision(17);
  out << "\"certidop SDP instance: min C.S s.t. B_i.S = rhs_i, S >= 0\"\n";
  out << instance.B.size() << " = mDIM\n";
  out << 1 << " = nBLOCK\n";
  out << instance.dim << " = bLOCKsTRUCT\n";
  for (int i = 0; i < instance.rhs.size(); ++i) {
    out << instance.rhs(i) << (i + 1 == instance.rhs.size() ? '\n' : ' ');
  }
  // Entries: <matno> <block> <row> <col> <value>, 1-based, upper triangle.
  // Matrix 0 is the cost.
  for (int r = 0; r < instance.dim; ++r) {
    for (int c = r; c < instance.dim; ++c) {
      if (instance.C(r, c) != 0.0) {
        out << 0 << " 1 " << r + 1 << " " << c + 1 << " " << instance.C(r, c) << "\n";
      }
    }
  }
  for (std::size_t i = 0; i < instance.B.size(); ++i) {
    for (const auto& e : instance.B[i].entries) {
      out << i + 1 << " 1 " << e.row + 1 << " " << e.col + 1 << " " << e.value << "\n";
    }
  }
}

SdpInstance read_sdpa(std::istream& in) {
  SdpInstance inst;
  std::string line;
  if (!std::getline(in, line)) throw std::runtime_error("read_sdpa: empty stream");
  if (line.empty() || line[0] != '"') {
    throw std::runtime_error("read_sdpa: missing comment line");
  }
  int m_dim = 0, n_block = 0, block = 0;
  in >> m_dim;
  std::getline(in, line);
  in >> n_block;
  std::getline(in, line);
  if (n_block != 1) throw std::runtime_error("read_sdpa: expected a single block");
  in >> block;
  std::getline(in, line);
  inst.dim = block;
  inst.C = Eigen::MatrixXd::Zero(block, block);
  inst.rhs.resize(m_dim);
  for (int i = 0; i < m_dim; ++i) in >> inst.rhs(i);
  inst.B.assign(m_dim, SparseSym{});
  for (auto& b : inst.B) b.dim = block;

  int matno = 0, blkno = 0, row = 0, col = 0;
  double value = 0.0;
  while (in >> matno >> blkno >> row >> col >> value) {
    if (blkno != 1 || row < 1 || col < 1 || row > block || col > block) {
      throw std::runtime_error("read_sdpa: entry out of range");
    }
    if (matno == 0) {
      inst.C(row - 1, col - 1) = value;
      inst.C(col - 1, row - 1) = value;
    } else if (matno >= 1 && matno <= m_dim) {
      inst.B[matno - 1].add(row - 1, col - 1, value);
    } else {
      throw std::runtime_error("read_sdpa: matrix index out of range");
    }
  }
  // Recover the normalization row: a single corner entry with unit RHS.
  for (int i = 0; i < m_dim; ++i) {
    if (inst.rhs(i) == 1.0 && inst.B[i].entries.size() == 1 &&
        inst.B[i].entries[0].row == block - 1 && inst.B[i].entries[0].col == block - 1) {
      inst.normalization_index = i;
    }
  }
  return inst;
}

}  // namespace certidop
