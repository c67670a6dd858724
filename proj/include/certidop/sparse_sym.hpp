#pragma once

#include <Eigen/Core>

#include <vector>

namespace certidop {

/// A sparse symmetric matrix stored as upper-triangle entries (row <= col).
/// Large constraint families (2N matrices of dimension ~2N+5) never get
/// densified.
struct SparseSym {
  struct Entry {
    int row;
    int col;  // row <= col
    double value;
  };

  int dim = 0;
  std::vector<Entry> entries;

  void add(int row, int col, double value) {
    if (row > col) std::swap(row, col);
    entries.push_back({row, col, value});
  }

  /// Frobenius inner product with a dense symmetric matrix.
  double dot(const Eigen::MatrixXd& dense) const {
    double sum = 0.0;
    for (const auto& e : entries) {
      sum += e.value * dense(e.row, e.col) * (e.row == e.col ? 1.0 : 2.0);
    }
    return sum;
  }

  /// Adds scale * this onto a dense symmetric matrix (both triangles).
  void add_to(Eigen::MatrixXd& dense, double scale = 1.0) const {
    for (const auto& e : entries) {
      dense(e.row, e.col) += scale * e.value;
      if (e.row != e.col) dense(e.col, e.row) += scale * e.value;
    }
  }

  Eigen::MatrixXd to_dense() const {
    Eigen::MatrixXd out = Eigen::MatrixXd::Zero(dim, dim);
    add_to(out);
    return out;
  }

  /// y += scale * M * x for a dense vector x.
  void multiply_add(const Eigen::VectorXd& x, Eigen::VectorXd& y, double scale = 1.0) const {
    for (const auto& e : entries) {
      y(e.row) += scale * e.value * x(e.col);
      if (e.row != e.col) y(e.col) += scale * e.value * x(e.row);
    }
  }

  double frobenius_norm() const {
    double sum = 0.0;
    for (const auto& e : entries) sum += e.value * e.value * (e.row == e.col ? 1.0 : 2.0);
    return std::sqrt(sum);
  }

  void scale(double factor) {
    for (auto& e : entries) e.value *= factor;
  }
};

}  // namespace certidop
