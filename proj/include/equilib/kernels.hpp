#pragma once

#include <Eigen/Cholesky>
#include <optional>
#include <utility>

#include "equilib/geometry.hpp"

namespace equilib {

enum class KernelKind { Riesz, Logarithmic, ExplicitMatrix };
enum class DiagonalRule { Cell, Fixed, InfiniteExcluded };

struct KernelSpec {
  KernelKind kind = KernelKind::Riesz;
  double alpha = 2.0;  // Riesz order, 0 < alpha < n
  int dim = 3;         // ambient dimension n for Riesz
  DiagonalRule diagonal = DiagonalRule::Cell;
  double c_reg = 1.0;        // cell-rule regularization factor
  VectorXd fixed_diagonal;   // DiagonalRule::Fixed
  double log_margin = 0.05;  // logarithmic kernel: points inside radius 1-margin

  static KernelSpec riesz(double alpha, int dim, double c_reg = 1.0) {
    KernelSpec s;
    s.kind = KernelKind::Riesz;
    s.alpha = alpha;
    s.dim = dim;
    s.c_reg = c_reg;
    return s;
  }
  static KernelSpec logarithmic(double c_reg = 1.0, double margin = 0.05) {
    KernelSpec s;
    s.kind = KernelKind::Logarithmic;
    s.c_reg = c_reg;
    s.log_margin = margin;
    return s;
  }
  static KernelSpec explicit_matrix() {
    KernelSpec s;
    s.kind = KernelKind::ExplicitMatrix;
    return s;
  }

  void validate() const {
    if (kind == KernelKind::Riesz) {
      if (dim < 2) throw Error("riesz kernel: dimension must be >= 2");
      if (!(alpha > 0 && alpha < dim))
        throw Error("riesz kernel: order must satisfy 0 < alpha < n");
    }
    if (c_reg <= 0) throw Error("kernel: c_reg must be positive");
  }
};

/// Off-diagonal kernel evaluation. The singular diagonal is the matrix
/// assembler's job; x == y is rejected here.
inline double kernel_eval(const KernelSpec& spec, const VectorXd& x,
                          const VectorXd& y) {
  spec.validate();
  if (spec.kind == KernelKind::ExplicitMatrix)
    throw Error("kernel_eval: explicit-matrix kernels have no pointwise form");
  const double r = (x - y).norm();
  if (r == 0.0) throw Error("kernel_eval: x == y hits the kernel singularity");
  if (spec.kind == KernelKind::Riesz)
    return std::pow(r, spec.alpha - spec.dim);
  if (r >= 1.0)
    throw Error("kernel_eval: logarithmic kernel out of domain (|x-y| >= 1)");
  return -std::log(r);
}

namespace detail {

// Locates the first nonpositive pivot of an attempted Cholesky
// factorization; returns {pivot, leading minor size}.
inline std::pair<double, int> failing_pivot(const MatrixXd& m) {
  const int n = static_cast<int>(m.rows());
  MatrixXd L = MatrixXd::Zero(n, n);
  for (int j = 0; j < n; ++j) {
    double d = m(j, j) - L.row(j).head(j).squaredNorm();
    if (d <= 0) return {d, j + 1};
    L(j, j) = std::sqrt(d);
    for (int i = j + 1; i < n; ++i)
      L(i, j) = (m(i, j) - L.row(i).head(j).dot(L.row(j).head(j))) / L(j, j);
  }
  return {L.diagonal().minCoeff() * L.diagonal().minCoeff(), n};
}

}  // namespace detail

/// Symmetric strictly positive definite kernel matrix over a finite carrier.
/// Positive definiteness (the discrete energy principle) is certified by a
/// successful Cholesky factorization at assembly.
class KernelMatrix {
 public:
  KernelMatrix(MatrixXd entries, KernelSpec spec, std::uint64_t carrier_id = 0)
      : K_(std::move(entries)), spec_(std::move(spec)), carrier_id_(carrier_id) {
    if (K_.rows() != K_.cols()) throw Error("KernelMatrix: matrix not square");
    // Exact symmetrization; off-diagonal assembly already writes both
    // triangles identically, explicit matrices are checked by the loader.
    llt_.compute(K_);
    if (llt_.info() != Eigen::Success) {
      auto [pivot, minor] = detail::failing_pivot(K_);
      throw PdError(pivot, minor);
    }
    const double dmin = llt_.matrixLLT().diagonal().minCoeff();
    pd_certificate_ = dmin * dmin;
    if (!(pd_certificate_ > 0)) {
      auto [pivot, minor] = detail::failing_pivot(K_);
      throw PdError(pivot, minor);
    }
  }

  int size() const { return static_cast<int>(K_.rows()); }
  const MatrixXd& matrix() const { return K_; }
  const KernelSpec& spec() const { return spec_; }
  double pd_certificate() const { return pd_certificate_; }
  std::uint64_t carrier_id() const { return carrier_id_; }

  VectorXd potential(const VectorXd& w) const {
    check(w);
    return K_ * w;
  }
  double energy(const VectorXd& w) const {
    check(w);
    return w.dot(K_ * w);
  }
  double inner(const VectorXd& w, const VectorXd& v) const {
    check(w);
    check(v);
    return w.dot(K_ * v);
  }
  double norm(const VectorXd& w) const {
    return std::sqrt(std::max(0.0, energy(w)));
  }
  double distance(const VectorXd& w, const VectorXd& v) const {
    return norm(w - v);
  }
  VectorXd solve(const VectorXd& rhs) const { return llt_.solve(rhs); }

  void check(const VectorXd& w) const {
    if (w.size() != K_.rows())
      throw Error("carrier mismatch: weight vector of length " +
                  std::to_string(w.size()) + " against matrix of size " +
                  std::to_string(K_.rows()));
  }

 private:
  MatrixXd K_;
  KernelSpec spec_;
  std::uint64_t carrier_id_ = 0;
  Eigen::LLT<MatrixXd> llt_;
  double pd_certificate_ = 0;
};

/// Assembles the kernel matrix of a point set: off-diagonals by pointwise
/// evaluation, diagonal by the spec's rule. The cell rule prices the
/// self-energy of a cell of radius c_reg * delta_i, delta_i being half the
/// nearest-neighbor distance.
inline KernelMatrix assemble_matrix(const PointSet& ps, const KernelSpec& spec) {
  spec.validate();
  if (spec.kind == KernelKind::ExplicitMatrix)
    throw Error("assemble_matrix: explicit matrices are loaded, not assembled");
  const int n = ps.size();
  if (spec.kind == KernelKind::Logarithmic) {
    const double rmax = 1.0 - spec.log_margin;
    for (int i = 0; i < n; ++i)
      if (ps.point(i).norm() > rmax)
        throw Error("logarithmic kernel: point " + std::to_string(i) +
                    " outside the disc of radius " + std::to_string(rmax));
  }
  MatrixXd K(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j) {
      const double v = kernel_eval(spec, ps.point(i).transpose(),
                                   ps.point(j).transpose());
      K(i, j) = v;
      K(j, i) = v;
    }
  switch (spec.diagonal) {
    case DiagonalRule::Cell: {
      const VectorXd delta = ps.cell_radii();
      for (int i = 0; i < n; ++i) {
        const double d = spec.c_reg * delta[i];
        K(i, i) = spec.kind == KernelKind::Riesz
                      ? std::pow(d, spec.alpha - spec.dim)
                      : -std::log(d);
      }
      break;
    }
    case DiagonalRule::Fixed: {
      if (spec.fixed_diagonal.size() != n)
        throw Error("fixed diagonal rule: length mismatch");
      K.diagonal() = spec.fixed_diagonal;
      break;
    }
    case DiagonalRule::InfiniteExcluded:
      throw Error(
          "diagonal rule infinite-excluded cannot assemble a finite matrix "
          "for a singular kernel");
  }
  return KernelMatrix(std::move(K), spec, ps.id());
}

/// Wraps a user-supplied symmetric matrix, rejecting asymmetry beyond
/// 1e-12 relative before the PD certificate runs.
inline KernelMatrix make_explicit_kernel(MatrixXd m) {
  if (m.rows() != m.cols()) throw Error("explicit matrix: not square");
  const double scale = std::max(1.0, m.cwiseAbs().maxCoeff());
  const double asym = (m - m.transpose()).cwiseAbs().maxCoeff();
  if (asym > 1e-12 * scale)
    throw Error("explicit matrix: not symmetric (max asymmetry " +
                std::to_string(asym) + ")");
  m = ((m + m.transpose()) / 2.0).eval();
  return KernelMatrix(std::move(m), KernelSpec::explicit_matrix());
}

}  // namespace equilib
