#pragma once

#include <cmath>
#include <memory>
#include <string>

#include <Eigen/Dense>
#include <Eigen/SparseCore>

#include "proxsplit/errors.hpp"

namespace proxsplit {

using Index = Eigen::Index;
using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;
using SparseMatrix = Eigen::SparseMatrix<double, Eigen::RowMajor>;

enum class OperatorKind {
  DenseMatrix,
  SparseMatrix,
  FirstDifference,
  TvGradient,
  Identity,
  Composition,
  Scaled,
};

std::string to_string(OperatorKind kind);

/// Bounded linear map R^cols -> R^rows together with its adjoint.
///
/// Operators are immutable once built; copies share the underlying storage,
/// so passing them by value is cheap and safe across threads.
class LinearOperator {
 public:
  static LinearOperator dense(Matrix m);
  /// Structural zeros in `m` are pruned. The transpose is stored alongside so
  /// that the adjoint is a row-gather like the forward product.
  static LinearOperator sparse(SparseMatrix m, OperatorKind kind = OperatorKind::SparseMatrix);
  static LinearOperator identity(Index n);
  static LinearOperator zero(Index rows, Index cols);

  Index rows() const;
  Index cols() const;
  OperatorKind kind() const;

  Vector apply(const Eigen::Ref<const Vector>& x) const;
  Vector adjoint_apply(const Eigen::Ref<const Vector>& y) const;

  /// Materializes the operator. Intended for oracles and small problems.
  Matrix to_dense() const;

  /// Non-null only for sparse-backed kinds.
  const SparseMatrix* sparse_matrix() const;

  struct Impl;

 private:
  explicit LinearOperator(std::shared_ptr<const Impl> impl) : impl_(std::move(impl)) {}
  friend LinearOperator compose(const LinearOperator&, const LinearOperator&);
  friend LinearOperator scaled(double, const LinearOperator&);

  std::shared_ptr<const Impl> impl_;
};

/// outer ∘ inner.
LinearOperator compose(const LinearOperator& outer, const LinearOperator& inner);
LinearOperator scaled(double factor, const LinearOperator& op);

/// Forward differences with a zero last row (reflexive boundary).
LinearOperator first_difference(Index n);

/// Discrete gradient of an n×m image stored column-major, stacked as
/// [I_m ⊗ B_n ; B_m ⊗ I_n]. The first nm outputs are differences along the
/// row index (vertical), the last nm along the column index (horizontal).
LinearOperator tv_gradient(Index n, Index m);

/// Estimate of ||op||^2 = λ_max(opᵀ op) by Lanczos with full
/// reorthogonalization on opᵀ op, started from a fixed seed vector. Stops
/// once the Ritz residual bound falls below tol/2 relative; `max_iter` caps
/// the total number of operator applications.
double op_norm_sq(const LinearOperator& op, double tol = 1e-6, int max_iter = 20000);

/// op_norm_sq inflated by (1 + 10 tol); the value every step-size rule uses.
double op_norm_sq_bound(const LinearOperator& op, double tol = 1e-6, int max_iter = 20000);

namespace detail {
inline void check_image_size(Index len, Index n, Index m) {
  if (n < 1 || m < 1) throw DimensionError("image dimensions must be positive");
  if (len != n * m)
    throw DimensionError("image vector has length " + std::to_string(len) + ", expected " +
                         std::to_string(n * m));
}
}  // namespace detail

/// Anisotropic total variation of a column-major n×m image, summed directly
/// over pixels.
template <typename Derived>
typename Derived::Scalar atv(const Eigen::MatrixBase<Derived>& u, Index n, Index m) {
  using Scalar = typename Derived::Scalar;
  detail::check_image_size(u.size(), n, m);
  Scalar total(0);
  for (Index j = 0; j < m; ++j) {
    for (Index i = 0; i < n; ++i) {
      const Scalar here = u(i + j * n);
      const Scalar dx = j + 1 < m ? u(i + (j + 1) * n) - here : Scalar(0);
      const Scalar dy = i + 1 < n ? u(i + 1 + j * n) - here : Scalar(0);
      total += std::abs(dx) + std::abs(dy);
    }
  }
  return total;
}

/// Isotropic total variation; same layout as atv.
template <typename Derived>
typename Derived::Scalar itv(const Eigen::MatrixBase<Derived>& u, Index n, Index m) {
  using Scalar = typename Derived::Scalar;
  detail::check_image_size(u.size(), n, m);
  Scalar total(0);
  for (Index j = 0; j < m; ++j) {
    for (Index i = 0; i < n; ++i) {
      const Scalar here = u(i + j * n);
      const Scalar dx = j + 1 < m ? u(i + (j + 1) * n) - here : Scalar(0);
      const Scalar dy = i + 1 < n ? u(i + 1 + j * n) - here : Scalar(0);
      total += std::sqrt(dx * dx + dy * dy);
    }
  }
  return total;
}

/// ||y||_{2,1} with the pairing y_i <-> y_{p+i}, p = size/2.
template <typename Derived>
typename Derived::Scalar l21_norm(const Eigen::MatrixBase<Derived>& y) {
  using Scalar = typename Derived::Scalar;
  if (y.size() % 2 != 0) throw DimensionError("l21 norm needs an even-length vector");
  const Index p = y.size() / 2;
  Scalar total(0);
  for (Index i = 0; i < p; ++i) total += std::hypot(y(i), y(p + i));
  return total;
}

}  // namespace proxsplit
