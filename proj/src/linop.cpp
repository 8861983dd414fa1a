#include "proxsplit/linop.hpp"

#include <algorithm>
#include <cmath>
#include <variant>
#include <vector>

namespace proxsplit {

namespace {

struct DenseRep {
  Matrix m;
};
struct SparseRep {
  SparseMatrix forward;
  SparseMatrix transpose;
};
struct IdentityRep {};
struct CompositionRep {
  LinearOperator outer;
  LinearOperator inner;
};
struct ScaledRep {
  double factor;
  LinearOperator op;
};

std::string size_message(const char* what, Index expected, Index actual) {
  return std::string(what) + ": expected length " + std::to_string(expected) + ", got " +
         std::to_string(actual);
}

}  // namespace

struct LinearOperator::Impl {
  Index rows;
  Index cols;
  OperatorKind kind;
  std::variant<DenseRep, SparseRep, IdentityRep, CompositionRep, ScaledRep> rep;
};

std::string to_string(OperatorKind kind) {
  switch (kind) {
    case OperatorKind::DenseMatrix: return "dense-matrix";
    case OperatorKind::SparseMatrix: return "sparse-matrix";
    case OperatorKind::FirstDifference: return "first-difference";
    case OperatorKind::TvGradient: return "tv-gradient";
    case OperatorKind::Identity: return "identity";
    case OperatorKind::Composition: return "composition";
    case OperatorKind::Scaled: return "scaled";
  }
  return "unknown";
}

LinearOperator LinearOperator::dense(Matrix m) {
  if (m.rows() < 1 || m.cols() < 1) throw DimensionError("dense operator must be non-empty");
  const Index r = m.rows(), c = m.cols();
  return LinearOperator(std::make_shared<const Impl>(
      Impl{r, c, OperatorKind::DenseMatrix, DenseRep{std::move(m)}}));
}

LinearOperator LinearOperator::sparse(SparseMatrix m, OperatorKind kind) {
  if (m.rows() < 1 || m.cols() < 1) throw DimensionError("sparse operator must be non-empty");
  m.prune(0.0);
  m.makeCompressed();
  SparseMatrix t = m.transpose();
  t.makeCompressed();
  const Index r = m.rows(), c = m.cols();
  return LinearOperator(
      std::make_shared<const Impl>(Impl{r, c, kind, SparseRep{std::move(m), std::move(t)}}));
}

LinearOperator LinearOperator::identity(Index n) {
  if (n < 1) throw DimensionError("identity dimension must be positive");
  return LinearOperator(
      std::make_shared<const Impl>(Impl{n, n, OperatorKind::Identity, IdentityRep{}}));
}

LinearOperator LinearOperator::zero(Index rows, Index cols) {
  return sparse(SparseMatrix(rows, cols));
}

Index LinearOperator::rows() const { return impl_->rows; }
Index LinearOperator::cols() const { return impl_->cols; }
OperatorKind LinearOperator::kind() const { return impl_->kind; }

const SparseMatrix* LinearOperator::sparse_matrix() const {
  if (const auto* s = std::get_if<SparseRep>(&impl_->rep)) return &s->forward;
  return nullptr;
}

Vector LinearOperator::apply(const Eigen::Ref<const Vector>& x) const {
  if (x.size() != cols()) throw DimensionError(size_message("apply", cols(), x.size()));
  return std::visit(
      [&](const auto& rep) -> Vector {
        using T = std::decay_t<decltype(rep)>;
        if constexpr (std::is_same_v<T, DenseRep>) {
          return rep.m * x;
        } else if constexpr (std::is_same_v<T, SparseRep>) {
          return rep.forward * x;
        } else if constexpr (std::is_same_v<T, IdentityRep>) {
          return x;
        } else if constexpr (std::is_same_v<T, CompositionRep>) {
          return rep.outer.apply(rep.inner.apply(x));
        } else {
          return rep.factor * rep.op.apply(x);
        }
      },
      impl_->rep);
}

Vector LinearOperator::adjoint_apply(const Eigen::Ref<const Vector>& y) const {
  if (y.size() != rows()) throw DimensionError(size_message("adjoint_apply", rows(), y.size()));
  return std::visit(
      [&](const auto& rep) -> Vector {
        using T = std::decay_t<decltype(rep)>;
        if constexpr (std::is_same_v<T, DenseRep>) {
          return rep.m.transpose() * y;
        } else if constexpr (std::is_same_v<T, SparseRep>) {
          return rep.transpose * y;
        } else if constexpr (std::is_same_v<T, IdentityRep>) {
          return y;
        } else if constexpr (std::is_same_v<T, CompositionRep>) {
          return rep.inner.adjoint_apply(rep.outer.adjoint_apply(y));
        } else {
          return rep.factor * rep.op.adjoint_apply(y);
        }
      },
      impl_->rep);
}

Matrix LinearOperator::to_dense() const {
  return std::visit(
      [&](const auto& rep) -> Matrix {
        using T = std::decay_t<decltype(rep)>;
        if constexpr (std::is_same_v<T, DenseRep>) {
          return rep.m;
        } else if constexpr (std::is_same_v<T, SparseRep>) {
          return Matrix(rep.forward);
        } else if constexpr (std::is_same_v<T, IdentityRep>) {
          return Matrix::Identity(rows(), cols());
        } else if constexpr (std::is_same_v<T, CompositionRep>) {
          return rep.outer.to_dense() * rep.inner.to_dense();
        } else {
          return rep.factor * rep.op.to_dense();
        }
      },
      impl_->rep);
}

LinearOperator compose(const LinearOperator& outer, const LinearOperator& inner) {
  if (outer.cols() != inner.rows())
    throw DimensionError(size_message("compose", outer.cols(), inner.rows()));
  return LinearOperator(std::make_shared<const LinearOperator::Impl>(LinearOperator::Impl{
      outer.rows(), inner.cols(), OperatorKind::Composition, CompositionRep{outer, inner}}));
}

LinearOperator scaled(double factor, const LinearOperator& op) {
  if (!std::isfinite(factor)) throw ParameterError("scale factor must be finite");
  return LinearOperator(std::make_shared<const LinearOperator::Impl>(LinearOperator::Impl{
      op.rows(), op.cols(), OperatorKind::Scaled, ScaledRep{factor, op}}));
}

LinearOperator first_difference(Index n) {
  if (n < 1) throw DimensionError("first_difference needs n >= 1");
  std::vector<Eigen::Triplet<double>> entries;
  entries.reserve(2 * n);
  for (Index i = 0; i + 1 < n; ++i) {
    entries.emplace_back(i, i, -1.0);
    entries.emplace_back(i, i + 1, 1.0);
  }
  SparseMatrix b(n, n);
  b.setFromTriplets(entries.begin(), entries.end());
  return LinearOperator::sparse(std::move(b), OperatorKind::FirstDifference);
}

LinearOperator tv_gradient(Index n, Index m) {
  if (n < 1 || m < 1) throw DimensionError("tv_gradient needs n, m >= 1");
  const Index pixels = n * m;
  std::vector<Eigen::Triplet<double>> entries;
  entries.reserve(4 * pixels);
  // I_m ⊗ B_n: within each column.
  for (Index j = 0; j < m; ++j) {
    for (Index i = 0; i + 1 < n; ++i) {
      const Index k = i + j * n;
      entries.emplace_back(k, k, -1.0);
      entries.emplace_back(k, k + 1, 1.0);
    }
  }
  // B_m ⊗ I_n: between neighbouring columns.
  for (Index j = 0; j + 1 < m; ++j) {
    for (Index i = 0; i < n; ++i) {
      const Index k = i + j * n;
      entries.emplace_back(pixels + k, k, -1.0);
      entries.emplace_back(pixels + k, k + n, 1.0);
    }
  }
  SparseMatrix d(2 * pixels, pixels);
  d.setFromTriplets(entries.begin(), entries.end());
  return LinearOperator::sparse(std::move(d), OperatorKind::TvGradient);
}

double op_norm_sq(const LinearOperator& op, double tol, int max_iter) {
  const Index n = op.cols();
  if (n == 0 || op.rows() == 0) return 0.0;
  Vector start = Vector::Ones(n);
  if (op.apply(start).squaredNorm() == 0.0) {
    // All-ones lies in the null space (difference operators); tilt it.
    for (Index i = 0; i < n; ++i) start(i) += 0.5 * std::sin(2.399963229728653 * double(i + 1));
  }
  start.normalize();

  // Krylov bases are kept dense, so their width is bounded; past it the
  // iteration restarts from the current top Ritz vector.
  const Index width = std::min<Index>({n, Index(std::max(max_iter, 1)), 200});
  Matrix basis(n, width);
  Vector alpha(width), beta(width);
  double theta = 0.0;
  int applied = 0;
  while (applied < max_iter) {
    Vector q = start;
    for (Index j = 0; j < width && applied < max_iter; ++j) {
      basis.col(j) = q;
      Vector w = op.adjoint_apply(op.apply(q));
      ++applied;
      alpha(j) = q.dot(w);
      for (int pass = 0; pass < 2; ++pass)
        w -= basis.leftCols(j + 1) * (basis.leftCols(j + 1).transpose() * w);
      beta(j) = w.norm();

      Eigen::SelfAdjointEigenSolver<Matrix> tri;
      tri.computeFromTridiagonal(alpha.head(j + 1), beta.head(j), Eigen::ComputeEigenvectors);
      const Index top = j;  // eigenvalues come sorted ascending
      theta = tri.eigenvalues()(top);
      if (theta <= 0.0 && beta(j) == 0.0) return 0.0;
      const Vector ritz = tri.eigenvectors().col(top);
      const double bound = beta(j) * std::abs(ritz(j));
      if (bound <= 0.5 * tol * theta || beta(j) <= 1e-14 * std::max(theta, 1.0) || j + 1 == n)
        return std::max(theta, 0.0);
      if (j + 1 == width) {
        start = (basis * ritz).normalized();
        break;
      }
      q = w / beta(j);
    }
  }
  return std::max(theta, 0.0);
}

double op_norm_sq_bound(const LinearOperator& op, double tol, int max_iter) {
  return op_norm_sq(op, tol, max_iter) * (1.0 + 10.0 * tol);
}

}  // namespace proxsplit
