#pragma once

#include <optional>
#include <vector>

#include "proxsplit/linop.hpp"
#include "proxsplit/prox.hpp"

namespace proxsplit {

/// One element y = (y_1, ..., y_m) of the product space G_1 × ... × G_m.
using DualVector = std::vector<Vector>;

struct Block {
  LinearOperator op;
  ProxTerm term;
};

/// The blocks (B_i, h_i) of a composite objective Σ h_i(B_i x), viewed as a
/// single operator into the product space.
///
/// Without weights the product space carries Σ <y_i, z_i>; with weights it
/// carries Σ w_i <y_i, z_i>, where w_i ∈ (0, 1) sum to one (a single block
/// takes w_1 = 1). Weights and operator-norm bounds are fixed at construction.
class BlockStack {
 public:
  explicit BlockStack(std::vector<Block> blocks,
                      std::optional<std::vector<double>> weights = std::nullopt,
                      double norm_tol = 1e-6);

  std::size_t size() const { return blocks_.size(); }
  const Block& block(std::size_t i) const { return blocks_[i]; }
  const std::vector<Block>& blocks() const { return blocks_; }

  bool weighted() const { return weights_.has_value(); }
  /// w_i, or 1 in unweighted mode.
  double weight(std::size_t i) const { return weights_ ? (*weights_)[i] : 1.0; }

  Index primal_dim() const { return blocks_.front().op.cols(); }

  /// Safety-inflated estimate of ||B_i||².
  double block_norm_sq_bound(std::size_t i) const { return norm_sq_bounds_[i]; }
  double norm_tol() const { return norm_tol_; }

 private:
  std::vector<Block> blocks_;
  std::optional<std::vector<double>> weights_;
  std::vector<double> norm_sq_bounds_;
  double norm_tol_;
};

/// Zero element of the product space.
DualVector zero_duals(const BlockStack& stack);

/// (B_1 x, ..., B_m x).
DualVector stacked_apply(const BlockStack& stack, const Eigen::Ref<const Vector>& x);

/// Σ w_i B_iᵀ y_i, accumulated in block order.
Vector combined_adjoint(const BlockStack& stack, const DualVector& ys);

/// Blockwise prox_weighted_conjugate(h_i, w_i, y_i, t).
DualVector stacked_conjugate_prox(const BlockStack& stack, const DualVector& ys, double t);

/// Blockwise prox_{(t / w_i) h_i}(y_i).
DualVector stacked_prox(const BlockStack& stack, const DualVector& ys, double t);

/// Σ w_i ||B_i||² (weights 1 when unweighted), from the inflated estimates.
double stack_norm_sq_bound(const BlockStack& stack);

/// The inner product the stack's product space carries.
double product_inner(const BlockStack& stack, const DualVector& ys, const DualVector& zs);

/// Σ h_i(B_i x).
double stacked_value(const BlockStack& stack, const Eigen::Ref<const Vector>& x);

}  // namespace proxsplit
