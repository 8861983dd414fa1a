#include "proxsplit/product_space.hpp"

#include <cmath>
#include <numeric>

namespace proxsplit {

namespace {

void check_duals(const BlockStack& stack, const DualVector& ys, const char* where) {
  if (ys.size() != stack.size())
    throw DimensionError(std::string(where) + ": expected " + std::to_string(stack.size()) +
                         " blocks, got " + std::to_string(ys.size()));
  for (std::size_t i = 0; i < ys.size(); ++i) {
    if (ys[i].size() != stack.block(i).op.rows())
      throw DimensionError(std::string(where) + ": block " + std::to_string(i) +
                           " expects length " + std::to_string(stack.block(i).op.rows()) +
                           ", got " + std::to_string(ys[i].size()));
  }
}

}  // namespace

BlockStack::BlockStack(std::vector<Block> blocks, std::optional<std::vector<double>> weights,
                       double norm_tol)
    : blocks_(std::move(blocks)), weights_(std::move(weights)), norm_tol_(norm_tol) {
  if (blocks_.empty()) throw DimensionError("a block stack needs at least one block");
  const Index primal = blocks_.front().op.cols();
  for (std::size_t i = 0; i < blocks_.size(); ++i) {
    const Block& b = blocks_[i];
    if (b.op.cols() != primal)
      throw DimensionError("block " + std::to_string(i) + " has input dimension " +
                           std::to_string(b.op.cols()) + ", expected " + std::to_string(primal));
    if (b.term.dim() && *b.term.dim() != b.op.rows())
      throw DimensionError("block " + std::to_string(i) + ": term dimension " +
                           std::to_string(*b.term.dim()) + " does not match operator rows " +
                           std::to_string(b.op.rows()));
  }
  if (weights_) {
    const auto& w = *weights_;
    if (w.size() != blocks_.size())
      throw DimensionError("expected " + std::to_string(blocks_.size()) + " weights, got " +
                           std::to_string(w.size()));
    if (blocks_.size() == 1) {
      if (w[0] != 1.0) throw ParameterError("a single block must carry weight 1");
    } else {
      for (double wi : w)
        if (!(wi > 0.0 && wi < 1.0)) throw ParameterError("block weights must lie in (0, 1)");
      const double total = std::accumulate(w.begin(), w.end(), 0.0);
      if (std::abs(total - 1.0) > 1e-12) throw ParameterError("block weights must sum to 1");
    }
  }
  norm_sq_bounds_.reserve(blocks_.size());
  for (const Block& b : blocks_) norm_sq_bounds_.push_back(op_norm_sq_bound(b.op, norm_tol_));
}

DualVector zero_duals(const BlockStack& stack) {
  DualVector ys;
  ys.reserve(stack.size());
  for (const Block& b : stack.blocks()) ys.push_back(Vector::Zero(b.op.rows()));
  return ys;
}

DualVector stacked_apply(const BlockStack& stack, const Eigen::Ref<const Vector>& x) {
  DualVector out;
  out.reserve(stack.size());
  for (const Block& b : stack.blocks()) out.push_back(b.op.apply(x));
  return out;
}

Vector combined_adjoint(const BlockStack& stack, const DualVector& ys) {
  check_duals(stack, ys, "combined_adjoint");
  Vector sum = Vector::Zero(stack.primal_dim());
  for (std::size_t i = 0; i < stack.size(); ++i) {
    if (stack.weighted())
      sum += stack.weight(i) * stack.block(i).op.adjoint_apply(ys[i]);
    else
      sum += stack.block(i).op.adjoint_apply(ys[i]);
  }
  return sum;
}

DualVector stacked_conjugate_prox(const BlockStack& stack, const DualVector& ys, double t) {
  check_duals(stack, ys, "stacked_conjugate_prox");
  DualVector out;
  out.reserve(stack.size());
  for (std::size_t i = 0; i < stack.size(); ++i)
    out.push_back(prox_weighted_conjugate(stack.block(i).term, stack.weight(i), ys[i], t));
  return out;
}

DualVector stacked_prox(const BlockStack& stack, const DualVector& ys, double t) {
  check_duals(stack, ys, "stacked_prox");
  DualVector out;
  out.reserve(stack.size());
  for (std::size_t i = 0; i < stack.size(); ++i)
    out.push_back(stack.block(i).term.prox(ys[i], t / stack.weight(i)));
  return out;
}

double stack_norm_sq_bound(const BlockStack& stack) {
  double total = 0.0;
  for (std::size_t i = 0; i < stack.size(); ++i)
    total += stack.weight(i) * stack.block_norm_sq_bound(i);
  return total;
}

double product_inner(const BlockStack& stack, const DualVector& ys, const DualVector& zs) {
  check_duals(stack, ys, "product_inner");
  check_duals(stack, zs, "product_inner");
  double total = 0.0;
  for (std::size_t i = 0; i < stack.size(); ++i) total += stack.weight(i) * ys[i].dot(zs[i]);
  return total;
}

double stacked_value(const BlockStack& stack, const Eigen::Ref<const Vector>& x) {
  double total = 0.0;
  for (const Block& b : stack.blocks()) {
    total += b.term.evaluate(b.op.apply(x));
    if (std::isinf(total)) return total;
  }
  return total;
}

}  // namespace proxsplit
