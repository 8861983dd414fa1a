#pragma once

#include <cmath>
#include <functional>
#include <limits>
#include <optional>
#include <string>

#include <Eigen/Dense>

#include "proxsplit/errors.hpp"
#include "proxsplit/linop.hpp"

namespace proxsplit {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

namespace detail {
inline void check_step(double t) {
  if (!(t > 0.0)) throw ParameterError("prox step must be positive, got " + std::to_string(t));
}
}  // namespace detail

/// Soft thresholding: sign(u) max(|u| - t, 0).
template <typename Derived>
typename Derived::PlainObject prox_l1(const Eigen::MatrixBase<Derived>& u,
                                      typename Derived::Scalar t) {
  detail::check_step(double(t));
  return (u.array().sign() * (u.array().abs() - t).max(typename Derived::Scalar(0))).matrix();
}

/// Group soft thresholding of the pairs (u_i, u_{p+i}), p = size/2.
template <typename Derived>
typename Derived::PlainObject prox_l21(const Eigen::MatrixBase<Derived>& u,
                                       typename Derived::Scalar t) {
  using Scalar = typename Derived::Scalar;
  detail::check_step(double(t));
  if (u.size() % 2 != 0) throw DimensionError("prox_l21 needs an even-length vector");
  typename Derived::PlainObject out = u;
  const Index p = u.size() / 2;
  for (Index i = 0; i < p; ++i) {
    const Scalar norm = std::hypot(u(i), u(p + i));
    if (norm == Scalar(0)) continue;
    const Scalar keep = std::max(Scalar(1) - t / norm, Scalar(0));
    out(i) *= keep;
    out(p + i) *= keep;
  }
  return out;
}

/// Componentwise clamp to [lo, hi]; bounds may be infinite.
template <typename Derived>
typename Derived::PlainObject project_box(const Eigen::MatrixBase<Derived>& u,
                                          typename Derived::Scalar lo,
                                          typename Derived::Scalar hi) {
  if (!(lo <= hi)) throw ParameterError("project_box needs lo <= hi");
  return u.array().max(lo).min(hi).matrix();
}

/// A closed convex function known through its value and its proximity
/// operator prox_{t f}(u) = argmin_x ½||x - u||² + t f(x).
///
/// Indicators evaluate to exactly 0 or +inf. A term without a fixed
/// dimension accepts vectors of any length.
class ProxTerm {
 public:
  using ValueFn = std::function<double(const Vector&)>;
  using ProxFn = std::function<Vector(const Vector&, double)>;

  ProxTerm(std::string name, std::optional<Index> dim, ValueFn value, ProxFn prox);

  const std::string& name() const { return name_; }
  std::optional<Index> dim() const { return dim_; }

  double evaluate(const Eigen::Ref<const Vector>& x) const;
  Vector prox(const Eigen::Ref<const Vector>& u, double t) const;

 private:
  void check_dim(Index len, const char* where) const;

  std::string name_;
  std::optional<Index> dim_;
  ValueFn value_;
  ProxFn prox_;
};

ProxTerm zero_function();
ProxTerm l1_norm();
ProxTerm l21_norm();
ProxTerm box_indicator(double lo, double hi);
inline ProxTerm nonnegative_indicator() { return box_indicator(0.0, kInf); }
/// Indicator of {0}; its prox is identically zero.
ProxTerm origin_indicator();
/// ½||x - b||².
ProxTerm squared_distance(Vector b);
/// x ↦ s f(x).
ProxTerm scaled_term(const ProxTerm& f, double s);
/// x ↦ f(x - c).
ProxTerm translated_term(const ProxTerm& f, Vector c);

/// prox_{t f*}(u) = u - t prox_{f/t}(u / t).
Vector prox_conjugate(const ProxTerm& f, const Eigen::Ref<const Vector>& u, double t);

/// prox of x ↦ f(x - c): c + prox_{t f}(u - c).
Vector prox_translated(const ProxTerm& f, const Eigen::Ref<const Vector>& c,
                       const Eigen::Ref<const Vector>& u, double t);

/// prox of s f with step t, i.e. prox_{(s t) f}(u).
Vector prox_scaled(const ProxTerm& f, double s, const Eigen::Ref<const Vector>& u, double t);

/// (1/w) prox_{w t f*}(w u): one block of the conjugate prox on a product
/// space carrying the weighted inner product.
Vector prox_weighted_conjugate(const ProxTerm& f, double w, const Eigen::Ref<const Vector>& u,
                               double t);

}  // namespace proxsplit
