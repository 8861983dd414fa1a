#include "proxsplit/prox.hpp"

namespace proxsplit {

ProxTerm::ProxTerm(std::string name, std::optional<Index> dim, ValueFn value, ProxFn prox)
    : name_(std::move(name)), dim_(dim), value_(std::move(value)), prox_(std::move(prox)) {
  if (dim_ && *dim_ < 1) throw DimensionError("ProxTerm dimension must be positive");
}

void ProxTerm::check_dim(Index len, const char* where) const {
  if (dim_ && *dim_ != len)
    throw DimensionError(name_ + "." + where + ": expected length " + std::to_string(*dim_) +
                         ", got " + std::to_string(len));
}

double ProxTerm::evaluate(const Eigen::Ref<const Vector>& x) const {
  check_dim(x.size(), "evaluate");
  return value_(x);
}

Vector ProxTerm::prox(const Eigen::Ref<const Vector>& u, double t) const {
  check_dim(u.size(), "prox");
  detail::check_step(t);
  return prox_(u, t);
}

ProxTerm zero_function() {
  return ProxTerm(
      "zero", std::nullopt, [](const Vector&) { return 0.0; },
      [](const Vector& u, double) { return u; });
}

ProxTerm l1_norm() {
  return ProxTerm(
      "l1", std::nullopt, [](const Vector& x) { return x.lpNorm<1>(); },
      [](const Vector& u, double t) { return prox_l1(u, t); });
}

ProxTerm l21_norm() {
  return ProxTerm(
      "l21", std::nullopt, [](const Vector& x) { return proxsplit::l21_norm(x); },
      [](const Vector& u, double t) { return prox_l21(u, t); });
}

ProxTerm box_indicator(double lo, double hi) {
  if (!(lo <= hi)) throw ParameterError("box_indicator needs lo <= hi");
  return ProxTerm(
      "box", std::nullopt,
      [lo, hi](const Vector& x) {
        const bool inside = (x.array() >= lo).all() && (x.array() <= hi).all();
        return inside ? 0.0 : kInf;
      },
      [lo, hi](const Vector& u, double) { return project_box(u, lo, hi); });
}

ProxTerm origin_indicator() {
  return ProxTerm(
      "origin", std::nullopt, [](const Vector& x) { return (x.array() == 0.0).all() ? 0.0 : kInf; },
      [](const Vector& u, double) { return Vector(Vector::Zero(u.size())); });
}

ProxTerm squared_distance(Vector b) {
  const Index n = b.size();
  return ProxTerm(
      "sqdist", n, [b](const Vector& x) { return 0.5 * (x - b).squaredNorm(); },
      [b](const Vector& u, double t) { return Vector((u + t * b) / (1.0 + t)); });
}

ProxTerm scaled_term(const ProxTerm& f, double s) {
  if (!(s > 0.0)) throw ParameterError("scale of a prox term must be positive");
  return ProxTerm(
      std::to_string(s) + "*" + f.name(), f.dim(),
      [f, s](const Vector& x) {
        const double v = f.evaluate(x);
        return std::isinf(v) ? v : s * v;
      },
      [f, s](const Vector& u, double t) { return f.prox(u, s * t); });
}

ProxTerm translated_term(const ProxTerm& f, Vector c) {
  if (f.dim() && *f.dim() != c.size())
    throw DimensionError("translation length does not match the term's dimension");
  const Index n = c.size();
  return ProxTerm(
      f.name() + "(.-c)", n, [f, c](const Vector& x) { return f.evaluate(x - c); },
      [f, c](const Vector& u, double t) { return Vector(c + f.prox(u - c, t)); });
}

Vector prox_conjugate(const ProxTerm& f, const Eigen::Ref<const Vector>& u, double t) {
  detail::check_step(t);
  return u - t * f.prox(u / t, 1.0 / t);
}

Vector prox_translated(const ProxTerm& f, const Eigen::Ref<const Vector>& c,
                       const Eigen::Ref<const Vector>& u, double t) {
  if (c.size() != u.size())
    throw DimensionError("prox_translated: shift has length " + std::to_string(c.size()) +
                         ", input has " + std::to_string(u.size()));
  return c + f.prox(u - c, t);
}

Vector prox_scaled(const ProxTerm& f, double s, const Eigen::Ref<const Vector>& u, double t) {
  if (!(s > 0.0)) throw ParameterError("prox_scaled needs s > 0");
  detail::check_step(t);
  return f.prox(u, s * t);
}

Vector prox_weighted_conjugate(const ProxTerm& f, double w, const Eigen::Ref<const Vector>& u,
                               double t) {
  if (!(w > 0.0 && w <= 1.0)) throw ParameterError("block weight must lie in (0, 1]");
  detail::check_step(t);
  if (w == 1.0) return prox_conjugate(f, u, t);
  return prox_conjugate(f, w * u, w * t) / w;
}

}  // namespace proxsplit
