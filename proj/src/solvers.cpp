#include "proxsplit/solvers.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <sstream>

namespace proxsplit {

namespace {

std::string fmt(double v) {
  std::ostringstream os;
  os.precision(17);
  os << v;
  return os.str();
}

void require(bool ok, const std::string& message) {
  if (!ok) throw ParameterError(message);
}

void check_loop_settings(const SolverConfig& c) {
  require(c.inner_iters >= 1, "inner_iters must be at least 1");
  require(c.max_outer >= 1, "max_outer must be at least 1");
  require(c.eps > 0.0, "stopping tolerance eps must be positive");
}

void check_gamma(double gamma, double lipschitz) {
  require(gamma > 0.0, "gamma must be positive, got " + fmt(gamma));
  if (lipschitz > 0.0)
    require(gamma < 2.0 / lipschitz, "gamma must lie in (0, 2/L) = (0, " + fmt(2.0 / lipschitz) +
                                         "), got " + fmt(gamma));
}

Vector initial_primal(const Vector& x0, Index n) {
  if (x0.size() == 0) return Vector::Zero(n);
  if (x0.size() != n)
    throw DimensionError("x0 has length " + std::to_string(x0.size()) + ", expected " +
                         std::to_string(n));
  return x0;
}

DualVector initial_duals(const BlockStack& stack, const DualVector& y0) {
  if (y0.empty()) return zero_duals(stack);
  if (y0.size() != stack.size())
    throw DimensionError("y0 has " + std::to_string(y0.size()) + " blocks, expected " +
                         std::to_string(stack.size()));
  for (std::size_t i = 0; i < y0.size(); ++i)
    if (y0[i].size() != stack.block(i).op.rows())
      throw DimensionError("y0 block " + std::to_string(i) + " has the wrong length");
  return y0;
}

double relative_change(const Vector& next, const Vector& current) {
  const double step = (next - current).norm();
  const double base = current.norm();
  return base > 0.0 ? step / base : step;
}

// Shared bookkeeping of the outer loop: traces, stopping rule, divergence.
class OuterLoop {
 public:
  OuterLoop(const SolverConfig& config, const SolveHooks& hooks,
            std::function<double(const Vector&)> objective)
      : config_(config), hooks_(hooks), objective_(std::move(objective)) {
    const auto reserve = static_cast<std::size_t>(std::min<long>(config.max_outer, 100000));
    report_.objective_trace.reserve(reserve);
    report_.residual_trace.reserve(reserve);
  }

  // Records x^{k+1}; returns true when the loop should stop.
  bool advance(long k, const Vector& next, const Vector& current) {
    if (!next.allFinite())
      throw DivergenceError("non-finite iterate at outer iteration " + std::to_string(k), k);
    const double residual = relative_change(next, current);
    report_.residual_trace.push_back(residual);
    report_.objective_trace.push_back(objective_(next));
    if (hooks_.metric) report_.metric_trace.push_back(hooks_.metric(next));
    if (hooks_.on_iterate) hooks_.on_iterate(k, next);
    report_.outer_iters = k + 1;
    if (residual < config_.eps) {
      report_.termination = Termination::ToleranceMet;
      return true;
    }
    return false;
  }

  SolveReport finish(Vector x, DualVector y) {
    report_.x_final = std::move(x);
    report_.y_final = std::move(y);
    return std::move(report_);
  }

 private:
  const SolverConfig& config_;
  const SolveHooks& hooks_;
  std::function<double(const Vector&)> objective_;
  SolveReport report_;
};

}  // namespace

std::string to_string(Algorithm a) {
  switch (a) {
    case Algorithm::DFB: return "dfb";
    case Algorithm::PDFB: return "pdfb";
    case Algorithm::ADMM: return "admm";
  }
  return "unknown";
}

std::string to_string(Termination t) {
  return t == Termination::ToleranceMet ? "tolerance" : "max_iters";
}

Algorithm parse_algorithm(const std::string& name) {
  std::string lower = name;
  std::transform(lower.begin(), lower.end(), lower.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  if (lower == "dfb") return Algorithm::DFB;
  if (lower == "pdfb") return Algorithm::PDFB;
  if (lower == "admm") return Algorithm::ADMM;
  throw ParameterError("unknown algorithm '" + name + "' (valid: dfb, pdfb, admm)");
}

SmoothTerm zero_smooth() {
  return SmoothTerm{[](const Vector&) { return 0.0; },
                    [](const Vector& x) { return Vector(Vector::Zero(x.size())); }, 0.0};
}

SmoothTerm squared_distance_smooth(Vector b) {
  return SmoothTerm{[b](const Vector& x) { return 0.5 * (x - b).squaredNorm(); },
                    [b](const Vector& x) { return Vector(x - b); }, 1.0};
}

SmoothTerm least_squares(LinearOperator a, Vector b, double norm_tol) {
  if (b.size() != a.rows())
    throw DimensionError("least_squares: b has length " + std::to_string(b.size()) +
                         ", operator has " + std::to_string(a.rows()) + " rows");
  const double lipschitz = op_norm_sq_bound(a, norm_tol);
  return SmoothTerm{
      [a, b](const Vector& x) { return 0.5 * (a.apply(x) - b).squaredNorm(); },
      [a, b](const Vector& x) { return a.adjoint_apply(a.apply(x) - b); }, lipschitz};
}

SolverConfig validate_params(const CompositeProblem& problem, SolverConfig config) {
  check_loop_settings(config);
  const double lipschitz = problem.smooth.lipschitz;
  require(lipschitz >= 0.0 && std::isfinite(lipschitz), "Lipschitz constant must be finite and >= 0");
  const double s = stack_norm_sq_bound(problem.stack);

  if (!config.gamma) config.gamma = lipschitz > 0.0 ? 1.9 / lipschitz : 1.0;
  check_gamma(*config.gamma, lipschitz);
  const double gamma = *config.gamma;

  switch (config.algorithm) {
    case Algorithm::DFB: {
      if (!config.lambda) config.lambda = s > 0.0 ? 0.9 / s : 1.0;
      const double lambda = *config.lambda;
      require(lambda > 0.0, "lambda must be positive, got " + fmt(lambda));
      if (s > 0.0) {
        if (config.convergence_mode == ConvergenceMode::StrictWeak)
          require(lambda < 1.0 / s, "lambda must lie in (0, 1/S) with S = sum w_i ||B_i||^2 = " +
                                        fmt(s) + ", got " + fmt(lambda));
        else
          require(lambda < 2.0 / s, "lambda must lie in (0, 2/S) with S = sum w_i ||B_i||^2 = " +
                                        fmt(s) + ", got " + fmt(lambda));
      }
      break;
    }
    case Algorithm::PDFB: {
      if (!config.tau) config.tau = 1.0;
      const double tau = *config.tau;
      require(tau > 0.0, "tau must be positive, got " + fmt(tau));
      if (!config.sigma) config.sigma = s > 0.0 ? 0.9 / (tau * s) : 1.0;
      const double sigma = *config.sigma;
      require(sigma > 0.0, "sigma must be positive, got " + fmt(sigma));
      if (s > 0.0)
        require(sigma * tau < 1.0 / s, "sigma*tau must be < 1/S with S = sum w_i ||B_i||^2 = " +
                                           fmt(s) + ", got " + fmt(sigma * tau));
      const double tau_cv = tau * gamma / (1.0 + tau);
      const double sigma_cv = sigma / gamma;
      require(1.0 / tau_cv - sigma_cv * s > lipschitz / 2.0,
              "Condat-Vu condition 1/tau' - sigma'*S > L/2 fails: " +
                  fmt(1.0 / tau_cv - sigma_cv * s) + " <= " + fmt(lipschitz / 2.0));
      break;
    }
    case Algorithm::ADMM:
      throw ParameterError("ADMM is only available for the prior-image model");
  }
  return config;
}

double objective(const CompositeProblem& problem, const Eigen::Ref<const Vector>& x) {
  if (x.size() != problem.dim())
    throw DimensionError("objective: expected length " + std::to_string(problem.dim()) +
                         ", got " + std::to_string(x.size()));
  const Vector xv = x;
  const double g = problem.simple.evaluate(xv);
  if (std::isinf(g)) return g;
  const double h = stacked_value(problem.stack, xv);
  if (std::isinf(h)) return h;
  return problem.smooth.value(xv) + g + h;
}

SolveReport solve_dfb(const CompositeProblem& problem, const SolverConfig& raw,
                      const Vector& x0, const DualVector& y0, const SolveHooks& hooks) {
  SolverConfig config = raw;
  config.algorithm = Algorithm::DFB;
  config = validate_params(problem, config);
  const double gamma = *config.gamma;
  const double dual_step = *config.lambda / gamma;
  const BlockStack& stack = problem.stack;

  Vector x = initial_primal(x0, problem.dim());
  DualVector y = initial_duals(stack, y0);
  OuterLoop loop(config, hooks, [&](const Vector& v) { return objective(problem, v); });

  for (long k = 0; k < config.max_outer; ++k) {
    const Vector u = x - gamma * problem.smooth.gradient(x);
    for (int j = 0; j < config.inner_iters; ++j) {
      const Vector v = problem.simple.prox(u - gamma * combined_adjoint(stack, y), gamma);
      DualVector shifted = y;
      for (std::size_t i = 0; i < stack.size(); ++i)
        shifted[i] += dual_step * stack.block(i).op.apply(v);
      y = stacked_conjugate_prox(stack, shifted, dual_step);
    }
    Vector next = problem.simple.prox(u - gamma * combined_adjoint(stack, y), gamma);
    const bool done = loop.advance(k, next, x);
    x = std::move(next);
    if (done) break;
  }
  SolveReport report = loop.finish(std::move(x), std::move(y));
  report.finite_dimensional_only = config.convergence_mode == ConvergenceMode::RelaxedFinite;
  return report;
}

SolveReport solve_pdfb(const CompositeProblem& problem, const SolverConfig& raw,
                       const Vector& x0, const DualVector& y0, const SolveHooks& hooks) {
  SolverConfig config = raw;
  config.algorithm = Algorithm::PDFB;
  config = validate_params(problem, config);
  const double gamma = *config.gamma;
  const double sigma = *config.sigma;
  const double tau = *config.tau;
  const double primal_step = tau * gamma / (1.0 + tau);
  const BlockStack& stack = problem.stack;

  Vector x = initial_primal(x0, problem.dim());
  DualVector y = initial_duals(stack, y0);
  OuterLoop loop(config, hooks, [&](const Vector& v) { return objective(problem, v); });

  for (long k = 0; k < config.max_outer; ++k) {
    const Vector u = x - gamma * problem.smooth.gradient(x);
    Vector xbar = x;
    for (int j = 0; j < config.inner_iters; ++j) {
      Vector xbar_next = problem.simple.prox(
          (xbar - tau * combined_adjoint(stack, y) + tau * u) / (1.0 + tau), primal_step);
      const Vector extrapolated = 2.0 * xbar_next - xbar;
      for (std::size_t i = 0; i < stack.size(); ++i) {
        const Vector z = (y[i] + sigma * stack.block(i).op.apply(extrapolated)) / gamma;
        y[i] = gamma * prox_weighted_conjugate(stack.block(i).term, stack.weight(i), z,
                                               sigma / gamma);
      }
      xbar = std::move(xbar_next);
    }
    const bool done = loop.advance(k, xbar, x);
    x = std::move(xbar);
    if (done) break;
  }
  return loop.finish(std::move(x), std::move(y));
}

SolveReport solve(const CompositeProblem& problem, const SolverConfig& config,
                  const SolveHooks& hooks) {
  switch (config.algorithm) {
    case Algorithm::DFB: return solve_dfb(problem, config, {}, {}, hooks);
    case Algorithm::PDFB: return solve_pdfb(problem, config, {}, {}, hooks);
    case Algorithm::ADMM: break;
  }
  throw ParameterError("ADMM is only available for the prior-image model");
}

// --------------------------------------------------------------------------

void PiccsModel::check() const {
  const Index n = a.cols();
  if (b.size() != a.rows()) throw DimensionError("PICCS: b does not match A's rows");
  if (d1.cols() != n || d2.cols() != n)
    throw DimensionError("PICCS: D1 and D2 must act on the image space");
  if (prior.size() != n) throw DimensionError("PICCS: prior image has the wrong length");
  if (!(lambda1 >= 0.0) || !(lambda2 >= 0.0))
    throw ParameterError("PICCS: regularization weights must be non-negative");
  if (!(lower <= upper)) throw ParameterError("PICCS: empty constraint box");
}

CompositeProblem to_composite(const PiccsModel& model, double norm_tol) {
  model.check();
  const Vector shift = model.d1.apply(model.prior);
  ProxTerm h1 = model.lambda1 > 0.0
                    ? scaled_term(translated_term(model.phi1, shift), model.lambda1)
                    : zero_function();
  ProxTerm h2 = model.lambda2 > 0.0 ? scaled_term(model.phi2, model.lambda2) : zero_function();
  std::vector<Block> blocks{{model.d1, std::move(h1)}, {model.d2, std::move(h2)}};
  return CompositeProblem{least_squares(model.a, model.b, norm_tol),
                          box_indicator(model.lower, model.upper),
                          BlockStack(std::move(blocks), std::nullopt, norm_tol)};
}

double objective(const PiccsModel& model, const Eigen::Ref<const Vector>& x) {
  if (x.size() != model.a.cols()) throw DimensionError("objective: image has the wrong length");
  if ((x.array() < model.lower).any() || (x.array() > model.upper).any()) return kInf;
  double total = 0.5 * (model.a.apply(x) - model.b).squaredNorm();
  if (model.lambda1 > 0.0) total += model.lambda1 * model.phi1.evaluate(model.d1.apply(x - model.prior));
  if (model.lambda2 > 0.0) total += model.lambda2 * model.phi2.evaluate(model.d2.apply(x));
  return total;
}

SolverConfig validate_params(const PiccsModel& model, SolverConfig config, double norm_tol) {
  check_loop_settings(config);
  require(config.algorithm == Algorithm::ADMM,
          "the prior-image parameter check applies to ADMM; build a composite problem for " +
              to_string(config.algorithm));
  if (!config.rho1) config.rho1 = 1.0;
  if (!config.rho2) config.rho2 = 1.0;
  require(*config.rho1 > 0.0, "rho1 must be positive, got " + fmt(*config.rho1));
  require(*config.rho2 > 0.0, "rho2 must be positive, got " + fmt(*config.rho2));
  const double total = op_norm_sq_bound(model.a, norm_tol) +
                       *config.rho1 * op_norm_sq_bound(model.d1, norm_tol) +
                       *config.rho2 * op_norm_sq_bound(model.d2, norm_tol);
  if (!config.gamma) config.gamma = 1.9 / total;
  require(*config.gamma > 0.0 && *config.gamma < 2.0 / total,
          "gamma must lie in (0, 2/(||A||^2 + rho1||D1||^2 + rho2||D2||^2)) = (0, " +
              fmt(2.0 / total) + "), got " + fmt(*config.gamma));
  return config;
}

SolveReport solve_admm(const PiccsModel& model, const SolverConfig& raw, const Vector& x0,
                       const DualVector& y0, const DualVector& v0, const SolveHooks& hooks) {
  model.check();
  SolverConfig config = raw;
  config.algorithm = Algorithm::ADMM;
  config = validate_params(model, config);
  const double gamma = *config.gamma;
  const double rho1 = *config.rho1;
  const double rho2 = *config.rho2;

  const Index n = model.a.cols();
  const auto pair_or_zero = [&](const DualVector& given, const char* name) {
    if (given.empty())
      return DualVector{Vector::Zero(model.d1.rows()), Vector::Zero(model.d2.rows())};
    if (given.size() != 2 || given[0].size() != model.d1.rows() ||
        given[1].size() != model.d2.rows())
      throw DimensionError(std::string(name) + " must hold two vectors matching D1 and D2");
    return given;
  };
  Vector x = initial_primal(x0, n);
  DualVector y = pair_or_zero(y0, "y0");
  DualVector v = pair_or_zero(v0, "v0");
  const Vector shift = model.d1.apply(model.prior);

  OuterLoop loop(config, hooks, [&](const Vector& z) { return objective(model, z); });
  for (long k = 0; k < config.max_outer; ++k) {
    const Vector grad = model.a.adjoint_apply(model.a.apply(x) - model.b) +
                        rho1 * model.d1.adjoint_apply(model.d1.apply(x) - y[0] + v[0]) +
                        rho2 * model.d2.adjoint_apply(model.d2.apply(x) - y[1] + v[1]);
    Vector next = project_box(Vector(x - gamma * grad), model.lower, model.upper);

    const Vector d1x = model.d1.apply(next);
    const Vector d2x = model.d2.apply(next);
    y[0] = model.lambda1 > 0.0
               ? prox_translated(model.phi1, shift, d1x + v[0], model.lambda1 / rho1)
               : Vector(d1x + v[0]);
    y[1] = model.lambda2 > 0.0 ? model.phi2.prox(d2x + v[1], model.lambda2 / rho2)
                               : Vector(d2x + v[1]);
    v[0] += d1x - y[0];
    v[1] += d2x - y[1];

    const bool done = loop.advance(k, next, x);
    x = std::move(next);
    if (done) break;
  }
  DualVector out = y;
  out.insert(out.end(), v.begin(), v.end());
  return loop.finish(std::move(x), std::move(out));
}

}  // namespace proxsplit
