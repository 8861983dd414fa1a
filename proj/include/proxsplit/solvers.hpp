#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "proxsplit/linop.hpp"
#include "proxsplit/product_space.hpp"
#include "proxsplit/prox.hpp"

namespace proxsplit {

/// Differentiable term with L-Lipschitz gradient. L = 0 marks f ≡ 0.
struct SmoothTerm {
  std::function<double(const Vector&)> value;
  std::function<Vector(const Vector&)> gradient;
  double lipschitz = 0.0;
};

SmoothTerm zero_smooth();
/// ½||x - b||², L = 1.
SmoothTerm squared_distance_smooth(Vector b);
/// ½||A x - b||² with L the inflated estimate of ||A||².
SmoothTerm least_squares(LinearOperator a, Vector b, double norm_tol = 1e-6);

/// min f(x) + g(x) + Σ h_i(B_i x).
struct CompositeProblem {
  SmoothTerm smooth;
  ProxTerm simple;
  BlockStack stack;

  Index dim() const { return stack.primal_dim(); }
};

enum class Algorithm { DFB, PDFB, ADMM };
enum class ConvergenceMode { StrictWeak, RelaxedFinite };
enum class Termination { ToleranceMet, MaxIters };

std::string to_string(Algorithm a);
std::string to_string(Termination t);
/// Accepts dfb/pdfb/admm (case-insensitive); throws ParameterError otherwise.
Algorithm parse_algorithm(const std::string& name);

/// Unset optional parameters take the defaults filled in by validate_params:
/// γ = 1.9/L, λ = 0.9/S, τ = 1, σ = 0.9/(τ S) and, for ADMM, ρ = 1 with
/// γ = 1.9/(||A||² + ρ₁||D₁||² + ρ₂||D₂||²).
struct SolverConfig {
  Algorithm algorithm = Algorithm::DFB;
  std::optional<double> gamma;
  std::optional<double> lambda;
  std::optional<double> sigma;
  std::optional<double> tau;
  std::optional<double> rho1;
  std::optional<double> rho2;
  int inner_iters = 1;
  long max_outer = 40000;
  double eps = 1e-6;
  ConvergenceMode convergence_mode = ConvergenceMode::StrictWeak;
};

struct SolveReport {
  Vector x_final;
  DualVector y_final;
  long outer_iters = 0;
  std::vector<double> objective_trace;
  std::vector<double> residual_trace;
  std::vector<double> metric_trace;
  Termination termination = Termination::MaxIters;
  /// Set when λ was admitted only under the finite-dimensional bound.
  bool finite_dimensional_only = false;
};

/// Optional per-iteration callbacks. `metric` feeds SolveReport::metric_trace;
/// `on_iterate` sees x^{k+1} after outer iteration k.
struct SolveHooks {
  std::function<double(const Vector&)> metric;
  std::function<void(long, const Vector&)> on_iterate;
};

/// Checks the step-size conditions for DFB/PDFB and fills unset parameters.
/// Throws ParameterError naming the violated bound.
SolverConfig validate_params(const CompositeProblem& problem, SolverConfig config);

/// f(x) + g(x) + Σ h_i(B_i x); +inf when an indicator is violated.
double objective(const CompositeProblem& problem, const Eigen::Ref<const Vector>& x);

/// Dual forward-backward splitting. With inner_iters = 1 this is PDFP on the
/// stacked problem. Empty x0/y0 mean zero initialization.
SolveReport solve_dfb(const CompositeProblem& problem, const SolverConfig& config,
                      const Vector& x0 = {}, const DualVector& y0 = {},
                      const SolveHooks& hooks = {});

/// Primal-dual forward-backward splitting. With inner_iters = 1 this is the
/// Condat–Vu iteration after the change of variables y = γ ȳ.
SolveReport solve_pdfb(const CompositeProblem& problem, const SolverConfig& config,
                       const Vector& x0 = {}, const DualVector& y0 = {},
                       const SolveHooks& hooks = {});

/// Dispatches on config.algorithm (DFB or PDFB).
SolveReport solve(const CompositeProblem& problem, const SolverConfig& config,
                  const SolveHooks& hooks = {});

// ---------------------------------------------------------------------------
// Regularized prior-image model
//   min ½||A x - b||² + λ₁ φ₁(D₁(x - x_p)) + λ₂ φ₂(D₂ x) + δ_C(x),
// C the box [lower, upper]^n. ADMM is specialised to this shape.

struct PiccsModel {
  LinearOperator a;
  Vector b;
  LinearOperator d1;
  LinearOperator d2;
  Vector prior;
  double lambda1 = 0.0;
  double lambda2 = 0.0;
  ProxTerm phi1 = l1_norm();
  ProxTerm phi2 = l1_norm();
  double lower = 0.0;
  double upper = kInf;

  void check() const;
};

/// f = ½||Ax - b||², g = δ_C, h₁ = λ₁φ₁(· - D₁x_p), h₂ = λ₂φ₂, B_i = D_i.
/// A zero λ_i yields h_i ≡ 0.
CompositeProblem to_composite(const PiccsModel& model, double norm_tol = 1e-6);

double objective(const PiccsModel& model, const Eigen::Ref<const Vector>& x);

/// ADMM parameter check: ρ₁, ρ₂ > 0 and γ ∈ (0, 2/(||A||² + ρ₁||D₁||² + ρ₂||D₂||²)).
SolverConfig validate_params(const PiccsModel& model, SolverConfig config,
                             double norm_tol = 1e-6);

/// Unscaled ADMM with a single gradient-projection step for the x-update.
/// y0/v0 hold the two split variables and the two scaled multipliers.
SolveReport solve_admm(const PiccsModel& model, const SolverConfig& config,
                       const Vector& x0 = {}, const DualVector& y0 = {},
                       const DualVector& v0 = {}, const SolveHooks& hooks = {});

}  // namespace proxsplit
