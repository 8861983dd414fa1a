#include "proxsplit/selftest.hpp"

#include <functional>
#include <ostream>
#include <random>
#include <vector>

#include "proxsplit/linop.hpp"
#include "proxsplit/product_space.hpp"
#include "proxsplit/prox.hpp"
#include "proxsplit/solvers.hpp"

namespace proxsplit {

namespace {

class Random {
 public:
  explicit Random(std::uint64_t seed) : engine_(seed) {}
  Vector vector(Index n, double scale = 1.0) {
    Vector v(n);
    for (Index i = 0; i < n; ++i) v(i) = scale * dist_(engine_);
    return v;
  }
  Matrix matrix(Index r, Index c) {
    Matrix m(r, c);
    for (Index j = 0; j < c; ++j)
      for (Index i = 0; i < r; ++i) m(i, j) = dist_(engine_);
    return m;
  }
  double uniform(double lo, double hi) { return lo + (hi - lo) * 0.5 * (dist_(engine_) + 1.0); }

 private:
  std::mt19937_64 engine_;
  std::uniform_real_distribution<double> dist_{-1.0, 1.0};
};

struct ConjugatePair {
  ProxTerm term;
  // prox_{s f*}(v) in closed form, derived independently of term.prox.
  std::function<Vector(const Vector&, double)> conjugate_prox;
  Index dim;
};

std::vector<ConjugatePair> conjugate_pairs(const SelftestOptions& options, Random& rng) {
  std::vector<ConjugatePair> pairs;
  ProxTerm l1 = l1_norm();
  if (options.corrupt_prox)
    l1 = ProxTerm("l1-corrupt", std::nullopt, [](const Vector& x) { return x.lpNorm<1>(); },
                  [](const Vector& u, double t) { return prox_l1(u, 1.05 * t); });
  pairs.push_back({l1, [](const Vector& v, double) { return project_box(v, -1.0, 1.0); }, 5});
  pairs.push_back({l21_norm(),
                   [](const Vector& v, double) {
                     Vector out = v;
                     const Index p = v.size() / 2;
                     for (Index i = 0; i < p; ++i) {
                       const double r = std::hypot(v(i), v(p + i));
                       if (r > 1.0) {
                         out(i) /= r;
                         out(p + i) /= r;
                       }
                     }
                     return out;
                   },
                   6});
  pairs.push_back({nonnegative_indicator(),
                   [](const Vector& v, double) { return Vector(v.cwiseMin(0.0)); }, 4});
  const Vector b = rng.vector(3, 2.0);
  pairs.push_back({squared_distance(b),
                   [b](const Vector& v, double s) { return Vector((v - s * b) / (1.0 + s)); }, 3});
  const Vector c = rng.vector(4, 2.0);
  const double weight = 0.7;
  pairs.push_back({scaled_term(translated_term(l1_norm(), c), weight),
                   [c, weight](const Vector& v, double s) {
                     return project_box(Vector(v - s * c), -weight, weight);
                   },
                   4});
  return pairs;
}

using Check = std::function<bool()>;

bool adjoint_identity() {
  Random rng(11);
  Matrix m = rng.matrix(5, 7);
  SparseMatrix sp = rng.matrix(6, 4).sparseView();
  const std::vector<LinearOperator> ops{
      LinearOperator::dense(m),
      LinearOperator::sparse(sp),
      first_difference(9),
      tv_gradient(5, 4),
      LinearOperator::identity(6),
      compose(LinearOperator::dense(rng.matrix(3, 9)), first_difference(9)),
      scaled(2.5, tv_gradient(3, 6)),
  };
  for (const auto& op : ops) {
    for (int trial = 0; trial < 50; ++trial) {
      const Vector x = rng.vector(op.cols()), y = rng.vector(op.rows());
      const double lhs = op.apply(x).dot(y);
      const double rhs = x.dot(op.adjoint_apply(y));
      if (std::abs(lhs - rhs) > 1e-10 * (1.0 + std::abs(lhs))) return false;
    }
  }
  return true;
}

bool moreau_identity(const SelftestOptions& options) {
  Random rng(23);
  for (const auto& pair : conjugate_pairs(options, rng)) {
    for (int trial = 0; trial < 100; ++trial) {
      const Vector u = rng.vector(pair.dim, 5.0);
      for (double t : {0.1, 1.0, 10.0}) {
        const Vector residual = pair.term.prox(u, t) + t * pair.conjugate_prox(u / t, 1.0 / t) - u;
        if (residual.norm() > 1e-12 * (1.0 + u.norm())) return false;
        const Vector via_library = prox_conjugate(pair.term, u, t);
        if ((via_library - pair.conjugate_prox(u, t)).norm() > 1e-12 * (1.0 + u.norm()))
          return false;
      }
    }
  }
  return true;
}

bool firm_nonexpansive(const SelftestOptions& options) {
  Random rng(29);
  for (const auto& pair : conjugate_pairs(options, rng)) {
    for (int trial = 0; trial < 100; ++trial) {
      const Vector x = rng.vector(pair.dim, 4.0), y = rng.vector(pair.dim, 4.0);
      const double t = rng.uniform(0.1, 5.0);
      const Vector px = pair.term.prox(x, t), py = pair.term.prox(y, t);
      const double slack = (x - y).squaredNorm() - ((x - px) - (y - py)).squaredNorm() -
                           (px - py).squaredNorm();
      if (slack < -1e-10) return false;
    }
  }
  return true;
}

bool tv_equivalence() {
  Random rng(31);
  for (Index n = 1; n <= 16; n += 3) {
    for (Index m = 1; m <= 12; m += 2) {
      const Vector u = rng.vector(n * m, 3.0);
      const Vector du = tv_gradient(n, m).apply(u);
      const double a = atv(u, n, m), i = itv(u, n, m);
      if (std::abs(a - du.lpNorm<1>()) > 1e-12 * (1.0 + a)) return false;
      if (std::abs(i - l21_norm(du)) > 1e-12 * (1.0 + i)) return false;
    }
  }
  return true;
}

// Toy instance shared by the reduction checks: f = ½||Mx - b||², g = δ_{x>=0},
// h = 0.3 ||.||₁, B dense 3×4.
struct Toy {
  Matrix m, b_op;
  Vector b;
  double weight = 0.3;
};

Toy make_toy() {
  Random rng(41);
  Toy toy{rng.matrix(5, 4), rng.matrix(3, 4), Vector()};
  toy.b = toy.m * Vector::LinSpaced(4, 0.5, 2.0) + 0.1 * rng.vector(5);
  return toy;
}

CompositeProblem toy_problem(const Toy& toy) {
  return CompositeProblem{least_squares(LinearOperator::dense(toy.m), toy.b),
                          nonnegative_indicator(),
                          BlockStack({{LinearOperator::dense(toy.b_op), scaled_term(l1_norm(), toy.weight)}})};
}

std::vector<Vector> record(const std::function<SolveReport(const SolveHooks&)>& run) {
  std::vector<Vector> iterates;
  SolveHooks hooks;
  hooks.on_iterate = [&](long, const Vector& x) { iterates.push_back(x); };
  run(hooks);
  return iterates;
}

bool dfb_reduction() {
  const Toy toy = make_toy();
  const CompositeProblem problem = toy_problem(toy);
  SolverConfig config;
  config.max_outer = 10;
  config.eps = 1e-300;
  config = validate_params(problem, config);
  const auto iterates = record([&](const SolveHooks& h) { return solve_dfb(problem, config, {}, {}, h); });

  const double gamma = *config.gamma, step = *config.lambda / gamma;
  Vector x = Vector::Zero(4), y = Vector::Zero(3);
  for (std::size_t k = 0; k < iterates.size(); ++k) {
    const Vector grad = toy.m.transpose() * (toy.m * x - toy.b);
    const Vector v = (x - gamma * grad - gamma * toy.b_op.transpose() * y).cwiseMax(0.0);
    y = project_box(Vector(y + step * toy.b_op * v), -toy.weight, toy.weight);
    x = (x - gamma * grad - gamma * toy.b_op.transpose() * y).cwiseMax(0.0);
    if ((x - iterates[k]).norm() > 1e-12 * (1.0 + x.norm())) return false;
  }
  return iterates.size() == 10;
}

bool pdfb_reduction() {
  const Toy toy = make_toy();
  const CompositeProblem problem = toy_problem(toy);
  SolverConfig config;
  config.algorithm = Algorithm::PDFB;
  config.max_outer = 10;
  config.eps = 1e-300;
  config = validate_params(problem, config);
  const auto iterates = record([&](const SolveHooks& h) { return solve_pdfb(problem, config, {}, {}, h); });

  const double gamma = *config.gamma;
  const double tau_cv = *config.tau * gamma / (1.0 + *config.tau);
  const double sigma_cv = *config.sigma / gamma;
  Vector x = Vector::Zero(4), ybar = Vector::Zero(3);
  for (std::size_t k = 0; k < iterates.size(); ++k) {
    const Vector grad = toy.m.transpose() * (toy.m * x - toy.b);
    const Vector next = (x - tau_cv * toy.b_op.transpose() * ybar - tau_cv * grad).cwiseMax(0.0);
    ybar = project_box(Vector(ybar + sigma_cv * toy.b_op * (2.0 * next - x)), -toy.weight, toy.weight);
    x = next;
    if ((x - iterates[k]).norm() > 1e-12 * (1.0 + x.norm())) return false;
  }
  return iterates.size() == 10;
}

bool weighted_equivalence() {
  Random rng(53);
  const Matrix m = rng.matrix(6, 5);
  const Vector b = rng.vector(6);
  const std::vector<Block> blocks{{LinearOperator::dense(rng.matrix(4, 5)), scaled_term(l1_norm(), 0.4)},
                                  {first_difference(5), scaled_term(l1_norm(), 0.2)}};
  const CompositeProblem weighted{least_squares(LinearOperator::dense(m), b), nonnegative_indicator(),
                                  BlockStack(blocks, std::vector<double>{0.5, 0.5})};
  const CompositeProblem plain{least_squares(LinearOperator::dense(m), b), nonnegative_indicator(),
                               BlockStack(blocks)};
  const DualVector y0{rng.vector(4), rng.vector(5)};
  const DualVector y0_bar{0.5 * y0[0], 0.5 * y0[1]};

  SolverConfig config;
  config.max_outer = 10;
  config.eps = 1e-300;
  config.gamma = 1.0 / weighted.smooth.lipschitz;
  config.lambda = 0.5 / stack_norm_sq_bound(weighted.stack);
  SolverConfig scaled_config = config;
  scaled_config.lambda = 0.5 * *config.lambda;

  const auto a = record([&](const SolveHooks& h) { return solve_dfb(weighted, config, {}, y0, h); });
  const auto c = record([&](const SolveHooks& h) { return solve_dfb(plain, scaled_config, {}, y0_bar, h); });
  if (a.size() != 10 || c.size() != 10) return false;
  for (std::size_t k = 0; k < a.size(); ++k)
    if ((a[k] - c[k]).norm() > 1e-12 * (1.0 + a[k].norm())) return false;
  return true;
}

}  // namespace

int run_selftest(std::ostream& out, const SelftestOptions& options) {
  const std::vector<std::pair<const char*, Check>> checks{
      {"adjoint identity", adjoint_identity},
      {"Moreau identity", [&] { return moreau_identity(options); }},
      {"firm nonexpansiveness", [&] { return firm_nonexpansive(options); }},
      {"TV equivalences", tv_equivalence},
      {"DFB single-inner reduction", dfb_reduction},
      {"PDFB single-inner reduction", pdfb_reduction},
      {"weighted/unweighted equivalence", weighted_equivalence},
  };
  int failures = 0;
  for (const auto& [name, check] : checks) {
    bool ok = false;
    try {
      ok = check();
    } catch (const std::exception& e) {
      out << "  error: " << e.what() << "\n";
    }
    out << (ok ? "PASS  " : "FAIL  ") << name << "\n";
    if (!ok) ++failures;
  }
  out << (failures == 0 ? "all properties hold\n" : "selftest failed\n");
  return failures == 0 ? 0 : 1;
}

}  // namespace proxsplit
