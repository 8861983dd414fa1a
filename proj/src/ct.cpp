#include "proxsplit/ct.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <cmath>
#include <numbers>

namespace proxsplit::ct {

namespace {

struct Ellipse {
  double intensity;
  double semi_x;
  double semi_y;
  double centre_x;
  double centre_y;
  double angle_deg;
};

// Shepp–Logan ellipses with the high-contrast ("modified") intensities.
constexpr std::array<Ellipse, 10> kSheppLogan{{
    {1.0, 0.6900, 0.9200, 0.00, 0.0000, 0.0},
    {-0.8, 0.6624, 0.8740, 0.00, -0.0184, 0.0},
    {-0.2, 0.1100, 0.3100, 0.22, 0.0000, -18.0},
    {-0.2, 0.1600, 0.4100, -0.22, 0.0000, 18.0},
    {0.1, 0.2100, 0.2500, 0.00, 0.3500, 0.0},
    {0.1, 0.0460, 0.0460, 0.00, 0.1000, 0.0},
    {0.1, 0.0460, 0.0460, 0.00, -0.1000, 0.0},
    {0.1, 0.0460, 0.0230, -0.08, -0.6050, 0.0},
    {0.1, 0.0230, 0.0230, 0.00, -0.6060, 0.0},
    {0.1, 0.0230, 0.0460, 0.06, -0.6050, 0.0},
}};

std::uint64_t splitmix64(std::uint64_t z) {
  z += 0x9E3779B97F4A7C15ULL;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

struct Ray {
  double ox, oy;  // a point on the ray outside the image
  double dx, dy;  // unit direction
};

// Appends the intersection lengths of `ray` with the pixels of the n×n grid.
void trace_ray(const Ray& ray, Index n, Index row, double unit,
               std::vector<Eigen::Triplet<double>>& out) {
  const double h = 2.0 / double(n);
  double t_enter = -kInf, t_exit = kInf;
  const auto clip = [&](double origin, double dir) {
    if (dir == 0.0) {
      if (origin < -1.0 || origin > 1.0) t_exit = -kInf;
      return;
    }
    double t1 = (-1.0 - origin) / dir, t2 = (1.0 - origin) / dir;
    if (t1 > t2) std::swap(t1, t2);
    t_enter = std::max(t_enter, t1);
    t_exit = std::min(t_exit, t2);
  };
  clip(ray.ox, ray.dx);
  clip(ray.oy, ray.dy);
  if (!(t_exit > t_enter)) return;

  std::vector<double> ts{t_enter, t_exit};
  ts.reserve(2 * n + 4);
  const auto crossings = [&](double origin, double dir) {
    if (dir == 0.0) return;
    for (Index k = 0; k <= n; ++k) {
      const double t = (-1.0 + double(k) * h - origin) / dir;
      if (t > t_enter && t < t_exit) ts.push_back(t);
    }
  };
  crossings(ray.ox, ray.dx);
  crossings(ray.oy, ray.dy);
  std::sort(ts.begin(), ts.end());

  for (std::size_t s = 0; s + 1 < ts.size(); ++s) {
    const double len = ts[s + 1] - ts[s];
    if (!(len > 0.0)) continue;
    const double mid = 0.5 * (ts[s] + ts[s + 1]);
    const double px = ray.ox + mid * ray.dx;
    const double py = ray.oy + mid * ray.dy;
    const Index j = std::clamp<Index>(Index(std::floor((px + 1.0) / h)), 0, n - 1);
    const Index i = std::clamp<Index>(Index(std::floor((1.0 - py) / h)), 0, n - 1);
    out.emplace_back(row, i + j * n, len * unit);
  }
}

double mean_distance_sq(const Vector& truth) {
  return (truth.array() - truth.mean()).matrix().squaredNorm();
}

void check_metric_inputs(const Vector& truth, const Vector& reconstruction) {
  if (truth.size() != reconstruction.size())
    throw DimensionError("metric: ground truth and reconstruction differ in length");
  if (truth.size() == 0 || mean_distance_sq(truth) == 0.0)
    throw ParameterError("metric: ground truth image is constant");
}

}  // namespace

std::string to_string(Geometry g) { return g == Geometry::Fan ? "fan" : "parallel"; }

Geometry parse_geometry(const std::string& name) {
  if (name == "fan") return Geometry::Fan;
  if (name == "parallel") return Geometry::Parallel;
  throw ParameterError("unknown geometry '" + name + "' (valid: fan, parallel)");
}

void Scene::check() const {
  if (n < 8) throw ParameterError("scene.n must be at least 8");
  if (n_views < 1 || n_rays < 1) throw ParameterError("scene needs at least one view and ray");
  if (geometry == Geometry::Fan && !(source_radius > std::sqrt(2.0)))
    throw ParameterError("fan source must lie outside the image (radius > sqrt 2)");
  if (!(noise_var_b >= 0.0) || !(noise_var_prior >= 0.0))
    throw ParameterError("noise variances must be non-negative");
  if (!(lambda1 >= 0.0) || !(lambda2 >= 0.0))
    throw ParameterError("regularization weights must be non-negative");
}

Vector shepp_logan(Index n) {
  if (n < 8) throw ParameterError("shepp_logan needs n >= 8");
  Vector image(n * n);
  const double scale = double(n);
  for (Index j = 0; j < n; ++j) {
    // Integer numerators keep mirrored pixel centres exact negatives.
    const double x = double(2 * j + 1 - n) / scale;
    for (Index i = 0; i < n; ++i) {
      const double y = double(n - 2 * i - 1) / scale;
      double value = 0.0;
      for (const Ellipse& e : kSheppLogan) {
        const double phi = e.angle_deg * std::numbers::pi / 180.0;
        const double c = std::cos(phi), s = std::sin(phi);
        const double dx = x - e.centre_x, dy = y - e.centre_y;
        const double u = (dx * c + dy * s) / e.semi_x;
        const double v = (-dx * s + dy * c) / e.semi_y;
        if (u * u + v * v <= 1.0) value += e.intensity;
      }
      image(i + j * n) = std::clamp(value, 0.0, 1.0);
    }
  }
  return image;
}

LinearOperator build_projector(const Scene& scene) {
  scene.check();
  const Index n = scene.n;
  const Index views = scene.n_views, rays = scene.n_rays;
  const double unit = scene.pixel_units ? double(n) / 2.0 : 1.0;
  std::vector<Eigen::Triplet<double>> entries;
  entries.reserve(std::size_t(views * rays * 2 * n));

  for (Index v = 0; v < views; ++v) {
    for (Index r = 0; r < rays; ++r) {
      const double offset = -1.0 + double(2 * r + 1) / double(rays);  // in (-1, 1)
      Ray ray{};
      if (scene.geometry == Geometry::Parallel) {
        const double theta = std::numbers::pi * double(v) / double(views);
        const double c = std::cos(theta), s = std::sin(theta);
        const double shift = std::sqrt(2.0) * offset;
        ray = Ray{-s * shift - 3.0 * c, c * shift - 3.0 * s, c, s};
      } else {
        const double theta = 2.0 * std::numbers::pi * double(v) / double(views);
        const double c = std::cos(theta), s = std::sin(theta);
        const double radius = scene.source_radius;
        // Detector through the centre, wide enough that the fan covers the
        // circle circumscribing the image.
        const double half_width = radius * std::sqrt(2.0) / std::sqrt(radius * radius - 2.0);
        const double det = half_width * offset;
        const double sx = radius * c, sy = radius * s;
        double dx = -s * det - sx, dy = c * det - sy;
        const double len = std::hypot(dx, dy);
        ray = Ray{sx, sy, dx / len, dy / len};
      }
      trace_ray(ray, n, v * rays + r, unit, entries);
    }
  }
  SparseMatrix a(views * rays, n * n);
  a.setFromTriplets(entries.begin(), entries.end());
  return LinearOperator::sparse(std::move(a));
}

std::uint64_t stream_seed(std::uint64_t seed, NoiseStream purpose) {
  return splitmix64(seed + static_cast<std::uint64_t>(purpose) * 0x9E3779B97F4A7C15ULL);
}

double GaussianSource::uniform() {
  return double(engine_() >> 11) * 0x1.0p-53;
}

double GaussianSource::standard_normal() {
  if (spare_) {
    const double out = *spare_;
    spare_.reset();
    return out;
  }
  double u, v, s;
  do {
    u = 2.0 * uniform() - 1.0;
    v = 2.0 * uniform() - 1.0;
    s = u * u + v * v;
  } while (s >= 1.0 || s == 0.0);
  const double f = std::sqrt(-2.0 * std::log(s) / s);
  spare_ = v * f;
  return u * f;
}

Vector add_gaussian_noise(const Vector& v, double variance, std::uint64_t seed) {
  if (!(variance >= 0.0)) throw ParameterError("noise variance must be non-negative");
  if (variance == 0.0) return v;
  GaussianSource source(seed);
  const double sd = std::sqrt(variance);
  Vector out = v;
  for (Index i = 0; i < out.size(); ++i) out(i) += sd * source.standard_normal();
  return out;
}

Vector make_prior(const Vector& phantom, double variance, std::uint64_t seed) {
  return add_gaussian_noise(phantom, variance, seed);
}

double snr(const Vector& truth, const Vector& reconstruction) {
  check_metric_inputs(truth, reconstruction);
  const double err = (reconstruction - truth).squaredNorm();
  if (err == 0.0) return kInf;
  return 10.0 * std::log10(mean_distance_sq(truth) / err);
}

double nmsd(const Vector& truth, const Vector& reconstruction) {
  check_metric_inputs(truth, reconstruction);
  return (truth - reconstruction).norm() / std::sqrt(mean_distance_sq(truth));
}

PiccsInstance assemble_piccs(const Scene& scene) {
  scene.check();
  Vector phantom = shepp_logan(scene.n);
  LinearOperator a = build_projector(scene);
  Vector b = add_gaussian_noise(a.apply(phantom), scene.noise_var_b,
                                stream_seed(scene.seed, NoiseStream::Measurement));
  Vector prior = make_prior(phantom, scene.noise_var_prior,
                            stream_seed(scene.seed, NoiseStream::Prior));
  const LinearOperator d = tv_gradient(scene.n, scene.n);
  PiccsModel model{a, std::move(b), d, d, std::move(prior), scene.lambda1, scene.lambda2};
  CompositeProblem problem = to_composite(model);
  return PiccsInstance{scene, std::move(phantom), std::move(model), std::move(problem)};
}

std::vector<ExperimentRow> run_experiment(const PiccsInstance& instance,
                                          const std::vector<SolverConfig>& configs) {
  std::vector<ExperimentRow> rows;
  rows.reserve(configs.size());
  for (const SolverConfig& config : configs) {
    ExperimentRow row;
    row.algorithm = config.algorithm;
    row.eps = config.eps;
    try {
      SolveHooks hooks;
      hooks.metric = [&](const Vector& x) { return snr(instance.phantom, x); };
      SolveReport report = config.algorithm == Algorithm::ADMM
                               ? solve_admm(instance.model, config, {}, {}, {}, hooks)
                               : solve(instance.problem, config, hooks);
      row.iterations = report.outer_iters;
      row.termination = report.termination;
      row.snr_db = snr(instance.phantom, report.x_final);
      row.nmsd = nmsd(instance.phantom, report.x_final);
      row.final_objective = objective(instance.model, report.x_final);
      row.objective_trace = std::move(report.objective_trace);
      row.snr_trace = std::move(report.metric_trace);
      row.residual_trace = std::move(report.residual_trace);
      row.reconstruction = std::move(report.x_final);
    } catch (const std::exception& e) {
      row.error = e.what();
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

std::vector<ExperimentRow> run_experiment(const Scene& scene,
                                          const std::vector<SolverConfig>& configs) {
  return run_experiment(assemble_piccs(scene), configs);
}

}  // namespace proxsplit::ct
