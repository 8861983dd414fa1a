#include <doctest.h>

#include <array>
#include <cmath>
#include <numbers>
#include <random>

#include "oracles.hpp"
#include "proxsplit/ct.hpp"
#include "proxsplit/errors.hpp"

using namespace proxsplit;
using namespace proxsplit::ct;

namespace {

// Published ten-ellipse table with the high-contrast intensities:
// intensity, semi-axis along x, semi-axis along y, centre x, centre y, angle (deg).
constexpr std::array<std::array<double, 6>, 10> kTable{{
    {1.0, 0.69, 0.92, 0.0, 0.0, 0.0},
    {-0.8, 0.6624, 0.874, 0.0, -0.0184, 0.0},
    {-0.2, 0.11, 0.31, 0.22, 0.0, -18.0},
    {-0.2, 0.16, 0.41, -0.22, 0.0, 18.0},
    {0.1, 0.21, 0.25, 0.0, 0.35, 0.0},
    {0.1, 0.046, 0.046, 0.0, 0.1, 0.0},
    {0.1, 0.046, 0.046, 0.0, -0.1, 0.0},
    {0.1, 0.046, 0.023, -0.08, -0.605, 0.0},
    {0.1, 0.023, 0.023, 0.0, -0.606, 0.0},
    {0.1, 0.023, 0.046, 0.06, -0.605, 0.0},
}};

double phantom_at(double x, double y) {
  double v = 0.0;
  for (const auto& e : kTable) {
    const double phi = e[5] * std::numbers::pi / 180.0;
    const double dx = x - e[3], dy = y - e[4];
    const double u = (dx * std::cos(phi) + dy * std::sin(phi)) / e[1];
    const double w = (-dx * std::sin(phi) + dy * std::cos(phi)) / e[2];
    if (u * u + w * w <= 1.0) v += e[0];
  }
  return std::min(std::max(v, 0.0), 1.0);
}

// Length of the segment of the line p + t d (d unit) inside [x0,x1]×[y0,y1].
double clip_length(double px, double py, double dx, double dy, double x0, double x1, double y0,
                   double y1) {
  double lo = -1e300, hi = 1e300;
  const auto slab = [&](double p, double d, double a, double b) {
    if (d == 0.0) {
      if (p < a || p > b) hi = -1e300;
      return;
    }
    double t1 = (a - p) / d, t2 = (b - p) / d;
    if (t1 > t2) std::swap(t1, t2);
    lo = std::max(lo, t1);
    hi = std::min(hi, t2);
  };
  slab(px, dx, x0, x1);
  slab(py, dy, y0, y1);
  return hi > lo ? hi - lo : 0.0;
}

struct Line {
  double px, py, dx, dy;
};

// Ray conventions: parallel rays at angle θ = πv/V travel along (cos θ, sin θ)
// at signed distance √2·o along the normal (-sin θ, cos θ); fan rays leave the
// source R(cos θ, sin θ), θ = 2πv/V, aiming at o·w·(-sin θ, cos θ) on a
// detector through the centre with half-width w = R√2/√(R²-2). The offset o
// runs over the ray centres -1 + (2r+1)/rays.
Line ray_line(const Scene& s, Index v, Index r) {
  const double o = -1.0 + double(2 * r + 1) / double(s.n_rays);
  if (s.geometry == Geometry::Parallel) {
    const double th = std::numbers::pi * double(v) / double(s.n_views);
    const double c = std::cos(th), sn = std::sin(th);
    return {-sn * std::sqrt(2.0) * o, c * std::sqrt(2.0) * o, c, sn};
  }
  const double th = 2.0 * std::numbers::pi * double(v) / double(s.n_views);
  const double c = std::cos(th), sn = std::sin(th), R = s.source_radius;
  const double w = R * std::sqrt(2.0) / std::sqrt(R * R - 2.0);
  const double tx = -sn * o * w - R * c, ty = c * o * w - R * sn;
  const double len = std::hypot(tx, ty);
  return {R * c, R * sn, tx / len, ty / len};
}

}  // namespace

TEST_CASE("phantom matches an independent rasterization of the ellipse table") {
  for (Index n : {8, 33, 64}) {
    const Vector img = shepp_logan(n);
    REQUIRE(img.size() == n * n);
    for (Index j = 0; j < n; ++j)
      for (Index i = 0; i < n; ++i) {
        const double x = -1.0 + (2.0 * double(j) + 1.0) / double(n);
        const double y = 1.0 - (2.0 * double(i) + 1.0) / double(n);
        CHECK(img(i + j * n) == doctest::Approx(phantom_at(x, y)).epsilon(1e-12));
      }
    CHECK(img.minCoeff() >= 0.0);
    CHECK(img.maxCoeff() <= 1.0);
    CHECK(img(0) == 0.0);
    CHECK(img(n * n - 1) == 0.0);
  }
  CHECK_THROWS_AS(shepp_logan(7), ParameterError);
}

TEST_CASE("phantom is mirror symmetric away from the asymmetric ellipses") {
  // Ellipses 3/4 differ in size and 8/10 in position and shape, so exact
  // mirror symmetry only holds outside their footprints and mirror images.
  const Index n = 64;
  const Vector img = shepp_logan(n);
  const auto near_asymmetric = [&](double x, double y) {
    for (int k : {2, 3, 7, 9}) {
      const auto& e = kTable[std::size_t(k)];
      const double phi = e[5] * std::numbers::pi / 180.0;
      const double hx = std::hypot(e[1] * std::cos(phi), e[2] * std::sin(phi)) + 2.0 / double(n);
      const double hy = std::hypot(e[1] * std::sin(phi), e[2] * std::cos(phi)) + 2.0 / double(n);
      for (double cx : {e[3], -e[3]})
        if (std::abs(x - cx) <= hx && std::abs(y - e[4]) <= hy) return true;
    }
    return false;
  };
  int compared = 0;
  for (Index j = 0; j < n; ++j)
    for (Index i = 0; i < n; ++i) {
      const double x = -1.0 + (2.0 * double(j) + 1.0) / double(n);
      const double y = 1.0 - (2.0 * double(i) + 1.0) / double(n);
      if (near_asymmetric(x, y)) continue;
      ++compared;
      CHECK(std::abs(img(i + j * n) - img(i + (n - 1 - j) * n)) <= 1e-12);
    }
  CHECK(compared > n * n / 2);
}

TEST_CASE("projector entries equal per-pixel intersection lengths") {
  for (Geometry g : {Geometry::Parallel, Geometry::Fan}) {
    Scene s;
    s.n = 9;
    s.n_views = 7;
    s.n_rays = 10;
    s.geometry = g;
    s.pixel_units = false;
    const oracle::Matrix a = build_projector(s).to_dense();
    REQUIRE(a.rows() == 70);
    REQUIRE(a.cols() == 81);
    const double h = 2.0 / 9.0;
    for (Index v = 0; v < s.n_views; ++v)
      for (Index r = 0; r < s.n_rays; ++r) {
        const Line l = ray_line(s, v, r);
        for (Index j = 0; j < 9; ++j)
          for (Index i = 0; i < 9; ++i) {
            const double expected = clip_length(l.px, l.py, l.dx, l.dy, -1.0 + j * h, -1.0 + (j + 1) * h,
                                                1.0 - (i + 1) * h, 1.0 - i * h);
            CHECK(std::abs(a(v * s.n_rays + r, i + j * 9) - expected) <= 1e-12);
          }
        const double chord = clip_length(l.px, l.py, l.dx, l.dy, -1, 1, -1, 1);
        CHECK(std::abs(a.row(v * s.n_rays + r).sum() - chord) <= 1e-12);
      }
  }
}

TEST_CASE("projector chords and units") {
  for (Index n : {8, 9, 64}) {
    Scene s;
    s.n = n;
    s.geometry = Geometry::Parallel;
    s.n_views = 2;  // θ = 0 (horizontal) and θ = π/2
    s.n_rays = 95;
    s.pixel_units = false;
    const LinearOperator a = build_projector(s);
    const Vector ones = Vector::Ones(n * n);
    const Vector sino = a.apply(ones);
    CHECK(std::abs(sino(47) - 2.0) <= 1e-9);
    CHECK(std::abs(sino(95 + 47) - 2.0) <= 1e-9);
    CHECK(sino.maxCoeff() <= 2.0 * std::sqrt(2.0) + 1e-12);
    CHECK(a.apply(Vector::Zero(n * n)).isZero(0.0));

    s.pixel_units = true;
    const oracle::Matrix scaled = build_projector(s).to_dense();
    CHECK((scaled - 0.5 * double(n) * a.to_dense()).cwiseAbs().maxCoeff() <= 1e-12);
  }
  Scene fan;
  fan.pixel_units = false;
  const LinearOperator a = build_projector(fan);
  CHECK(a.rows() == fan.n_views * fan.n_rays);
  CHECK(a.cols() == fan.n * fan.n);
  CHECK(a.apply(Vector::Ones(a.cols())).maxCoeff() <= 2.0 * std::sqrt(2.0) + 1e-12);
  // The fan covers the image: every pixel is seen by some ray.
  CHECK(a.adjoint_apply(Vector::Ones(a.rows())).minCoeff() > 0.0);

  Scene bad;
  bad.source_radius = 1.2;
  CHECK_THROWS_AS(build_projector(bad), ParameterError);
}

TEST_CASE("Gaussian source follows the documented transform") {
  const std::uint64_t seed = 0x1234abcdULL;
  std::mt19937_64 engine(seed);
  const auto uniform = [&] { return double(engine() >> 11) * 0x1.0p-53; };
  GaussianSource source(seed);
  for (int k = 0; k < 500; ++k) {
    double u, v, s;
    do {
      u = 2.0 * uniform() - 1.0;
      v = 2.0 * uniform() - 1.0;
      s = u * u + v * v;
    } while (s >= 1.0 || s == 0.0);
    const double f = std::sqrt(-2.0 * std::log(s) / s);
    CHECK(source.standard_normal() == u * f);
    CHECK(source.standard_normal() == v * f);
  }
  CHECK(stream_seed(7, NoiseStream::Measurement) != stream_seed(7, NoiseStream::Prior));
  CHECK(stream_seed(7, NoiseStream::Prior) == stream_seed(7, NoiseStream::Prior));
}

TEST_CASE("additive noise statistics and determinism") {
  const Vector v = oracle::Rng(5).vector(10);
  CHECK(add_gaussian_noise(v, 0.0, 9) == v);
  CHECK_THROWS_AS(add_gaussian_noise(v, -1.0, 9), ParameterError);

  const Index draws = 1000000;
  const Vector eta = add_gaussian_noise(Vector::Zero(draws), 0.01, 42);
  const double mean = eta.mean();
  const double var = (eta.array() - mean).square().sum() / double(draws - 1);
  CHECK(std::abs(var - 0.01) <= 0.02 * 0.01);
  CHECK(std::abs(mean) <= 5.0 * std::sqrt(0.01 / double(draws)));
  CHECK(add_gaussian_noise(v, 0.05, 11) == add_gaussian_noise(v, 0.05, 11));
  CHECK(add_gaussian_noise(v, 0.05, 11) != add_gaussian_noise(v, 0.05, 12));
}

TEST_CASE("prior image statistics") {
  const Vector phantom = shepp_logan(64);
  CHECK(make_prior(phantom, 0.0, 3) == phantom);
  double total = 0.0;
  const int seeds = 20;
  for (int k = 0; k < seeds; ++k) total += (make_prior(phantom, 0.01, std::uint64_t(100 + k)) - phantom).squaredNorm();
  CHECK(std::abs(total / seeds - 64.0 * 64.0 * 0.01) <= 0.05 * 64.0 * 64.0 * 0.01);
  CHECK(make_prior(phantom, 0.01, 3) == make_prior(phantom, 0.01, 3));
  // Unclamped: some noisy background pixels go negative.
  CHECK(make_prior(phantom, 0.01, 3).minCoeff() < 0.0);
}

TEST_CASE("SNR and NMSD") {
  const Vector x = (Vector(2) << 0, 2).finished(), xr = (Vector(2) << 0, 1).finished();
  CHECK(snr(x, xr) == doctest::Approx(10.0 * std::log10(2.0)));
  CHECK(snr(x, xr) == doctest::Approx(3.0103).epsilon(1e-5));
  CHECK(nmsd(x, xr) == doctest::Approx(1.0 / std::sqrt(2.0)));
  CHECK(std::isinf(snr(x, x)));
  CHECK(snr(x, x) > 0.0);
  CHECK(nmsd(x, x) == 0.0);
  const Vector mean = Vector::Constant(2, 1.0);
  CHECK(snr(x, mean) == doctest::Approx(0.0));
  CHECK(nmsd(x, mean) == doctest::Approx(1.0));
  CHECK_THROWS_AS(snr(Vector::Ones(3), Vector::Zero(3)), ParameterError);
  CHECK_THROWS_AS(nmsd(Vector::Ones(3), Vector::Zero(3)), ParameterError);
  CHECK_THROWS_AS(snr(x, Vector::Zero(3)), DimensionError);

  oracle::Rng rng(19);
  for (int k = 0; k < 50; ++k) {
    const Vector t = rng.vector(30), r = rng.vector(30);
    CHECK(std::abs(snr(t, r) + 20.0 * std::log10(nmsd(t, r))) <= 1e-10);
  }
}

TEST_CASE("assembled prior-image problem") {
  Scene s;
  s.n = 16;
  s.n_views = 12;
  s.n_rays = 23;
  s.noise_var_b = 0.0;
  s.lambda1 = 0.0;
  s.lambda2 = 0.0;
  const PiccsInstance inst = assemble_piccs(s);
  CHECK((inst.model.a.apply(inst.phantom) - inst.model.b).norm() == 0.0);
  CHECK(objective(inst.model, inst.phantom) == 0.0);
  CHECK(objective(inst.problem, inst.phantom) == 0.0);
  CHECK(inst.model.d1.to_dense() == oracle::tv_matrix(16, 16));

  oracle::Rng rng(23);
  for (int trial = 0; trial < 3; ++trial) {
    const Vector x = rng.vector(256, 0, 1);
    const Vector fd = oracle::central_difference_gradient(inst.problem.smooth.value, x);
    CHECK((inst.problem.smooth.gradient(x) - fd).norm() <= 1e-5 * fd.norm());
    Vector neg = x;
    neg(rng.integer(0, 255)) = -0.01;
    CHECK(std::isinf(objective(inst.problem, neg)));
    CHECK(std::isinf(objective(inst.model, neg)));
  }

  Scene noisy = s;
  noisy.noise_var_b = 0.01;
  noisy.lambda1 = 0.4;
  noisy.lambda2 = 0.5;
  const PiccsInstance with_noise = assemble_piccs(noisy);
  CHECK((with_noise.model.a.apply(with_noise.phantom) - with_noise.model.b).norm() > 0.0);
  CHECK(with_noise.problem.stack.size() == 2);
  CHECK_FALSE(with_noise.problem.stack.weighted());
  const Vector x = rng.vector(256, 0, 1);
  CHECK(objective(with_noise.problem, x) == doctest::Approx(objective(with_noise.model, x)).epsilon(1e-12));
}

TEST_CASE("noise-free, unregularized, overdetermined scans are recovered") {
  Scene s;
  s.n = 8;
  s.n_views = 20;
  s.n_rays = 20;
  s.geometry = Geometry::Parallel;
  s.noise_var_b = 0.0;
  s.noise_var_prior = 0.0;
  s.lambda1 = 0.0;
  s.lambda2 = 0.0;
  SolverConfig c;
  c.eps = 1e-14;
  c.max_outer = 200000;
  const std::vector<ExperimentRow> rows = run_experiment(s, {c});
  REQUIRE(rows.size() == 1);
  REQUIRE_FALSE(rows[0].error);
  CHECK(rows[0].snr_db >= 100.0);
}

TEST_CASE("experiment rows") {
  Scene s;
  s.n = 16;
  s.n_views = 10;
  s.n_rays = 23;
  std::vector<SolverConfig> configs(4);
  configs[0].algorithm = Algorithm::DFB;
  configs[1].algorithm = Algorithm::PDFB;
  configs[2].algorithm = Algorithm::ADMM;
  configs[3].algorithm = Algorithm::DFB;
  configs[3].gamma = 1e9;  // violates the step-size bound
  for (auto& c : configs) c.eps = 1e-4;
  const auto rows = run_experiment(s, configs);
  REQUIRE(rows.size() == 4);
  for (int k = 0; k < 3; ++k) {
    REQUIRE_FALSE(rows[k].error);
    CHECK(rows[k].algorithm == configs[k].algorithm);
    CHECK(rows[k].eps == 1e-4);
    CHECK(rows[k].iterations == long(rows[k].objective_trace.size()));
    CHECK(rows[k].snr_trace.size() == rows[k].objective_trace.size());
    CHECK(std::abs(rows[k].snr_db + 20.0 * std::log10(rows[k].nmsd)) <= 1e-10);
    CHECK(rows[k].reconstruction.size() == 256);
  }
  REQUIRE(rows[3].error);
  CHECK(rows[3].error->find("gamma") != std::string::npos);

  const auto again = run_experiment(s, configs);
  for (int k = 0; k < 3; ++k) {
    CHECK(again[k].objective_trace == rows[k].objective_trace);
    CHECK(again[k].snr_trace == rows[k].snr_trace);
    CHECK(again[k].reconstruction == rows[k].reconstruction);
  }
}

TEST_CASE("geometry names") {
  CHECK(parse_geometry("fan") == Geometry::Fan);
  CHECK(parse_geometry("parallel") == Geometry::Parallel);
  CHECK_THROWS_AS(parse_geometry("cone"), ParameterError);
  CHECK(to_string(Geometry::Parallel) == "parallel");
}
