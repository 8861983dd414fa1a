#pragma once

#include <cstdint>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "proxsplit/linop.hpp"
#include "proxsplit/solvers.hpp"

namespace proxsplit::ct {

enum class Geometry { Parallel, Fan };

std::string to_string(Geometry g);
Geometry parse_geometry(const std::string& name);

/// Scan and model settings. The image covers [-1, 1]² with n×n pixels stored
/// column-major, row 0 at the top.
struct Scene {
  Index n = 64;
  Index n_views = 20;
  Index n_rays = 95;
  Geometry geometry = Geometry::Fan;
  /// Fan geometry only: distance of the source from the image centre.
  double source_radius = 2.0;
  /// Measure intersection lengths in pixel widths instead of image units
  /// (the image spans 2 units, i.e. n pixels).
  bool pixel_units = true;
  double noise_var_b = 0.01;
  double noise_var_prior = 0.01;
  std::uint64_t seed = 20240601;
  double lambda1 = 0.4;
  double lambda2 = 0.5;

  void check() const;
};

/// Modified (high-contrast) Shepp–Logan phantom sampled at pixel centres and
/// clamped to [0, 1].
Vector shepp_logan(Index n);

/// Sparse system matrix of exact ray/pixel intersection lengths. Row
/// v * n_rays + r belongs to ray r of view v.
LinearOperator build_projector(const Scene& scene);

// -- Random numbers ----------------------------------------------------------
//
// Noise is drawn from std::mt19937_64, whose output sequence is fixed by the
// C++ standard. Uniforms take the top 53 bits of each draw; normals come from
// the Marsaglia polar method on pairs (u, v) in (-1, 1)², rejecting s >= 1 and
// s == 0, returning u f first and caching v f, f = sqrt(-2 ln s / s).

enum class NoiseStream : std::uint64_t { Measurement = 1, Prior = 2 };

/// Seed of an independent stream derived from the scene seed (splitmix64 of
/// seed + purpose * 0x9E3779B97F4A7C15).
std::uint64_t stream_seed(std::uint64_t seed, NoiseStream purpose);

class GaussianSource {
 public:
  explicit GaussianSource(std::uint64_t seed) : engine_(seed) {}
  double uniform();
  double standard_normal();

 private:
  std::mt19937_64 engine_;
  std::optional<double> spare_;
};

/// v + η with η_i ~ N(0, variance) drawn from a stream seeded with `seed`.
Vector add_gaussian_noise(const Vector& v, double variance, std::uint64_t seed);

/// Phantom plus unclamped Gaussian noise of the given variance.
Vector make_prior(const Vector& phantom, double variance, std::uint64_t seed);

// -- Metrics -----------------------------------------------------------------

/// 10 log10(||x - mean(x)||² / ||x_r - x||²); +inf when x_r == x.
double snr(const Vector& truth, const Vector& reconstruction);
/// ||x - x_r|| / ||x - mean(x)||.
double nmsd(const Vector& truth, const Vector& reconstruction);

// -- Experiment --------------------------------------------------------------

struct PiccsInstance {
  Scene scene;
  Vector phantom;
  PiccsModel model;
  CompositeProblem problem;
};

/// Builds phantom, projector, noisy data, prior and both views of the model.
PiccsInstance assemble_piccs(const Scene& scene);

struct ExperimentRow {
  Algorithm algorithm = Algorithm::DFB;
  double eps = 0.0;
  double snr_db = 0.0;
  double nmsd = 0.0;
  long iterations = 0;
  double final_objective = 0.0;
  Termination termination = Termination::MaxIters;
  std::vector<double> objective_trace;
  std::vector<double> snr_trace;
  std::vector<double> residual_trace;
  Vector reconstruction;
  /// Set when the solver threw; the numeric fields are then meaningless.
  std::optional<std::string> error;
};

/// Solves the instance once per config from zero initialization. Solver
/// errors are captured in the row rather than thrown.
std::vector<ExperimentRow> run_experiment(const PiccsInstance& instance,
                                          const std::vector<SolverConfig>& configs);
std::vector<ExperimentRow> run_experiment(const Scene& scene,
                                          const std::vector<SolverConfig>& configs);

}  // namespace proxsplit::ct
