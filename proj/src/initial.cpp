#include "kaclab/initial.hpp"

#include <cmath>
#include <random>

#include "kaclab/errors.hpp"

namespace kaclab {

InitialSpec::Kind parse_initial_kind(const std::string& name) {
  using K = InitialSpec::Kind;
  if (name == "gaussian") return K::Gaussian;
  if (name == "bimodal") return K::Bimodal;
  if (name == "point") return K::Point;
  if (name == "sphere") return K::Sphere;
  if (name == "line") return K::Line;
  throw ValidationError("unknown initial measure '" + name + "'");
}

VelocityEnsemble make_initial(const InitialSpec& spec, std::size_t n,
                              std::size_t count, std::uint64_t seed) {
  require(n >= 1, "n must be >= 1");
  require(count >= 1, "sample count must be >= 1");
  using K = InitialSpec::Kind;
  if (spec.kind == K::Sphere) return sample_sphere(n, spec.radius, count, seed);
  if (spec.kind == K::Point)
    require(spec.point.size() == n, "point initial state must have n coordinates");
  require(spec.variance >= 0.0 && spec.width >= 0.0, "variances must be >= 0");

  VelocityEnsemble ens(n, count, seed);
  const auto m = static_cast<std::ptrdiff_t>(count);
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t s = 0; s < m; ++s) {
    Xoshiro256pp rng(seed, static_cast<std::uint64_t>(s), Stage::Initial);
    std::normal_distribution<double> normal(0.0, 1.0);
    auto v = ens.sample(static_cast<std::size_t>(s));
    switch (spec.kind) {
      case K::Gaussian:
        for (double& x : v) x = std::sqrt(spec.variance) * normal(rng);
        break;
      case K::Bimodal:
        for (double& x : v) {
          const double sign = rng.uniform() < 0.5 ? -1.0 : 1.0;
          x = sign * spec.centre + spec.width * normal(rng);
        }
        break;
      case K::Point:
        for (std::size_t i = 0; i < n; ++i) v[i] = spec.point[i];
        break;
      case K::Line: {
        const double x = std::sqrt(spec.variance) * normal(rng);
        for (double& y : v) y = x;
        break;
      }
      case K::Sphere:
        break;
    }
  }
  return ens;
}

}  // namespace kaclab
