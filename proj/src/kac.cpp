#include "kaclab/kac.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numbers>
#include <random>
#include <sstream>

#include "kaclab/errors.hpp"

namespace kaclab {

VelocityEnsemble::VelocityEnsemble(std::size_t n, std::size_t count,
                                   std::uint64_t master_seed, double time)
    : n_(n), count_(count), data_(n * count, 0.0), master_seed_(master_seed),
      time_(time) {
  require(n >= 1, "ensemble dimension must be >= 1");
}

VelocityEnsemble::VelocityEnsemble(std::size_t n, std::vector<double> flat,
                                   std::uint64_t master_seed, double time)
    : n_(n), data_(std::move(flat)), master_seed_(master_seed), time_(time) {
  require(n >= 1, "ensemble dimension must be >= 1");
  require(data_.size() % n == 0, "flat sample buffer is not a multiple of n");
  count_ = data_.size() / n;
}

std::vector<double> VelocityEnsemble::energies() const {
  std::vector<double> e(count_);
  for (std::size_t s = 0; s < count_; ++s) {
    double acc = 0.0;
    for (double x : sample(s)) acc += x * x;
    e[s] = acc;
  }
  return e;
}

void VelocityEnsemble::validate() const {
  require(count_ >= 1, "ensemble is empty");
  for (double x : data_)
    require(std::isfinite(x), "ensemble contains a non-finite velocity");
}

void ThermostatConfig::validate(std::size_t n) const {
  require(lambda > 0.0, "lambda must be > 0");
  require(beta > 0.0, "beta must be > 0");
  require(eta >= 0.0, "eta must be >= 0");
  for (std::size_t i : thermostated)
    require(i >= 1 && i <= n, "thermostated index out of range 1..n");
}

namespace {

inline void rotate_unchecked(double* v, std::size_t i0, std::size_t j0,
                             double theta) {
  const double c = std::cos(theta);
  const double s = std::sin(theta);
  const double a = v[i0];
  const double b = v[j0];
  v[i0] = a * c - b * s;
  v[j0] = a * s + b * c;
}

void check_pair(std::size_t n, std::size_t i, std::size_t j) {
  require(i >= 1 && j >= 1 && i <= n && j <= n, "pair index out of range");
  require(i != j, "pair indices must differ");
}

void fill_uniform_direction(std::span<double> out, double radius,
                            Xoshiro256pp& rng) {
  std::normal_distribution<double> normal(0.0, 1.0);
  double norm2 = 0.0;
  do {
    norm2 = 0.0;
    for (double& x : out) {
      x = normal(rng);
      norm2 += x * x;
    }
  } while (norm2 == 0.0);
  const double scale = radius / std::sqrt(norm2);
  for (double& x : out) x *= scale;
}

struct TimedEvent {
  double t;
  std::size_t index;  // 0 => collision, otherwise 1-based thermostat index
};

}  // namespace

void rotate_pair_inplace(std::span<double> v, std::size_t i, std::size_t j,
                         double theta) {
  check_pair(v.size(), i, j);
  rotate_unchecked(v.data(), i - 1, j - 1, theta);
}

std::vector<double> rotate_pair(std::span<const double> v, std::size_t i,
                                std::size_t j, double theta) {
  std::vector<double> out(v.begin(), v.end());
  rotate_pair_inplace(out, i, j, theta);
  return out;
}

CollisionEvent random_collision(std::size_t n, Xoshiro256pp& rng) {
  std::size_t a = rng.below(n);
  std::size_t b = rng.below(n - 1);
  if (b >= a) ++b;
  if (a > b) std::swap(a, b);
  return {a + 1, b + 1, 2.0 * std::numbers::pi * rng.uniform(), 0.0};
}

VelocityEnsemble simulate(const VelocityEnsemble& ens, double t,
                          const ThermostatConfig& cfg, std::uint64_t seed) {
  VelocityEnsemble out = ens;
  simulate_inplace(out, t, cfg, seed);
  return out;
}

void simulate_inplace(VelocityEnsemble& out, double t, const ThermostatConfig& cfg,
                      std::uint64_t seed, std::uint64_t first_stream) {
  require(t >= 0.0, "simulation duration must be >= 0");
  require(!out.empty(), "cannot simulate an empty ensemble");
  const std::size_t n = out.dim();
  require(n >= 2, "the Kac process needs n >= 2 particles");
  cfg.validate(n);

  out.set_time(out.time() + t);
  if (t == 0.0) return;

  const double collision_mean = static_cast<double>(n) * cfg.lambda * t;
  const double thermostat_mean = cfg.eta * t;
  const double gauss_sd = 1.0 / std::sqrt(cfg.beta);
  const bool pure = cfg.pure();
  const auto count = static_cast<std::ptrdiff_t>(out.size());

#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t s = 0; s < count; ++s) {
    Xoshiro256pp rng(seed, first_stream + static_cast<std::uint64_t>(s), Stage::Simulate);
    double* v = out.sample(static_cast<std::size_t>(s)).data();
    std::poisson_distribution<long> collisions(collision_mean);
    const long k = collisions(rng);
    if (pure) {
      for (long e = 0; e < k; ++e) {
        const CollisionEvent ev = random_collision(n, rng);
        rotate_unchecked(v, ev.i - 1, ev.j - 1, ev.theta);
      }
      continue;
    }
    // Collision times are K sorted uniforms on [0, t]; each thermostated
    // index carries its own Poisson(eta t) count. Merge by time.
    std::vector<TimedEvent> events;
    events.reserve(static_cast<std::size_t>(k) + cfg.thermostated.size());
    for (long e = 0; e < k; ++e) events.push_back({t * rng.uniform(), 0});
    std::poisson_distribution<long> resets(thermostat_mean);
    for (std::size_t a : cfg.thermostated) {
      const long m = resets(rng);
      for (long e = 0; e < m; ++e) events.push_back({t * rng.uniform(), a});
    }
    std::sort(events.begin(), events.end(),
              [](const TimedEvent& x, const TimedEvent& y) {
                return x.t < y.t || (x.t == y.t && x.index < y.index);
              });
    std::normal_distribution<double> gauss(0.0, gauss_sd);
    for (const TimedEvent& ev : events) {
      if (ev.index == 0) {
        const CollisionEvent c = random_collision(n, rng);
        rotate_unchecked(v, c.i - 1, c.j - 1, c.theta);
      } else {
        v[ev.index - 1] = gauss(rng);
      }
    }
  }
}

VelocityEnsemble sample_sphere(std::size_t n, double r, std::size_t count,
                               std::uint64_t seed) {
  require(r > 0.0, "sphere radius must be > 0");
  require(count >= 1, "sample count must be >= 1");
  VelocityEnsemble out(n, count, seed);
  const auto m = static_cast<std::ptrdiff_t>(count);
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t s = 0; s < m; ++s) {
    Xoshiro256pp rng(seed, static_cast<std::uint64_t>(s), Stage::Sphere);
    fill_uniform_direction(out.sample(static_cast<std::size_t>(s)), r, rng);
  }
  return out;
}

VelocityEnsemble angular_average_resample(const VelocityEnsemble& ens,
                                          std::uint64_t seed) {
  VelocityEnsemble out = ens;
  const auto m = static_cast<std::ptrdiff_t>(ens.size());
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t s = 0; s < m; ++s) {
    auto row = out.sample(static_cast<std::size_t>(s));
    double norm2 = 0.0;
    for (double x : row) norm2 += x * x;
    if (norm2 == 0.0) continue;
    Xoshiro256pp rng(seed, static_cast<std::uint64_t>(s),
                     Stage::AngularResample);
    fill_uniform_direction(row, std::sqrt(norm2), rng);
  }
  return out;
}

std::string to_csv(const VelocityEnsemble& ens, const std::string& comment) {
  std::string out;
  if (!comment.empty()) out += "# " + comment + "\n";
  out += "sample_id";
  for (std::size_t i = 1; i <= ens.dim(); ++i) out += ",v" + std::to_string(i);
  out += '\n';
  char buf[40];
  for (std::size_t s = 0; s < ens.size(); ++s) {
    out += std::to_string(s);
    for (double x : ens.sample(s)) {
      std::snprintf(buf, sizeof buf, ",%.17g", x);
      out += buf;
    }
    out += '\n';
  }
  return out;
}

VelocityEnsemble ensemble_from_csv(const std::string& text,
                                   std::uint64_t master_seed) {
  std::istringstream in(text);
  std::string line;
  std::size_t n = 0;
  bool header = false;
  std::vector<double> flat;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    if (!header) {
      if (line.rfind("sample_id", 0) != 0)
        throw ValidationError("ensemble CSV must start with a sample_id header");
      n = static_cast<std::size_t>(std::count(line.begin(), line.end(), ','));
      require(n >= 1, "ensemble CSV has no velocity columns");
      header = true;
      continue;
    }
    std::size_t fields = 0;
    std::size_t pos = line.find(',');
    while (pos != std::string::npos) {
      const char* begin = line.c_str() + pos + 1;
      char* end = nullptr;
      const double x = std::strtod(begin, &end);
      if (end == begin) throw ValidationError("malformed ensemble CSV row: " + line);
      flat.push_back(x);
      ++fields;
      pos = line.find(',', pos + 1);
    }
    if (fields != n) throw ValidationError("ensemble CSV row has wrong arity: " + line);
  }
  require(header, "ensemble CSV has no header");
  VelocityEnsemble ens(n, std::move(flat), master_seed);
  ens.validate();
  return ens;
}

}  // namespace kaclab
