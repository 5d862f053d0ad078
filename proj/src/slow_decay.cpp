#include "kaclab/slow_decay.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numbers>
#include <random>

#include <json.hpp>

#include "kaclab/errors.hpp"
#include "kaclab/kac.hpp"

namespace kaclab {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kPiSq = kPi * kPi;
const double kTwoPiPow4 = std::pow(2.0 * kPi, 4);

double one_minus_exp(double x) { return -std::expm1(-x); }

double norm2(std::span<const double> v) {
  double acc = 0.0;
  for (double x : v) acc += x * x;
  return acc;
}

// Squared coordinates of M unit vectors; phi on the sphere of radius r only
// needs alpha r^2 u_i^2, so one set serves every (alpha, r).
class SphereSquares {
 public:
  SphereSquares(std::size_t n, std::size_t samples, std::uint64_t seed)
      : n_(n), m_(samples) {
    require(n >= 2, "n must be >= 2");
    require(samples >= 2, "need at least two sphere samples");
    const VelocityEnsemble dirs = sample_sphere(n, 1.0, samples, seed);
    sq_.resize(dirs.flat().size());
    std::transform(dirs.flat().begin(), dirs.flat().end(), sq_.begin(),
                   [](double x) { return x * x; });
  }

  // Average of prod_i (1 - e^{-a u_i^2}), a = alpha r^2.
  Estimate average(double a) const {
    double sum = 0.0;
    double sum2 = 0.0;
    for (std::size_t s = 0; s < m_; ++s) {
      double p = 1.0;
      const double* u = sq_.data() + s * n_;
      for (std::size_t i = 0; i < n_; ++i) p *= one_minus_exp(a * u[i]);
      sum += p;
      sum2 += p * p;
    }
    const double md = static_cast<double>(m_);
    const double mean = sum / md;
    const double var = std::max(0.0, (sum2 - md * mean * mean) / (md - 1.0));
    return {mean, std::sqrt(var / md)};
  }

 private:
  std::size_t n_;
  std::size_t m_;
  std::vector<double> sq_;
};

double sup_on_sphere(double a, std::size_t n) {
  const double nd = static_cast<double>(n);
  return std::pow(one_minus_exp(a / nd), nd);
}

bool calibration_predicate(const SphereSquares& sph, double a, std::size_t n) {
  const Estimate e = sph.average(a);
  return e.value - 3.0 * e.se >= 0.5 * sup_on_sphere(a, n);
}

Z0Result golden_z0(const SphereSquares& sph, double alpha) {
  const double b = threshold_b();
  auto objective = [&](double x) {
    return x * x * std::exp(-x * x) * sph.average(alpha * x * x).value;
  };
  const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
  double lo = std::sqrt(b);
  double hi = 3.0;
  double x1 = hi - inv_phi * (hi - lo);
  double x2 = lo + inv_phi * (hi - lo);
  double f1 = objective(x1);
  double f2 = objective(x2);
  while (hi - lo > 1e-9) {
    if (f1 < f2) {
      lo = x1;
      x1 = x2;
      f1 = f2;
      x2 = lo + inv_phi * (hi - lo);
      f2 = objective(x2);
    } else {
      hi = x2;
      x2 = x1;
      f2 = f1;
      x1 = hi - inv_phi * (hi - lo);
      f1 = objective(x1);
    }
  }
  Z0Result r;
  r.z0 = 0.5 * (lo + hi);
  r.R_phi = sph.average(alpha * r.z0 * r.z0);
  r.objective = r.z0 * r.z0 * std::exp(-r.z0 * r.z0) * r.R_phi.value;
  // The search interval end may hold the maximum if the objective is not
  // unimodal; compare against it explicitly.
  const double at_lo = objective(std::sqrt(b));
  if (at_lo > r.objective) {
    r.z0 = std::sqrt(b);
    r.R_phi = sph.average(alpha * b);
    r.objective = at_lo;
  }
  return r;
}

// Per-coordinate factor g(x) = sqrt(pi) e^{-pi^2 x^2} - sqrt(pi/(1+alpha))
// e^{-pi^2 x^2/(1+alpha)} and its even derivatives; the Fourier transform of
// g is e^{-xi^2}(1 - e^{-alpha xi^2}).
struct Factor {
  double c1;  // pi^2
  double c2;  // pi^2 / (1 + alpha)
  double a1;  // sqrt(pi)
  double a2;  // sqrt(pi / (1 + alpha))
  double gamma;  // background normaliser sqrt(0.9 pi / (1 + alpha))
  double c_bg;   // 0.9 c2

  explicit Factor(double alpha)
      : c1(kPiSq), c2(kPiSq / (1.0 + alpha)), a1(std::sqrt(kPi)),
        a2(std::sqrt(kPi / (1.0 + alpha))),
        gamma(std::sqrt(0.9 * kPi / (1.0 + alpha))), c_bg(0.9 * kPiSq / (1.0 + alpha)) {}

  // d^m/dx^m e^{-c x^2} = (-sqrt c)^m H_m(sqrt c x) e^{-c x^2}; m even here.
  static double gauss_deriv(double c, double x, int m) {
    const double y = std::sqrt(c) * x;
    double h0 = 1.0;
    double h1 = 2.0 * y;
    double hm = m == 0 ? h0 : h1;
    for (int k = 1; k < m; ++k) {
      const double h2 = 2.0 * y * h1 - 2.0 * k * h0;
      h0 = h1;
      h1 = h2;
      hm = h2;
    }
    return std::pow(c, 0.5 * m) * hm * std::exp(-c * x * x);
  }

  double g(double x, int m) const {
    return a1 * gauss_deriv(c1, x, m) - a2 * gauss_deriv(c2, x, m);
  }

  double background(double x) const { return gamma * std::exp(-c_bg * x * x); }

  // Upper bound on max_{m in 0,2,4} |g^{(m)}(x)| / background(x) using
  // absolute Hermite coefficients.
  double ratio_bound(double x) const {
    auto hbar = [](double y, int m) {
      const double y2 = y * y;
      if (m == 0) return 1.0;
      if (m == 2) return 4.0 * y2 + 2.0;
      return 16.0 * y2 * y2 + 48.0 * y2 + 12.0;
    };
    double best = 0.0;
    for (int m : {0, 2, 4}) {
      const double t1 = a1 * std::pow(c1, 0.5 * m) * hbar(std::sqrt(c1) * x, m) *
                        std::exp(-(c1 - c_bg) * x * x);
      const double t2 = a2 * std::pow(c2, 0.5 * m) * hbar(std::sqrt(c2) * x, m) *
                        std::exp(-(c2 - c_bg) * x * x);
      best = std::max(best, (t1 + t2) / gamma);
    }
    return best;
  }
};

double background_sd(double alpha) {
  return std::sqrt((1.0 + alpha) / 1.8) / kPi;
}

double perturbation_over_background(const Factor& f, std::span<const double> v) {
  const std::size_t n = v.size();
  std::vector<double> g0(n), g2(n), g4(n);
  double bg = 1.0;
  for (std::size_t i = 0; i < n; ++i) {
    g0[i] = f.g(v[i], 0);
    g2[i] = f.g(v[i], 2);
    g4[i] = f.g(v[i], 4);
    bg *= f.background(v[i]);
  }
  double acc = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    double term = g4[i];
    for (std::size_t k = 0; k < n; ++k)
      if (k != i) term *= g0[k];
    acc += term;
  }
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      double term = 2.0 * g2[i] * g2[j];
      for (std::size_t k = 0; k < n; ++k)
        if (k != i && k != j) term *= g0[k];
      acc += term;
    }
  }
  return acc / kTwoPiPow4 / bg;
}

double perturbation_value(const Factor& f, std::span<const double> v) {
  double bg = 1.0;
  for (double x : v) bg *= f.background(x);
  return perturbation_over_background(f, v) * bg;
}

// Trapezoid integrals over [-X, X] of x^p h(x) for the 1-D factors.
struct LineMoments {
  double I0, I2;       // background
  double J0, J2, J4;   // int g, int g'', int g''''
  double K0, K2, K4;   // int x^2 g, x^2 g'', x^2 g''''
};

LineMoments line_moments(const Factor& f, double X, std::size_t nodes) {
  LineMoments m{};
  const double h = 2.0 * X / static_cast<double>(nodes);
  for (std::size_t k = 0; k <= nodes; ++k) {
    const double x = -X + h * static_cast<double>(k);
    const double w = (k == 0 || k == nodes) ? 0.5 * h : h;
    const double x2 = x * x;
    const double bg = f.background(x);
    const double g0 = f.g(x, 0), g2 = f.g(x, 2), g4 = f.g(x, 4);
    m.I0 += w * bg;
    m.I2 += w * x2 * bg;
    m.J0 += w * g0;
    m.J2 += w * g2;
    m.J4 += w * g4;
    m.K0 += w * x2 * g0;
    m.K2 += w * x2 * g2;
    m.K4 += w * x2 * g4;
  }
  return m;
}

double ipow(double x, long k) { return k < 0 ? 0.0 : std::pow(x, static_cast<double>(k)); }

}  // namespace

double threshold_b() {
  const double target = 0.5 * std::exp(-1.0);
  double lo = 0.0;
  double hi = 1.0;
  while (hi - lo > 1e-13) {
    const double mid = 0.5 * (lo + hi);
    if (mid * std::exp(-mid) < target)
      lo = mid;
    else
      hi = mid;
  }
  return 0.5 * (lo + hi);
}

double phi(std::span<const double> xi, double alpha) {
  double p = 1.0;
  for (double x : xi) p *= one_minus_exp(alpha * x * x);
  return p;
}

double psi(std::span<const double> xi, double alpha) {
  const double r2 = norm2(xi);
  return r2 * r2 * std::exp(-r2) * phi(xi, alpha);
}

double phi_sphere_sup(double r, double alpha, std::size_t n) {
  require(n >= 1, "n must be >= 1");
  return sup_on_sphere(alpha * r * r, n);
}

Estimate radial_average_phi(double r, double alpha, std::size_t n,
                            std::size_t samples, std::uint64_t seed) {
  require(r >= 0.0 && alpha > 0.0, "need r >= 0 and alpha > 0");
  return SphereSquares(n, samples, seed).average(alpha * r * r);
}

double calibrate_A_bar(std::size_t n, double tol, std::uint64_t seed,
                       const CalibrationOptions& opt) {
  require(n >= 2, "n must be >= 2");
  require(tol > 0.0 && tol < 0.5, "tol must lie in (0, 0.5)");
  require(opt.lo > 0.0 && opt.hi > opt.lo, "invalid calibration bracket");
  const SphereSquares sph(n, opt.samples, stream_seed(seed, n, Stage::Calibration));
  double lo = opt.lo;
  double hi = opt.hi;
  if (!calibration_predicate(sph, hi, n))
    throw NumericalError("A_bar calibration: predicate fails at the upper bracket end");
  if (calibration_predicate(sph, lo, n)) return lo;
  while (hi / lo - 1.0 > tol) {
    const double mid = std::sqrt(lo * hi);
    if (calibration_predicate(sph, mid, n))
      hi = mid;
    else
      lo = mid;
  }
  return hi;
}

Estimate qk_phi_at_pole(std::size_t k, double r, double alpha, std::size_t n,
                        std::size_t walkers, std::uint64_t seed) {
  require(n >= 2, "n must be >= 2");
  require(walkers >= 2, "need at least two walkers");
  std::vector<double> values(walkers);
  const auto w = static_cast<std::ptrdiff_t>(walkers);
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t s = 0; s < w; ++s) {
    Xoshiro256pp rng(seed, static_cast<std::uint64_t>(s), Stage::Walkers);
    std::vector<double> xi(n, 0.0);
    xi[0] = r;
    for (std::size_t e = 0; e < k; ++e) {
      const CollisionEvent ev = random_collision(n, rng);
      rotate_pair_inplace(xi, ev.i, ev.j, ev.theta);
    }
    values[static_cast<std::size_t>(s)] = phi(xi, alpha);
  }
  return iid_mean(values);
}

Estimate evolve_function_at(const std::function<double(std::span<const double>)>& f,
                            std::span<const double> xi, double t,
                            std::size_t walkers, std::uint64_t seed) {
  const std::size_t n = xi.size();
  require(n >= 2, "n must be >= 2");
  require(t >= 0.0, "t must be >= 0");
  require(walkers >= 2, "need at least two walkers");
  std::vector<double> values(walkers);
  const double mean_events = static_cast<double>(n) * t;
  const auto w = static_cast<std::ptrdiff_t>(walkers);
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t s = 0; s < w; ++s) {
    Xoshiro256pp rng(seed, static_cast<std::uint64_t>(s), Stage::Walkers);
    std::vector<double> z(xi.begin(), xi.end());
    if (mean_events > 0.0) {
      std::poisson_distribution<long> count(mean_events);
      const long k = count(rng);
      for (long e = 0; e < k; ++e) {
        const CollisionEvent ev = random_collision(n, rng);
        rotate_pair_inplace(z, ev.i, ev.j, ev.theta);
      }
    }
    values[static_cast<std::size_t>(s)] = f(z);
  }
  return iid_mean(values);
}

Estimate fourier_evolution_at(std::span<const double> xi, double t, double alpha,
                              std::size_t walkers, std::uint64_t seed) {
  return evolve_function_at(
      [alpha](std::span<const double> z) { return psi(z, alpha); }, xi, t,
      walkers, seed);
}

Z0Result locate_z0(std::size_t n, double alpha, std::size_t samples,
                   std::uint64_t seed) {
  require(alpha > 0.0, "alpha must be > 0");
  const SphereSquares sph(n, samples, seed);
  Z0Result r = golden_z0(sph, alpha);
  const double b = threshold_b();
  if (!(r.objective > b * std::exp(-b)))
    throw NumericalError("z0 search: maximum does not exceed the small-xi ceiling b e^{-b}");
  return r;
}

double f0_background(const F0Spec& spec, std::span<const double> v) {
  const Factor f(spec.alpha);
  double bg = 1.0;
  for (double x : v) bg *= f.background(x);
  return bg;
}

double f0_perturbation(const F0Spec& spec, std::span<const double> v) {
  require(v.size() == spec.n, "velocity dimension mismatch");
  return perturbation_value(Factor(spec.alpha), v);
}

double f0_density(const F0Spec& spec, std::span<const double> v) {
  return f0_background(spec, v) + f0_perturbation(spec, v) / spec.B;
}

double f0_audit_min_ratio(const F0Spec& spec, std::size_t nodes, bool refine,
                          std::uint64_t seed) {
  require(nodes >= 4, "audit needs at least 4 nodes per axis");
  const Factor f(spec.alpha);
  const std::size_t n = spec.n;
  const double L = spec.grid_extent;
  const std::size_t count = refine ? 2 * nodes : nodes;
  const double h = 2.0 * L / static_cast<double>(refine ? 2 * nodes : nodes - 1);
  const double offset = refine ? 0.25 * h : 0.0;
  std::vector<double> axis(count);
  for (std::size_t k = 0; k < count; ++k)
    axis[k] = -L + offset + h * static_cast<double>(k);

  double worst = std::numeric_limits<double>::infinity();
  std::vector<double> v(n, 0.0);
  if (n <= 3) {
    std::size_t total = 1;
    for (std::size_t i = 0; i < n; ++i) total *= count;
    for (std::size_t idx = 0; idx < total; ++idx) {
      std::size_t rest = idx;
      for (std::size_t i = 0; i < n; ++i) {
        v[i] = axis[rest % count];
        rest /= count;
      }
      worst = std::min(worst, perturbation_over_background(f, v));
    }
    return worst;
  }
  // Planes spanned by coordinate pairs (others zero); by exchangeability the
  // (1,2) plane stands for all of them.
  std::fill(v.begin(), v.end(), 0.0);
  for (double a : axis)
    for (double c : axis) {
      v[0] = a;
      v[1] = c;
      worst = std::min(worst, perturbation_over_background(f, v));
    }
  // Diagonal, anti-diagonal and random rays through the origin.
  std::vector<std::vector<double>> rays;
  rays.emplace_back(n, 1.0 / std::sqrt(static_cast<double>(n)));
  std::vector<double> alt(n);
  for (std::size_t i = 0; i < n; ++i)
    alt[i] = (i % 2 == 0 ? 1.0 : -1.0) / std::sqrt(static_cast<double>(n));
  rays.push_back(alt);
  const VelocityEnsemble random_dirs = sample_sphere(n, 1.0, 256, seed);
  for (std::size_t s = 0; s < random_dirs.size(); ++s) {
    const auto d = random_dirs.sample(s);
    rays.emplace_back(d.begin(), d.end());
  }
  const double reach = L * std::sqrt(static_cast<double>(n));
  const std::size_t steps = 8 * count;
  for (const auto& d : rays) {
    for (std::size_t k = 0; k <= steps; ++k) {
      const double s = -reach + 2.0 * reach * (static_cast<double>(k) + (refine ? 0.5 : 0.0)) /
                                    static_cast<double>(steps);
      for (std::size_t i = 0; i < n; ++i) v[i] = s * d[i];
      worst = std::min(worst, perturbation_over_background(f, v));
    }
  }
  return worst;
}

double f0_tail_requirement(const F0Spec& spec) {
  const Factor f(spec.alpha);
  const double L = spec.grid_extent;
  const double wide = std::sqrt(1.0 / (0.1 * f.c2));
  const double x_end = L + 40.0 * wide;
  const std::size_t steps = 200000;
  double w_max = 0.0;
  double w_tail = 0.0;
  for (std::size_t k = 0; k <= steps; ++k) {
    const double x = x_end * static_cast<double>(k) / static_cast<double>(steps);
    const double w = f.ratio_bound(x);
    w_max = std::max(w_max, w);
    if (x >= L) w_tail = std::max(w_tail, w);
  }
  w_tail = std::max(w_tail, f.ratio_bound(L));
  const double nd = static_cast<double>(spec.n);
  // 1% head-room for the sampled suprema.
  return 1.01 * nd * nd * w_tail * std::pow(w_max, nd - 1.0) / kTwoPiPow4;
}

double f0_mass(const F0Spec& spec, std::size_t nodes) {
  const Factor f(spec.alpha);
  const LineMoments m = line_moments(f, 14.0 * background_sd(spec.alpha), nodes);
  const long n = static_cast<long>(spec.n);
  const double nd = static_cast<double>(n);
  const double pert = nd * m.J4 * ipow(m.J0, n - 1) +
                      nd * (nd - 1.0) * m.J2 * m.J2 * ipow(m.J0, n - 2);
  return ipow(m.I0, n) + pert / kTwoPiPow4 / spec.B;
}

double f0_energy(const F0Spec& spec, std::size_t nodes) {
  const Factor f(spec.alpha);
  const LineMoments m = line_moments(f, 14.0 * background_sd(spec.alpha), nodes);
  const long n = static_cast<long>(spec.n);
  const double nd = static_cast<double>(n);
  // int v_1^2 f0; the other coordinates follow by exchangeability.
  const double bg = m.I2 * ipow(m.I0, n - 1);
  double pert = m.K4 * ipow(m.J0, n - 1) + (nd - 1.0) * m.J4 * m.K0 * ipow(m.J0, n - 2) +
                2.0 * (nd - 1.0) * m.K2 * m.J2 * ipow(m.J0, n - 2);
  if (n >= 3)
    pert += 2.0 * 0.5 * (nd - 1.0) * (nd - 2.0) * m.J2 * m.J2 * m.K0 * ipow(m.J0, n - 3);
  return nd * (bg + pert / kTwoPiPow4 / spec.B);
}

double pole_ratio(const F0Spec& spec) {
  const double z2 = spec.z0 * spec.z0;
  return z2 * std::exp(-z2) * spec.R_phi_z0;
}

double max_offpole_ratio(const F0Spec& spec, std::size_t directions,
                         std::span<const double> radii, std::uint64_t seed) {
  require(directions >= 1, "need at least one direction");
  const SphereSquares sph(spec.n, spec.sphere_samples, spec.sphere_seed);
  VelocityEnsemble dirs = sample_sphere(spec.n, 1.0, directions, seed);
  std::vector<double> xi(spec.n);
  double best = 0.0;
  for (double r : radii) {
    require(r > 0.0, "radii must be > 0");
    const double r2 = r * r;
    const double R_psi = r2 * r2 * std::exp(-r2) * sph.average(spec.alpha * r2).value;
    auto eval = [&](std::span<const double> d) {
      for (std::size_t i = 0; i < spec.n; ++i) xi[i] = r * d[i];
      best = std::max(best, std::abs(psi(xi, spec.alpha) - R_psi) / r2);
    };
    for (std::size_t s = 0; s < dirs.size(); ++s) eval(dirs.sample(s));
    const std::vector<double> diag(spec.n, 1.0 / std::sqrt(static_cast<double>(spec.n)));
    eval(diag);
  }
  return best;
}

F0Spec build_f0(std::size_t n, double grid_extent, std::uint64_t seed,
                const BuildOptions& opt) {
  require(n >= 2, "n must be >= 2");
  require(opt.sphere_samples >= 2 && opt.calibration_samples >= 2,
          "sample counts must be >= 2");
  F0Spec spec;
  spec.n = n;
  spec.b = threshold_b();
  spec.sphere_seed = stream_seed(seed, n, Stage::Sphere);
  spec.sphere_samples = opt.sphere_samples;
  CalibrationOptions copt;
  copt.samples = opt.calibration_samples;
  spec.A_bar = calibrate_A_bar(n, opt.calibration_tol, seed, copt);

  // The calibration inequality is relative to the sphere supremum of phi;
  // the maximum of |psi - R_psi| / |xi|^2 only sits at the pole once R_phi is
  // large in absolute terms. Raise A_bar until both checks hold.
  const SphereSquares sph(n, spec.sphere_samples, spec.sphere_seed);
  const double ceiling = spec.b * std::exp(-spec.b);
  std::vector<double> radii;
  for (int k = 1; k <= 60; ++k) radii.push_back(0.05 * k);
  for (;;) {
    spec.alpha = spec.A_bar / spec.b;
    const Z0Result z = golden_z0(sph, spec.alpha);
    spec.z0 = z.z0;
    spec.R_phi_z0 = z.R_phi.value;
    spec.R_phi_z0_se = z.R_phi.se;
    if (z.objective > ceiling &&
        max_offpole_ratio(spec, 256, radii, stream_seed(seed, n, Stage::Grid)) <=
            pole_ratio(spec) * (1.0 + 1e-6))
      break;
    spec.A_bar *= 2.0;
    if (spec.A_bar > 1e4)
      throw NumericalError("build_f0: no A_bar <= 1e4 puts the d2 supremum at the pole");
  }

  spec.grid_extent = grid_extent > 0.0 ? grid_extent : 6.0 * background_sd(spec.alpha);
  spec.B = 1.0;
  const std::uint64_t audit_seed = stream_seed(seed, n, Stage::Audit);
  const double coarse = -f0_audit_min_ratio(spec, opt.audit_nodes, false, audit_seed);
  const double needed = std::max({coarse, f0_tail_requirement(spec), 1.0});
  double B = std::exp2(std::ceil(std::log2(needed)));
  const double fine = -f0_audit_min_ratio(spec, opt.audit_nodes, true, audit_seed);
  while (B < fine) B *= 2.0;
  if (!(B <= std::exp2(64.0)))
    throw NumericalError("build_f0: positivity needs B above 2^64");
  spec.B = B;
  spec.d2_initial = pole_ratio(spec) / spec.B;
  return spec;
}

double combinatorial_bound(std::size_t n, double t) {
  require(n >= 2, "n must be >= 2");
  require(t >= 0.0, "t must be >= 0");
  if (t == 0.0) return 0.0;
  const double nd = static_cast<double>(n);
  return std::exp(-std::log(nd) +
                  (nd - 1.0) * (std::log(2.0 * t) + std::log(nd / (nd - 1.0))));
}

double slow_decay_floor(std::size_t n, double t) {
  require(n >= 2, "n must be >= 2");
  require(t >= 0.0, "t must be >= 0");
  const double nd = static_cast<double>(n);
  return std::max(1.0 - std::exp(1.0) / nd * std::pow(2.0 * t, nd - 1.0), 0.0);
}

std::vector<SlowDecayRow> verify_slow_decay(const F0Spec& spec,
                                            std::span<const double> t_grid,
                                            std::size_t walkers, std::uint64_t seed) {
  require(spec.z0 > 0.0 && spec.R_phi_z0 > 0.0, "F0Spec is not calibrated");
  const double z2 = spec.z0 * spec.z0;
  const double scale = z2 * z2 * std::exp(-z2);
  const double R_psi = scale * spec.R_phi_z0;
  const double R_psi_se = scale * spec.R_phi_z0_se;
  std::vector<double> z1(spec.n, 0.0);
  z1[0] = spec.z0;
  std::vector<SlowDecayRow> rows;
  for (std::size_t k = 0; k < t_grid.size(); ++k) {
    const double t = t_grid[k];
    const Estimate e = fourier_evolution_at(z1, t, spec.alpha, walkers,
                                            stream_seed(seed, k, Stage::Walkers));
    SlowDecayRow row;
    row.t = t;
    row.ratio_lb = 1.0 - e.value / R_psi;
    row.ratio_se = std::hypot(e.se / R_psi, e.value * R_psi_se / (R_psi * R_psi));
    row.paper_floor = slow_decay_floor(spec.n, t);
    rows.push_back(row);
  }
  return rows;
}

std::string f0_json(const F0Spec& s) {
  nlohmann::ordered_json j;
  j["n"] = s.n;
  j["b"] = s.b;
  j["A_bar"] = s.A_bar;
  j["alpha"] = s.alpha;
  j["z0"] = s.z0;
  j["B"] = s.B;
  j["d2_initial"] = s.d2_initial;
  j["R_phi_z0"] = s.R_phi_z0;
  j["R_phi_z0_se"] = s.R_phi_z0_se;
  j["grid_extent"] = s.grid_extent;
  j["sphere_seed"] = s.sphere_seed;
  j["sphere_samples"] = s.sphere_samples;
  j["fixture_version"] = s.fixture_version;
  return j.dump(2) + "\n";
}

F0Spec f0_from_json(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(std::string("invalid F0Spec JSON: ") + e.what());
  }
  F0Spec s;
  try {
    s.n = j.at("n").get<std::size_t>();
    s.b = j.at("b").get<double>();
    s.A_bar = j.at("A_bar").get<double>();
    s.alpha = j.at("alpha").get<double>();
    s.z0 = j.at("z0").get<double>();
    s.B = j.at("B").get<double>();
    s.d2_initial = j.at("d2_initial").get<double>();
    s.R_phi_z0 = j.at("R_phi_z0").get<double>();
    s.R_phi_z0_se = j.at("R_phi_z0_se").get<double>();
    s.grid_extent = j.at("grid_extent").get<double>();
    s.sphere_seed = j.at("sphere_seed").get<std::uint64_t>();
    s.sphere_samples = j.at("sphere_samples").get<std::size_t>();
    s.fixture_version = j.at("fixture_version").get<int>();
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(std::string("incomplete F0Spec JSON: ") + e.what());
  }
  require(s.fixture_version == kF0FixtureVersion, "F0Spec fixture version mismatch");
  require(s.n >= 2 && s.alpha > 0.0 && s.B > 0.0, "F0Spec fields out of range");
  return s;
}

std::string slow_decay_csv(const std::vector<SlowDecayRow>& rows,
                           const std::string& comment) {
  std::string out;
  if (!comment.empty()) out += "# " + comment + "\n";
  out += "t,ratio_lb,ratio_se,paper_floor\n";
  char buf[128];
  for (const auto& r : rows) {
    std::snprintf(buf, sizeof buf, "%.17g,%.17g,%.17g,%.17g\n", r.t, r.ratio_lb,
                  r.ratio_se, r.paper_floor);
    out += buf;
  }
  return out;
}

}  // namespace kaclab
