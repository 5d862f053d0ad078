#pragma once

// Witness densities whose d2 distance to their angular average barely moves
// for t <= 1/2. Everything is built on the Fourier side:
//   phi(xi) = prod_i (1 - e^{-alpha xi_i^2}),   psi(xi) = |xi|^4 e^{-|xi|^2} phi(xi),
// and f0 = (wide Gaussian) + psi-inverse / B.

#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "kaclab/stats.hpp"

namespace kaclab {

inline constexpr int kF0FixtureVersion = 1;

struct F0Spec {
  std::size_t n = 2;
  double b = 0.0;       // smallest root of x e^{-x} = e^{-1}/2
  double A_bar = 0.0;   // calibrated alpha * r^2 threshold
  double alpha = 0.0;   // A_bar / b
  double z0 = 0.0;      // maximiser of x^2 e^{-x^2} R_phi(x), x >= sqrt(b)
  double B = 0.0;       // positivity scale
  double d2_initial = 0.0;  // R_psi(z1) / (B z0^2)
  double R_phi_z0 = 0.0;    // sphere average of phi at radius z0
  double R_phi_z0_se = 0.0;
  double grid_extent = 0.0;
  std::uint64_t sphere_seed = 0;
  std::size_t sphere_samples = 0;
  int fixture_version = kF0FixtureVersion;
};

/// Smallest root of x e^{-x} = e^{-1}/2 on [0, 1], by bisection to 1e-12.
double threshold_b();

double phi(std::span<const double> xi, double alpha);
double psi(std::span<const double> xi, double alpha);

/// Supremum of phi on the sphere of radius r: (1 - e^{-alpha r^2 / n})^n.
double phi_sphere_sup(double r, double alpha, std::size_t n);

/// Monte Carlo average of phi over the sphere of radius r. Directions come
/// from `seed`, so calls sharing a seed use common random numbers.
Estimate radial_average_phi(double r, double alpha, std::size_t n,
                            std::size_t samples, std::uint64_t seed);

struct CalibrationOptions {
  double lo = 1.0;
  double hi = 1e4;
  std::size_t samples = 200000;
};

/// Smallest a in [lo, hi] (relative tolerance tol) with
/// R_phi(1; a) - 3 SE >= (1 - e^{-a/n})^n / 2. Throws NumericalError when the
/// bracket does not straddle the threshold.
double calibrate_A_bar(std::size_t n, double tol, std::uint64_t seed,
                       const CalibrationOptions& opt = {});

/// Q^k phi at z1 = (r, 0, ..., 0): each walker applies k random collisions to
/// z1 in Fourier space. Exactly zero for k <= n - 2.
Estimate qk_phi_at_pole(std::size_t k, double r, double alpha, std::size_t n,
                        std::size_t walkers, std::uint64_t seed);

/// e^{-tL} f (xi) by averaging f over walkers that each apply
/// K ~ Poisson(n t) random collisions to xi.
Estimate evolve_function_at(const std::function<double(std::span<const double>)>& f,
                            std::span<const double> xi, double t,
                            std::size_t walkers, std::uint64_t seed);

/// e^{-tL} psi (xi).
Estimate fourier_evolution_at(std::span<const double> xi, double t, double alpha,
                              std::size_t walkers, std::uint64_t seed);

struct Z0Result {
  double z0 = 0.0;
  double objective = 0.0;
  Estimate R_phi;
};

/// Golden-section search for the argmax over x >= sqrt(b) of
/// x^2 e^{-x^2} R_phi(x). Throws NumericalError unless the maximum exceeds
/// the small-|xi| ceiling b e^{-b}.
Z0Result locate_z0(std::size_t n, double alpha, std::size_t samples,
                   std::uint64_t seed);

struct BuildOptions {
  double calibration_tol = 1e-3;
  std::size_t calibration_samples = 200000;
  std::size_t sphere_samples = 200000;
  std::size_t audit_nodes = 64;  // per axis, n <= 3
};

/// Calibrates A_bar, alpha, z0 and the positivity scale B. grid_extent <= 0
/// selects six standard deviations of the wide Gaussian.
F0Spec build_f0(std::size_t n, double grid_extent, std::uint64_t seed,
                const BuildOptions& opt = {});

/// f0 density and its pieces at a velocity v.
double f0_background(const F0Spec& spec, std::span<const double> v);
double f0_perturbation(const F0Spec& spec, std::span<const double> v);  // psi-inverse
double f0_density(const F0Spec& spec, std::span<const double> v);

/// Smallest value of psi-inverse / background over the positivity audit
/// points: a tensor grid over [-L, L]^n for n <= 3, axis-pair planes plus
/// random rays otherwise. `refine` halves the spacing and offsets the nodes.
double f0_audit_min_ratio(const F0Spec& spec, std::size_t nodes, bool refine,
                          std::uint64_t seed);

/// Smallest B such that |psi-inverse| <= B * background outside the audit box.
double f0_tail_requirement(const F0Spec& spec);

/// int f0 and int |v|^2 f0 by 1-D quadrature of the separable factors.
double f0_mass(const F0Spec& spec, std::size_t nodes = 4096);
double f0_energy(const F0Spec& spec, std::size_t nodes = 4096);

/// max over random directions and radii of |psi - R_psi| / |xi|^2; compared
/// with the pole value R_psi(z0) / z0^2 it checks where the supremum sits.
double max_offpole_ratio(const F0Spec& spec, std::size_t directions,
                         std::span<const double> radii, std::uint64_t seed);
double pole_ratio(const F0Spec& spec);

/// (1/n) (2t)^{n-1} (n/(n-1))^{n-1}, evaluated in log space.
double combinatorial_bound(std::size_t n, double t);

/// max{1 - (e/n)(2t)^{n-1}, 0}.
double slow_decay_floor(std::size_t n, double t);

struct SlowDecayRow {
  double t = 0.0;
  double ratio_lb = 0.0;
  double ratio_se = 0.0;
  double paper_floor = 0.0;
};

/// ratio_lb(t) = 1 - e^{-tL} psi(z1) / R_psi(z1) for each t.
std::vector<SlowDecayRow> verify_slow_decay(const F0Spec& spec,
                                            std::span<const double> t_grid,
                                            std::size_t walkers, std::uint64_t seed);

std::string f0_json(const F0Spec& spec);
F0Spec f0_from_json(const std::string& text);
/// CSV `t,ratio_lb,ratio_se,paper_floor`.
std::string slow_decay_csv(const std::vector<SlowDecayRow>& rows,
                           const std::string& comment = {});

}  // namespace kaclab
