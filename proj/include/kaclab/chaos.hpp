#pragma once

// Partially thermostated Kac systems: N = k n0 particles, of which the indices
// with (i mod n0) in {1..m0} are resampled from g_beta. As k grows the one-
// and two-particle marginals approach the solution of a two-species
// mixture equation, integrated here on the Fourier side.

#include <complex>
#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "kaclab/kac.hpp"
#include "kaclab/rng.hpp"

namespace kaclab {

using cplx = std::complex<double>;

/// 1-D initial law with a closed-form characteristic function
/// int e^{-2 pi i xi v} f(v) dv.
struct Sampler1D {
  enum class Kind { Gaussian, Bimodal, Point };
  Kind kind = Kind::Gaussian;
  double a = 1.0;  // Gaussian: variance; Bimodal: centre; Point: location
  double b = 0.0;  // Bimodal: component standard deviation

  static Sampler1D gaussian(double variance) { return {Kind::Gaussian, variance, 0.0}; }
  static Sampler1D bimodal(double centre, double sd) { return {Kind::Bimodal, centre, sd}; }
  static Sampler1D point(double x) { return {Kind::Point, x, 0.0}; }

  double sample(Xoshiro256pp& rng) const;
  cplx cf(double xi) const;
  double variance() const;
};

struct MixtureParams {
  double lambda = 1.0;
  double eta = 1.0;
  double beta = 1.0;
  double alpha = 0.5;  // thermostated fraction m0 / n0

  void validate() const;
};

/// Characteristic functions of the thermostated (fbar) and free (fbarbar)
/// species on the symmetric grid xi_j = (j - N/2) h, j = 0..N.
struct MixtureGrid {
  MixtureParams params;
  std::vector<double> xi;
  std::vector<cplx> fbar;
  std::vector<cplx> fbarbar;

  double extent() const { return xi.back(); }
  std::size_t zero_index() const { return xi.size() / 2; }
};

/// Grid of 2 * half_intervals + 1 points on [-X, X] holding the initial
/// characteristic functions.
MixtureGrid make_mixture_grid(const MixtureParams& p, double X,
                              std::size_t half_intervals, const Sampler1D& init_bar,
                              const Sampler1D& init_barbar);

/// Default extent 8 sqrt(beta) max(1, initial spread).
double default_mixture_extent(const MixtureParams& p, const Sampler1D& a,
                              const Sampler1D& b);

struct MixtureRhs {
  std::vector<cplx> dbar;
  std::vector<cplx> dbarbar;
};

/// Right-hand side of the Fourier-side mixture system; the theta average uses
/// a 64-node trapezoid rule and off-grid values use cubic interpolation.
MixtureRhs mixture_rhs(const MixtureGrid& g);

/// Classical RK4 from the state in g over a duration t with steps no longer
/// than dt. Requires dt <= 0.1 / (2 lambda + eta). The value at xi = 0 is
/// re-pinned to 1 after every step.
MixtureGrid integrate_mixture(const MixtureGrid& g, double t, double dt);

/// g_beta^(xi) = e^{-2 pi^2 xi^2 / beta}.
double thermostat_cf(double xi, double beta);

struct ChaosSimConfig {
  std::size_t n0 = 2;
  std::size_t m0 = 1;
  std::size_t k = 1;
  double lambda = 1.0;
  double eta = 1.0;
  double beta = 1.0;
  Sampler1D init_thermostated = Sampler1D::gaussian(1.0);
  Sampler1D init_free = Sampler1D::gaussian(1.0);
  std::size_t samples = 10000;
  std::uint64_t seed = 0;

  std::size_t particles() const { return k * n0; }
  void validate() const;
};

/// 1-based indices i with (i mod n0) in {1, ..., m0}.
std::vector<std::size_t> thermostated_index_set(std::size_t n0, std::size_t m0,
                                                std::size_t k);
std::vector<std::size_t> free_index_set(std::size_t n0, std::size_t m0, std::size_t k);

/// Draws the product initial state and runs the thermostated Kac process to
/// time t. Throws ValidationError for m0 >= n0.
VelocityEnsemble simulate_partial(const ChaosSimConfig& cfg, double t);

/// Empirical one-particle marginal characteristic function, averaged over an
/// index group. SE comes from the per-sample group means.
struct LineCf {
  std::vector<double> xi;
  std::vector<cplx> values;
  std::vector<double> se;
  std::size_t sample_count = 0;
};
LineCf marginal_ecf(const VelocityEnsemble& ens, const std::vector<std::size_t>& group,
                    const std::vector<double>& xi);

/// Empirical two-particle characteristic function of (v_a, v_b) pooled over
/// the pairs (group_a[j], group_b[j]), on the tensor grid xi1 x xi2
/// (row-major in xi1).
struct PairCf {
  std::vector<double> xi1;
  std::vector<double> xi2;
  std::vector<cplx> values;
  std::vector<double> se;
};
PairCf pair_ecf(const VelocityEnsemble& ens, const std::vector<std::size_t>& group_a,
                const std::vector<std::size_t>& group_b, const std::vector<double>& xi1,
                const std::vector<double>& xi2);

struct ChaosRow {
  std::size_t k = 0;
  double err1_A = 0.0;
  double err1_B = 0.0;
  double err2 = 0.0;
  double se1_A = 0.0;
  double se1_B = 0.0;
  double se2 = 0.0;
};

struct ChaosGridSpec {
  std::size_t line_stride = 4;    // every stride-th ODE node with 0 < xi <= line_max
  double line_max = 1.5;
  std::vector<double> pair_nodes = {-1.0, -0.75, -0.5, -0.25, 0.25, 0.5, 0.75, 1.0};
};

/// Errors of the particle marginals against the mixture solution at time t:
/// err1 = sup |marginal - mixture|, err2 = sup |pair cf - fbar x fbarbar|
/// over the pairs (A_j, B_j). One row per entry of `ks`; everything else is
/// taken from `base`.
std::vector<ChaosRow> chaos_error(const ChaosSimConfig& base,
                                  const std::vector<std::size_t>& ks, double t,
                                  const ChaosGridSpec& grid = {});

/// CSV `xi,re_fbar,im_fbar,re_fbarbar,im_fbarbar`.
std::string mixture_csv(const MixtureGrid& g, const std::string& comment = {});
/// CSV `k,err1_A,err1_B,err2,se1_A,se1_B,se2`.
std::string chaos_csv(const std::vector<ChaosRow>& rows, const std::string& comment = {});

}  // namespace kaclab
