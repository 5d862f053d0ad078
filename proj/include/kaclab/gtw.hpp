#pragma once

// Characteristic-function machinery for the Fourier-based distance
//   d2(mu, nu) = sup_{xi != 0} |mu^(xi) - nu^(xi)| / |xi|^2,
// with the transform convention mu^(xi) = int e^{-2 pi i xi.v} mu(dv).

#include <complex>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "kaclab/kac.hpp"
#include "kaclab/moments.hpp"

namespace kaclab {

using cplx = std::complex<double>;

/// Frequencies xi = radius * direction for every (direction, radius) pair.
/// Point index = direction_id * radii.size() + radius_id.
class FrequencyGrid {
 public:
  FrequencyGrid(std::size_t n, std::vector<std::vector<double>> directions,
                std::vector<double> radii);

  std::size_t dim() const noexcept { return n_; }
  std::size_t direction_count() const noexcept { return directions_.size(); }
  std::size_t radius_count() const noexcept { return radii_.size(); }
  std::size_t size() const noexcept { return directions_.size() * radii_.size(); }

  const std::vector<std::vector<double>>& directions() const noexcept {
    return directions_;
  }
  const std::vector<double>& radii() const noexcept { return radii_; }
  std::vector<double> point(std::size_t index) const;

  bool operator==(const FrequencyGrid&) const = default;

 private:
  std::size_t n_;
  std::vector<std::vector<double>> directions_;
  std::vector<double> radii_;
};

struct GridSpec {
  std::size_t random_directions = 64;
  std::size_t radius_count = 96;
  double r_min = 1e-2;
  double r_max = 1e2;
};

/// Coordinate axes, the diagonal (1,...,1)/sqrt(n), and pseudo-random unit
/// vectors; radii log-spaced over [r_min, r_max].
FrequencyGrid make_grid(std::size_t n, std::uint64_t seed, const GridSpec& spec = {});

/// Characteristic-function values on a grid. M = 0 marks an analytic source.
struct CfSample {
  FrequencyGrid grid;
  std::vector<cplx> values;
  std::vector<double> se;
  std::size_t sample_count = 0;
};

/// Empirical characteristic function (1/M) sum_s e^{-2 pi i xi.v_s}.
CfSample ecf(const VelocityEnsemble& ens, const FrequencyGrid& grid);

/// Angular average of cos(z cos theta_1) under the sin^{n-2} weight, which
/// equals 0F1(n/2; -z^2/4).
double radial_kernel(std::size_t n, double z);

/// Characteristic function of the angular average R_mu, exact in the angle:
/// (1/M) sum_s radial_kernel(n, 2 pi |v_s| |xi|).
CfSample cf_of_angular_average(const VelocityEnsemble& ens,
                               const FrequencyGrid& grid);

struct D2Report {
  double value = 0.0;
  double se = 0.0;
  std::vector<double> argmax_direction;
  double argmax_radius = 0.0;  // 0 when the small-xi analytic term wins
  bool small_xi = false;
};

/// Below this radius |Delta cf| / |xi|^2 is replaced by its quadratic limit.
inline constexpr double kSmallXiRadius = 1e-2;

/// Grid estimate of d2 between two measures given their characteristic
/// functions and second moments. Off-diagonal moments are taken as
/// exchangeable (all equal to pair12). Throws NumericalError when either mean
/// is away from zero by more than 3 SE (d2 is infinite then).
D2Report d2_estimate(const CfSample& a, const CfSample& b,
                     const SecondMomentSummary& mom_a,
                     const SecondMomentSummary& mom_b);

/// d2(mu, R_mu) from one ensemble, using the paired difference
/// e^{-2 pi i xi.v} - radial_kernel per sample. Radii whose trivial bound
/// 2 / r^2 cannot beat the running supremum are skipped.
D2Report d2_to_angular_average(const VelocityEnsemble& ens,
                               const FrequencyGrid& grid);

/// CSV `direction_id,radius,re,im,se`.
std::string cf_csv(const CfSample& cf, const std::string& comment = {});
/// JSON {value, se, argmax_direction, argmax_radius}.
std::string d2_json(const D2Report& r);

}  // namespace kaclab
