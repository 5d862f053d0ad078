#include "kaclab/gtw.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numbers>
#include <random>

#include <json.hpp>

#include "kaclab/errors.hpp"
#include "kaclab/rng.hpp"
#include "kaclab/stats.hpp"

namespace kaclab {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

double norm2(std::span<const double> v) {
  double acc = 0.0;
  for (double x : v) acc += x * x;
  return acc;
}

double dot(std::span<const double> a, std::span<const double> b) {
  double acc = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) acc += a[i] * b[i];
  return acc;
}

// Series for 0F1(a; -z^2/4); adequate while the alternating terms stay
// below ~e^z / sqrt(z) relative to the result.
double kernel_series(double a, double z) {
  const double x = -0.25 * z * z;
  double term = 1.0;
  double sum = 1.0;
  for (int k = 1; k < 500; ++k) {
    term *= x / (static_cast<double>(k) * (a + k - 1.0));
    sum += term;
    if (std::abs(term) <= 1e-16 * std::max(1.0, std::abs(sum)) &&
        static_cast<double>(k) > 0.5 * z)
      break;
  }
  return sum;
}

// (2l+1)!! j_l(z) / z^l with upward recurrence from j_0, j_1 (stable, z > l).
double kernel_spherical(unsigned l, double z) {
  const double s = std::sin(z);
  const double c = std::cos(z);
  double jm = s / z;
  if (l == 0) return jm;
  double j = s / (z * z) - c / z;
  for (unsigned k = 1; k < l; ++k) {
    const double next = (2.0 * k + 1.0) / z * j - jm;
    jm = j;
    j = next;
  }
  double scale = 1.0;
  for (unsigned k = 1; k <= l; ++k) scale *= (2.0 * k + 1.0) / z;
  return scale * j;
}

// nu! (2/z)^nu J_nu(z) for integer nu.
double kernel_cylindrical(unsigned nu, double z) {
  double scale = 1.0;
  for (unsigned k = 1; k <= nu; ++k) scale *= 2.0 * k / z;
  return scale * ::jn(static_cast<int>(nu), z);
}

void check_centered(const SecondMomentSummary& m, const char* which) {
  double mean2 = 0.0, se2 = 0.0;
  for (std::size_t i = 0; i < m.mean.size(); ++i) {
    mean2 += m.mean[i] * m.mean[i];
    se2 += m.se_mean[i] * m.se_mean[i];
  }
  if (std::sqrt(mean2) > 3.0 * std::sqrt(se2) + 1e-12)
    throw NumericalError(std::string("d2 is infinite: the mean of ") + which +
                         " is not zero within 3 SE");
}

// (2 pi)^2 / 2 * eta^T (C_a - C_b) eta with exchangeable off-diagonals.
Estimate small_xi_term(std::span<const double> eta, const SecondMomentSummary& a,
                       const SecondMomentSummary& b) {
  const std::size_t n = eta.size();
  double sum = 0.0, sum2 = 0.0, value = 0.0, var = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double w = eta[i] * eta[i];
    sum += eta[i];
    sum2 += w;
    value += w * (a.diag[i] - b.diag[i]);
    var += w * w * (a.se_diag[i] * a.se_diag[i] + b.se_diag[i] * b.se_diag[i]);
  }
  if (n >= 2) {
    const double cross = sum * sum - sum2;
    value += cross * (a.pair12 - b.pair12);
    var += cross * cross * (a.se_pair12 * a.se_pair12 + b.se_pair12 * b.se_pair12);
  }
  const double c = 0.5 * kTwoPi * kTwoPi;
  return {c * std::abs(value), c * std::sqrt(var)};
}

}  // namespace

FrequencyGrid::FrequencyGrid(std::size_t n,
                             std::vector<std::vector<double>> directions,
                             std::vector<double> radii)
    : n_(n), directions_(std::move(directions)), radii_(std::move(radii)) {
  require(n >= 1, "grid dimension must be >= 1");
  require(!directions_.empty() && !radii_.empty(), "grid must be nonempty");
  for (const auto& d : directions_) {
    require(d.size() == n, "grid direction has wrong dimension");
    require(std::abs(std::sqrt(norm2(d)) - 1.0) <= 1e-12,
            "grid directions must be unit vectors");
  }
  for (std::size_t k = 0; k < radii_.size(); ++k) {
    require(radii_[k] > 0.0, "grid radii must be positive");
    if (k > 0) require(radii_[k] > radii_[k - 1], "grid radii must increase");
  }
}

std::vector<double> FrequencyGrid::point(std::size_t index) const {
  const auto& d = directions_[index / radii_.size()];
  const double r = radii_[index % radii_.size()];
  std::vector<double> xi(d);
  for (double& x : xi) x *= r;
  return xi;
}

FrequencyGrid make_grid(std::size_t n, std::uint64_t seed, const GridSpec& spec) {
  require(spec.radius_count >= 1 && spec.r_min > 0.0 && spec.r_max >= spec.r_min,
          "invalid radius range");
  std::vector<std::vector<double>> dirs;
  for (std::size_t i = 0; i < n; ++i) {
    std::vector<double> e(n, 0.0);
    e[i] = 1.0;
    dirs.push_back(std::move(e));
  }
  dirs.emplace_back(n, 1.0 / std::sqrt(static_cast<double>(n)));
  for (std::size_t k = 0; k < spec.random_directions; ++k) {
    Xoshiro256pp rng(seed, k, Stage::Grid);
    std::normal_distribution<double> normal;
    std::vector<double> d(n);
    double s2 = 0.0;
    while (s2 == 0.0) {
      s2 = 0.0;
      for (double& x : d) {
        x = normal(rng);
        s2 += x * x;
      }
    }
    const double inv = 1.0 / std::sqrt(s2);
    for (double& x : d) x *= inv;
    dirs.push_back(std::move(d));
  }
  std::vector<double> radii(spec.radius_count);
  if (spec.radius_count == 1) {
    radii[0] = spec.r_min;
  } else {
    const double lo = std::log(spec.r_min);
    const double step = (std::log(spec.r_max) - lo) /
                        static_cast<double>(spec.radius_count - 1);
    for (std::size_t k = 0; k < spec.radius_count; ++k)
      radii[k] = std::exp(lo + step * static_cast<double>(k));
  }
  return FrequencyGrid(n, std::move(dirs), std::move(radii));
}

CfSample ecf(const VelocityEnsemble& ens, const FrequencyGrid& grid) {
  require(grid.dim() == ens.dim(), "grid and ensemble dimensions differ");
  require(!ens.empty(), "ecf of an empty ensemble");
  const std::size_t m = ens.size();
  const std::size_t nr = grid.radius_count();
  const auto nd = static_cast<std::ptrdiff_t>(grid.direction_count());
  CfSample out{grid, std::vector<cplx>(grid.size()), std::vector<double>(grid.size()), m};

#pragma omp parallel for schedule(dynamic)
  for (std::ptrdiff_t d = 0; d < nd; ++d) {
    const auto& eta = grid.directions()[static_cast<std::size_t>(d)];
    std::vector<double> re(nr, 0.0), im(nr, 0.0);
    for (std::size_t s = 0; s < m; ++s) {
      const double p = kTwoPi * dot(eta, ens.sample(s));
      for (std::size_t r = 0; r < nr; ++r) {
        const double x = p * grid.radii()[r];
        re[r] += std::cos(x);
        im[r] -= std::sin(x);
      }
    }
    for (std::size_t r = 0; r < nr; ++r) {
      const std::size_t idx = static_cast<std::size_t>(d) * nr + r;
      const cplx v(re[r] / static_cast<double>(m), im[r] / static_cast<double>(m));
      out.values[idx] = v;
      out.se[idx] = m > 1 ? std::sqrt(std::max(0.0, 1.0 - std::norm(v)) /
                                      static_cast<double>(m - 1))
                          : 0.0;
    }
  }
  return out;
}

double radial_kernel(std::size_t n, double z) {
  require(n >= 2, "radial_kernel needs n >= 2");
  require(z >= 0.0, "radial_kernel needs z >= 0");
  if (z == 0.0) return 1.0;
  const double a = 0.5 * static_cast<double>(n);
  const double nu = a - 1.0;
  if (z <= 12.0) return kernel_series(a, z);
  if (nu <= 0.25 * z) {
    if (n % 2 == 1) return kernel_spherical(static_cast<unsigned>((n - 3) / 2), z);
    return kernel_cylindrical(static_cast<unsigned>(n / 2 - 1), z);
  }
  // Large order relative to z: general Bessel route in log space.
  const double j = std::cyl_bessel_j(nu, z);
  return std::exp(std::lgamma(a) + nu * std::log(2.0 / z)) * j;
}

CfSample cf_of_angular_average(const VelocityEnsemble& ens,
                               const FrequencyGrid& grid) {
  require(grid.dim() == ens.dim(), "grid and ensemble dimensions differ");
  require(!ens.empty(), "angular-average cf of an empty ensemble");
  const std::size_t n = ens.dim();
  require(n >= 2, "angular average needs n >= 2");
  const std::size_t m = ens.size();
  const std::size_t nr = grid.radius_count();
  CfSample out{grid, std::vector<cplx>(grid.size()), std::vector<double>(grid.size()), m};

  std::vector<double> norms(m);
  for (std::size_t s = 0; s < m; ++s) norms[s] = std::sqrt(norm2(ens.sample(s)));

  std::vector<double> mean(nr), se(nr);
  const auto nri = static_cast<std::ptrdiff_t>(nr);
#pragma omp parallel for schedule(dynamic)
  for (std::ptrdiff_t r = 0; r < nri; ++r) {
    const double scale = kTwoPi * grid.radii()[static_cast<std::size_t>(r)];
    double acc = 0.0, acc2 = 0.0;
    for (std::size_t s = 0; s < m; ++s) {
      const double k = radial_kernel(n, scale * norms[s]);
      acc += k;
      acc2 += k * k;
    }
    const double mu = acc / static_cast<double>(m);
    mean[static_cast<std::size_t>(r)] = mu;
    se[static_cast<std::size_t>(r)] =
        m > 1 ? std::sqrt(std::max(0.0, acc2 / static_cast<double>(m) - mu * mu) /
                          static_cast<double>(m - 1))
              : 0.0;
  }
  for (std::size_t d = 0; d < grid.direction_count(); ++d)
    for (std::size_t r = 0; r < nr; ++r) {
      out.values[d * nr + r] = cplx(mean[r], 0.0);
      out.se[d * nr + r] = se[r];
    }
  return out;
}

D2Report d2_estimate(const CfSample& a, const CfSample& b,
                     const SecondMomentSummary& mom_a,
                     const SecondMomentSummary& mom_b) {
  require(a.grid == b.grid, "d2_estimate needs both samples on the same grid");
  const std::size_t n = a.grid.dim();
  require(mom_a.n == n && mom_b.n == n, "moment summaries have the wrong dimension");
  check_centered(mom_a, "the first measure");
  check_centered(mom_b, "the second measure");

  D2Report best;
  const std::size_t nr = a.grid.radius_count();
  for (std::size_t d = 0; d < a.grid.direction_count(); ++d) {
    const auto& eta = a.grid.directions()[d];
    const Estimate small = small_xi_term(eta, mom_a, mom_b);
    if (small.value > best.value) {
      best = {small.value, small.se, eta, 0.0, true};
    }
    for (std::size_t r = 0; r < nr; ++r) {
      const double rad = a.grid.radii()[r];
      if (rad < kSmallXiRadius) continue;
      const std::size_t idx = d * nr + r;
      const double r2 = rad * rad;
      const double ratio = std::abs(a.values[idx] - b.values[idx]) / r2;
      if (ratio > best.value) {
        best = {ratio, std::hypot(a.se[idx], b.se[idx]) / r2, eta, rad, false};
      }
    }
  }
  if (best.argmax_direction.empty()) best.argmax_direction = a.grid.directions()[0];
  return best;
}

D2Report d2_to_angular_average(const VelocityEnsemble& ens,
                               const FrequencyGrid& grid) {
  require(grid.dim() == ens.dim(), "grid and ensemble dimensions differ");
  const std::size_t n = ens.dim();
  require(n >= 2, "d2_to_angular_average needs n >= 2");
  const SecondMomentSummary mom = estimate_moments(ens);
  check_centered(mom, "the ensemble");

  const std::size_t m = ens.size();
  const std::size_t nd = grid.direction_count();
  const double md = static_cast<double>(m);
  const double nn = static_cast<double>(n);

  std::vector<double> norms(m), energy(m);
  for (std::size_t s = 0; s < m; ++s) {
    energy[s] = norm2(ens.sample(s));
    norms[s] = std::sqrt(energy[s]);
  }

  D2Report best;
  // Small-xi limit along eta: (2 pi)^2 / 2 |E[(eta.v)^2] - E|v|^2 / n|, the
  // second-moment mismatch between mu and R_mu.
  {
    std::vector<double> q(m);
    for (std::size_t d = 0; d < nd; ++d) {
      const auto& eta = grid.directions()[d];
      for (std::size_t s = 0; s < m; ++s) {
        const double p = dot(eta, ens.sample(s));
        q[s] = p * p - energy[s] / nn;
      }
      const Estimate e = iid_mean(q);
      const double c = 0.5 * kTwoPi * kTwoPi;
      if (c * std::abs(e.value) > best.value)
        best = {c * std::abs(e.value), c * e.se, eta, 0.0, true};
    }
  }

  std::vector<double> proj(nd);
  std::vector<double> sre(nd), sim(nd), sabs(nd);
  for (std::size_t r = 0; r < grid.radius_count(); ++r) {
    const double rad = grid.radii()[r];
    if (rad < kSmallXiRadius) continue;
    const double r2 = rad * rad;
    // |Delta cf| <= 2, so this radius cannot raise the supremum.
    if (2.0 / r2 <= best.value) break;
    std::fill(sre.begin(), sre.end(), 0.0);
    std::fill(sim.begin(), sim.end(), 0.0);
    std::fill(sabs.begin(), sabs.end(), 0.0);
    const double scale = kTwoPi * rad;
    for (std::size_t s = 0; s < m; ++s) {
      const auto v = ens.sample(s);
      const double kern = radial_kernel(n, scale * norms[s]);
      for (std::size_t d = 0; d < nd; ++d) {
        const double x = scale * dot(grid.directions()[d], v);
        const double dr = std::cos(x) - kern;
        const double di = std::sin(x);
        sre[d] += dr;
        sim[d] += di;
        sabs[d] += dr * dr + di * di;
      }
    }
    for (std::size_t d = 0; d < nd; ++d) {
      const double mr = sre[d] / md;
      const double mi = sim[d] / md;
      const double mod2 = mr * mr + mi * mi;
      const double ratio = std::sqrt(mod2) / r2;
      if (ratio > best.value) {
        const double var = m > 1 ? std::max(0.0, sabs[d] / md - mod2) / (md - 1.0) : 0.0;
        best = {ratio, std::sqrt(var) / r2, grid.directions()[d], rad, false};
      }
    }
  }
  if (best.argmax_direction.empty()) best.argmax_direction = grid.directions()[0];
  return best;
}

std::string cf_csv(const CfSample& cf, const std::string& comment) {
  std::string out;
  if (!comment.empty()) out += "# " + comment + "\n";
  out += "direction_id,radius,re,im,se\n";
  char buf[160];
  const std::size_t nr = cf.grid.radius_count();
  for (std::size_t idx = 0; idx < cf.grid.size(); ++idx) {
    std::snprintf(buf, sizeof buf, "%zu,%.17g,%.17g,%.17g,%.17g\n", idx / nr,
                  cf.grid.radii()[idx % nr], cf.values[idx].real(),
                  cf.values[idx].imag(), cf.se[idx]);
    out += buf;
  }
  return out;
}

std::string d2_json(const D2Report& r) {
  nlohmann::ordered_json j;
  j["value"] = r.value;
  j["se"] = r.se;
  j["argmax_direction"] = r.argmax_direction;
  j["argmax_radius"] = r.argmax_radius;
  j["small_xi"] = r.small_xi;
  return j.dump(2);
}

}  // namespace kaclab
