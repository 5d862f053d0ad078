#include "kaclab/moments.hpp"

#include <algorithm>
#include <cmath>

#include <json.hpp>

#include "kaclab/errors.hpp"
#include "kaclab/stats.hpp"

namespace kaclab {

double SecondMomentSummary::diag_max() const {
  return diag.empty() ? 0.0 : *std::max_element(diag.begin(), diag.end());
}

double diagonal_rate(std::size_t n) {
  require(n >= 2, "n must be >= 2");
  const double nd = static_cast<double>(n);
  return nd / (nd - 1.0);
}

double pair_rate(std::size_t n) {
  require(n >= 2, "n must be >= 2");
  const double nd = static_cast<double>(n);
  return (4.0 * nd - 6.0) / (nd - 1.0);
}

double evolve_quadratic_form(std::span<const double> v, std::span<const double> xi,
                             double t) {
  require(t >= 0.0, "t must be >= 0");
  require(v.size() == xi.size(), "v and xi dimensions differ");
  const std::size_t n = v.size();
  require(n >= 2, "n must be >= 2");
  double v2 = 0.0, xi2 = 0.0, diag = 0.0, dot = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    v2 += v[i] * v[i];
    xi2 += xi[i] * xi[i];
    diag += xi[i] * xi[i] * v[i] * v[i];
    dot += xi[i] * v[i];
  }
  const double cross = dot * dot - diag;  // sum_{i != j} xi_i xi_j v_i v_j
  const double eb = std::exp(-diagonal_rate(n) * t);
  const double ea = std::exp(-pair_rate(n) * t);
  return -std::expm1(-diagonal_rate(n) * t) * v2 * xi2 / static_cast<double>(n) +
         eb * diag + ea * cross;
}

double evolve_pair_correlation(double m12, double t, std::size_t n) {
  require(t >= 0.0, "t must be >= 0");
  return m12 * std::exp(-pair_rate(n) * t);
}

double evolve_diagonal(double m11, double energy_per_particle, double t,
                       std::size_t n) {
  require(t >= 0.0, "t must be >= 0");
  require(energy_per_particle >= 0.0, "energy per particle must be >= 0");
  const double rate = diagonal_rate(n);
  return std::exp(-rate * t) * m11 - std::expm1(-rate * t) * energy_per_particle;
}

double quadratic_deviation_bound(std::span<const double> v,
                                 std::span<const double> xi, double t) {
  require(t >= 0.0, "t must be >= 0");
  require(v.size() == xi.size(), "v and xi dimensions differ");
  const double n = static_cast<double>(v.size());
  double v2 = 0.0, xi2 = 0.0;
  for (std::size_t i = 0; i < v.size(); ++i) {
    v2 += v[i] * v[i];
    xi2 += xi[i] * xi[i];
  }
  return std::exp(-t) * (1.0 - 1.0 / n) * v2 * xi2;
}

std::vector<double> mean_decay(std::span<const double> mean, double t,
                               double lambda) {
  require(t >= 0.0, "t must be >= 0");
  const double f = std::exp(-2.0 * lambda * t);
  std::vector<double> out(mean.begin(), mean.end());
  for (double& x : out) x *= f;
  return out;
}

SecondMomentSummary estimate_moments(const VelocityEnsemble& ens) {
  require(ens.size() >= 2, "estimate_moments needs M >= 2");
  const std::size_t n = ens.dim();
  const std::size_t m = ens.size();
  SecondMomentSummary out;
  out.n = n;
  out.sample_count = m;
  out.mean.resize(n);
  out.diag.resize(n);
  out.se_mean.resize(n);
  out.se_diag.resize(n);

  std::vector<double> column(m);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t s = 0; s < m; ++s) column[s] = ens.sample(s)[i];
    const Estimate e1 = batch_means(column);
    out.mean[i] = e1.value;
    out.se_mean[i] = e1.se;
    for (std::size_t s = 0; s < m; ++s) column[s] *= column[s];
    const Estimate e2 = batch_means(column);
    out.diag[i] = e2.value;
    out.se_diag[i] = e2.se;
  }

  if (n >= 2) {
    std::vector<double> acc(n * n, 0.0);
    for (std::size_t s = 0; s < m; ++s) {
      const auto v = ens.sample(s);
      for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j) acc[i * n + j] += v[i] * v[j];
    }
    double worst = 0.0;
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = i + 1; j < n; ++j)
        worst = std::max(worst, std::abs(acc[i * n + j] / static_cast<double>(m)));
    out.offdiag_max = worst;

    for (std::size_t s = 0; s < m; ++s) column[s] = ens.sample(s)[0] * ens.sample(s)[1];
    const Estimate p = batch_means(column);
    out.pair12 = p.value;
    out.se_pair12 = p.se;
  }

  for (std::size_t s = 0; s < m; ++s) {
    double e = 0.0;
    for (double x : ens.sample(s)) e += x * x;
    column[s] = e / static_cast<double>(n);
  }
  out.se_energy = batch_means(column).se;
  double diag_sum = 0.0;
  for (double d : out.diag) diag_sum += d;
  out.energy_per_particle = diag_sum / static_cast<double>(n);
  return out;
}

std::string moments_json(const SecondMomentSummary& m, double t) {
  nlohmann::ordered_json j;
  j["n"] = m.n;
  j["t"] = t;
  j["sample_count"] = m.sample_count;
  j["mean"] = m.mean;
  j["diag"] = m.diag;
  j["pair12"] = m.pair12;
  j["offdiag_max"] = m.offdiag_max;
  j["energy_per_particle"] = m.energy_per_particle;
  j["se_mean"] = m.se_mean;
  j["se_diag"] = m.se_diag;
  j["se_pair12"] = m.se_pair12;
  j["se_energy"] = m.se_energy;
  return j.dump(2);
}

}  // namespace kaclab
