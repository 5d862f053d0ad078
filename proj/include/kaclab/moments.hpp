#pragma once

// Closed-form evolution of first and second moments under the Kac
// semigroup (lambda = 1) and their estimation from ensembles.

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "kaclab/kac.hpp"

namespace kaclab {

struct SecondMomentSummary {
  std::size_t n = 0;
  std::vector<double> mean;  // E[v_i]
  std::vector<double> diag;  // E[v_i^2]
  double offdiag_max = 0.0;  // max_{i != j} |E[v_i v_j]|
  double pair12 = 0.0;       // E[v_1 v_2]
  double energy_per_particle = 0.0;
  std::size_t sample_count = 0;

  std::vector<double> se_mean;
  std::vector<double> se_diag;
  double se_pair12 = 0.0;
  double se_energy = 0.0;

  double diag_max() const;
};

/// Rate of the diagonal relaxation, n / (n - 1).
double diagonal_rate(std::size_t n);
/// Decay rate of E[v_1 v_2], (4n - 6) / (n - 1).
double pair_rate(std::size_t n);

/// e^{-tL} (v . xi)^2 evaluated at v.
double evolve_quadratic_form(std::span<const double> v, std::span<const double> xi,
                             double t);

double evolve_pair_correlation(double m12, double t, std::size_t n);

double evolve_diagonal(double m11, double energy_per_particle, double t,
                       std::size_t n);

/// e^{-t} (1 - 1/n) |v|^2 |xi|^2, which dominates
/// |evolve_quadratic_form - |v|^2 |xi|^2 / n|.
double quadratic_deviation_bound(std::span<const double> v,
                                 std::span<const double> xi, double t);

/// E[v_i] decays at rate 2 lambda: Q v_1 = (1 - 2/n) v_1.
std::vector<double> mean_decay(std::span<const double> mean, double t,
                               double lambda = 1.0);

/// Empirical moments with batch-means (32 batches) standard errors.
SecondMomentSummary estimate_moments(const VelocityEnsemble& ens);

/// JSON record {n, t, mean[], diag[], pair12, energy_per_particle, se_*}.
std::string moments_json(const SecondMomentSummary& m, double t);

}  // namespace kaclab
