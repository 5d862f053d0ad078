#pragma once

// Closed-form envelopes for d2(e^{-tL} mu, R_mu) at lambda = 1.

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

namespace kaclab {

struct BoundInputs {
  std::size_t n = 2;
  double t = 0.0;
  double energy_per_particle = 0.0;  // int |v|^2 / n
  double diag_max = 0.0;             // max_i int v_i^2
  double offdiag_max = 0.0;          // max_{i != j} |int v_i v_j|
  double pair12 = 0.0;               // int v_1 v_2
  double m11 = 0.0;                  // int v_1^2
  std::optional<double> d2_initial;  // d2(mu, R_mu) if known

  void validate() const;
};

/// Which exponent the Theorem-1 style envelope uses: 4 lambda_1 / (n + 3)
/// (supported by the proof) or the 4 lambda_1 / (n - 1) variant.
enum class EnvelopeExponent { NPlus3, NMinus1 };

inline constexpr double kThm1Factor = 6.64;

/// L2 spectral gap (n + 2) / (2 (n - 1)).
double spectral_gap(std::size_t n);

/// (2pi)^2/2 [(2 - e^{-bt}) E + e^{-bt} diag_max + (n-1) e^{-at} offdiag_max],
/// b = n/(n-1), a = (4n-6)/(n-1).
double prop1_symmetric_bound(const BoundInputs& in);

/// (2pi)^2/2 ((n-1) e^{-t} + 1) * wtv_energy, where wtv_energy is the caller's
/// value of int |mu - nu|(dv) |v|^2 / n.
double prop1_compare_bound(std::size_t n, double t, double wtv_energy);

/// Lp(t) = (2pi)^2 [2 m11 + (n-1) e^{-(4n-6)t/(n-1)} |pair12|].
double lp_constant(std::size_t n, double t, double m11, double pair12);

/// min(6.64 Lp(t) e^{-4 lambda_1 t / (n+3)}, d2_initial); the exponential
/// branch alone when d2_initial is absent.
double thm1_envelope(const BoundInputs& in,
                     EnvelopeExponent exponent = EnvelopeExponent::NPlus3);

/// (n-1) (2pi)^2 / 2 |pair12|, a lower bound on d2(mu, R_mu) for even,
/// exchangeable, correlated mu.
double correlated_lower_bound(std::size_t n, double pair12);

/// One row of an envelope table.
struct EnvelopeRow {
  double t = 0.0;
  double envelope_thm1 = 0.0;
  double envelope_prop1 = 0.0;
  double d2_estimate = 0.0;
  double d2_se = 0.0;
};

/// CSV `t,envelope_thm1,envelope_prop1,d2_estimate,d2_se`.
std::string envelope_csv(const std::vector<EnvelopeRow>& rows,
                         const std::string& comment = {});

}  // namespace kaclab
