#include "kaclab/bounds.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numbers>

#include "kaclab/errors.hpp"

namespace kaclab {

namespace {
constexpr double kFourPiSq = 4.0 * std::numbers::pi * std::numbers::pi;
}

void BoundInputs::validate() const {
  require(n >= 2, "n must be >= 2");
  require(t >= 0.0, "t must be >= 0");
  require(energy_per_particle >= 0.0 && diag_max >= 0.0,
          "energy and diag_max must be >= 0");
  require(std::abs(pair12) <= diag_max * (1.0 + 1e-12) + 1e-15,
          "|pair12| must not exceed diag_max");
}

double spectral_gap(std::size_t n) {
  require(n >= 2, "spectral_gap needs n >= 2");
  const double nd = static_cast<double>(n);
  return (nd + 2.0) / (2.0 * (nd - 1.0));
}

double prop1_symmetric_bound(const BoundInputs& in) {
  in.validate();
  const double nd = static_cast<double>(in.n);
  const double eb = std::exp(-nd / (nd - 1.0) * in.t);
  const double ea = std::exp(-(4.0 * nd - 6.0) / (nd - 1.0) * in.t);
  return 0.5 * kFourPiSq *
         ((2.0 - eb) * in.energy_per_particle + eb * in.diag_max +
          (nd - 1.0) * ea * in.offdiag_max);
}

double prop1_compare_bound(std::size_t n, double t, double wtv_energy) {
  require(n >= 2, "n must be >= 2");
  require(t >= 0.0, "t must be >= 0");
  require(wtv_energy >= 0.0, "wtv_energy must be >= 0");
  const double nd = static_cast<double>(n);
  return 0.5 * kFourPiSq * ((nd - 1.0) * std::exp(-t) + 1.0) * wtv_energy;
}

double lp_constant(std::size_t n, double t, double m11, double pair12) {
  require(n >= 2, "n must be >= 2");
  require(t >= 0.0, "t must be >= 0");
  require(m11 >= 0.0, "m11 must be >= 0");
  const double nd = static_cast<double>(n);
  const double ea = std::exp(-(4.0 * nd - 6.0) / (nd - 1.0) * t);
  return kFourPiSq * (2.0 * m11 + (nd - 1.0) * ea * std::abs(pair12));
}

double thm1_envelope(const BoundInputs& in, EnvelopeExponent exponent) {
  in.validate();
  const double nd = static_cast<double>(in.n);
  const double denom = exponent == EnvelopeExponent::NPlus3 ? nd + 3.0 : nd - 1.0;
  const double rate = 4.0 * spectral_gap(in.n) / denom;
  const double branch =
      kThm1Factor * lp_constant(in.n, in.t, in.m11, in.pair12) * std::exp(-rate * in.t);
  return in.d2_initial ? std::min(branch, *in.d2_initial) : branch;
}

double correlated_lower_bound(std::size_t n, double pair12) {
  require(n >= 2, "n must be >= 2");
  return (static_cast<double>(n) - 1.0) * 0.5 * kFourPiSq * std::abs(pair12);
}

std::string envelope_csv(const std::vector<EnvelopeRow>& rows,
                         const std::string& comment) {
  std::string out;
  if (!comment.empty()) out += "# " + comment + "\n";
  out += "t,envelope_thm1,envelope_prop1,d2_estimate,d2_se\n";
  char buf[160];
  for (const auto& r : rows) {
    std::snprintf(buf, sizeof buf, "%.17g,%.17g,%.17g,%.17g,%.17g\n", r.t,
                  r.envelope_thm1, r.envelope_prop1, r.d2_estimate, r.d2_se);
    out += buf;
  }
  return out;
}

}  // namespace kaclab
