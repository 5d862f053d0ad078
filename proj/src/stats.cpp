#include "kaclab/stats.hpp"

#include <algorithm>

#include "kaclab/errors.hpp"

namespace kaclab {

Estimate batch_means(std::span<const double> values, std::size_t batches) {
  const std::size_t m = values.size();
  require(m >= 1, "batch_means needs at least one value");
  double total = 0.0;
  for (double x : values) total += x;
  const double mean = total / static_cast<double>(m);
  const std::size_t b = std::min(batches, m);
  if (b < 2) return {mean, 0.0};

  // Batch k covers [k*m/b, (k+1)*m/b); sizes differ by at most one.
  double ss = 0.0;
  double weight_sum = 0.0;
  for (std::size_t k = 0; k < b; ++k) {
    const std::size_t lo = k * m / b;
    const std::size_t hi = (k + 1) * m / b;
    double acc = 0.0;
    for (std::size_t s = lo; s < hi; ++s) acc += values[s];
    const double len = static_cast<double>(hi - lo);
    const double bm = acc / len;
    ss += len * (bm - mean) * (bm - mean);
    weight_sum += len;
  }
  // Var(mean) ~ sum_k len_k (bm_k - mean)^2 / ((b - 1) * m)
  const double var = ss / (static_cast<double>(b - 1) * weight_sum);
  return {mean, std::sqrt(var)};
}

Estimate iid_mean(std::span<const double> values) {
  const std::size_t m = values.size();
  require(m >= 1, "iid_mean needs at least one value");
  double total = 0.0;
  for (double x : values) total += x;
  const double mean = total / static_cast<double>(m);
  if (m < 2) return {mean, 0.0};
  double ss = 0.0;
  for (double x : values) ss += (x - mean) * (x - mean);
  return {mean, std::sqrt(ss / static_cast<double>(m - 1) / static_cast<double>(m))};
}

SlopeFit fit_through_origin(std::span<const double> x, std::span<const double> y,
                            std::span<const double> sigma) {
  require(x.size() == y.size() && y.size() == sigma.size() && !x.empty(),
          "fit_through_origin: mismatched inputs");
  double sxx = 0.0, sxy = 0.0;
  for (std::size_t k = 0; k < x.size(); ++k) {
    require(sigma[k] > 0.0, "fit_through_origin: sigma must be positive");
    const double w = 1.0 / (sigma[k] * sigma[k]);
    sxx += w * x[k] * x[k];
    sxy += w * x[k] * y[k];
  }
  require(sxx > 0.0, "fit_through_origin: degenerate abscissae");
  return {sxy / sxx, 1.0 / std::sqrt(sxx)};
}

}  // namespace kaclab
