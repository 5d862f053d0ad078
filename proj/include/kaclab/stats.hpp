#pragma once

#include <cmath>
#include <cstddef>
#include <span>

namespace kaclab {

/// A Monte Carlo estimate with its standard error.
struct Estimate {
  double value = 0.0;
  double se = 0.0;
};

/// Mean of `values` with a batch-means standard error (contiguous batches).
/// Falls back to fewer batches when there are fewer than `batches` values.
Estimate batch_means(std::span<const double> values, std::size_t batches = 32);

/// Mean with the plain i.i.d. standard error sd / sqrt(M).
Estimate iid_mean(std::span<const double> values);

/// Weighted least-squares slope of y = slope * x through the origin.
struct SlopeFit {
  double slope = 0.0;
  double se = 0.0;
};
SlopeFit fit_through_origin(std::span<const double> x, std::span<const double> y,
                            std::span<const double> sigma);

inline double combined_se(double a, double b) { return std::hypot(a, b); }

}  // namespace kaclab
