#pragma once

// Initial ensembles used by the CLI and the acceptance runs.

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "kaclab/kac.hpp"

namespace kaclab {

struct InitialSpec {
  enum class Kind { Gaussian, Bimodal, Point, Sphere, Line };
  Kind kind = Kind::Gaussian;
  double variance = 1.0;        // Gaussian, Line (variance of the common value)
  double centre = 1.0;          // Bimodal
  double width = 0.3;           // Bimodal component standard deviation
  double radius = 1.0;          // Sphere
  std::vector<double> point;    // Point
};

/// Parses "gaussian", "bimodal", "point", "sphere" or "line".
InitialSpec::Kind parse_initial_kind(const std::string& name);

/// Gaussian: i.i.d. N(0, variance) coordinates. Bimodal: i.i.d. coordinates
/// +-centre + N(0, width^2) with fair signs. Point: every sample equals
/// `point`. Sphere: uniform on S^{n-1}(radius). Line: v_1 = ... = v_n = X
/// with X ~ N(0, variance).
VelocityEnsemble make_initial(const InitialSpec& spec, std::size_t n,
                              std::size_t count, std::uint64_t seed);

}  // namespace kaclab
