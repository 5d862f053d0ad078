#pragma once

// Kac collision process: exact pair rotations, Poisson-clock simulation of
// ensembles, and the strong (resampling) thermostat on an index subset.

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "kaclab/rng.hpp"

namespace kaclab {

/// M sampled velocity vectors in R^n, stored row-major.
class VelocityEnsemble {
 public:
  VelocityEnsemble() = default;
  VelocityEnsemble(std::size_t n, std::size_t count, std::uint64_t master_seed,
                   double time = 0.0);
  VelocityEnsemble(std::size_t n, std::vector<double> flat,
                   std::uint64_t master_seed, double time = 0.0);

  std::size_t dim() const noexcept { return n_; }
  std::size_t size() const noexcept { return count_; }
  bool empty() const noexcept { return count_ == 0; }
  std::uint64_t master_seed() const noexcept { return master_seed_; }
  double time() const noexcept { return time_; }
  void set_time(double t) noexcept { time_ = t; }

  std::span<double> sample(std::size_t s) noexcept {
    return {data_.data() + s * n_, n_};
  }
  std::span<const double> sample(std::size_t s) const noexcept {
    return {data_.data() + s * n_, n_};
  }
  const std::vector<double>& flat() const noexcept { return data_; }

  /// Squared norm of every sample.
  std::vector<double> energies() const;

  /// Throws ValidationError unless every entry is finite and M >= 1.
  void validate() const;

  bool operator==(const VelocityEnsemble&) const = default;

 private:
  std::size_t n_ = 0;
  std::size_t count_ = 0;
  std::vector<double> data_;
  std::uint64_t master_seed_ = 0;
  double time_ = 0.0;
};

/// One Kac collision: 1-based indices i < j and rotation angle theta.
struct CollisionEvent {
  std::size_t i = 1;
  std::size_t j = 2;
  double theta = 0.0;
  double t = 0.0;
};

/// Rates and the thermostated index set A (1-based; empty for pure Kac).
struct ThermostatConfig {
  double lambda = 1.0;
  double eta = 0.0;
  double beta = 1.0;
  std::vector<std::size_t> thermostated;

  void validate(std::size_t n) const;
  bool pure() const noexcept { return eta == 0.0 || thermostated.empty(); }
};

/// In-place rotation of coordinates (i, j) (1-based) by theta.
void rotate_pair_inplace(std::span<double> v, std::size_t i, std::size_t j,
                         double theta);

/// (v_i, v_j) -> (v_i cos - v_j sin, v_i sin + v_j cos); other entries kept.
std::vector<double> rotate_pair(std::span<const double> v, std::size_t i,
                                std::size_t j, double theta);

/// Evolves every sample independently over a duration t. Collisions arrive
/// at rate n*lambda; each thermostated index is resampled from g_beta at
/// rate eta. Bitwise reproducible for identical (ens, t, cfg, seed).
VelocityEnsemble simulate(const VelocityEnsemble& ens, double t,
                          const ThermostatConfig& cfg, std::uint64_t seed);

/// In-place variant; sample s draws from stream first_stream + s, so an
/// ensemble processed in consecutive chunks matches one processed whole.
void simulate_inplace(VelocityEnsemble& ens, double t, const ThermostatConfig& cfg,
                      std::uint64_t seed, std::uint64_t first_stream = 0);

/// M i.i.d. points uniform on the sphere of radius r in R^n.
VelocityEnsemble sample_sphere(std::size_t n, double r, std::size_t count,
                               std::uint64_t seed);

/// Replaces each sample by a uniform point on the sphere through it.
VelocityEnsemble angular_average_resample(const VelocityEnsemble& ens,
                                          std::uint64_t seed);

/// Draws one uniformly random collision on n particles (time left at 0).
CollisionEvent random_collision(std::size_t n, Xoshiro256pp& rng);

/// Ensemble snapshot CSV: header `sample_id,v1,...,vn`, 17 significant
/// digits. Lines starting with '#' are written before the header when a
/// comment is supplied and ignored on read.
std::string to_csv(const VelocityEnsemble& ens, const std::string& comment = {});
VelocityEnsemble ensemble_from_csv(const std::string& text,
                                   std::uint64_t master_seed = 0);

}  // namespace kaclab
