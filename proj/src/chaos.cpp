#include "kaclab/chaos.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <numbers>
#include <random>

#include "kaclab/errors.hpp"

namespace kaclab {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr std::size_t kThetaNodes = 64;

struct Stencil {
  std::array<std::size_t, 4> idx;
  std::array<double, 4> w;
};

// Precomputed interpolation of grid data at xi_j cos(theta_q) and
// xi_j sin(theta_q). Negative arguments reuse the stencil of |x| with
// mirrored nodes, which keeps Hermitian data exactly Hermitian.
class MixtureOperator {
 public:
  explicit MixtureOperator(const MixtureGrid& g)
      : p_(g.params), size_(g.xi.size()) {
    require(size_ >= 5 && size_ % 2 == 1, "mixture grid needs an odd number (>= 5) of points");
    const std::size_t N = size_ - 1;
    const double X = g.xi.back();
    const double h = 2.0 * X / static_cast<double>(N);
    stencils_a_.resize(size_ * kThetaNodes);
    stencils_b_.resize(size_ * kThetaNodes);
    ga_.resize(size_ * kThetaNodes);
    gb_.resize(size_ * kThetaNodes);
    for (std::size_t j = 0; j < size_; ++j) {
      for (std::size_t q = 0; q < kThetaNodes; ++q) {
        const double th = 2.0 * kPi * static_cast<double>(q) / kThetaNodes;
        const double a = g.xi[j] * std::cos(th);
        const double b = g.xi[j] * std::sin(th);
        const std::size_t k = j * kThetaNodes + q;
        stencils_a_[k] = make_stencil(a, h, N);
        stencils_b_[k] = make_stencil(b, h, N);
        ga_[k] = thermostat_cf(a, p_.beta);
        gb_[k] = thermostat_cf(b, p_.beta);
      }
    }
    g_.resize(size_);
    for (std::size_t j = 0; j < size_; ++j) g_[j] = thermostat_cf(g.xi[j], p_.beta);
  }

  const std::vector<double>& gaussian() const { return g_; }

  // Time derivative of the deviations D = F - g_beta. The g_beta x g_beta
  // part of the gain equals g_beta pointwise and cancels exactly.
  void rhs(const std::vector<cplx>& dbar, const std::vector<cplx>& dbarbar,
           std::vector<cplx>& out_bar, std::vector<cplx>& out_barbar) const {
    std::vector<cplx> dmix(size_);
    for (std::size_t j = 0; j < size_; ++j)
      dmix[j] = p_.alpha * dbar[j] + (1.0 - p_.alpha) * dbarbar[j];
    out_bar.assign(size_, cplx{});
    out_barbar.assign(size_, cplx{});
    const auto count = static_cast<std::ptrdiff_t>(size_);
#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t js = 0; js < count; ++js) {
      const auto j = static_cast<std::size_t>(js);
      cplx gain_bar{};
      cplx gain_barbar{};
      for (std::size_t q = 0; q < kThetaNodes; ++q) {
        const std::size_t k = j * kThetaNodes + q;
        const cplx mb = interp(dmix, stencils_b_[k]);
        const cplx full_b = gb_[k] + mb;
        gain_bar += ga_[k] * mb + interp(dbar, stencils_a_[k]) * full_b;
        gain_barbar += ga_[k] * mb + interp(dbarbar, stencils_a_[k]) * full_b;
      }
      gain_bar /= static_cast<double>(kThetaNodes);
      gain_barbar /= static_cast<double>(kThetaNodes);
      out_bar[j] = 2.0 * p_.lambda * (gain_bar - dbar[j]) - p_.eta * dbar[j];
      out_barbar[j] = 2.0 * p_.lambda * (gain_barbar - dbarbar[j]);
    }
  }

 private:
  static Stencil make_stencil(double x, double h, std::size_t N) {
    const bool neg = x < 0.0;
    const double pos = std::abs(x) / h + static_cast<double>(N / 2);
    auto k = static_cast<std::ptrdiff_t>(std::floor(pos));
    k = std::clamp<std::ptrdiff_t>(k, 1, static_cast<std::ptrdiff_t>(N) - 2);
    const double u = pos - static_cast<double>(k);
    Stencil s;
    s.w = {-u * (u - 1.0) * (u - 2.0) / 6.0, (u + 1.0) * (u - 1.0) * (u - 2.0) / 2.0,
           -(u + 1.0) * u * (u - 2.0) / 2.0, (u + 1.0) * u * (u - 1.0) / 6.0};
    for (std::size_t m = 0; m < 4; ++m) {
      const auto node = static_cast<std::size_t>(k - 1 + static_cast<std::ptrdiff_t>(m));
      s.idx[m] = neg ? N - node : node;
    }
    return s;
  }

  static cplx interp(const std::vector<cplx>& f, const Stencil& s) {
    return s.w[0] * f[s.idx[0]] + s.w[1] * f[s.idx[1]] + s.w[2] * f[s.idx[2]] +
           s.w[3] * f[s.idx[3]];
  }

  MixtureParams p_;
  std::size_t size_;
  std::vector<Stencil> stencils_a_;
  std::vector<Stencil> stencils_b_;
  std::vector<double> ga_;
  std::vector<double> gb_;
  std::vector<double> g_;
};

std::vector<cplx> deviation(const std::vector<cplx>& f, const std::vector<double>& g) {
  std::vector<cplx> d(f.size());
  for (std::size_t j = 0; j < f.size(); ++j) d[j] = f[j] - g[j];
  return d;
}

void axpy(std::vector<cplx>& out, const std::vector<cplx>& x, double a,
          const std::vector<cplx>& y) {
  out.resize(x.size());
  for (std::size_t j = 0; j < x.size(); ++j) out[j] = x[j] + a * y[j];
}

double sd_of(const Sampler1D& s) { return std::sqrt(s.variance()); }

// Plain complex product; std::complex operator* carries inf/nan recovery
// that is several times slower in the inner loops.
inline cplx mul(cplx a, cplx b) {
  return {a.real() * b.real() - a.imag() * b.imag(), a.real() * b.imag() + a.imag() * b.real()};
}

// Frequencies that are all integer multiples of one step let e^{-2 pi i xi v}
// be built from powers of a single unit complex number.
struct StepPlan {
  double step = 0.0;
  std::vector<long> mult;
  long max_mult = 0;
};

bool common_step(const std::vector<double>& xi, StepPlan& plan) {
  double step = 0.0;
  for (double x : xi)
    if (x != 0.0 && (step == 0.0 || std::abs(x) < step)) step = std::abs(x);
  if (step == 0.0) return false;
  plan.step = step;
  plan.mult.clear();
  plan.max_mult = 0;
  for (double x : xi) {
    const long m = std::lround(x / step);
    if (std::abs(x - static_cast<double>(m) * step) > 1e-12 * std::max(1.0, std::abs(x)) ||
        std::abs(m) > 256)
      return false;
    plan.mult.push_back(m);
    plan.max_mult = std::max(plan.max_mult, std::abs(m));
  }
  return true;
}

// out[p] = e^{-2 pi i xi_p v}.
void phases(const std::vector<double>& xi, const StepPlan* plan, double v,
            std::vector<cplx>& powers, cplx* out) {
  if (plan == nullptr) {
    for (std::size_t p = 0; p < xi.size(); ++p) out[p] = std::polar(1.0, -2.0 * kPi * xi[p] * v);
    return;
  }
  const cplx z = std::polar(1.0, -2.0 * kPi * plan->step * v);
  powers.resize(static_cast<std::size_t>(plan->max_mult) + 1);
  powers[0] = 1.0;
  for (std::size_t m = 1; m < powers.size(); ++m) powers[m] = mul(powers[m - 1], z);
  for (std::size_t p = 0; p < xi.size(); ++p) {
    const long m = plan->mult[p];
    out[p] = m >= 0 ? powers[static_cast<std::size_t>(m)]
                    : std::conj(powers[static_cast<std::size_t>(-m)]);
  }
}

}  // namespace

double Sampler1D::sample(Xoshiro256pp& rng) const {
  std::normal_distribution<double> normal(0.0, 1.0);
  switch (kind) {
    case Kind::Gaussian:
      return std::sqrt(a) * normal(rng);
    case Kind::Bimodal: {
      const double sign = rng.uniform() < 0.5 ? -1.0 : 1.0;
      return sign * a + b * normal(rng);
    }
    case Kind::Point:
      return a;
  }
  return 0.0;
}

cplx Sampler1D::cf(double xi) const {
  const double two_pi_sq = 2.0 * kPi * kPi;
  switch (kind) {
    case Kind::Gaussian:
      return {std::exp(-two_pi_sq * a * xi * xi), 0.0};
    case Kind::Bimodal:
      return {std::cos(2.0 * kPi * a * xi) * std::exp(-two_pi_sq * b * b * xi * xi), 0.0};
    case Kind::Point:
      return std::polar(1.0, -2.0 * kPi * xi * a);
  }
  return {};
}

double Sampler1D::variance() const {
  switch (kind) {
    case Kind::Gaussian:
      return a;
    case Kind::Bimodal:
      return a * a + b * b;
    case Kind::Point:
      return 0.0;
  }
  return 0.0;
}

void MixtureParams::validate() const {
  require(lambda > 0.0, "lambda must be > 0");
  require(eta >= 0.0, "eta must be >= 0");
  require(beta > 0.0, "beta must be > 0");
  require(alpha >= 0.0 && alpha <= 1.0, "alpha must lie in [0, 1]");
}

double thermostat_cf(double xi, double beta) {
  return std::exp(-2.0 * kPi * kPi * xi * xi / beta);
}

double default_mixture_extent(const MixtureParams& p, const Sampler1D& a,
                              const Sampler1D& b) {
  const double spread = std::max(sd_of(a), sd_of(b));
  return 8.0 * std::sqrt(p.beta) * std::max(1.0, spread);
}

MixtureGrid make_mixture_grid(const MixtureParams& p, double X,
                              std::size_t half_intervals, const Sampler1D& init_bar,
                              const Sampler1D& init_barbar) {
  p.validate();
  require(X > 0.0, "grid extent must be > 0");
  require(half_intervals >= 2, "need at least 2 half-intervals");
  MixtureGrid g;
  g.params = p;
  const std::size_t N = 2 * half_intervals;
  const double h = X / static_cast<double>(half_intervals);
  g.xi.resize(N + 1);
  g.fbar.resize(N + 1);
  g.fbarbar.resize(N + 1);
  for (std::size_t j = 0; j <= N; ++j) {
    const double xi = (static_cast<double>(j) - static_cast<double>(half_intervals)) * h;
    g.xi[j] = xi;
    g.fbar[j] = init_bar.cf(xi);
    g.fbarbar[j] = init_barbar.cf(xi);
  }
  return g;
}

MixtureRhs mixture_rhs(const MixtureGrid& g) {
  g.params.validate();
  const MixtureOperator op(g);
  MixtureRhs r;
  op.rhs(deviation(g.fbar, op.gaussian()), deviation(g.fbarbar, op.gaussian()), r.dbar,
         r.dbarbar);
  return r;
}

MixtureGrid integrate_mixture(const MixtureGrid& g, double t, double dt) {
  g.params.validate();
  require(t >= 0.0, "t must be >= 0");
  require(dt > 0.0, "dt must be > 0");
  const double limit = 0.1 / (2.0 * g.params.lambda + g.params.eta);
  require(dt <= limit * (1.0 + 1e-12), "dt exceeds the RK4 stability bound 0.1/(2 lambda + eta)");
  MixtureGrid out = g;
  if (t == 0.0) return out;
  const MixtureOperator op(g);
  const auto& gauss = op.gaussian();
  const auto steps = static_cast<std::size_t>(std::ceil(t / dt - 1e-9));
  const double h = t / static_cast<double>(steps);
  const std::size_t z = g.zero_index();

  std::vector<cplx> a = deviation(g.fbar, gauss);
  std::vector<cplx> b = deviation(g.fbarbar, gauss);
  std::vector<cplx> k1a, k1b, k2a, k2b, k3a, k3b, k4a, k4b, ta, tb;
  for (std::size_t s = 0; s < steps; ++s) {
    op.rhs(a, b, k1a, k1b);
    axpy(ta, a, 0.5 * h, k1a);
    axpy(tb, b, 0.5 * h, k1b);
    op.rhs(ta, tb, k2a, k2b);
    axpy(ta, a, 0.5 * h, k2a);
    axpy(tb, b, 0.5 * h, k2b);
    op.rhs(ta, tb, k3a, k3b);
    axpy(ta, a, h, k3a);
    axpy(tb, b, h, k3b);
    op.rhs(ta, tb, k4a, k4b);
    for (std::size_t j = 0; j < a.size(); ++j) {
      a[j] += h / 6.0 * (k1a[j] + 2.0 * k2a[j] + 2.0 * k3a[j] + k4a[j]);
      b[j] += h / 6.0 * (k1b[j] + 2.0 * k2b[j] + 2.0 * k3b[j] + k4b[j]);
    }
    a[z] = 0.0;
    b[z] = 0.0;
  }
  for (std::size_t j = 0; j < a.size(); ++j) {
    out.fbar[j] = gauss[j] + a[j];
    out.fbarbar[j] = gauss[j] + b[j];
  }
  out.fbar[z] = 1.0;
  out.fbarbar[z] = 1.0;
  return out;
}

void ChaosSimConfig::validate() const {
  require(n0 >= 2, "n0 must be >= 2");
  require(m0 >= 1, "m0 must be >= 1");
  require(m0 < n0, "m0 must be < n0 (an all-thermostated system has no free species)");
  require(k >= 1, "k must be >= 1");
  require(lambda > 0.0 && beta > 0.0 && eta >= 0.0, "invalid rates");
  require(samples >= 2, "need at least two samples");
}

std::vector<std::size_t> thermostated_index_set(std::size_t n0, std::size_t m0,
                                                std::size_t k) {
  std::vector<std::size_t> out;
  for (std::size_t i = 1; i <= n0 * k; ++i) {
    const std::size_t r = i % n0;
    if (r >= 1 && r <= m0) out.push_back(i);
  }
  return out;
}

std::vector<std::size_t> free_index_set(std::size_t n0, std::size_t m0, std::size_t k) {
  std::vector<std::size_t> out;
  for (std::size_t i = 1; i <= n0 * k; ++i) {
    const std::size_t r = i % n0;
    if (!(r >= 1 && r <= m0)) out.push_back(i);
  }
  return out;
}

namespace {

// Samples [first, first + count) of the partial system, evolved to time t.
// Stream indices are global, so chunked and whole runs agree bit for bit.
VelocityEnsemble partial_chunk(const ChaosSimConfig& cfg, double t, std::size_t first,
                               std::size_t count) {
  const std::size_t N = cfg.particles();
  const std::vector<std::size_t> A = thermostated_index_set(cfg.n0, cfg.m0, cfg.k);
  std::vector<char> in_a(N + 1, 0);
  for (std::size_t i : A) in_a[i] = 1;
  VelocityEnsemble ens(N, count, cfg.seed);
  const auto m = static_cast<std::ptrdiff_t>(count);
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t s = 0; s < m; ++s) {
    Xoshiro256pp rng(cfg.seed, first + static_cast<std::uint64_t>(s), Stage::Initial);
    auto row = ens.sample(static_cast<std::size_t>(s));
    for (std::size_t i = 1; i <= N; ++i)
      row[i - 1] = in_a[i] ? cfg.init_thermostated.sample(rng) : cfg.init_free.sample(rng);
  }
  ThermostatConfig th;
  th.lambda = cfg.lambda;
  th.eta = cfg.eta;
  th.beta = cfg.beta;
  th.thermostated = A;
  simulate_inplace(ens, t, th, cfg.seed, first);
  return ens;
}

// Running mean and SE of per-sample complex statistics, summed in sample
// order for reproducibility.
class CfAccumulator {
 public:
  explicit CfAccumulator(std::size_t points) : sum_(points), sum2_(points, 0.0) {}

  void add(const std::vector<cplx>& per_sample) {
    const std::size_t P = sum_.size();
    const std::size_t m = per_sample.size() / P;
    for (std::size_t s = 0; s < m; ++s)
      for (std::size_t p = 0; p < P; ++p) {
        sum_[p] += per_sample[s * P + p];
        sum2_[p] += std::norm(per_sample[s * P + p]);
      }
    count_ += m;
  }

  void finish(std::vector<cplx>& values, std::vector<double>& se) const {
    const std::size_t P = sum_.size();
    const double md = static_cast<double>(count_);
    values.resize(P);
    se.resize(P);
    for (std::size_t p = 0; p < P; ++p) {
      const cplx mean = sum_[p] / md;
      const double var = std::max(0.0, (sum2_[p] - md * std::norm(mean)) / (md - 1.0));
      values[p] = mean;
      se[p] = std::sqrt(var / md);
    }
  }

 private:
  std::vector<cplx> sum_;
  std::vector<double> sum2_;
  std::size_t count_ = 0;
};

// Per-sample group means of e^{-2 pi i xi v_i}, laid out sample-major.
std::vector<cplx> line_statistics(const VelocityEnsemble& ens,
                                  const std::vector<std::size_t>& group,
                                  const std::vector<double>& xi) {
  const std::size_t P = xi.size();
  StepPlan plan;
  const StepPlan* pp = common_step(xi, plan) ? &plan : nullptr;
  const double gsize = static_cast<double>(group.size());
  std::vector<cplx> means(ens.size() * P);
  const auto count = static_cast<std::ptrdiff_t>(ens.size());
#pragma omp parallel
  {
    std::vector<cplx> powers, e(P);
#pragma omp for schedule(static)
    for (std::ptrdiff_t ss = 0; ss < count; ++ss) {
      const auto s = static_cast<std::size_t>(ss);
      const auto v = ens.sample(s);
      cplx* acc = means.data() + s * P;
      for (std::size_t i : group) {
        phases(xi, pp, v[i - 1], powers, e.data());
        for (std::size_t p = 0; p < P; ++p) acc[p] += e[p];
      }
      for (std::size_t p = 0; p < P; ++p) acc[p] /= gsize;
    }
  }
  return means;
}

// Per-sample pair averages of e^{-2 pi i (xi1 v_a + xi2 v_b)}.
std::vector<cplx> pair_statistics(const VelocityEnsemble& ens,
                                  const std::vector<std::size_t>& group_a,
                                  const std::vector<std::size_t>& group_b,
                                  const std::vector<double>& xi1,
                                  const std::vector<double>& xi2) {
  const std::size_t n1 = xi1.size(), n2 = xi2.size(), P = n1 * n2;
  const std::size_t pairs = group_a.size();
  StepPlan plan1, plan2;
  const StepPlan* p1 = common_step(xi1, plan1) ? &plan1 : nullptr;
  const StepPlan* p2 = common_step(xi2, plan2) ? &plan2 : nullptr;
  std::vector<cplx> per_sample(ens.size() * P);
  const auto count = static_cast<std::ptrdiff_t>(ens.size());
#pragma omp parallel
  {
    std::vector<cplx> powers, ea(n1), eb(n2);
#pragma omp for schedule(static)
    for (std::ptrdiff_t ss = 0; ss < count; ++ss) {
      const auto s = static_cast<std::size_t>(ss);
      const auto v = ens.sample(s);
      cplx* per = per_sample.data() + s * P;
      for (std::size_t j = 0; j < pairs; ++j) {
        phases(xi1, p1, v[group_a[j] - 1], powers, ea.data());
        phases(xi2, p2, v[group_b[j] - 1], powers, eb.data());
        for (std::size_t p = 0; p < n1; ++p)
          for (std::size_t q = 0; q < n2; ++q) per[p * n2 + q] += mul(ea[p], eb[q]);
      }
      for (std::size_t c = 0; c < P; ++c) per[c] /= static_cast<double>(pairs);
    }
  }
  return per_sample;
}

// Samples per chunk in chaos_error: about 2^24 velocities in memory.
std::size_t chunk_samples(std::size_t particles) {
  return std::max<std::size_t>(2, (std::size_t{1} << 24) / particles);
}

}  // namespace

VelocityEnsemble simulate_partial(const ChaosSimConfig& cfg, double t) {
  cfg.validate();
  return partial_chunk(cfg, t, 0, cfg.samples);
}

LineCf marginal_ecf(const VelocityEnsemble& ens, const std::vector<std::size_t>& group,
                    const std::vector<double>& xi) {
  require(!group.empty(), "index group is empty");
  require(ens.size() >= 2, "need at least two samples");
  for (std::size_t i : group) require(i >= 1 && i <= ens.dim(), "group index out of range");
  LineCf out;
  out.xi = xi;
  out.sample_count = ens.size();
  CfAccumulator acc(xi.size());
  acc.add(line_statistics(ens, group, xi));
  acc.finish(out.values, out.se);
  return out;
}

PairCf pair_ecf(const VelocityEnsemble& ens, const std::vector<std::size_t>& group_a,
                const std::vector<std::size_t>& group_b, const std::vector<double>& xi1,
                const std::vector<double>& xi2) {
  require(!group_a.empty() && group_a.size() == group_b.size(),
          "pair groups must be non-empty and of equal size");
  require(ens.size() >= 2, "need at least two samples");
  for (std::size_t i : group_a) require(i >= 1 && i <= ens.dim(), "group index out of range");
  for (std::size_t i : group_b) require(i >= 1 && i <= ens.dim(), "group index out of range");
  PairCf out;
  out.xi1 = xi1;
  out.xi2 = xi2;
  CfAccumulator acc(xi1.size() * xi2.size());
  acc.add(pair_statistics(ens, group_a, group_b, xi1, xi2));
  acc.finish(out.values, out.se);
  return out;
}

std::vector<ChaosRow> chaos_error(const ChaosSimConfig& base,
                                  const std::vector<std::size_t>& ks, double t,
                                  const ChaosGridSpec& spec) {
  base.validate();
  require(t >= 0.0, "t must be >= 0");
  require(spec.line_stride >= 1, "line stride must be >= 1");
  MixtureParams mp;
  mp.lambda = base.lambda;
  mp.eta = base.eta;
  mp.beta = base.beta;
  mp.alpha = static_cast<double>(base.m0) / static_cast<double>(base.n0);
  const std::size_t half = 512;
  const double X = default_mixture_extent(mp, base.init_thermostated, base.init_free);
  const MixtureGrid init =
      make_mixture_grid(mp, X, half, base.init_thermostated, base.init_free);
  const double dt = 0.05 / (2.0 * mp.lambda + mp.eta);
  const MixtureGrid sol = integrate_mixture(init, t, dt);

  std::vector<std::size_t> line_nodes;
  for (std::size_t j = sol.zero_index() + 1; j < sol.xi.size(); j += spec.line_stride)
    if (sol.xi[j] <= spec.line_max) line_nodes.push_back(j);
  auto nearest = [&](double x) {
    const double h = X / static_cast<double>(half);
    const auto j = static_cast<std::ptrdiff_t>(std::lround(x / h)) +
                   static_cast<std::ptrdiff_t>(half);
    return static_cast<std::size_t>(
        std::clamp<std::ptrdiff_t>(j, 0, static_cast<std::ptrdiff_t>(2 * half)));
  };
  std::vector<std::size_t> pair_nodes;
  for (double x : spec.pair_nodes) pair_nodes.push_back(nearest(x));

  std::vector<double> line_xi, pair_xi;
  for (std::size_t j : line_nodes) line_xi.push_back(sol.xi[j]);
  for (std::size_t j : pair_nodes) pair_xi.push_back(sol.xi[j]);

  std::vector<ChaosRow> rows;
  for (std::size_t k : ks) {
    ChaosSimConfig cfg = base;
    cfg.k = k;
    const auto A = thermostated_index_set(cfg.n0, cfg.m0, k);
    const auto B = free_index_set(cfg.n0, cfg.m0, k);
    const std::size_t pairs = std::min(A.size(), B.size());
    const std::vector<std::size_t> ga(A.begin(), A.begin() + static_cast<std::ptrdiff_t>(pairs));
    const std::vector<std::size_t> gb(B.begin(), B.begin() + static_cast<std::ptrdiff_t>(pairs));
    CfAccumulator acc_a(line_xi.size()), acc_b(line_xi.size());
    CfAccumulator acc_pair(pair_xi.size() * pair_xi.size());
    const std::size_t chunk = chunk_samples(cfg.particles());
    for (std::size_t first = 0; first < cfg.samples; first += chunk) {
      const std::size_t count = std::min(chunk, cfg.samples - first);
      const VelocityEnsemble ens = partial_chunk(cfg, t, first, count);
      acc_a.add(line_statistics(ens, A, line_xi));
      acc_b.add(line_statistics(ens, B, line_xi));
      acc_pair.add(pair_statistics(ens, ga, gb, pair_xi, pair_xi));
    }
    LineCf cf_a, cf_b;
    acc_a.finish(cf_a.values, cf_a.se);
    acc_b.finish(cf_b.values, cf_b.se);
    PairCf pc;
    acc_pair.finish(pc.values, pc.se);
    ChaosRow row;
    row.k = k;
    auto sup_err = [](const LineCf& cf, const std::vector<std::size_t>& nodes,
                      const std::vector<cplx>& ref, double& err, double& se) {
      err = 0.0;
      se = 0.0;
      for (std::size_t p = 0; p < nodes.size(); ++p) {
        const double e = std::abs(cf.values[p] - ref[nodes[p]]);
        if (e > err) {
          err = e;
          se = cf.se[p];
        }
      }
    };
    sup_err(cf_a, line_nodes, sol.fbar, row.err1_A, row.se1_A);
    sup_err(cf_b, line_nodes, sol.fbarbar, row.err1_B, row.se1_B);
    for (std::size_t p = 0; p < pair_nodes.size(); ++p) {
      for (std::size_t q = 0; q < pair_nodes.size(); ++q) {
        const std::size_t c = p * pair_nodes.size() + q;
        const double e =
            std::abs(pc.values[c] - sol.fbar[pair_nodes[p]] * sol.fbarbar[pair_nodes[q]]);
        if (e > row.err2) {
          row.err2 = e;
          row.se2 = pc.se[c];
        }
      }
    }
    rows.push_back(row);
  }
  return rows;
}

std::string mixture_csv(const MixtureGrid& g, const std::string& comment) {
  std::string out;
  if (!comment.empty()) out += "# " + comment + "\n";
  out += "xi,re_fbar,im_fbar,re_fbarbar,im_fbarbar\n";
  char buf[160];
  for (std::size_t j = 0; j < g.xi.size(); ++j) {
    std::snprintf(buf, sizeof buf, "%.17g,%.17g,%.17g,%.17g,%.17g\n", g.xi[j],
                  g.fbar[j].real(), g.fbar[j].imag(), g.fbarbar[j].real(),
                  g.fbarbar[j].imag());
    out += buf;
  }
  return out;
}

std::string chaos_csv(const std::vector<ChaosRow>& rows, const std::string& comment) {
  std::string out;
  if (!comment.empty()) out += "# " + comment + "\n";
  out += "k,err1_A,err1_B,err2,se1_A,se1_B,se2\n";
  char buf[200];
  for (const auto& r : rows) {
    std::snprintf(buf, sizeof buf, "%zu,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g\n", r.k,
                  r.err1_A, r.err1_B, r.err2, r.se1_A, r.se1_B, r.se2);
    out += buf;
  }
  return out;
}

}  // namespace kaclab
