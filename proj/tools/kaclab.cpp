// Command-line runner. Every subcommand reads one key = value config file and
// writes CSV/JSON artefacts into --out.

#include <cinttypes>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>
#include <json.hpp>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "kaclab/bounds.hpp"
#include "kaclab/chaos.hpp"
#include "kaclab/errors.hpp"
#include "kaclab/gtw.hpp"
#include "kaclab/initial.hpp"
#include "kaclab/kac.hpp"
#include "kaclab/moments.hpp"
#include "kaclab/slow_decay.hpp"

namespace fs = std::filesystem;
using namespace kaclab;

namespace {

constexpr const char* kVersion = "0.1.0";

// Thrown when a run completes but one of its numerical checks fails.
struct CheckFailed : std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::string read_file(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw IoError("cannot read " + p.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const fs::path& p, const std::string& text) {
  std::ofstream out(p, std::ios::binary);
  if (!out) throw IoError("cannot write " + p.string());
  out << text;
  if (!out) throw IoError("write failed for " + p.string());
}

std::uint64_t fnv1a(const std::string& bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

class Config {
 public:
  Config(const fs::path& path, std::optional<std::uint64_t> seed_override)
      : path_(path) {
    const std::string text = read_file(path);
    std::istringstream in(text);
    try {
      boost::property_tree::ini_parser::read_ini(in, tree_);
    } catch (const boost::property_tree::ini_parser_error& e) {
      throw ValidationError(std::string("config parse error: ") + e.what());
    }
    std::string keyed = text;
    if (seed_override) {
      seed_ = *seed_override;
      keyed += "\nseed_override=" + std::to_string(*seed_override);
    } else if (auto s = tree_.get_optional<std::string>("seed")) {
      seed_ = parse_u64(*s, "seed");
    }
    hash_ = fnv1a(keyed);
  }

  std::uint64_t seed() const {
    if (!seed_) throw ValidationError("config must set seed (or pass --seed)");
    return *seed_;
  }

  std::string comment() const {
    char buf[96];
    std::snprintf(buf, sizeof buf, "config_hash=%016" PRIx64 " version=%s", hash_, kVersion);
    return buf;
  }

  bool has(const std::string& key) const { return tree_.get_optional<std::string>(key).has_value(); }

  std::string str(const std::string& key, const std::string& fallback) const {
    return tree_.get<std::string>(key, fallback);
  }

  double num(const std::string& key, double fallback) const {
    const auto v = tree_.get_optional<std::string>(key);
    return v ? parse_double(*v, key) : fallback;
  }

  double num(const std::string& key) const {
    const auto v = tree_.get_optional<std::string>(key);
    if (!v) throw ValidationError("config is missing '" + key + "'");
    return parse_double(*v, key);
  }

  std::size_t count(const std::string& key, std::size_t fallback) const {
    const auto v = tree_.get_optional<std::string>(key);
    return v ? static_cast<std::size_t>(parse_u64(*v, key)) : fallback;
  }

  std::size_t count(const std::string& key) const {
    const auto v = tree_.get_optional<std::string>(key);
    if (!v) throw ValidationError("config is missing '" + key + "'");
    return static_cast<std::size_t>(parse_u64(*v, key));
  }

  std::vector<double> list(const std::string& key, std::vector<double> fallback) const {
    const auto v = tree_.get_optional<std::string>(key);
    if (!v) return fallback;
    std::vector<double> out;
    std::stringstream ss(*v);
    std::string item;
    while (std::getline(ss, item, ','))
      if (item.find_first_not_of(" \t") != std::string::npos) out.push_back(parse_double(item, key));
    return out;
  }

 private:
  static double parse_double(const std::string& s, const std::string& key) {
    try {
      std::size_t pos = 0;
      const double v = std::stod(s, &pos);
      if (s.find_first_not_of(" \t", pos) != std::string::npos) throw std::invalid_argument(s);
      return v;
    } catch (const std::exception&) {
      throw ValidationError("config key '" + key + "' is not a number: " + s);
    }
  }

  static std::uint64_t parse_u64(const std::string& s, const std::string& key) {
    try {
      std::size_t pos = 0;
      if (s.find('-') != std::string::npos) throw std::invalid_argument(s);
      const std::uint64_t v = std::stoull(s, &pos);
      if (s.find_first_not_of(" \t", pos) != std::string::npos) throw std::invalid_argument(s);
      return v;
    } catch (const std::exception&) {
      throw ValidationError("config key '" + key + "' is not a non-negative integer: " + s);
    }
  }

  fs::path path_;
  boost::property_tree::ptree tree_;
  std::optional<std::uint64_t> seed_;
  std::uint64_t hash_ = 0;
};

InitialSpec initial_from(const Config& c, const std::string& prefix = "") {
  InitialSpec s;
  s.kind = parse_initial_kind(c.str(prefix + "initial", "gaussian"));
  s.variance = c.num(prefix + "variance", 1.0);
  s.centre = c.num(prefix + "centre", 1.0);
  s.width = c.num(prefix + "width", 0.3);
  s.radius = c.num(prefix + "radius", 1.0);
  s.point = c.list(prefix + "point", {});
  return s;
}

ThermostatConfig thermostat_from(const Config& c) {
  ThermostatConfig th;
  th.lambda = c.num("lambda", 1.0);
  th.eta = c.num("eta", 0.0);
  th.beta = c.num("beta", 1.0);
  for (double x : c.list("thermostated", {})) {
    if (x < 1.0 || x != std::floor(x)) throw ValidationError("thermostated indices must be integers >= 1");
    th.thermostated.push_back(static_cast<std::size_t>(x));
  }
  return th;
}

// The initial ensemble: either a CSV fixture (`input`) or a generated measure.
VelocityEnsemble initial_ensemble(const Config& c) {
  if (c.has("input")) {
    VelocityEnsemble e = ensemble_from_csv(read_file(c.str("input", "")), c.seed());
    e.validate();
    return e;
  }
  return make_initial(initial_from(c), c.count("n"), c.count("samples", 10000),
                      stream_seed(c.seed(), 0, Stage::Initial));
}

FrequencyGrid grid_from(const Config& c, std::size_t n) {
  GridSpec g;
  g.random_directions = c.count("grid_directions", g.random_directions);
  g.radius_count = c.count("grid_radii", g.radius_count);
  g.r_min = c.num("grid_r_min", g.r_min);
  g.r_max = c.num("grid_r_max", g.r_max);
  return make_grid(n, stream_seed(c.seed(), 0, Stage::Grid), g);
}

std::string energy_drift_csv(const VelocityEnsemble& a, const VelocityEnsemble& b,
                             const std::string& comment) {
  std::string out = "# " + comment + "\nsample_id,energy_initial,energy_final,relative_drift\n";
  const auto ea = a.energies();
  const auto eb = b.energies();
  char buf[128];
  for (std::size_t s = 0; s < ea.size(); ++s) {
    const double drift = ea[s] > 0.0 ? std::abs(eb[s] - ea[s]) / ea[s] : std::abs(eb[s]);
    std::snprintf(buf, sizeof buf, "%zu,%.17g,%.17g,%.17g\n", s, ea[s], eb[s], drift);
    out += buf;
  }
  return out;
}

int cmd_simulate(const Config& c, const fs::path& out) {
  const VelocityEnsemble init = initial_ensemble(c);
  const double t = c.num("t", 0.0);
  const VelocityEnsemble fin = simulate(init, t, thermostat_from(c), c.seed());
  write_file(out / "ensemble.csv", to_csv(fin, c.comment()));
  write_file(out / "moments.json", moments_json(estimate_moments(fin), fin.time()));
  write_file(out / "energy_drift.csv", energy_drift_csv(init, fin, c.comment()));
  return 0;
}

int cmd_moments(const Config& c, const fs::path& out) {
  const VelocityEnsemble init = initial_ensemble(c);
  const double t = c.num("t", 0.0);
  const ThermostatConfig th = thermostat_from(c);
  const VelocityEnsemble fin = simulate(init, t, th, c.seed());
  const SecondMomentSummary m0 = estimate_moments(init);
  const SecondMomentSummary mt = estimate_moments(fin);
  nlohmann::ordered_json j;
  j["estimate"] = nlohmann::json::parse(moments_json(mt, fin.time()));
  if (th.pure() && th.lambda == 1.0) {
    nlohmann::ordered_json cf;
    cf["t"] = t;
    cf["m11"] = evolve_diagonal(m0.diag[0], m0.energy_per_particle, t, init.dim());
    cf["pair12"] = evolve_pair_correlation(m0.pair12, t, init.dim());
    cf["mean"] = mean_decay(m0.mean, t);
    j["closed_form_from_initial"] = cf;
  }
  j["comment"] = c.comment();
  write_file(out / "moments.json", j.dump(2) + "\n");
  return 0;
}

int cmd_metric(const Config& c, const fs::path& out) {
  const VelocityEnsemble init = initial_ensemble(c);
  const VelocityEnsemble ens = simulate(init, c.num("t", 0.0), thermostat_from(c), c.seed());
  const FrequencyGrid grid = grid_from(c, ens.dim());
  const D2Report r = d2_to_angular_average(ens, grid);
  write_file(out / "d2.json", d2_json(r));
  write_file(out / "cf.csv", cf_csv(ecf(ens, grid), c.comment()));
  write_file(out / "cf_angular.csv", cf_csv(cf_of_angular_average(ens, grid), c.comment()));
  return 0;
}

int cmd_bounds_check(const Config& c, const fs::path& out) {
  const VelocityEnsemble init = initial_ensemble(c);
  const std::size_t n = init.dim();
  ThermostatConfig th;  // pure Kac, lambda = 1: the envelopes assume it
  const FrequencyGrid grid = grid_from(c, n);
  const SecondMomentSummary m = estimate_moments(init);
  const auto exponent = c.str("exponent", "n+3") == "n-1" ? EnvelopeExponent::NMinus1
                                                           : EnvelopeExponent::NPlus3;
  std::vector<EnvelopeRow> rows;
  std::string failure;
  const auto ts = c.list("t_grid", {0.0, 0.5, 1.0, 2.0, 4.0, 8.0});
  for (std::size_t k = 0; k < ts.size(); ++k) {
    const VelocityEnsemble ens = simulate(init, ts[k], th, stream_seed(c.seed(), k, Stage::Simulate));
    const D2Report r = d2_to_angular_average(ens, grid);
    BoundInputs in;
    in.n = n;
    in.t = ts[k];
    in.energy_per_particle = m.energy_per_particle;
    in.diag_max = m.diag_max();
    in.offdiag_max = m.offdiag_max;
    in.pair12 = m.pair12;
    in.m11 = m.diag[0];
    EnvelopeRow row{ts[k], thm1_envelope(in, exponent), prop1_symmetric_bound(in), r.value, r.se};
    rows.push_back(row);
    if (failure.empty() && (row.d2_estimate > row.envelope_thm1 + 3.0 * row.d2_se ||
                            row.d2_estimate > row.envelope_prop1 + 3.0 * row.d2_se)) {
      char buf[200];
      std::snprintf(buf, sizeof buf, "dominance violated at t=%g: d2=%.6g se=%.3g thm1=%.6g prop1=%.6g",
                    row.t, row.d2_estimate, row.d2_se, row.envelope_thm1, row.envelope_prop1);
      failure = buf;
    }
  }
  write_file(out / "envelope.csv", envelope_csv(rows, c.comment()));
  if (!failure.empty()) throw CheckFailed(failure);
  return 0;
}

int cmd_slow_decay(const Config& c, const fs::path& out) {
  F0Spec spec;
  if (c.has("fixture")) {
    spec = f0_from_json(read_file(c.str("fixture", "")));
  } else {
    BuildOptions opt;
    opt.calibration_tol = c.num("calibration_tol", opt.calibration_tol);
    opt.calibration_samples = c.count("calibration_samples", opt.calibration_samples);
    opt.sphere_samples = c.count("sphere_samples", opt.sphere_samples);
    opt.audit_nodes = c.count("audit_nodes", opt.audit_nodes);
    spec = build_f0(c.count("n"), c.num("grid_extent", 0.0), c.seed(), opt);
  }
  const auto ts = c.list("t_grid", {0.0, 0.05, 0.1, 0.25, 0.5});
  const auto rows = verify_slow_decay(spec, ts, c.count("walkers", 100000),
                                      stream_seed(c.seed(), 1, Stage::Walkers));
  write_file(out / "f0.json", f0_json(spec));
  write_file(out / "slow_decay.csv", slow_decay_csv(rows, c.comment()));
  for (const auto& r : rows)
    if (r.ratio_lb < r.paper_floor - 3.0 * r.ratio_se)
      throw CheckFailed("ratio_lb below the floor at t=" + std::to_string(r.t));
  return 0;
}

Sampler1D sampler_from(const Config& c, const std::string& prefix) {
  const std::string kind = c.str(prefix + "initial", "bimodal");
  if (kind == "gaussian") return Sampler1D::gaussian(c.num(prefix + "variance", 1.0));
  if (kind == "bimodal")
    return Sampler1D::bimodal(c.num(prefix + "centre", 1.0), c.num(prefix + "width", 0.3));
  if (kind == "point") return Sampler1D::point(c.num(prefix + "point", 0.0));
  throw ValidationError("unknown 1-D initial law '" + kind + "'");
}

int cmd_chaos(const Config& c, const fs::path& out) {
  ChaosSimConfig cfg;
  cfg.n0 = c.count("n0", 2);
  cfg.m0 = c.count("m0", 1);
  cfg.lambda = c.num("lambda", 1.0);
  cfg.eta = c.num("eta", 1.0);
  cfg.beta = c.num("beta", 1.0);
  cfg.init_thermostated = sampler_from(c, "a_");
  cfg.init_free = sampler_from(c, "b_");
  cfg.samples = c.count("samples", 100000);
  cfg.seed = c.seed();
  cfg.validate();
  std::vector<std::size_t> ks;
  for (double k : c.list("ks", {8, 32, 128})) {
    if (k < 1.0 || k != std::floor(k)) throw ValidationError("ks must be positive integers");
    ks.push_back(static_cast<std::size_t>(k));
  }
  const double t = c.num("t", 1.0);

  MixtureParams mp;
  mp.lambda = cfg.lambda;
  mp.eta = cfg.eta;
  mp.beta = cfg.beta;
  mp.alpha = static_cast<double>(cfg.m0) / static_cast<double>(cfg.n0);
  const double dt = c.num("dt", 0.05 / (2.0 * mp.lambda + mp.eta));
  const MixtureGrid g0 = make_mixture_grid(
      mp, default_mixture_extent(mp, cfg.init_thermostated, cfg.init_free),
      c.count("half_intervals", 512), cfg.init_thermostated, cfg.init_free);
  const MixtureGrid gt = integrate_mixture(g0, t, dt);
  write_file(out / "mixture_t0.csv", mixture_csv(g0, c.comment()));
  write_file(out / "mixture_t.csv", mixture_csv(gt, c.comment()));
  write_file(out / "chaos.csv", chaos_csv(chaos_error(cfg, ks, t), c.comment()));
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Kac model / d2 numerical laboratory"};
  app.require_subcommand(1);
  std::string config;
  std::string out_dir = ".";
  std::optional<std::uint64_t> seed;
  int threads = 0;

  using Handler = int (*)(const Config&, const fs::path&);
  const std::vector<std::pair<std::string, Handler>> commands = {
      {"simulate", cmd_simulate},         {"moments", cmd_moments},
      {"metric", cmd_metric},             {"bounds-check", cmd_bounds_check},
      {"slow-decay", cmd_slow_decay},     {"chaos", cmd_chaos}};
  for (const auto& [name, _] : commands) {
    CLI::App* sub = app.add_subcommand(name);
    sub->add_option("--config", config, "key = value config file")->required();
    sub->add_option("--out", out_dir, "output directory");
    sub->add_option("--seed", seed, "master seed (overrides the config)");
    sub->add_option("--threads", threads, "worker threads")->check(CLI::NonNegativeNumber);
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 1;
  }

#ifdef _OPENMP
  if (threads > 0) omp_set_num_threads(threads);
#endif

  try {
    const Config cfg(config, seed);
    const fs::path out(out_dir);
    std::error_code ec;
    fs::create_directories(out, ec);
    if (ec) throw IoError("cannot create " + out.string() + ": " + ec.message());
    for (const auto& [name, handler] : commands)
      if (app.got_subcommand(name)) return handler(cfg, out);
  } catch (const ValidationError& e) {
    std::cerr << "validation error: " << e.what() << "\n";
    return 1;
  } catch (const IoError& e) {
    std::cerr << "i/o error: " << e.what() << "\n";
    return 3;
  } catch (const NumericalError& e) {
    std::cerr << "numerical check failed: " << e.what() << "\n";
    return 2;
  } catch (const CheckFailed& e) {
    std::cerr << "check failed: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 1;
}
