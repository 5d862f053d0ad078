#include <doctest.h>

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <cmath>
#include <numbers>

#include <json.hpp>

#include "kaclab/errors.hpp"
#include "kaclab/gtw.hpp"
#include "kaclab/initial.hpp"
#include "kaclab/moments.hpp"

using namespace kaclab;
using std::numbers::pi;

namespace {

// Angular average of cos(z cos theta) under sin^{n-2} theta, by adaptive
// Gauss-Kronrod on [0, pi].
double kernel_by_quadrature(std::size_t n, double z) {
  using boost::math::quadrature::gauss_kronrod;
  const auto w = [n](double th) { return std::pow(std::sin(th), static_cast<double>(n) - 2.0); };
  const double num = gauss_kronrod<double, 61>::integrate(
      [&](double th) { return std::cos(z * std::cos(th)) * w(th); }, 0.0, pi, 20, 1e-14);
  const double den = gauss_kronrod<double, 61>::integrate(w, 0.0, pi, 20, 1e-14);
  return num / den;
}

SecondMomentSummary exact_moments_1d(double variance) {
  SecondMomentSummary m;
  m.n = 1;
  m.mean = {0.0};
  m.se_mean = {0.0};
  m.diag = {variance};
  m.se_diag = {0.0};
  m.energy_per_particle = variance;
  return m;
}

CfSample gaussian_cf_1d(const FrequencyGrid& g, double variance) {
  CfSample c{g, std::vector<cplx>(g.size()), std::vector<double>(g.size(), 0.0), 0};
  for (std::size_t k = 0; k < g.size(); ++k) {
    const double x = g.point(k)[0];
    c.values[k] = std::exp(-2.0 * pi * pi * variance * x * x);
  }
  return c;
}

}  // namespace

TEST_CASE("radial kernel in three dimensions is sin z / z") {
  for (int k = 0; k < 500; ++k) {
    const double z = 50.0 * k / 499.0;
    const double ref = z == 0.0 ? 1.0 : std::sin(z) / z;
    REQUIRE(std::abs(radial_kernel(3, z) - ref) <= 1e-10);
  }
}

TEST_CASE("radial kernel matches quadrature across dimensions") {
  for (std::size_t n : {2, 4, 5, 7, 10}) {
    for (double z : {0.3, 1.7, 6.0, 11.9, 12.1, 20.0, 37.5, 50.0}) {
      INFO("n=" << n << " z=" << z);
      CHECK(std::abs(radial_kernel(n, z) - kernel_by_quadrature(n, z)) <= 1e-9);
    }
  }
}

TEST_CASE("kernel bounds: 1 - R <= min(2, z^2 / 2n)") {
  for (std::size_t n = 2; n <= 10; ++n)
    for (int k = 0; k <= 1000; ++k) {
      const double z = 0.05 * k;
      const double gap = 1.0 - radial_kernel(n, z);
      REQUIRE(gap <= std::min(2.0, z * z / (2.0 * n)) + 1e-12);
      REQUIRE(gap >= -1e-12);
    }
  CHECK_THROWS_AS(radial_kernel(1, 1.0), ValidationError);
  CHECK_THROWS_AS(radial_kernel(3, -1.0), ValidationError);
}

TEST_CASE("frequency grid validation and layout") {
  CHECK_THROWS_AS(FrequencyGrid(2, {{1.0, 1.0}}, {1.0}), ValidationError);
  CHECK_THROWS_AS(FrequencyGrid(2, {{1.0, 0.0}}, {1.0, 0.5}), ValidationError);
  CHECK_THROWS_AS(FrequencyGrid(2, {{1.0, 0.0}}, {-1.0}), ValidationError);
  CHECK_THROWS_AS(FrequencyGrid(2, {}, {1.0}), ValidationError);
  const auto g = make_grid(3, 1, {4, 5, 0.1, 10.0});
  CHECK(g.direction_count() == 3 + 1 + 4);
  CHECK(g.radii().front() == doctest::Approx(0.1));
  CHECK(g.radii().back() == doctest::Approx(10.0));
  const auto p = g.point(1 * 5 + 2);
  CHECK(p[1] == doctest::Approx(1.0));
  CHECK(make_grid(3, 1, {4, 5, 0.1, 10.0}) == g);
}

TEST_CASE("empirical characteristic functions") {
  InitialSpec spec;
  spec.kind = InitialSpec::Kind::Point;
  spec.point = {0.25, -0.5};
  const auto pt = make_initial(spec, 2, 10, 1);
  const auto g = make_grid(2, 3, {2, 7, 0.1, 3.0});
  const auto c = ecf(pt, g);
  for (std::size_t k = 0; k < g.size(); ++k) {
    const auto xi = g.point(k);
    const double ph = -2.0 * pi * (xi[0] * 0.25 - xi[1] * 0.5);
    CHECK(std::abs(c.values[k] - std::polar(1.0, ph)) <= 1e-12);
  }

  const auto gauss = make_initial({}, 2, 40000, 2);
  const auto cg = ecf(gauss, g);
  for (std::size_t k = 0; k < g.size(); ++k) {
    const auto xi = g.point(k);
    const double exact = std::exp(-2.0 * pi * pi * (xi[0] * xi[0] + xi[1] * xi[1]));
    CHECK(std::abs(cg.values[k] - exact) <= 4.0 * cg.se[k] + 1e-12);
  }

  // The negated ensemble has the conjugate transform, to rounding.
  std::vector<double> flat = gauss.flat();
  for (double& x : flat) x = -x;
  const auto neg = ecf(VelocityEnsemble(2, flat, 0), g);
  for (std::size_t k = 0; k < g.size(); ++k) CHECK(std::abs(neg.values[k] - std::conj(cg.values[k])) <= 1e-12);
}

TEST_CASE("characteristic function of the angular average") {
  InitialSpec spec;
  spec.kind = InitialSpec::Kind::Point;
  spec.point = {0.6, 0.0, 0.8};
  const auto g = make_grid(3, 1, {3, 9, 0.05, 4.0});
  const auto c = cf_of_angular_average(make_initial(spec, 3, 5, 1), g);
  for (std::size_t k = 0; k < g.size(); ++k) {
    const double r = g.radii()[k % 9];
    const double z = 2.0 * pi * r;
    CHECK(c.values[k].real() == doctest::Approx(std::sin(z) / z).epsilon(1e-10));
    CHECK(c.se[k] == doctest::Approx(0.0));
  }
  // A sphere is its own angular average: the two transforms agree within noise.
  InitialSpec sph;
  sph.kind = InitialSpec::Kind::Sphere;
  const auto s = make_initial(sph, 3, 40000, 4);
  const auto e = ecf(s, g);
  for (std::size_t k = 0; k < g.size(); ++k) {
    const double r = g.radii()[k % 9];
    const double z = 2.0 * pi * r;
    CHECK(std::abs(e.values[k] - std::sin(z) / z) <= 4.0 * e.se[k] + 1e-12);
  }
}

TEST_CASE("d2 between one-dimensional Gaussians") {
  const FrequencyGrid g(1, {{1.0}}, [] {
    std::vector<double> r;
    for (int k = 0; k < 200; ++k) r.push_back(0.01 * std::pow(1.05, k));
    return r;
  }());
  for (auto [s1, s2] : {std::pair{1.0, 2.0}, std::pair{1.0, 1.1}, std::pair{0.5, 3.0}}) {
    const auto a = gaussian_cf_1d(g, s1), b = gaussian_cf_1d(g, s2);
    const auto r = d2_estimate(a, b, exact_moments_1d(s1), exact_moments_1d(s2));
    // Dense-search oracle on the same function.
    double sup = 0.0;
    for (int k = 1; k <= 200000; ++k) {
      const double x = 1e-5 * k;
      sup = std::max(sup, std::abs(std::exp(-2 * pi * pi * s1 * x * x) -
                                   std::exp(-2 * pi * pi * s2 * x * x)) / (x * x));
    }
    CHECK(sup == doctest::Approx(2.0 * pi * pi * std::abs(s1 - s2)).epsilon(1e-6));
    CHECK(r.value == doctest::Approx(sup).epsilon(1e-3));
    const auto back = d2_estimate(b, a, exact_moments_1d(s2), exact_moments_1d(s1));
    CHECK(back.value == r.value);
  }
}

TEST_CASE("d2 refuses measures with a nonzero mean") {
  InitialSpec spec;
  spec.kind = InitialSpec::Kind::Point;
  spec.point = {1.0, 1.0};
  const auto e = make_initial(spec, 2, 100, 1);
  const auto g = make_grid(2, 1, {2, 8, 0.05, 2.0});
  CHECK_THROWS_AS(d2_to_angular_average(e, g), NumericalError);
  const auto m = estimate_moments(e);
  CHECK_THROWS_AS(d2_estimate(ecf(e, g), ecf(e, g), m, m), NumericalError);
}

TEST_CASE("d2 to the angular average: sphere near zero, line large") {
  // The imaginary part of the empirical transform carries noise of order
  // 1 / (r sqrt(M)), so the sphere check starts at r = 0.1.
  InitialSpec sph;
  sph.kind = InitialSpec::Kind::Sphere;
  const auto sr = d2_to_angular_average(make_initial(sph, 4, 20000, 1), make_grid(4, 9, {16, 48, 0.1, 10.0}));
  CHECK(sr.value < 1.0);
  const auto g = make_grid(4, 9, {16, 48, 0.01, 10.0});

  InitialSpec line;
  line.kind = InitialSpec::Kind::Line;
  const auto ens = make_initial(line, 4, 20000, 2);
  const auto r = d2_to_angular_average(ens, g);
  const auto m = estimate_moments(ens);
  const double lb = 3.0 * 4.0 * pi * pi / 2.0 * m.diag[0];
  CHECK(r.value >= lb - 3.0 * r.se);

  const auto j = nlohmann::json::parse(d2_json(r));
  CHECK(j.at("value").get<double>() == r.value);
  CHECK(j.at("argmax_direction").size() == 4);
}

TEST_CASE("cf CSV layout") {
  const auto g = make_grid(2, 1, {1, 2, 0.5, 1.0});
  const auto c = ecf(make_initial({}, 2, 10, 1), g);
  const auto text = cf_csv(c, "hello");
  CHECK(text.rfind("# hello\ndirection_id,radius,re,im,se\n", 0) == 0);
  CHECK(std::count(text.begin(), text.end(), '\n') == static_cast<long>(2 + g.size()));
}
