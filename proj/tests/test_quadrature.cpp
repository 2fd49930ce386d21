#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "hks/quadrature.hpp"
#include "hks/specfun.hpp"

#include <cmath>
#include <limits>

using hks::cplx;
using hks::Decay;
using hks::QuadratureRule;

namespace {

const double kPi = 3.14159265358979323846;

double rel_err(double got, double want) { return std::abs(got - want) / std::abs(want); }

}  // namespace

TEST_CASE("pairwise tree sum matches long double accumulation") {
  std::vector<double> v(10001);
  long double acc = 0.0L;
  for (size_t i = 0; i < v.size(); ++i) {
    v[i] = std::sin(0.37 * double(i)) / (1.0 + 0.01 * double(i));
    acc += v[i];
  }
  CHECK(std::abs(hks::tree_sum(v) - double(acc)) <= 1e-12 * std::abs(double(acc)) + 1e-15);

  std::vector<cplx> vc(513);
  cplx ref = 0.0;
  for (size_t i = 0; i < vc.size(); ++i) {
    vc[i] = cplx(std::cos(0.1 * double(i)), std::sin(0.2 * double(i)));
    ref += vc[i];
  }
  CHECK(std::abs(hks::tree_sum(vc) - ref) <= 1e-12 * std::abs(ref));

  CHECK(hks::tree_sum(std::vector<double>{}) == 0.0);
  CHECK(hks::tree_sum(std::vector<double>{3.5}) == 3.5);
}

TEST_CASE("Gauss-Legendre nodes: symmetry, weight sum, polynomial degree") {
  std::vector<double> x, w;
  hks::gauss_legendre(12, x, w);
  REQUIRE(x.size() == 12);

  double wsum = 0.0;
  for (double wi : w) {
    CHECK(wi > 0.0);
    wsum += wi;
  }
  CHECK(std::abs(wsum - 2.0) < 1e-14);
  for (int i = 0; i < 6; ++i) CHECK(std::abs(x[i] + x[11 - i]) < 1e-15);

  // 12 points are exact through degree 23
  double m22 = 0.0, m23 = 0.0;
  for (int i = 0; i < 12; ++i) {
    m22 += w[i] * std::pow(x[i], 22);
    m23 += w[i] * std::pow(x[i], 23);
  }
  CHECK(std::abs(m22 - 2.0 / 23.0) < 1e-14);
  CHECK(std::abs(m23) < 1e-15);

  // cache returns the identical rule
  std::vector<double> x2, w2;
  hks::gauss_legendre(12, x2, w2);
  CHECK(x2 == x);
  CHECK(w2 == w);
}

TEST_CASE("interval quadrature on smooth and endpoint-singular integrands") {
  double cubic = hks::integrate_interval([](double t) { return t * t * t; }, 0.0, 1.0, 1, 12);
  CHECK(std::abs(cubic - 0.25) < 5e-15);

  double invlog = hks::integrate_interval([](double t) { return 1.0 / t; }, 1.0, 3.0, 8, 12);
  CHECK(rel_err(invlog, std::log(3.0)) < 1e-13);

  // x^{-1/2}: grading exponent 4 = 2/(1 - 1/2) crowds panels at the left end
  double g = Decay::exponential(1.0, -0.5).grading_at_zero();
  CHECK(g == doctest::Approx(4.0));
  double sing = hks::integrate_interval([](double t) { return 1.0 / std::sqrt(t); },
                                        0.0, 1.0, 24, 12, g, 1.0);
  CHECK(rel_err(sing, 2.0) < 5e-4);

  double beta = hks::integrate_interval(
      [](double t) { return 1.0 / std::sqrt(t * (1.0 - t)); }, 0.0, 1.0, 32, 12, 4.0, 4.0);
  CHECK(rel_err(beta, kPi) < 1e-3);
}

TEST_CASE("half-line integration against exponential-family closed forms") {
  double one = hks::integrate_halfline([](double t) { return std::exp(-t); },
                                       Decay::exponential(1.0), 1e-10);
  CHECK(rel_err(one, 1.0) < 1e-10);

  double two = hks::integrate_halfline([](double t) { return t * t * std::exp(-t); },
                                       Decay::exponential(1.0, 0.0, 2), 1e-10);
  CHECK(rel_err(two, 2.0) < 1e-10);

  // integrable singularity at 0: Gamma(1/2)
  double gam_half = hks::integrate_halfline(
      [](double t) { return std::exp(-t) / std::sqrt(t); }, Decay::exponential(1.0, -0.5), 1e-6);
  CHECK(rel_err(gam_half, std::sqrt(kPi)) < 1e-5);

  double gauss_mom = hks::integrate_halfline([](double t) { return t * std::exp(-t * t); },
                                             Decay::gaussian(1.0, 0.0, 1), 1e-10);
  CHECK(rel_err(gauss_mom, 0.5) < 1e-10);

  // stretched exponential, mild cusp at the origin
  double stretched = hks::integrate_halfline(
      [](double t) { return std::exp(-2.0 * std::sqrt(t)); },
      Decay::exp_power_of(2.0, 0.5, -0.5), 1e-8);
  CHECK(rel_err(stretched, 0.5) < 1e-7);

  cplx rot = hks::integrate_halfline_c(
      [](double t) { return std::exp(-t) * cplx(std::cos(t), std::sin(t)); },
      Decay::exponential(1.0), 1e-9);
  CHECK(std::abs(rot - cplx(0.5, 0.5)) < 1e-9);
}

TEST_CASE("half-line integration under K-Bessel envelopes") {
  double k0_mass = hks::integrate_halfline([](double t) { return hks::bessel_k(0.0, t); },
                                           Decay::bessel(1.0, 0.0), 1e-8);
  CHECK(rel_err(k0_mass, 0.5 * kPi) < 1e-7);

  double k0_first = hks::integrate_halfline([](double t) { return t * hks::bessel_k(0.0, t); },
                                            Decay::bessel(1.0, 0.0, 0.0, 1), 1e-8);
  CHECK(rel_err(k0_first, 1.0) < 1e-7);
}

TEST_CASE("area integration: Gaussian moments and angular exactness") {
  QuadratureRule rule;
  rule.tol = 1e-8;

  auto mass = hks::refine_area([](cplx z) { return cplx(std::exp(-std::norm(z))); },
                               Decay::gaussian(1.0), rule);
  CHECK(mass.converged);
  CHECK(rel_err(mass.value.real(), kPi) < 1e-8);
  CHECK(std::abs(mass.value.imag()) < 1e-12);

  auto m1 = hks::refine_area(
      [](cplx z) { return cplx(std::norm(z) * std::exp(-std::norm(z))); },
      Decay::gaussian(1.0, 0.0, 2), rule);
  CHECK(rel_err(m1.value.real(), kPi) < 1e-8);

  auto m2 = hks::refine_area(
      [](cplx z) { return cplx(std::norm(z) * std::norm(z) * std::exp(-std::norm(z))); },
      Decay::gaussian(1.0, 0.0, 4), rule);
  CHECK(rel_err(m2.value.real(), 2.0 * kPi) < 1e-8);

  // unmatched holomorphic/antiholomorphic powers integrate to zero by symmetry
  cplx odd3 = hks::integrate_area_once(
      [](cplx z) { return z * z * z * std::exp(-std::norm(z)); }, Decay::gaussian(1.0, 0.0, 3),
      rule);
  CHECK(std::abs(odd3) < 1e-12);

  cplx mixed = hks::integrate_area_once(
      [](cplx z) {
        return z * z * z * z * z * std::conj(z) * std::conj(z) * std::exp(-std::norm(z));
      },
      Decay::gaussian(1.0, 0.0, 7), rule);
  CHECK(std::abs(mixed) < 1e-10);
}

TEST_CASE("area integration of a radial profile matches its radial line reduction") {
  QuadratureRule rule;
  rule.tol = 1e-8;
  Decay d = Decay::gaussian(1.0, 0.0, 2);

  auto f = [](double r) { return (1.0 + r * r) * std::exp(-r * r); };
  cplx area = hks::integrate_area_once([&](cplx z) { return cplx(f(std::abs(z))); }, d, rule);

  hks::LineNodes rad = hks::halfline_nodes(d, rule);
  double line = 0.0;
  for (size_t i = 0; i < rad.t.size(); ++i) line += rad.w[i] * rad.t[i] * f(rad.t[i]);
  line *= 2.0 * kPi;

  CHECK(std::abs(area.real() - line) <= 1e-12 * std::abs(line));
  CHECK(std::abs(area.imag()) < 1e-14);
}

TEST_CASE("area integration reproduces a K-Bessel weighted norm moment") {
  // with weight |z|^nu K_nu(alpha |z|), the n-th squared monomial norm is
  // 4^n n! Gamma(n+nu+1) / alpha^{2n} once scaled by alpha^{nu+2} / (2^{nu+1} pi)
  double alpha = 2.0, nu = 0.5;
  QuadratureRule rule;
  rule.tol = 1e-8;
  Decay d = Decay::bessel(alpha, nu, 2.0 + nu, 2);
  auto wfun = [&](cplx z) {
    double r = std::abs(z);
    return cplx(std::pow(r, 2.0 + nu) * hks::bessel_k(nu, alpha * r));
  };
  auto got = hks::refine_area(wfun, d, rule);
  REQUIRE(got.converged);
  double pref = std::pow(alpha, nu + 2.0) / (std::pow(2.0, nu + 1.0) * kPi);
  double want = 4.0 * std::tgamma(nu + 2.0) / (alpha * alpha);
  CHECK(rel_err(pref * got.value.real(), want) < 1e-7);
}

TEST_CASE("refinement contract: convergence flag, tol=infinity, non-convergence") {
  QuadratureRule rule;
  rule.tol = 1e-8;
  rule.max_refinements = 3;
  auto smooth = hks::refine_area([](cplx z) { return cplx(std::exp(-std::norm(z))); },
                                 Decay::gaussian(1.0), rule);
  CHECK(smooth.converged);

  // discontinuous ring boundary: refinement stalls and the flag reports it
  QuadratureRule tight;
  tight.tol = 1e-10;
  tight.max_refinements = 2;
  auto disk = hks::refine_area(
      [](cplx z) { return cplx(std::abs(z) < 1.0 ? 1.0 : 0.0); }, Decay::compact_on(1.3), tight);
  CHECK_FALSE(disk.converged);
  CHECK(rel_err(disk.value.real(), kPi) < 1e-2);
  CHECK(disk.err_est > 0.0);

  QuadratureRule freebie;
  freebie.tol = std::numeric_limits<double>::infinity();
  auto first = hks::refine_area([](cplx z) { return cplx(std::exp(-std::norm(z))); },
                                Decay::gaussian(1.0), freebie);
  CHECK(first.converged);
  cplx once = hks::integrate_area_once([](cplx z) { return cplx(std::exp(-std::norm(z))); },
                                       Decay::gaussian(1.0), freebie);
  CHECK(first.value == once);

  QuadratureRule shallow;
  shallow.max_refinements = 1;
  CHECK_THROWS_AS(hks::integrate_halfline(
                      [](double t) { return std::exp(-t) * std::abs(std::sin(40.0 * t)); },
                      Decay::exponential(1.0), 1e-12, shallow),
                  std::runtime_error);
}

TEST_CASE("declared decay envelopes are spot-checked at calibration radii") {
  CHECK_THROWS_AS(hks::integrate_halfline([](double t) { return std::exp(0.2 * t); },
                                          Decay::exponential(1.0), 1e-8),
                  std::runtime_error);

  QuadratureRule rule;
  rule.tol = 1e-8;
  CHECK_THROWS_AS(hks::integrate_area_once(
                      [](cplx z) { return cplx(std::exp(0.3 * std::abs(z))); },
                      Decay::exponential(1.0), rule),
                  std::runtime_error);

  // a correctly declared envelope passes untouched
  rule.tail_check = true;
  cplx ok = hks::integrate_area_once([](cplx z) { return cplx(std::exp(-std::norm(z))); },
                                     Decay::gaussian(1.0), rule);
  CHECK(rel_err(ok.real(), kPi) < 1e-6);
}

TEST_CASE("rule validation rejects malformed parameters") {
  auto bad = [](auto mutate) {
    QuadratureRule r;
    mutate(r);
    return r;
  };
  CHECK_THROWS_AS(bad([](QuadratureRule& r) { r.radial_panels = 0; }).validate(),
                  std::invalid_argument);
  CHECK_THROWS_AS(bad([](QuadratureRule& r) { r.gl_points = 1; }).validate(),
                  std::invalid_argument);
  CHECK_THROWS_AS(bad([](QuadratureRule& r) { r.gl_points = 65; }).validate(),
                  std::invalid_argument);
  CHECK_THROWS_AS(bad([](QuadratureRule& r) { r.angular_nodes = 15; }).validate(),
                  std::invalid_argument);
  CHECK_THROWS_AS(bad([](QuadratureRule& r) { r.angular_nodes = 8; }).validate(),
                  std::invalid_argument);
  CHECK_THROWS_AS(bad([](QuadratureRule& r) { r.tol = 0.0; }).validate(),
                  std::invalid_argument);
  CHECK_NOTHROW(QuadratureRule{}.validate());
}

TEST_CASE("node sets stay inside the declared support with positive weights") {
  QuadratureRule rule;
  rule.tol = 1e-8;

  for (const Decay& d : {Decay::exponential(2.0), Decay::gaussian(1.0),
                         Decay::bessel(2.0, 0.5), Decay::compact_on(1.5)}) {
    hks::LineNodes ln = hks::halfline_nodes(d, rule);
    REQUIRE(ln.t.size() == ln.w.size());
    double R = d.truncation_radius(rule.tol);
    for (size_t i = 0; i < ln.t.size(); ++i) {
      CHECK(ln.t[i] > 0.0);
      CHECK(ln.t[i] <= R * (1.0 + 1e-12));
      CHECK(ln.w[i] > 0.0);
    }
  }

  hks::AreaNodes an = hks::area_nodes(Decay::gaussian(1.0), rule);
  CHECK(an.z.size() == an.w.size());
  CHECK(int(an.z.size()) == an.radial_count * an.angular_count);
  for (double w : an.w) CHECK(w > 0.0);

  // truncation radius widens as the tolerance tightens
  Decay e = Decay::exponential(1.0);
  CHECK(e.truncation_radius(1e-12) > e.truncation_radius(1e-6));
  CHECK(Decay::compact_on(2.5).truncation_radius(1e-12) == 2.5);

  CHECK(Decay::bessel(1.0, 0.5).grading_at_zero() == doctest::Approx(2.0 / 1.5));
  CHECK(Decay::bessel(1.0, 2.0).grading_at_zero() == doctest::Approx(1.0));
  CHECK(Decay::compact_on(1.0, 0.0, -0.5).grading_at_edge() == doctest::Approx(4.0));
  CHECK(Decay::exponential(1.0).grading_at_edge() == doctest::Approx(1.0));
}
