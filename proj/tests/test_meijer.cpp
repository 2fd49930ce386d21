#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "hks/meijer.hpp"
#include "hks/specfun.hpp"

#include <cmath>
#include <stdexcept>

using hks::AdmissibilityReport;
using hks::GExpansion;
using hks::GSpec;
using hks::GValue;
using hks::PoleTable;
using hks::QuadratureRule;

namespace {

double rel_err(double got, double want) { return std::abs(got - want) / std::abs(want); }

GSpec spec(std::vector<double> a, std::vector<double> b) {
  GSpec g;
  g.p = static_cast<int>(a.size());
  g.q = static_cast<int>(b.size());
  g.a = std::move(a);
  g.b = std::move(b);
  return g;
}

}  // namespace

TEST_CASE("pole table: single gamma ladder") {
  PoleTable t = hks::build_pole_table(spec({}, {0.0}), 2);
  REQUIRE(t.entries.size() == 3);
  CHECK(t.entries[0].s == doctest::Approx(0.0));
  CHECK(t.entries[1].s == doctest::Approx(-1.0));
  CHECK(t.entries[2].s == doctest::Approx(-2.0));
  for (const auto& e : t.entries) CHECK(e.multiplicity == 1);
  CHECK_FALSE(t.ambiguous_cancellation);
}

TEST_CASE("pole table: coincident ladders merge into double poles") {
  PoleTable t = hks::build_pole_table(spec({}, {0.0, 0.0}), 1);
  REQUIRE(t.entries.size() == 2);
  CHECK(t.entries[0].s == doctest::Approx(0.0));
  CHECK(t.entries[0].multiplicity == 2);
  CHECK(t.entries[1].s == doctest::Approx(-1.0));
  CHECK(t.entries[1].multiplicity == 2);
}

TEST_CASE("pole table: upper-parameter ladder cancels all but the head") {
  // h(s) = Gamma(1+s)/Gamma(2+s) = 1/(1+s): the shifted poles disappear
  PoleTable t = hks::build_pole_table(spec({2.0}, {1.0}), 2);
  REQUIRE(t.entries.size() == 1);
  CHECK(t.entries[0].s == doctest::Approx(-1.0));
  CHECK(t.entries[0].multiplicity == 1);
}

TEST_CASE("pole table: mixed multiplicities with partial cancellation") {
  // h(s) = Gamma(1+s)Gamma(s)/Gamma(2+s) = Gamma(s)/(1+s)
  PoleTable t = hks::build_pole_table(spec({2.0}, {1.0, 0.0}), 2);
  REQUIRE(t.entries.size() == 4);
  CHECK(t.entries[0].s == doctest::Approx(0.0));
  CHECK(t.entries[0].multiplicity == 1);
  CHECK(t.entries[1].s == doctest::Approx(-1.0));
  CHECK(t.entries[1].multiplicity == 2);
  CHECK(t.entries[2].s == doctest::Approx(-2.0));
  CHECK(t.entries[2].multiplicity == 1);
  CHECK(t.entries[3].s == doctest::Approx(-3.0));
  CHECK(t.entries[3].multiplicity == 1);
  // overlapping hit + cancellation: counting convention flagged
  CHECK(t.ambiguous_cancellation);
}

TEST_CASE("pole table: locations snap within 1e-8 and separate beyond") {
  PoleTable close = hks::build_pole_table(spec({}, {0.3, 0.3 + 1e-9}), 0);
  REQUIRE(close.entries.size() == 1);
  CHECK(close.entries[0].multiplicity == 2);

  PoleTable apart = hks::build_pole_table(spec({}, {0.3, 0.3 + 1e-7}), 0);
  REQUIRE(apart.entries.size() == 2);
  CHECK(apart.entries[0].multiplicity == 1);
  CHECK(apart.entries[1].multiplicity == 1);
}

TEST_CASE("gamma ratio h(s)") {
  GSpec g = spec({1.3}, {0.3, 0.6});
  for (double s : {0.5, 1.0, 1.7, 3.0}) {
    double want = std::tgamma(0.3 + s) * std::tgamma(0.6 + s) / std::tgamma(1.3 + s);
    CHECK(rel_err(hks::h_ratio(g, s), want) < 1e-14);
  }
  // negative-argument gamma keeps its sign
  CHECK(rel_err(hks::h_ratio(spec({}, {-0.5}), 0.0), -2.0 * std::sqrt(3.14159265358979323846)) < 1e-14);
  // numerator pole rejected, denominator pole gives zero
  CHECK_THROWS_AS(hks::h_ratio(spec({}, {0.0}), 0.0), std::domain_error);
  CHECK(hks::h_ratio(spec({0.0}, {0.5}), 0.0) == 0.0);
}

// Reference values below were generated with mpmath's meijerg at 40-digit
// working precision and rounded to 17 significant digits.

TEST_CASE("residue series: simple poles with a cancelled ladder") {
  GExpansion ex(spec({1.3}, {0.3, 0.6}));
  struct Pt {
    double x, ref, tol;
  };
  for (Pt p : {Pt{0.5, 0.45242038624558936, 1e-13}, Pt{2.0, 0.081122864594166899, 1e-12},
               Pt{5.0, 0.003157792616372006, 1e-10}, Pt{10.0, 1.6980777861441926e-5, 1e-6}}) {
    GValue v = ex.eval(p.x);
    CHECK(v.converged);
    CHECK(rel_err(v.value, p.ref) < p.tol);
    // the error channel must cover the actual defect
    CHECK(std::abs(v.value - p.ref) <= 3.0 * v.err + 1e-15 * std::abs(p.ref));
  }
}

TEST_CASE("residue series: triple poles via finite differences") {
  GExpansion ex(spec({}, {0.0, 0.0, 0.0}));
  struct Pt {
    double x, ref, tol;
  };
  // alternating-term cancellation grows with x
  for (Pt p : {Pt{0.25, 0.75436113711549752, 1e-12}, Pt{1.0, 0.16404160674837607, 1e-12},
               Pt{4.0, 0.01832766066160097, 1e-11}}) {
    GValue v = ex.eval(p.x);
    CHECK(v.converged);
    CHECK(rel_err(v.value, p.ref) < p.tol);
  }
}

TEST_CASE("residue series: mixed simple and double poles") {
  GExpansion ex(spec({2.0}, {1.0, 0.0}));
  CHECK(rel_err(ex.eval(0.5).value, 0.32664386232455302) < 1e-12);
  CHECK(rel_err(ex.eval(3.0).value, 0.010641925085272831) < 3e-10);
}

TEST_CASE("residue series: double pole against the summed closed form") {
  GExpansion ex(spec({}, {0.0, 0.0}));
  for (double x : {1e-8, 0.01, 0.25, 1.0, 4.0}) {
    double want = 2.0 * hks::bessel_k(0.0, 2.0 * std::sqrt(x));
    CHECK(rel_err(ex.eval(x).value, want) < 1e-11);
  }
  // leading behaviour ln(1/x) - 2 gamma_E near zero, up to O(x ln x)
  double x = 1e-8;
  double want = std::log(1.0 / x) - 2.0 * 0.57721566490153286;
  CHECK(rel_err(ex.eval(x).value, want) < 3e-8);
}

TEST_CASE("residue series: balanced spec on the unit interval") {
  GExpansion ex(spec({1.0, 2.0}, {0.2, 0.4}));
  CHECK(rel_err(ex.eval(0.3).value, 0.59002334395982755) < 1e-12);
  CHECK(rel_err(ex.eval(0.8).value, 0.088282622458403734) < 1e-11);
}

TEST_CASE("residue series: three-gamma spec with spread parameters") {
  GExpansion ex(spec({}, {0.5, 0.0, -0.3}));
  CHECK(rel_err(ex.eval(1.0).value, 0.18835690272153479) < 1e-12);
  CHECK(rel_err(ex.eval(20.0).value, 0.00048276999008669556) < 1e-7);
}

TEST_CASE("balanced p = q = 1 spec has the finite beta-form series") {
  GSpec g = spec({2.5}, {0.5});
  for (double x : {0.05, 0.3, 0.7, 0.95}) {
    double want = std::sqrt(x) * (1.0 - x);  // x^b (1-x)^{a-b-1} / Gamma(a-b)
    CHECK(rel_err(hks::g_eval(g, x), want) < 1e-14);
  }
  CHECK(rel_err(hks::g_eval(g, 0.3), 0.38340579025361628) < 1e-14);
}

TEST_CASE("g_eval closed forms for one and two lower parameters") {
  for (double x : {0.1, 1.0, 7.5, 30.0}) {
    CHECK(rel_err(hks::g_eval(spec({}, {0.0}), x), std::exp(-x)) < 1e-15);
    double b = 0.7;
    CHECK(rel_err(hks::g_eval(spec({}, {b}), x), std::pow(x, b) * std::exp(-x)) < 1e-14);
  }
  CHECK(rel_err(hks::g_eval(spec({}, {0.0, 0.5}), 2.0), 0.1047622081043848) < 1e-13);
  CHECK(rel_err(hks::g_eval(spec({}, {0.0, 1.0}), 1.5), 0.19275789963381956) < 1e-13);
}

TEST_CASE("large-x asymptote and the crossover switch") {
  // in u = x^{1/mu}: noise of the series meets the asymptote's own defect
  CHECK(hks::series_asymptote_crossover(1) == doctest::Approx(16.6).epsilon(0.03));
  CHECK(hks::series_asymptote_crossover(2) == doctest::Approx(8.48).epsilon(0.03));
  CHECK(hks::series_asymptote_crossover(3) == doctest::Approx(5.7).epsilon(0.03));

  // one-term asymptote carries a ~1/x defect at moderate x
  GSpec g = spec({1.3}, {0.3, 0.6});
  double r30 = 2.3474901069631757e-14 / hks::g_asymptotic_large(g, 30.0);
  CHECK(std::abs(r30 - 0.97788262503969825) < 1e-10);
  CHECK(hks::g_eval(g, 30.0) == hks::g_asymptotic_large(g, 30.0));

  // series and asymptote agree to their shared error level at the crossover
  double xc = hks::series_asymptote_crossover(1);
  GExpansion ex(g);
  double ratio = ex.eval(xc * 0.999).value / hks::g_asymptotic_large(g, xc * 0.999);
  CHECK(ratio > 0.8);
  CHECK(ratio < 1.2);
}

TEST_CASE("g_eval small-x log-log slope equals the leading exponent") {
  auto slope = [](const GSpec& g) {
    double lo = hks::g_eval(g, 1e-6), hi = hks::g_eval(g, 1e-5);
    return (std::log(hi) - std::log(lo)) / std::log(10.0);
  };
  CHECK(std::abs(slope(spec({1.3}, {0.3, 0.6})) - 0.3) < 0.02);
  CHECK(std::abs(slope(spec({}, {0.3, 0.9})) - 0.3) < 0.02);
  CHECK(std::abs(slope(spec({2.0}, {1.0, 0.0})) - 0.0) < 0.02);
}

TEST_CASE("g_eval domain checks") {
  CHECK_THROWS_AS(hks::g_eval(spec({}, {0.0}), 0.0), std::domain_error);
  CHECK_THROWS_AS(hks::g_eval(spec({}, {0.0}), -1.0), std::domain_error);
  CHECK_THROWS_AS(hks::g_eval(spec({2.5}, {0.5}), 1.0), std::domain_error);
  GSpec bad;
  bad.p = 1;
  bad.q = 1;
  bad.b = {0.5};
  CHECK_THROWS_AS(hks::g_eval(bad, 0.5), std::invalid_argument);
  // truncation failure surfaces instead of returning a bad value
  CHECK_THROWS_AS(hks::g_eval(spec({1.5}, {0.2, 0.4}), 0.5, 5), std::runtime_error);
}

TEST_CASE("balanced support-edge expansion") {
  // infinite ladder whose closed beta form is known at any x: validates the
  // matched (1-x)^{e+m} coefficients straight through GExpansion
  GSpec g = spec({2.5}, {0.4});
  GExpansion ex(g);
  auto beta_form = [](double x) {
    return std::pow(x, 0.4) * std::pow(1.0 - x, 1.1) / std::tgamma(2.1);
  };
  // series side; the stop rule leaves a geometric x/(1-x) tail at this x
  CHECK(rel_err(ex.eval(0.95).value, 0.034691500749321591336) < 1e-10);
  for (double x : {0.992, 0.9995, 0.9999999}) {
    hks::GValue v = ex.eval(x);
    CHECK(v.converged);
    CHECK(rel_err(v.value, beta_form(x)) < 3e-6);
    CHECK(std::abs(v.value - beta_form(x)) <= 3.0 * v.err + 1e-14 * beta_form(x));
  }
  CHECK(rel_err(ex.eval(0.9999999).value, beta_form(0.9999999)) < 1e-9);

  // two-ladder balanced spec against a high-precision residue sum (mpmath)
  GSpec g2 = spec({1.5, 0.8}, {0.2, 0.1});
  hks::GEvaluator ev(g2);
  CHECK(rel_err(ev.eval(0.9).value, 0.10306609360181037659) < 1e-11);
  CHECK(rel_err(ev.eval(0.97).value, 0.030265274065917299124) < 1e-10);

  // triple pole at the leading ladder point, sign change inside (0,1), and a
  // divergent (1-x)^{-1/2} edge; references from mpmath
  GSpec g4 = spec({-0.5, 2.0, 2.0}, {1.0, 1.0, 1.0});
  hks::GEvaluator ev4(g4);
  CHECK(rel_err(ev4.eval(0.5).value, -0.42708426686957593927) < 1e-11);
  CHECK(rel_err(ev4.eval(0.9).value, 0.95809046992200670248) < 1e-10);
  CHECK(rel_err(ev4.eval(0.999).value, 17.752100379552941671) < 1e-6);

  // exact log-form series keeps priority over the edge expansion; the
  // constant residue coefficient is an exact zero only up to rounding, so
  // the relative tolerance widens as log(1/x) -> 0
  GSpec g3 = spec({1.0, 2.0, 2.0}, {1.0, 1.0, 1.0});
  hks::GEvaluator ev3(g3);
  const double tol3[] = {1e-13, 1e-12, 3e-10};
  int ti = 0;
  for (double x : {0.5, 0.995, 0.99999}) {
    hks::GValue v = ev3.eval(x);
    CHECK(v.converged);
    CHECK(rel_err(v.value, x * std::log(1.0 / x)) < tol3[ti++]);
  }
  CHECK(ev3.eval(1.2).value == 0.0);
}

TEST_CASE("dispatching evaluator closed forms and handover") {
  hks::GEvaluator beta(spec({2.5}, {0.5}));
  CHECK(rel_err(beta.eval(0.3).value, 0.38340579025361628) < 1e-14);
  CHECK(rel_err(beta.eval(0.99999).value, std::sqrt(0.99999) * 1e-5) < 1e-11);
  CHECK(beta.eval(1.0).value == 0.0);

  hks::GEvaluator e01(spec({}, {0.7}));
  CHECK(rel_err(e01.eval(2.0).value, std::pow(2.0, 0.7) * std::exp(-2.0)) < 1e-14);

  // split route: series below the crossover, asymptote beyond, consistent at it
  GSpec g = spec({1.3}, {0.3, 0.6});
  hks::GEvaluator ev(g);
  double xc = hks::series_asymptote_crossover(1);
  double lo = ev.eval(xc * 0.98).value, hi = ev.eval(xc * 1.02).value;
  CHECK(rel_err(lo, hi * std::exp(xc * 0.04)) < 0.2);  // both track e^{-x} locally
  CHECK(ev.eval(30.0).value == hks::g_asymptotic_large(g, 30.0));
}

TEST_CASE("balanced specs vanish beyond the unit interval") {
  GSpec g = spec({2.5}, {0.5});
  CHECK(hks::g_eval_unit_interval(g, 1.5) == 0.0);
  CHECK(hks::g_eval_unit_interval(g, 100.0) == 0.0);
  GSpec gg = spec({1.0, 2.0}, {0.2, 0.4});
  CHECK(hks::g_eval_unit_interval(gg, 2.0) == 0.0);
  CHECK_THROWS_AS(hks::g_eval_unit_interval(g, 0.9), std::domain_error);
  CHECK_THROWS_AS(hks::g_eval_unit_interval(spec({}, {0.0}), 2.0), std::domain_error);
  // sum(b) >= sum(a) means mass escapes past 1: reject
  CHECK_THROWS_AS(hks::g_eval_unit_interval(spec({0.5}, {0.5}), 2.0), std::domain_error);
}

TEST_CASE("mellin moments reproduce the gamma ratio") {
  std::vector<GSpec> family = {spec({}, {0.0}), spec({}, {0.7}), spec({1.3}, {0.3, 0.6}),
                               spec({}, {0.0, 0.5}), spec({2.5}, {0.5})};
  for (const GSpec& g : family)
    for (double s : {1.0, 1.5, 2.0, 3.0})
      CHECK(rel_err(hks::mellin_moment(g, s), hks::h_ratio(g, s)) < 1e-5);
}

TEST_CASE("mellin moments: wider specs and the balanced route") {
  GSpec d = spec({1.0, 2.0}, {0.2, 0.4});
  for (double s : {1.0, 2.0, 3.0})
    CHECK(rel_err(hks::mellin_moment(d, s), hks::h_ratio(d, s)) < 1e-5);

  // steeper two-exponent specs: the integrand's own noise floor near the
  // series/asymptote crossover caps what s the target tolerance allows
  GSpec f = spec({}, {0.5, 0.0, -0.3});
  CHECK(rel_err(hks::mellin_moment(f, 1.0), hks::h_ratio(f, 1.0)) < 1e-5);
  CHECK_THROWS_AS(hks::mellin_moment(f, 3.0), std::runtime_error);

  GSpec b3 = spec({}, {0.0, 0.0, 0.0});
  CHECK(rel_err(hks::mellin_moment(b3, 1.0), hks::h_ratio(b3, 1.0)) < 1e-5);
}

TEST_CASE("mellin moment rejects bad s and refuses to mislead") {
  GSpec g = spec({}, {0.0});
  CHECK_THROWS_AS(hks::mellin_moment(g, 0.0), std::domain_error);
  CHECK_THROWS_AS(hks::mellin_moment(g, -1.0), std::domain_error);
  CHECK_THROWS_AS(hks::mellin_moment(spec({}, {-0.5}), 0.4), std::domain_error);
  QuadratureRule tight;
  tight.max_refinements = 0;
  CHECK_THROWS_AS(hks::mellin_moment(spec({1.0, 2.0}, {0.2, 0.4}), 1.0, tight),
                  std::runtime_error);
}

TEST_CASE("weight admissibility") {
  CHECK(hks::is_admissible_weight(spec({}, {0.5}), 1.0).admissible);
  CHECK(hks::is_admissible_weight(spec({}, {0.3, 0.9}), 2.0).admissible);
  // b = -2 needs an upper ladder mate; a = 1 sits above it, so no exemption
  AdmissibilityReport r = hks::is_admissible_weight(spec({1.0}, {-2.0, 0.0}), 1.0);
  CHECK_FALSE(r.admissible);
  CHECK_FALSE(r.reason.empty());
  CHECK_FALSE(hks::is_admissible_weight(spec({}, {-1.2}), 1.0).admissible);
  CHECK_FALSE(hks::is_admissible_weight(spec({}, {-1.0}), 1.0).admissible);
  // exemption: b = a + k with k >= 0
  CHECK(hks::is_admissible_weight(spec({-2.0}, {-2.0, 0.5}), 1.0).admissible);
  CHECK(hks::is_admissible_weight(spec({-3.0}, {-2.0, 0.5}), 1.0).admissible);
  CHECK_FALSE(hks::is_admissible_weight(spec({}, {0.5}), 0.0).admissible);
  CHECK_FALSE(hks::is_admissible_weight(spec({}, {0.5}), -2.0).admissible);
}

TEST_CASE("multiplicity above three is rejected at expansion build") {
  CHECK_THROWS_AS(GExpansion(spec({}, {0.0, 0.0, 0.0, 0.0})), std::domain_error);
  // the table itself still reports it
  PoleTable t = hks::build_pole_table(spec({}, {0.0, 0.0, 0.0, 0.0}), 0);
  REQUIRE(t.entries.size() == 1);
  CHECK(t.entries[0].multiplicity == 4);
}

TEST_CASE("expansion defaults and spec accessors") {
  GExpansion narrow(spec({1.3}, {0.3, 0.6}));
  CHECK(narrow.k_max() == 200);
  GExpansion balanced(spec({2.5}, {0.5}));
  CHECK(balanced.k_max() == 4000);
  GExpansion custom(spec({}, {0.0}), 12);
  CHECK(custom.k_max() == 12);

  GSpec g = spec({1.3}, {0.3, 0.6});
  CHECK(g.mu() == 1);
  CHECK(g.alpha_exponent() == doctest::Approx(1.3 - 0.9 + 1.0));
  CHECK(g.sum_a() == doctest::Approx(1.3));
  CHECK(g.sum_b() == doctest::Approx(0.9));
}
