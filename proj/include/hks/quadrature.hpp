#pragma once

#include <complex>
#include <functional>
#include <vector>

namespace hks {

using cplx = std::complex<double>;

// How an integrand dies off; drives truncation radii and mesh grading.
struct Decay {
  enum class Kind { exp_power, bessel_k, compact };
  Kind kind = Kind::exp_power;
  double rate = 1.0;              // exp(-rate * t^power) or K_nu(rate * t) envelope
  double power = 1.0;             // exp_power only
  double nu = 0.0;                // bessel_k order (envelope exponent correction)
  double support_end = 0.0;       // compact support (0, end)
  double singular_exponent = 0.0; // integrand ~ t^sigma as t -> 0+
  double edge_exponent = 0.0;     // integrand ~ (end - t)^sigma at a compact edge
  int degree_hint = 0;            // polynomial growth riding on the decay

  static Decay exponential(double rate, double sing = 0.0, int deg = 0);
  static Decay gaussian(double rate, double sing = 0.0, int deg = 0);
  static Decay exp_power_of(double rate, double power, double sing = 0.0, int deg = 0);
  static Decay bessel(double rate, double nu, double sing = 0.0, int deg = 0);
  static Decay compact_on(double end, double sing = 0.0, double edge = 0.0);

  // radius R with declared tail mass below 0.1 * tol
  double truncation_radius(double tol) const;
  double grading_at_zero() const;
  double grading_at_edge() const;
};

struct QuadratureRule {
  int radial_panels = 16;
  int gl_points = 12;
  int angular_nodes = 32;   // uniform trapezoid on [0, 2pi), even, >= 16
  double tol = 1e-8;
  double truncation_override = 0.0;  // 0 = derive from decay
  double absolute_scale = 0.0;       // convergence scale floor for near-zero results
  int max_refinements = 4;
  bool tail_check = true;  // spot-check the declared envelope past the truncation radius
  void validate() const;
};

struct Refined {
  cplx value{0.0, 0.0};
  double err_est = 0.0;
  bool converged = false;
};

// Fixed-order pairwise reduction; bit-stable for a fixed node layout.
double tree_sum(const std::vector<double>& v);
cplx tree_sum(const std::vector<cplx>& v);

// Gauss-Legendre nodes/weights on [-1, 1], cached per order.
void gauss_legendre(int n, std::vector<double>& nodes, std::vector<double>& weights);

struct LineNodes {
  std::vector<double> t, w;
};

// Nodes for int_0^inf weighted by the decay profile: graded composite
// Gauss-Legendre panels on [0, R] with R from the truncation radius.
LineNodes halfline_nodes(const Decay& d, const QuadratureRule& rule);

// Graded composite Gauss-Legendre nodes on [a, b]; grade > 1 applies the power
// substitution x = v^grade toward the respective endpoint, turning an endpoint
// factor x^sigma into an integer power of v.
LineNodes interval_nodes(double a, double b, int panels, int gl_points,
                         double grade_a = 1.0, double grade_b = 1.0);

struct AreaNodes {
  std::vector<cplx> z;
  std::vector<double> w;  // includes the r dr dphi factor
  int radial_count = 0;
  int angular_count = 0;
};

AreaNodes area_nodes(const Decay& radial_decay, const QuadratureRule& rule);

double integrate_halfline(const std::function<double(double)>& f, const Decay& d,
                          double tol, QuadratureRule rule = {});
cplx integrate_halfline_c(const std::function<cplx(double)>& f, const Decay& d,
                          double tol, QuadratureRule rule = {});

// Single evaluation at the given rule (no refinement).
cplx integrate_area_once(const std::function<cplx(cplx)>& f, const Decay& radial_decay,
                         const QuadratureRule& rule);

// Doubles radial panels and angular nodes until two successive values agree to
// rule.tol (relative, floored by rule.absolute_scale) or the refinement cap is
// reached; the last value and difference are always returned.
Refined refine_area(const std::function<cplx(cplx)>& f, const Decay& radial_decay,
                    QuadratureRule rule);

double integrate_interval(const std::function<double(double)>& f, double a, double b,
                          int panels, int gl_points, double grade_a = 1.0, double grade_b = 1.0);

}  // namespace hks
