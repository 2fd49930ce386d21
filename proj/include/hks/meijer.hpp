#pragma once

#include <array>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "hks/quadrature.hpp"
#include "hks/specfun.hpp"

namespace hks {

// Weight kernel G^{q,0}_{p,q}(x | a; b): p upper parameters a, q lower
// parameters b, p <= q.  Only this order is supported.
struct GSpec {
  int p = 0, q = 0;
  std::vector<double> a, b;

  void validate() const;
  int mu() const { return q - p; }  // order of the exponential large-x regime
  double sum_a() const;
  double sum_b() const;
  double alpha_exponent() const;  // sum(a) - sum(b) + (q - p + 1)/2
};

// Poles of h(s) = prod Gamma(b_j + s) / prod Gamma(a_i + s) sit at
// s = -(b_j + k), k >= 0.  Entries are merged by location (near-coincident
// locations within 1e-8 snap to one multiple pole) and carry the multiplicity
// left after upper-parameter cancellation; cancelled poles are dropped.
struct PoleEntry {
  int j = 0;       // representative lower-parameter index
  int k = 0;       // representative ladder shift
  double s = 0.0;  // pole location
  int multiplicity = 1;
};

struct PoleTable {
  std::vector<PoleEntry> entries;  // ordered by decreasing s
  // set when several pole hits overlap with cancellations, where a pairing
  // convention (we count totals) could matter
  bool ambiguous_cancellation = false;
};

PoleTable build_pole_table(const GSpec& g, int k_max);

// h(s) itself; h_ratio throws when s sits on a pole of the numerator.
double h_ratio(const GSpec& g, double s);
double log_h_ratio_signed(const GSpec& g, double s, int& sign);

struct GValue {
  double value = 0.0;
  double err = 0.0;  // cancellation + derivative-coefficient noise + tail bound
  bool converged = false;
};

// Residue-series evaluator: sum over the pole table of
// x^{beta} sum_i c_i ln^i(1/x), with coefficients from exact regularized
// gamma products and their logarithmic derivatives (multiplicities up to 3;
// higher rejected).  For p = q the series represents the function on (0, 1)
// only; there eval() switches to a three-term (1-x)^{e+m} expansion near the
// support edge, where any truncated ladder loses convergence.
class GExpansion {
 public:
  explicit GExpansion(GSpec g, int k_max = 0);  // 0: 200, or 4000 when p = q

  GValue eval(double x) const;
  const PoleTable& poles() const { return table_; }
  const GSpec& spec() const { return g_; }
  int k_max() const { return k_max_; }

 private:
  struct Term {
    double beta = 0.0;
    int mult = 1;
    double log_scale = 0.0;
    std::array<double, 3> c{};  // scaled coefficients of ln^i(1/x)
    double noise = 0.0;         // relative coefficient accuracy
  };
  GSpec g_;
  int k_max_ = 0;
  bool finite_tail_ = false;  // ladder tail fully cancelled: sum is exact
  bool edge_ready_ = false;   // p = q only: edge coefficients available
  double edge_e_ = 0.0;       // sum(a) - sum(b) - 1
  double x_switch_ = 1.0;
  std::array<double, 3> edge_d_{};
  PoleTable table_;
  std::vector<Term> terms_;
};

// Cached dispatching evaluator.  Closed forms for (p,q) = (0,1), (0,2) and
// the beta-type (1,1) spec; series plus support-edge expansion for p = q
// (zero beyond x = 1).  Other p < q specs use the residue series on (0, 1]
// and a numerical Mellin-Barnes contour above, except when the asymptotic
// correction series terminates, in which case the function equals the
// leading asymptote times that polynomial and is evaluated so everywhere.
// eval() reports precision loss through the error channel instead of
// throwing.
class GEvaluator {
 public:
  explicit GEvaluator(GSpec g, int k_max = 0);

  GValue eval(double x) const;
  double operator()(double x) const { return eval(x).value; }
  const GSpec& spec() const { return g_; }

 private:
  enum class Route { exp01, bessel02, beta11, split, balanced };
  // Vertical-line contour data shared by all x with similar saddle u =
  // x^{1/mu}: trapezoid nodes t_j = j * step on Re s = c and the node values
  // log h(c + i t_j).  Bands are keyed by half octaves of u / c_min.
  struct MBBand {
    double c = 0.0;
    double step = 0.0;
    std::vector<cplx> lh;
    std::vector<double> mag;  // |Re log h| + |Im log h|, rounding mass
  };
  const MBBand& mb_band(double u) const;
  GValue mb_eval(double x) const;

  GSpec g_;
  Route route_ = Route::split;
  std::optional<GExpansion> series_;
  std::vector<double> asym_m_;  // split: correction coefficients
  bool asym_exact_ = false;     // split: correction series terminates
  double mb_cmin_ = 0.0;        // split: leftmost admissible contour abscissa
  mutable std::map<int, MBBand> mb_bands_;
};

// One-shot wrapper around GEvaluator preserving strict error semantics:
// throws on x <= 0, on p = q with x >= 1, and when the series route cannot
// settle within k_max.
double g_eval(const GSpec& g, double x, int k_max = 0);

// p = q specs with sum(b) < sum(a) vanish identically beyond x = 1.
double g_eval_unit_interval(const GSpec& g, double x);

// Leading large-x behaviour (2pi)^{(mu-1)/2} mu^{-1/2} x^{(1-alpha)/mu}
// e^{-mu x^{1/mu}}; requires p < q.
double g_asymptotic_large(const GSpec& g, double x);

// Coefficients M_r of the full large-x expansion
//   G(x) ~ g_asymptotic_large(x) * sum_r M_r x^{-r/mu},   M_0 = 1,
// obtained by feeding the ansatz into the q-th order equation the function
// satisfies and solving the resulting triangular recursion.  The series is
// divergent; use optimal truncation.
std::vector<double> g_asymptotic_coefficients(const GSpec& g, int count);

// Crossover in u = x^{1/mu} where the series' cancellation noise in doubles
// meets the leading asymptote's own error; beyond it the series is strictly
// worse no matter how many terms are summed.
double series_asymptote_crossover(int mu);

// int_0^inf x^{s-1} G(x) dx (upper limit 1 when p = q), for cross-checking
// against h(s).  The rule supplies the starting resolution and the
// convergence threshold between refinements.
double mellin_moment(const GSpec& g, double s, const QuadratureRule& rule = {});

struct AdmissibilityReport {
  bool admissible = false;
  std::string reason;  // names the violated condition when not admissible
};

// Weight admissibility on (0, inf): every b_i > -1 unless b_i = a_j + k for
// some integer k >= 0, and theta > 0.
AdmissibilityReport is_admissible_weight(const GSpec& g, double theta);

}  // namespace hks
