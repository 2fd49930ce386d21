#pragma once

#include <complex>
#include <functional>
#include <optional>
#include <vector>

#include "hks/meijer.hpp"
#include "hks/quadrature.hpp"

namespace hks {

enum class Geometry { plane, disk };

// Kernel parameter set.  Plane kernels are pFq(a; b; theta z u*) with p <= q,
// entire; disk kernels are pF_{p-1}(a; b; z u* / theta), holomorphic in
// |z| < sqrt(theta).  No parameter may be a non-positive integer.
struct HypParams {
  std::vector<double> a, b;
  double theta = 1.0;
  Geometry geometry = Geometry::plane;

  int p() const { return static_cast<int>(a.size()); }
  int q() const { return static_cast<int>(b.size()); }
  void validate() const;
};

// The derivative-shift level has two defensible readings.  raised: the shift
// that actually lifts negative lower parameters into integrability,
// l = max(0, -[min b_i]) over non-exempt b.  literal_min: min{0, [min b_i]}
// taken at face value, clamped to zero as a derivative order; with negative
// lower parameters this leaves a non-integrable weight, which
// integral_inner_product reports instead of silently repairing.
enum class LShiftConvention { raised, literal_min };

struct NegativeParamSummary {
  int m = 0;               // negative elements among {a} u {b}
  std::vector<double> d;   // those elements by increasing absolute value
  long nu = 0;             // sum of their floors
  int l = 0;               // shift used by the integral representation
  int l1 = 0;              // disk: lower-parameter shift (plane rule)
  int l2 = 0;              // disk: least k with sum(b) + 1 < sum(a) + 2k
  int l_raw = 0;           // the literal min{0, [min b]} value
};

NegativeParamSummary negative_param_summary(
    const HypParams& h, LShiftConvention conv = LShiftConvention::raised);

// Radial weight, either a pointwise map r -> w(r) on (0, radius) with a
// declared tail profile and (finite) interior sign-change list, or a G-kernel
// weight w(r) = scale * G(theta r^2) on the plane / scale * G(r^2 / theta)
// on the disk of radius sqrt(theta).
struct WeightSpec {
  enum class Kind { pointwise, meijer_g };
  Kind kind = Kind::pointwise;

  std::function<double(double)> w;
  double radius = 0.0;
  std::vector<double> sign_changes;
  Decay tail = Decay::exponential(1.0);

  GSpec g;
  double theta = 1.0;
  double scale = 1.0;
  Geometry geometry = Geometry::plane;

  static WeightSpec pointwise_on(std::function<double(double)> w, double radius,
                                 Decay tail, std::vector<double> sign_changes = {});
  static WeightSpec meijer(GSpec g, double theta, Geometry geometry, double scale = 1.0);
  void validate() const;
};

// sup{x : the tail mass of |w| beyond x is positive}; infinity for plane
// G-weights, sqrt(theta) for disk ones, the declared radius otherwise.
double radius_from_weight(const WeightSpec& w);

struct MomentSeq {
  std::vector<double> c;  // c_k = 2 pi int_0^R r^{2k+1} w(r) dr
  std::vector<double> a;  // same with |w|; a_k >= |c_k|
  int K_max = 0;
};

// Both moment families for k = 0..K_max at relative accuracy rule.tol.
// Throws on divergent moments and propagates quadrature failures.
MomentSeq moments_from_weight(const WeightSpec& w, int K_max,
                              const QuadratureRule& rule = {});

enum class Completeness { complete, not_complete, inconclusive };

struct CompletenessReport {
  Completeness verdict = Completeness::inconclusive;
  double sup_ratio = 0.0;     // max a_k/|c_k| over nonzero c_k
  double slope = 0.0;         // OLS slope of log-ratio over the trailing half
  double slope_stderr = 0.0;
  int points_used = 0;
};

// Boundedness of {a_k/c_k} decided from finite data: growth that is monotone
// over the trailing half with significantly positive log-slope reads
// not_complete, slope zero within confidence reads complete, anything else
// (including fewer than 16 moments) is inconclusive.
CompletenessReport completeness_check(const MomentSeq& m);

enum class TailSign { positive, negative };
enum class SpaceClass { positive_pontryagin, negative_pontryagin, krein, non_complete };

inline constexpr int kInfiniteIndex = -1;

struct SpaceSignature {
  std::vector<int> i_plus, i_minus, i_zero;  // coefficient index sets
  TailSign tail = TailSign::positive;        // eventual coefficient sign
  int pos_index = 0;                         // kInfiniteIndex on the infinite side
  int neg_index = 0;
  SpaceClass space_class = SpaceClass::positive_pontryagin;
};

// Partition {0..signs.size()-1} by coefficient sign; the tail class names the
// infinite side, the finite side's index is the opposite-sign count.
SpaceSignature signature_from_coefficients(const std::vector<int>& signs, TailSign tail);

// Closed-form signature from the negative-parameter data alone: even nu gives
// a positive space whose negative index is the double sum over floor strata,
// odd nu a negative space with the complementary count plus one.  Index sets
// are not populated on this route.
SpaceSignature pontryagin_index_formula(const HypParams& h);

// Independent signature by counting coefficient signs through rising-factorial
// sign products for k <= K_cap.  Requires K_cap > max_i ceil(|d_i|) + 1 so the
// tail sign is provably stable; throws otherwise.
SpaceSignature pontryagin_index_oracle(const HypParams& h, int K_cap);

// Reproducing-kernel value; disk geometry requires |z u*| < theta.
cplx kernel_eval(const HypParams& h, cplx z, cplx u_conj);

// Inner-product coefficients c_k for degrees 0..K: plane
// c_k = (b)_k k! / ((a)_k theta^k), disk c_k = (b)_k k! theta^k / (a)_k.
std::vector<double> kernel_coefficients(const HypParams& h, int K);

using TaylorCoeffs = std::vector<cplx>;

// Holomorphic function as an evaluator plus optional Taylor form; only the
// Taylor form supports the derivative-shift integral paths.
struct HoloFn {
  std::function<cplx(cplx)> eval;
  std::optional<TaylorCoeffs> taylor;

  static HoloFn from_coeffs(TaylorCoeffs c);
  static HoloFn monomial(int n);
};

// sum c_k f_k conj(g_k) over the common coefficient range.
cplx series_inner_product(const HypParams& h, const TaylorCoeffs& f,
                          const TaylorCoeffs& g);

// Kernel section s_u(z) = K(z, u*) truncated at degree K; reproduces f(u)
// under series_inner_product against any polynomial of degree <= K.
HoloFn kernel_section(const HypParams& h, cplx u, int K);

// The unshifted (l = 0) G-weight realizing the inner product as a plain area
// integral, with the gamma-ratio prefactor folded into scale.  Throws when the
// parameters require a derivative shift.
WeightSpec weight_from_params(const HypParams& h);

// Area-integral inner product via the representation selected by the shift
// levels: the plain weight at l = 0, the derivative-shifted weight plus the
// finite origin correction sum at l > 0, and on the disk the |z|^{-2}
// multiplier route when only the sum condition forces a shift.  Matches
// series_inner_product within quadrature tolerance.  Throws on non-admissible
// weights (the literal_min reading with negative lower parameters lands here)
// and on quadrature failure.
cplx integral_inner_product(const HypParams& h, const HoloFn& f, const HoloFn& g,
                            const QuadratureRule& rule = {},
                            LShiftConvention conv = LShiftConvention::raised);

}  // namespace hks
