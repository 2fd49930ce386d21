#include "hks/rk_space.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <memory>
#include <numeric>
#include <stdexcept>
#include <string>

#include "hks/specfun.hpp"

namespace hks {

namespace {

constexpr double kSnap = 1e-8;
constexpr double kPi = 3.141592653589793238462643383279502884;
constexpr double kInf = std::numeric_limits<double>::infinity();

bool nonpositive_integer(double x) {
  double r = std::round(x);
  return r <= 0.0 && std::abs(x - r) < kSnap;
}

long floor_snapped(double x) {
  double r = std::round(x);
  if (std::abs(x - r) < kSnap) return static_cast<long>(r);
  return static_cast<long>(std::floor(x));
}

long ceil_snapped(double x) {
  double r = std::round(x);
  if (std::abs(x - r) < kSnap) return static_cast<long>(r);
  return static_cast<long>(std::ceil(x));
}

long mod2(long x) { return ((x % 2) + 2) % 2; }

// log |prod Gamma(a_i) / prod Gamma(b_j)| with the product sign.
std::pair<double, int> gamma_ratio_signed(const std::vector<double>& a,
                                          const std::vector<double>& b) {
  double lg = 0.0;
  int sign = 1;
  for (double v : a) {
    int s;
    lg += log_gamma_signed(v, s);
    if (s == 0) throw std::domain_error("gamma ratio: parameter at a pole");
    sign *= s;
  }
  for (double v : b) {
    int s;
    lg -= log_gamma_signed(v, s);
    if (s == 0) throw std::domain_error("gamma ratio: parameter at a pole");
    sign *= s;
  }
  return {lg, sign};
}

// Composite GL with endpoint gradings, panels doubled until two passes agree.
// The floor carries the integrand's own evaluation noise: refinement cannot
// and should not resolve below it.
double refine_interval(const std::function<double(double)>& f, double a, double b,
                       double grade_a, double grade_b, double tol, double floor = 0.0) {
  int panels = 8;
  int floor_hits = 0;
  double prev = integrate_interval(f, a, b, panels, 12, grade_a, grade_b);
  for (int round = 0; round < 8; ++round) {
    panels *= 2;
    double val = integrate_interval(f, a, b, panels, 12, grade_a, grade_b);
    double dv = std::abs(val - prev);
    if (dv <= tol * std::abs(val) + 1e-300) return val;
    // floor-sized steps can be grid placement luck; trust the noise floor
    // only once the differences stay inside it
    if (dv <= floor) {
      if (++floor_hits >= 2) return val;
    } else {
      floor_hits = 0;
    }
    prev = val;
  }
  throw std::runtime_error("moment quadrature failed to settle on a subinterval");
}

struct WeightEval {
  std::function<double(double)> value;
  std::function<double(double)> noise;  // pointwise evaluation uncertainty
};

WeightEval weight_evaluator(const WeightSpec& w) {
  if (w.kind == WeightSpec::Kind::pointwise)
    return {w.w, [](double) { return 0.0; }};
  auto ev = std::make_shared<GEvaluator>(w.g);
  const double theta = w.theta, scale = w.scale, ascale = std::abs(w.scale);
  if (w.geometry == Geometry::plane)
    return {[ev, theta, scale](double r) { return scale * ev->eval(theta * r * r).value; },
            [ev, theta, ascale](double r) { return ascale * ev->eval(theta * r * r).err; }};
  return {[ev, theta, scale](double r) { return scale * ev->eval(r * r / theta).value; },
          [ev, theta, ascale](double r) { return ascale * ev->eval(r * r / theta).err; }};
}

// Radial decay profile of the weight itself (without the moment monomial).
Decay weight_decay(const WeightSpec& w) {
  if (w.kind == WeightSpec::Kind::pointwise) return w.tail;
  double bmin = w.g.b.empty() ? 0.0 : *std::min_element(w.g.b.begin(), w.g.b.end());
  if (w.geometry == Geometry::plane) {
    int mu = w.g.mu();
    double rate = mu * std::pow(w.theta, 1.0 / mu);
    return Decay::exp_power_of(rate, 2.0 / mu, 2.0 * bmin);
  }
  double edge = w.g.sum_a() - w.g.sum_b() - 1.0;
  return Decay::compact_on(std::sqrt(w.theta), 2.0 * bmin, edge);
}

// Interior zeros of the weight located by a geometric scan plus bisection.
std::vector<double> locate_sign_changes(const std::function<double(double)>& f,
                                        double r_hi) {
  std::vector<double> out;
  const int n = 600;
  double r_lo = r_hi * 1e-6;
  double prev_r = r_lo, prev_v = f(r_lo);
  double step = std::pow(r_hi / r_lo, 1.0 / n);
  for (int i = 1; i <= n; ++i) {
    double r = (i == n) ? r_hi * (1.0 - 1e-12) : r_lo * std::pow(step, i);
    double v = f(r);
    if (prev_v != 0.0 && v != 0.0 && std::signbit(prev_v) != std::signbit(v)) {
      double lo = prev_r, hi = r, flo = prev_v;
      for (int it = 0; it < 80; ++it) {
        double mid = 0.5 * (lo + hi), fm = f(mid);
        if (fm == 0.0) { lo = hi = mid; break; }
        if (std::signbit(fm) == std::signbit(flo)) lo = mid; else { hi = mid; }
      }
      out.push_back(0.5 * (lo + hi));
    }
    prev_r = r;
    prev_v = v;
  }
  return out;
}

struct PolyView {
  bool present = false;
  TaylorCoeffs c;

  int low_degree() const {
    if (!present) return 0;
    for (size_t k = 0; k < c.size(); ++k)
      if (std::abs(c[k]) > 0.0) return static_cast<int>(k);
    return 0;
  }
  int degree() const {
    if (!present) return -1;
    for (size_t k = c.size(); k > 0; --k)
      if (std::abs(c[k - 1]) > 0.0) return static_cast<int>(k - 1);
    return -1;
  }
};

PolyView view_of(const HoloFn& f) {
  PolyView v;
  if (f.taylor) {
    v.present = true;
    v.c = *f.taylor;
  }
  return v;
}

TaylorCoeffs derivative_coeffs(const TaylorCoeffs& c, int l) {
  if (l == 0) return c;
  if (static_cast<int>(c.size()) <= l) return {};
  TaylorCoeffs out(c.size() - l);
  for (size_t j = 0; j < out.size(); ++j) {
    double fac = 1.0;
    for (int i = 1; i <= l; ++i) fac *= static_cast<double>(j + i);
    out[j] = c[j + l] * fac;
  }
  return out;
}

// z (d/dz) shifted by one: coefficient k picks up (k+1)^l.
TaylorCoeffs dz_coeffs(const TaylorCoeffs& c, int l) {
  TaylorCoeffs out(c);
  for (size_t k = 0; k < out.size(); ++k)
    out[k] *= std::pow(static_cast<double>(k + 1), l);
  return out;
}

cplx horner(const TaylorCoeffs& c, cplx z) {
  cplx acc{0.0, 0.0};
  for (size_t k = c.size(); k > 0; --k) acc = acc * z + c[k - 1];
  return acc;
}

std::function<cplx(cplx)> evaluator_for(const HoloFn& f, const PolyView& shifted, int l) {
  if (l == 0 && !shifted.present) return f.eval;
  TaylorCoeffs c = shifted.c;
  return [c](cplx z) { return horner(c, z); };
}

double min_lower(const GSpec& g) {
  double m = g.b.empty() ? 0.0 : g.b[0];
  for (double b : g.b) m = std::min(m, b);
  return m;
}

void check_parameters(const HypParams& h) {
  if (!(h.theta > 0.0) || !std::isfinite(h.theta))
    throw std::invalid_argument("hyp params: theta must be positive");
  for (double v : h.a)
    if (!std::isfinite(v) || nonpositive_integer(v))
      throw std::invalid_argument("hyp params: upper parameter is a non-positive integer");
  for (double v : h.b)
    if (!std::isfinite(v) || nonpositive_integer(v))
      throw std::invalid_argument("hyp params: lower parameter is a non-positive integer");
}

}  // namespace

void HypParams::validate() const {
  check_parameters(*this);
  if (geometry == Geometry::plane) {
    if (p() > q()) throw std::invalid_argument("hyp params: plane geometry needs p <= q");
  } else {
    if (p() != q() + 1)
      throw std::invalid_argument("hyp params: disk geometry needs one more upper parameter");
  }
}

// Signature work depends only on the parameter multiset, so the list shape is
// not constrained here; kernel and inner-product evaluation enforce it.
NegativeParamSummary negative_param_summary(const HypParams& h, LShiftConvention conv) {
  check_parameters(h);
  NegativeParamSummary s;
  for (double v : h.a)
    if (v < 0.0) s.d.push_back(v);
  for (double v : h.b)
    if (v < 0.0) s.d.push_back(v);
  std::sort(s.d.begin(), s.d.end(),
            [](double l, double r) { return std::abs(l) < std::abs(r); });
  s.m = static_cast<int>(s.d.size());
  for (double v : s.d) s.nu += floor_snapped(v);

  // lower-parameter shift: b_i on an upper-parameter ladder a_j + k is exempt
  bool any = false;
  double bmin = 0.0;
  for (double b : h.b) {
    bool exempt = false;
    for (double a : h.a) {
      double r = b - a;
      long k = std::lround(r);
      if (k >= 0 && std::abs(r - static_cast<double>(k)) < kSnap) exempt = true;
    }
    if (exempt) continue;
    bmin = any ? std::min(bmin, b) : b;
    any = true;
  }
  long fl = any ? floor_snapped(bmin) : 0;
  s.l_raw = static_cast<int>(std::min(0L, fl));
  int raised = static_cast<int>(std::max(0L, -fl));
  s.l1 = (conv == LShiftConvention::raised) ? raised : 0;

  if (h.geometry == Geometry::plane) {
    s.l2 = 0;
    s.l = s.l1;
    return s;
  }
  double sa = std::accumulate(h.a.begin(), h.a.end(), 0.0);
  double sb = std::accumulate(h.b.begin(), h.b.end(), 0.0);
  int k = 0;
  while (!(sb + 1.0 < sa + 2.0 * k) && k < 64) ++k;
  if (k == 64) throw std::invalid_argument("hyp params: no finite shift balances the sums");
  s.l2 = k;
  s.l = std::max(s.l1, s.l2);
  return s;
}

WeightSpec WeightSpec::pointwise_on(std::function<double(double)> w, double radius,
                                    Decay tail, std::vector<double> sign_changes) {
  WeightSpec out;
  out.kind = Kind::pointwise;
  out.w = std::move(w);
  out.radius = radius;
  out.tail = tail;
  out.sign_changes = std::move(sign_changes);
  return out;
}

WeightSpec WeightSpec::meijer(GSpec g, double theta, Geometry geometry, double scale) {
  WeightSpec out;
  out.kind = Kind::meijer_g;
  out.g = std::move(g);
  out.theta = theta;
  out.scale = scale;
  out.geometry = geometry;
  out.radius = geometry == Geometry::plane ? kInf : std::sqrt(theta);
  return out;
}

void WeightSpec::validate() const {
  if (kind == Kind::pointwise) {
    if (!w) throw std::invalid_argument("weight: missing evaluator");
    if (!(radius > 0.0)) throw std::invalid_argument("weight: radius must be positive");
    for (size_t i = 0; i < sign_changes.size(); ++i) {
      if (!(sign_changes[i] > 0.0) || sign_changes[i] >= radius)
        throw std::invalid_argument("weight: sign change outside (0, radius)");
      if (i > 0 && sign_changes[i] <= sign_changes[i - 1])
        throw std::invalid_argument("weight: sign changes must ascend");
    }
    return;
  }
  g.validate();
  if (!(theta > 0.0)) throw std::invalid_argument("weight: theta must be positive");
  if (geometry == Geometry::plane && g.p >= g.q)
    throw std::invalid_argument("weight: plane G-weight needs p < q");
  if (geometry == Geometry::disk && g.p != g.q)
    throw std::invalid_argument("weight: disk G-weight needs p = q");
}

double radius_from_weight(const WeightSpec& w) {
  w.validate();
  if (w.kind == WeightSpec::Kind::pointwise) return w.radius;
  return w.geometry == Geometry::plane ? kInf : std::sqrt(w.theta);
}

MomentSeq moments_from_weight(const WeightSpec& w, int K_max, const QuadratureRule& rule) {
  w.validate();
  rule.validate();
  if (K_max < 0) throw std::invalid_argument("moments: K_max must be non-negative");

  const double R = radius_from_weight(w);
  const WeightEval eval = weight_evaluator(w);
  const Decay base = weight_decay(w);
  const bool noisy = w.kind == WeightSpec::Kind::meijer_g;

  std::vector<double> changes = w.sign_changes;
  if (noisy) {
    double scan_hi = std::isfinite(R) ? R : base.truncation_radius(rule.tol);
    changes = locate_sign_changes(eval.value, scan_hi);
  }

  MomentSeq out;
  out.K_max = K_max;
  out.c.reserve(K_max + 1);
  out.a.reserve(K_max + 1);

  for (int k = 0; k <= K_max; ++k) {
    const double sing = base.singular_exponent + 2.0 * k + 1.0;
    if (sing <= -1.0 + 1e-12)
      throw std::domain_error("moments: integrand not integrable at the origin");
    auto fk = [&eval, k](double r) { return std::pow(r, 2 * k + 1) * eval.value(r); };
    auto nk = [&eval, k](double r) { return std::pow(r, 2 * k + 1) * eval.noise(r); };

    double ck = 0.0, ak = 0.0;
    if (changes.empty()) {
      if (std::isfinite(R)) {
        Decay probe = Decay::compact_on(R, sing, base.edge_exponent);
        double ga = probe.grading_at_zero(), gb = probe.grading_at_edge();
        double floor = noisy ? integrate_interval(nk, 0.0, R, 16, 12, ga, gb) : 0.0;
        ck = 2.0 * kPi * refine_interval(fk, 0.0, R, ga, gb, rule.tol, floor);
      } else {
        Decay d = base;
        d.singular_exponent = sing;
        d.degree_hint = base.degree_hint + 2 * k + 2;
        QuadratureRule kr = rule;
        if (noisy) {
          LineNodes pn = halfline_nodes(d, rule);
          double floor = 0.0;
          for (size_t i = 0; i < pn.t.size(); ++i)
            floor += std::abs(pn.w[i]) * nk(pn.t[i]);
          kr.absolute_scale = std::max(kr.absolute_scale, floor / rule.tol);
        }
        ck = 2.0 * kPi * integrate_halfline(fk, d, rule.tol, kr);
      }
      ak = std::abs(ck);
    } else {
      double hi = R;
      if (!std::isfinite(R)) {
        Decay d = base;
        d.singular_exponent = sing;
        d.degree_hint = base.degree_hint + 2 * k + 2;
        hi = d.truncation_radius(rule.tol);
      }
      std::vector<double> cuts{0.0};
      cuts.insert(cuts.end(), changes.begin(), changes.end());
      cuts.push_back(hi);
      Decay probe = Decay::compact_on(hi, sing, base.edge_exponent);
      for (size_t i = 0; i + 1 < cuts.size(); ++i) {
        double ga = (i == 0) ? probe.grading_at_zero() : 1.0;
        double gb = (i + 2 == cuts.size() && std::isfinite(R)) ? probe.grading_at_edge() : 1.0;
        double floor =
            noisy ? integrate_interval(nk, cuts[i], cuts[i + 1], 16, 12, ga, gb) : 0.0;
        double piece =
            2.0 * kPi * refine_interval(fk, cuts[i], cuts[i + 1], ga, gb, rule.tol, floor);
        ck += piece;
        ak += std::abs(piece);
      }
    }
    ak = std::max(ak, std::abs(ck));
    out.c.push_back(ck);
    out.a.push_back(ak);
  }
  return out;
}

CompletenessReport completeness_check(const MomentSeq& m) {
  if (m.c.empty() || m.c.size() != m.a.size())
    throw std::invalid_argument("completeness: malformed moment sequence");

  std::vector<double> ks, logr;
  double sup = 0.0;
  for (size_t k = 0; k < m.c.size(); ++k) {
    if (std::abs(m.c[k]) <= 1e-12 * std::max(m.a[k], 1e-300)) continue;
    double r = m.a[k] / std::abs(m.c[k]);
    sup = std::max(sup, r);
    ks.push_back(static_cast<double>(k));
    logr.push_back(std::log(r));
  }
  if (ks.empty()) throw std::invalid_argument("completeness: all coefficients vanish");

  CompletenessReport rep;
  rep.sup_ratio = sup;

  const size_t n = ks.size();
  const size_t from = n / 2;
  const size_t used = n - from;
  rep.points_used = static_cast<int>(used);
  if (static_cast<size_t>(m.K_max) + 1 < 16 || used < 4) {
    rep.verdict = Completeness::inconclusive;
    return rep;
  }

  double km = 0.0, lm = 0.0;
  for (size_t i = from; i < n; ++i) {
    km += ks[i];
    lm += logr[i];
  }
  km /= used;
  lm /= used;
  double sxx = 0.0, sxy = 0.0;
  for (size_t i = from; i < n; ++i) {
    sxx += (ks[i] - km) * (ks[i] - km);
    sxy += (ks[i] - km) * (logr[i] - lm);
  }
  double slope = sxy / sxx;
  double ss = 0.0;
  for (size_t i = from; i < n; ++i) {
    double resid = logr[i] - lm - slope * (ks[i] - km);
    ss += resid * resid;
  }
  double se = std::sqrt(ss / (static_cast<double>(used) - 2.0) / sxx);
  rep.slope = slope;
  rep.slope_stderr = se;

  bool monotone = true;
  for (size_t i = from + 1; i < n; ++i)
    if (!(logr[i] > logr[i - 1] + 1e-12)) monotone = false;

  if (monotone && slope - 2.0 * se > 0.0)
    rep.verdict = Completeness::not_complete;
  else if (slope <= std::max(2.0 * se, 1e-10))
    rep.verdict = Completeness::complete;
  else
    rep.verdict = Completeness::inconclusive;
  return rep;
}

SpaceSignature signature_from_coefficients(const std::vector<int>& signs, TailSign tail) {
  SpaceSignature out;
  out.tail = tail;
  for (size_t k = 0; k < signs.size(); ++k) {
    if (signs[k] > 0)
      out.i_plus.push_back(static_cast<int>(k));
    else if (signs[k] < 0)
      out.i_minus.push_back(static_cast<int>(k));
    else
      out.i_zero.push_back(static_cast<int>(k));
  }
  if (tail == TailSign::positive) {
    out.pos_index = kInfiniteIndex;
    out.neg_index = static_cast<int>(out.i_minus.size());
    out.space_class = SpaceClass::positive_pontryagin;
  } else {
    out.neg_index = kInfiniteIndex;
    out.pos_index = static_cast<int>(out.i_plus.size());
    out.space_class = SpaceClass::negative_pontryagin;
  }
  return out;
}

SpaceSignature pontryagin_index_formula(const HypParams& h) {
  NegativeParamSummary s = negative_param_summary(h);
  const int m = s.m;

  std::vector<long> mag(m + 1, 0), prefix(m + 1, 0);
  for (int i = 1; i <= m; ++i) {
    long fl = floor_snapped(s.d[i - 1]);
    mag[i] = -fl;
    prefix[i] = prefix[i - 1] + fl;
  }

  long count_neg = 0, count_pos = 0;
  for (int i = 0; i < m; ++i) {
    for (long k = mag[i] + 1; k <= mag[i + 1]; ++k) {
      long par = mod2(prefix[i] + k * (m - i));
      count_neg += par;
      count_pos += 1 - par;
    }
  }
  count_pos += 1;

  SpaceSignature out;
  if (mod2(s.nu) == 0) {
    out.tail = TailSign::positive;
    out.pos_index = kInfiniteIndex;
    out.neg_index = static_cast<int>(count_neg);
    out.space_class = SpaceClass::positive_pontryagin;
  } else {
    out.tail = TailSign::negative;
    out.neg_index = kInfiniteIndex;
    out.pos_index = static_cast<int>(count_pos);
    out.space_class = SpaceClass::negative_pontryagin;
  }
  return out;
}

SpaceSignature pontryagin_index_oracle(const HypParams& h, int K_cap) {
  NegativeParamSummary s = negative_param_summary(h);
  long kstar = 0;
  for (double d : s.d) kstar = std::max(kstar, ceil_snapped(std::abs(d)));
  if (K_cap <= kstar + 1)
    throw std::invalid_argument(
        "index oracle: K_cap too small for a stable tail sign");

  std::vector<int> signs(K_cap + 1, 1);
  for (int k = 0; k <= K_cap; ++k) {
    int sg = 1;
    for (double a : h.a) sg *= pochhammer_sign(a, k);
    for (double b : h.b) sg *= pochhammer_sign(b, k);
    signs[k] = sg;
  }
  TailSign tail = signs[K_cap] >= 0 ? TailSign::positive : TailSign::negative;
  return signature_from_coefficients(signs, tail);
}

cplx kernel_eval(const HypParams& h, cplx z, cplx u_conj) {
  h.validate();
  if (h.geometry == Geometry::plane) return hyper_pfq(h.a, h.b, h.theta * z * u_conj);
  cplx w = z * u_conj;
  if (std::abs(w) >= h.theta)
    throw std::domain_error("kernel: argument outside the disk of holomorphy");
  return hyper_pfq(h.a, h.b, w / h.theta);
}

std::vector<double> kernel_coefficients(const HypParams& h, int K) {
  h.validate();
  if (K < 0) throw std::invalid_argument("kernel coefficients: K must be non-negative");
  std::vector<double> c(K + 1, 1.0);
  for (int k = 0; k < K; ++k) {
    double num = 1.0, den = 1.0;
    for (double b : h.b) num *= b + k;
    for (double a : h.a) den *= a + k;
    num *= k + 1.0;
    double step = (h.geometry == Geometry::plane) ? num / (den * h.theta)
                                                  : num * h.theta / den;
    c[k + 1] = c[k] * step;
  }
  return c;
}

cplx series_inner_product(const HypParams& h, const TaylorCoeffs& f, const TaylorCoeffs& g) {
  size_t n = std::min(f.size(), g.size());
  if (n == 0) return {0.0, 0.0};
  std::vector<double> c = kernel_coefficients(h, static_cast<int>(n) - 1);
  std::vector<cplx> terms(n);
  for (size_t k = 0; k < n; ++k) terms[k] = c[k] * f[k] * std::conj(g[k]);
  return tree_sum(terms);
}

HoloFn HoloFn::from_coeffs(TaylorCoeffs c) {
  HoloFn out;
  out.taylor = c;
  out.eval = [c = std::move(c)](cplx z) { return horner(c, z); };
  return out;
}

HoloFn HoloFn::monomial(int n) {
  TaylorCoeffs c(n + 1, cplx{0.0, 0.0});
  c[n] = cplx{1.0, 0.0};
  return from_coeffs(std::move(c));
}

HoloFn kernel_section(const HypParams& h, cplx u, int K) {
  std::vector<double> c = kernel_coefficients(h, K);
  TaylorCoeffs s(K + 1);
  cplx pw{1.0, 0.0};
  cplx uc = std::conj(u);
  for (int k = 0; k <= K; ++k) {
    s[k] = pw / c[k];
    pw *= uc;
  }
  return HoloFn::from_coeffs(std::move(s));
}

WeightSpec weight_from_params(const HypParams& h) {
  NegativeParamSummary s = negative_param_summary(h);
  auto [lgr, sgr] = gamma_ratio_signed(h.a, h.b);
  GSpec gw;
  double scale;
  if (h.geometry == Geometry::plane) {
    if (s.l != 0)
      throw std::invalid_argument("weight: parameters require a derivative shift");
    gw.p = h.p();
    gw.q = h.q() + 1;
    for (double a : h.a) gw.a.push_back(a - 1.0);
    gw.b.push_back(0.0);
    for (double b : h.b) gw.b.push_back(b - 1.0);
    scale = sgr * std::exp(lgr + std::log(h.theta) - std::log(kPi));
  } else {
    if (s.l != 0)
      throw std::invalid_argument("weight: parameters require a derivative shift");
    gw.p = h.p();
    gw.q = h.p();
    for (double a : h.a) gw.a.push_back(a - 1.0);
    gw.b.push_back(0.0);
    for (double b : h.b) gw.b.push_back(b - 1.0);
    scale = sgr * std::exp(lgr - std::log(h.theta) - std::log(kPi));
  }
  gw.validate();
  return WeightSpec::meijer(std::move(gw), h.theta, h.geometry, scale);
}

cplx integral_inner_product(const HypParams& h, const HoloFn& f, const HoloFn& g,
                            const QuadratureRule& rule, LShiftConvention conv) {
  h.validate();
  rule.validate();
  if (!f.eval || !g.eval) throw std::invalid_argument("inner product: missing evaluator");
  NegativeParamSummary s = negative_param_summary(h, conv);
  auto [lgr, sgr] = gamma_ratio_signed(h.a, h.b);

  PolyView fv = view_of(f), gv = view_of(g);
  GSpec gw;
  double pref_log = lgr;
  int pref_sign = sgr;
  PolyView fs = fv, gs = gv;
  int shift = 0;          // origin corrections use degrees below this
  bool inverse_square = false;

  if (h.geometry == Geometry::plane) {
    const int l = s.l;
    shift = l;
    if (l == 0) {
      gw.p = h.p();
      gw.q = h.q() + 1;
      for (double a : h.a) gw.a.push_back(a - 1.0);
      gw.b.push_back(0.0);
      for (double b : h.b) gw.b.push_back(b - 1.0);
      pref_log += std::log(h.theta) - std::log(kPi);
    } else {
      if (!fv.present || !gv.present)
        throw std::invalid_argument("inner product: derivative shift requires Taylor form");
      gw.p = h.p() + 1;
      gw.q = h.q() + 2;
      for (double a : h.a) gw.a.push_back(a + l - 1.0);
      gw.a.push_back(static_cast<double>(l));
      for (double b : h.b) gw.b.push_back(b + l - 1.0);
      gw.b.push_back(0.0);
      gw.b.push_back(0.0);
      pref_log += (1.0 - l) * std::log(h.theta) - std::log(kPi);
      fs.c = derivative_coeffs(fv.c, l);
      gs.c = derivative_coeffs(gv.c, l);
    }
  } else {
    const int l = s.l;
    if (l == 0) {
      shift = 0;
      gw.p = h.p();
      gw.q = h.p();
      for (double a : h.a) gw.a.push_back(a - 1.0);
      gw.b.push_back(0.0);
      for (double b : h.b) gw.b.push_back(b - 1.0);
      pref_log += -std::log(h.theta) - std::log(kPi);
    } else if (s.l1 == 0) {
      const int l2 = s.l2;
      if (!fv.present || !gv.present)
        throw std::invalid_argument("inner product: derivative shift requires Taylor form");
      shift = 0;
      inverse_square = true;
      gw.p = h.p() + 2 * l2;
      gw.q = gw.p;
      for (double a : h.a) gw.a.push_back(a);
      for (int i = 0; i < 2 * l2; ++i) gw.a.push_back(2.0);
      for (double b : h.b) gw.b.push_back(b);
      for (int i = 0; i < 2 * l2 + 1; ++i) gw.b.push_back(1.0);
      pref_log += -std::log(kPi);
      fs.c = dz_coeffs(fv.c, l2);
      gs.c = dz_coeffs(gv.c, l2);
    } else {
      if (!fv.present || !gv.present)
        throw std::invalid_argument("inner product: derivative shift requires Taylor form");
      shift = l;
      gw.p = h.p() + 1;
      gw.q = gw.p;
      for (double a : h.a) gw.a.push_back(a + l - 1.0);
      gw.a.push_back(static_cast<double>(l));
      for (double b : h.b) gw.b.push_back(b + l - 1.0);
      gw.b.push_back(0.0);
      gw.b.push_back(0.0);
      // the shifted-weight normalization carries theta^{l-1}
      pref_log += (l - 1.0) * std::log(h.theta) - std::log(kPi);
      fs.c = derivative_coeffs(fv.c, l);
      gs.c = derivative_coeffs(gv.c, l);
    }
  }
  gw.validate();

  AdmissibilityReport adm = is_admissible_weight(gw, h.theta);
  if (!adm.admissible)
    throw std::invalid_argument("inner product: non-admissible weight: " + adm.reason);

  auto fe = evaluator_for(f, fs, shift);
  auto ge = evaluator_for(g, gs, shift);
  auto gev = std::make_shared<GEvaluator>(gw);
  const double theta = h.theta;
  std::function<cplx(cplx)> integrand;
  std::function<double(cplx)> noise_fn;
  if (h.geometry == Geometry::plane) {
    integrand = [fe, ge, gev, theta](cplx z) {
      return fe(z) * std::conj(ge(z)) * gev->eval(theta * std::norm(z)).value;
    };
    noise_fn = [fe, ge, gev, theta](cplx z) {
      return std::abs(fe(z)) * std::abs(ge(z)) * gev->eval(theta * std::norm(z)).err;
    };
  } else if (inverse_square) {
    integrand = [fe, ge, gev, theta](cplx z) {
      double x = std::norm(z);
      return fe(z) * std::conj(ge(z)) * (gev->eval(x / theta).value / x);
    };
    noise_fn = [fe, ge, gev, theta](cplx z) {
      double x = std::norm(z);
      return std::abs(fe(z)) * std::abs(ge(z)) * (gev->eval(x / theta).err / x);
    };
  } else {
    integrand = [fe, ge, gev, theta](cplx z) {
      return fe(z) * std::conj(ge(z)) * gev->eval(std::norm(z) / theta).value;
    };
    noise_fn = [fe, ge, gev, theta](cplx z) {
      return std::abs(fe(z)) * std::abs(ge(z)) * gev->eval(std::norm(z) / theta).err;
    };
  }

  double sing = 2.0 * std::min(0.0, min_lower(gw)) + fs.low_degree() + gs.low_degree();
  if (inverse_square) sing -= 2.0;
  sing = std::max(sing, -1.9);
  int fdeg = fs.degree(), gdeg = gs.degree();
  int deg = (fdeg >= 0 && gdeg >= 0) ? fdeg + gdeg + 2 : 10;

  Decay d;
  if (h.geometry == Geometry::plane) {
    int mu = gw.mu();
    d = Decay::exp_power_of(mu * std::pow(theta, 1.0 / mu), 2.0 / mu, sing, deg);
  } else {
    d = Decay::compact_on(std::sqrt(theta), sing, gw.sum_a() - gw.sum_b() - 1.0);
    d.degree_hint = deg;
  }

  // natural magnitude of [f, g], used to let exact zeros settle
  double mag = 1.0;
  if (fv.present && gv.present) {
    size_t n = std::min(fv.c.size(), gv.c.size());
    if (n > 0) {
      std::vector<double> c = kernel_coefficients(h, static_cast<int>(n) - 1);
      for (size_t k = 0; k < n; ++k)
        mag += std::abs(c[k]) * std::abs(fv.c[k]) * std::abs(gv.c[k]);
    }
  }
  QuadratureRule area_rule = rule;
  if (area_rule.absolute_scale == 0.0) area_rule.absolute_scale = 1e-6 * mag;

  // the evaluated weight carries pointwise uncertainty near its series/asymptote
  // handover; refinement cannot resolve the integral below that noise level
  {
    AreaNodes pn = area_nodes(d, area_rule);
    double noise = 0.0;
    for (size_t i = 0; i < pn.z.size(); ++i) noise += std::abs(pn.w[i]) * noise_fn(pn.z[i]);
    area_rule.absolute_scale = std::max(area_rule.absolute_scale, noise / area_rule.tol);
  }

  Refined ref = refine_area(integrand, d, area_rule);
  if (!ref.converged)
    throw std::runtime_error("inner product: area quadrature did not settle");

  cplx value = pref_sign * std::exp(pref_log) * ref.value;
  if (shift > 0) {
    std::vector<double> c = kernel_coefficients(h, shift - 1);
    for (int k = 0; k < shift; ++k) {
      cplx fk = (fv.present && k < static_cast<int>(fv.c.size())) ? fv.c[k] : cplx{0.0, 0.0};
      cplx gk = (gv.present && k < static_cast<int>(gv.c.size())) ? gv.c[k] : cplx{0.0, 0.0};
      value += c[k] * fk * std::conj(gk);
    }
  }
  return value;
}

}  // namespace hks
