#include "hks/meijer.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

#include "hks/specfun.hpp"

namespace hks {

namespace {

constexpr double kSnap = 1e-8;
constexpr double kPi = 3.14159265358979323846;
constexpr double kGammaE = 0.57721566490153286;

// b - a = k for an integer k >= 0, within the snap tolerance
bool ladder_hit(double b, double a, long& k_out) {
  double r = b - a;
  long k = std::lround(r);
  if (k < 0 || std::abs(r - static_cast<double>(k)) >= kSnap) return false;
  k_out = k;
  return true;
}

// psi and psi' for real non-pole arguments: recurrence up to x >= 8, then the
// Bernoulli asymptotic series; reflection below zero.
double digamma(double x) {
  if (x < 0.0) {
    double f = x - std::floor(x);
    return digamma(1.0 - x) - kPi / std::tan(kPi * f);
  }
  double acc = 0.0;
  while (x < 16.0) {
    acc -= 1.0 / x;
    x += 1.0;
  }
  double inv = 1.0 / x, inv2 = inv * inv;
  return acc + std::log(x) - 0.5 * inv -
         inv2 * (1.0 / 12 -
                 inv2 * (1.0 / 120 - inv2 * (1.0 / 252 - inv2 * (1.0 / 240 - inv2 / 132))));
}

double trigamma(double x) {
  if (x < 0.0) {
    double f = x - std::floor(x);
    double s = std::sin(kPi * f);
    return kPi * kPi / (s * s) - trigamma(1.0 - x);
  }
  double acc = 0.0;
  while (x < 16.0) {
    acc += 1.0 / (x * x);
    x += 1.0;
  }
  double inv = 1.0 / x, inv2 = inv * inv;
  return acc +
         inv * (1.0 + 0.5 * inv +
                inv2 * (1.0 / 6 - inv2 * (1.0 / 30 - inv2 * (1.0 / 42 - inv2 / 30))));
}

}  // namespace

void GSpec::validate() const {
  if (q < 1) throw std::invalid_argument("g-spec: q >= 1 required");
  if (p < 0 || p > q) throw std::invalid_argument("g-spec: 0 <= p <= q required");
  if (static_cast<int>(a.size()) != p || static_cast<int>(b.size()) != q)
    throw std::invalid_argument("g-spec: parameter counts must match (p, q)");
  for (double v : a)
    if (!std::isfinite(v)) throw std::invalid_argument("g-spec: non-finite upper parameter");
  for (double v : b)
    if (!std::isfinite(v)) throw std::invalid_argument("g-spec: non-finite lower parameter");
}

double GSpec::sum_a() const { return std::accumulate(a.begin(), a.end(), 0.0); }
double GSpec::sum_b() const { return std::accumulate(b.begin(), b.end(), 0.0); }

double GSpec::alpha_exponent() const {
  return sum_a() - sum_b() + 0.5 * (q - p + 1);
}

PoleTable build_pole_table(const GSpec& g, int k_max) {
  g.validate();
  if (k_max < 0) throw std::invalid_argument("pole table: k_max must be non-negative");

  struct Cand {
    double beta;
    int j, k;
  };
  std::vector<Cand> cand;
  cand.reserve(static_cast<size_t>(g.q) * (k_max + 1));
  for (int j = 0; j < g.q; ++j)
    for (int k = 0; k <= k_max; ++k) cand.push_back({g.b[j] + k, j, k});
  std::sort(cand.begin(), cand.end(),
            [](const Cand& l, const Cand& r) { return l.beta < r.beta; });

  PoleTable table;
  size_t i = 0;
  while (i < cand.size()) {
    size_t e = i + 1;
    while (e < cand.size() && cand[e].beta - cand[e - 1].beta < kSnap) ++e;
    double beta = cand[i].beta;

    int hits = 0, cancels = 0;
    for (int j = 0; j < g.q; ++j) {
      long k;
      if (ladder_hit(beta, g.b[j], k)) ++hits;
    }
    for (int ai = 0; ai < g.p; ++ai) {
      long k;
      if (ladder_hit(beta, g.a[ai], k)) ++cancels;
    }
    if ((hits > 1 && cancels > 0) || cancels > hits) table.ambiguous_cancellation = true;

    int mult = hits - cancels;
    if (mult > 0)
      table.entries.push_back({cand[i].j, cand[i].k, -beta, mult});
    i = e;
  }
  // candidates ascend in beta = -s, so entries already descend in s
  return table;
}

double log_h_ratio_signed(const GSpec& g, double s, int& sign) {
  g.validate();
  sign = 1;
  double lg = 0.0;
  for (double b : g.b) {
    int sg;
    lg += log_gamma_signed(b + s, sg);
    if (sg == 0) throw std::domain_error("h_ratio: evaluation at a pole");
    sign *= sg;
  }
  for (double a : g.a) {
    int sg;
    double la = log_gamma_signed(a + s, sg);
    if (sg == 0) {  // denominator pole: h vanishes
      sign = 1;
      return -std::numeric_limits<double>::infinity();
    }
    lg -= la;
    sign *= sg;
  }
  return lg;
}

double h_ratio(const GSpec& g, double s) {
  int sign;
  double lg = log_h_ratio_signed(g, s, sign);
  return sign * std::exp(lg);
}

GExpansion::GExpansion(GSpec g, int k_max) : g_(std::move(g)) {
  g_.validate();
  k_max_ = k_max > 0 ? k_max : (g_.p == g_.q ? 4000 : 200);
  table_ = build_pole_table(g_, k_max_);
  terms_.reserve(table_.entries.size());

  // phi(eps) = eps^n h(-beta + eps) is analytic and nonzero at eps = 0.  With
  // Gamma(-k + eps) = Gamma(1 + eps) / (eps prod_{m=1..k} (eps - m)) every
  // pole factor splits off exactly one 1/eps, and phi(0) together with the
  // logarithmic derivatives (ln phi)'(0), (ln phi)''(0) come out in closed
  // form from harmonic numbers and psi values.
  for (const PoleEntry& e : table_.entries) {
    if (e.multiplicity > 3)
      throw std::domain_error("g-expansion: pole multiplicity above 3 unsupported");
    const int n = e.multiplicity;
    const double beta = -e.s;
    Term t;
    t.beta = beta;
    t.mult = n;

    int sign = 1;
    double lg = 0.0;                      // ln |phi(0)|
    double dl1 = -n * kGammaE;            // (ln phi)'(0), from n psi(1)
    double dl2 = n * kPi * kPi / 6.0;     // (ln phi)''(0), from n psi'(1)
    auto harmonic = [](long k, double& h1, double& h2) {
      h1 = h2 = 0.0;
      for (long m = 1; m <= k; ++m) {
        h1 += 1.0 / m;
        h2 += 1.0 / (static_cast<double>(m) * m);
      }
    };
    for (double b : g_.b) {
      long k;
      if (ladder_hit(beta, b, k)) {
        lg -= std::lgamma(static_cast<double>(k) + 1.0);
        if (k % 2) sign = -sign;
        double h1, h2;
        harmonic(k, h1, h2);
        dl1 += h1;
        dl2 += h2;
      } else {
        int s2;
        lg += log_gamma_signed(b - beta, s2);
        sign *= s2;
        dl1 += digamma(b - beta);
        dl2 += trigamma(b - beta);
      }
    }
    for (double a : g_.a) {
      long k;
      if (ladder_hit(beta, a, k)) {
        lg += std::lgamma(static_cast<double>(k) + 1.0);
        if (k % 2) sign = -sign;
        double h1, h2;
        harmonic(k, h1, h2);
        dl1 -= h1;
        dl2 -= h2;
      } else {
        int s2;
        lg -= log_gamma_signed(a - beta, s2);
        sign *= s2;
        dl1 -= digamma(a - beta);
        dl2 -= trigamma(a - beta);
      }
    }

    t.log_scale = lg;
    // scaled derivatives: phi/|phi(0)|, phi'/|phi(0)|, phi''/|phi(0)|
    double p0 = sign;
    double p1 = sign * dl1;
    double p2 = sign * (dl2 + dl1 * dl1);
    if (n == 1) {
      t.c[0] = p0;
    } else if (n == 2) {
      t.c[0] = p1;
      t.c[1] = p0;
    } else {
      t.c[0] = 0.5 * p2;
      t.c[1] = p1;
      t.c[2] = 0.5 * p0;
    }
    t.noise = (n == 1) ? 5e-16 : 5e-15;
    terms_.push_back(t);
  }

  // a ladder whose tail is entirely cancelled yields a finite exact sum; the
  // usual smallness stopping rule can then never trigger
  double max_b = -std::numeric_limits<double>::infinity();
  for (double b : g_.b) max_b = std::max(max_b, b);
  finite_tail_ =
      !terms_.empty() && (max_b + k_max_) - terms_.back().beta > 2.5;

  // p = q: (1-x)^{e+m} coefficients at the support edge, from matching the
  // large-s expansion of h(s) against beta-function moments of (1-x)^{e+m}.
  // The Bernoulli-polynomial data B_2, B_3 fixes the first three terms.
  if (g_.p == g_.q && !terms_.empty() && !finite_tail_) {
    const double e = g_.sum_a() - g_.sum_b() - 1.0;
    if (e > -1.0 + kSnap) {
      auto bern2 = [](double x) { return x * x - x + 1.0 / 6.0; };
      auto bern3 = [](double x) { return x * x * x - 1.5 * x * x + 0.5 * x; };
      auto u1 = [&](double c) { return 0.5 * c * (1.0 - c); };
      auto u2 = [&](double c) { return bern3(c) / 6.0; };
      double w1 = 0.0, w2 = 0.0;
      for (double b : g_.b) {
        w1 += 0.5 * bern2(b);
        w2 -= bern3(b) / 6.0;
      }
      for (double a : g_.a) {
        w1 -= 0.5 * bern2(a);
        w2 += bern3(a) / 6.0;
      }
      const double h1 = w1;
      const double h2 = w2 + 0.5 * w1 * w1;
      const double u10 = u1(e + 1.0);
      const double u20 = u2(e + 1.0) + 0.5 * u10 * u10;
      const double u11 = u1(e + 2.0);
      edge_d_[0] = 1.0 / std::tgamma(e + 1.0);
      edge_d_[1] = (h1 - u10) / std::tgamma(e + 2.0);
      edge_d_[2] =
          (h2 - u20 - edge_d_[1] * std::tgamma(e + 2.0) * u11) / std::tgamma(e + 3.0);
      edge_e_ = e;
      x_switch_ = 1.0 - std::clamp(45.0 / k_max_, 0.001, 0.1);
      edge_ready_ = true;
    }
  }
}

GValue GExpansion::eval(double x) const {
  if (!(x > 0.0)) throw std::domain_error("g-expansion: x must be positive");
  if (edge_ready_ && x >= x_switch_) {
    GValue out;
    out.converged = true;
    if (x >= 1.0) return out;
    const double t = 1.0 - x;
    const double te = std::pow(t, edge_e_);
    out.value = te * (edge_d_[0] + t * (edge_d_[1] + t * edge_d_[2]));
    const double mag =
        std::abs(edge_d_[0]) + std::abs(edge_d_[1]) + std::abs(edge_d_[2]);
    out.err = 3.0 * mag * te * t * t * t + 1e-15 * std::abs(out.value);
    return out;
  }
  const double lx = std::log(x);
  const double l1x = -lx;

  double sum = 0.0, max_mag = 0.0, coeff_noise = 0.0, last_mag = 0.0;
  int run = 0;
  bool converged = terms_.empty() || finite_tail_;
  for (const Term& t : terms_) {
    double lmag = t.log_scale + t.beta * lx;
    double term = 0.0, amag = 0.0;
    if (lmag > -745.0) {
      double scale = std::exp(lmag);
      double poly = t.c[0], polyabs = std::abs(t.c[0]);
      if (t.mult > 1) {
        poly += t.c[1] * l1x;
        polyabs += std::abs(t.c[1] * l1x);
      }
      if (t.mult > 2) {
        poly += t.c[2] * l1x * l1x;
        polyabs += std::abs(t.c[2] * l1x * l1x);
      }
      term = scale * poly;
      amag = scale * polyabs;
    }
    sum += term;
    last_mag = amag;
    max_mag = std::max(max_mag, amag);
    coeff_noise += amag * t.noise;
    if (amag <= 1e-12 * std::abs(sum) + 1e-300) {
      if (++run >= 3) {
        converged = true;
        break;
      }
    } else {
      run = 0;
    }
  }

  GValue out;
  out.value = sum;
  out.err = 10.0 * std::numeric_limits<double>::epsilon() * max_mag + coeff_noise;
  out.converged = converged;
  // geometric tail left past the stopping point (term ratio tends to x)
  if (g_.p == g_.q && !finite_tail_ && x < 1.0) out.err += last_mag * x / (1.0 - x);
  return out;
}

double series_asymptote_crossover(int mu) {
  if (mu < 1) throw std::domain_error("crossover: requires p < q");
  // solve 2 mu u = ln(1/eps) - ln u for the point where the series' relative
  // cancellation eps e^{2 mu u} reaches the asymptote's own ~1/u defect
  const double leps = -std::log(std::numeric_limits<double>::epsilon());
  double u = 10.0;
  for (int i = 0; i < 40; ++i) u = (leps - std::log(u)) / (2.0 * mu);
  return u;
}

double g_asymptotic_large(const GSpec& g, double x) {
  g.validate();
  if (g.p == g.q)
    throw std::domain_error("g asymptote: no exponential regime when p = q");
  if (!(x > 0.0)) throw std::domain_error("g asymptote: x must be positive");
  const int mu = g.mu();
  const double alpha = g.alpha_exponent();
  const double u = std::pow(x, 1.0 / mu);
  double lg = 0.5 * (mu - 1) * std::log(2.0 * 3.14159265358979323846) -
              0.5 * std::log(static_cast<double>(mu)) +
              (1.0 - alpha) / mu * std::log(x) - mu * u;
  return lg < -745.0 ? 0.0 : std::exp(lg);
}

std::vector<double> g_asymptotic_coefficients(const GSpec& g, int count) {
  g.validate();
  if (g.p >= g.q)
    throw std::domain_error("g asymptote: no exponential regime when p = q");
  if (count < 1) throw std::invalid_argument("g asymptote: count must be >= 1");

  // In t = x^{1/mu} the ansatz reads G = e^{-mu t} sum_r M_r t^{beta - r}.
  // Each factor (theta - c) of the defining operator equation acts on
  // e^{-mu t} t^s as -t^{s+1} + (s/mu - c) t^s, so on offset arrays indexed
  // against the running top power it keeps the offset with factor -1 and
  // raises it with factor (s/mu - c).  Tracking the M-dependence of every
  // entry turns both operator products into lower-triangular matrices whose
  // difference T has T[r][r] = 0; row r + 1 then yields M_r.
  const int mu = g.mu();
  const double beta = 1.0 - g.alpha_exponent();
  const int n = std::max(count + 1, 3);

  auto apply = [&](std::vector<std::vector<double>>& m, double c, int d) {
    std::vector<std::vector<double>> out(m.size(), std::vector<double>(n, 0.0));
    for (int j = 0; j < n; ++j) {
      for (int mm = 0; mm < n; ++mm) out[j][mm] -= m[j][mm];
      if (j + 1 < n) {
        double f = (beta + d - j) / mu - c;
        for (int mm = 0; mm < n; ++mm) out[j + 1][mm] += f * m[j][mm];
      }
    }
    m = std::move(out);
  };

  std::vector<std::vector<double>> L(n, std::vector<double>(n, 0.0));
  for (int i = 0; i < n; ++i) L[i][i] = 1.0;
  std::vector<std::vector<double>> P = L;
  for (int i = 0; i < g.q; ++i) apply(L, g.b[i], i);
  for (int i = 0; i < g.p; ++i) apply(P, g.a[i] - 1.0, i);

  const double sign = (mu % 2 == 0) ? 1.0 : -1.0;
  // row 1 must vanish on M_0 alone; beta carries exactly the exponent that
  // makes it so, and a residual here would invalidate the whole recursion
  double pivot1 = L[2][1] - sign * P[2][1];
  if (std::abs(L[1][0] - sign * P[1][0]) > 1e-8 * (1.0 + std::abs(pivot1)))
    throw std::runtime_error("g asymptote: exponent does not solve the first order");

  std::vector<double> M(count, 0.0);
  M[0] = 1.0;
  for (int r = 1; r < count; ++r) {
    double rhs = 0.0;
    for (int m = 0; m < r; ++m) rhs += (L[r + 1][m] - sign * P[r + 1][m]) * M[m];
    // the pivot is (-1)^{q-1} (-r) up to rounding
    double pivot = L[r + 1][r] - sign * P[r + 1][r];
    if (std::abs(pivot) < 1e-8 * r)
      throw std::runtime_error("g asymptote: degenerate correction recursion");
    M[r] = -rhs / pivot;
  }
  return M;
}

GEvaluator::GEvaluator(GSpec g, int k_max) : g_(std::move(g)) {
  g_.validate();
  if (g_.p == 0 && g_.q == 1) {
    route_ = Route::exp01;
  } else if (g_.p == 0 && g_.q == 2) {
    route_ = Route::bessel02;
  } else if (g_.p == 1 && g_.q == 1 && g_.a[0] - g_.b[0] > kSnap) {
    route_ = Route::beta11;
  } else if (g_.p == g_.q) {
    route_ = Route::balanced;
    series_.emplace(g_, k_max);
  } else {
    route_ = Route::split;
    series_.emplace(g_, k_max);
    asym_m_ = g_asymptotic_coefficients(g_, 36);

    // a terminating correction series means the function IS the envelope times
    // a polynomial in x^{-1/mu}; use it for every x, no handover needed
    size_t nz = asym_m_.size();
    double mpk = 0.0;
    for (size_t r = 0; r < asym_m_.size(); ++r) {
      if (std::abs(asym_m_[r]) > 1e-12 * std::max(mpk, 1.0)) nz = r + 1;
      mpk = std::max(mpk, std::abs(asym_m_[r]));
    }
    if (nz + 3 <= asym_m_.size()) {
      asym_m_.resize(nz);
      asym_exact_ = true;
      xc_ = 0.0;
      return;
    }

    // place the handover where the series' cancellation noise (growing like
    // e^{2 mu u} relative to the function) meets the optimally truncated
    // asymptote's first omitted term
    const int mu = g_.mu();
    const double eps = std::numeric_limits<double>::epsilon();
    auto asym_log_err = [&](double u) {
      double lu = std::log(u);
      double best = std::numeric_limits<double>::infinity();
      for (size_t r = 1; r < asym_m_.size(); ++r) {
        double a = std::abs(asym_m_[r]);
        best = std::min(best, (a > 0.0 ? std::log(a) : -745.0) - double(r) * lu);
      }
      return std::max(best, std::log(eps));
    };
    // calibrate the noise prefactor against the series' own error report at a
    // point safely below the handover
    const double u0 = std::max(1.0, 0.7 * std::log(1.0 / eps) / (4.0 * mu));
    const double x0 = std::pow(u0, mu);
    GValue probe = series_->eval(x0);
    double env0 = std::max(g_asymptotic_large(g_, x0), 1e-300);
    double rel0 = (probe.err + eps * std::abs(probe.value)) / env0;
    double lc = std::log(std::max(rel0, eps)) - 2.0 * mu * u0;
    auto f = [&](double u) { return lc + 2.0 * mu * u - asym_log_err(u); };
    double lo = 0.5, hi = 60.0;
    if (f(lo) >= 0.0) {
      hi = lo;
    } else if (f(hi) >= 0.0) {
      for (int i = 0; i < 60; ++i) {
        double mid = 0.5 * (lo + hi);
        (f(mid) < 0.0 ? lo : hi) = mid;
      }
    }
    xc_ = std::pow(hi, mu);
  }
}

GValue GEvaluator::eval(double x) const {
  if (!(x > 0.0)) throw std::domain_error("g-evaluator: x must be positive");
  GValue out;
  out.converged = true;
  switch (route_) {
    case Route::exp01:
      out.value = std::exp(g_.b[0] * std::log(x) - x);
      out.err = 4e-16 * std::abs(out.value);
      return out;
    case Route::bessel02:
      out.value = 2.0 * std::exp(0.5 * (g_.b[0] + g_.b[1]) * std::log(x)) *
                  bessel_k(g_.b[0] - g_.b[1], 2.0 * std::sqrt(x));
      out.err = 2e-15 * std::abs(out.value);
      return out;
    case Route::beta11: {
      if (x >= 1.0) return out;
      const double d = g_.a[0] - g_.b[0];
      out.value =
          std::exp(g_.b[0] * std::log(x) + (d - 1.0) * std::log1p(-x) - std::lgamma(d));
      out.err = 4e-16 * std::abs(out.value);
      return out;
    }
    case Route::balanced:
      if (x >= 1.0) return out;  // support convention for sum(b) < sum(a)
      return series_->eval(x);
    case Route::split: {
      const double bw = 1.3;  // handover blend half-width (factor in x)
      if (!asym_exact_ && x * bw <= xc_) return series_->eval(x);

      double env = g_asymptotic_large(g_, x);
      GValue av;
      av.converged = true;
      if (env > 0.0) {
        double u = std::pow(x, 1.0 / g_.mu());
        double sum = 1.0, mag = 1.0, pw = 1.0;
        double prev = 1.0, omitted = 0.0;
        for (size_t r = 1; r < asym_m_.size(); ++r) {
          pw /= u;
          double term = asym_m_[r] * pw, mt = std::abs(term);
          if (!asym_exact_ && mt >= prev) {  // divergence onset: stop early
            omitted = mt;
            break;
          }
          sum += term;
          mag += mt;
          prev = mt;
          omitted = mt;
        }
        if (asym_exact_) omitted = 0.0;
        av.value = env * sum;
        av.err = env * (omitted + 20.0 * std::numeric_limits<double>::epsilon() * mag);
      }
      if (asym_exact_ || x >= xc_ * bw) return av;

      // inside the handover window mix both branches smoothly; a hard switch
      // would put a noise-sized jump in the integrands built on top of eval()
      GValue sv = series_->eval(x);
      double t = 0.5 * (std::log(x / xc_) / std::log(bw) + 1.0);
      double s = t * t * (3.0 - 2.0 * t);
      out.value = (1.0 - s) * sv.value + s * av.value;
      out.err = (1.0 - s) * sv.err + s * av.err;
      out.converged = sv.converged && av.converged;
      return out;
    }
  }
  return out;
}

double g_eval(const GSpec& g, double x, int k_max) {
  g.validate();
  if (!(x > 0.0)) throw std::domain_error("g_eval: x must be positive");
  if (g.p == g.q && x >= 1.0)
    throw std::domain_error(
        "g_eval: balanced spec lives on (0,1); use g_eval_unit_interval beyond");

  GEvaluator ev(g, k_max);
  GValue v = ev.eval(x);
  if (!v.converged)
    throw std::runtime_error("g_eval: residue series did not settle by k_max");
  return v.value;
}

double g_eval_unit_interval(const GSpec& g, double x) {
  g.validate();
  if (g.p != g.q)
    throw std::domain_error("g_eval_unit_interval: requires p = q");
  if (!(g.sum_b() < g.sum_a()))
    throw std::domain_error("g_eval_unit_interval: requires sum(b) < sum(a)");
  if (!(x > 1.0))
    throw std::domain_error("g_eval_unit_interval: x must exceed 1");
  return 0.0;
}

namespace {

// int_0^1 x^{s-1} G(x) dx for p = q, graded toward the x^{beta_min} behaviour
// at 0 and the (1-x)^{sum(a)-sum(b)-1} edge at 1.
double mellin_balanced(const GSpec& g, double s, const QuadratureRule& rule) {
  if (!(g.sum_b() < g.sum_a()))
    throw std::domain_error("mellin_moment: balanced spec needs sum(b) < sum(a)");
  GExpansion ex(g, 0);
  if (ex.poles().entries.empty()) return 0.0;
  const double beta_min = -ex.poles().entries.front().s;
  if (s + beta_min <= 0.0)
    throw std::domain_error("mellin_moment: divergent at this s");

  const double g0 = Decay::exponential(1.0, s - 1.0 + beta_min).grading_at_zero();
  const double g1 = Decay::exponential(1.0, g.sum_a() - g.sum_b() - 1.0).grading_at_zero();

  double prev = 0.0, val = 0.0, errw = 0.0;
  int panels = std::max(rule.radial_panels, 16);
  for (int level = 0;; ++level) {
    LineNodes n = interval_nodes(0.0, 1.0, panels, rule.gl_points, g0, g1);
    std::vector<double> parts(n.t.size());
    errw = 0.0;
    for (size_t i = 0; i < n.t.size(); ++i) {
      GValue v = ex.eval(n.t[i]);
      double w = n.w[i] * std::pow(n.t[i], s - 1.0);
      parts[i] = w * v.value;
      errw += std::abs(w) * v.err;
    }
    val = tree_sum(parts);
    // levels cannot agree below the integrand's own noise floor
    if (level > 0 && std::abs(val - prev) <= rule.tol * std::abs(val) + 0.3 * errw) break;
    if (level >= rule.max_refinements)
      throw std::runtime_error("mellin_moment: refinement did not converge");
    prev = val;
    panels *= 2;
  }
  if (errw + std::abs(val - prev) > 1e-5 * std::abs(val))
    throw std::runtime_error("mellin_moment: accuracy target unattainable here");
  return val;
}

// generic p < q: substitute x = u^mu so the tail decays like e^{-mu u}, sum
// the residue series below the crossover and the asymptote above it.
double mellin_generic(const GSpec& g, double s, const QuadratureRule& rule) {
  const int mu = g.mu();
  GExpansion ex(g, 0);
  if (ex.poles().entries.empty()) return 0.0;
  const double beta_min = -ex.poles().entries.front().s;
  if (s + beta_min <= 0.0)
    throw std::domain_error("mellin_moment: divergent at this s");

  const double uc = series_asymptote_crossover(mu);
  const double ur = uc + 48.0 / mu;
  const double g0 =
      Decay::exponential(1.0, mu * (s + beta_min) - 1.0).grading_at_zero();

  auto weight = [&](double u) {
    return mu * std::pow(u, mu * s - 1.0);
  };

  double prev = 0.0, val_a = 0.0, errw = 0.0;
  int panels = std::max(rule.radial_panels, 16);
  for (int level = 0;; ++level) {
    LineNodes n = interval_nodes(0.0, uc, panels, rule.gl_points, g0, 1.0);
    std::vector<double> parts(n.t.size());
    errw = 0.0;
    for (size_t i = 0; i < n.t.size(); ++i) {
      GValue v = ex.eval(std::pow(n.t[i], mu));
      double w = n.w[i] * weight(n.t[i]);
      parts[i] = w * v.value;
      errw += std::abs(w) * v.err;
    }
    val_a = tree_sum(parts);
    // levels cannot agree below the integrand's own noise floor
    if (level > 0 && std::abs(val_a - prev) <= rule.tol * std::abs(val_a) + 0.3 * errw) break;
    if (level >= rule.max_refinements)
      throw std::runtime_error("mellin_moment: refinement did not converge");
    prev = val_a;
    panels *= 2;
  }

  LineNodes nb = interval_nodes(uc, ur, 24, rule.gl_points);
  std::vector<double> parts(nb.t.size());
  for (size_t i = 0; i < nb.t.size(); ++i)
    parts[i] = nb.w[i] * weight(nb.t[i]) * g_asymptotic_large(g, std::pow(nb.t[i], mu));
  double val_b = tree_sum(parts);

  double val = val_a + val_b;
  double err = errw + std::abs(val_a - prev) + std::abs(val_b) / uc;
  if (err > 1e-5 * std::abs(val))
    throw std::runtime_error("mellin_moment: accuracy target unattainable here");
  return val;
}

}  // namespace

double mellin_moment(const GSpec& g, double s, const QuadratureRule& rule) {
  g.validate();
  rule.validate();
  if (!(s > 0.0)) throw std::domain_error("mellin_moment: s must be positive");

  if (g.p == 0 && g.q == 1) {
    double sig = s - 1.0 + g.b[0];
    if (sig <= -1.0) throw std::domain_error("mellin_moment: divergent at this s");
    auto f = [&](double x) { return std::pow(x, s - 1.0) * g_eval(g, x); };
    Decay d = Decay::exponential(1.0, sig);
    d.degree_hint = static_cast<int>(std::ceil(std::max(0.0, sig)));
    return integrate_halfline(f, d, std::min(rule.tol, 1e-8));
  }
  if (g.p == 0 && g.q == 2) {
    // u = sqrt(x): 4 int u^{2s-1+b1+b2} K_{b1-b2}(2u) du
    double nu = std::abs(g.b[0] - g.b[1]);
    double pw = 2.0 * s - 1.0 + g.b[0] + g.b[1];
    if (pw - nu <= -1.0) throw std::domain_error("mellin_moment: divergent at this s");
    auto f = [&](double u) {
      return 4.0 * std::pow(u, pw) * bessel_k(nu, 2.0 * u);
    };
    Decay d = Decay::bessel(2.0, nu, std::max(0.0, pw - nu));
    d.degree_hint = static_cast<int>(std::ceil(std::max(0.0, pw)));
    return integrate_halfline(f, d, std::min(rule.tol, 1e-8));
  }
  if (g.p == g.q) return mellin_balanced(g, s, rule);
  return mellin_generic(g, s, rule);
}

AdmissibilityReport is_admissible_weight(const GSpec& g, double theta) {
  g.validate();
  AdmissibilityReport r;
  if (!(theta > 0.0) || !std::isfinite(theta)) {
    r.reason = "scale theta must be positive and finite";
    return r;
  }
  for (int j = 0; j < g.q; ++j) {
    if (g.b[j] > -1.0) continue;
    bool exempt = false;
    for (double ai : g.a) {
      long k;
      if (ladder_hit(g.b[j], ai, k)) {
        exempt = true;
        break;
      }
    }
    if (!exempt) {
      r.reason = "lower parameter b[" + std::to_string(j) +
                 "] <= -1 without an integer upper-parameter ladder";
      return r;
    }
  }
  r.admissible = true;
  return r;
}

}  // namespace hks
