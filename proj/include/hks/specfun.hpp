#pragma once

#include <complex>
#include <vector>

namespace hks {

using cplx = std::complex<double>;

// Rising factorial (a)_k = a(a+1)...(a+k-1), (a)_0 = 1.
double pochhammer(double a, int k);

// Sign of (a)_k by counting negative factors; 0 if any factor vanishes.
// Never multiplies magnitudes, so it is exact for any k.
int pochhammer_sign(double a, int k);

// log Gamma(x) for x > 0.
double log_gamma(double x);

// log |Gamma(x)| for any non-pole real x; sign receives -1/0/+1
// (0 and +inf returned at the poles x = 0, -1, -2, ...).
double log_gamma_signed(double x, int& sign);

// log Gamma(z) for complex z away from the poles, by upward recurrence into
// the Stirling region.  The imaginary part may differ from the principal
// branch by a multiple of 2 pi; exp() of any combination is unaffected.
cplx log_gamma(cplx z);

// Modified Bessel function I_nu(x), nu > -1, x >= 0.
// Ascending series for x <= 30, asymptotic expansion above, with a
// series fallback when the asymptotic min-term is too large.
double bessel_i(double nu, double x);

// MacDonald function K_nu(x), x > 0, any real nu (K_{-nu} = K_nu).
// Temme's series for x <= 2, Steed's continued fraction beyond, then
// upward recurrence from mu in [-1/2, 1/2].
double bessel_k(double nu, double x);

// Bessel function J_nu(x), nu > -1, x >= 0.
// Alternating series below x = 14, Hankel's asymptotic expansion above.
double bessel_j(double nu, double x);

// Generalized Laguerre polynomial L_n^nu(x) by the three-term recurrence.
double laguerre(int n, double nu, double x);

// Two-parameter Mittag-Leffler function E_mu,alpha(t) = sum t^k/Gamma(mu k + alpha).
double mittag_leffler(double mu, double alpha, double t);
cplx mittag_leffler(double mu, double alpha, cplx t);

// Generalized hypergeometric series pFq(a; b; x).
// Requires: no b_i a non-positive integer; |x| < 1 when p = q+1; x = 0 when p > q+1.
double hyper_pfq(const std::vector<double>& a, const std::vector<double>& b, double x);
cplx hyper_pfq(const std::vector<double>& a, const std::vector<double>& b, cplx x);

// sum_k w^k / (k! Gamma(k+nu+1)), entire in w; equals (x/2)^{-nu} I_nu(x)
// at w = x^2/4 and (x/2)^{-nu} J_nu(x) at w = -x^2/4.  This is the
// branch-free building block used everywhere a power (z u)^{-nu/2} would
// otherwise multiply a Bessel function of sqrt(z u).
double normalized_bessel_i(double nu, double w);
cplx normalized_bessel_i(double nu, cplx w);

}  // namespace hks
