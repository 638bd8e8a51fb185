#pragma once

// numerics.hpp — shared numerical utilities: stable hyperbolic helpers,
// Hurwitz-zeta tail sums, adaptive Gauss-Kronrod quadrature, Richardson
// differentiation, a robust cubic solver, and the exponential-moment
// integrals e_m(z,t) = ∫₀ᵗ u^m e^{zu} du used by the covariance kernels.

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <cstddef>
#include <limits>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace qbo::num {

using complex = std::complex<double>;

// Thrown when an iterative scheme cannot reach the requested tolerance;
// carries the error bound it did achieve.
class ToleranceError : public std::runtime_error {
 public:
  ToleranceError(const std::string& what, double achieved)
      : std::runtime_error(what + " (achieved error bound " + std::to_string(achieved) + ")"),
        achieved_(achieved) {}
  double achieved() const noexcept { return achieved_; }

 private:
  double achieved_;
};

// coth with an exact small tail: coth(x) - 1 = 2/(e^{2x}-1) is resolved via expm1.
inline double coth(double x) {
  if (x == 0.0) throw std::domain_error("coth: argument must be nonzero");
  if (x < 0.0) return -coth(-x);
  if (x < 1e-4) return 1.0 / x + x / 3.0 - x * x * x / 45.0;
  return 1.0 + 2.0 / std::expm1(2.0 * x);
}

// arcoth(x) = atanh(1/x), |x| > 1.
inline double arcoth(double x) {
  if (!(std::abs(x) > 1.0)) throw std::domain_error("arcoth: |argument| must exceed 1");
  return 0.5 * std::log((x + 1.0) / (x - 1.0));
}

// ln(2 sinh x) for x > 0 without overflow at large x.
inline double log_2sinh(double x) {
  if (!(x > 0.0)) throw std::domain_error("log_2sinh: argument must be positive");
  return x + std::log1p(-std::exp(-2.0 * x));
}

namespace detail {
// Bernoulli numbers B_2..B_12 for the Euler-Maclaurin tail.
inline constexpr std::array<double, 6> kBernoulli = {
    1.0 / 6.0, -1.0 / 30.0, 1.0 / 42.0, -1.0 / 30.0, 5.0 / 66.0, -691.0 / 2730.0};
}  // namespace detail

// Tail of the integer zeta sum: Σ_{n > n0} n^{-s} = ζ(s, n0+1).
// s = 2 is the trigamma tail used by the Matsubara acceleration.
inline double zeta_tail(int s, long n0) {
  if (s < 2) throw std::invalid_argument("zeta_tail: requires s >= 2");
  if (n0 < 0) throw std::invalid_argument("zeta_tail: requires n0 >= 0");
  double a = static_cast<double>(n0) + 1.0;
  double direct = 0.0;
  while (a < 24.0) {  // shift the argument until the asymptotic series converges fast
    direct += std::pow(a, -s);
    a += 1.0;
  }
  const double inv = 1.0 / a;
  double result = std::pow(a, 1.0 - s) / (s - 1.0) + 0.5 * std::pow(a, -s);
  double rising = static_cast<double>(s);      // (s)_{2k-1}, starts at s for k=1
  double fact = 2.0;                           // (2k)!
  double power = std::pow(a, -s - 1);          // a^{-s-2k+1}
  for (std::size_t k = 0; k < detail::kBernoulli.size(); ++k) {
    result += detail::kBernoulli[k] / fact * rising * power;
    // advance (s)_{2k-1} -> (s)_{2k+1}, (2k)! -> (2k+2)!, power -> power * a^{-2}
    const double m = static_cast<double>(s) + 2.0 * k;
    rising *= (m + 1.0) * (m + 2.0) / 1.0;
    fact *= (2.0 * k + 3.0) * (2.0 * k + 4.0);
    power *= inv * inv;
  }
  return direct + result;
}

// ---------------------------------------------------------------------------
// Adaptive Gauss-Kronrod (G7, K15) quadrature.

namespace detail {
// 15-point Kronrod nodes/weights on [-1,1] and the embedded 7-point Gauss weights.
inline constexpr std::array<double, 8> kKronrodNodes = {
    0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
    0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
    0.586087235467691130294144838258730, 0.405845151377397166906606412076961,
    0.207784955007898467600689403773245, 0.000000000000000000000000000000000};
inline constexpr std::array<double, 8> kKronrodWeights = {
    0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
    0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
    0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
    0.204432940075298892414161999234649, 0.209482141084727828012999174891714};
inline constexpr std::array<double, 4> kGaussWeights = {
    0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
    0.381830050505118944950369775488975, 0.417959183673469387755102040816327};

template <typename F>
inline void gk15(const F& f, double a, double b, double& value, double& error) {
  const double c = 0.5 * (a + b);
  const double h = 0.5 * (b - a);
  double fv[15];
  for (int i = 0; i < 7; ++i) {
    fv[i] = f(c - h * kKronrodNodes[static_cast<std::size_t>(i)]);
    fv[14 - i] = f(c + h * kKronrodNodes[static_cast<std::size_t>(i)]);
  }
  fv[7] = f(c);
  double kron = 0.0;
  for (int i = 0; i < 7; ++i)
    kron += kKronrodWeights[static_cast<std::size_t>(i)] * (fv[i] + fv[14 - i]);
  kron += kKronrodWeights[7] * fv[7];
  double gauss = kGaussWeights[3] * fv[7];
  for (int i = 0; i < 3; ++i)
    gauss += kGaussWeights[static_cast<std::size_t>(i)] * (fv[2 * i + 1] + fv[13 - 2 * i]);
  value = kron * h;
  error = std::abs((kron - gauss) * h);
}
}  // namespace detail

// Adaptive bisection on the K15-G7 error estimate. Tolerance is applied as
// tol * max(1, |integral|) across the whole interval.
template <typename F>
inline double integrate(const F& f, double a, double b, double tol = 1e-12, int max_depth = 48) {
  struct Segment {
    double a, b, value, error;
    int depth;
  };
  double v0, e0;
  detail::gk15(f, a, b, v0, e0);
  std::vector<Segment> stack{{a, b, v0, e0, 0}};
  double total = v0;
  double total_err = e0;
  double result = 0.0;
  while (!stack.empty()) {
    Segment seg = stack.back();
    stack.pop_back();
    const double goal = tol * std::max(1.0, std::abs(total));
    if (seg.error <= goal * std::abs(seg.b - seg.a) / std::abs(b - a) || seg.depth >= max_depth ||
        seg.b - seg.a < std::numeric_limits<double>::epsilon() * std::max(std::abs(seg.a), 1.0)) {
      result += seg.value;
      continue;
    }
    const double mid = 0.5 * (seg.a + seg.b);
    double vl, el, vr, er;
    detail::gk15(f, seg.a, mid, vl, el);
    detail::gk15(f, mid, seg.b, vr, er);
    total += vl + vr - seg.value;
    total_err += el + er - seg.error;
    stack.push_back({seg.a, mid, vl, el, seg.depth + 1});
    stack.push_back({mid, seg.b, vr, er, seg.depth + 1});
  }
  return result;
}

// Central difference with one Richardson level; the step is h_rel relative
// to |x| (falls back to h_rel itself at x = 0).
template <typename F>
inline double derivative(const F& f, double x, double h_rel = 1e-4) {
  const double h = (x == 0.0) ? h_rel : h_rel * std::abs(x);
  const double d1 = (f(x + h) - f(x - h)) / (2.0 * h);
  const double d2 = (f(x + 0.5 * h) - f(x - 0.5 * h)) / h;
  const double result = (4.0 * d2 - d1) / 3.0;
  if (!std::isfinite(result)) throw ToleranceError("derivative: non-finite difference quotient", std::abs(d1 - d2));
  return result;
}

// ---------------------------------------------------------------------------
// Cubic solver.

// Roots of s^3 + b s^2 + c s + d with real coefficients. Complex roots are
// returned as exact conjugate pairs; every root gets one Newton polish step.
inline std::array<complex, 3> solve_cubic(double b, double c, double d) {
  const double p = c - b * b / 3.0;
  const double q = 2.0 * b * b * b / 27.0 - b * c / 3.0 + d;
  const double shift = -b / 3.0;
  std::array<complex, 3> roots;
  const double disc = q * q / 4.0 + p * p * p / 27.0;
  if (disc <= 0.0) {
    // three real roots, trigonometric form
    const double mp = std::sqrt(std::max(-p / 3.0, 0.0));
    double arg = (mp > 0.0) ? 3.0 * q / (2.0 * p * mp) : 0.0;
    arg = std::clamp(arg, -1.0, 1.0);
    const double phi = std::acos(arg) / 3.0;
    for (int k = 0; k < 3; ++k) {
      const double t = 2.0 * mp * std::cos(phi - 2.0 * M_PI * k / 3.0);
      roots[static_cast<std::size_t>(k)] = complex(t + shift, 0.0);
    }
  } else {
    const double sq = std::sqrt(disc);
    const double u = std::cbrt(-q / 2.0 + sq);
    const double v = std::cbrt(-q / 2.0 - sq);
    const double real_root = u + v;
    const double re = -real_root / 2.0;
    const double im = std::sqrt(3.0) / 2.0 * std::abs(u - v);
    roots[0] = complex(real_root + shift, 0.0);
    roots[1] = complex(re + shift, im);
    roots[2] = complex(re + shift, -im);
  }
  // one Newton step per root against the original cubic; skipped near
  // degenerate roots where f' vanishes and the step would be unbounded
  const auto f = [&](complex s) { return ((s + b) * s + c) * s + d; };
  const auto fp = [&](complex s) { return (3.0 * s + 2.0 * b) * s + c; };
  for (auto& r : roots) {
    const complex der = fp(r);
    if (std::abs(der) == 0.0) continue;
    const complex step = f(r) / der;
    if (std::abs(step) < 1e-2 * (1.0 + std::abs(r))) r -= step;
  }
  // restore exact conjugacy after polishing
  if (roots[1].imag() != 0.0) {
    roots[1] = complex(0.5 * (roots[1].real() + roots[2].real()),
                       0.5 * (roots[1].imag() - roots[2].imag()));
    roots[2] = std::conj(roots[1]);
  }
  return roots;
}

// ---------------------------------------------------------------------------
// Exponential moments e_m(z,t) = ∫₀ᵗ u^m e^{zu} du.
//
// Series branch for small |z|t (the closed form cancels badly there), explicit
// closed form otherwise. Supports m up to 8, which covers triple roots.

inline complex exp_moment(complex z, double t, int m) {
  if (m < 0 || m > 32) throw std::invalid_argument("exp_moment: m out of range");
  if (t == 0.0) return complex(0.0, 0.0);
  const double zt_mag = std::abs(z) * t;
  // the closed form cancels catastrophically once |zt| drops below ~m
  if (zt_mag < std::max(2.0, 0.6 * m + 2.0)) {
    // t^{m+1} Σ_j (zt)^j / (j! (m+j+1))
    complex sum(1.0 / (m + 1.0), 0.0);
    complex term(1.0, 0.0);
    const complex zt = z * t;
    for (int j = 1; j < 64; ++j) {
      term *= zt / static_cast<double>(j);
      const complex add = term / static_cast<double>(m + j + 1);
      sum += add;
      if (std::abs(add) < 1e-18 * std::abs(sum)) break;
    }
    return std::pow(t, m + 1) * sum;
  }
  // e^{zt} Σ_{r=0}^m (-1)^{m-r} (m!/r!) t^r / z^{m-r+1}  -  (-1)^m m! / z^{m+1}
  const complex ezt = std::exp(z * t);
  complex sum(0.0, 0.0);
  double fact = 1.0;  // m!/r! accumulated from r=m down to 0
  double tr = std::pow(t, m);
  complex zpow = z;  // z^{m-r+1} with r=m
  double sign = 1.0;
  for (int r = m; r >= 0; --r) {
    sum += sign * fact * tr / zpow;
    if (r > 0) {
      fact *= r;
      tr /= t;
      zpow *= z;
      sign = -sign;
    }
  }
  double mfact = 1.0;
  for (int i = 2; i <= m; ++i) mfact *= i;
  const double msign = (m % 2 == 0) ? 1.0 : -1.0;
  complex zm1 = z;
  for (int i = 0; i < m; ++i) zm1 *= z;
  return ezt * sum - msign * mfact / zm1;
}

// ---------------------------------------------------------------------------
// Least squares line fit; returns slope, intercept and R².

struct LineFit {
  double slope{};
  double intercept{};
  double r2{};
};

inline LineFit linear_fit(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size() || x.size() < 2)
    throw std::invalid_argument("linear_fit: need two equally sized samples");
  const double n = static_cast<double>(x.size());
  double sx = 0, sy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sx += x[i];
    sy += y[i];
  }
  const double mx = sx / n, my = sy / n;
  double sxx = 0, sxy = 0, syy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double dx = x[i] - mx, dy = y[i] - my;
    sxx += dx * dx;
    sxy += dx * dy;
    syy += dy * dy;
  }
  if (sxx == 0.0) throw std::invalid_argument("linear_fit: degenerate abscissae");
  LineFit fit;
  fit.slope = sxy / sxx;
  fit.intercept = my - fit.slope * mx;
  fit.r2 = (syy == 0.0) ? 1.0 : (sxy * sxy) / (sxx * syy);
  return fit;
}

}  // namespace qbo::num
