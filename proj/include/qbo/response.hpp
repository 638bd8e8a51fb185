#pragma once

// response.hpp — frequency-domain system response χ̃(ω), the characteristic
// cubic f(s) of the Drude memory equation, and the time-domain propagator
// G(t) with Ġ, G̈ (residue evaluation, confluent form near degenerate roots).
//
// The memory equation  q̈ = -Ω_S² q + Ω_S ∫₀ᵗ φ_E(t-s) q(s) ds + drive  has
// Laplace transform denominator s² + Ω_S² - Ω_S φ̃_E^L(s); multiplying by
// (s+γ) gives f(s) = s³ + γs² + Ω_S²s + (Ω_S - 2λ²η)γΩ_S and
// G̃(s) = (s+γ)/f(s), so G(t) = Σ_k (s_k+γ) e^{s_k t}/f'(s_k) for simple
// roots, with t-polynomial residues when roots merge. χ̃(ω) = Ω_S·G̃(-iω).

#include <array>
#include <cmath>
#include <complex>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "qbo/bath.hpp"
#include "qbo/numerics.hpp"

namespace qbo::response {

using num::complex;

struct ModelParams {
  double omega_s{1.0};
  double beta{};
  bath::DrudeBath bath;
  double lambda{1.0};  // coupling scale of the λ-augmented interaction

  ModelParams(double omega_s_, double beta_, bath::DrudeBath bath_, double lambda_ = 1.0)
      : omega_s(omega_s_), beta(beta_), bath(bath_), lambda(lambda_) {
    if (!(omega_s > 0.0)) throw std::invalid_argument("ModelParams: omega_s must be > 0");
    if (!(beta > 0.0)) throw std::invalid_argument("ModelParams: beta must be > 0");
    if (!(lambda >= 0.0 && lambda <= 1.0))
      throw std::invalid_argument("ModelParams: lambda must lie in [0,1]");
  }

  // λ² η — the interaction scales as λV_SE and φ̃_E is quadratic in the couplings
  double effective_eta() const { return lambda * lambda * bath.eta; }
  double temperature() const { return 1.0 / beta; }
};

// χ̃(ω) = Ω_S / (Ω_S² - ω² - Ω_S λ² φ̃_E(ω))
inline complex chi_tilde(const ModelParams& p, complex omega) {
  const complex phi = bath::phi_tilde(p.bath, omega);
  const complex den = p.omega_s * p.omega_s - omega * omega -
                      p.omega_s * p.lambda * p.lambda * phi;
  const double scale = p.omega_s * p.omega_s + std::norm(omega) + p.omega_s * std::abs(phi);
  if (std::abs(den) < 1e-12 * scale)
    throw std::domain_error("chi_tilde: pole at omega = (" + std::to_string(omega.real()) +
                            ", " + std::to_string(omega.imag()) + ")");
  return p.omega_s / den;
}

// χ̃(iw) on the imaginary axis, real-valued; w >= 0 in all equilibrium sums.
inline double chi_tilde_imag_axis(const ModelParams& p, double w) {
  const double phi = bath::phi_tilde_imag_axis(p.bath, w);
  const double den =
      p.omega_s * p.omega_s + w * w - p.omega_s * p.lambda * p.lambda * phi;
  const double scale = p.omega_s * p.omega_s + w * w + p.omega_s * std::abs(phi);
  if (std::abs(den) < 1e-14 * scale)
    throw std::domain_error("chi_tilde_imag_axis: pole at w = " + std::to_string(w));
  return p.omega_s / den;
}

struct CubicRoots {
  std::array<complex, 3> roots;
  bool degenerate{false};  // some pair coincides within tolerance
};

// Coefficients of f(s) = s³ + γ s² + Ω² s + (Ω - 2λ²η) γ Ω (monic, descending).
inline std::array<double, 4> characteristic_coefficients(const ModelParams& p) {
  const double g = p.bath.gamma;
  const double om = p.omega_s;
  return {1.0, g, om * om, (om - 2.0 * p.effective_eta()) * g * om};
}

inline constexpr double kDegenerateRootTol = 1e-7;

inline CubicRoots characteristic_roots(const ModelParams& p) {
  const auto c = characteristic_coefficients(p);
  CubicRoots out;
  out.roots = num::solve_cubic(c[1], c[2], c[3]);
  double scale = 0.0;
  for (const auto& r : out.roots) scale = std::max(scale, std::abs(r));
  for (int i = 0; i < 3 && !out.degenerate; ++i)
    for (int j = i + 1; j < 3; ++j)
      if (std::abs(out.roots[static_cast<std::size_t>(i)] -
                   out.roots[static_cast<std::size_t>(j)]) < kDegenerateRootTol * scale) {
        out.degenerate = true;
        break;
      }
  return out;
}

struct PropagatorValue {
  double g{};
  double gdot{};
  double gddot{};
  bool confluent{false};  // evaluated with the repeated-root residue formula
};

// Residue representation of G(t): one entry per distinct root (group), each
// carrying a polynomial so that G(t) = Σ_i e^{s_i t} (c0 + c1 t + c2 t²).
class Propagator {
 public:
  struct Group {
    complex s;
    int multiplicity{1};
    std::array<complex, 3> poly_g{};     // residue polynomial of G
    std::array<complex, 3> poly_gdot{};  // of Ġ
  };

  explicit Propagator(const ModelParams& p) : omega_s_(p.omega_s) {
    const CubicRoots cr = characteristic_roots(p);
    confluent_ = cr.degenerate;
    const double gamma = p.bath.gamma;
    double scale = 0.0;
    for (const auto& r : cr.roots) scale = std::max(scale, std::abs(r));
    const double tol = kDegenerateRootTol * std::max(scale, 1e-300);

    // cluster roots within tolerance
    std::array<bool, 3> used{};
    for (int i = 0; i < 3; ++i) {
      if (used[static_cast<std::size_t>(i)]) continue;
      Group grp;
      complex sum = cr.roots[static_cast<std::size_t>(i)];
      int count = 1;
      used[static_cast<std::size_t>(i)] = true;
      for (int j = i + 1; j < 3; ++j) {
        if (used[static_cast<std::size_t>(j)]) continue;
        if (std::abs(cr.roots[static_cast<std::size_t>(j)] - sum / double(count)) < tol) {
          sum += cr.roots[static_cast<std::size_t>(j)];
          used[static_cast<std::size_t>(j)] = true;
          ++count;
        }
      }
      grp.s = sum / double(count);
      // a merged conjugate pair sits on the real axis
      if (count > 1 && std::abs(grp.s.imag()) < tol) grp.s = complex(grp.s.real(), 0.0);
      grp.multiplicity = count;
      groups_.push_back(grp);
    }

    // partial fractions of (s+γ)/f(s) over the groups
    if (groups_.size() == 3) {
      for (auto& g : groups_) {
        complex prod(1.0, 0.0);
        for (const auto& o : groups_)
          if (&o != &g) prod *= (g.s - o.s);
        g.poly_g[0] = (g.s + gamma) / prod;
      }
    } else if (groups_.size() == 2) {
      Group& dbl = groups_[0].multiplicity == 2 ? groups_[0] : groups_[1];
      Group& simple = groups_[0].multiplicity == 2 ? groups_[1] : groups_[0];
      const complex a = dbl.s, b = simple.s;
      dbl.poly_g[0] = -(gamma + b) / ((a - b) * (a - b));
      dbl.poly_g[1] = (a + gamma) / (a - b);
      simple.poly_g[0] = (b + gamma) / ((b - a) * (b - a));
    } else {  // triple root
      Group& g = groups_[0];
      g.poly_g[0] = complex(0.0, 0.0);
      g.poly_g[1] = complex(1.0, 0.0);
      g.poly_g[2] = (g.s + gamma) / 2.0;
    }
    for (auto& g : groups_) g.poly_gdot = differentiate(g.poly_g, g.s);
  }

  // d/dt of e^{st} P(t) keeps the exponential and maps P -> P' + sP
  static std::array<complex, 3> differentiate(const std::array<complex, 3>& p, complex s) {
    std::array<complex, 3> d{};
    d[0] = p[1] + s * p[0];
    d[1] = 2.0 * p[2] + s * p[1];
    d[2] = s * p[2];
    return d;
  }

  PropagatorValue operator()(double t) const {
    if (t < 0.0) throw std::invalid_argument("Propagator: t must be >= 0");
    complex g(0.0), gd(0.0), gdd(0.0);
    for (const auto& grp : groups_) {
      const complex e = std::exp(grp.s * t);
      const auto poly_gddot = differentiate(grp.poly_gdot, grp.s);
      g += e * horner(grp.poly_g, t);
      gd += e * horner(grp.poly_gdot, t);
      gdd += e * horner(poly_gddot, t);
    }
    return {g.real(), gd.real(), gdd.real(), confluent_};
  }

  std::span<const Group> groups() const { return groups_; }
  bool confluent() const { return confluent_; }
  double omega_s() const { return omega_s_; }

 private:
  static complex horner(const std::array<complex, 3>& p, double t) {
    return (p[2] * t + p[1]) * t + p[0];
  }

  std::vector<Group> groups_;
  bool confluent_{false};
  double omega_s_{};
};

// G(t), Ġ(t), G̈(t) at a single time; G(0)=0, Ġ(0)=1, G̈(0)=0.
inline PropagatorValue propagator(const ModelParams& p, double t) {
  return Propagator(p)(t);
}

}  // namespace qbo::response
