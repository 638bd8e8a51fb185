#pragma once

// bath.hpp — Drude environment: response transform φ̃_E, spectral density J,
// reorganization energy, and the exponential-mode decomposition of the bath
// correlation function C_E(t) used by the covariance dynamics.
//
// Conventions (Ω_S = ħ = k_B = 1 units):
//   φ̃_E(ω)  = 2ηγ/(γ - iω)        half-Fourier transform of φ_E(t) = 2ηγ e^{-γt}
//   J(ω)    = Im φ̃_E(ω) = 2ηγω/(γ²+ω²)
//   η       = φ̃_E(0)/2            definition of the reorganization energy
// The 2ηγ normalization is the one consistent with η = φ̃_E(0)/2; with the
// alternative ηγ/(γ-iω) convention the coupling axis rescales by a factor 2.

#include <cmath>
#include <complex>
#include <stdexcept>
#include <string>
#include <vector>

#include "qbo/numerics.hpp"

namespace qbo::bath {

using num::complex;

struct DrudeBath {
  double eta{};    // reorganization energy
  double gamma{};  // memory decay rate (cutoff)

  DrudeBath(double eta_, double gamma_) : eta(eta_), gamma(gamma_) {
    if (!(eta >= 0.0)) throw std::invalid_argument("DrudeBath: eta must be >= 0");
    if (!(gamma > 0.0)) throw std::invalid_argument("DrudeBath: gamma must be > 0");
  }
};

// A bath model only needs its response transform on the imaginary axis plus a
// coupling scale; non-Drude models can plug in here.
template <typename B>
concept SpectralModel = requires(const B& b, double w) {
  { phi_tilde_imag_axis(b, w) } -> std::convertible_to<double>;
  { reorganization_energy(b) } -> std::convertible_to<double>;
};

// φ̃_E at complex frequency; pole at ω = -iγ.
inline complex phi_tilde(const DrudeBath& b, complex omega) {
  const complex den = b.gamma - complex(0.0, 1.0) * omega;
  if (std::abs(den) < 1e-12 * b.gamma)
    throw std::domain_error("phi_tilde: evaluation at the Drude pole omega = -i*gamma");
  return 2.0 * b.eta * b.gamma / den;
}

// φ̃_E(iw) = 2ηγ/(γ+w); real for w > -γ.
inline double phi_tilde_imag_axis(const DrudeBath& b, double w) {
  const double den = b.gamma + w;
  if (std::abs(den) < 1e-12 * b.gamma)
    throw std::domain_error("phi_tilde_imag_axis: evaluation at the Drude pole w = -gamma");
  return 2.0 * b.eta * b.gamma / den;
}

inline double reorganization_energy(const DrudeBath& b) {
  // φ̃_E(0)/2 by definition; identical to the stored coupling field.
  return 0.5 * phi_tilde(b, complex(0.0, 0.0)).real();
}

// J(ω) = Im φ̃_E(ω)
inline double spectral_density(const DrudeBath& b, double omega) {
  return 2.0 * b.eta * b.gamma * omega / (b.gamma * b.gamma + omega * omega);
}

// φ_E(t) = 2ηγ e^{-γt}, t >= 0
inline double memory_kernel(const DrudeBath& b, double t) {
  if (t < 0.0) throw std::invalid_argument("memory_kernel: t must be >= 0");
  return 2.0 * b.eta * b.gamma * std::exp(-b.gamma * t);
}

struct CorrelationMode {
  complex amplitude;  // c_k
  double rate;        // ν_k, Re ν_k > 0
};

// C_E(t) ≈ Σ_k c_k e^{-ν_k t} for t >= 0, with ν_0 = γ (Drude pole) and
// ν_k = 2πk/β (Matsubara poles).
struct MatsubaraExpansion {
  std::vector<CorrelationMode> modes;
  double beta{};
  int n_matsubara{};       // count of Matsubara terms retained (excludes the Drude mode)
  bool truncated{false};   // mode cap hit before the adaptive rule was satisfied
  double tail_estimate{};  // size of the first dropped |c_k|/ν_k when truncated

  complex operator()(double t) const {
    complex c(0.0, 0.0);
    for (const auto& m : modes) c += m.amplitude * std::exp(-m.rate * t);
    return c;
  }
  double real_part(double t) const { return operator()(t).real(); }
  double imag_part(double t) const { return operator()(t).imag(); }
};

inline constexpr int kAdaptiveModes = 0;

// Exponential decomposition of C_E(t) by contour residues of the
// fluctuation-dissipation integral:
//   c_0 = ηγ[cot(βγ/2) - i],           ν_0 = γ
//   c_k = (4ηγ/β) ϖ_k/(ϖ_k² - γ²),     ν_k = ϖ_k = 2πk/β
// Requested n_modes counts the Matsubara terms; n_modes <= 0 selects the count
// adaptively: stop once |c_k|/ν_k drops below 1e-10 of the running Σ|c_j|/ν_j.
inline MatsubaraExpansion correlation_modes(const DrudeBath& b, double beta,
                                            int n_modes = kAdaptiveModes) {
  if (!(beta > 0.0)) throw std::invalid_argument("correlation_modes: beta must be > 0");
  constexpr int kModeCap = 2'000'000;
  MatsubaraExpansion exp_out;
  exp_out.beta = beta;
  if (b.eta == 0.0) {
    exp_out.modes.push_back({complex(0.0, 0.0), b.gamma});
    exp_out.n_matsubara = 0;
    return exp_out;
  }
  const double half = 0.5 * beta * b.gamma;
  // pole collision: βγ = 2πk puts a Matsubara frequency on the Drude rate
  const double k_near = std::round(half / M_PI);
  if (k_near >= 1.0 && std::abs(half - k_near * M_PI) < 1e-8 * half)
    throw std::domain_error(
        "correlation_modes: beta*gamma = 2*pi*" + std::to_string(static_cast<long>(k_near)) +
        " collides a Matsubara frequency with the Drude rate; shift gamma infinitesimally");
  exp_out.modes.push_back({b.eta * b.gamma * complex(1.0 / std::tan(half), -1.0), b.gamma});
  const bool adaptive = n_modes <= 0;
  const int limit = adaptive ? kModeCap : std::min(n_modes, kModeCap);
  double running = std::abs(exp_out.modes[0].amplitude) / b.gamma;
  for (int k = 1; k <= limit; ++k) {
    const double w = 2.0 * M_PI * k / beta;
    const double c = 4.0 * b.eta * b.gamma / beta * w / (w * w - b.gamma * b.gamma);
    const double weight = std::abs(c) / w;
    if (adaptive && weight < 1e-10 * running) break;
    exp_out.modes.push_back({complex(c, 0.0), w});
    running += weight;
    ++exp_out.n_matsubara;
    if (k == kModeCap) {
      exp_out.truncated = true;
      exp_out.tail_estimate = weight;
    }
  }
  if (!adaptive && n_modes > kModeCap) {
    exp_out.truncated = true;
    exp_out.tail_estimate = std::abs(exp_out.modes.back().amplitude.real()) /
                            exp_out.modes.back().rate;
  }
  return exp_out;
}

}  // namespace qbo::bath
