#pragma once

// equilibrium.hpp — reduced-state equilibrium statistics from the
// fluctuation-dissipation Matsubara sums:
//   ⟨δq²⟩ = (1/β) χ̃(0) + (2/β) Σ_{n≥1} χ̃(iϖ_n)
//   ⟨δp²⟩ = 1/(βΩ) + (2/(βΩ)) Σ_{n≥1} [1 - ϖ_n² χ̃(iϖ_n)/Ω]
// plus the symplectic eigenvalue ν = √(⟨δq²⟩⟨δp²⟩), the effective frequency
// Ω_eff = (2/β) arcoth(2ν) and the Gaussian entanglement entropy.
//
// Acceleration: the bare-oscillator part of each sum is resummed in closed
// form (coth identity); the interaction residual decays as ϖ^-5 (q) and ϖ^-3
// (p), and the slow parts are completed with Hurwitz-zeta tails, so the
// target tolerance (default 1e-10) needs only a few thousand terms.

#include <cmath>
#include <stdexcept>
#include <string>

#include "qbo/bath.hpp"
#include "qbo/numerics.hpp"
#include "qbo/response.hpp"

namespace qbo::equilibrium {

using response::ModelParams;

struct EquilibriumState {
  double var_q{};      // ⟨δq²⟩
  double var_p{};      // ⟨δp²⟩
  double nu{};         // symplectic eigenvalue
  double omega_eff{};  // effective frequency of the mean-force oscillator
};

namespace detail {

inline constexpr long kTermCap = 1'000'000;

// Picks N so that the neglected ϖ^-(s+1) remainder stays below half the
// requested tolerance; the ζ(s) tail itself is added in closed form.
inline long choose_terms(double remainder_coeff, double tol_abs, int s) {
  // Σ_{n>N} n^-(s+1) <= 1/(s N^s)
  const double target = 0.5 * tol_abs * s;
  double n = std::pow(std::abs(remainder_coeff) / std::max(target, 1e-300), 1.0 / s);
  long terms = static_cast<long>(std::ceil(n)) + 16;
  return terms;
}

// Index floor keeping the tail expansions in their asymptotic regime
// (ϖ_N well past every physical rate).
inline long asymptotic_floor(double beta, double rate_scale) {
  return static_cast<long>(std::ceil(beta / (2.0 * M_PI) * 8.0 * rate_scale)) + 16;
}

// (1/β) Σ'_n Ω/(Ω² + a + ϖ_n² - Ω λ² φ̃(iϖ_n))  with Σ' weighting n=0 once and
// n>=1 twice. The counterterm a > 0 realizes the reorganization-augmented
// model (a = 2λ²ηΩ); a = 0 is the plain coordinate variance.
inline double variance_q_sum(double omega_s, double beta, const bath::DrudeBath& b,
                             double lambda, double counterterm, double tol) {
  const double lam2 = lambda * lambda;
  const double om2 = omega_s * omega_s;
  const double om_free = std::sqrt(om2 + counterterm);
  const double free_sum = omega_s / om_free * 0.5 * num::coth(0.5 * beta * om_free);
  if (b.eta == 0.0 || lam2 == 0.0) return free_sum;

  const auto phi = [&](double w) { return lam2 * bath::phi_tilde_imag_axis(b, w); };
  const auto delta_chi = [&](double w) {
    const double d0 = om2 + counterterm + w * w;
    const double d = d0 - omega_s * phi(w);
    return om2 * phi(w) / (d * d0);  // χ̃ - χ̃_free, decays as ϖ^-5
  };
  const double d_static = om2 + counterterm - omega_s * phi(0.0);
  if (!(d_static > 0.0))
    throw std::domain_error(
        "variance_q_sum: stability condition chi(0+) > 0 violated "
        "(omega_s - 2*lambda^2*eta = " +
        std::to_string((d_static - counterterm) / omega_s) + ")");

  const double c5 = 2.0 * lam2 * b.eta * b.gamma * om2;  // leading ϖ^-5 coefficient
  const double c6_bound = std::abs(c5) * 8.0 * std::max(b.gamma, om_free);
  const double step = 2.0 * M_PI / beta;
  const double tol_abs = tol * free_sum * beta / 2.0;  // tolerance on the bare n-sum
  const long n_terms = std::min<long>(
      std::max(choose_terms(c6_bound / std::pow(step, 6), tol_abs, 5),
               asymptotic_floor(beta, std::max({b.gamma, om_free, 2.0 * lam2 * b.eta}))),
      kTermCap);
  double sum = 0.0;
  for (long n = n_terms; n >= 1; --n) sum += delta_chi(step * static_cast<double>(n));
  sum += c5 / std::pow(step, 5) * num::zeta_tail(5, n_terms);
  const double achieved = c6_bound / std::pow(step, 6) / (5.0 * std::pow(n_terms, 5));
  if (achieved > tol_abs)
    throw num::ToleranceError("variance_q_sum: term cap reached", achieved * 2.0 / beta);
  return free_sum + (delta_chi(0.0) + 2.0 * sum) / beta;
}

inline double variance_p_sum(const ModelParams& p, double tol) {
  const double om = p.omega_s;
  const double om2 = om * om;
  const double lam2 = p.lambda * p.lambda;
  const double free_sum = 0.5 * num::coth(0.5 * p.beta * om);
  if (p.effective_eta() == 0.0) return free_sum;

  const auto phi = [&](double w) { return lam2 * bath::phi_tilde_imag_axis(p.bath, w); };
  const auto w2_delta_chi = [&](double w) {
    const double d0 = om2 + w * w;
    const double d = d0 - om * phi(w);
    return w * w * om2 * phi(w) / (d * d0);  // ϖ² (χ̃ - χ̃_free), decays as ϖ^-3
  };
  const double eta_g = p.bath.eta * p.bath.gamma;
  const double c3 = 2.0 * lam2 * eta_g * om2;
  const double c4 = -2.0 * lam2 * eta_g * p.bath.gamma * om2;
  const double c5_bound = std::abs(c3) * 8.0 * std::pow(std::max(p.bath.gamma, om), 2);
  const double step = 2.0 * M_PI / p.beta;
  const double tol_abs = tol * free_sum * p.beta * om2 / 2.0;
  const long n_terms = std::min<long>(
      std::max(choose_terms(c5_bound / std::pow(step, 5), tol_abs, 4),
               asymptotic_floor(p.beta,
                                std::max({p.bath.gamma, om, 2.0 * p.effective_eta()}))),
      kTermCap);
  double sum = 0.0;
  for (long n = n_terms; n >= 1; --n) sum += w2_delta_chi(step * static_cast<double>(n));
  sum += c3 / std::pow(step, 3) * num::zeta_tail(3, n_terms) +
         c4 / std::pow(step, 4) * num::zeta_tail(4, n_terms);
  const double achieved = c5_bound / std::pow(step, 5) / (4.0 * std::pow(n_terms, 4));
  if (achieved > tol_abs)
    throw num::ToleranceError("variance_p_sum: term cap reached",
                              achieved * 2.0 / (p.beta * om2));
  return free_sum - 2.0 * sum / (p.beta * om2);
}

}  // namespace detail

// Both variances with their derived quantities. Pure function; throws on
// stability violation (λ²η >= Ω/2) and when the term cap cannot reach tol.
inline EquilibriumState equilibrium_variances(const ModelParams& p, double tol = 1e-10) {
  EquilibriumState st;
  if (p.effective_eta() == 0.0) {
    // exact free limit: a bare thermal oscillator
    st.var_q = st.var_p = 0.5 * num::coth(0.5 * p.beta * p.omega_s);
    st.nu = st.var_q;
    st.omega_eff = p.omega_s;
    return st;
  }
  if (!(p.omega_s - 2.0 * p.effective_eta() > 0.0))
    throw std::domain_error(
        "equilibrium_variances: stability condition chi(0+) > 0 requires "
        "omega_s - 2*lambda^2*eta > 0 (got " +
        std::to_string(p.omega_s - 2.0 * p.effective_eta()) + ")");
  st.var_q = detail::variance_q_sum(p.omega_s, p.beta, p.bath, p.lambda, 0.0, tol);
  st.var_p = detail::variance_p_sum(p, tol);
  st.nu = std::sqrt(st.var_q * st.var_p);
  st.omega_eff = 2.0 / p.beta * num::arcoth(2.0 * st.nu);
  return st;
}

// Ω_eff(β) = (2/β) arcoth(2ν); equals Ω_S exactly at zero coupling.
inline double effective_frequency(const EquilibriumState& st, double beta) {
  if (!(st.nu > 0.5))
    throw std::domain_error("effective_frequency: requires nu > 1/2 (got " +
                            std::to_string(st.nu) + ")");
  return 2.0 / beta * num::arcoth(2.0 * st.nu);
}

// Single-mode Gaussian von Neumann entropy in k_B units:
//   (ν+1/2)ln(ν+1/2) - (ν-1/2)ln(ν-1/2), -> 0 as ν -> 1/2.
inline double entanglement_entropy_from_nu(double nu) {
  if (nu < 0.5 - 1e-9)
    throw std::domain_error("entanglement_entropy: nu below the uncertainty bound 1/2");
  const double d = nu - 0.5;
  if (d <= 0.0) return 0.0;
  return (nu + 0.5) * std::log(nu + 0.5) - d * std::log(d);
}

inline double entanglement_entropy(const EquilibriumState& st) {
  return entanglement_entropy_from_nu(st.nu);
}

}  // namespace qbo::equilibrium
