#pragma once

// dynamics.hpp — exact dissipative dynamics of the Brownian oscillator with a
// factorized initial condition (system Gaussian ⊗ bath thermal state).
//
// Mean values follow the local auxiliary-variable equations
//   q̄' = Ω p̄,  p̄' = -Ω q̄ - φ - Σθ_n,  φ' = -γφ - 2λ²ηγ q̄,  θ_n' = -ϖ_n θ_n,
// integrated adaptively (evolve_mean). Covariances use the Heisenberg
// solution q̂(t) = Ġ q̂₀ + ΩG p̂₀ - Ω∫G(t-s)F̂_E(s)ds: the homogeneous part
// propagates the initial covariance through (G, Ġ, G̈) and the noise part
//   Ω²∫₀ᵗ∫₀ᵗ G(t-u)G(t-v) ReC_E(u-v) du dv            (and Ġ analogues)
// is reduced to closed exponential forms per (characteristic root, bath
// correlation mode) pair, including the confluent combinations where a root
// polynomial or a root-mode collision appears. An independently constructed
// discretized-bath propagation (normal modes of the finite composite) serves
// as the verification oracle.

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <complex>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "qbo/bath.hpp"
#include "qbo/numerics.hpp"
#include "qbo/ode.hpp"
#include "qbo/response.hpp"

namespace qbo::dynamics {

using num::complex;
using response::ModelParams;

struct GaussianState {
  double q_mean{0.0};
  double p_mean{0.0};
  double sigma_qq{0.5};
  double sigma_pp{0.5};
  double sigma_qp{0.0};  // symmetrized (1/2)<{q,p}>
};

// Bare thermal covariance of the system oscillator at inverse temperature beta.
inline GaussianState thermal_state(double beta, double omega_s) {
  const double c = 0.5 * num::coth(0.5 * beta * omega_s);
  return {0.0, 0.0, c, c, 0.0};
}

struct MeanState {
  double q_mean{0.0};
  double p_mean{0.0};
  double phi{0.0};                // Drude memory auxiliary
  std::vector<double> theta{};    // Matsubara auxiliaries (decoupled decays)
};

struct MeanTrajectory {
  std::vector<double> t;
  std::vector<MeanState> states;
  bool diverged{false};
  double divergence_time{0.0};
};

struct MeanOptions {
  double tol{1e-10};
  double guard{1e12};
};

inline MeanTrajectory evolve_mean(const MeanState& initial, const ModelParams& p,
                                  std::span<const double> t_grid,
                                  const MeanOptions& opt = {}) {
  if (t_grid.empty() || t_grid.front() < 0.0)
    throw std::invalid_argument("evolve_mean: time grid must start at t >= 0");
  const std::size_t n_theta = initial.theta.size();
  const Eigen::Index dim = 3 + static_cast<Eigen::Index>(n_theta);
  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(dim, dim);
  a(0, 1) = p.omega_s;
  a(1, 0) = -p.omega_s;
  a(1, 2) = -1.0;
  a(2, 0) = -2.0 * p.effective_eta() * p.bath.gamma;
  a(2, 2) = -p.bath.gamma;
  for (std::size_t n = 0; n < n_theta; ++n) {
    a(1, 3 + static_cast<Eigen::Index>(n)) = -1.0;
    a(3 + static_cast<Eigen::Index>(n), 3 + static_cast<Eigen::Index>(n)) =
        -2.0 * M_PI * static_cast<double>(n + 1) / p.beta;
  }
  Eigen::VectorXd y(dim);
  y[0] = initial.q_mean;
  y[1] = initial.p_mean;
  y[2] = initial.phi;
  for (std::size_t n = 0; n < n_theta; ++n) y[3 + static_cast<Eigen::Index>(n)] = initial.theta[n];

  MeanTrajectory traj;
  traj.t.reserve(t_grid.size());
  traj.states.reserve(t_grid.size());
  const auto report = ode::integrate_lti(
      a, y, t_grid, opt.tol, opt.guard, [&](std::size_t, double t, const Eigen::VectorXd& v) {
        MeanState st;
        st.q_mean = v[0];
        st.p_mean = v[1];
        st.phi = v[2];
        st.theta.resize(n_theta);
        for (std::size_t n = 0; n < n_theta; ++n) st.theta[n] = v[3 + static_cast<Eigen::Index>(n)];
        traj.t.push_back(t);
        traj.states.push_back(std::move(st));
      });
  traj.diverged = report.diverged;
  traj.divergence_time = report.divergence_time;
  return traj;
}

struct CovarianceTrajectory {
  std::vector<double> t;
  std::vector<GaussianState> states;
  bool diverged{false};
  double divergence_time{0.0};
  bool precision_warning{false};  // mode cap or confluent-pair precision loss
  int n_modes_used{0};
};

struct CovarianceOptions {
  int n_modes{0};        // Matsubara mode count; <= 0 selects by tail doubling
  double tail_tol{1e-6};  // doubling target on sigma_qq(t_max)
  double guard{1e12};
};

namespace detail {

// Closed-form machinery for the noise double integrals
//   Σ_k a_k ∫₀ᵗdu u^{m₁} e^{(s_i-ν_k)u} ∫₀ᵘdv v^{m₂} e^{(s_j+ν_k)v}
// assembled over ordered root-group pairs with residue-polynomial weights.
class CovarianceEngine {
 public:
  CovarianceEngine(const ModelParams& p, int n_modes)
      : prop_(p), omega_s_(p.omega_s) {
    const bath::DrudeBath eff(p.effective_eta(), p.bath.gamma);
    const auto expansion = bath::correlation_modes(eff, p.beta, n_modes);
    n_modes_ = static_cast<int>(expansion.modes.size());
    amp_.reserve(expansion.modes.size());
    rate_.reserve(expansion.modes.size());
    for (const auto& m : expansion.modes) {
      amp_.push_back(m.amplitude.real());  // symmetrized kernel uses Re C only
      rate_.push_back(m.rate);
    }
    const auto groups = prop_.groups();
    n_groups_ = static_cast<int>(groups.size());
    double root_scale = 1.0;
    for (const auto& g : groups) root_scale = std::max(root_scale, std::abs(g.s));
    confluence_tol_ = 1e-6 * std::max({root_scale, p.bath.gamma, 1.0});
    for (int i = 0; i < n_groups_; ++i) {
      const auto& g = groups[static_cast<std::size_t>(i)];
      s_[i] = g.s;
      deg_[i] = g.multiplicity - 1;
      for (int m = 0; m <= deg_[i]; ++m) {
        slot_q_[i][m] = omega_s_ * g.poly_g[static_cast<std::size_t>(m)];
        slot_p_[i][m] = g.poly_gdot[static_cast<std::size_t>(m)];
      }
    }
    // flag root-mode collisions for the exact path
    exact_mode_.assign(amp_.size(), false);
    for (std::size_t k = 0; k < amp_.size(); ++k)
      for (int i = 0; i < n_groups_; ++i)
        if (std::abs(s_[i] - rate_[k]) < confluence_tol_ ||
            std::abs(s_[i] + rate_[k]) < confluence_tol_)
          exact_mode_[k] = true;
    precompute_scalars();
  }

  int n_modes() const { return n_modes_; }
  const response::Propagator& propagator() const { return prop_; }

  // Noise contributions (already carrying their Ω factors) at time t.
  // Times must be requested in non-increasing order between reset() calls.
  struct NoiseMoments {
    double qq, qp, pp;
  };

  void reset(double t_largest) {
    cut_ = cut_index(t_largest);
    for (auto& s : suffix_) s = complex(0.0, 0.0);
    for (std::size_t k = amp_.size(); k-- > static_cast<std::size_t>(cut_);)
      if (!exact_mode_[k]) add_suffix_term(k, 1.0);
    last_t_ = std::numeric_limits<double>::infinity();
  }

  NoiseMoments noise(double t) {
    if (t > last_t_)
      throw std::logic_error("CovarianceEngine: times must be processed in descending order");
    last_t_ = t;
    if (t == 0.0) return {0.0, 0.0, 0.0};
    const long new_cut = cut_index(t);
    while (cut_ < new_cut) {
      if (!exact_mode_[static_cast<std::size_t>(cut_)])
        add_suffix_term(static_cast<std::size_t>(cut_), -1.0);
      ++cut_;
    }
    complex kqq(0.0), kqp(0.0), kpp(0.0);
    // bucket values V(i,j,m1,m2) = Σ_k a_k I^<(m1,m2;i,j;t)
    for (int i = 0; i < n_groups_; ++i) {
      for (int j = 0; j < n_groups_; ++j) {
        const complex sij = s_[i] + s_[j];
        for (int m1 = 0; m1 <= deg_[i]; ++m1) {
          for (int m2 = 0; m2 <= deg_[j]; ++m2) {
            complex v(0.0, 0.0);
            // (a) Σ_r P_r e_{m1+r}(s_ij, t)
            for (int r = 0; r <= m2; ++r)
              v += p_scalar_[static_cast<std::size_t>(scalar_index(j, m2, r))] *
                   num::exp_moment(sij, t, m1 + r);
            // (b) suffix (large-k) constant part of -κ₀ e_{m1}(s_i-ν_k, t)
            v += suffix_[static_cast<std::size_t>(pair_index(i, j, m1, m2))];
            // (c) direct small-k part of -κ₀ e_{m1}(s_i-ν_k, t)
            for (long k = 0; k < cut_; ++k) {
              const std::size_t ku = static_cast<std::size_t>(k);
              if (exact_mode_[ku]) continue;
              const complex kappa0 = kappa0_coeff(j, m2, rate_[ku]);
              v -= amp_[ku] * kappa0 * num::exp_moment(s_[i] - rate_[ku], t, m1);
            }
            // (d) root-mode collisions, exact ordered integral
            for (std::size_t ku = 0; ku < amp_.size(); ++ku)
              if (exact_mode_[ku])
                v += amp_[ku] * exact_ordered_integral(m1, m2, s_[i] - rate_[ku],
                                                       s_[j] + rate_[ku], t);
            const complex wqq = 2.0 * slot_q_[i][m1] * slot_q_[j][m2];
            const complex wqp =
                slot_q_[i][m1] * slot_p_[j][m2] + slot_p_[i][m1] * slot_q_[j][m2];
            const complex wpp = 2.0 * slot_p_[i][m1] * slot_p_[j][m2];
            kqq += wqq * v;
            kqp += wqp * v;
            kpp += wpp * v;
          }
        }
      }
    }
    return {kqq.real(), kqp.real(), kpp.real()};
  }

 private:
  static int scalar_index(int j, int m2, int r) { return (j * 3 + m2) * 3 + r; }
  static int pair_index(int i, int j, int m1, int m2) { return ((i * 3 + j) * 3 + m1) * 3 + m2; }

  // κ_r(ν) = (-1)^{m2-r} (m2!/r!) / (s_j+ν)^{m2-r+1}
  complex kappa_coeff(int j, int m2, int r, double nu) const {
    const complex base = s_[j] + nu;
    complex pw = base;
    for (int q = 0; q < m2 - r; ++q) pw *= base;
    double fact = 1.0;
    for (int q = r + 1; q <= m2; ++q) fact *= q;
    const double sign = ((m2 - r) % 2 == 0) ? 1.0 : -1.0;
    return sign * fact / pw;
  }
  complex kappa0_coeff(int j, int m2, double nu) const { return kappa_coeff(j, m2, 0, nu); }

  // (-1)^{m1} m1! / (s_i-ν)^{m1+1}  — the t→∞ constant of e_{m1}(s_i-ν, t)
  complex rho_const(int i, int m1, double nu) const {
    const complex base = s_[i] - nu;
    complex pw = base;
    for (int q = 0; q < m1; ++q) pw *= base;
    double fact = 1.0;
    for (int q = 2; q <= m1; ++q) fact *= q;
    const double sign = (m1 % 2 == 0) ? 1.0 : -1.0;
    return sign * fact / pw;
  }

  void add_suffix_term(std::size_t k, double direction) {
    for (int i = 0; i < n_groups_; ++i)
      for (int j = 0; j < n_groups_; ++j)
        for (int m1 = 0; m1 <= deg_[i]; ++m1)
          for (int m2 = 0; m2 <= deg_[j]; ++m2)
            suffix_[static_cast<std::size_t>(pair_index(i, j, m1, m2))] +=
                direction * amp_[k] * kappa0_coeff(j, m2, rate_[k]) *
                rho_const(i, m1, rate_[k]);
  }

  void precompute_scalars() {
    for (auto& s : p_scalar_) s = complex(0.0, 0.0);
    for (std::size_t k = 0; k < amp_.size(); ++k) {
      if (exact_mode_[k]) continue;
      for (int j = 0; j < n_groups_; ++j)
        for (int m2 = 0; m2 <= deg_[j]; ++m2)
          for (int r = 0; r <= m2; ++r)
            p_scalar_[static_cast<std::size_t>(scalar_index(j, m2, r))] +=
                amp_[k] * kappa_coeff(j, m2, r, rate_[k]);
    }
  }

  // exponentials e^{-(ν-Re s)t} below e^{-45} are dropped
  long cut_index(double t) const {
    if (t <= 0.0) return static_cast<long>(amp_.size());
    double s_max = 0.0;
    for (int i = 0; i < n_groups_; ++i) s_max = std::max(s_max, s_[i].real());
    const double nu_split = 45.0 / t + s_max;
    long cut = 0;
    while (cut < static_cast<long>(amp_.size()) &&
           rate_[static_cast<std::size_t>(cut)] <= nu_split)
      ++cut;
    return cut;
  }

  // ∫₀ᵗ du u^{m1} e^{αu} ∫₀ᵘ dv v^{m2} e^{βv}, stable in every regime
  static complex exact_ordered_integral(int m1, int m2, complex alpha, complex beta,
                                        double t) {
    if (std::abs(beta) * std::max(t, 1.0) < 0.5) {
      // expand the inner integral in powers of β
      complex sum(0.0, 0.0);
      complex bpow(1.0, 0.0);
      double lfact = 1.0;
      for (int l = 0; l < 24; ++l) {
        const complex add =
            bpow / (lfact * static_cast<double>(m2 + l + 1)) *
            num::exp_moment(alpha, t, m1 + m2 + l + 1);
        sum += add;
        if (std::abs(add) < 1e-18 * std::abs(sum) && l > 2) break;
        bpow *= beta;
        lfact *= static_cast<double>(l + 1);
      }
      return sum;
    }
    complex result(0.0, 0.0);
    double fact = 1.0;  // m2!/r! built downward
    for (int q = 2; q <= m2; ++q) fact *= q;  // start at r=0 value m2!
    // iterate r = 0..m2 rebuilding factorial m2!/r!
    for (int r = 0; r <= m2; ++r) {
      double f = 1.0;
      for (int q = r + 1; q <= m2; ++q) f *= q;
      const double sign = ((m2 - r) % 2 == 0) ? 1.0 : -1.0;
      complex pw = beta;
      for (int q = 0; q < m2 - r; ++q) pw *= beta;
      result += sign * f / pw * num::exp_moment(alpha + beta, t, m1 + r);
    }
    double m2fact = 1.0;
    for (int q = 2; q <= m2; ++q) m2fact *= q;
    const double sign0 = (m2 % 2 == 0) ? 1.0 : -1.0;
    complex pw0 = beta;
    for (int q = 0; q < m2; ++q) pw0 *= beta;
    result -= sign0 * m2fact / pw0 * num::exp_moment(alpha, t, m1);
    return result;
  }

  response::Propagator prop_;
  double omega_s_;
  int n_groups_{0};
  int n_modes_{0};
  std::array<complex, 3> s_{};
  std::array<int, 3> deg_{};
  std::array<std::array<complex, 3>, 3> slot_q_{};
  std::array<std::array<complex, 3>, 3> slot_p_{};
  std::vector<double> amp_;
  std::vector<double> rate_;
  std::vector<bool> exact_mode_;
  std::array<complex, 27> p_scalar_{};
  std::array<complex, 81> suffix_{};
  long cut_{0};
  double last_t_{std::numeric_limits<double>::infinity()};
};

inline GaussianState assemble_state(const response::Propagator& prop,
                                    const GaussianState& init, double omega_s, double t,
                                    const CovarianceEngine::NoiseMoments& noise) {
  const auto g = prop(t);
  const double a = g.gdot;
  const double b = omega_s * g.g;
  const double c = g.gddot / omega_s;
  const double d = g.gdot;
  GaussianState st;
  st.q_mean = a * init.q_mean + b * init.p_mean;
  st.p_mean = c * init.q_mean + d * init.p_mean;
  st.sigma_qq = a * a * init.sigma_qq + b * b * init.sigma_pp + 2.0 * a * b * init.sigma_qp +
                noise.qq;
  st.sigma_pp = c * c * init.sigma_qq + d * d * init.sigma_pp + 2.0 * c * d * init.sigma_qp +
                noise.pp;
  st.sigma_qp = a * c * init.sigma_qq + b * d * init.sigma_pp +
                (a * d + b * c) * init.sigma_qp + noise.qp;
  return st;
}

}  // namespace detail

// Exact covariance trajectory. Mode count: explicit when n_modes > 0, else
// doubled until the σ_qq(t_max) change falls below tail_tol. Stops with a
// divergence flag once any moment exceeds guard.
inline CovarianceTrajectory evolve_covariance(const GaussianState& initial,
                                              const ModelParams& p,
                                              std::span<const double> t_grid,
                                              const CovarianceOptions& opt = {}) {
  if (t_grid.empty() || t_grid.front() < 0.0)
    throw std::invalid_argument("evolve_covariance: time grid must start at t >= 0");
  for (std::size_t i = 1; i < t_grid.size(); ++i)
    if (!(t_grid[i] > t_grid[i - 1]))
      throw std::invalid_argument("evolve_covariance: time grid must be strictly increasing");
  if (!(initial.sigma_qq > 0.0) || !(initial.sigma_pp > 0.0))
    throw std::invalid_argument("evolve_covariance: initial variances must be positive");

  double t_min_pos = 0.0;
  for (double t : t_grid)
    if (t > 0.0) { t_min_pos = t; break; }
  const double beta_step = 2.0 * M_PI / p.beta;
  long k_floor = 256;
  if (t_min_pos > 0.0)
    k_floor = std::max<long>(k_floor,
                             static_cast<long>(std::ceil(45.0 / (beta_step * t_min_pos))) + 2);
  constexpr long kModeCap = 1L << 19;

  bool warn = false;
  int n_modes = opt.n_modes;
  const double t_max = t_grid.back();
  if (n_modes <= 0) {
    long k = std::min(std::max<long>(1024, k_floor), kModeCap);
    const auto probe = [&](long modes) {
      detail::CovarianceEngine eng(p, static_cast<int>(modes));
      eng.reset(t_max);
      const auto nz = eng.noise(t_max);
      return detail::assemble_state(eng.propagator(), initial, p.omega_s, t_max, nz).sigma_qq;
    };
    double prev = probe(k);
    while (true) {
      if (2 * k > kModeCap) {
        warn = true;
        break;
      }
      const double next = probe(2 * k);
      const double change = std::abs(next - prev);
      if (std::isfinite(change) &&
          change < opt.tail_tol * std::max(1.0, std::abs(next))) {
        k *= 2;
        break;
      }
      if (!std::isfinite(change)) {  // divergent parameters: mode tail is irrelevant
        k *= 2;
        break;
      }
      k *= 2;
      prev = next;
    }
    n_modes = static_cast<int>(k);
  } else {
    n_modes = static_cast<int>(std::min<long>(n_modes, kModeCap));
  }

  detail::CovarianceEngine engine(p, n_modes);
  CovarianceTrajectory traj;
  traj.n_modes_used = engine.n_modes();
  traj.precision_warning = warn || engine.propagator().confluent();

  std::vector<GaussianState> states(t_grid.size());
  engine.reset(t_max);
  for (std::size_t idx = t_grid.size(); idx-- > 0;) {
    const double t = t_grid[idx];
    const auto nz = engine.noise(t);
    states[idx] = detail::assemble_state(engine.propagator(), initial, p.omega_s, t, nz);
  }
  for (std::size_t idx = 0; idx < t_grid.size(); ++idx) {
    const auto& st = states[idx];
    const double biggest =
        std::max({std::abs(st.q_mean), std::abs(st.p_mean), std::abs(st.sigma_qq),
                  std::abs(st.sigma_pp), std::abs(st.sigma_qp)});
    if (!(biggest <= opt.guard)) {
      traj.diverged = true;
      traj.divergence_time = t_grid[idx];
      break;
    }
    traj.t.push_back(t_grid[idx]);
    traj.states.push_back(st);
  }
  return traj;
}

// Independent verification path: the bath is sampled as m_modes discrete
// oscillators from J(ω) on (0, omega_max], the composite quadratic form is
// diagonalized once, and the full covariance is propagated exactly through
// the normal modes; the system block is returned. Finite-size recurrences
// appear beyond t ≈ 2π m_modes/omega_max by construction.
inline CovarianceTrajectory discretized_bath_oracle(const GaussianState& initial,
                                                    const ModelParams& p,
                                                    std::span<const double> t_grid,
                                                    int m_modes, double omega_max) {
  if (m_modes < 1) throw std::invalid_argument("discretized_bath_oracle: m_modes must be >= 1");
  if (!(omega_max > 0.0))
    throw std::invalid_argument("discretized_bath_oracle: omega_max must be > 0");
  const double om = p.omega_s;
  const int n = m_modes + 1;
  const double dw = omega_max / m_modes;
  const bath::DrudeBath eff(p.effective_eta(), p.bath.gamma);

  Eigen::MatrixXd kmat = Eigen::MatrixXd::Zero(n, n);
  kmat(0, 0) = om * om;
  std::vector<double> omega_j(static_cast<std::size_t>(m_modes)), coupling(
      static_cast<std::size_t>(m_modes));
  for (int j = 0; j < m_modes; ++j) {
    const double w = (j + 0.5) * dw;
    omega_j[static_cast<std::size_t>(j)] = w;
    const double c2 = 2.0 / M_PI * bath::spectral_density(eff, w) * dw;
    coupling[static_cast<std::size_t>(j)] = std::sqrt(c2);
    kmat(0, j + 1) = kmat(j + 1, 0) = coupling[static_cast<std::size_t>(j)] * std::sqrt(om * w);
    kmat(j + 1, j + 1) = w * w;
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(kmat);
  const Eigen::MatrixXd& v = solver.eigenvectors();
  const Eigen::VectorXd& lam = solver.eigenvalues();

  // initial covariance diagonals in mass-weighted coordinates z = (q/√Ω, x_j/√ω_j)
  Eigen::VectorXd czz(n), cdd(n), czd(n);
  czz[0] = initial.sigma_qq / om;
  cdd[0] = om * initial.sigma_pp;
  czd[0] = initial.sigma_qp;
  for (int j = 0; j < m_modes; ++j) {
    const double w = omega_j[static_cast<std::size_t>(j)];
    const double th = 0.5 * num::coth(0.5 * p.beta * w);
    czz[j + 1] = th / w;
    cdd[j + 1] = th * w;
    czd[j + 1] = 0.0;
  }
  const Eigen::VectorXd v0 = v.row(0).transpose();

  CovarianceTrajectory traj;
  traj.n_modes_used = m_modes;
  for (double t : t_grid) {
    Eigen::VectorXd ck(n), sk(n), dck(n), dsk(n);
    for (int k = 0; k < n; ++k) {
      const double l = lam[k];
      if (std::abs(l) * t * t < 1e-12) {
        ck[k] = 1.0 - 0.5 * l * t * t;
        sk[k] = t * (1.0 - l * t * t / 6.0);
        dck[k] = -l * sk[k];
        dsk[k] = ck[k];
      } else if (l > 0.0) {
        const double mu = std::sqrt(l);
        ck[k] = std::cos(mu * t);
        sk[k] = std::sin(mu * t) / mu;
        dck[k] = -mu * std::sin(mu * t);
        dsk[k] = ck[k];
      } else {
        const double mu = std::sqrt(-l);
        ck[k] = std::cosh(mu * t);
        sk[k] = std::sinh(mu * t) / mu;
        dck[k] = mu * std::sinh(mu * t);
        dsk[k] = ck[k];
      }
    }
    const Eigen::VectorXd alpha = v * ck.cwiseProduct(v0);
    const Eigen::VectorXd bvec = v * sk.cwiseProduct(v0);
    const Eigen::VectorXd alpha_d = v * dck.cwiseProduct(v0);
    const Eigen::VectorXd bvec_d = v * dsk.cwiseProduct(v0);

    GaussianState st;
    const double z0 = initial.q_mean / std::sqrt(om);
    const double zd0 = std::sqrt(om) * initial.p_mean;
    st.q_mean = std::sqrt(om) * (alpha[0] * z0 + bvec[0] * zd0);
    st.p_mean = (alpha_d[0] * z0 + bvec_d[0] * zd0) / std::sqrt(om);
    double var_z = 0.0, var_zd = 0.0, cov_zzd = 0.0;
    for (int i = 0; i < n; ++i) {
      var_z += alpha[i] * alpha[i] * czz[i] + bvec[i] * bvec[i] * cdd[i] +
               2.0 * alpha[i] * bvec[i] * czd[i];
      var_zd += alpha_d[i] * alpha_d[i] * czz[i] + bvec_d[i] * bvec_d[i] * cdd[i] +
                2.0 * alpha_d[i] * bvec_d[i] * czd[i];
      cov_zzd += alpha[i] * alpha_d[i] * czz[i] + bvec[i] * bvec_d[i] * cdd[i] +
                 (alpha[i] * bvec_d[i] + alpha_d[i] * bvec[i]) * czd[i];
    }
    st.sigma_qq = om * var_z;
    st.sigma_pp = var_zd / om;
    st.sigma_qp = cov_zzd;
    traj.t.push_back(t);
    traj.states.push_back(st);
  }
  return traj;
}

}  // namespace qbo::dynamics
