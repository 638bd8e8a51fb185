#pragma once

// ode.hpp — adaptive TR-BDF2 for linear constant-coefficient systems
// y' = A y. One-step, L-stable, so the Matsubara decay rates in the mean-value
// equations impose no step restriction. Both implicit stages share the matrix
// (I - (1-1/sqrt(2)) h A); its LU factorization is cached per step size. The
// local error is estimated by step doubling (order 2, Richardson factor 3).

#include <Eigen/Dense>
#include <cmath>
#include <span>
#include <stdexcept>
#include <string>

#include "qbo/numerics.hpp"

namespace qbo::ode {

struct IntegrationReport {
  bool diverged{false};
  double divergence_time{0.0};
};

namespace detail {

class TrBdf2Stepper {
 public:
  explicit TrBdf2Stepper(const Eigen::MatrixXd& a) : a_(a), h_cached_(-1.0) {}

  // one TR-BDF2 step of size h from y
  Eigen::VectorXd step(const Eigen::VectorXd& y, double h) {
    if (h != h_cached_) {
      const double d = 1.0 - 1.0 / std::sqrt(2.0);
      Eigen::MatrixXd m =
          Eigen::MatrixXd::Identity(a_.rows(), a_.cols()) - (d * h) * a_;
      lu_.compute(m);
      h_cached_ = h;
    }
    const double d = 1.0 - 1.0 / std::sqrt(2.0);
    const Eigen::VectorXd y_mid = lu_.solve(y + (d * h) * (a_ * y));
    const double c1 = 0.5 * (std::sqrt(2.0) + 1.0);   // 1/(gamma(2-gamma))
    const double c2 = 0.5 * (std::sqrt(2.0) - 1.0);   // (1-gamma)^2/(gamma(2-gamma))
    return lu_.solve(c1 * y_mid - c2 * y);
  }

 private:
  const Eigen::MatrixXd& a_;
  Eigen::PartialPivLU<Eigen::MatrixXd> lu_;
  double h_cached_;
};

}  // namespace detail

// Integrates y' = A y from t_grid.front() through t_grid.back(), invoking
// sink(index, t, y) at every grid time. Steps are clipped to grid times.
// Stops early (diverged report) once any |y_i| exceeds guard.
template <typename Sink>
inline IntegrationReport integrate_lti(const Eigen::MatrixXd& a, Eigen::VectorXd y,
                                       std::span<const double> t_grid, double tol,
                                       double guard, Sink&& sink) {
  if (a.rows() != a.cols() || a.rows() != y.size())
    throw std::invalid_argument("integrate_lti: dimension mismatch");
  if (t_grid.empty()) throw std::invalid_argument("integrate_lti: empty time grid");
  for (std::size_t i = 1; i < t_grid.size(); ++i)
    if (!(t_grid[i] > t_grid[i - 1]))
      throw std::invalid_argument("integrate_lti: time grid must be strictly increasing");

  detail::TrBdf2Stepper full(a), half(a);
  double t = t_grid.front();
  std::size_t next = 0;
  sink(next, t, y);
  ++next;
  if (next >= t_grid.size()) return {};

  const double span = t_grid.back() - t_grid.front();
  const double a_norm = a.cwiseAbs().rowwise().sum().maxCoeff();
  double h = std::min(span / 64.0, (a_norm > 0.0 ? 0.1 / a_norm : span / 64.0));
  const double h_min = 1e-14 * std::max(span, 1.0);

  while (next < t_grid.size()) {
    const double h_try = std::min(h, t_grid[next] - t);
    const Eigen::VectorXd y_full = full.step(y, h_try);
    const Eigen::VectorXd y_half = half.step(half.step(y, 0.5 * h_try), 0.5 * h_try);
    double err = 0.0;
    for (Eigen::Index i = 0; i < y.size(); ++i) {
      const double scale = tol + tol * std::max(std::abs(y_full[i]), std::abs(y_half[i]));
      err = std::max(err, std::abs(y_full[i] - y_half[i]) / (3.0 * scale));
    }
    if (err <= 1.0) {
      t += h_try;
      y = y_half;
      if (y.cwiseAbs().maxCoeff() > guard) {
        return {true, t};
      }
      if (t >= t_grid[next] - 1e-12 * std::max(1.0, std::abs(t))) {
        sink(next, t_grid[next], y);
        ++next;
      }
    } else if (h_try <= h_min) {
      throw num::ToleranceError(
          "integrate_lti: step-size collapse at t = " + std::to_string(t), err * tol);
    }
    const double factor = (err > 0.0) ? 0.9 * std::pow(err, -1.0 / 3.0) : 5.0;
    h = std::max(h * std::clamp(factor, 0.2, 5.0), h_min);
  }
  return {};
}

}  // namespace qbo::ode
