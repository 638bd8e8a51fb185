#pragma once

// stability.hpp — Routh-Hurwitz classification of the characteristic cubic
// and the static-response criterion χ̃(0+) > 0. For the Drude model both
// tests reduce to Ω_S - 2λ²η > 0 together with η > 0; the Routh array is
// nevertheless implemented for general degree so the cubic is just a client.

#include <cmath>
#include <limits>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "qbo/numerics.hpp"
#include "qbo/response.hpp"

namespace qbo::stability {

using response::ModelParams;

enum class Classification { Stable, Critical, Unstable };

inline const char* to_string(Classification c) {
  switch (c) {
    case Classification::Stable: return "Stable";
    case Classification::Critical: return "Critical";
    case Classification::Unstable: return "Unstable";
  }
  return "?";
}

struct RouthResult {
  bool pass{false};       // all first-column entries strictly positive
  bool marginal{false};   // zero pivot or zero row encountered
  bool zero_row{false};   // a full zero row was replaced by the auxiliary-polynomial derivative
  std::vector<double> first_column;
};

// Routh array for a real polynomial in descending degree order. Isolated zero
// pivots are continued with the epsilon substitution (and flagged marginal);
// a vanishing row is replaced by the derivative of its auxiliary polynomial,
// which marks symmetric root pairs (also marginal).
inline RouthResult routh_hurwitz(std::span<const double> coeffs) {
  if (coeffs.size() < 2) throw std::invalid_argument("routh_hurwitz: degree must be >= 1");
  if (coeffs[0] == 0.0) throw std::invalid_argument("routh_hurwitz: leading coefficient is zero");

  std::vector<double> poly(coeffs.begin(), coeffs.end());
  if (poly[0] < 0.0)
    for (auto& c : poly) c = -c;  // normalize leading coefficient positive

  double scale = 0.0;
  for (double c : poly) scale = std::max(scale, std::abs(c));
  const double tiny = 1e-14 * scale;

  const std::size_t n = poly.size();          // n-1 = degree
  const std::size_t width = (n + 1) / 2;
  std::vector<double> prev(width, 0.0), curr(width, 0.0);
  for (std::size_t j = 0; j < width; ++j) {
    prev[j] = poly[2 * j];
    if (2 * j + 1 < n) curr[j] = poly[2 * j + 1];
  }

  RouthResult res;
  res.first_column.push_back(prev[0]);

  // degree of the polynomial represented by `curr` (top of the remaining array)
  std::size_t rows_left = n - 1;  // rows below the first
  while (rows_left > 0) {
    bool all_zero = true;
    for (double v : curr)
      if (std::abs(v) > tiny) { all_zero = false; break; }
    if (all_zero) {
      // auxiliary polynomial lives in `prev` with degree rows_left; replace the
      // zero row by its derivative
      res.marginal = true;
      res.zero_row = true;
      const std::size_t aux_degree = rows_left;
      for (std::size_t j = 0; j < width; ++j) {
        const double power = static_cast<double>(aux_degree) - 2.0 * static_cast<double>(j);
        curr[j] = (power > 0.0) ? prev[j] * power : 0.0;
      }
    }
    double pivot = curr[0];
    if (std::abs(pivot) <= tiny) {
      // epsilon substitution for an isolated zero pivot
      res.marginal = true;
      pivot = (pivot >= 0.0 ? 1.0 : -1.0) * std::max(tiny, 1e-30);
      curr[0] = pivot;
    }
    res.first_column.push_back(curr[0]);
    std::vector<double> next(width, 0.0);
    for (std::size_t j = 0; j + 1 < width; ++j)
      next[j] = (pivot * prev[j + 1] - prev[0] * curr[j + 1]) / pivot;
    prev = curr;
    curr = next;
    --rows_left;
  }

  res.pass = !res.marginal;
  for (double v : res.first_column)
    if (!(v > tiny)) res.pass = false;
  return res;
}

struct StabilityReport {
  Classification classification{Classification::Critical};
  double chi_static{};           // χ̃(0+) = 1/(Ω - 2λ²η) when finite
  bool chi_static_finite{true};
  bool hurwitz_pass{false};
  std::vector<double> routh_first_column;
  double max_real_root{};
  response::CubicRoots roots;
};

// Classifies a parameter point. Critical band: |Ω - 2λ²η| < tol·Ω or
// λ²η < tol·Ω (the undamped η = 0 line is marginal, not strictly stable).
inline StabilityReport classify(const ModelParams& p, double tol = 1e-9) {
  StabilityReport rep;
  const double eta_eff = p.effective_eta();
  const double margin = p.omega_s - 2.0 * eta_eff;

  rep.chi_static_finite = std::abs(margin) > 1e-300;
  rep.chi_static = rep.chi_static_finite ? 1.0 / margin
                                         : std::numeric_limits<double>::infinity();

  const auto coeffs = response::characteristic_coefficients(p);
  const auto routh = routh_hurwitz(coeffs);
  rep.hurwitz_pass = routh.pass;
  rep.routh_first_column = routh.first_column;

  rep.roots = response::characteristic_roots(p);
  rep.max_real_root = rep.roots.roots[0].real();
  for (const auto& r : rep.roots.roots) rep.max_real_root = std::max(rep.max_real_root, r.real());

  const double band = tol * p.omega_s;
  if (std::abs(margin) < band || eta_eff < band) {
    rep.classification = Classification::Critical;
  } else if (margin > 0.0) {
    rep.classification = Classification::Stable;
  } else {
    rep.classification = Classification::Unstable;
  }

  // the χ̃(0+) criterion and the Hurwitz criterion must agree off the band
  if (rep.classification != Classification::Critical) {
    const bool chi_stable = margin > 0.0 && eta_eff > 0.0;
    if (chi_stable != rep.hurwitz_pass)
      throw std::logic_error(
          "classify: chi(0+) and Routh-Hurwitz criteria disagree outside the critical band "
          "(eta_eff = " + std::to_string(eta_eff) + ", margin = " + std::to_string(margin) + ")");
  }
  return rep;
}

}  // namespace qbo::stability
