#pragma once

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "fewbose/errors.hpp"
#include "fewbose/special.hpp"
#include "fewbose/units.hpp"

namespace fewbose {

// Two-body sector of the two-channel model at fixed detuning nu.
//
// The inverse scattering amplitude at energy E = -q^2 (hbar = m = 1) is
//   1/f(E) = q erfc(q b) - exp(-q^2 b^2) B(E)/a_bg,
//   B(E)   = 1 - W/(E - nu + W),        W = delta_mu * DeltaB.
// Dimers are the roots of 1/f. Numerics work with the scaled form
//   G(E) = exp(q^2 b^2)/f(E) = q erfcx(q b) - B(E)/a_bg,
// which stays finite for deeply bound states and shares the roots of 1/f
// (away from the bare-molecule pole E = nu - W).

// Closed-channel bracket B(E).
inline double closed_fraction_bracket(const Model& m, double E, double nu) {
  const double denom = E - nu + m.W;
  if (denom == 0.0) throw ChannelPole(m.label + ": E = nu - W");
  return 1.0 - m.W / denom;
}

// Scaled inverse amplitude G(E); requires E <= 0.
inline double scaled_inverse_f(const Model& m, double E, double nu) {
  const double q = std::sqrt(-E);
  return q * erfcx(q * m.b) - closed_fraction_bracket(m, E, nu) / m.a_bg;
}

inline double inverse_f(const Model& m, double E, double nu) {
  return std::exp(E * m.b * m.b) * scaled_inverse_f(m, E, nu);
}

// dG/dE at fixed nu.
inline double scaled_inverse_f_dE(const Model& m, double E, double nu) {
  const double q = std::sqrt(-E);
  const double b = m.b;
  const double denom = E - nu + m.W;
  const double kernel =
      erfcx(q * b) * (1.0 + 2.0 * q * q * b * b) - 2.0 * q * b / detail::kSqrtPi;
  return -kernel / (2.0 * q) - m.W / (denom * denom * m.a_bg);
}

// Derivative of the open-channel loop integral J(E):
// J'(E) = (1/(8 pi q)) [erfcx(qb)(1+2q^2b^2) - 2qb/sqrt(pi)], E = -q^2.
inline double loop_integral_dE(const Model& m, double E) {
  const double q = std::sqrt(-E);
  const double b = m.b;
  const double kernel =
      erfcx(q * b) * (1.0 + 2.0 * q * q * b * b) - 2.0 * q * b / detail::kSqrtPi;
  return kernel / (8.0 * detail::kPi * q);
}

// Closed-channel population of a dimer at energy E < 0, from the norm of the
// two components of the bound state. Equals dE/dnu by the Hellmann-Feynman
// theorem; tests verify that by finite differences.
inline double closed_channel_fraction(const Model& m, double E, double nu) {
  const double lam = m.couplings.lambda;
  const double g0 = m.couplings.g0;
  const double e_mol = m.e_mol(nu);
  const double beta = 2.0 * lam / (E - e_mol);
  const double g_eff = g0 + 2.0 * lam * lam / (E - e_mol);
  const double jp = loop_integral_dE(m, E);
  return beta * beta / (beta * beta + 2.0 * g_eff * g_eff * jp);
}

// Effective-range expansion 1/f = -1/a + q - (r_e/2) q^2 + O(q^4) on the
// bound-state side; B(E) expanded in q^2 gives the closed-channel terms.
inline double effective_range(const Model& m, double nu) {
  const double B0 = nu / (nu - m.W);
  const double dW = m.W - nu;
  const double B2 = -m.W / (dW * dW);
  return 4.0 * m.b / detail::kSqrtPi - 2.0 * m.b * m.b * B0 / m.a_bg +
         2.0 * B2 / m.a_bg;
}

enum class DimerBranch { Feshbach, Background, Unknown };

inline const char* to_string(DimerBranch b) {
  switch (b) {
    case DimerBranch::Feshbach: return "feshbach";
    case DimerBranch::Background: return "background";
    default: return "unknown";
  }
}

struct DimerState {
  double E_dim = 0.0;    // binding energy > 0, pole of f at E = -E_dim
  double q_dim = 0.0;    // sqrt(E_dim)
  DimerBranch branch = DimerBranch::Unknown;
  double p_closed = 0.0;
};

namespace detail {

inline double bisect_dimer(const Model& m, double nu, double lo, double hi,
                           double f_lo) {
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    const double f_mid = scaled_inverse_f(m, mid, nu);
    if (f_mid == 0.0) return mid;
    if ((f_mid < 0.0) == (f_lo < 0.0)) {
      lo = mid;
      f_lo = f_mid;
    } else {
      hi = mid;
    }
    if (hi - lo < 1e-16 * std::max(1.0, std::abs(lo))) break;
  }
  return 0.5 * (lo + hi);
}

// Dimer roots on (E_lo, E_hi), G continuous there; log-spaced bracketing
// mesh with pts_per_decade points per decade of |E|.
inline void scan_segment(const Model& m, double nu, double E_lo, double E_hi,
                         std::vector<double>& roots,
                         int pts_per_decade = 400) {
  if (E_hi <= E_lo) return;
  const double t0 = std::log10(-E_hi), t1 = std::log10(-E_lo);
  const int n_scan =
      std::max(8, static_cast<int>(std::ceil((t1 - t0) * pts_per_decade)));
  double prev_E = -std::pow(10.0, t0);
  double prev_f = scaled_inverse_f(m, prev_E, nu);
  for (int i = 1; i <= n_scan; ++i) {
    const double E = -std::pow(10.0, t0 + (t1 - t0) * i / n_scan);
    const double f = scaled_inverse_f(m, E, nu);
    if ((f < 0.0) != (prev_f < 0.0)) {
      const double lo = std::min(prev_E, E), hi = std::max(prev_E, E);
      const double f_at_lo = (lo == prev_E) ? prev_f : f;
      roots.push_back(bisect_dimer(m, nu, lo, hi, f_at_lo));
    }
    prev_E = E;
    prev_f = f;
  }
}

}  // namespace detail

// All dimers at detuning nu with binding energy in (E_eps, E_max); states
// below the -10/b^2 floor are cutoff artifacts and excluded by default.
// Sorted deepest first. The bare-molecule pole at E = nu - W splits the scan.
inline std::vector<DimerState> find_dimers(const Model& m, double nu,
                                           double E_max = -1.0,
                                           double E_eps = 1e-12) {
  if (E_max <= 0.0) E_max = 10.0 / (m.b * m.b);
  const double E_floor = -E_max;
  const double E_ceil = -E_eps;
  std::vector<double> roots;
  const double pole = nu - m.W;
  if (pole > E_floor && pole < E_ceil) {
    const double gap = 1e-9 * std::max(1.0, std::abs(pole));
    detail::scan_segment(m, nu, E_floor, pole - gap, roots);
    detail::scan_segment(m, nu, pole + gap, E_ceil, roots);
  } else {
    detail::scan_segment(m, nu, E_floor, E_ceil, roots);
  }
  std::sort(roots.begin(), roots.end());  // ascending E = deepest first
  std::vector<DimerState> out;
  out.reserve(roots.size());
  for (double E : roots) {
    DimerState d;
    d.E_dim = -E;
    d.q_dim = std::sqrt(-E);
    d.p_closed = closed_channel_fraction(m, E, nu);
    out.push_back(d);
  }
  return out;
}

// Least-bound dimer; throws if there is none.
inline DimerState shallow_dimer(const Model& m, double nu,
                                double E_max = -1.0) {
  const auto ds = find_dimers(m, nu, E_max);
  if (ds.empty()) throw NoShallowDimer(m.label + ": no dimer at this field");
  return ds.back();
}

struct DimerPoint {
  double B_gauss = 0.0;
  double a_over_a0 = 0.0;   // a(B) in Bohr radii
  bool has_dimer = false;   // false rows mark fields with no dimer
  double E = 0.0;           // -E_dim, reduced
  double E_h_mhz = 0.0;     // E/h in MHz (negative, binding)
  DimerBranch branch = DimerBranch::Unknown;
  double p_closed = 0.0;
};

// Dimer branches over a field window. Roots of a scalar continuous function
// cannot cross, so the energy ordering is stable along continuation; tracked
// branches are matched between adjacent fields by energy proximity. The
// branch surviving to the far nu > 0 end is the background dimer; a branch
// terminating at zero binding as nu -> 0^- is the Feshbach dimer.
inline std::vector<DimerPoint> dimer_spectrum_scan(const Model& m,
                                                   double B_lo, double B_hi,
                                                   int n_fields,
                                                   double E_max = -1.0) {
  struct Raw {
    int field;
    double B;
    double E;
    double p_closed;
    int track;
  };
  std::vector<Raw> raw;
  std::vector<double> fields;
  std::vector<double> prev_E;
  std::vector<int> prev_idx;
  int next_track = 0;
  for (int i = 0; i < n_fields; ++i) {
    const double B =
        n_fields == 1 ? B_lo : B_lo + (B_hi - B_lo) * i / (n_fields - 1.0);
    fields.push_back(B);
    if (B == m.B0) {
      prev_E.clear();
      prev_idx.clear();
      continue;
    }
    const auto ds = find_dimers(m, m.nu(B), E_max);
    std::vector<int> idx(ds.size(), -1);
    std::vector<bool> used(prev_E.size(), false);
    for (std::size_t j = 0; j < ds.size(); ++j) {
      double best = 1e300;
      int best_k = -1;
      for (std::size_t k = 0; k < prev_E.size(); ++k) {
        if (used[k]) continue;
        const double d = std::abs(-ds[j].E_dim - prev_E[k]);
        if (d < best) {
          best = d;
          best_k = static_cast<int>(k);
        }
      }
      if (best_k >= 0 && best < 0.5 * std::max(1e-6, ds[j].E_dim)) {
        idx[j] = prev_idx[best_k];
        used[best_k] = true;
      }
    }
    for (std::size_t j = 0; j < ds.size(); ++j)
      if (idx[j] < 0) idx[j] = next_track++;
    prev_E.clear();
    prev_idx.clear();
    for (std::size_t j = 0; j < ds.size(); ++j) {
      prev_E.push_back(-ds[j].E_dim);
      prev_idx.push_back(idx[j]);
      raw.push_back(Raw{i, B, -ds[j].E_dim, ds[j].p_closed, idx[j]});
    }
  }
  // label tracks: the one present at the field of largest nu is background
  int bg_track = -1;
  double nu_best = -1e300;
  for (const auto& r : raw) {
    const double nu = m.nu(r.B);
    if (nu > nu_best) {
      nu_best = nu;
      bg_track = r.track;
    }
  }
  std::vector<DimerPoint> rows;
  std::size_t ir = 0;
  for (int i = 0; i < n_fields; ++i) {
    bool any = false;
    while (ir < raw.size() && raw[ir].field == i) {
      DimerPoint p;
      p.B_gauss = raw[ir].B;
      p.a_over_a0 = m.scattering_length(raw[ir].B) * m.units.length_a0;
      p.has_dimer = true;
      p.E = raw[ir].E;
      p.E_h_mhz = raw[ir].E * m.units.energy_h_mhz();
      p.branch = raw[ir].track == bg_track ? DimerBranch::Background
                                           : DimerBranch::Feshbach;
      p.p_closed = raw[ir].p_closed;
      rows.push_back(p);
      any = true;
      ++ir;
    }
    if (!any && fields[i] != m.B0) {
      DimerPoint p;
      p.B_gauss = fields[i];
      p.a_over_a0 = m.scattering_length(fields[i]) * m.units.length_a0;
      rows.push_back(p);
    }
  }
  return rows;
}

}  // namespace fewbose
