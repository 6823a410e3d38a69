#pragma once

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <optional>
#include <string>
#include <vector>

#include "fewbose/kernel.hpp"
#include "fewbose/twobody.hpp"

namespace fewbose {

// Trimer search machinery: trimers are the E at which the discretized
// three-body operator becomes singular. The indicator is the
// smallest-magnitude eigenvalue of the symmetrically scaled matrix with the
// sign (-1)^(number of negative eigenvalues), which is continuous in E and
// changes sign at every genuine singular point. A determinant would over- or
// underflow at these matrix sizes.

struct TrimerSolver {
  Model model;
  MomentumGrid grid;
  int angular_order = 40;
  int nthreads = 0;  // 0 = hardware concurrency

  static TrimerSolver standard(const Model& m, std::size_t n = 400,
                               double K_min = -1.0, double K_max = -1.0,
                               int nthreads = 0) {
    TrimerSolver s;
    s.model = m;
    const double b = m.b;
    if (K_min <= 0.0) K_min = 1e-6 / b;
    if (K_max <= 0.0) K_max = 12.0 / b;
    s.grid = MomentumGrid::log_spaced(n, K_min, K_max);
    s.nthreads = nthreads;
    return s;
  }

  double indicator(double B, double E) const {
    const KernelMatrix km =
        assemble_symmetric(model, B, E, grid, angular_order, nthreads);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(km.M,
                                                      Eigen::EigenvaluesOnly);
    const auto& ev = es.eigenvalues();
    double minmag = std::abs(ev(0));
    int n_neg = 0;
    for (Eigen::Index i = 0; i < ev.size(); ++i) {
      minmag = std::min(minmag, std::abs(ev(i)));
      if (ev(i) < 0.0) ++n_neg;
    }
    return (n_neg % 2 ? -1.0 : 1.0) * minmag;
  }
};

namespace detail {

// Bisection on the indicator sign. The bare-molecule pole E_rel = nu - W
// crossing grid nodes also flips the sign without a root, so a bracket is
// accepted as a trimer only if the refined indicator magnitude collapses
// (genuine singularities reach ~1e-16, pole artifacts stay ~1e-2).
inline std::optional<double> refine_trimer(const TrimerSolver& s, double B,
                                           double lo, double hi, double f_lo,
                                           double accept_tol = 1e-8) {
  double f_at = f_lo;
  for (int it = 0; it < 80; ++it) {
    const double mid = 0.5 * (lo + hi);
    const double f_mid = s.indicator(B, mid);
    if ((f_mid < 0.0) == (f_at < 0.0)) {
      lo = mid;
      f_at = f_mid;
    } else {
      hi = mid;
    }
    if (hi - lo < 1e-13 * std::abs(lo)) break;
  }
  const double E = 0.5 * (lo + hi);
  if (std::abs(s.indicator(B, E)) < accept_tol) return E;
  return std::nullopt;
}

// A dimer root of G crossing a grid node zeroes one diagonal entry, which
// makes the discretized operator genuinely singular at a grid-dependent
// energy: a fake root the magnitude filter cannot reject. Such a singularity
// has its null vector concentrated on the offending node, whereas a bound
// state is spread over decades of momentum; accept only roots whose null
// vector carries no dominant single-node weight.
inline bool root_is_extended(const TrimerSolver& s, double B, double E,
                             double w_max_tol = 0.5) {
  const KernelMatrix km =
      assemble_symmetric(s.model, B, E, s.grid, s.angular_order, s.nthreads);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(km.M);
  const auto& ev = es.eigenvalues();
  Eigen::Index idx = 0;
  for (Eigen::Index i = 1; i < ev.size(); ++i)
    if (std::abs(ev(i)) < std::abs(ev(idx))) idx = i;
  const auto v = es.eigenvectors().col(idx);
  double w_max = 0.0;
  for (Eigen::Index i = 0; i < v.size(); ++i)
    w_max = std::max(w_max, v(i) * v(i));
  return w_max < w_max_tol;
}

}  // namespace detail

// All trimer energies in (E_lo, E_hi), both negative; log-spaced bracketing
// mesh in |E|. Spurious sign flips from the bare-molecule pole band are
// rejected by the magnitude filter in refine_trimer; grid-dependent fake
// roots from diagonal zeros are rejected by the null-vector locality check.
inline std::vector<double> find_trimers(const TrimerSolver& s, double B,
                                        double E_lo, double E_hi,
                                        int pts_per_decade = 16) {
  if (E_hi >= 0.0 || E_lo >= E_hi)
    throw std::invalid_argument("find_trimers: need E_lo < E_hi < 0");
  const double t0 = std::log10(-E_lo), t1 = std::log10(-E_hi);
  const int n_mesh =
      std::max(4, static_cast<int>(std::ceil((t0 - t1) * pts_per_decade)));
  std::vector<double> roots;
  double prev_E = E_lo;
  double prev_f = s.indicator(B, prev_E);
  for (int i = 1; i <= n_mesh; ++i) {
    const double E = -std::pow(10.0, t0 + (t1 - t0) * i / n_mesh);
    const double f = s.indicator(B, E);
    if ((f < 0.0) != (prev_f < 0.0)) {
      const auto root = detail::refine_trimer(s, B, prev_E, E, prev_f);
      if (root && detail::root_is_extended(s, B, *root)) roots.push_back(*root);
    }
    prev_E = E;
    prev_f = f;
  }
  std::sort(roots.begin(), roots.end());
  return roots;
}

// Geometric ladder at exact resonance (nu = 0): needs K_min deep enough to
// resolve the shallow rungs; ratios E_n/E_{n+1} approach e^(2 pi/s0).
inline std::vector<double> efimov_spectrum(const Model& m, std::size_t n = 600,
                                           double E_lo = -10.0,
                                           double E_hi = -1e-8,
                                           int nthreads = 0) {
  TrimerSolver s = TrimerSolver::standard(m, n, 1e-8 / m.b, 12.0 / m.b,
                                          nthreads);
  const double B_res = m.B0;  // nu(B0) = 0 exactly
  auto roots = find_trimers(s, B_res, E_lo, E_hi);
  std::sort(roots.begin(), roots.end());  // deepest first
  return roots;
}

enum class BranchEnd { ThreeAtomThreshold, AtomDimerThreshold, WindowEdge };

inline const char* to_string(BranchEnd e) {
  switch (e) {
    case BranchEnd::ThreeAtomThreshold: return "three_atom";
    case BranchEnd::AtomDimerThreshold: return "atom_dimer";
    default: return "window_edge";
  }
}

struct BranchPoint {
  double B = 0.0;
  double E = 0.0;
  bool qualitative = false;  // a < 10 b: non-universal merge region
};

struct TrimerBranch {
  std::vector<BranchPoint> points;  // ordered by B
  int index = 0;
  BranchEnd end_lo = BranchEnd::WindowEdge;  // B decreasing end
  BranchEnd end_hi = BranchEnd::WindowEdge;  // B increasing end
};

namespace detail {

// Locate a trimer near E_guess at field B by scanning a narrow log window.
inline std::optional<double> solve_near(const TrimerSolver& s, double B,
                                        double E_guess, double E_ceiling,
                                        double spread = 2.5) {
  double lo = E_guess * spread;
  double hi = std::min(E_guess / spread, E_ceiling);
  if (hi <= lo) return std::nullopt;
  const auto roots = find_trimers(s, B, lo, hi, 24);
  if (roots.empty()) return std::nullopt;
  // closest to the prediction
  double best = roots.front();
  for (double r : roots)
    if (std::abs(r - E_guess) < std::abs(best - E_guess)) best = r;
  return best;
}

inline double ceiling_at(const Model& m, double B, double E_eps) {
  // stay below the lowest dissociation threshold
  const auto ds = find_dimers(m, m.nu(B));
  double c = -E_eps;
  if (!ds.empty()) c = std::min(c, -ds.back().E_dim - E_eps);
  return c;
}

inline bool qualitative_at(const Model& m, double B) {
  if (B == m.B0) return false;  // a diverges at resonance: universal side
  return std::abs(m.scattering_length(B)) < 10.0 * m.b;
}

inline BranchEnd classify_end(const Model& m, double B, double E) {
  const auto ds = find_dimers(m, m.nu(B));
  if (!ds.empty() && ds.back().E_dim > 0.5 * (-E))
    return BranchEnd::AtomDimerThreshold;
  return BranchEnd::ThreeAtomThreshold;
}

}  // namespace detail

// Continuation of one trimer branch from a solved point (B_start, E_start)
// over [B_lo, B_hi]. Linear prediction in B, step halving when the corrector
// loses the root; the branch ends when the step collapses (threshold) or the
// window edge is reached.
inline TrimerBranch trace_branch(const TrimerSolver& s, double B_start,
                                 double E_start, double B_lo, double B_hi,
                                 double dB = 0.0, double dB_min = 0.0,
                                 double E_eps = 1e-9) {
  const Model& m = s.model;
  if (dB <= 0.0) dB = m.delta_B / 200.0;
  if (dB_min <= 0.0) dB_min = dB / 64.0;
  TrimerBranch br;
  br.points.push_back(
      BranchPoint{B_start, E_start, detail::qualitative_at(m, B_start)});

  for (int dir = +1; dir >= -1; dir -= 2) {
    double B = B_start, E = E_start;
    double B_prev = B_start, E_prev = E_start;
    double step = dB;
    BranchEnd end = BranchEnd::WindowEdge;
    const double B_edge = dir > 0 ? B_hi : B_lo;
    while (true) {
      if ((dir > 0 && B >= B_edge) || (dir < 0 && B <= B_edge)) {
        end = BranchEnd::WindowEdge;
        break;
      }
      double B_next = B + dir * step;
      if ((dir > 0 && B_next > B_edge) || (dir < 0 && B_next < B_edge))
        B_next = B_edge;
      double E_pred = E;
      if (B_next != B && B != B_prev)
        E_pred = E + (E - E_prev) * (B_next - B) / (B - B_prev);
      const double ceil_E = detail::ceiling_at(m, B_next, E_eps);
      std::optional<double> found;
      if (E_pred < ceil_E)
        found = detail::solve_near(s, B_next, E_pred, ceil_E);
      if (found) {
        B_prev = B;
        E_prev = E;
        B = B_next;
        E = *found;
        br.points.push_back(
            BranchPoint{B, E, detail::qualitative_at(m, B)});
        step = std::min(dB, step * 2.0);
      } else {
        step *= 0.5;
        if (step < dB_min) {
          end = detail::classify_end(m, B, E);
          break;
        }
      }
    }
    if (dir > 0)
      br.end_hi = end;
    else
      br.end_lo = end;
  }
  std::sort(br.points.begin(), br.points.end(),
            [](const BranchPoint& a, const BranchPoint& b) { return a.B < b.B; });
  return br;
}

struct ThresholdField {
  BranchEnd kind = BranchEnd::WindowEdge;
  double B_star = 0.0;
  double uncertainty = 0.0;
  double exponent = 0.0;  // fitted power
};

namespace detail {

// Fit g_i = c (B* - s_i)^p to positive gaps vanishing as s -> 0^- (signed
// coordinate s = dir*B so the threshold is always approached from below).
// B* from a 1D search minimizing the residual of the log-log regression.
inline ThresholdField fit_power_law(const std::vector<double>& s_coord,
                                    const std::vector<double>& gap) {
  const std::size_t n = s_coord.size();
  if (n < 3) throw FitDivergence("threshold fit: need >= 3 points");
  const double s_last = *std::max_element(s_coord.begin(), s_coord.end());
  const double s_first = *std::min_element(s_coord.begin(), s_coord.end());
  const double span = s_last - s_first;
  auto sse = [&](double s_star, double* p_out) {
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (std::size_t i = 0; i < n; ++i) {
      const double x = std::log(s_star - s_coord[i]);
      const double y = std::log(gap[i]);
      sx += x;
      sy += y;
      sxx += x * x;
      sxy += x * y;
    }
    const double p = (n * sxy - sx * sy) / (n * sxx - sx * sx);
    const double c = (sy - p * sx) / n;
    double e = 0;
    for (std::size_t i = 0; i < n; ++i) {
      const double r = std::log(gap[i]) - (c + p * std::log(s_star - s_coord[i]));
      e += r * r;
    }
    if (p_out) *p_out = p;
    return e;
  };
  // golden-section over s* in (s_last, s_last + 4*span]
  double a = s_last + 1e-6 * std::max(span, 1e-12);
  double b = s_last + 4.0 * span;
  const double gr = 0.6180339887498949;
  double x1 = b - gr * (b - a), x2 = a + gr * (b - a);
  double f1 = sse(x1, nullptr), f2 = sse(x2, nullptr);
  for (int it = 0; it < 200; ++it) {
    if (f1 < f2) {
      b = x2;
      x2 = x1;
      f2 = f1;
      x1 = b - gr * (b - a);
      f1 = sse(x1, nullptr);
    } else {
      a = x1;
      x1 = x2;
      f1 = f2;
      x2 = a + gr * (b - a);
      f2 = sse(x2, nullptr);
    }
    if (b - a < 1e-10 * std::max(1.0, std::abs(b))) break;
  }
  ThresholdField t;
  double p = 0;
  t.B_star = 0.5 * (a + b);
  sse(t.B_star, &p);
  t.exponent = p;
  // uncertainty: refit without the farthest point
  if (n > 3) {
    std::vector<double> s2(s_coord.begin() + 1, s_coord.end());
    std::vector<double> g2(gap.begin() + 1, gap.end());
    // points are assumed sorted with the farthest-from-threshold first
    const ThresholdField t2 = fit_power_law(s2, g2);
    t.uncertainty = std::abs(t2.B_star - t.B_star);
  }
  return t;
}

}  // namespace detail

// Threshold fields of a traced branch: for each end terminating on a
// threshold, extrapolate the vanishing gap (E for three-atom, E + E_dim for
// atom-dimer) with a fitted power law over the last points. Solving at the
// degenerate point itself is ill-conditioned, hence extrapolation.
inline std::vector<ThresholdField> threshold_fields(const Model& m,
                                                    const TrimerBranch& br,
                                                    std::size_t n_fit = 6) {
  std::vector<ThresholdField> out;
  auto do_end = [&](bool hi_end, BranchEnd kind) {
    if (kind == BranchEnd::WindowEdge) return;
    const std::size_t np = br.points.size();
    if (np < 3) return;
    const std::size_t use = std::min(n_fit, np);
    std::vector<double> s, g;
    for (std::size_t i = 0; i < use; ++i) {
      const BranchPoint& p =
          hi_end ? br.points[np - use + i] : br.points[use - 1 - i];
      const double dir = hi_end ? 1.0 : -1.0;
      double gap;
      if (kind == BranchEnd::ThreeAtomThreshold) {
        gap = -p.E;
      } else {
        const auto ds = find_dimers(m, m.nu(p.B));
        if (ds.empty()) continue;
        gap = -p.E - ds.back().E_dim;
      }
      if (gap <= 0.0) continue;
      s.push_back(dir * p.B);
      g.push_back(gap);
    }
    if (s.size() < 3) return;
    ThresholdField t = detail::fit_power_law(s, g);
    const double dir = hi_end ? 1.0 : -1.0;
    t.B_star *= dir;
    t.kind = kind;
    out.push_back(t);
  };
  do_end(false, br.end_lo);
  do_end(true, br.end_hi);
  return out;
}

}  // namespace fewbose
