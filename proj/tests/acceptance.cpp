// Acceptance gate: one pass/fail line per criterion, nonzero exit on any
// failure. Heavy checks print their intermediate numbers so a failure can be
// diagnosed from the log alone. Optional argv: criterion numbers to run.

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <iostream>
#include <optional>
#include <random>
#include <set>
#include <string>
#include <vector>

#include "fewbose/fewbose.hpp"

using namespace fewbose;

namespace {

const Model& cs() {
  static Model m = Model::from_resonance(builtin_catalog()[0]);
  return m;
}
const Model& na() {
  static Model m = Model::from_resonance(builtin_catalog()[1]);
  return m;
}

// ---------------------------------------------------------------- criterion 1
// a(B) reconstructed from the calibrated amplitude at zero energy matches the
// published law at 1000 random fields per set, relative error < 1e-12.
bool criterion1() {
  std::mt19937 rng(20260823);
  bool ok = true;
  for (const auto& res : builtin_catalog()) {
    const Model m = Model::from_resonance(res);
    std::uniform_real_distribution<double> dist(res.B0_gauss - 40.0,
                                                res.B0_gauss + 40.0);
    double worst = 0.0;
    for (int i = 0; i < 1000; ++i) {
      const double B = dist(rng);
      if (B == res.B0_gauss || B == res.B0_gauss + res.delta_B_gauss) continue;
      const double a_law = m.scattering_length(B);
      const double a_amp = -1.0 / inverse_f(m, -1e-300, m.nu(B));
      worst = std::max(worst, std::abs(a_amp / a_law - 1.0));
    }
    std::printf("  [1] %s: worst relative error %.3e\n", res.label.c_str(),
                worst);
    ok = ok && worst < 1e-12;
  }
  return ok;
}

// ---------------------------------------------------------------- criterion 2
// Every found dimer is a root of 1/f to 1e-10; p_closed equals dE_dim/dnu to
// 1e-4 at >= 10 fields per set.
bool criterion2() {
  bool ok = true;
  for (const Model* mp : {&cs(), &na()}) {
    const Model& m = *mp;
    double worst_root = 0.0, worst_hf = 0.0;
    int n_hf = 0;
    for (int i = 0; i < 14; ++i) {
      const double B = m.B0 + (-2.0 + 0.14 * i) * m.delta_B;
      const double nu = m.nu(B);
      const auto ds = find_dimers(m, nu);
      for (const auto& d : ds)
        worst_root = std::max(worst_root,
                              std::abs(inverse_f(m, -d.E_dim, nu)));
      if (ds.empty()) continue;
      const double h = 1e-6 * std::max(std::abs(nu), 1.0 / (m.b * m.b));
      const double E1 = -shallow_dimer(m, nu - h).E_dim;
      const double E2 = -shallow_dimer(m, nu + h).E_dim;
      worst_hf = std::max(
          worst_hf, std::abs(ds.back().p_closed - (E2 - E1) / (2.0 * h)));
      ++n_hf;
    }
    std::printf("  [2] %s: worst |1/f| %.3e, worst HF gap %.3e (%d fields)\n",
                m.label.c_str(), worst_root, worst_hf, n_hf);
    ok = ok && worst_root < 1e-10 && worst_hf < 1e-4 && n_hf >= 10;
  }
  return ok;
}

// ---------------------------------------------------------------- criterion 3
// Cs shallow branch obeys E_dim a^2 = 1 to 5% wherever a > 20 b in the
// near-resonance window.
bool criterion3() {
  bool ok = true;
  double worst = 0.0;
  for (double B = -30.0; B <= -12.2; B += 0.4) {
    const double a = cs().scattering_length(B);
    if (a <= 20.0 * cs().b) continue;
    const double E = shallow_dimer(cs(), cs().nu(B)).E_dim;
    worst = std::max(worst, std::abs(E * a * a - 1.0));
  }
  std::printf("  [3] Cs universal-window worst |E a^2 - 1| = %.4f\n", worst);
  ok = worst > 0.0 && worst < 0.05;
  return ok;
}

// ---------------------------------------------------------------- criterion 4
// Efimov ladder at nu = 0: shallowest-pair ratio within 2% of e^(2 pi/s0).
bool criterion4() {
  const double target = std::exp(2.0 * M_PI / 1.00624);
  const auto roots = efimov_spectrum(cs(), 600);
  std::printf("  [4] %zu ladder states:", roots.size());
  for (double E : roots) std::printf(" %.6e", E);
  std::printf("\n");
  if (roots.size() < 3) return false;
  const double ratio = roots[roots.size() - 2] / roots[roots.size() - 1];
  std::printf("  [4] shallow-pair ratio %.2f vs %.2f (%.2f%% off)\n", ratio,
              target, 100.0 * std::abs(ratio / target - 1.0));
  return std::abs(ratio / target - 1.0) < 0.02;
}

// ---------------------------------------------------------------- criterion 5
// Cs threshold fields: ground branch meets the three-atom threshold at
// 10.3 +- 0.5 G and the atom-dimer threshold at 23.2 +- 0.5 G.
std::optional<double> gap_root(const TrimerSolver& s, double B, double E_ref,
                               double g_lo, double g_hi) {
  // root of the indicator in the gap g, E = E_ref - g, log-spaced bracket
  const int n_mesh = 40;
  double prev_g = g_lo;
  double prev_f = s.indicator(B, E_ref - prev_g);
  for (int i = 1; i <= n_mesh; ++i) {
    const double g =
        g_lo * std::pow(g_hi / g_lo, static_cast<double>(i) / n_mesh);
    const double f = s.indicator(B, E_ref - g);
    if ((f < 0.0) != (prev_f < 0.0)) {
      double lo = prev_g, hi = g, f_lo = prev_f;
      for (int it = 0; it < 60; ++it) {
        const double mid = std::sqrt(lo * hi);
        const double fm = s.indicator(B, E_ref - mid);
        if ((fm < 0.0) == (f_lo < 0.0)) {
          lo = mid;
          f_lo = fm;
        } else {
          hi = mid;
        }
      }
      const double g_star = std::sqrt(lo * hi);
      if (std::abs(s.indicator(B, E_ref - g_star)) < 1e-8) return g_star;
    }
    prev_g = g;
    prev_f = f;
  }
  return std::nullopt;
}

bool criterion5() {
  bool ok = true;
  // three-atom side: branch energy -E vanishes toward B* from below
  {
    std::vector<double> sc, gap;
    for (double B : {9.0, 9.5, 10.0, 10.2}) {
      // the locality filter rejects grids where the branch hybridizes with a
      // discretization artifact; retry on a denser grid in that case
      std::vector<double> roots;
      for (std::size_t n : {560u, 480u, 640u}) {
        const TrimerSolver s = TrimerSolver::standard(cs(), n);
        roots = find_trimers(s, B, -0.05, -2e-4);
        if (!roots.empty()) break;
      }
      if (roots.empty()) {
        std::printf("  [5] no trimer at B = %.2f G\n", B);
        return false;
      }
      sc.push_back(B);
      gap.push_back(-roots.back());
      std::printf("  [5] three-atom side B = %.2f G, E = %.6e\n", B,
                  roots.back());
    }
    const ThresholdField t = detail::fit_power_law(sc, gap);
    std::printf("  [5] three-atom threshold B* = %.3f G (p = %.2f)\n",
                t.B_star, t.exponent);
    ok = ok && std::abs(t.B_star - 10.3) < 0.5;
  }
  // atom-dimer side: gap to -E_dim vanishes toward B* from above
  {
    const TrimerSolver s = TrimerSolver::standard(cs(), 480);
    std::vector<double> sc, gap;
    for (double B : {24.0, 23.8, 23.6, 23.4}) {  // farthest first
      const double E_dim = shallow_dimer(cs(), cs().nu(B)).E_dim;
      const auto g = gap_root(s, B, -E_dim, 1e-6, 5e-3);
      if (!g) {
        std::printf("  [5] no trimer below the dimer at B = %.2f G\n", B);
        return false;
      }
      sc.push_back(-B);  // threshold approached with B decreasing
      gap.push_back(*g);
      std::printf("  [5] atom-dimer side B = %.2f G, gap = %.6e\n", B, *g);
    }
    const ThresholdField t = detail::fit_power_law(sc, gap);
    std::printf("  [5] atom-dimer threshold B* = %.3f G (p = %.2f)\n",
                -t.B_star, t.exponent);
    ok = ok && std::abs(-t.B_star - 23.2) < 0.5;
  }
  return ok;
}

// ---------------------------------------------------------------- criterion 6
// Zero-range limit at fixed (a, R*): halving b twice drives both the
// recombination constant and the borromean threshold a_- monotonically onto
// the effective-range reference; Richardson extrapolation agrees to 2%.
Model reduced_model(double b) {
  const double t = 1.4157;  // a_bg/b, narrow-resonance shape held fixed
  const double R_star = 10.53;
  const double a_bg = t * b;
  return Model::from_reduced(a_bg, b, 1.0 / (a_bg * R_star));
}

double nu_for_a(const Model& m, double a) {
  // a(nu) = a_bg (1 - W/nu)
  return m.a_bg * m.W / (m.a_bg - a);
}

double richardson(double v1, double v2, double v3) {
  // values at b, b/2, b/4 with error c1 b + c2 b^2
  return (8.0 * v3 - 6.0 * v2 + v1) / 3.0;
}

// smallest-|eigenvalue| indicator of the zero-range operator
double zr_indicator(double inv_a, double R_star, double E,
                    const MomentumGrid& grid) {
  const KernelMatrix km =
      assemble_effective_range(inv_a, R_star, E, grid, true);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(km.M,
                                                    Eigen::EigenvaluesOnly);
  double mm = std::abs(es.eigenvalues()(0));
  int n_neg = 0;
  for (Eigen::Index i = 0; i < es.eigenvalues().size(); ++i) {
    mm = std::min(mm, std::abs(es.eigenvalues()(i)));
    if (es.eigenvalues()(i) < 0.0) ++n_neg;
  }
  return (n_neg % 2 ? -1.0 : 1.0) * mm;
}

// borromean threshold of the finite-range model: largest |a| (a < 0) with no
// trimer; bisection on the filtered root count near zero energy
double model_a_minus(double b, double a_lo, double a_hi) {
  const TrimerSolver s = TrimerSolver::standard(reduced_model(b), 360);
  auto has_trimer = [&](double a) {
    const double nu = nu_for_a(s.model, a);
    return !find_trimers(s, nu, -0.02, -1e-9).empty();
  };
  double lo = a_lo, hi = a_hi;  // lo: trimer present, hi: absent
  if (!has_trimer(lo) || has_trimer(hi))
    throw NumericalError("criterion 6: a_- bracket invalid");
  for (int it = 0; it < 22; ++it) {
    const double mid = 0.5 * (lo + hi);
    (has_trimer(mid) ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

double reference_a_minus(double R_star, double a_lo, double a_hi) {
  const MomentumGrid grid =
      MomentumGrid::log_spaced(400, 1e-8 / R_star, 200.0 / R_star);
  auto has_trimer = [&](double a) {
    // same bracketing mesh as find_trimers, zero-range operator
    const double E_lo = -0.02, E_hi = -1e-9;
    const double t0 = std::log10(-E_lo), t1 = std::log10(-E_hi);
    const int n_mesh = static_cast<int>(std::ceil((t0 - t1) * 16));
    double prev = zr_indicator(1.0 / a, R_star, E_lo, grid);
    for (int i = 1; i <= n_mesh; ++i) {
      const double E = -std::pow(10.0, t0 + (t1 - t0) * i / n_mesh);
      const double f = zr_indicator(1.0 / a, R_star, E, grid);
      if ((f < 0.0) != (prev < 0.0)) return true;
      prev = f;
    }
    return false;
  };
  double lo = a_lo, hi = a_hi;
  if (!has_trimer(lo) || has_trimer(hi))
    throw NumericalError("criterion 6: reference a_- bracket invalid");
  for (int it = 0; it < 22; ++it) {
    const double mid = 0.5 * (lo + hi);
    (has_trimer(mid) ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

bool criterion6() {
  const double R_star = 10.53;
  const double b_ladder[3] = {1.0, 0.5, 0.25};
  bool ok = true;

  // recombination constant at a = 100; the alpha ladder starts at smaller b
  // than the threshold ladder because alpha carries a larger b-linear slope
  {
    const double a = 100.0;
    const double ab_ladder[3] = {0.25, 0.125, 0.0625};
    const double ref = alpha_effective_range_reference(a, R_star);
    double v[3];
    for (int i = 0; i < 3; ++i) {
      const Model m = reduced_model(ab_ladder[i]);
      v[i] = alpha_feshbach(m, nu_for_a(m, a)).alpha / ref;
      std::printf("  [6] alpha ratio at b = %-6g: %.4f\n", ab_ladder[i], v[i]);
    }
    const double ex = richardson(v[0], v[1], v[2]);
    std::printf("  [6] alpha Richardson ratio: %.4f\n", ex);
    ok = ok && std::abs(1.0 - v[0]) > std::abs(1.0 - v[1]) &&
         std::abs(1.0 - v[1]) > std::abs(1.0 - v[2]) &&
         std::abs(ex - 1.0) < 0.02;
  }

  // borromean threshold a_-
  {
    const double ref = reference_a_minus(R_star, -300.0, -30.0);
    std::printf("  [6] reference a_- = %.3f\n", ref);
    double v[3];
    for (int i = 0; i < 3; ++i) {
      v[i] = model_a_minus(b_ladder[i], -300.0, -30.0) / ref;
      std::printf("  [6] a_- ratio at b = %-5g: %.4f\n", b_ladder[i], v[i]);
    }
    const double ex = richardson(v[0], v[1], v[2]);
    std::printf("  [6] a_- Richardson ratio: %.4f\n", ex);
    ok = ok && std::abs(1.0 - v[1]) <= std::abs(1.0 - v[0]) &&
         std::abs(1.0 - v[2]) <= std::abs(1.0 - v[1]) &&
         std::abs(ex - 1.0) < 0.02;
  }
  return ok;
}

// ---------------------------------------------------------------- criterion 7
// Na recombination: model vs effective-range reference agrees within a
// factor 2 for |B - B0| < 0.1 G and disagrees by over a factor 3 somewhere in
// |B - B0| > 0.5 G.
bool criterion7() {
  const double Rs = na().r_star();
  auto ratio_at = [&](double B) {
    const double a = na().scattering_length(B);
    const double model = alpha_feshbach(na(), B).alpha;
    const double ref = alpha_effective_range_reference(a, Rs);
    const double r = model / ref;
    std::printf("  [7] B = %.2f G: alpha = %.3e cm^6/s, model/ref = %.3f\n",
                B, model * na().units.alpha_cm6_s(), r);
    return r;
  };
  bool near_ok = true;
  for (double B : {906.92, 906.95, 906.99}) {
    const double r = ratio_at(B);
    near_ok = near_ok && r > 0.5 && r < 2.0;
  }
  bool far_off = false;
  for (double B : {906.0, 906.3}) {
    const double r = ratio_at(B);
    far_off = far_off || r < 1.0 / 3.0 || r > 3.0;
  }
  return near_ok && far_off;
}

// ---------------------------------------------------------------- criterion 8
// Numerical hygiene: no Thomas collapse (ground trimer stable to 1e-4 under
// refinement), driven residual < 1e-8, residue cross-check < 1%, deep-channel
// box-size independence < 1e-6.
bool criterion8() {
  bool ok = true;
  {
    auto ground = [&](std::size_t n, double K_max_b) {
      const TrimerSolver s =
          TrimerSolver::standard(cs(), n, -1.0, K_max_b / cs().b);
      const auto roots = find_trimers(s, cs().B0, -10.0, -1e-3);
      if (roots.empty()) throw NumericalError("criterion 8: no ground trimer");
      return roots.front();
    };
    const double e0 = ground(400, 12.0);
    const double e1 = ground(600, 12.0);
    const double e2 = ground(400, 16.0);
    std::printf("  [8] ground trimer: %.8f (n=400), %.8f (n=600), "
                "%.8f (K_max=16/b)\n", e0, e1, e2);
    ok = ok && std::abs(e1 / e0 - 1.0) < 1e-4 && std::abs(e2 / e0 - 1.0) < 1e-4;
  }
  {
    const DrivenSolution sol = solve_driven(na(), 906.5);
    double rel = 1.0;
    extract_residue(sol, &rel);
    std::printf("  [8] driven residual %.3e, residue cross-check %.3e\n",
                sol.residual, rel);
    ok = ok && sol.residual < 1e-8 && rel < 0.01;
  }
  {
    const double a1 = alpha_deep(na(), 907.2, 1.0, 300, 50.0).alpha;
    const double a2 = alpha_deep(na(), 907.2, 1.0, 300, 200.0).alpha;
    std::printf("  [8] deep-channel L-dependence %.3e\n",
                std::abs(a2 / a1 - 1.0));
    ok = ok && std::abs(a2 / a1 - 1.0) < 1e-6;
  }
  return ok;
}

}  // namespace

int main(int argc, char** argv) {
  struct Item {
    int num;
    const char* name;
    bool (*fn)();
  };
  const Item items[] = {
      {1, "scattering-length law", criterion1},
      {2, "two-body consistency", criterion2},
      {3, "universal dimer limit", criterion3},
      {4, "Efimov ratio", criterion4},
      {5, "Cs threshold fields", criterion5},
      {6, "zero-range limit", criterion6},
      {7, "Na recombination curve", criterion7},
      {8, "numerical hygiene", criterion8},
  };
  std::set<int> wanted;
  for (int i = 1; i < argc; ++i) wanted.insert(std::atoi(argv[i]));

  int failed = 0;
  for (const auto& it : items) {
    if (!wanted.empty() && !wanted.count(it.num)) continue;
    const auto t0 = std::chrono::steady_clock::now();
    bool pass = false;
    try {
      pass = it.fn();
    } catch (const std::exception& e) {
      std::printf("  [%d] exception: %s\n", it.num, e.what());
    }
    const double secs =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
            .count();
    std::printf("%s criterion %d: %s (%.1f s)\n", pass ? "PASS" : "FAIL",
                it.num, it.name, secs);
    std::fflush(stdout);
    if (!pass) ++failed;
  }
  return failed ? 1 : 0;
}
