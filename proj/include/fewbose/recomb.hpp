#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <complex>
#include <string>
#include <vector>

#include "fewbose/kernel.hpp"
#include "fewbose/quadrature.hpp"
#include "fewbose/twobody.hpp"

namespace fewbose {

// Three-body recombination at zero collision energy (E = 0).
//
// The incoming three free atoms enter the integral equation as a
// (2pi)^3 delta(K) source of strength -3/Lambda. All quantities are solved
// in the Lambda-scaled unknown beta~ = Lambda*beta_eff, which stays finite
// in the weak-coupling limit. The delta part separates analytically:
//   beta~(K) = (2pi)^3 delta(K) c0~ + beta~_s(K),   c0~ = Lambda c0.
// Matching delta parts against the diagonal at K = 0 (D(0) = -1/(4 pi a))
// fixes c0~ = 12 pi a; the delta part then feeds beta~_s through the kernel
// as the regular source 2 c0~ chi_{K/2} chi_K / K^2. Derivation notes:
// docs/derivations.md.

inline double form_factor(double k, double b) {
  return std::exp(-0.5 * k * k * b * b);
}

inline double delta_coefficient(double a) { return 12.0 * detail::kPi * a; }

// dD/dK at the outgoing atom-dimer pole K_pole = (2/sqrt(3)) q_dim, where
// D(K) = G(E - 3K^2/4)/(4 pi).
inline double kernel_diagonal_dK(const Model& m, double K, double E,
                                 double nu) {
  return scaled_inverse_f_dE(m, E - 0.75 * K * K, nu) * (-1.5 * K) /
         (4.0 * detail::kPi);
}

struct DrivenSolution {
  MomentumGrid grid;
  Eigen::VectorXcd beta_s;          // Lambda * beta_s on the grid nodes
  std::complex<double> phi_pole;    // D*beta_s continued to the pole
  double c0_scaled = 0.0;           // Lambda * c0 = 12 pi a
  double K_pole = 0.0;              // (2/sqrt(3)) q_dim
  double D_prime_pole = 0.0;        // dD/dK at the pole
  double E_dim = 0.0;               // shallow dimer binding energy
  double B = 0.0;
  double residual = 0.0;            // linear-system back-substitution check
};

// Solve the driven equation at E = 0 for a field with one shallow dimer.
// The unknown is phi(K) = D(K) beta~_s(K), regular through the pole of
// beta~_s at K_pole where D vanishes. The 1/D singularity is handled by
// real-axis principal-value subtraction: the pole term is removed under the
// quadrature sum and its PV integral plus the +i pi outgoing-wave residue
// are added back in closed form. Collocation at the grid nodes plus the pole
// itself gives an (n+1) x (n+1) complex system.
inline DrivenSolution solve_driven(const Model& m, double B,
                                   std::size_t n = 400, double K_min = -1.0,
                                   double K_max = -1.0,
                                   int angular_order = 40) {
  const double nu = m.nu(B);
  const double a = m.scattering_length(B);
  const auto ds = find_dimers(m, nu);
  if (ds.empty()) throw NoShallowDimer(m.label + ": no shallow dimer");
  const double E_dim = ds.back().E_dim;
  const double q = std::sqrt(E_dim);
  const double p = 2.0 * q / std::sqrt(3.0);
  if (K_min <= 0.0) K_min = 1e-6 / m.b;
  if (K_max <= 0.0) K_max = 12.0 / m.b;
  if (p <= K_min || p >= K_max)
    throw PoleOffGrid(m.label + ": atom-dimer pole outside the grid");

  DrivenSolution sol;
  sol.grid = MomentumGrid::log_spaced(n, K_min, K_max);
  const auto& nodes = sol.grid.k;
  const auto& wts = sol.grid.w;
  const std::size_t nn = nodes.size();
  sol.B = B;
  sol.E_dim = E_dim;
  sol.K_pole = p;
  sol.c0_scaled = delta_coefficient(a);
  sol.D_prime_pole = kernel_diagonal_dK(m, p, 0.0, nu);

  std::vector<double> D(nn);
  for (std::size_t j = 0; j < nn; ++j)
    D[j] = kernel_diagonal(m, nodes[j], 0.0, nu);

  double pv_sum = 0.0;
  for (std::size_t j = 0; j < nn; ++j) pv_sum += wts[j] / (nodes[j] - p);
  const std::complex<double> pv_tail(std::log((K_max - p) / p),
                                     detail::kPi);

  const std::size_t N = nn + 1;
  Eigen::MatrixXcd A = Eigen::MatrixXcd::Zero(N, N);
  Eigen::VectorXcd src(N);
  auto fill_row = [&](std::size_t i, double Ki) {
    A(i, i) += 1.0;
    for (std::size_t j = 0; j < nn; ++j) {
      const double cij = nodes[j] * nodes[j] /
                         (2.0 * detail::kPi * detail::kPi) *
                         swave_kernel(Ki, nodes[j], 0.0, m.b, angular_order);
      A(i, j) -= wts[j] * cij / D[j];
    }
    const double cip = p * p / (2.0 * detail::kPi * detail::kPi) *
                       swave_kernel(Ki, p, 0.0, m.b, angular_order);
    A(i, nn) += (pv_sum - pv_tail) * (cip / sol.D_prime_pole);
    src(i) = 2.0 * sol.c0_scaled * form_factor(0.5 * Ki, m.b) *
             form_factor(Ki, m.b) / (Ki * Ki);
  };
  for (std::size_t i = 0; i < nn; ++i) fill_row(i, nodes[i]);
  fill_row(nn, p);

  Eigen::VectorXcd phi = A.partialPivLu().solve(src);
  sol.residual = (A * phi - src).norm() / src.norm();
  sol.beta_s.resize(nn);
  for (std::size_t j = 0; j < nn; ++j) sol.beta_s(j) = phi(j) / D[j];
  sol.phi_pole = phi(nn);
  return sol;
}

// Residue of beta~_s at the atom-dimer pole, two ways: from the subtraction
// scheme's explicit coefficient, and from a local rational fit of beta~_s on
// nodes near the pole. The two must agree to 1%.
inline std::complex<double> extract_residue(const DrivenSolution& sol,
                                            double* cross_check_rel = nullptr) {
  const std::complex<double> direct = sol.phi_pole / sol.D_prime_pole;
  // rational fit beta~_s(K) ~ gamma/(K-p) + quartic polynomial in (K-p) on
  // nodes around the pole
  const double p = sol.K_pole;
  std::vector<std::size_t> sel;
  for (double w_hi : {0.25, 0.35}) {
    sel.clear();
    for (std::size_t j = 0; j < sol.grid.size(); ++j) {
      const double d = std::abs(sol.grid.k[j] - p);
      if (d > 0.01 * p && d < w_hi * p) sel.push_back(j);
    }
    if (sel.size() >= 8) break;
  }
  std::complex<double> fitted = direct;
  if (sel.size() >= 8) {
    constexpr int nb = 6;
    Eigen::MatrixXcd X(sel.size(), nb);
    Eigen::VectorXcd y(sel.size());
    for (std::size_t r = 0; r < sel.size(); ++r) {
      const double dk = sol.grid.k[sel[r]] - p;
      X(r, 0) = 1.0 / dk;
      double t = 1.0;
      for (int c = 1; c < nb; ++c) {
        X(r, c) = t;
        t *= dk;
      }
      y(r) = sol.beta_s(sel[r]);
    }
    Eigen::VectorXcd coef = X.colPivHouseholderQr().solve(y);
    fitted = coef(0);
  }
  const double rel = std::abs(fitted - direct) / std::abs(direct);
  if (cross_check_rel) *cross_check_rel = rel;
  if (rel > 0.01)
    throw FitDivergence("residue extraction: methods disagree by " +
                        std::to_string(rel));
  return direct;
}

enum class RecombRegime { FeshbachExact, DeepEstimate };

inline const char* to_string(RecombRegime r) {
  return r == RecombRegime::FeshbachExact ? "feshbach_exact" : "deep_estimate";
}

struct RecombinationResult {
  double alpha = 0.0;        // reduced units
  double alpha_cm6_s = 0.0;  // converted; 0 for purely reduced models
  RecombRegime regime = RecombRegime::FeshbachExact;
  double gamma_abs = 0.0;    // |residue| at the dimer pole (FeshbachExact)
  double p_closed = 0.0;
  double P_less = 0.0;       // short-range probability (DeepEstimate)
};

// Exact pathway: recombination into the shallow Feshbach dimer,
// alpha = 2 sqrt(3) q_dim^3 |gamma|^2 / (9 pi p_closed). The physical
// residue gamma follows from the solved one through the closed-channel
// amplitude relation (2 Lambda/g0)/(W - nu - E_dim).
inline RecombinationResult alpha_feshbach(const Model& m, double B,
                                          std::size_t n = 400,
                                          double K_min = -1.0,
                                          double K_max = -1.0,
                                          double* residue_cross = nullptr) {
  const DrivenSolution sol = solve_driven(m, B, n, K_min, K_max);
  const double nu = m.nu(B);
  const std::complex<double> g_eff = extract_residue(sol, residue_cross);
  const std::complex<double> gamma =
      g_eff * (2.0 * m.couplings.lambda / m.couplings.g0) /
      (m.W - nu - sol.E_dim);
  const double q = std::sqrt(sol.E_dim);
  const double pc = closed_channel_fraction(m, -sol.E_dim, nu);
  RecombinationResult r;
  r.regime = RecombRegime::FeshbachExact;
  r.gamma_abs = std::abs(gamma);
  r.p_closed = pc;
  r.alpha = 2.0 * std::sqrt(3.0) * q * q * q * r.gamma_abs * r.gamma_abs /
            (9.0 * detail::kPi * pc);
  r.alpha_cm6_s = r.alpha * m.units.alpha_cm6_s();
  return r;
}

// Fourier transform of a Gaussian form factor over a Yukawa denominator:
// V(x; kappa, b) = int d^3k/(2pi)^3 e^{ik.x} e^{-k^2 b^2/2}/(k^2 + kappa^2),
// in closed form via erfcx (stable for all kappa x).
inline double smeared_yukawa(double x, double kappa, double b) {
  const double A = kappa * b / std::sqrt(2.0);
  const double Bx = x / (std::sqrt(2.0) * b);
  const double gauss = std::exp(-0.5 * x * x / (b * b));
  const double term2 = erfcx(A + Bx) * gauss;
  double term1;
  if (A >= Bx)
    term1 = erfcx(A - Bx) * gauss;
  else
    term1 = 2.0 * std::exp(0.5 * kappa * kappa * b * b - kappa * x) -
            erfcx(Bx - A) * gauss;
  return (term1 - term2) / (8.0 * detail::kPi * x);
}

// Dimensional estimate for nu > 0 (no shallow dimer): recombination to deep
// molecular states scales with the probability P_< of finding the three
// atoms (or the atom-molecule pair in the closed channel) within a short
// range R_cut = r_cut_factor * R_vdW, alpha = P_< L^6 / R_vdW^2 with the box
// volume cancelling. Only the scattered/admixed parts of the wavefunction
// count; the uniform incoming background is excluded. Proportionality
// constant set to 1: qualitative by construction.
inline RecombinationResult alpha_deep(const Model& m, double B,
                                      double r_cut_factor = 1.0,
                                      std::size_t n = 400,
                                      double L_over_RvdW = 100.0,
                                      int angular_order = 40) {
  const double nu = m.nu(B);
  const double a = m.scattering_length(B);
  const auto ds = find_dimers(m, nu);
  if (!ds.empty())
    throw ShallowDimerPresent(m.label +
                              ": deep estimate invalid, dimer present");
  if (std::abs(m.W - nu) < 1e-12 * std::max(std::abs(m.W), 1.0))
    throw ChannelPole(m.label + ": bare molecule at threshold (nu = W)");
  const double K_min = 1e-6 / m.b, K_max = 12.0 / m.b;
  MomentumGrid grid = MomentumGrid::log_spaced(n, K_min, K_max);
  const std::size_t nn = grid.size();
  const double c0t = delta_coefficient(a);

  // real driven system: no dimer, D never vanishes, no pole machinery
  std::vector<double> D(nn);
  for (std::size_t j = 0; j < nn; ++j)
    D[j] = kernel_diagonal(m, grid.k[j], 0.0, nu);
  Eigen::MatrixXd A = Eigen::MatrixXd::Identity(nn, nn);
  Eigen::VectorXd src(nn);
  for (std::size_t i = 0; i < nn; ++i) {
    const double Ki = grid.k[i];
    for (std::size_t j = 0; j < nn; ++j) {
      const double cij = grid.k[j] * grid.k[j] /
                         (2.0 * detail::kPi * detail::kPi) *
                         swave_kernel(Ki, grid.k[j], 0.0, m.b, angular_order);
      A(i, j) -= grid.w[j] * cij / D[j];
    }
    src(i) = 2.0 * c0t * form_factor(0.5 * Ki, m.b) * form_factor(Ki, m.b) /
             (Ki * Ki);
  }
  Eigen::VectorXd phi = A.partialPivLu().solve(src);
  Eigen::VectorXd beta_s(nn);
  for (std::size_t j = 0; j < nn; ++j) beta_s(j) = phi(j) / D[j];

  const double R_cut = r_cut_factor * m.R_vdW;
  const double L = L_over_RvdW * m.R_vdW;  // cancels in alpha

  // closed-channel atom-molecule amplitude: beta(K) relates to the scaled
  // unknown through (2 Lambda/g0)/(W - nu + E_rel), E_rel = -3K^2/4 at E=0
  const double cl_pref = 2.0 * m.couplings.lambda / m.couplings.g0;
  const double beta_delta = cl_pref * c0t / (m.W - nu);
  const int n_y = 80;
  const QuadRule yr = gauss_legendre(n_y, 0.0, R_cut);
  double I_closed = 0.0;
  for (int iy = 0; iy < n_y; ++iy) {
    const double y = yr.x[iy];
    double psi = beta_delta;
    for (std::size_t j = 0; j < nn; ++j) {
      const double K = grid.k[j];
      const double denom = m.W - nu - 0.75 * K * K;
      psi += grid.w[j] * K * std::sin(K * y) / y /
             (2.0 * detail::kPi * detail::kPi) * cl_pref * beta_s(j) / denom;
    }
    I_closed += yr.w[iy] * 4.0 * detail::kPi * y * y * psi * psi;
  }

  // open-channel scattered part on the hyperdisk rho^2 = x^2/2 + 2y^2/3
  // below R_cut; x is the pair separation, y the third atom's distance
  const double x_max = R_cut * std::sqrt(2.0);
  const double y_max = R_cut * std::sqrt(1.5);
  const int n_x = 60, n_y2 = 60;
  const QuadRule xr = gauss_legendre(n_x, 0.0, x_max);
  const QuadRule yr2 = gauss_legendre(n_y2, 0.0, y_max);
  // precompute V(x; kappa_j, b) per x node, kappa = sqrt(3) K/2 at E = 0
  std::vector<std::vector<double>> Vx(n_x, std::vector<double>(nn));
  std::vector<double> V0(n_x);
  for (int ix = 0; ix < n_x; ++ix) {
    const double x = xr.x[ix];
    V0[ix] = smeared_yukawa(x, 0.0, m.b);
    for (std::size_t j = 0; j < nn; ++j)
      Vx[ix][j] =
          smeared_yukawa(x, std::sqrt(3.0) * grid.k[j] / 2.0, m.b);
  }
  double I_open = 0.0;
  for (int iy = 0; iy < n_y2; ++iy) {
    const double y = yr2.x[iy];
    std::vector<double> cy(nn);
    for (std::size_t j = 0; j < nn; ++j) {
      const double K = grid.k[j];
      cy[j] = grid.w[j] * K * std::sin(K * y) / y /
              (2.0 * detail::kPi * detail::kPi) * beta_s(j);
    }
    for (int ix = 0; ix < n_x; ++ix) {
      const double x = xr.x[ix];
      if (0.5 * x * x + 2.0 * y * y / 3.0 > R_cut * R_cut) continue;
      double psi = c0t * V0[ix];
      for (std::size_t j = 0; j < nn; ++j) psi += cy[j] * Vx[ix][j];
      I_open += xr.w[ix] * yr2.w[iy] * 16.0 * detail::kPi * detail::kPi *
                x * x * y * y * psi * psi;
    }
  }

  RecombinationResult r;
  r.regime = RecombRegime::DeepEstimate;
  r.P_less = (I_closed + I_open) / (L * L * L * L * L * L);
  r.alpha = r.P_less * (L * L * L * L * L * L) / (m.R_vdW * m.R_vdW);
  r.alpha_cm6_s = r.alpha * m.units.alpha_cm6_s();
  r.p_closed = 0.0;
  return r;
}

// Zero-range two-channel reference at E = 0: diagonal
// (q_r - 1/a + R* q_r^2)/(4 pi) with q_r = sqrt(3) K/2, contact kernel.
// q_dim solves the effective-range pole equation exactly; the residue maps
// to the physical one through the closed-channel norm sqrt(R*/(2 pi)).
inline double alpha_effective_range_reference(double a, double R_star,
                                              std::size_t n = 500,
                                              double K_max_factor = 3000.0) {
  if (a <= 0.0)
    throw NoShallowDimer("effective-range reference: needs a > 0");
  const double q = (std::sqrt(1.0 + 4.0 * R_star / a) - 1.0) / (2.0 * R_star);
  const double p = 2.0 * q / std::sqrt(3.0);
  const double K_max =
      K_max_factor * std::max({q, 1.0 / a, 0.01 / R_star});
  const double K_min = 1e-6 * q;
  MomentumGrid grid = MomentumGrid::log_spaced(n, K_min, K_max);
  const std::size_t nn = grid.size();
  const auto& nodes = grid.k;
  const auto& wts = grid.w;
  std::vector<double> D(nn);
  for (std::size_t j = 0; j < nn; ++j) {
    const double qr = std::sqrt(0.75) * nodes[j];
    D[j] = (qr - 1.0 / a + R_star * qr * qr) / (4.0 * detail::kPi);
  }
  const double qr_p = std::sqrt(0.75) * p;
  const double Dp =
      (1.0 + 2.0 * R_star * qr_p) * std::sqrt(3.0) / (8.0 * detail::kPi);
  const double c0t = delta_coefficient(a);
  double pv_sum = 0.0;
  for (std::size_t j = 0; j < nn; ++j) pv_sum += wts[j] / (nodes[j] - p);
  const std::complex<double> pv_tail(std::log((K_max - p) / p),
                                     detail::kPi);
  const std::size_t N = nn + 1;
  Eigen::MatrixXcd A = Eigen::MatrixXcd::Zero(N, N);
  Eigen::VectorXcd src(N);
  auto fill_row = [&](std::size_t i, double Ki) {
    A(i, i) += 1.0;
    for (std::size_t j = 0; j < nn; ++j) {
      const double cij = nodes[j] * nodes[j] /
                         (2.0 * detail::kPi * detail::kPi) *
                         swave_kernel_contact(Ki, nodes[j], 0.0);
      A(i, j) -= wts[j] * cij / D[j];
    }
    const double cip = p * p / (2.0 * detail::kPi * detail::kPi) *
                       swave_kernel_contact(Ki, p, 0.0);
    A(i, nn) += (pv_sum - pv_tail) * (cip / Dp);
    src(i) = 2.0 * c0t / (Ki * Ki);
  };
  for (std::size_t i = 0; i < nn; ++i) fill_row(i, nodes[i]);
  fill_row(nn, p);
  Eigen::VectorXcd phi = A.partialPivLu().solve(src);
  const std::complex<double> gamma =
      phi(nn) / Dp * std::sqrt(R_star / (2.0 * detail::kPi));
  const double pc = 2.0 * q * R_star / (1.0 + 2.0 * q * R_star);
  const double g2 = std::norm(gamma);
  return 2.0 * std::sqrt(3.0) * q * q * q * g2 / (9.0 * detail::kPi * pc);
}

}  // namespace fewbose
