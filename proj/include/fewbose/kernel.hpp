#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <cstdint>
#include <limits>
#include <cstdio>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include "fewbose/quadrature.hpp"
#include "fewbose/twobody.hpp"
#include "fewbose/units.hpp"

namespace fewbose {

namespace detail {

// Run fn(i) for i in [0, n) across nthreads (0 = hardware concurrency).
template <class F>
inline void parallel_for(std::size_t n, int nthreads, F&& fn) {
  unsigned hw = std::thread::hardware_concurrency();
  unsigned t = nthreads > 0 ? static_cast<unsigned>(nthreads)
                            : (hw > 0 ? hw : 1u);
  if (t <= 1 || n < 2) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  if (t > n) t = static_cast<unsigned>(n);
  std::vector<std::thread> pool;
  pool.reserve(t);
  for (unsigned w = 0; w < t; ++w) {
    pool.emplace_back([=, &fn]() {
      for (std::size_t i = w; i < n; i += t) fn(i);
    });
  }
  for (auto& th : pool) th.join();
}

}  // namespace detail

// Angular average of the exchange term between relative momenta K and k at
// total energy E (reduced units, eps_q = q^2/2 so the breakup denominator is
// k^2 + K^2 + K k u - E):
//   swave_kernel = int_{-1}^{1} du exp(-b^2 [(5/4)(K^2+k^2) + 2 K k u]/2)
//                               / (k^2 + K^2 + K k u - E).
// Gauss-Legendre in u; the Gaussian oscillates on scale 1/(K k b^2), so the
// panel count grows with K k b^2; panels are also added when the denominator
// gets close to zero.
inline double swave_kernel(double K, double k, double E, double b,
                           int order = 40) {
  const double c = K * k;
  const double d0 = k * k + K * K - E;  // denominator at u = 0 shift
  const double dmin = d0 - c;           // u = -1
  if (dmin <= 0.0)
    throw ThresholdSingular("swave_kernel: breakup denominator vanishes");
  const double pre = -0.5 * b * b;
  const double g0 = 1.25 * (K * K + k * k);
  int panels = 1 + static_cast<int>(c * b * b / 15.0);
  if (dmin < 1e-3 * d0) panels += 8;
  double total = 0.0;
  for (int p = 0; p < panels; ++p) {
    const double u0 = -1.0 + 2.0 * p / panels;
    const double u1 = -1.0 + 2.0 * (p + 1) / panels;
    static thread_local int cached_order = -1;
    static thread_local QuadRule rule;
    if (cached_order != order) {
      rule = gauss_legendre(order, 0.0, 1.0);
      cached_order = order;
    }
    for (int i = 0; i < order; ++i) {
      const double u = u0 + (u1 - u0) * rule.x[i];
      total += rule.w[i] * (u1 - u0) * std::exp(pre * (g0 + 2.0 * c * u)) /
               (d0 + c * u);
    }
  }
  return total;
}

// Zero-range (contact) limit of swave_kernel: the angular integral done
// analytically with unit form factors.
inline double swave_kernel_contact(double K, double k, double E) {
  const double s = K * K + k * k - E;
  if (s - K * k <= 0.0)
    throw ThresholdSingular("swave_kernel_contact: denominator vanishes");
  return std::log((s + K * k) / (s - K * k)) / (K * k);
}

// Discretized operator of the three-body integral equation at total energy E:
//   M_ij = delta_ij D(K_i) - w_j k_j^2/(2 pi^2) swave_kernel(K_i, k_j, E),
// with diagonal D(K) = |chi|^2 / (4 pi f(E_rel)) = G(E_rel)/(4 pi) at
// E_rel = E - (3/4) K^2; the form-factor square cancels the exponential
// scaling of 1/f exactly.
struct KernelMatrix {
  Eigen::MatrixXd M;
  double E = 0.0;
  double B = 0.0;  // gauss (or the reduced field proxy)
  double b = 1.0;
  double K_max = 0.0;
};

inline double kernel_diagonal(const Model& m, double K, double E, double nu) {
  double E_rel = E - 0.75 * K * K;
  if (E_rel >= 0.0)
    throw ThresholdSingular("kernel diagonal: E_rel above breakup threshold");
  // a grid node can land (to rounding) on the bare-molecule pole during root
  // bisection; a small relative shift keeps the value huge but finite, and
  // the pole-band artifacts are filtered downstream anyway
  const double pole_guard = 1e-12 * (std::abs(nu) + m.W + std::abs(E_rel));
  if (std::abs(E_rel - nu + m.W) < pole_guard) E_rel -= 2.0 * pole_guard;
  return scaled_inverse_f(m, E_rel, nu) / (4.0 * detail::kPi);
}

inline KernelMatrix assemble(const Model& m, double B, double E,
                             const MomentumGrid& grid, int angular_order = 40,
                             int nthreads = 1) {
  const double nu = m.nu(B);
  const std::size_t n = grid.size();
  KernelMatrix km;
  km.E = E;
  km.B = B;
  km.b = m.b;
  km.K_max = grid.k_max;
  km.M.resize(n, n);
  detail::parallel_for(n, nthreads, [&](std::size_t i) {
    const double K = grid.k[i];
    for (std::size_t j = 0; j < n; ++j) {
      const double k = grid.k[j];
      km.M(i, j) = -grid.w[j] * k * k / (2.0 * detail::kPi * detail::kPi) *
                   swave_kernel(K, k, E, m.b, angular_order);
    }
    km.M(i, i) += kernel_diagonal(m, K, E, nu);
  });
  return km;
}

// Same operator after the similarity transform with s_i = sqrt(w_i k_i^2):
// S_ij = delta_ij D(K_i) - s_i s_j/(2 pi^2) swave_kernel(K_i, K_j, E).
// Symmetric, same spectrum; only the upper triangle is evaluated.
inline KernelMatrix assemble_symmetric(const Model& m, double B, double E,
                                       const MomentumGrid& grid,
                                       int angular_order = 40,
                                       int nthreads = 1) {
  const double nu = m.nu(B);
  const std::size_t n = grid.size();
  std::vector<double> s(n);
  for (std::size_t i = 0; i < n; ++i)
    s[i] = std::sqrt(grid.w[i]) * grid.k[i];
  KernelMatrix km;
  km.E = E;
  km.B = B;
  km.b = m.b;
  km.K_max = grid.k_max;
  km.M.resize(n, n);
  detail::parallel_for(n, nthreads, [&](std::size_t i) {
    const double K = grid.k[i];
    for (std::size_t j = i; j < n; ++j) {
      const double v = -s[i] * s[j] / (2.0 * detail::kPi * detail::kPi) *
                       swave_kernel(K, grid.k[j], E, m.b, angular_order);
      km.M(i, j) = v;
      km.M(j, i) = v;
    }
    km.M(i, i) += kernel_diagonal(m, K, E, nu);
  });
  return km;
}

// Zero-range two-channel (effective-range) counterpart on the same grid:
// diagonal (1/(4 pi)) (q_r - 1/a + R* q_r^2), q_r = sqrt(3K^2/4 - E),
// contact kernel. Serves as the b -> 0 reference; R* = 0, 1/a = 0 gives the
// Skorniakov-Ter-Martirosian operator at unitarity.
inline KernelMatrix assemble_effective_range(double inv_a, double R_star,
                                             double E,
                                             const MomentumGrid& grid,
                                             bool symmetric = false) {
  const std::size_t n = grid.size();
  KernelMatrix km;
  km.E = E;
  km.B = 0.0;
  km.b = 0.0;
  km.K_max = grid.k_max;
  km.M.resize(n, n);
  for (std::size_t i = 0; i < n; ++i) {
    const double K = grid.k[i];
    for (std::size_t j = 0; j < n; ++j) {
      const double k = grid.k[j];
      const double fac = symmetric ? std::sqrt(grid.w[i]) * grid.k[i] *
                                         std::sqrt(grid.w[j]) * grid.k[j]
                                   : grid.w[j] * k * k;
      km.M(i, j) = -fac / (2.0 * detail::kPi * detail::kPi) *
                   swave_kernel_contact(K, k, E);
    }
    const double qr2 = 0.75 * K * K - E;
    if (qr2 <= 0.0)
      throw ThresholdSingular("effective-range diagonal above threshold");
    const double qr = std::sqrt(qr2);
    km.M(i, i) += (qr - inv_a + R_star * qr2) / (4.0 * detail::kPi);
  }
  return km;
}

// Debug dump: little-endian doubles, 8-value header
// {n, K_max, E, B, b, 0, 0, 0} followed by the n*n entries row-major.
inline void dump_matrix(const KernelMatrix& km, const std::string& path) {
  std::FILE* fp = std::fopen(path.c_str(), "wb");
  if (!fp) throw std::runtime_error("dump_matrix: cannot open " + path);
  const std::size_t n = static_cast<std::size_t>(km.M.rows());
  double header[8] = {static_cast<double>(n), km.K_max, km.E, km.B, km.b,
                      0.0,                    0.0,      0.0};
  std::fwrite(header, sizeof(double), 8, fp);
  for (std::size_t i = 0; i < n; ++i)
    std::fwrite(km.M.row(i).eval().data(), sizeof(double), n, fp);
  std::fclose(fp);
}

}  // namespace fewbose
