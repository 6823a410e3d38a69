#pragma once

#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <vector>

namespace fewbose {

struct QuadRule {
  std::vector<double> x;  // nodes
  std::vector<double> w;  // weights
  std::size_t size() const { return x.size(); }
};

// Gauss-Legendre rule on [x1, x2], Newton iteration on the Legendre
// polynomial roots.
inline QuadRule gauss_legendre(int n, double x1, double x2) {
  if (n < 1) throw std::invalid_argument("gauss_legendre: n < 1");
  QuadRule r;
  r.x.resize(n);
  r.w.resize(n);
  const int m = (n + 1) / 2;
  const double xm = 0.5 * (x2 + x1);
  const double xl = 0.5 * (x2 - x1);
  for (int i = 0; i < m; ++i) {
    double z = std::cos(M_PI * (i + 0.75) / (n + 0.5));
    double pp = 0.0;
    for (int it = 0; it < 100; ++it) {
      double p1 = 1.0, p2 = 0.0;
      for (int j = 0; j < n; ++j) {
        const double p3 = p2;
        p2 = p1;
        p1 = ((2.0 * j + 1.0) * z * p2 - j * p3) / (j + 1.0);
      }
      pp = n * (z * p1 - p2) / (z * z - 1.0);
      const double z1 = z;
      z = z1 - p1 / pp;
      if (std::abs(z - z1) < 1e-15) break;
    }
    r.x[i] = xm - xl * z;
    r.x[n - 1 - i] = xm + xl * z;
    r.w[i] = 2.0 * xl / ((1.0 - z * z) * pp * pp);
    r.w[n - 1 - i] = r.w[i];
  }
  return r;
}

// Momentum grid: Gauss-Legendre panels equispaced in log k. Weights include
// the Jacobian of the log map, so sums over (x_i, w_i) integrate dk directly.
struct MomentumGrid {
  std::vector<double> k;
  std::vector<double> w;
  double k_min = 0.0;
  double k_max = 0.0;
  std::size_t size() const { return k.size(); }

  static MomentumGrid log_spaced(std::size_t n, double k_min, double k_max,
                                 int panel_order = 10) {
    if (k_min <= 0.0 || k_max <= k_min)
      throw std::invalid_argument("MomentumGrid: need 0 < k_min < k_max");
    if (panel_order < 2) throw std::invalid_argument("MomentumGrid: order < 2");
    const std::size_t panels =
        (n + static_cast<std::size_t>(panel_order) - 1) / panel_order;
    const double t0 = std::log(k_min), t1 = std::log(k_max);
    MomentumGrid g;
    g.k_min = k_min;
    g.k_max = k_max;
    g.k.reserve(panels * panel_order);
    g.w.reserve(panels * panel_order);
    const QuadRule base = gauss_legendre(panel_order, 0.0, 1.0);
    for (std::size_t p = 0; p < panels; ++p) {
      const double a = t0 + (t1 - t0) * static_cast<double>(p) / panels;
      const double bdry = t0 + (t1 - t0) * static_cast<double>(p + 1) / panels;
      for (int i = 0; i < panel_order; ++i) {
        const double t = a + (bdry - a) * base.x[i];
        const double kk = std::exp(t);
        g.k.push_back(kk);
        g.w.push_back(base.w[i] * (bdry - a) * kk);
      }
    }
    return g;
  }
};

}  // namespace fewbose
