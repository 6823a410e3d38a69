#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "fewbose/quadrature.hpp"

using namespace fewbose;

TEST_CASE("Gauss-Legendre nodes and weights") {
  const QuadRule r = gauss_legendre(2, -1.0, 1.0);
  CHECK(r.x[0] == Catch::Approx(-1.0 / std::sqrt(3.0)).epsilon(1e-14));
  CHECK(r.x[1] == Catch::Approx(1.0 / std::sqrt(3.0)).epsilon(1e-14));
  CHECK(r.w[0] == Catch::Approx(1.0).epsilon(1e-14));

  // order n integrates polynomials up to degree 2n-1 exactly
  const QuadRule r8 = gauss_legendre(8, 0.0, 2.0);
  double s = 0.0;
  for (std::size_t i = 0; i < r8.size(); ++i)
    s += r8.w[i] * std::pow(r8.x[i], 15);
  CHECK(s == Catch::Approx(std::pow(2.0, 16) / 16.0).epsilon(1e-13));
}

TEST_CASE("momentum grid invariants") {
  const auto g = MomentumGrid::log_spaced(400, 1e-6, 12.0);
  REQUIRE(g.size() >= 400);
  for (std::size_t i = 0; i < g.size(); ++i) {
    CHECK(g.k[i] > 0.0);
    CHECK(g.w[i] > 0.0);
    if (i) CHECK(g.k[i] > g.k[i - 1]);
  }
  CHECK(g.k.front() >= 1e-6);
  CHECK(g.k.back() <= 12.0);
}

TEST_CASE("momentum grid integrates a smooth Gaussian to 1e-10") {
  // reference from a very high-order rule on the same interval
  const QuadRule ref = gauss_legendre(2000, 1e-6, 12.0);
  double exact = 0.0;
  for (std::size_t i = 0; i < ref.size(); ++i)
    exact += ref.w[i] * ref.x[i] * ref.x[i] * std::exp(-0.5 * ref.x[i] * ref.x[i]);
  for (std::size_t n : {std::size_t(400), std::size_t(600)}) {
    const auto g = MomentumGrid::log_spaced(n, 1e-6, 12.0);
    double s = 0.0;
    for (std::size_t i = 0; i < g.size(); ++i)
      s += g.w[i] * g.k[i] * g.k[i] * std::exp(-0.5 * g.k[i] * g.k[i]);
    CHECK(std::abs(s - exact) / exact < 1e-10);
  }
}

TEST_CASE("grid rejects bad parameters") {
  CHECK_THROWS_AS(MomentumGrid::log_spaced(100, -1.0, 12.0),
                  std::invalid_argument);
  CHECK_THROWS_AS(MomentumGrid::log_spaced(100, 1.0, 0.5),
                  std::invalid_argument);
  CHECK_THROWS_AS(gauss_legendre(0, 0.0, 1.0), std::invalid_argument);
}
