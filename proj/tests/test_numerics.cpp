#include "doctest.h"

#include <cmath>
#include <vector>

#include "nescape/errors.hpp"
#include "nescape/linalg.hpp"
#include "nescape/quadrature.hpp"
#include "nescape/rng.hpp"

using namespace nescape;

TEST_CASE("stream is a pure function of seed and stream id") {
  rng::Stream a(42, 7), b(42, 7);
  for (int i = 0; i < 1000; ++i) CHECK(a.next_u64() == b.next_u64());

  rng::Stream g1(42, 7), g2(42, 7);
  for (int i = 0; i < 1000; ++i) CHECK(g1.gaussian() == g2.gaussian());

  // Counter-based draws: interleaving another stream changes nothing.
  rng::Stream lone(9, 0), inter(9, 0), other(9, 1);
  for (int i = 0; i < 100; ++i) {
    (void)other.uniform();
    CHECK(lone.uniform() == inter.uniform());
  }
}

TEST_CASE("distinct seeds and streams decorrelate") {
  rng::Stream a(1, 0), b(2, 0), c(1, 1);
  int eq_ab = 0, eq_ac = 0;
  for (int i = 0; i < 1000; ++i) {
    const std::uint64_t x = a.next_u64();
    if (x == b.next_u64()) ++eq_ab;
    if (x == c.next_u64()) ++eq_ac;
  }
  CHECK(eq_ab == 0);
  CHECK(eq_ac == 0);
}

TEST_CASE("uniform draws live in [0,1) with the right first moments") {
  rng::Stream s(123, 0);
  const int n = 200000;
  double sum = 0, sumsq = 0;
  for (int i = 0; i < n; ++i) {
    const double u = s.uniform();
    CHECK(u >= 0.0);
    CHECK(u < 1.0);
    sum += u;
    sumsq += u * u;
  }
  const double mean = sum / n;
  const double var = sumsq / n - mean * mean;
  // 5 sigma bands: sd(mean) = 1/sqrt(12 n).
  CHECK(std::abs(mean - 0.5) < 5.0 / std::sqrt(12.0 * n));
  CHECK(std::abs(var - 1.0 / 12.0) < 5e-4);
}

TEST_CASE("gaussian moments up to the fourth") {
  rng::Stream s(77, 3);
  const int n = 400000;
  double m1 = 0, m2 = 0, m3 = 0, m4 = 0;
  for (int i = 0; i < n; ++i) {
    const double g = s.gaussian();
    m1 += g;
    m2 += g * g;
    m3 += g * g * g;
    m4 += g * g * g * g;
  }
  m1 /= n;
  m2 /= n;
  m3 /= n;
  m4 /= n;
  // 5 sigma bands with sd(m1)=1/sqrt(n), sd(m2)=sqrt(2/n), sd(m3)=sqrt(15/n),
  // sd(m4)=sqrt(96/n).
  CHECK(std::abs(m1) < 5.0 / std::sqrt(1.0 * n));
  CHECK(std::abs(m2 - 1.0) < 5.0 * std::sqrt(2.0 / n));
  CHECK(std::abs(m3) < 5.0 * std::sqrt(15.0 / n));
  CHECK(std::abs(m4 - 3.0) < 5.0 * std::sqrt(96.0 / n));
}

TEST_CASE("gaussian tails are populated") {
  // The rare-path fallback must actually fire: P(|g| > 3.2) ~ 1.37e-3.
  rng::Stream s(5, 0);
  int far = 0;
  const int n = 200000;
  for (int i = 0; i < n; ++i)
    if (std::abs(s.gaussian()) > 3.2) ++far;
  CHECK(far > 150);
  CHECK(far < 420);
}

TEST_CASE("gauss-legendre integrates polynomials to machine precision") {
  // n-point rule is exact through degree 2n-1.
  auto poly = [](double x) {
    return 3.0 * std::pow(x, 9) - 2.0 * std::pow(x, 6) + x * x - 0.25;
  };
  // Exact over [-1, 1]: odd terms drop, 2 * (-2/7 + 1/3 - 1/4).
  const double exact = 2.0 * (-2.0 / 7.0 + 1.0 / 3.0 - 0.25);
  const double got = quadrature::integrate_gauss(poly, -1.0, 1.0, 5);
  CHECK(got == doctest::Approx(exact).epsilon(1e-14));

  const double shifted = quadrature::integrate_gauss(
      [](double x) { return x * x * x - x; }, 0.5, 2.5, 4);
  // Antiderivative x^4/4 - x^2/2 between 0.5 and 2.5.
  const double ref = (std::pow(2.5, 4) / 4 - 2.5 * 2.5 / 2) -
                     (std::pow(0.5, 4) / 4 - 0.5 * 0.5 / 2);
  CHECK(shifted == doctest::Approx(ref).epsilon(1e-14));
}

TEST_CASE("gauss-legendre weights sum to the interval length") {
  for (int n : {8, 32, 96, 200}) {
    const auto& r = quadrature::gauss_legendre(n);
    double s = 0;
    for (double w : r.weights) s += w;
    CHECK(s == doctest::Approx(2.0).epsilon(1e-13));
  }
}

TEST_CASE("tanh-sinh absorbs endpoint singularities") {
  // int_0^1 1/sqrt(x) dx = 2, integrable singularity at the left end.
  // The rule drops nodes that round into the endpoints, which truncates the
  // mass of x^(-1/2) below x ~ 1e-16: about 2 sqrt(1e-16) = 2e-8. That floor
  // is the accuracy limit for inverse-square-root singularities.
  const double inv_sqrt = quadrature::integrate_tanh_sinh(
      [](double x) { return 1.0 / std::sqrt(x); }, 0.0, 1.0);
  CHECK(inv_sqrt == doctest::Approx(2.0).epsilon(2e-7));

  // int_0^1 log(x) dx = -1.
  const double logint = quadrature::integrate_tanh_sinh(
      [](double x) { return std::log(x); }, 0.0, 1.0);
  CHECK(logint == doctest::Approx(-1.0).epsilon(1e-8));

  // Smooth case for sanity: int_0^pi sin = 2.
  const double smooth = quadrature::integrate_tanh_sinh(
      [](double x) { return std::sin(x); }, 0.0, std::acos(-1.0));
  CHECK(smooth == doctest::Approx(2.0).epsilon(1e-12));
}

TEST_CASE("lu_solve handles a known system and reports conditioning") {
  // 3x3 with known solution (1, -2, 3).
  std::vector<double> A = {2, 1, -1, -3, -1, 2, -2, 1, 2};
  std::vector<double> x_true = {1, -2, 3};
  std::vector<double> b(3, 0.0);
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) b[i] += A[static_cast<std::size_t>(3 * i + j)] * x_true[j];
  double rcond = 0;
  const std::vector<double> x = linalg::lu_solve(A, b, 3, &rcond);
  for (int i = 0; i < 3; ++i) CHECK(x[i] == doctest::Approx(x_true[i]).epsilon(1e-12));
  CHECK(rcond > 0.0);
  CHECK(rcond <= 1.0);
}

TEST_CASE("lu_solve needs pivoting and rejects singular systems") {
  // Zero leading pivot: only row exchange solves this one.
  std::vector<double> A = {0, 1, 1, 0};
  const std::vector<double> x = linalg::lu_solve(A, {3, 5}, 2);
  CHECK(x[0] == doctest::Approx(5.0).epsilon(1e-14));
  CHECK(x[1] == doctest::Approx(3.0).epsilon(1e-14));

  std::vector<double> S = {1, 2, 2, 4};
  CHECK_THROWS_AS(linalg::lu_solve(S, {1, 2}, 2), SingularMatrixError);
}

TEST_CASE("fit_line recovers an affine relation exactly") {
  std::vector<double> xs, ys;
  for (int i = 0; i < 12; ++i) {
    xs.push_back(0.3 * i - 1.0);
    ys.push_back(2.5 * xs.back() - 0.75);
  }
  const linalg::LineFit f = linalg::fit_line(xs, ys);
  CHECK(f.slope == doctest::Approx(2.5).epsilon(1e-13));
  CHECK(f.intercept == doctest::Approx(-0.75).epsilon(1e-13));
}
