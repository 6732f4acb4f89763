#include "doctest.h"

#include <cmath>

#include "nescape/asymptotics.hpp"
#include "nescape/errors.hpp"
#include "nescape/helmholtz.hpp"
#include "nescape/quadrature.hpp"

using namespace nescape;
using namespace nescape::helmholtz;

namespace {
const double kPi = std::acos(-1.0);

// Left side of the disk equation at radius rho, rebuilt independently of the
// solver: the angular integral of the Coulomb kernel is an elliptic integral,
// 2 K(k) / (pi (r + rho)) with k = 2 sqrt(r rho)/(r + rho), and of the log
// kernel 2 pi log max(r, rho). Splitting the radial range at rho puts the
// ring singularity and the edge of the disk at panel endpoints, where the
// double-exponential rule absorbs them.
double apply_operator(const DiskSolution& sol, double rho) {
  auto integrand = [&](double r) {
    // The modulus rounds to 1 for nodes within machine precision of the ring;
    // their weights are ~1e-16, so capping just below 1 costs nothing while
    // keeping K finite.
    const double k = std::min(2.0 * std::sqrt(r * rho) / (r + rho), 1.0 - 1e-14);
    const double ring = 2.0 * std::comp_ellint_1(k) / (kPi * (r + rho));
    const double logring = 2.0 * kPi * std::log(std::max(r, rho));
    return sol.density(r) * r * (ring + sol.H * logring);
  };
  return quadrature::integrate_tanh_sinh(integrand, 0.0, rho, 160) +
         quadrature::integrate_tanh_sinh(integrand, rho, sol.a, 160);
}
} // namespace

TEST_CASE("flat-kernel flux reproduces the disk capacitance") {
  const struct {
    double a, C;
  } cases[] = {{1.0, 1.0}, {0.5, 1.0}, {0.01, 3.0}};
  for (const auto& c : cases) {
    const DiskSolution sol = solve_disk(c.a, 0.0, c.C);
    CHECK(sol.total_flux == doctest::Approx(-4.0 * c.C * c.a).epsilon(1e-6));
  }
}

TEST_CASE("flat-kernel density is constant after removing the edge factor") {
  const double a = 0.5, C = 2.0;
  const DiskSolution sol = solve_disk(a, 0.0, C);
  const double expected = -2.0 * C / (a * kPi);
  for (double g : sol.ghat) CHECK(g == doctest::Approx(expected).epsilon(1e-10));
  CHECK(sol.density_hat(0.3 * a) == doctest::Approx(expected).epsilon(1e-10));
  // The edge factor divides by sqrt(1 - r^2/a^2).
  const double r = 0.8 * a;
  CHECK(sol.density(r) ==
        doctest::Approx(expected / std::sqrt(1.0 - r * r / (a * a))).epsilon(1e-10));
}

TEST_CASE("solution is linear in the boundary value") {
  const DiskSolution one = solve_disk(0.3, 0.2, 1.0);
  const DiskSolution two = solve_disk(0.3, 0.2, 2.0);
  CHECK(two.total_flux == doctest::Approx(2.0 * one.total_flux).epsilon(1e-12));
  for (int i = 0; i < one.n; ++i)
    CHECK(two.ghat[static_cast<std::size_t>(i)] ==
          doctest::Approx(2.0 * one.ghat[static_cast<std::size_t>(i)]).epsilon(1e-12));
}

TEST_CASE("node doubling leaves the flux unchanged") {
  const double a = 0.1, H = -0.3, C = 1.0;
  const double f16 = solve_disk(a, H, C, 16).total_flux;
  const double f32 = solve_disk(a, H, C, 32).total_flux;
  CHECK(f32 == doctest::Approx(f16).epsilon(1e-4));
  CHECK(std::abs(solve_disk(a, H, C, 64).total_flux - f32) <=
        std::abs(f32 - f16) + 1e-12 * std::abs(f32));
}

TEST_CASE("collocation solution satisfies the equation off the nodes") {
  const DiskSolution sol = solve_disk(0.5, 0.2, 1.0, 32);
  for (double frac : {0.31, 0.57, 0.83}) {
    const double lhs = apply_operator(sol, frac * sol.a);
    CHECK(std::abs(lhs - (-sol.C)) < 1e-6 * std::abs(sol.C));
  }
}

TEST_CASE("solver condition estimate and flux sign are sane") {
  const DiskSolution sol = solve_disk(0.2, 0.1, 1.0);
  CHECK(sol.rcond > 0.0);
  CHECK(sol.rcond <= 1.0);
  CHECK(sol.total_flux < 0.0);
}

TEST_CASE("flat-boundary escape time matches the leading order") {
  const double net = net_from_solver(1.0, 0.01, 1.0, 0.0);
  CHECK(net == doctest::Approx(1.0 / (4.0 * 0.01 * 1.0)).epsilon(1e-4));
}

TEST_CASE("solver time tracks the closed-form expansion at small radius") {
  const double ns = net_from_solver(1.0, 0.01, 1.0, 2.0);
  const double ng = asymptotics::net_general(1.0, 0.01, 1.0, 2.0).value;
  CHECK(ns == doctest::Approx(ng).epsilon(0.01));
}

TEST_CASE("first-order flux perturbation is exact in the small-H limit") {
  // The neglected term is second order in a H log a, ~11% of the ratio at
  // a = 0.1 and shrinking with the radius.
  const double H = 0.1;
  const struct {
    double a, bound;
  } cases[] = {{0.1, 0.15}, {0.03, 0.08}, {0.01, 0.04}};
  double prev_mismatch = 1e9;
  for (const auto& c : cases) {
    const double f0 = solve_disk(c.a, 0.0, 1.0).total_flux;
    const double fH = solve_disk(c.a, H, 1.0).total_flux;
    const double measured = fH / f0 - 1.0;
    const double exact = first_order_flux_ratio(c.a, H);
    const double mismatch = std::abs(measured - exact) / std::abs(exact);
    CHECK(mismatch < c.bound);
    CHECK(mismatch < prev_mismatch);
    prev_mismatch = mismatch;
  }
}

TEST_CASE("leading curvature correction constants") {
  CHECK(analytic_g1_ratio(0.01, 2.0) ==
        doctest::Approx(-0.0146587119775886).epsilon(1e-13));
  CHECK_THROWS_AS(analytic_g1_ratio(0.0, 2.0), InvalidInputError);
  CHECK_THROWS_AS(analytic_g1_ratio(1.0, 2.0), InvalidInputError);
}

TEST_CASE("solver input guards") {
  CHECK_THROWS_AS(solve_disk(0.0, 0.0, 1.0), InvalidInputError);
  CHECK_THROWS_AS(solve_disk(-1.0, 0.0, 1.0), InvalidInputError);
  CHECK_THROWS_AS(solve_disk(0.5, 0.0, 1.0, 4), InvalidInputError);
  // |H| a |log a| of order one: the perturbative factorization breaks.
  CHECK_THROWS_AS(solve_disk(0.5, 3.0, 1.0), RegimeError);

  CHECK_THROWS_AS(net_from_solver(0.0, 0.01, 1.0, 0.0), InvalidInputError);
  CHECK_THROWS_AS(net_from_solver(1.0, 2.0, 1.0, 0.0), RegimeError);

  const DiskSolution sol = solve_disk(0.5, 0.0, 1.0);
  CHECK_THROWS_AS(sol.density_hat(0.6), InvalidInputError);
  CHECK_THROWS_AS(sol.density_hat(-0.1), InvalidInputError);
  CHECK_THROWS_AS(sol.density(0.5), InvalidInputError);
}
