#include "doctest.h"

#include <cmath>
#include <vector>

#include "nescape/asymptotics.hpp"
#include "nescape/errors.hpp"

using namespace nescape;
using namespace nescape::asymptotics;

namespace {
const double kPi = std::acos(-1.0);
}

// Frozen high-precision evaluations of the closed forms, computed once with
// arbitrary-precision arithmetic and pinned here to 15 significant digits.
TEST_CASE("net expansions reproduce frozen closed-form values") {
  const NetExpansion g = net_general(1.0, 0.05, 1.0, 2.0);
  CHECK(g.value == doctest::Approx(5.25032808223440).epsilon(1e-13));
  CHECK(g.leading == doctest::Approx(5.0).epsilon(1e-15));
  CHECK(g.form == ExpansionForm::divided);
  CHECK(g.epsilon == doctest::Approx(0.05).epsilon(1e-15));
  CHECK(g.regime_ok);

  const NetExpansion b = net_ball(1.0, 0.1, 1.0);
  CHECK(b.value == doctest::Approx(11.2395038762973).epsilon(1e-13));
  CHECK(b.leading == doctest::Approx(10.4719755119660).epsilon(1e-13));
  CHECK(b.form == ExpansionForm::multiplied);
  CHECK(b.log_correction == doctest::Approx((0.1 / kPi) * std::log(10.0)).epsilon(1e-14));
  CHECK(b.regime_ok);

  const NetExpansion ev = eigenvalue_small_window(1.0, 0.05, 1.0, 2.0);
  CHECK(ev.value == doctest::Approx(0.190464288009679).epsilon(1e-13));

  CHECK(neumann_singular_part(0.01, 2.0) ==
        doctest::Approx(16.2819621086292).epsilon(1e-13));
}

TEST_CASE("eigenvalue is the literal reciprocal of the escape time") {
  const NetExpansion net = net_general(2.0, 0.03, 0.7, -1.5);
  const NetExpansion ev = eigenvalue_small_window(2.0, 0.03, 0.7, -1.5);
  // Bitwise identity, not approximate: the rate is defined as 1/net.
  CHECK(ev.value == 1.0 / net.value);
  // The reciprocal of the divided form is the multiplied form: reciprocal
  // leading, identical log term.
  CHECK(ev.leading == 1.0 / net.leading);
  CHECK(ev.log_correction == net.log_correction);
  CHECK(ev.form == ExpansionForm::multiplied);
  CHECK(ev.value == doctest::Approx(ev.leading * (1.0 + ev.log_correction)).epsilon(1e-15));
}

TEST_CASE("net_general is covariant under rescaling of length and diffusivity") {
  const double s = 2.7;
  const NetExpansion base = net_general(1.0, 0.05, 1.0, 2.0);
  // Lengths scaled by s: volume by s^3, radius by s, curvature by 1/s.
  // The log correction is dimensionless and unchanged; time scales by s^2.
  const NetExpansion scaled = net_general(s * s * s, 0.05 * s, 1.0, 2.0 / s);
  CHECK(scaled.log_correction == doctest::Approx(base.log_correction).epsilon(1e-13));
  CHECK(scaled.value == doctest::Approx(s * s * base.value).epsilon(1e-13));

  // Doubling D halves the time exactly; the correction does not involve D.
  const NetExpansion fast = net_general(1.0, 0.05, 2.0, 2.0);
  CHECK(fast.value == doctest::Approx(0.5 * base.value).epsilon(1e-14));
  CHECK(fast.log_correction == base.log_correction);
}

TEST_CASE("alt_form_delta equals the square of the log correction") {
  // divided: L/(1+c) vs L(1-c) differ by exactly c^2 relative;
  // multiplied: L(1+c) vs L/(1-c) differ by c^2/(1-c^2).
  const NetExpansion g = net_general(1.0, 0.05, 1.0, 2.0);
  const double cg = g.log_correction;
  CHECK(g.alt_form_delta == doctest::Approx(cg * cg).epsilon(1e-10));

  const NetExpansion b = net_ball(1.0, 0.1, 1.0);
  const double cb = b.log_correction;
  CHECK(b.alt_form_delta == doctest::Approx(cb * cb / (1.0 - cb * cb)).epsilon(1e-10));

  // Quadratic decay in the window radius: shrinking a by 10 shrinks the
  // spread by roughly 100 (the log factor erodes the exact power slightly).
  const NetExpansion small = net_general(1.0, 0.005, 1.0, 2.0);
  CHECK(small.alt_form_delta < g.alt_form_delta / 30.0);
}

TEST_CASE("divided and multiplied forms agree to first order on the ball") {
  // The general form measures the log against V^(1/3), the ball form against
  // R, so they differ by a plain O(a) term. The gap shrinks linearly in a.
  auto gap = [](double a) {
    const double R = 1.0;
    const double volume = 4.0 / 3.0 * kPi * R * R * R;
    const NetExpansion g = net_general(volume, a, 1.0, 2.0 / R);
    const NetExpansion b = net_ball(R, a, 1.0);
    return std::abs(g.value - b.value) / b.value;
  };
  CHECK(gap(0.1) < 0.03);
  CHECK(gap(0.01) < gap(0.1) / 5.0);
}

TEST_CASE("regime flag and regime errors") {
  // |log correction| beyond 1/2: still evaluates, flagged untrustworthy.
  const NetExpansion marginal = net_general(1.0, 0.2, 1.0, 10.0);
  CHECK(!marginal.regime_ok);
  CHECK(marginal.value > 0);
  CHECK(std::isfinite(marginal.value));

  // Correction at or below -1 destroys the divided form entirely.
  CHECK_THROWS_AS(net_general(1.0, 0.2, 1.0, 25.0), RegimeError);

  // Window no smaller than the domain scale.
  CHECK_THROWS_AS(net_general(1.0, 1.0, 1.0, 2.0), RegimeError);
  CHECK_THROWS_AS(net_general(1.0, 1.5, 1.0, 2.0), RegimeError);
}

TEST_CASE("input validation of the closed forms") {
  CHECK_THROWS_AS(net_general(0.0, 0.05, 1.0, 2.0), InvalidInputError);
  CHECK_THROWS_AS(net_general(-1.0, 0.05, 1.0, 2.0), InvalidInputError);
  CHECK_THROWS_AS(net_general(1.0, -0.05, 1.0, 2.0), InvalidInputError);
  CHECK_THROWS_AS(net_general(1.0, 0.05, 0.0, 2.0), InvalidInputError);

  CHECK_THROWS_AS(net_ball(-1.0, 0.1, 1.0), InvalidInputError);
  CHECK_THROWS_AS(net_ball(1.0, 0.0, 1.0), InvalidInputError);
  CHECK_THROWS_AS(net_ball(1.0, 1.5, 1.0), InvalidInputError);

  CHECK_THROWS_AS(neumann_singular_part(0.0, 2.0), InvalidInputError);
  CHECK_THROWS_AS(neumann_singular_part(-0.1, 2.0), InvalidInputError);
}

TEST_CASE("window touching the full cap radius is the degenerate limit") {
  // a == R: the log term vanishes and the leading order is all there is.
  const NetExpansion e = net_ball(1.0, 1.0, 1.0);
  CHECK(e.log_correction == 0.0);
  CHECK(e.value == e.leading);
  CHECK(e.regime_ok);
}

TEST_CASE("leakage flux is 4 a D p0") {
  CHECK(leakage_flux({0.01, 3.0}, 2.0) == doctest::Approx(0.24).epsilon(1e-15));
  CHECK(leakage_flux({0.02, 0.0}, 1.0) == 0.0);

  CHECK_THROWS_AS(leakage_flux({0.0, 1.0}, 1.0), InvalidInputError);
  CHECK_THROWS_AS(leakage_flux({-0.01, 1.0}, 1.0), InvalidInputError);
  CHECK_THROWS_AS(leakage_flux({0.01, -1.0}, 1.0), InvalidInputError);
  CHECK_THROWS_AS(leakage_flux({0.01, 1.0}, 0.0), InvalidInputError);
}

TEST_CASE("multi-window leakage sums equal radii and rejects mixed ones") {
  CHECK(leakage_flux_multi({}, 1.0) == 0.0);

  const std::vector<LeakSpec> leaks = {{0.02, 1.0}, {0.02, 2.5}};
  CHECK(leakage_flux_multi(leaks, 1.0) == doctest::Approx(0.28).epsilon(1e-14));

  const std::vector<LeakSpec> mixed = {{0.02, 1.0}, {0.03, 1.0}};
  CHECK_THROWS_AS(leakage_flux_multi(mixed, 1.0), InvalidInputError);
}

TEST_CASE("singular part with flat boundary is the bare Coulomb term") {
  const double d = 0.25;
  CHECK(neumann_singular_part(d, 0.0) ==
        doctest::Approx(1.0 / (2.0 * kPi * d)).epsilon(1e-15));
  // The curvature piece is linear in the curvature sum.
  const double lo = neumann_singular_part(d, 1.0) - neumann_singular_part(d, 0.0);
  const double hi = neumann_singular_part(d, 3.0) - neumann_singular_part(d, 0.0);
  CHECK(hi == doctest::Approx(3.0 * lo).epsilon(1e-12));
}
