#include "nescape/asymptotics.hpp"

#include <cmath>

#include "nescape/errors.hpp"

namespace nescape::asymptotics {

namespace {

const double kPi = std::acos(-1.0);

void check_common(double volume, double a, double D) {
  if (!(volume > 0)) throw InvalidInputError("net expansion: volume must be positive");
  if (!(a > 0)) throw InvalidInputError("net expansion: window radius must be positive");
  if (!(D > 0)) throw InvalidInputError("net expansion: diffusivity must be positive");
}

NetExpansion assemble(double leading, double log_correction, double epsilon, ExpansionForm form) {
  NetExpansion e;
  e.leading = leading;
  e.log_correction = log_correction;
  e.epsilon = epsilon;
  e.form = form;
  e.regime_ok = std::abs(log_correction) <= 0.5;
  // The two resummations of the same two-term series: they agree to first
  // order, so their spread is the size of the neglected next order.
  double alt;
  if (form == ExpansionForm::divided) {
    e.value = leading / (1.0 + log_correction);
    alt = leading * (1.0 - log_correction);
  } else {
    e.value = leading * (1.0 + log_correction);
    alt = leading / (1.0 - log_correction);
  }
  if (!(e.value > 0) || !std::isfinite(e.value))
    throw RegimeError("net expansion: correction term overwhelms the leading order");
  e.alt_form_delta = std::abs(e.value - alt) / e.value;
  return e;
}

} // namespace

NetExpansion net_general(double volume, double a, double D, double curvature_sum) {
  check_common(volume, a, D);
  const double eps = a / std::cbrt(volume);
  if (eps >= 1.0)
    throw RegimeError("net_general: window radius is not small against the domain scale");
  const double leading = volume / (4.0 * a * D);
  const double correction = (curvature_sum / (2.0 * kPi)) * a * std::log(eps);
  return assemble(leading, correction, eps, ExpansionForm::divided);
}

NetExpansion net_ball(double R, double a, double D) {
  if (!(R > 0)) throw InvalidInputError("net_ball: radius must be positive");
  if (!(a > 0)) throw InvalidInputError("net_ball: window radius must be positive");
  if (!(D > 0)) throw InvalidInputError("net_ball: diffusivity must be positive");
  // a == R is the degenerate limit where the log term vanishes and the
  // formula still evaluates, so it is allowed; a > R is not a cap at all.
  if (a > R) throw InvalidInputError("net_ball: window radius exceeds the ball radius");
  const double volume = 4.0 / 3.0 * kPi * R * R * R;
  const double leading = volume / (4.0 * a * D);
  const double correction = (a / (kPi * R)) * std::log(R / a);
  return assemble(leading, correction, a / std::cbrt(volume), ExpansionForm::multiplied);
}

NetExpansion eigenvalue_small_window(double volume, double a, double D, double curvature_sum) {
  NetExpansion net = net_general(volume, a, D, curvature_sum);
  // The reciprocal of the divided form l/(1+c) is the multiplied form with
  // leading 1/l and the same log term, so all fields stay meaningful.
  NetExpansion e =
      assemble(1.0 / net.leading, net.log_correction, net.epsilon, ExpansionForm::multiplied);
  // Literal reciprocal so that rate * net == 1 to the last ulp.
  e.value = 1.0 / net.value;
  return e;
}

double leakage_flux(const LeakSpec& leak, double D) {
  if (!(leak.radius > 0)) throw InvalidInputError("leakage_flux: window radius must be positive");
  if (!(D > 0)) throw InvalidInputError("leakage_flux: diffusivity must be positive");
  if (!(leak.reduced_density >= 0))
    throw InvalidInputError("leakage_flux: reduced density must be nonnegative");
  return 4.0 * leak.radius * D * leak.reduced_density;
}

double leakage_flux_multi(const std::vector<LeakSpec>& leaks, double D) {
  if (leaks.empty()) return 0.0;
  const double a0 = leaks.front().radius;
  double s = 0;
  for (const LeakSpec& l : leaks) {
    if (std::abs(l.radius - a0) > 1e-12 * std::abs(a0))
      throw InvalidInputError("leakage_flux_multi: windows must share one radius");
    s += leakage_flux(l, D);
  }
  return s;
}

double neumann_singular_part(double distance, double curvature_sum) {
  if (!(distance > 0))
    throw InvalidInputError("neumann_singular_part: distance must be positive");
  return 1.0 / (2.0 * kPi * distance) - (curvature_sum / (8.0 * kPi)) * std::log(distance);
}

} // namespace nescape::asymptotics
