#pragma once

#include <vector>

namespace nescape::asymptotics {

enum class ExpansionForm { divided, multiplied };

// Two-term small-window expansion. `value` is the assembled estimate;
// `log_correction` is the signed logarithmic term relative to the leading
// order; `alt_form_delta` measures the spread between the divided and
// multiplied resummations, which is the size of the neglected next order.
// regime_ok is false once |log_correction| > 1/2: the number is still
// returned but the expansion is no longer trustworthy.
struct NetExpansion {
  double leading = 0;
  double log_correction = 0;
  double value = 0;
  double epsilon = 0; // window radius over the cube root of the volume
  bool regime_ok = false;
  ExpansionForm form = ExpansionForm::divided;
  double alt_form_delta = 0;
};

// Mean escape time from a domain of volume `volume` through one absorbing
// window of radius a, for a boundary with summed principal curvatures
// curvature_sum at the window center. Divided form:
//   V / (4 a D) / (1 + (curvature_sum / 2 pi) a log(a / V^(1/3))).
NetExpansion net_general(double volume, double a, double D, double curvature_sum);

// Ball specialization, multiplied form:
//   (V / 4 a D) (1 + (a / pi R) log(R / a)).
NetExpansion net_ball(double R, double a, double D);

// Principal decay rate of the survival probability, as an expansion whose
// value is the exact floating-point reciprocal of net_general's value.
NetExpansion eigenvalue_small_window(double volume, double a, double D, double curvature_sum);

// One small absorbing window held at zero density in a bath whose reduced
// density at the window is reduced_density.
struct LeakSpec {
  double radius = 0;
  double reduced_density = 0;
};

// Steady diffusive current into the window: 4 a D p0.
double leakage_flux(const LeakSpec& leak, double D);

// Sum over well-separated windows of one common radius. Mixed radii are
// rejected; an empty list carries no current. Separation itself is not
// checkable here (no positions), so it is validated where windows are placed.
double leakage_flux_multi(const std::vector<LeakSpec>& leaks, double D);

// Distance-local singular part of the surface Neumann function:
//   1 / (2 pi d)  -  (curvature_sum / 8 pi) log d.
// What remains after subtracting this from the true kernel stays bounded as
// d -> 0; the log coefficient is the quantity the patch and ball probes fit.
double neumann_singular_part(double distance, double curvature_sum);

} // namespace nescape::asymptotics
