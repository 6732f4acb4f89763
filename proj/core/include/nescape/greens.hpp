#pragma once

#include <vector>

#include "nescape/vec.hpp"

namespace nescape::greens {

// Result of regressing probe values against log(1/offset). `residual` is the
// largest absolute deviation of the data from the fitted line; a fit is only
// meaningful when it is small against slope * (decade span).
struct LogFit {
  double slope = 0;
  double intercept = 0;
  double residual = 0;
};

// OLS of values against log(1/offset). Requires at least four probes whose
// offsets span at least one decade; with fewer, or a narrower span, the slope
// of a logarithm is not identifiable against the constant term.
LogFit fit_log_slope(const std::vector<double>& offsets, const std::vector<double>& values);

// Neumann function of the ball of radius R: -lap_y N = delta_x - 1/|V| with
// zero normal derivative on the sphere and zero mean over the ball. The image
// part is summed as a Legendre series to `truncation` terms; if the last
// retained term still exceeds 1e-8 of the running sum the result is flagged
// through `truncation_warning` (near the boundary diagonal the series is
// log-slow; see series_degree_needed).
double neumann_ball(const Vec3& x, const Vec3& y, double R, int truncation,
                    bool* truncation_warning = nullptr);

// Same function in closed form (the series summed exactly); reference for
// tests and for probes that would need a very deep truncation.
double neumann_ball_closed(const Vec3& x, const Vec3& y, double R);

// Smallest degree at which the series tail bound 2 t^(n+1)/(1-t) drops below
// rel_tol, for t = |x||y|/R^2. Grows like (R/d) log(R/d) as both points
// approach the boundary.
int series_degree_needed(double t, double rel_tol = 1e-12);

// Fits the logarithmic layer of the ball Neumann function at the boundary:
// series values at x = R e, y = (R - offset) e are reduced by the Coulomb
// part 1/(2 pi offset) and regressed against log(1/offset). The per-probe
// degree is `truncation` raised to series_degree_needed where that is larger;
// `raised` reports whether the floor was ever insufficient. Empty `offsets`
// selects twelve log-spaced probes in [1e-4, 1e-2] * R. The slope converges
// to kappa_sum/(8 pi) = 1/(4 pi R).
LogFit boundary_log_coefficient_ball(double R, int truncation,
                                     const std::vector<double>& offsets = {},
                                     bool* raised = nullptr);

// Curved-patch correction integral: the first-order effect of principal
// curvatures L and N of a boundary patch of radius a on the Neumann function,
// probed at depth delta along the inward normal. Polar coordinates with an
// arcsinh radial substitution resolve the near-origin layer of width delta;
// successive grid doublings must agree to rel_tol. The probe must stay well
// inside the patch (delta < a/2) or the truncated-patch error contaminates
// the log layer. Its slope against log(1/delta) tends to (L + N)/(8 pi).
double patch_v0(double L, double N, double a, double delta, double rel_tol = 1e-6);

// fit_log_slope of patch_v0 over the given probe offsets.
LogFit patch_log_slope(double L, double N, double a, const std::vector<double>& offsets);

} // namespace nescape::greens
