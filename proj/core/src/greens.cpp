#include "nescape/greens.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "nescape/errors.hpp"
#include "nescape/linalg.hpp"
#include "nescape/quadrature.hpp"

namespace nescape::greens {

namespace {

const double kPi = std::acos(-1.0);

struct PairGeom {
  double t;    // |x||y| / R^2
  double w;    // 1 - cos(gamma), computed stably from the unit vectors
  double dist; // |x - y|
  double quad; // (|x|^2 + |y|^2) / (8 pi R^3)
};

PairGeom pair_geom(const Vec3& x, const Vec3& y, double R) {
  if (!(R > 0)) throw InvalidInputError("neumann_ball: radius must be positive");
  PairGeom g;
  const double nx = norm(x), ny = norm(y);
  if (nx > R * (1.0 + 1e-12) || ny > R * (1.0 + 1e-12))
    throw InvalidInputError("neumann_ball: both points must lie in the closed ball");
  g.t = nx * ny / (R * R);
  if (nx == 0 || ny == 0) {
    g.w = 0; // t = 0 kills the angular dependence
  } else {
    Vec3 d = x / nx - y / ny;
    g.w = 0.5 * norm2(d); // 1 - u without cancellation near u = 1
  }
  g.dist = norm(x - y);
  g.quad = (nx * nx + ny * ny) / (8.0 * kPi * R * R * R);
  return g;
}

} // namespace

LogFit fit_log_slope(const std::vector<double>& offsets, const std::vector<double>& values) {
  if (offsets.size() != values.size())
    throw InvalidInputError("fit_log_slope: offsets and values must pair up");
  if (offsets.size() < 4)
    throw InvalidInputError("fit_log_slope: need at least four probes");
  double lo = std::numeric_limits<double>::infinity(), hi = 0;
  std::vector<double> xs;
  xs.reserve(offsets.size());
  for (double d : offsets) {
    if (!(d > 0)) throw InvalidInputError("fit_log_slope: offsets must be positive");
    lo = std::min(lo, d);
    hi = std::max(hi, d);
    xs.push_back(std::log(1.0 / d));
  }
  if (hi < 10.0 * lo)
    throw IllConditionedError("fit_log_slope: offsets span less than one decade; "
                              "the log slope is not identifiable");
  linalg::LineFit f = linalg::fit_line(xs, values);
  LogFit out;
  out.slope = f.slope;
  out.intercept = f.intercept;
  for (std::size_t i = 0; i < xs.size(); ++i)
    out.residual = std::max(out.residual,
                            std::abs(values[i] - (f.slope * xs[i] + f.intercept)));
  return out;
}

double neumann_ball_closed(const Vec3& x, const Vec3& y, double R) {
  PairGeom g = pair_geom(x, y, R);
  // d_t^2 = 1 - 2tu + t^2 = (1-t)^2 + 2tw and 1 - tu = (1-t) + tw, both
  // cancellation-free near the boundary diagonal.
  const double dt = std::sqrt((1.0 - g.t) * (1.0 - g.t) + 2.0 * g.t * g.w);
  const double one_minus_tu = (1.0 - g.t) + g.t * g.w;
  const double image = (1.0 / (4.0 * kPi * R)) *
                       (1.0 / dt - 1.0 + std::log(2.0 / (one_minus_tu + dt)));
  return 1.0 / (4.0 * kPi * g.dist) + image + g.quad - 9.0 / (20.0 * kPi * R);
}

int series_degree_needed(double t, double rel_tol) {
  if (t <= 0) return 1;
  if (t >= 1) throw InvalidInputError("series_degree_needed: t must be below 1");
  double n = std::log(rel_tol * (1.0 - t)) / std::log(t);
  n = std::min(n, 2.0e8);
  return std::max(1, static_cast<int>(std::ceil(n)));
}

double neumann_ball(const Vec3& x, const Vec3& y, double R, int truncation,
                    bool* truncation_warning) {
  if (truncation < 1) throw InvalidInputError("neumann_ball: truncation must be >= 1");
  PairGeom g = pair_geom(x, y, R);
  const double u = 1.0 - g.w;
  // sum_{n>=1} ((n+1)/n) t^n P_n(u), Legendre values by the usual recurrence.
  double p_prev = 1.0, p = u, tn = g.t, sum = 0, last = 0;
  for (int n = 1; n <= truncation; ++n) {
    last = (static_cast<double>(n + 1) / n) * tn * p;
    sum += last;
    double p_next = ((2 * n + 1) * u * p - n * p_prev) / (n + 1);
    p_prev = p;
    p = p_next;
    tn *= g.t;
  }
  if (truncation_warning)
    *truncation_warning = std::abs(last) > 1e-8 * std::max(std::abs(sum), 1e-300);
  const double image = sum / (4.0 * kPi * R);
  return 1.0 / (4.0 * kPi * g.dist) + image + g.quad - 9.0 / (20.0 * kPi * R);
}

LogFit boundary_log_coefficient_ball(double R, int truncation,
                                     const std::vector<double>& offsets, bool* raised) {
  if (!(R > 0))
    throw InvalidInputError("boundary_log_coefficient_ball: radius must be positive");
  std::vector<double> deltas = offsets;
  if (deltas.empty()) {
    // Twelve probes per decade-pair: deep enough for the log layer, shallow
    // enough that degree raising stays affordable.
    const int n = 12;
    for (int i = 0; i < n; ++i)
      deltas.push_back(R * 1e-4 * std::pow(100.0, static_cast<double>(i) / (n - 1)));
  }
  if (raised) *raised = false;
  std::vector<double> values;
  const Vec3 e{0, 0, 1};
  for (double delta : deltas) {
    if (!(delta > 0 && delta < R))
      throw InvalidInputError("boundary_log_coefficient_ball: offsets must lie in (0, R)");
    const double t = (R - delta) / R;
    int deg = series_degree_needed(t);
    if (deg > truncation && raised) *raised = true;
    deg = std::max(deg, truncation);
    double val = neumann_ball(e * R, e * (R - delta), R, deg);
    // Remove the Coulomb-type divergence; what remains is the log layer.
    values.push_back(val - 1.0 / (2.0 * kPi * delta));
  }
  return fit_log_slope(deltas, values);
}

namespace {

// Fixed-resolution evaluation of the patch integral in polar coordinates.
// The radial direction uses Gauss-Legendre in s with r = delta sinh(s), which
// resolves the near-origin layer of width delta; the angular direction is a
// uniform trapezoid rule, spectrally accurate for this periodic integrand.
double patch_v0_fixed(double L, double N, double a, double delta, int nr, int nphi) {
  const auto& rule = quadrature::gauss_legendre(nr);
  const double smax = std::asinh(a / delta);
  double total = 0;
  for (int ip = 0; ip < nphi; ++ip) {
    const double phi = 2.0 * kPi * ip / nphi;
    const double c = std::cos(phi), s = std::sin(phi);
    const double q = L * c * c + N * s * s;
    double acc = 0;
    for (std::size_t k = 0; k < rule.nodes.size(); ++k) {
      const double sv = 0.5 * smax * (rule.nodes[k] + 1.0);
      const double wv = 0.5 * smax * rule.weights[k];
      const double r = delta * std::sinh(sv);
      const double drds = delta * std::cosh(sv);
      const double x3 = 0.5 * q * r * r;
      const double dist = std::sqrt(r * r + (x3 - delta) * (x3 - delta));
      const double mod3 = std::pow(r * r + x3 * x3, 1.5);
      if (mod3 == 0 || dist == 0) continue;
      acc += (x3 * r) / (dist * mod3) * drds * wv;
    }
    total += acc;
  }
  return total * (2.0 * kPi / nphi) / (4.0 * kPi * kPi);
}

} // namespace

double patch_v0(double L, double N, double a, double delta, double rel_tol) {
  if (!(a > 0)) throw InvalidInputError("patch_v0: patch radius must be positive");
  if (!(delta > 0) || !(delta < 0.5 * a))
    throw InvalidInputError("patch_v0: probe depth must lie in (0, a/2)");
  int nr = 96, nphi = 64;
  double prev = patch_v0_fixed(L, N, a, delta, nr, nphi);
  for (int k = 0; k < 4; ++k) {
    nr *= 2;
    nphi *= 2;
    double cur = patch_v0_fixed(L, N, a, delta, nr, nphi);
    double scale = std::max({std::abs(cur), std::abs(prev), 1e-300});
    if (std::abs(cur - prev) <= rel_tol * scale) return cur;
    prev = cur;
  }
  throw QuadratureFailureError("patch_v0: refinement budget exhausted");
}

LogFit patch_log_slope(double L, double N, double a, const std::vector<double>& offsets) {
  std::vector<double> values;
  values.reserve(offsets.size());
  for (double d : offsets) values.push_back(patch_v0(L, N, a, d));
  return fit_log_slope(offsets, values);
}

} // namespace nescape::greens
