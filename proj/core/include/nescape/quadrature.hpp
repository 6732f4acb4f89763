#pragma once

#include <cmath>
#include <vector>

#include "nescape/errors.hpp"

namespace nescape::quadrature {

struct Rule {
  std::vector<double> nodes;
  std::vector<double> weights;
};

// Gauss-Legendre rule on [-1,1]. Rules are computed on first use and cached;
// the returned reference stays valid for the lifetime of the program.
const Rule& gauss_legendre(int n);

// Tanh-sinh rule on [-1,1] with step tmax/n. Nodes that round into the
// endpoints in double precision are dropped; their true weights are below
// 1e-16 so the truncation is harmless, while keeping them would evaluate f
// at the endpoint where integrand singularities live.
const Rule& tanh_sinh_rule(int n, double tmax);

template <class F>
double integrate_gauss(F&& f, double a, double b, int n) {
  const Rule& r = gauss_legendre(n);
  const double c = 0.5 * (a + b), h = 0.5 * (b - a);
  double s = 0;
  for (std::size_t i = 0; i < r.nodes.size(); ++i)
    s += r.weights[i] * f(c + h * r.nodes[i]);
  return h * s;
}

// Tanh-sinh integration over [a,b]. Tolerates integrable singularities at
// either endpoint; exact endpoint values are never requested.
template <class F>
double integrate_tanh_sinh(F&& f, double a, double b, int n = 120, double tmax = 3.8) {
  const Rule& r = tanh_sinh_rule(n, tmax);
  const double c = 0.5 * (a + b), h = 0.5 * (b - a);
  double s = 0;
  for (std::size_t i = 0; i < r.nodes.size(); ++i)
    s += r.weights[i] * f(c + h * r.nodes[i]);
  return h * s;
}

// Doubles the order until two successive values agree to rel_tol (relative to
// the larger magnitude, with an absolute floor), up to max_doublings.
template <class F>
double integrate_adaptive_gauss(F&& f, double a, double b, double rel_tol = 1e-10,
                                int n0 = 16, int max_doublings = 10) {
  double prev = integrate_gauss(f, a, b, n0);
  int n = n0;
  for (int k = 0; k < max_doublings; ++k) {
    n *= 2;
    double cur = integrate_gauss(f, a, b, n);
    double scale = std::max({std::abs(cur), std::abs(prev), 1e-300});
    if (std::abs(cur - prev) <= rel_tol * scale) return cur;
    prev = cur;
  }
  throw QuadratureFailureError("adaptive quadrature did not converge within refinement budget");
}

// Complete elliptic integral K(k) parametrized by the complementary modulus
// k' = sqrt(1-k^2), via the arithmetic-geometric mean: K = pi / (2 AGM(1,k')).
// Converges quadratically; k' must be positive (K diverges as k' -> 0).
double elliptic_K_comp(double kprime);

} // namespace nescape::quadrature
