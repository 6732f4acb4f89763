#pragma once

#include <vector>

namespace nescape::helmholtz {

// Solution of the disk integral equation
//   int_disk g(x) [ 1/(2 pi |x - y|) + H log|x - y| ] dS(x) = -C,  y in disk,
// for the flux density g on an absorbing disk of radius a. The edge behavior
// is factored out: g(r) = ghat(mu) / sqrt(1 - r^2/a^2) with mu = 2 r^2/a^2 - 1
// and ghat a polynomial interpolated at Chebyshev nodes in mu.
struct DiskSolution {
  double a = 0;
  double H = 0;
  double C = 0;
  int n = 0;
  std::vector<double> mu;    // collocation nodes in mu, ascending
  std::vector<double> r;     // collocation radii
  std::vector<double> ghat;  // regularized density at the nodes
  std::vector<double> bary;  // barycentric weights for the mu nodes
  double total_flux = 0;     // integral of g over the disk; -4 C a when H = 0
  double rcond = 0;          // pivot-ratio condition estimate of the system

  // Barycentric interpolation of ghat at radius r in [0, a].
  double density_hat(double radius) const;
  // Full density including the inverse-square-root edge factor; r < a.
  double density(double radius) const;
};

// Collocation at n Chebyshev-Gauss nodes; the radial integrals use the
// substitution r = a sin(theta) (which removes the edge weight) and tanh-sinh
// panels split at the collocation radius where the ring kernel has a
// logarithmic singularity.
DiskSolution solve_disk(double a, double H, double C, int n = 32);

// Mean escape time through one window of radius a on a boundary with summed
// principal curvatures kappa_sum, for a domain of volume `volume`: the disk
// problem is solved in volume-scaled variables with H = -kappa_sum/(8 pi)
// (scaled), and the reciprocal flux converts back to a time.
double net_from_solver(double volume, double a, double D, double kappa_sum, int n = 32);

// Exact first-order relative flux perturbation in H:
//   flux(H) / flux(0) - 1 = -4 a H (log a + 2 log 2 - 3/2) + O((a H log a)^2).
double first_order_flux_ratio(double a, double H);

// Leading curvature correction to the escape-time expansion in volume-scaled
// variables: (curvature_sum / 2 pi) a log a for scaled radius a in (0, 1).
// The solver's flux ratio approaches this as a -> 0 (the log dominates the
// constant 2 log 2 - 3/2 only slowly, so agreement improves logarithmically).
double analytic_g1_ratio(double a, double curvature_sum);

} // namespace nescape::helmholtz
