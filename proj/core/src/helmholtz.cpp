#include "nescape/helmholtz.hpp"

#include <algorithm>
#include <cmath>

#include "nescape/errors.hpp"
#include "nescape/linalg.hpp"
#include "nescape/quadrature.hpp"

namespace nescape::helmholtz {

namespace {

const double kPi = std::acos(-1.0);

// Ring average of the Coulomb kernel over the circle of radius r against a
// target ring of radius rho: (1/2pi) oint dphi / |x - y| = 2 K(k) / (pi (r+rho)).
// K is evaluated from the complementary modulus |r-rho|/(r+rho), which is
// exact where the standard modulus loses digits; the floor bounds K near the
// diagonal, where the tanh-sinh weights already suppress the contribution.
double coulomb_kernel(double rho, double r, double abs_diff) {
  if (rho == 0.0) return 1.0 / r;
  double kp = std::max(abs_diff / (r + rho), 1e-18);
  return 2.0 * quadrature::elliptic_K_comp(kp) / (kPi * (r + rho));
}

// oint log|x - y| dphi over the ring = 2 pi log(max(r, rho)), exactly.
double log_kernel(double rho, double r) { return 2.0 * kPi * std::log(std::max(r, rho)); }

// All n Lagrange basis values at m in one barycentric sweep.
void lagrange_all(const std::vector<double>& mu, const std::vector<double>& bw, double m,
                  std::vector<double>& out) {
  const int n = static_cast<int>(mu.size());
  double den = 0;
  int exact = -1;
  for (int i = 0; i < n; ++i) {
    double d = m - mu[i];
    if (d == 0.0) {
      exact = i;
      break;
    }
    out[i] = bw[i] / d;
    den += out[i];
  }
  if (exact >= 0) {
    std::fill(out.begin(), out.end(), 0.0);
    out[exact] = 1.0;
    return;
  }
  for (int i = 0; i < n; ++i) out[i] /= den;
}

} // namespace

double DiskSolution::density_hat(double radius) const {
  if (!(radius >= 0) || radius > a)
    throw InvalidInputError("density_hat: radius must lie in [0, a]");
  const double m = 2.0 * (radius / a) * (radius / a) - 1.0;
  double num = 0, den = 0;
  for (int i = 0; i < n; ++i) {
    double d = m - mu[i];
    if (d == 0.0) return ghat[i];
    num += bary[i] / d * ghat[i];
    den += bary[i] / d;
  }
  return num / den;
}

double DiskSolution::density(double radius) const {
  if (!(radius < a)) throw InvalidInputError("density: radius must be below a");
  const double s = radius / a;
  return density_hat(radius) / std::sqrt(1.0 - s * s);
}

DiskSolution solve_disk(double a, double H, double C, int n) {
  if (!(a > 0)) throw InvalidInputError("solve_disk: disk radius must be positive");
  if (n < 8) throw InvalidInputError("solve_disk: need at least 8 collocation nodes");
  // The log term is a perturbation of the Coulomb operator; once
  // |H| a |log a| reaches order one the equation changes character and the
  // factored edge behavior is no longer right.
  if (!(std::abs(H) * a * std::abs(std::log(a)) < 1.0))
    throw RegimeError("solve_disk: log kernel is not a small perturbation");

  DiskSolution sol;
  sol.a = a;
  sol.H = H;
  sol.C = C;
  sol.n = n;
  sol.mu.resize(n);
  sol.r.resize(n);
  sol.bary.resize(n);
  std::vector<double> theta(n);
  for (int i = 0; i < n; ++i) {
    // Ascending mu ordering of the Chebyshev-Gauss nodes, with the matching
    // closed-form barycentric weights (scale cancels in the barycentric form).
    const double alpha = (2.0 * (n - 1 - i) + 1.0) * kPi / (2.0 * n);
    sol.mu[i] = std::cos(alpha);
    sol.bary[i] = ((n - 1 - i) % 2 == 0 ? 1.0 : -1.0) * std::sin(alpha);
    sol.r[i] = a * std::sqrt(0.5 * (1.0 + sol.mu[i]));
    theta[i] = std::asin(std::min(1.0, sol.r[i] / a));
  }

  const quadrature::Rule& ts = quadrature::tanh_sinh_rule(120, 3.8);
  std::vector<double> A(static_cast<std::size_t>(n) * n, 0.0);
  std::vector<double> lag(n);

  for (int row = 0; row < n; ++row) {
    const double rho = sol.r[row];
    const double tj = theta[row];
    // Two tanh-sinh panels split at the collocation angle, where the ring
    // kernel is log-singular.
    const double panels[2][2] = {{0.0, tj}, {tj, 0.5 * kPi}};
    for (const auto& p : panels) {
      const double c = 0.5 * (p[0] + p[1]), h = 0.5 * (p[1] - p[0]);
      if (h <= 0) continue;
      for (std::size_t q = 0; q < ts.nodes.size(); ++q) {
        const double th = c + h * ts.nodes[q];
        const double w = h * ts.weights[q];
        const double r = a * std::sin(th);
        // |r - rho| via the angle sum/difference form; the direct subtraction
        // cancels catastrophically near the diagonal.
        const double adiff =
            2.0 * a * std::abs(std::cos(0.5 * (th + tj)) * std::sin(0.5 * (th - tj)));
        const double ker = coulomb_kernel(rho, r, adiff) + H * log_kernel(rho, r);
        const double m = -std::cos(2.0 * th); // mu(theta) = 2 sin^2 - 1
        lagrange_all(sol.mu, sol.bary, m, lag);
        const double f = a * a * std::sin(th) * ker * w;
        double* arow = A.data() + static_cast<std::size_t>(row) * n;
        for (int i = 0; i < n; ++i) arow[i] += f * lag[i];
      }
    }
  }

  std::vector<double> rhs(n, -C);
  double rcond = 0;
  sol.ghat = linalg::lu_solve(std::move(A), std::move(rhs), n, &rcond);
  sol.rcond = rcond;
  if (rcond < 1e-14)
    throw IllConditionedError("solve_disk: collocation system is numerically singular");

  // total flux = 2 pi a^2 int_0^{pi/2} ghat(mu(theta)) sin(theta) dtheta.
  sol.total_flux = 2.0 * kPi * a * a *
                   quadrature::integrate_gauss(
                       [&](double th) {
                         const double m = -std::cos(2.0 * th);
                         double num = 0, den = 0;
                         for (int i = 0; i < n; ++i) {
                           double d = m - sol.mu[i];
                           if (d == 0.0) return sol.ghat[i] * std::sin(th);
                           num += sol.bary[i] / d * sol.ghat[i];
                           den += sol.bary[i] / d;
                         }
                         return (num / den) * std::sin(th);
                       },
                       0.0, 0.5 * kPi, 80);
  return sol;
}

double net_from_solver(double volume, double a, double D, double kappa_sum, int n) {
  if (!(volume > 0)) throw InvalidInputError("net_from_solver: volume must be positive");
  if (!(a > 0)) throw InvalidInputError("net_from_solver: window radius must be positive");
  if (!(D > 0)) throw InvalidInputError("net_from_solver: diffusivity must be positive");
  const double vcbrt = std::cbrt(volume);
  const double a_s = a / vcbrt; // scaled window radius
  if (a_s >= 1.0)
    throw RegimeError("net_from_solver: window radius is not small against the domain scale");
  const double kappa_s = kappa_sum * vcbrt; // scaled curvature sum
  const double H = -kappa_s / (8.0 * kPi);
  DiskSolution sol = solve_disk(a_s, H, 1.0, n);
  if (!(sol.total_flux < 0))
    throw RegimeError("net_from_solver: curvature correction overwhelms the leading order");
  return (-1.0 / sol.total_flux) * vcbrt * vcbrt / D;
}

double first_order_flux_ratio(double a, double H) {
  return -4.0 * a * H * (std::log(a) + 2.0 * std::log(2.0) - 1.5);
}

double analytic_g1_ratio(double a, double curvature_sum) {
  if (!(a > 0 && a < 1))
    throw InvalidInputError("analytic_g1_ratio: scaled radius must lie in (0, 1)");
  return (curvature_sum / (2.0 * kPi)) * a * std::log(a);
}

} // namespace nescape::helmholtz
