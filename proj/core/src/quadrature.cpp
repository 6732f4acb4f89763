#include "nescape/quadrature.hpp"

#include <cmath>
#include <map>
#include <mutex>
#include <utility>

namespace nescape::quadrature {

namespace {

// Legendre P_n and P_n' at x by the three-term recurrence.
std::pair<double, double> legendre(int n, double x) {
  double p0 = 1.0, p1 = x;
  if (n == 0) return {1.0, 0.0};
  for (int k = 2; k <= n; ++k) {
    double p2 = ((2 * k - 1) * x * p1 - (k - 1) * p0) / k;
    p0 = p1;
    p1 = p2;
  }
  double dp = n * (x * p1 - p0) / (x * x - 1.0);
  return {p1, dp};
}

Rule build_gauss_legendre(int n) {
  Rule r;
  r.nodes.resize(n);
  r.weights.resize(n);
  const double pi = std::acos(-1.0);
  for (int i = 0; i < (n + 1) / 2; ++i) {
    // Tricomi initial guess, then Newton; converges in < 10 iterations.
    double x = std::cos(pi * (i + 0.75) / (n + 0.5));
    double p, dp;
    for (int it = 0; it < 100; ++it) {
      std::tie(p, dp) = legendre(n, x);
      double dx = p / dp;
      x -= dx;
      if (std::abs(dx) < 1e-15) break;
    }
    std::tie(p, dp) = legendre(n, x);
    double w = 2.0 / ((1.0 - x * x) * dp * dp);
    r.nodes[i] = -x;
    r.weights[i] = w;
    r.nodes[n - 1 - i] = x;
    r.weights[n - 1 - i] = w;
  }
  if (n % 2 == 1) r.nodes[n / 2] = 0.0;
  return r;
}

Rule build_tanh_sinh(int n, double tmax) {
  Rule r;
  const double pi_half = 0.5 * std::acos(-1.0);
  const double h = tmax / n;
  for (int k = -n; k <= n; ++k) {
    double t = h * k;
    double x = std::tanh(pi_half * std::sinh(t));
    if (1.0 - std::abs(x) < 1e-15) continue;
    double c = std::cosh(pi_half * std::sinh(t));
    double w = h * pi_half * std::cosh(t) / (c * c);
    r.nodes.push_back(x);
    r.weights.push_back(w);
  }
  return r;
}

} // namespace

const Rule& gauss_legendre(int n) {
  if (n < 1) throw InvalidInputError("gauss_legendre: order must be positive");
  static std::map<int, Rule> cache;
  static std::mutex mu;
  std::lock_guard<std::mutex> lock(mu);
  auto it = cache.find(n);
  if (it == cache.end()) it = cache.emplace(n, build_gauss_legendre(n)).first;
  return it->second;
}

const Rule& tanh_sinh_rule(int n, double tmax) {
  if (n < 1 || tmax <= 0) throw InvalidInputError("tanh_sinh_rule: bad parameters");
  static std::map<std::pair<int, double>, Rule> cache;
  static std::mutex mu;
  std::lock_guard<std::mutex> lock(mu);
  auto key = std::make_pair(n, tmax);
  auto it = cache.find(key);
  if (it == cache.end()) it = cache.emplace(key, build_tanh_sinh(n, tmax)).first;
  return it->second;
}

double elliptic_K_comp(double kprime) {
  if (!(kprime > 0) || kprime > 1.0)
    throw InvalidInputError("elliptic_K_comp: complementary modulus must lie in (0,1]");
  double a = 1.0, b = kprime;
  for (int i = 0; i < 60 && std::abs(a - b) > 1e-17 * a; ++i) {
    double am = 0.5 * (a + b);
    b = std::sqrt(a * b);
    a = am;
  }
  return std::acos(-1.0) / (2.0 * a);
}

} // namespace nescape::quadrature
