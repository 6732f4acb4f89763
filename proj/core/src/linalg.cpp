#include "nescape/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "nescape/errors.hpp"

namespace nescape::linalg {

std::vector<double> lu_solve(std::vector<double> A, std::vector<double> b, int n,
                             double* rcond_est) {
  if (n <= 0 || A.size() != static_cast<std::size_t>(n) * n ||
      b.size() != static_cast<std::size_t>(n))
    throw InvalidInputError("lu_solve: dimension mismatch");

  double umin = std::numeric_limits<double>::infinity(), umax = 0;
  for (int k = 0; k < n; ++k) {
    int piv = k;
    double best = std::abs(A[k * n + k]);
    for (int i = k + 1; i < n; ++i) {
      double v = std::abs(A[i * n + k]);
      if (v > best) {
        best = v;
        piv = i;
      }
    }
    if (best == 0.0) throw SingularMatrixError("lu_solve: zero pivot");
    if (piv != k) {
      for (int j = 0; j < n; ++j) std::swap(A[k * n + j], A[piv * n + j]);
      std::swap(b[k], b[piv]);
    }
    umin = std::min(umin, best);
    umax = std::max(umax, best);
    const double inv = 1.0 / A[k * n + k];
    for (int i = k + 1; i < n; ++i) {
      double f = A[i * n + k] * inv;
      if (f == 0.0) continue;
      A[i * n + k] = f;
      for (int j = k + 1; j < n; ++j) A[i * n + j] -= f * A[k * n + j];
      b[i] -= f * b[k];
    }
  }
  for (int i = n - 1; i >= 0; --i) {
    double s = b[i];
    for (int j = i + 1; j < n; ++j) s -= A[i * n + j] * b[j];
    b[i] = s / A[i * n + i];
  }
  if (rcond_est) *rcond_est = umin / umax;
  return b;
}

LineFit fit_line(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size() || x.size() < 2)
    throw InvalidInputError("fit_line: need at least two points");
  const double n = static_cast<double>(x.size());
  double sx = 0, sy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sx += x[i];
    sy += y[i];
  }
  const double mx = sx / n, my = sy / n;
  double sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
  }
  if (sxx == 0) throw InvalidInputError("fit_line: abscissae are all equal");
  LineFit f;
  f.slope = sxy / sxx;
  f.intercept = my - f.slope * mx;
  return f;
}

} // namespace nescape::linalg
