#pragma once

#include <vector>

namespace nescape::linalg {

// Solves the dense n x n system A x = b by LU factorization with partial
// pivoting. A is row-major and consumed by the factorization. Throws
// SingularMatrixError on a vanishing pivot. If rcond_est is non-null it
// receives min|U_ii| / max|U_ii|, a cheap lower-bound style estimate of the
// reciprocal condition number; callers decide what to do with it.
std::vector<double> lu_solve(std::vector<double> A, std::vector<double> b, int n,
                             double* rcond_est = nullptr);

struct LineFit {
  double slope = 0;
  double intercept = 0;
};

// Ordinary least squares fit y ~ slope * x + intercept.
LineFit fit_line(const std::vector<double>& x, const std::vector<double>& y);

} // namespace nescape::linalg
