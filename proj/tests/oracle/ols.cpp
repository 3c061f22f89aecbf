#include "oracle/ols.hpp"

#include <cmath>
#include <stdexcept>

namespace ranperf::oracle {

std::vector<double> ols_closed_form(const std::vector<std::vector<double>>& x,
                                    const std::vector<double>& y) {
  const std::size_t m = x.size();
  if (m == 0 || y.size() != m) {
    throw std::invalid_argument("ols oracle: empty or mismatched inputs");
  }
  const std::size_t d = x[0].size();
  if (d == 0 || d > 8 || d > m) {
    throw std::invalid_argument("ols oracle: need 1 <= d <= min(8, m)");
  }

  // Normal equations: (X'X) w = X'y.
  std::vector<std::vector<double>> a(d, std::vector<double>(d + 1, 0.0));
  for (std::size_t i = 0; i < m; ++i) {
    if (x[i].size() != d) {
      throw std::invalid_argument("ols oracle: ragged design matrix");
    }
    for (std::size_t r = 0; r < d; ++r) {
      for (std::size_t c = 0; c < d; ++c) a[r][c] += x[i][r] * x[i][c];
      a[r][d] += x[i][r] * y[i];
    }
  }

  // Gaussian elimination with partial pivoting on the augmented system.
  double scale = 0.0;
  for (std::size_t r = 0; r < d; ++r) {
    for (std::size_t c = 0; c < d; ++c) scale = std::max(scale, std::abs(a[r][c]));
  }
  for (std::size_t col = 0; col < d; ++col) {
    std::size_t pivot = col;
    for (std::size_t r = col + 1; r < d; ++r) {
      if (std::abs(a[r][col]) > std::abs(a[pivot][col])) pivot = r;
    }
    if (std::abs(a[pivot][col]) < 1e-12 * std::max(1.0, scale)) {
      throw std::invalid_argument("ols oracle: rank-deficient design matrix");
    }
    std::swap(a[col], a[pivot]);
    for (std::size_t r = col + 1; r < d; ++r) {
      const double f = a[r][col] / a[col][col];
      for (std::size_t c = col; c <= d; ++c) a[r][c] -= f * a[col][c];
    }
  }
  std::vector<double> w(d, 0.0);
  for (std::size_t col = d; col-- > 0;) {
    double rhs = a[col][d];
    for (std::size_t c = col + 1; c < d; ++c) rhs -= a[col][c] * w[c];
    w[col] = rhs / a[col][col];
  }
  return w;
}

}  // namespace ranperf::oracle
