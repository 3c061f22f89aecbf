#include "oracle/jacobi_eig.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace ranperf::oracle {

std::vector<EigenPair> eig_symmetric_bruteforce(
    std::vector<std::vector<double>> s) {
  const std::size_t n = s.size();
  if (n == 0 || n > 64) {
    throw std::invalid_argument("jacobi oracle: need 1 <= n <= 64");
  }
  double scale = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    if (s[i].size() != n) {
      throw std::invalid_argument("jacobi oracle: matrix not square");
    }
    for (std::size_t j = 0; j < n; ++j) scale = std::max(scale, std::abs(s[i][j]));
  }
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      if (std::abs(s[i][j] - s[j][i]) > 1e-10 * std::max(1.0, scale)) {
        throw std::invalid_argument("jacobi oracle: matrix not symmetric");
      }
    }
  }

  // v accumulates the rotations; starts as identity.
  std::vector<std::vector<double>> v(n, std::vector<double>(n, 0.0));
  for (std::size_t i = 0; i < n; ++i) v[i][i] = 1.0;

  const int max_sweeps = 100;
  for (int sweep = 0; sweep < max_sweeps; ++sweep) {
    double off = 0.0;
    for (std::size_t p = 0; p < n; ++p) {
      for (std::size_t q = p + 1; q < n; ++q) off += s[p][q] * s[p][q];
    }
    if (off <= 1e-30 * std::max(1.0, scale * scale)) break;

    for (std::size_t p = 0; p < n; ++p) {
      for (std::size_t q = p + 1; q < n; ++q) {
        const double apq = s[p][q];
        if (std::abs(apq) <= 1e-300) continue;
        const double theta = (s[q][q] - s[p][p]) / (2.0 * apq);
        const double t = (theta >= 0 ? 1.0 : -1.0) /
                         (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        const double c = 1.0 / std::sqrt(t * t + 1.0);
        const double sn = t * c;
        const double tau = sn / (1.0 + c);

        const double app = s[p][p];
        const double aqq = s[q][q];
        s[p][p] = app - t * apq;
        s[q][q] = aqq + t * apq;
        s[p][q] = 0.0;
        s[q][p] = 0.0;
        for (std::size_t r = 0; r < n; ++r) {
          if (r != p && r != q) {
            const double arp = s[r][p];
            const double arq = s[r][q];
            s[r][p] = arp - sn * (arq + tau * arp);
            s[p][r] = s[r][p];
            s[r][q] = arq + sn * (arp - tau * arq);
            s[q][r] = s[r][q];
          }
          const double vrp = v[r][p];
          const double vrq = v[r][q];
          v[r][p] = vrp - sn * (vrq + tau * vrp);
          v[r][q] = vrq + sn * (vrp - tau * vrq);
        }
      }
    }
  }

  std::vector<EigenPair> pairs(n);
  for (std::size_t i = 0; i < n; ++i) {
    pairs[i].value = s[i][i];
    pairs[i].vector.resize(n);
    for (std::size_t r = 0; r < n; ++r) pairs[i].vector[r] = v[r][i];
  }
  std::stable_sort(pairs.begin(), pairs.end(),
                   [](const EigenPair& a, const EigenPair& b) {
                     return a.value > b.value;
                   });
  return pairs;
}

}  // namespace ranperf::oracle
