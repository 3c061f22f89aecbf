#include "ranperf/similarity.hpp"

#include <cmath>

#include "ranperf/errors.hpp"

namespace ranperf {

MeasurementMatrix build_measurement_matrix(const CellId& cell,
                                           std::vector<std::string> columns,
                                           const std::vector<std::vector<double>>& rows,
                                           std::int64_t window_start_ms,
                                           std::int64_t window_end_ms,
                                           bool standardize) {
  if (rows.empty()) throw DataError("measurement matrix: no rows");
  const std::int64_t n = static_cast<std::int64_t>(columns.size());
  const std::int64_t m = static_cast<std::int64_t>(rows.size());
  MeasurementMatrix mm;
  mm.cell = cell;
  mm.window_start_ms = window_start_ms;
  mm.window_end_ms = window_end_ms;
  mm.columns = std::move(columns);
  mm.data.resize(m, n);
  for (std::int64_t i = 0; i < m; ++i) {
    if (static_cast<std::int64_t>(rows[i].size()) != n) {
      throw DataError("measurement matrix: row arity mismatch");
    }
    for (std::int64_t j = 0; j < n; ++j) {
      if (!std::isfinite(rows[i][j])) {
        throw DataError("measurement matrix: non-finite value in column " +
                        mm.columns[j]);
      }
      mm.data(i, j) = rows[i][j];
    }
  }
  mm.column_means = mm.data.colwise().mean();
  mm.data.rowwise() -= mm.column_means.transpose();
  mm.column_scales = Eigen::VectorXd::Ones(n);
  mm.constant_column.assign(n, false);
  for (std::int64_t j = 0; j < n; ++j) {
    const double var = mm.data.col(j).squaredNorm() / static_cast<double>(m);
    const double sd = std::sqrt(var);
    if (sd <= 1e-12 * std::max(1.0, std::abs(mm.column_means(j)))) {
      mm.constant_column[j] = true;
      mm.data.col(j).setZero();
    } else if (standardize) {
      mm.column_scales(j) = sd;
      mm.data.col(j) /= sd;
    }
  }
  return mm;
}

LoadingMatrix pca_loadings(const MeasurementMatrix& a, double variance_target) {
  const std::int64_t m = a.rows();
  const std::int64_t n = a.cols();
  if (m < 2) throw DataError("pca_loadings: need at least 2 rows, got " +
                             std::to_string(m));

  std::vector<std::int64_t> active;  // non-constant columns, original indices
  for (std::int64_t j = 0; j < n; ++j) {
    if (!a.constant_column[j]) active.push_back(j);
  }
  if (active.empty()) {
    throw DataError("pca_loadings: all columns constant (degenerate matrix)");
  }
  const std::int64_t na = static_cast<std::int64_t>(active.size());

  Eigen::MatrixXd sub(m, na);
  for (std::int64_t j = 0; j < na; ++j) sub.col(j) = a.data.col(active[j]);
  const Eigen::MatrixXd cov = sub.transpose() * sub / static_cast<double>(m - 1);

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(cov);
  if (solver.info() != Eigen::Success) {
    throw DataError("pca_loadings: eigendecomposition failed");
  }
  // Eigen returns ascending eigenvalues; walk them in reverse.
  const Eigen::VectorXd evals = solver.eigenvalues();
  const Eigen::MatrixXd evecs = solver.eigenvectors();

  double total = 0.0;
  for (std::int64_t i = 0; i < na; ++i) total += std::max(0.0, evals(i));
  if (!(total > 0.0)) {
    throw DataError("pca_loadings: zero total variance");
  }

  const std::int64_t max_k = std::min<std::int64_t>(na, m - 1);
  std::int64_t k = 0;
  double cumulative = 0.0;
  for (std::int64_t i = 0; i < max_k; ++i) {
    cumulative += std::max(0.0, evals(na - 1 - i)) / total;
    ++k;
    if (cumulative >= variance_target - 1e-12) break;
  }

  LoadingMatrix lm;
  lm.k = static_cast<int>(k);
  lm.loadings = Eigen::MatrixXd::Zero(n, k);
  lm.variance_fractions.resize(k);
  for (std::int64_t c = 0; c < k; ++c) {
    const Eigen::VectorXd v = evecs.col(na - 1 - c);
    lm.variance_fractions(c) = std::max(0.0, evals(na - 1 - c)) / total;
    // Sign canonicalization: make the largest-magnitude entry positive,
    // breaking magnitude ties by the lower row index.
    std::int64_t arg = 0;
    double best = -1.0;
    for (std::int64_t r = 0; r < na; ++r) {
      const double mag = std::abs(v(r));
      if (mag > best) {
        best = mag;
        arg = r;
      }
    }
    const double sign = v(arg) < 0.0 ? -1.0 : 1.0;
    for (std::int64_t r = 0; r < na; ++r) {
      lm.loadings(active[r], c) = sign * v(r);
    }
  }
  return lm;
}

double krzanowski_sf(const LoadingMatrix& l, const LoadingMatrix& m, int k) {
  if (l.feature_count() != m.feature_count()) {
    throw DataError("krzanowski_sf: feature count mismatch (" +
                    std::to_string(l.feature_count()) + " vs " +
                    std::to_string(m.feature_count()) + ")");
  }
  if (k < 1 || k > l.k || k > m.k) {
    throw DataError("krzanowski_sf: need k in [1, min(k_l, k_m)], got k=" +
                    std::to_string(k));
  }
  const Eigen::MatrixXd cross =
      l.loadings.leftCols(k).transpose() * m.loadings.leftCols(k);
  return cross.squaredNorm();  // trace(C C') = sum of squared cosines
}

double loading_sf(const LoadingMatrix& a, const LoadingMatrix& b,
                  double dist_km, const DistanceWeight& weight) {
  if (a.feature_count() != b.feature_count()) {
    throw DataError("loading_sf: feature count mismatch (" +
                    std::to_string(a.feature_count()) + " vs " +
                    std::to_string(b.feature_count()) + ")");
  }
  const int k = std::max(a.k, b.k);
  const std::int64_t n = a.feature_count();
  double l1 = 0.0;
  for (int c = 0; c < k; ++c) {
    for (std::int64_t r = 0; r < n; ++r) {
      const double av = c < a.k ? a.loadings(r, c) : 0.0;
      const double bv = c < b.k ? b.loadings(r, c) : 0.0;
      l1 += std::abs(av - bv);
    }
  }
  return weight(dist_km) * l1;
}

}  // namespace ranperf
