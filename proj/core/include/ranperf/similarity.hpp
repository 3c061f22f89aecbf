#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <string>
#include <vector>

#include "ranperf/trace.hpp"

namespace ranperf {

/// m x n matrix of one cell's bearer features over one window, columns
/// adjusted to zero mean (and, by default, unit variance — raw units like
/// dBm vs counts would otherwise dominate the covariance). Constant columns
/// are flagged rather than scaled so n stays fixed across all matrices of an
/// analysis.
struct MeasurementMatrix {
  CellId cell;
  std::int64_t window_start_ms = 0;
  std::int64_t window_end_ms = 0;
  std::vector<std::string> columns;

  Eigen::MatrixXd data;          // adjusted values, m x n
  Eigen::VectorXd column_means;  // subtracted means, n
  Eigen::VectorXd column_scales; // divisors (1.0 where not standardized), n
  std::vector<bool> constant_column;  // true where the raw column was constant

  std::int64_t rows() const { return data.rows(); }
  std::int64_t cols() const { return data.cols(); }
};

/// Builds a MeasurementMatrix from raw rows (one vector per bearer, arity ==
/// columns.size()). Throws DataError when rows is empty or arity mismatches.
MeasurementMatrix build_measurement_matrix(const CellId& cell,
                                           std::vector<std::string> columns,
                                           const std::vector<std::vector<double>>& rows,
                                           std::int64_t window_start_ms = 0,
                                           std::int64_t window_end_ms = 0,
                                           bool standardize = true);

/// PCA weight matrix: column i holds the loading of principal component i on
/// the original n features. Columns are unit-norm, mutually orthogonal, and
/// sign-canonicalized (the entry of largest magnitude is positive) so two
/// runs over the same data are bit-comparable.
struct LoadingMatrix {
  Eigen::MatrixXd loadings;           // n x k
  Eigen::VectorXd variance_fractions; // k, descending
  int k = 0;

  std::int64_t feature_count() const { return loadings.rows(); }
};

/// PCA of the measurement matrix keeping the smallest k whose cumulative
/// variance fraction reaches `variance_target` (default the 95% heuristic).
/// Requires m >= 2 and at least one non-constant column; constant columns
/// come back as zero loading rows.
LoadingMatrix pca_loadings(const MeasurementMatrix& a, double variance_target = 0.95);

/// Krzanowski similarity factor over the first k components of each side:
/// trace(L'M M'L) = sum of squared cosines between all component pairs.
/// Symmetric; equals k when L == M; requires k components available on both
/// sides and matching feature counts.
double krzanowski_sf(const LoadingMatrix& l, const LoadingMatrix& m, int k);

/// Distance weighting for the production metric: w(d) = 1 + d / d0,
/// monotone increasing with w(0) = 1.
struct DistanceWeight {
  double d0_km = 1.0;
  double operator()(double dist_km) const { return 1.0 + dist_km / d0_km; }
};

/// Production similarity metric: distance weight times the elementwise L1
/// difference between corresponding loading columns. LOWER means MORE
/// similar; 0 iff loadings are identical. When the two sides kept a
/// different number of components, the shorter side is zero-padded to
/// k = max(k_a, k_b) so structural mismatch is penalized rather than hidden.
double loading_sf(const LoadingMatrix& a, const LoadingMatrix& b,
                  double dist_km = 0.0, const DistanceWeight& weight = {});

}  // namespace ranperf
