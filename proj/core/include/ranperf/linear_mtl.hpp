#pragma once

#include <Eigen/Dense>
#include <map>
#include <string>
#include <vector>

#include "ranperf/features.hpp"

namespace ranperf {

enum class MtlLoss { kSquared, kLogistic };

/// Linear multi-task model: prediction for a cell is
/// (w_common + w_specific[cell]) . x. The specific vectors are deltas on the
/// shared weights, l1-penalized so they stay minimal when the group really
/// does share structure.
struct LinearMtlModel {
  Eigen::VectorXd w_common;
  std::map<std::string, Eigen::VectorXd> w_specific;
  double lambda_common = 0.0;
  double lambda_specific = 0.0;

  Eigen::VectorXd effective_weights(const std::string& cell_key) const;
  double predict(const std::string& cell_key, const double* row,
                 std::size_t n) const;
};

struct LinearMtlOptions {
  int max_iterations = 10000;
  double tolerance = 1e-8;  // relative objective change
};

struct LinearMtlFit {
  LinearMtlModel model;
  std::vector<double> objective_trace;  // objective value per iteration
  int iterations = 0;
  bool converged = false;
};

/// Minimizes
///   sum_cells( sum_i L((w_c + w_s^cell) . x_i, y_i) + lambda_s |w_s^cell|_1 )
///     + lambda_c |w_c|_1
/// by proximal gradient (ISTA) with backtracking line search; the objective
/// is monotone non-increasing across iterations. Features should be
/// standardized by the caller. The two penalties default to the same value
/// but are separate knobs. Labels are 0/1 for the logistic loss.
LinearMtlFit fit_linear_mtl(const std::map<std::string, Dataset>& per_cell,
                            double lambda_common, double lambda_specific,
                            MtlLoss loss, const LinearMtlOptions& options = {});

inline LinearMtlFit fit_linear_mtl(const std::map<std::string, Dataset>& per_cell,
                                   double lambda, MtlLoss loss,
                                   const LinearMtlOptions& options = {}) {
  return fit_linear_mtl(per_cell, lambda, lambda, loss, options);
}

}  // namespace ranperf
