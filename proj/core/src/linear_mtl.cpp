#include "ranperf/linear_mtl.hpp"

#include <cmath>

#include "ranperf/errors.hpp"

namespace ranperf {

Eigen::VectorXd LinearMtlModel::effective_weights(
    const std::string& cell_key) const {
  const auto it = w_specific.find(cell_key);
  if (it == w_specific.end()) return w_common;
  return w_common + it->second;
}

double LinearMtlModel::predict(const std::string& cell_key, const double* row,
                               std::size_t n) const {
  const Eigen::VectorXd w = effective_weights(cell_key);
  if (static_cast<std::size_t>(w.size()) != n) {
    throw DataError("linear MTL predict: feature arity mismatch");
  }
  double z = 0.0;
  for (std::size_t i = 0; i < n; ++i) z += w(static_cast<int>(i)) * row[i];
  return z;
}

namespace {

struct CellBlock {
  std::string key;
  Eigen::MatrixXd x;  // m x d
  Eigen::VectorXd y;
};

// Smooth part: sum over cells and rows of the loss at z = x . (w_c + w_s).
double smooth_value(const std::vector<CellBlock>& blocks,
                    const Eigen::VectorXd& w_common,
                    const std::vector<Eigen::VectorXd>& w_specific,
                    MtlLoss loss) {
  double total = 0.0;
  for (std::size_t c = 0; c < blocks.size(); ++c) {
    const Eigen::VectorXd z = blocks[c].x * (w_common + w_specific[c]);
    if (loss == MtlLoss::kSquared) {
      total += 0.5 * (z - blocks[c].y).squaredNorm();
    } else {
      for (int i = 0; i < z.size(); ++i) {
        const double zi = z(i);
        total += (zi > 0 ? zi : 0.0) - blocks[c].y(i) * zi +
                 std::log1p(std::exp(-std::abs(zi)));
      }
    }
  }
  return total;
}

void smooth_gradient(const std::vector<CellBlock>& blocks,
                     const Eigen::VectorXd& w_common,
                     const std::vector<Eigen::VectorXd>& w_specific,
                     MtlLoss loss, Eigen::VectorXd& grad_common,
                     std::vector<Eigen::VectorXd>& grad_specific) {
  grad_common.setZero();
  for (std::size_t c = 0; c < blocks.size(); ++c) {
    const Eigen::VectorXd z = blocks[c].x * (w_common + w_specific[c]);
    Eigen::VectorXd dl(z.size());
    if (loss == MtlLoss::kSquared) {
      dl = z - blocks[c].y;
    } else {
      for (int i = 0; i < z.size(); ++i) {
        dl(i) = 1.0 / (1.0 + std::exp(-z(i))) - blocks[c].y(i);
      }
    }
    grad_specific[c] = blocks[c].x.transpose() * dl;
    grad_common += grad_specific[c];
  }
}

double soft_threshold(double v, double t) {
  if (v > t) return v - t;
  if (v < -t) return v + t;
  return 0.0;
}

double penalty_value(const Eigen::VectorXd& w_common,
                     const std::vector<Eigen::VectorXd>& w_specific,
                     double lambda_common, double lambda_specific) {
  double total = lambda_common * w_common.lpNorm<1>();
  for (const auto& w : w_specific) total += lambda_specific * w.lpNorm<1>();
  return total;
}

}  // namespace

LinearMtlFit fit_linear_mtl(const std::map<std::string, Dataset>& per_cell,
                            double lambda_common, double lambda_specific,
                            MtlLoss loss, const LinearMtlOptions& options) {
  if (per_cell.empty()) throw DataError("fit_linear_mtl: no cells");
  if (lambda_common < 0.0 || lambda_specific < 0.0) {
    throw DataError("fit_linear_mtl: lambda must be >= 0");
  }

  std::vector<CellBlock> blocks;
  std::size_t d = 0;
  for (const auto& [key, ds] : per_cell) {
    if (ds.rows() == 0) throw DataError("fit_linear_mtl: empty cell dataset");
    if (d == 0) d = ds.cols();
    if (ds.cols() != d) {
      throw SchemaError("fit_linear_mtl: feature arity differs across cells");
    }
    CellBlock block;
    block.key = key;
    block.x.resize(ds.rows(), d);
    block.y.resize(ds.rows());
    for (std::size_t i = 0; i < ds.rows(); ++i) {
      for (std::size_t j = 0; j < d; ++j) {
        const double v = ds.row(i)[j];
        if (!std::isfinite(v)) throw DataError("fit_linear_mtl: non-finite feature");
        block.x(static_cast<int>(i), static_cast<int>(j)) = v;
      }
      if (!std::isfinite(ds.y[i])) throw DataError("fit_linear_mtl: non-finite label");
      block.y(static_cast<int>(i)) = ds.y[i];
    }
    blocks.push_back(std::move(block));
  }

  const int n_cells = static_cast<int>(blocks.size());
  const int dim = static_cast<int>(d);
  Eigen::VectorXd w_common = Eigen::VectorXd::Zero(dim);
  std::vector<Eigen::VectorXd> w_specific(n_cells, Eigen::VectorXd::Zero(dim));
  Eigen::VectorXd grad_common(dim);
  std::vector<Eigen::VectorXd> grad_specific(n_cells);

  LinearMtlFit fit;
  double step = 1.0;
  double f_value = smooth_value(blocks, w_common, w_specific, loss);
  double objective =
      f_value + penalty_value(w_common, w_specific, lambda_common, lambda_specific);
  fit.objective_trace.push_back(objective);

  for (int iter = 0; iter < options.max_iterations; ++iter) {
    smooth_gradient(blocks, w_common, w_specific, loss, grad_common,
                    grad_specific);

    Eigen::VectorXd next_common(dim);
    std::vector<Eigen::VectorXd> next_specific(n_cells,
                                               Eigen::VectorXd::Zero(dim));
    double next_f = 0.0;
    // Backtracking: shrink the step until the quadratic upper bound holds;
    // ISTA with this test keeps the full objective monotone.
    for (;;) {
      for (int j = 0; j < dim; ++j) {
        next_common(j) = soft_threshold(w_common(j) - step * grad_common(j),
                                        step * lambda_common);
      }
      for (int c = 0; c < n_cells; ++c) {
        for (int j = 0; j < dim; ++j) {
          next_specific[c](j) =
              soft_threshold(w_specific[c](j) - step * grad_specific[c](j),
                             step * lambda_specific);
        }
      }
      next_f = smooth_value(blocks, next_common, next_specific, loss);
      double linearized = f_value;
      double dist_sq = (next_common - w_common).squaredNorm();
      linearized += grad_common.dot(next_common - w_common);
      for (int c = 0; c < n_cells; ++c) {
        linearized += grad_specific[c].dot(next_specific[c] - w_specific[c]);
        dist_sq += (next_specific[c] - w_specific[c]).squaredNorm();
      }
      if (next_f <= linearized + dist_sq / (2.0 * step) + 1e-12 ||
          step < 1e-18) {
        break;
      }
      step *= 0.5;
    }

    w_common = next_common;
    w_specific = next_specific;
    f_value = next_f;
    const double next_objective =
        f_value +
        penalty_value(w_common, w_specific, lambda_common, lambda_specific);
    fit.objective_trace.push_back(next_objective);
    fit.iterations = iter + 1;
    const double rel_change = std::abs(objective - next_objective) /
                              std::max(1.0, std::abs(objective));
    objective = next_objective;
    if (rel_change < options.tolerance) {
      fit.converged = true;
      break;
    }
  }

  fit.model.w_common = w_common;
  fit.model.lambda_common = lambda_common;
  fit.model.lambda_specific = lambda_specific;
  for (int c = 0; c < n_cells; ++c) {
    fit.model.w_specific[blocks[c].key] = w_specific[c];
  }
  return fit;
}

}  // namespace ranperf
