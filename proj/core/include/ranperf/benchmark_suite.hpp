#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <string>
#include <vector>

#include "ranperf/learner.hpp"
#include "ranperf/stream.hpp"
#include "ranperf/synth.hpp"

namespace ranperf {

/// The compared modelling strategies: one model over everything, one per
/// cell, one per equal-size geographic grid box, one per similarity group,
/// and the full hybrid (group-common offline model plus per-cell online
/// deltas).
enum class BenchMethod {
  kGlobal,
  kPerCell,
  kGridSpatial,
  kSimilarityOnly,
  kHybridMtl,
};

const char* to_string(BenchMethod method);

/// Invoked for every held-out prediction, so callers can persist them and
/// re-derive the comparison table without re-training.
using PredictionSink =
    std::function<void(BenchMethod method, const std::string& cell_key,
                       std::size_t row_index, double y_true, double y_pred)>;

struct BenchmarkConfig {
  ScenarioSpec scenario;
  int samples_per_cell = 100;       // training rows per cell
  int test_samples_per_cell = 200;  // held-out rows per cell
  std::vector<BenchMethod> methods = {
      BenchMethod::kGlobal, BenchMethod::kPerCell, BenchMethod::kGridSpatial,
      BenchMethod::kSimilarityOnly, BenchMethod::kHybridMtl};
  FeatureBuildConfig features;   // default: drop classification
  GbtParams learner;
  SimilarityConfig similarity;
  int grid_divisions = 3;        // grid partitioner: g x g equal boxes
  int online_windows = 4;        // hybrid: minibatches consumed per cell
  PredictionSink prediction_sink;  // optional
};

struct MethodResult {
  BenchMethod method = BenchMethod::kGlobal;
  double accuracy = 0.0;
  double balanced_accuracy = 0.0;
  double rmse = 0.0;
  double train_seconds = 0.0;
  int n_partitions = 0;  // models trained by this method
};

struct BenchmarkResult {
  std::vector<MethodResult> methods;
  std::size_t train_rows = 0;
  std::size_t test_rows = 0;
  double grouping_ari = 0.0;  // similarity grouping vs planted truth
};

/// Trains every requested method on identical per-cell training rows and
/// scores them on identical held-out rows.
BenchmarkResult run_method_comparison(const BenchmarkConfig& config);

/// Medians of each method's metrics over per-seed runs (scenario seed is
/// replaced by base_seed + i).
BenchmarkResult run_method_comparison_median(const BenchmarkConfig& config,
                                             int n_seeds,
                                             std::uint64_t base_seed);

struct UpdateTimingConfig {
  ScenarioSpec scenario;
  int n_windows = 10;
  int rows_per_window_per_cell = 100;
  int test_samples_per_cell = 200;
  FeatureBuildConfig features;
  GbtParams learner;
};

/// Incremental-vs-rebuild comparison after `n_windows` accumulated windows:
/// wall time of the last online update against a full retrain over the
/// cumulative data, plus both models' held-out accuracy.
struct UpdateTimingResult {
  double incremental_update_seconds = 0.0;  // last window, all cells
  double full_retrain_seconds = 0.0;        // cumulative pool, one fit
  double incremental_accuracy = 0.0;
  double full_retrain_accuracy = 0.0;
  double incremental_rmse = 0.0;
  double full_retrain_rmse = 0.0;
};

UpdateTimingResult run_update_timing(const UpdateTimingConfig& config);

}  // namespace ranperf
