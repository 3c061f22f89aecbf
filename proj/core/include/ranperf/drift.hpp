#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "ranperf/learner.hpp"
#include "ranperf/partitioner.hpp"

namespace ranperf {

enum class DriftScope { kCell, kGroup };

/// One detected concept drift: the model's quality on an incoming minibatch
/// fell significantly below the established baseline. Emitted per cell, or
/// once per group when enough of a group degrades at the same time.
struct DriftReport {
  std::int64_t window = 0;
  DriftScope scope = DriftScope::kCell;
  std::vector<std::string> affected_cells;
  double baseline_metric = 0.0;  // accuracy, or RMSE for regression
  double observed_metric = 0.0;
  double delta = 0.0;  // observed - baseline
};

struct DriftConfig {
  double accuracy_drop_threshold = 0.05;  // absolute accuracy points
  double rmse_increase_threshold = 0.25;  // relative RMSE growth
  std::size_t min_baseline_samples = 200;
  std::size_t min_batch_samples = 50;
  double group_fraction = 0.5;  // escalate to group scope at this share
};

/// Rolling per-cell baseline quality. Callers feed evaluation metrics from
/// healthy windows; the baseline only reports once enough samples accrued.
class BaselineTracker {
 public:
  void add(const std::string& cell_key, const EvalMetrics& metrics, Task task);
  std::optional<double> baseline(const std::string& cell_key,
                                 std::size_t min_samples) const;

 private:
  struct Entry {
    double weighted_sum = 0.0;
    std::size_t samples = 0;
  };
  std::map<std::string, Entry> entries_;
};

/// Tests each cell's incoming minibatch against its baseline and flags
/// significant drops; escalates to group scope when at least
/// `group_fraction` of a group's evaluated cells flag in the same window.
std::vector<DriftReport> evaluate_batch(
    const HybridModel& model,
    const std::map<std::string, Dataset>& minibatch_per_cell,
    const BaselineTracker& baselines, const CellGrouping& grouping,
    std::int64_t window, const DriftConfig& config = {});

/// Feature whose ensemble importance moved between two model snapshots.
struct FeatureChange {
  std::string feature;
  double old_importance = 0.0;
  double new_importance = 0.0;
  double delta = 0.0;  // new - old
};

/// Ranks features by absolute importance change between the pre-drift and
/// post-drift models (largest first). Reported by name, so the ranking is
/// invariant to feature order; schemas must describe the same features.
std::vector<FeatureChange> diagnose_drift(const HybridModel& old_model,
                                          const HybridModel& new_model);

enum class AlarmOutcome { kTrueAlarm, kExplained };

const char* to_string(AlarmOutcome outcome);

/// KPI false-alarm verdict. Drops in a window are modelled as n Bernoulli
/// events with model-predicted probability p; the 95% interval on the
/// expected count is np +/- 2 sqrt(np(1-p)), clamped to [0, n]. An observed
/// count inside the interval is explained by the model: a false alarm.
struct AlarmVerdict {
  std::int64_t window = 0;
  std::int64_t observed = 0;
  std::int64_t events = 0;
  double predicted_p = 0.0;
  double ci_low = 0.0;
  double ci_high = 0.0;
  AlarmOutcome outcome = AlarmOutcome::kTrueAlarm;
};

AlarmVerdict verify_alarm(std::int64_t observed, std::int64_t events,
                          double predicted_p, std::int64_t window = 0);

}  // namespace ranperf
