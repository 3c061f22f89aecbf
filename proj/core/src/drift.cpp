#include "ranperf/drift.hpp"

#include <algorithm>
#include <cmath>

#include "ranperf/errors.hpp"

namespace ranperf {

void BaselineTracker::add(const std::string& cell_key, const EvalMetrics& metrics,
                          Task task) {
  if (metrics.n == 0) return;
  Entry& e = entries_[cell_key];
  const double value =
      task == Task::kClassification ? metrics.accuracy : metrics.rmse;
  e.weighted_sum += value * static_cast<double>(metrics.n);
  e.samples += metrics.n;
}

std::optional<double> BaselineTracker::baseline(const std::string& cell_key,
                                                std::size_t min_samples) const {
  const auto it = entries_.find(cell_key);
  if (it == entries_.end() || it->second.samples < min_samples) {
    return std::nullopt;
  }
  return it->second.weighted_sum / static_cast<double>(it->second.samples);
}

std::vector<DriftReport> evaluate_batch(
    const HybridModel& model,
    const std::map<std::string, Dataset>& minibatch_per_cell,
    const BaselineTracker& baselines, const CellGrouping& grouping,
    std::int64_t window, const DriftConfig& config) {
  struct CellFlag {
    std::string cell;
    double baseline = 0.0;
    double observed = 0.0;
    bool flagged = false;
  };
  std::vector<CellFlag> evaluated;

  for (const auto& [cell_key, batch] : minibatch_per_cell) {
    if (batch.rows() < config.min_batch_samples) continue;
    const auto baseline =
        baselines.baseline(cell_key, config.min_baseline_samples);
    if (!baseline) continue;  // not enough history to judge
    const EvalMetrics m = evaluate(model, cell_key, batch, window);
    CellFlag flag;
    flag.cell = cell_key;
    flag.baseline = *baseline;
    if (model.task == Task::kClassification) {
      flag.observed = m.accuracy;
      flag.flagged =
          (*baseline - m.accuracy) > config.accuracy_drop_threshold;
    } else {
      flag.observed = m.rmse;
      flag.flagged = *baseline > 0.0 &&
                     (m.rmse - *baseline) / *baseline >
                         config.rmse_increase_threshold;
    }
    evaluated.push_back(std::move(flag));
  }

  // Group escalation: count evaluated/flagged members per group.
  std::map<int, std::vector<const CellFlag*>> by_group;
  for (const auto& flag : evaluated) {
    CellId cell;
    const auto slash = flag.cell.find('/');
    if (slash != std::string::npos) {
      cell.site = flag.cell.substr(0, slash);
      cell.id = flag.cell.substr(slash + 1);
    } else {
      cell.id = flag.cell;
      cell.site = flag.cell;
    }
    by_group[grouping.group_of(cell)].push_back(&flag);
  }

  std::vector<DriftReport> reports;
  for (const auto& [group, members] : by_group) {
    std::vector<const CellFlag*> flagged;
    for (const auto* m : members) {
      if (m->flagged) flagged.push_back(m);
    }
    if (flagged.empty()) continue;
    const bool escalate =
        group >= 0 &&
        static_cast<double>(flagged.size()) >=
            config.group_fraction * static_cast<double>(members.size()) &&
        flagged.size() > 1;
    if (escalate) {
      DriftReport report;
      report.window = window;
      report.scope = DriftScope::kGroup;
      double base_sum = 0.0, obs_sum = 0.0;
      for (const auto* m : flagged) {
        report.affected_cells.push_back(m->cell);
        base_sum += m->baseline;
        obs_sum += m->observed;
      }
      report.baseline_metric = base_sum / static_cast<double>(flagged.size());
      report.observed_metric = obs_sum / static_cast<double>(flagged.size());
      report.delta = report.observed_metric - report.baseline_metric;
      reports.push_back(std::move(report));
    } else {
      for (const auto* m : flagged) {
        DriftReport report;
        report.window = window;
        report.scope = DriftScope::kCell;
        report.affected_cells.push_back(m->cell);
        report.baseline_metric = m->baseline;
        report.observed_metric = m->observed;
        report.delta = m->observed - m->baseline;
        reports.push_back(std::move(report));
      }
    }
  }
  return reports;
}

std::vector<FeatureChange> diagnose_drift(const HybridModel& old_model,
                                          const HybridModel& new_model) {
  if (!old_model.schema || !new_model.schema) {
    throw SchemaError("diagnose_drift: model without schema");
  }
  if (old_model.schema->hash() != new_model.schema->hash()) {
    throw SchemaError("diagnose_drift: models trained on different schemas");
  }
  const auto old_imp = feature_importances(old_model);
  const auto new_imp = feature_importances(new_model);
  std::vector<FeatureChange> changes;
  for (std::size_t i = 0; i < old_imp.size(); ++i) {
    FeatureChange c;
    c.feature = old_model.schema->names()[i];
    c.old_importance = old_imp[i];
    c.new_importance = new_imp[i];
    c.delta = new_imp[i] - old_imp[i];
    changes.push_back(std::move(c));
  }
  std::stable_sort(changes.begin(), changes.end(),
                   [](const FeatureChange& a, const FeatureChange& b) {
                     return std::abs(a.delta) > std::abs(b.delta);
                   });
  return changes;
}

const char* to_string(AlarmOutcome outcome) {
  return outcome == AlarmOutcome::kTrueAlarm ? "true-alarm" : "explained";
}

AlarmVerdict verify_alarm(std::int64_t observed, std::int64_t events,
                          double predicted_p, std::int64_t window) {
  if (events < 0 || observed < 0 || observed > events) {
    throw DataError("verify_alarm: need 0 <= observed <= events");
  }
  if (predicted_p < 0.0 || predicted_p > 1.0 || !std::isfinite(predicted_p)) {
    throw DataError("verify_alarm: predicted probability outside [0, 1]");
  }
  AlarmVerdict v;
  v.window = window;
  v.observed = observed;
  v.events = events;
  v.predicted_p = predicted_p;
  const double n = static_cast<double>(events);
  const double mean = n * predicted_p;
  const double half_width = 2.0 * std::sqrt(mean * (1.0 - predicted_p));
  v.ci_low = std::max(0.0, mean - half_width);
  v.ci_high = std::min(n, mean + half_width);
  const double x = static_cast<double>(observed);
  v.outcome = (x >= v.ci_low && x <= v.ci_high) ? AlarmOutcome::kExplained
                                                : AlarmOutcome::kTrueAlarm;
  return v;
}

}  // namespace ranperf
