#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "ranperf/config.hpp"
#include "ranperf/geo.hpp"
#include "ranperf/trace.hpp"

namespace ranperf {

/// Generator feature columns, in draw order: rsrp dBm, rsrq dB, cqi latent
/// (rounded into cqi_stream1/2), ul_sinr dB, bler.
const std::vector<std::string>& synth_columns();
inline constexpr int kSynthColumnCount = 5;

/// One independent drop cause: a logistic ramp of probability in the margin
/// past a threshold. A soft rule keeps learned trees honest; a hard cutoff
/// would saturate accuracy at 100% and hide learner bugs.
struct DropTerm {
  std::string column;     // rsrp | rsrq | ul_sinr
  char direction = '<';   // drop risk below ('<') or above ('>') threshold
  double threshold = 0.0;
  double p_max = 0.9;     // plateau probability deep past the threshold
  double width_db = 2.0;  // logistic width

  double probability(double value) const;
};

/// OR-combination of independent causes plus a background rate.
struct DropRule {
  double base_rate = 0.01;
  std::vector<DropTerm> terms;

  double probability(const Eigen::VectorXd& features) const;
  /// Cause attribution: name of the term with the largest contribution at
  /// these feature values, or "background".
  std::string dominant_cause(const Eigen::VectorXd& features) const;
};

struct GroupProfile {
  Eigen::VectorXd mean;        // kSynthColumnCount
  Eigen::MatrixXd covariance;  // kSynthColumnCount^2, symmetric PSD
  DropRule drop_rule;
};

/// A planted distribution change: from `minute` on, the group's feature
/// means shift and/or its drop rule is replaced.
struct DriftEvent {
  double minute = 0.0;
  int group = 0;
  Eigen::VectorXd mean_shift;          // kSynthColumnCount, zero where unchanged
  std::optional<DropRule> new_rule;
};

struct ScenarioSpec {
  std::uint64_t seed = 1;
  int n_cells = 8;
  int n_groups = 2;
  std::vector<int> cells_per_group;  // empty -> near-even split

  double base_intensity_per_min = 30.0;  // bearers per minute per cell
  double intensity_sigma = 0.5;          // log-normal skew across cells
  double rule_jitter_db = 0.0;           // per-cell threshold jitter
  double rsrq_missing_prob = 0.0;        // fraction of records without rsrq

  GeoLocation center{40.75, -73.99};
  double centroid_spread_km = 0.0;  // 0 interleaves groups in space
  double cell_jitter_km = 2.0;

  std::vector<GroupProfile> groups;  // size n_groups
  std::vector<DriftEvent> drift_events;

  void validate() const;  // throws ConfigError with a description

  /// Scenario file format (same key=value grammar as the CLI config); see
  /// docs/cli.md for the key list.
  static ScenarioSpec from_config(ConfigView& cfg);
  std::string to_config() const;

  std::vector<int> resolved_cells_per_group() const;
};

struct CellTruth {
  CellId cell;
  int group = 0;
  GeoLocation location;
  double intensity_per_min = 0.0;
};

struct DropCause {
  std::string cell_key;
  std::int64_t seq = 0;  // matches the record's "seq" extra
  std::string cause;
};

struct GroundTruth {
  std::vector<CellTruth> cells;
  std::vector<DriftEvent> drift_events;
  std::vector<DropCause> drop_causes;

  std::string to_json() const;
  int group_of(const CellId& cell) const;  // -1 when unknown
};

struct GeneratedTrace {
  std::vector<BearerRecord> records;  // merged arrival order, minute-major
  GroundTruth truth;
};

/// Deterministic function of (spec, duration): same seed, same bytes.
/// Per-cell, per-minute substreams are seeded independently from the master
/// seed, so any parallel split along those axes reproduces the sequence.
GeneratedTrace generate(const ScenarioSpec& spec, double duration_min);

/// Streams the trace to `trace_path` (JSON lines) and writes the ground
/// truth sidecar next to it.
void generate_to_file(const ScenarioSpec& spec, double duration_min,
                      const std::string& trace_path,
                      const std::string& truth_path);

/// Covariance assembled from per-column standard deviations and sparse
/// correlation entries (i, j, rho). Validates PSD.
Eigen::MatrixXd covariance_from_std_corr(
    const std::vector<double>& stddevs,
    const std::vector<std::tuple<int, int, double>>& correlations);

}  // namespace ranperf
