#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "ranperf/benchmark_suite.hpp"
#include "ranperf/config.hpp"
#include "ranperf/drift.hpp"
#include "ranperf/learner.hpp"
#include "ranperf/stream.hpp"
#include "ranperf/synth.hpp"

namespace ranperf {

inline constexpr const char* kVersion = "0.1.0";

enum class InputMode { kGenerate, kReplay, kStdin };

/// Validated configuration for one pipeline run. Built from a flat
/// key=value file (see docs/cli.md for the key reference); unknown keys are
/// rejected.
struct PipelineConfig {
  InputMode input_mode = InputMode::kGenerate;
  std::string trace_path;     // replay mode
  std::string truth_path;     // cell locations (+ planted truth); sidecar JSON
  std::string scenario_path;  // generate mode
  std::optional<ScenarioSpec> scenario;  // parsed when generating
  double duration_min = 30.0;

  WindowSpec window;
  int lateness_slides = 1;
  SimilarityConfig similarity;

  Task task = Task::kClassification;
  FeatureBuildConfig features;
  GbtParams learner;

  DriftConfig drift;
  double alarm_drop_rate_threshold = 0.005;  // 0.5% drops per window

  std::string output_dir;

  ConfigMap raw;  // original key=value form, hashed into the run manifest

  static PipelineConfig from_file(const std::string& path);
  static PipelineConfig from_map(const ConfigMap& values);
};

struct WindowSummary {
  std::int64_t index = 0;
  std::int64_t start_ms = 0;
  std::int64_t end_ms = 0;
  std::size_t records = 0;
  std::size_t cells = 0;
  std::size_t groups = 0;
  double threshold_used = 0.0;
  double mean_metric = 0.0;  // accuracy (classification) or rmse
  double drop_rate = 0.0;
  std::size_t drift_reports = 0;
  std::size_t alarms = 0;
};

struct RunResult {
  std::vector<WindowSummary> windows;
  std::size_t accepted_records = 0;
  std::size_t rejected_records = 0;
  std::uint64_t late_dropped = 0;
  std::size_t drift_reports = 0;
  std::size_t alarms_raised = 0;
  std::size_t alarms_explained = 0;
  std::vector<std::string> artifacts;  // paths written
};

/// Runs the full pipeline: ingest -> window -> group -> train/update ->
/// drift + alarm filtering -> artifacts. Deterministic given the config
/// (and seed); artifacts are written atomically (temp file + rename) and a
/// manifest records the config hash and version.
RunResult run_pipeline(const PipelineConfig& config);

/// Cell locations from a ground-truth sidecar file.
std::map<CellId, GeoLocation> load_locations(const std::string& truth_path);

/// CLI-facing benchmark driver: runs the method comparison (median over
/// seeds), persists every prediction, and derives the comparison table from
/// the persisted file. Returns the table as formatted text.
struct BenchmarkSuiteConfig {
  BenchmarkConfig comparison;
  int n_seeds = 5;
  std::uint64_t base_seed = 1;
  bool run_update_timing = true;
  UpdateTimingConfig update_timing;
  std::string output_dir;

  static BenchmarkSuiteConfig from_file(const std::string& path);
};

std::string run_benchmark(const BenchmarkSuiteConfig& config);

/// FNV-1a over the canonical (sorted key=value) form of a config map.
std::uint64_t config_hash(const ConfigMap& values);

/// Writes `content` to `path` atomically (temp file in the same directory,
/// then rename).
void write_file_atomic(const std::string& path, const std::string& content);

}  // namespace ranperf
