#include "ranperf/pipeline.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include <json.hpp>

#include "ranperf/errors.hpp"

namespace ranperf {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::string fmt_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.12g", v);
  return buf;
}

Task parse_task(const std::string& text) {
  if (text == "classification") return Task::kClassification;
  if (text == "regression") return Task::kRegression;
  throw ConfigError("learner.task must be classification or regression, got " +
                    text);
}

SimilarityConfig parse_similarity(ConfigView& cfg) {
  SimilarityConfig sim;
  const std::string cols = cfg.get_string("similarity.columns", "");
  if (!cols.empty()) sim.columns = split_list(cols);
  sim.variance_target = cfg.get_double("similarity.variance_target", 0.95);
  sim.standardize = cfg.get_bool("similarity.standardize", true);
  sim.weight.d0_km = cfg.get_double("similarity.d0_km", 1.0);
  if (cfg.has("similarity.threshold")) {
    sim.threshold = cfg.require_double("similarity.threshold");
  }
  sim.threshold_percentile = cfg.get_double("similarity.percentile", 0.10);
  sim.min_rows = static_cast<std::size_t>(cfg.get_int("similarity.min_rows", 8));
  sim.stability_threshold = cfg.get_double("similarity.stability_threshold", 0.8);
  sim.rho = cfg.get_double("similarity.rho", kRhoDefault);
  return sim;
}

GbtParams parse_learner(ConfigView& cfg, Task task) {
  GbtParams params;
  params.task = task;
  params.n_trees = static_cast<int>(cfg.get_int("learner.trees", 30));
  params.learning_rate = cfg.get_double("learner.learning_rate", 0.1);
  params.max_depth = static_cast<int>(cfg.get_int("learner.depth", 5));
  params.min_leaf = static_cast<int>(cfg.get_int("learner.min_leaf", 5));
  params.subsample = cfg.get_double("learner.subsample", 0.8);
  params.seed = static_cast<std::uint64_t>(cfg.get_int("learner.seed", 7));
  const double half_life = cfg.get_double("learner.half_life_windows", 0.0);
  params.half_life_windows =
      half_life > 0.0 ? half_life : std::numeric_limits<double>::infinity();
  params.online_trees_per_update =
      static_cast<int>(cfg.get_int("learner.online_trees", 1));
  params.online_max_depth = static_cast<int>(cfg.get_int("learner.online_depth", 3));
  return params;
}

FeatureBuildConfig parse_features(ConfigView& cfg, Task task) {
  FeatureBuildConfig fb;
  const std::string names = cfg.get_string("learner.features", "");
  if (!names.empty()) fb.features = split_list(names);
  fb.label = task == Task::kClassification ? LabelKind::kDrop
                                           : LabelKind::kThroughputBps;
  fb.rho = cfg.get_double("learner.rho", kRhoDefault);
  const std::string table_path = cfg.get_string("learner.cqi_table", "");
  if (!table_path.empty()) fb.table = CqiSinrTable::from_file(table_path);
  const std::string mac = cfg.get_string("learner.mac_factor", "as_printed");
  if (mac == "as_printed") {
    fb.throughput.mac_factor = MacFactorMode::kAsPrinted;
  } else if (mac == "efficiency") {
    fb.throughput.mac_factor = MacFactorMode::kEfficiency;
  } else {
    throw ConfigError("learner.mac_factor must be as_printed or efficiency");
  }
  return fb;
}

DriftConfig parse_drift(ConfigView& cfg) {
  DriftConfig drift;
  drift.accuracy_drop_threshold = cfg.get_double("drift.accuracy_drop", 0.05);
  drift.rmse_increase_threshold = cfg.get_double("drift.rmse_increase", 0.25);
  drift.min_baseline_samples =
      static_cast<std::size_t>(cfg.get_int("drift.min_baseline", 200));
  drift.min_batch_samples =
      static_cast<std::size_t>(cfg.get_int("drift.min_batch", 50));
  drift.group_fraction = cfg.get_double("drift.group_fraction", 0.5);
  return drift;
}

}  // namespace

PipelineConfig PipelineConfig::from_file(const std::string& path) {
  return from_map(load_config_file(path));
}

PipelineConfig PipelineConfig::from_map(const ConfigMap& values) {
  ConfigView cfg(values);
  PipelineConfig pc;
  pc.raw = values;

  const std::string mode = cfg.get_string("input.mode", "generate");
  if (mode == "generate") {
    pc.input_mode = InputMode::kGenerate;
    pc.scenario_path = cfg.require_string("input.scenario");
    pc.duration_min = cfg.get_double("input.duration_min", 30.0);
    ConfigView scenario_cfg(load_config_file(pc.scenario_path));
    pc.scenario = ScenarioSpec::from_config(scenario_cfg);
    scenario_cfg.reject_unknown_keys();
  } else if (mode == "replay") {
    pc.input_mode = InputMode::kReplay;
    pc.trace_path = cfg.require_string("input.trace");
    pc.truth_path = cfg.require_string("input.truth");
  } else if (mode == "stdin") {
    pc.input_mode = InputMode::kStdin;
    pc.truth_path = cfg.require_string("input.truth");
  } else {
    throw ConfigError("input.mode must be generate, replay or stdin");
  }

  pc.window.window_ms = cfg.get_int("window.duration_sec", 600) * 1000;
  pc.window.slide_ms =
      cfg.get_int("window.slide_sec", pc.window.window_ms / 1000) * 1000;
  pc.window.validate();
  pc.lateness_slides = static_cast<int>(cfg.get_int("window.lateness_slides", 1));

  pc.similarity = parse_similarity(cfg);
  pc.task = parse_task(cfg.get_string("learner.task", "classification"));
  pc.learner = parse_learner(cfg, pc.task);
  pc.features = parse_features(cfg, pc.task);
  pc.drift = parse_drift(cfg);
  pc.alarm_drop_rate_threshold = cfg.get_double("alarm.drop_rate_threshold", 0.005);
  pc.output_dir = cfg.require_string("output.dir");

  cfg.reject_unknown_keys();
  return pc;
}

std::map<CellId, GeoLocation> load_locations(const std::string& truth_path) {
  std::ifstream in(truth_path);
  if (!in) throw IoError("cannot open ground truth file: " + truth_path);
  json doc = json::parse(in, nullptr, /*allow_exceptions=*/false);
  if (doc.is_discarded() || !doc.contains("cells")) {
    throw DataError("ground truth file: missing cells array: " + truth_path);
  }
  std::map<CellId, GeoLocation> out;
  for (const auto& cell : doc["cells"]) {
    CellId id{cell.at("cell_id").get<std::string>(),
              cell.at("site").get<std::string>()};
    out[id] = GeoLocation{cell.at("latitude").get<double>(),
                          cell.at("longitude").get<double>()};
  }
  return out;
}

std::uint64_t config_hash(const ConfigMap& values) {
  std::uint64_t h = 1469598103934665603ull;
  for (const auto& [k, v] : values) {
    for (const char c : k + "=" + v + "\n") {
      h ^= static_cast<unsigned char>(c);
      h *= 1099511628211ull;
    }
  }
  return h;
}

void write_file_atomic(const std::string& path, const std::string& content) {
  const std::string tmp = path + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot write " + tmp);
    out << content;
    if (!out) throw IoError("write failed: " + tmp);
  }
  fs::rename(tmp, path);
}

namespace {

struct PipelineState {
  const PipelineConfig& config;
  std::map<CellId, GeoLocation> locations;
  std::map<int, HybridModel> prev_models;  // keyed by previous window group id
  BaselineTracker baselines;

  std::ostringstream groupings;
  std::ostringstream metrics;
  std::ostringstream drift_lines;
  std::ostringstream alarm_lines;
  RunResult result;
  std::map<int, HybridModel> last_models;  // final window's models
};

void process_emission(PipelineState& st, const WindowedGroups& wg) {
  const PipelineConfig& config = st.config;
  WindowSummary summary;
  summary.index = wg.index;
  summary.start_ms = wg.window_start_ms;
  summary.end_ms = wg.window_end_ms;
  summary.records = wg.record_count();
  summary.cells = wg.records.size();
  summary.groups = wg.grouping.groups.size();
  summary.threshold_used = wg.threshold_used;

  for (std::size_t g = 0; g < wg.grouping.groups.size(); ++g) {
    for (const auto& cell : wg.grouping.groups[g]) {
      st.groupings << cell.key() << ',' << g << ',' << wg.index << '\n';
    }
  }

  // Per-group learner datasets for this window.
  std::map<int, std::map<std::string, Dataset>> group_data;
  for (std::size_t g = 0; g < wg.grouping.groups.size(); ++g) {
    for (const auto& cell : wg.grouping.groups[g]) {
      const auto it = wg.records.find(cell);
      if (it == wg.records.end()) continue;
      Dataset ds = build_dataset(it->second, config.features);
      if (ds.rows() > 0) {
        group_data[static_cast<int>(g)][cell.key()] = std::move(ds);
      }
    }
  }

  std::map<int, HybridModel> models_now;
  double metric_weighted = 0.0;
  std::size_t metric_rows = 0;
  double predicted_p_sum = 0.0;
  std::size_t predicted_rows = 0;

  for (auto& [g, per_cell] : group_data) {
    const HybridModel* prior = nullptr;
    GroupChange change = GroupChange::kNew;
    if (static_cast<std::size_t>(g) < wg.lineage.matches.size()) {
      const GroupMatch& match = wg.lineage.matches[g];
      change = match.change;
      if (match.prev_group) {
        const auto it = st.prev_models.find(*match.prev_group);
        if (it != st.prev_models.end()) prior = &it->second;
      }
    }

    // Drift check against the pre-update model.
    if (prior) {
      const auto reports = evaluate_batch(*prior, per_cell, st.baselines,
                                          wg.grouping, wg.index, config.drift);
      for (const auto& report : reports) {
        json line = {
            {"window", report.window},
            {"scope", report.scope == DriftScope::kGroup ? "group" : "cell"},
            {"cells", report.affected_cells},
            {"baseline", report.baseline_metric},
            {"observed", report.observed_metric},
            {"delta", report.delta}};
        st.drift_lines << line.dump() << '\n';
        ++summary.drift_reports;
        ++st.result.drift_reports;
      }
      // Baselines accrue from the same kind of measurement the drift check
      // makes: pre-update, out-of-sample accuracy. Mixing in post-update
      // training accuracy would bias the baseline upward and flood the
      // detector with false positives.
      for (const auto& [cell_key, ds] : per_cell) {
        st.baselines.add(cell_key, evaluate(*prior, cell_key, ds, wg.index),
                         config.task);
      }
    }

    // Model maintenance: rebuild on new/major-changed groups, otherwise
    // append online trees per cell.
    HybridModel model;
    if (!prior || change == GroupChange::kNew ||
        change == GroupChange::kMajorChange) {
      model = fit_offline(per_cell, config.learner);
    } else {
      model = *prior;
      for (const auto& [cell_key, ds] : per_cell) {
        model = update_online(model, cell_key, ds, wg.index);
      }
    }

    // KPI prediction uses the pre-update model when one exists (a true
    // forecast); the freshly fit model otherwise.
    const HybridModel& forecaster = prior ? *prior : model;
    if (config.task == Task::kClassification) {
      for (const auto& [cell_key, ds] : per_cell) {
        for (std::size_t i = 0; i < ds.rows(); ++i) {
          predicted_p_sum += forecaster.predict(cell_key, ds.row(i), wg.index);
          ++predicted_rows;
        }
      }
    }

    for (const auto& [cell_key, ds] : per_cell) {
      const EvalMetrics m = evaluate(model, cell_key, ds, wg.index);
      const double value =
          config.task == Task::kClassification ? m.accuracy : m.rmse;
      metric_weighted += value * static_cast<double>(m.n);
      metric_rows += m.n;
    }
    models_now[g] = std::move(model);
  }

  // KPI alarm on the window drop rate.
  std::size_t drops = 0;
  for (const auto& [cell, recs] : wg.records) {
    for (const auto& rec : recs) drops += rec.dropped ? 1 : 0;
  }
  summary.drop_rate =
      summary.records > 0
          ? static_cast<double>(drops) / static_cast<double>(summary.records)
          : 0.0;
  if (config.task == Task::kClassification && summary.records > 0 &&
      summary.drop_rate > config.alarm_drop_rate_threshold &&
      predicted_rows > 0) {
    const double p_hat = predicted_p_sum / static_cast<double>(predicted_rows);
    const AlarmVerdict verdict =
        verify_alarm(static_cast<std::int64_t>(drops),
                     static_cast<std::int64_t>(summary.records),
                     std::clamp(p_hat, 0.0, 1.0), wg.index);
    json line = {{"window", verdict.window},
                 {"observed", verdict.observed},
                 {"events", verdict.events},
                 {"predicted_p", verdict.predicted_p},
                 {"ci_low", verdict.ci_low},
                 {"ci_high", verdict.ci_high},
                 {"verdict", to_string(verdict.outcome)}};
    st.alarm_lines << line.dump() << '\n';
    ++summary.alarms;
    ++st.result.alarms_raised;
    if (verdict.outcome == AlarmOutcome::kExplained) ++st.result.alarms_explained;
  }

  summary.mean_metric =
      metric_rows > 0 ? metric_weighted / static_cast<double>(metric_rows) : 0.0;
  st.metrics << summary.index << ',' << summary.start_ms << ','
             << summary.end_ms << ',' << summary.records << ',' << summary.cells
             << ',' << summary.groups << ',' << fmt_double(summary.threshold_used)
             << ',' << fmt_double(summary.mean_metric) << ','
             << fmt_double(summary.drop_rate) << ',' << summary.drift_reports
             << ',' << summary.alarms << '\n';
  st.result.windows.push_back(summary);
  st.prev_models = models_now;
  st.last_models = std::move(models_now);
}

}  // namespace

RunResult run_pipeline(const PipelineConfig& config) {
  if (config.output_dir.empty()) throw ConfigError("output.dir is required");
  fs::create_directories(config.output_dir);
  fs::create_directories(config.output_dir + "/models");

  PipelineState st{config, {}, {}, {}, {}, {}, {}, {}, {}, {}};
  st.metrics << "window,start_ms,end_ms,records,cells,groups,threshold,"
             << (config.task == Task::kClassification ? "accuracy" : "rmse")
             << ",drop_rate,drift_reports,alarms\n";

  const auto started = std::chrono::steady_clock::now();

  std::optional<GeneratedTrace> generated;
  if (config.input_mode == InputMode::kGenerate) {
    if (!config.scenario) throw ConfigError("generate mode: missing scenario");
    generated = generate(*config.scenario, config.duration_min);
    for (const auto& ct : generated->truth.cells) {
      st.locations[ct.cell] = ct.location;
    }
  } else {
    st.locations = load_locations(config.truth_path);
  }

  SimilarityWindowEngine engine(config.window, config.similarity, st.locations,
                                config.lateness_slides);
  const auto drain = [&](std::vector<WindowedGroups> emissions) {
    for (const auto& wg : emissions) process_emission(st, wg);
  };

  if (generated) {
    for (const auto& rec : generated->records) {
      engine.push(rec);
      drain(engine.poll());
    }
    st.result.accepted_records = generated->records.size();
  } else {
    std::ifstream file;
    std::istream* in = &std::cin;
    if (config.input_mode == InputMode::kReplay) {
      file.open(config.trace_path);
      if (!file) throw IoError("cannot open trace file: " + config.trace_path);
      in = &file;
    }
    TraceJsonReader reader(*in);
    while (auto outcome = reader.next()) {
      if (std::holds_alternative<BearerRecord>(*outcome)) {
        engine.push(std::get<BearerRecord>(*outcome));
        ++st.result.accepted_records;
        drain(engine.poll());
      } else {
        ++st.result.rejected_records;
      }
    }
  }
  drain(engine.flush());
  st.result.late_dropped = engine.late_dropped();

  const double wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - started)
          .count();

  const std::string dir = config.output_dir + "/";
  const auto emit = [&](const std::string& name, const std::string& content) {
    write_file_atomic(dir + name, content);
    st.result.artifacts.push_back(dir + name);
  };
  emit("groupings.csv", "cell_id,group_id,generation\n" + st.groupings.str());
  emit("metrics.csv", st.metrics.str());
  emit("drift.jsonl", st.drift_lines.str());
  emit("alarms.jsonl", st.alarm_lines.str());
  {
    FeatureSchema schema(config.features.features);
    emit("feature_schema.txt", schema.manifest());
  }
  for (const auto& [gid, model] : st.last_models) {
    const std::string name = "models/group_" + std::to_string(gid) + ".json";
    save_model(model, dir + name);
    st.result.artifacts.push_back(dir + name);
  }
  if (generated && config.input_mode == InputMode::kGenerate) {
    emit("ground_truth.json", generated->truth.to_json() + "\n");
  }

  json manifest;
  manifest["version"] = kVersion;
  manifest["config_hash"] = config_hash(config.raw);
  manifest["windows"] = st.result.windows.size();
  manifest["accepted_records"] = st.result.accepted_records;
  manifest["rejected_records"] = st.result.rejected_records;
  manifest["late_dropped"] = st.result.late_dropped;
  json artifact_list = json::array();
  for (const auto& a : st.result.artifacts) {
    artifact_list.push_back(fs::path(a).filename().string());
  }
  manifest["artifacts"] = artifact_list;
  emit("manifest.json", manifest.dump(2) + "\n");

  // Wall-clock timing lives outside the deterministic artifact set.
  write_file_atomic(dir + "timings.txt",
                    "total_seconds=" + fmt_double(wall_seconds) + "\n");
  return st.result;
}

BenchmarkSuiteConfig BenchmarkSuiteConfig::from_file(const std::string& path) {
  ConfigView cfg(load_config_file(path));
  BenchmarkSuiteConfig suite;

  const std::string scenario_path = cfg.require_string("benchmark.scenario");
  ConfigView scenario_cfg(load_config_file(scenario_path));
  suite.comparison.scenario = ScenarioSpec::from_config(scenario_cfg);
  scenario_cfg.reject_unknown_keys();

  suite.comparison.samples_per_cell =
      static_cast<int>(cfg.get_int("benchmark.samples_per_cell", 100));
  suite.comparison.test_samples_per_cell =
      static_cast<int>(cfg.get_int("benchmark.test_samples_per_cell", 200));
  suite.comparison.grid_divisions =
      static_cast<int>(cfg.get_int("benchmark.grid_divisions", 3));
  suite.comparison.online_windows =
      static_cast<int>(cfg.get_int("benchmark.online_windows", 4));
  suite.n_seeds = static_cast<int>(cfg.get_int("benchmark.seeds", 5));
  suite.base_seed = static_cast<std::uint64_t>(cfg.get_int("benchmark.base_seed", 1));
  suite.run_update_timing = cfg.get_bool("benchmark.update_timing", true);

  const Task task = parse_task(cfg.get_string("learner.task", "classification"));
  suite.comparison.learner = parse_learner(cfg, task);
  suite.comparison.features = parse_features(cfg, task);
  suite.comparison.similarity = parse_similarity(cfg);

  suite.update_timing.scenario = suite.comparison.scenario;
  suite.update_timing.n_windows =
      static_cast<int>(cfg.get_int("benchmark.timing_windows", 10));
  suite.update_timing.rows_per_window_per_cell =
      static_cast<int>(cfg.get_int("benchmark.timing_rows_per_window", 100));
  suite.update_timing.test_samples_per_cell =
      suite.comparison.test_samples_per_cell;
  suite.update_timing.features = suite.comparison.features;
  suite.update_timing.learner = suite.comparison.learner;

  suite.output_dir = cfg.require_string("output.dir");
  cfg.reject_unknown_keys();
  return suite;
}

std::string run_benchmark(const BenchmarkSuiteConfig& config) {
  if (config.output_dir.empty()) throw ConfigError("output.dir is required");
  fs::create_directories(config.output_dir);
  const std::string predictions_path = config.output_dir + "/predictions.csv";

  // Pass 1: train and persist every held-out prediction.
  {
    std::ofstream predictions(predictions_path + ".tmp");
    if (!predictions) throw IoError("cannot write " + predictions_path);
    predictions << "seed,method,cell,row,y_true,y_pred\n";
    for (int s = 0; s < config.n_seeds; ++s) {
      BenchmarkConfig cfg = config.comparison;
      cfg.scenario.seed = config.base_seed + static_cast<std::uint64_t>(s);
      const std::uint64_t seed = cfg.scenario.seed;
      cfg.prediction_sink = [&predictions, seed](BenchMethod method,
                                                 const std::string& cell,
                                                 std::size_t row, double y_true,
                                                 double y_pred) {
        predictions << seed << ',' << to_string(method) << ',' << cell << ','
                    << row << ',' << fmt_double(y_true) << ','
                    << fmt_double(y_pred) << '\n';
      };
      run_method_comparison(cfg);
    }
  }
  fs::rename(predictions_path + ".tmp", predictions_path);

  // Pass 2: the table is derived from the persisted predictions alone.
  struct Agg {
    std::int64_t correct = 0, tp = 0, tn = 0, pos = 0, neg = 0;
    double sse = 0.0;
    std::size_t n = 0;
  };
  std::map<std::pair<std::uint64_t, std::string>, Agg> per_seed_method;
  {
    std::ifstream in(predictions_path);
    std::string line;
    std::getline(in, line);  // header
    while (std::getline(in, line)) {
      std::istringstream ls(line);
      std::string seed_s, method, cell, row_s, y_true_s, y_pred_s;
      std::getline(ls, seed_s, ',');
      std::getline(ls, method, ',');
      std::getline(ls, cell, ',');
      std::getline(ls, row_s, ',');
      std::getline(ls, y_true_s, ',');
      std::getline(ls, y_pred_s, ',');
      const double y_true = std::stod(y_true_s);
      const double y_pred = std::stod(y_pred_s);
      Agg& agg = per_seed_method[{std::stoull(seed_s), method}];
      const bool actual = y_true > 0.5;
      const bool predicted = y_pred >= 0.5;
      if (actual == predicted) ++agg.correct;
      if (actual) {
        ++agg.pos;
        if (predicted) ++agg.tp;
      } else {
        ++agg.neg;
        if (!predicted) ++agg.tn;
      }
      const double e = y_true - y_pred;
      agg.sse += e * e;
      ++agg.n;
    }
  }

  const auto median_of = [](std::vector<double> v) {
    if (v.empty()) return 0.0;
    std::sort(v.begin(), v.end());
    const std::size_t n = v.size();
    return n % 2 == 1 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
  };

  const bool classify = config.comparison.learner.task == Task::kClassification;
  std::ostringstream table;
  std::ostringstream csv;
  table << "method            " << (classify ? "accuracy  balanced" : "rmse     ")
        << "  (median over " << config.n_seeds << " seeds)\n";
  csv << "method," << (classify ? "accuracy,balanced_accuracy" : "rmse") << "\n";
  for (const BenchMethod method : config.comparison.methods) {
    std::vector<double> acc, bal, rmse;
    for (const auto& [key, agg] : per_seed_method) {
      if (key.second != to_string(method) || agg.n == 0) continue;
      acc.push_back(static_cast<double>(agg.correct) / static_cast<double>(agg.n));
      const double rp = agg.pos > 0 ? static_cast<double>(agg.tp) / agg.pos : 1.0;
      const double rn = agg.neg > 0 ? static_cast<double>(agg.tn) / agg.neg : 1.0;
      bal.push_back(0.5 * (rp + rn));
      rmse.push_back(std::sqrt(agg.sse / static_cast<double>(agg.n)));
    }
    char row[160];
    if (classify) {
      std::snprintf(row, sizeof(row), "%-18s%-10.4f%-10.4f\n", to_string(method),
                    median_of(acc), median_of(bal));
      csv << to_string(method) << ',' << fmt_double(median_of(acc)) << ','
          << fmt_double(median_of(bal)) << '\n';
    } else {
      std::snprintf(row, sizeof(row), "%-18s%-10.4f\n", to_string(method),
                    median_of(rmse));
      csv << to_string(method) << ',' << fmt_double(median_of(rmse)) << '\n';
    }
    table << row;
  }
  write_file_atomic(config.output_dir + "/benchmark.csv", csv.str());

  if (config.run_update_timing) {
    const UpdateTimingResult timing = run_update_timing(config.update_timing);
    std::ostringstream timing_csv;
    timing_csv << "incremental_update_seconds,full_retrain_seconds,"
                  "incremental_accuracy,full_retrain_accuracy,"
                  "incremental_rmse,full_retrain_rmse\n"
               << fmt_double(timing.incremental_update_seconds) << ','
               << fmt_double(timing.full_retrain_seconds) << ','
               << fmt_double(timing.incremental_accuracy) << ','
               << fmt_double(timing.full_retrain_accuracy) << ','
               << fmt_double(timing.incremental_rmse) << ','
               << fmt_double(timing.full_retrain_rmse) << '\n';
    write_file_atomic(config.output_dir + "/update_timing.csv", timing_csv.str());
    char row[200];
    std::snprintf(row, sizeof(row),
                  "\nupdate timing: incremental %.3fs vs full retrain %.3fs "
                  "(accuracy %.4f vs %.4f)\n",
                  timing.incremental_update_seconds, timing.full_retrain_seconds,
                  timing.incremental_accuracy, timing.full_retrain_accuracy);
    table << row;
  }
  return table.str();
}

}  // namespace ranperf
