// ranperf command-line driver: generate synthetic traces, run the analysis
// pipeline, compare modelling strategies, inspect model files, and check KPI
// alarms against the model-predicted confidence interval.
//
// Exit codes (documented in docs/cli.md): 0 success, 2 configuration error,
// 3 I/O error, 4 data error, 5 internal error.

#include <cstdlib>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "ranperf/drift.hpp"
#include "ranperf/errors.hpp"
#include "ranperf/learner.hpp"
#include "ranperf/pipeline.hpp"
#include "ranperf/synth.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfig = 2;
constexpr int kExitIo = 3;
constexpr int kExitData = 4;
constexpr int kExitInternal = 5;

int run_generate(const std::string& scenario_path, double duration_min,
                 const std::string& out_path, std::string truth_path) {
  ranperf::ConfigView cfg(ranperf::load_config_file(scenario_path));
  const ranperf::ScenarioSpec spec = ranperf::ScenarioSpec::from_config(cfg);
  cfg.reject_unknown_keys();
  if (truth_path.empty()) truth_path = out_path + ".truth.json";
  ranperf::generate_to_file(spec, duration_min, out_path, truth_path);
  std::cout << "wrote " << out_path << " and " << truth_path << "\n";
  return kExitOk;
}

int run_run(const std::string& config_path,
            const std::vector<std::string>& overrides) {
  ranperf::ConfigMap values = ranperf::load_config_file(config_path);
  for (const auto& kv : overrides) {
    const auto parsed = ranperf::parse_config_text(kv);
    for (const auto& [k, v] : parsed) values[k] = v;
  }
  const ranperf::PipelineConfig config = ranperf::PipelineConfig::from_map(values);
  const ranperf::RunResult result = ranperf::run_pipeline(config);
  std::cout << "windows=" << result.windows.size()
            << " accepted=" << result.accepted_records
            << " rejected=" << result.rejected_records
            << " late_dropped=" << result.late_dropped
            << " drift_reports=" << result.drift_reports
            << " alarms=" << result.alarms_raised << " (explained "
            << result.alarms_explained << ")\n";
  for (const auto& artifact : result.artifacts) {
    std::cout << "  " << artifact << "\n";
  }
  return kExitOk;
}

int run_benchmark_cmd(const std::string& config_path) {
  const auto config = ranperf::BenchmarkSuiteConfig::from_file(config_path);
  std::cout << ranperf::run_benchmark(config);
  return kExitOk;
}

int run_inspect(const std::string& model_path) {
  const ranperf::HybridModel model = ranperf::load_model(model_path);
  std::cout << "task: " << ranperf::to_string(model.task) << "\n";
  std::cout << "schema (" << model.schema->size() << "):";
  for (const auto& name : model.schema->names()) std::cout << ' ' << name;
  std::cout << "\nschema_hash: " << model.schema->hash() << "\n";
  std::cout << "common trees: " << model.common.size() << "\n";
  std::size_t online = 0;
  for (const auto& [cell, trees] : model.per_cell) online += trees.size();
  std::cout << "online trees: " << online << " across " << model.per_cell.size()
            << " cells\n";
  std::cout << "half_life_windows: " << model.half_life_windows << "\n";
  const auto importances = ranperf::feature_importances(model);
  std::cout << "feature importances:\n";
  for (std::size_t i = 0; i < importances.size(); ++i) {
    std::cout << "  " << model.schema->names()[i] << ": " << importances[i]
              << "\n";
  }
  return kExitOk;
}

int run_verify_alarm(std::int64_t observed, std::int64_t events, double p) {
  const ranperf::AlarmVerdict v = ranperf::verify_alarm(observed, events, p);
  std::cout << "ci=[" << v.ci_low << ", " << v.ci_high << "] observed=" << observed
            << " verdict=" << ranperf::to_string(v.outcome) << "\n";
  return v.outcome == ranperf::AlarmOutcome::kExplained ? kExitOk : kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Streaming RAN performance analytics"};
  app.require_subcommand(1);

  auto* generate = app.add_subcommand("generate", "Generate a synthetic trace");
  std::string scenario_path, out_path, truth_path;
  double duration_min = 30.0;
  generate->add_option("--scenario", scenario_path, "Scenario config file")
      ->required();
  generate->add_option("--duration-min", duration_min, "Trace duration, minutes");
  generate->add_option("--out", out_path, "Output trace path (JSON lines)")
      ->required();
  generate->add_option("--truth", truth_path,
                       "Ground-truth sidecar path (default <out>.truth.json)");

  auto* run = app.add_subcommand("run", "Run the analysis pipeline");
  std::string run_config;
  std::vector<std::string> overrides;
  run->add_option("--config", run_config, "Pipeline config file")->required();
  run->add_option("--set", overrides,
                  "Override a config key (key=value), repeatable");

  auto* bench = app.add_subcommand("benchmark",
                                   "Compare modelling strategies on a scenario");
  std::string bench_config;
  bench->add_option("--config", bench_config, "Benchmark suite config file")
      ->required();

  auto* inspect = app.add_subcommand("inspect-model", "Describe a model file");
  std::string model_path;
  inspect->add_option("--model", model_path, "Model file path")->required();

  auto* verify = app.add_subcommand("verify-alarm",
                                    "Check a KPI alarm against the model CI");
  std::int64_t observed = 0, events = 0;
  double predicted = 0.0;
  verify->add_option("--observed", observed, "Observed drop count")->required();
  verify->add_option("--events", events, "Total events in the window")->required();
  verify->add_option("--predicted", predicted, "Model-predicted drop probability")
      ->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (*generate) {
      return run_generate(scenario_path, duration_min, out_path, truth_path);
    }
    if (*run) return run_run(run_config, overrides);
    if (*bench) return run_benchmark_cmd(bench_config);
    if (*inspect) return run_inspect(model_path);
    if (*verify) return run_verify_alarm(observed, events, predicted);
  } catch (const ranperf::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const ranperf::IoError& e) {
    std::cerr << "io error: " << e.what() << "\n";
    return kExitIo;
  } catch (const ranperf::DataError& e) {
    std::cerr << "data error: " << e.what() << "\n";
    return kExitData;
  } catch (const ranperf::SchemaError& e) {
    std::cerr << "data error: " << e.what() << "\n";
    return kExitData;
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << "\n";
    return kExitInternal;
  }
  return kExitInternal;
}
