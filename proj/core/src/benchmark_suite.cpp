#include "ranperf/benchmark_suite.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>

#include "ranperf/errors.hpp"
#include "ranperf/partitioner.hpp"

namespace ranperf {

const char* to_string(BenchMethod method) {
  switch (method) {
    case BenchMethod::kGlobal: return "global";
    case BenchMethod::kPerCell: return "per-cell";
    case BenchMethod::kGridSpatial: return "grid-spatial";
    case BenchMethod::kSimilarityOnly: return "similarity-only";
    case BenchMethod::kHybridMtl: return "hybrid-mtl";
  }
  return "unknown";
}

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

struct CellData {
  CellId cell;
  GeoLocation location;
  int true_group = 0;
  std::vector<BearerRecord> train_records;
  Dataset train;
  Dataset test;
};

// Generates enough trace for every cell to fill train+test rows, then slices
// per cell in generation order.
std::vector<CellData> prepare_cells(const BenchmarkConfig& cfg) {
  const int needed = cfg.samples_per_cell + cfg.test_samples_per_cell;
  const double duration_min =
      3.0 * static_cast<double>(needed) / cfg.scenario.base_intensity_per_min +
      5.0;
  const GeneratedTrace trace = generate(cfg.scenario, duration_min);

  std::map<CellId, std::vector<BearerRecord>> per_cell;
  for (const auto& rec : trace.records) per_cell[rec.cell].push_back(rec);

  std::vector<CellData> cells;
  for (const auto& truth : trace.truth.cells) {
    auto it = per_cell.find(truth.cell);
    if (it == per_cell.end()) {
      throw DataError("benchmark: cell " + truth.cell.key() +
                      " generated no records; raise duration or intensity");
    }
    auto& recs = it->second;
    if (static_cast<int>(recs.size()) < needed) {
      throw DataError("benchmark: cell " + truth.cell.key() + " produced " +
                      std::to_string(recs.size()) + " records, needs " +
                      std::to_string(needed));
    }
    CellData cd;
    cd.cell = truth.cell;
    cd.location = truth.location;
    cd.true_group = truth.group;
    cd.train_records.assign(recs.begin(), recs.begin() + cfg.samples_per_cell);
    std::vector<BearerRecord> test_records(
        recs.begin() + cfg.samples_per_cell,
        recs.begin() + needed);
    cd.train = build_dataset(cd.train_records, cfg.features);
    cd.test = build_dataset(test_records, cfg.features);
    cells.push_back(std::move(cd));
  }
  return cells;
}

Dataset pool(const std::vector<const CellData*>& members, bool train) {
  Dataset pooled;
  for (const auto* cd : members) {
    const Dataset& src = train ? cd->train : cd->test;
    if (!pooled.schema) pooled.schema = src.schema;
    pooled.x.insert(pooled.x.end(), src.x.begin(), src.x.end());
    pooled.y.insert(pooled.y.end(), src.y.begin(), src.y.end());
  }
  return pooled;
}

// Partition of cells into model scopes; one model per scope.
using Partition = std::vector<std::vector<const CellData*>>;

Partition global_partition(const std::vector<CellData>& cells) {
  Partition p(1);
  for (const auto& cd : cells) p[0].push_back(&cd);
  return p;
}

Partition per_cell_partition(const std::vector<CellData>& cells) {
  Partition p;
  for (const auto& cd : cells) p.push_back({&cd});
  return p;
}

Partition grid_partition(const std::vector<CellData>& cells, int divisions) {
  double lat_min = 90.0, lat_max = -90.0, lon_min = 180.0, lon_max = -180.0;
  for (const auto& cd : cells) {
    lat_min = std::min(lat_min, cd.location.latitude);
    lat_max = std::max(lat_max, cd.location.latitude);
    lon_min = std::min(lon_min, cd.location.longitude);
    lon_max = std::max(lon_max, cd.location.longitude);
  }
  const double lat_span = std::max(1e-9, lat_max - lat_min);
  const double lon_span = std::max(1e-9, lon_max - lon_min);
  std::map<int, std::vector<const CellData*>> boxes;
  for (const auto& cd : cells) {
    int row = static_cast<int>((cd.location.latitude - lat_min) / lat_span *
                               divisions);
    int col = static_cast<int>((cd.location.longitude - lon_min) / lon_span *
                               divisions);
    row = std::min(row, divisions - 1);
    col = std::min(col, divisions - 1);
    boxes[row * divisions + col].push_back(&cd);
  }
  Partition p;
  for (auto& [box, members] : boxes) p.push_back(std::move(members));
  return p;
}

Partition similarity_partition(const std::vector<CellData>& cells,
                               const BenchmarkConfig& cfg, double* ari_out) {
  FeatureBuildConfig row_cfg;
  row_cfg.features = cfg.similarity.columns;
  row_cfg.rho = cfg.similarity.rho;

  std::vector<CellId> ids;
  std::vector<LoadingMatrix> loadings;
  std::map<CellId, GeoLocation> locations;
  std::map<CellId, const CellData*> by_id;
  for (const auto& cd : cells) {
    std::vector<std::vector<double>> rows;
    for (const auto& rec : cd.train_records) {
      if (auto row = build_feature_row(rec, row_cfg)) rows.push_back(*row);
    }
    if (rows.size() < 2) {
      throw DataError("benchmark: too few similarity rows for " + cd.cell.key());
    }
    const MeasurementMatrix mm = build_measurement_matrix(
        cd.cell, cfg.similarity.columns, rows, 0, 0, cfg.similarity.standardize);
    loadings.push_back(pca_loadings(mm, cfg.similarity.variance_target));
    ids.push_back(cd.cell);
    locations[cd.cell] = cd.location;
    by_id[cd.cell] = &cd;
  }
  double tau = cfg.similarity.threshold.value_or(0.0);
  if (!cfg.similarity.threshold) {
    tau = auto_threshold(pairwise_sf(loadings, ids, locations,
                                     cfg.similarity.weight),
                         cfg.similarity.threshold_percentile);
  }
  const SimilarityGraph graph = build_graph_from_loadings(
      ids, loadings, locations, tau, cfg.similarity.weight);
  const CellGrouping grouping = connected_components(graph);

  if (ari_out) {
    std::vector<int> found, truth;
    for (const auto& cd : cells) {
      found.push_back(grouping.group_of(cd.cell));
      truth.push_back(cd.true_group);
    }
    *ari_out = adjusted_rand_index(found, truth);
  }

  Partition p;
  for (const auto& group : grouping.groups) {
    std::vector<const CellData*> members;
    for (const auto& cell : group) members.push_back(by_id.at(cell));
    p.push_back(std::move(members));
  }
  return p;
}

// Chunks a dataset into `k` near-even contiguous minibatches.
std::vector<Dataset> chunk_dataset(const Dataset& ds, int k) {
  std::vector<Dataset> out;
  const std::size_t n = ds.rows();
  const std::size_t cols = ds.cols();
  std::size_t start = 0;
  for (int i = 0; i < k; ++i) {
    const std::size_t end = n * static_cast<std::size_t>(i + 1) / k;
    if (end <= start) continue;
    Dataset chunk;
    chunk.schema = ds.schema;
    chunk.x.assign(ds.x.begin() + start * cols, ds.x.begin() + end * cols);
    chunk.y.assign(ds.y.begin() + start, ds.y.begin() + end);
    out.push_back(std::move(chunk));
    start = end;
  }
  return out;
}

struct FittedMethod {
  std::vector<HybridModel> models;               // one per partition scope
  std::map<std::string, std::size_t> model_of;   // cell key -> model index
  double train_seconds = 0.0;
  std::int64_t now_window = 0;
};

FittedMethod fit_partition(const Partition& partition, const BenchmarkConfig& cfg,
                           bool hybrid_online) {
  FittedMethod fitted;
  const auto start = Clock::now();
  for (const auto& members : partition) {
    HybridModel model;
    if (hybrid_online) {
      // Offline common model on the pooled group, then each cell consumes
      // its own rows as a sequence of online minibatches.
      model = fit_offline(pool(members, /*train=*/true), cfg.learner);
      std::int64_t window = 0;
      for (int w = 0; w < cfg.online_windows; ++w) window = w + 1;
      for (const auto* cd : members) {
        const auto chunks = chunk_dataset(cd->train, cfg.online_windows);
        std::int64_t now = 0;
        for (const auto& chunk : chunks) {
          ++now;
          model = update_online(model, cd->cell.key(), chunk, now);
        }
      }
      fitted.now_window = cfg.online_windows;
      (void)window;
    } else {
      model = fit_offline(pool(members, /*train=*/true), cfg.learner);
    }
    const std::size_t index = fitted.models.size();
    fitted.models.push_back(std::move(model));
    for (const auto* cd : members) fitted.model_of[cd->cell.key()] = index;
  }
  fitted.train_seconds = seconds_since(start);
  return fitted;
}

MethodResult score_method(BenchMethod method, const FittedMethod& fitted,
                          const std::vector<CellData>& cells, Task task,
                          const PredictionSink& sink) {
  MethodResult result;
  result.method = method;
  result.train_seconds = fitted.train_seconds;
  result.n_partitions = static_cast<int>(fitted.models.size());

  std::int64_t correct = 0, tp = 0, tn = 0, pos = 0, neg = 0;
  double sse = 0.0;
  std::size_t n = 0;
  for (const auto& cd : cells) {
    const HybridModel& model = fitted.models[fitted.model_of.at(cd.cell.key())];
    for (std::size_t i = 0; i < cd.test.rows(); ++i) {
      const double p =
          model.predict(cd.cell.key(), cd.test.row(i), fitted.now_window);
      if (sink) sink(method, cd.cell.key(), i, cd.test.y[i], p);
      if (task == Task::kClassification) {
        const bool predicted = p >= 0.5;
        const bool actual = cd.test.y[i] > 0.5;
        if (predicted == actual) ++correct;
        if (actual) {
          ++pos;
          if (predicted) ++tp;
        } else {
          ++neg;
          if (!predicted) ++tn;
        }
      } else {
        const double e = cd.test.y[i] - p;
        sse += e * e;
      }
      ++n;
    }
  }
  if (task == Task::kClassification && n > 0) {
    result.accuracy = static_cast<double>(correct) / static_cast<double>(n);
    const double rp = pos > 0 ? static_cast<double>(tp) / pos : 1.0;
    const double rn = neg > 0 ? static_cast<double>(tn) / neg : 1.0;
    result.balanced_accuracy = 0.5 * (rp + rn);
  } else if (n > 0) {
    result.rmse = std::sqrt(sse / static_cast<double>(n));
  }
  return result;
}

}  // namespace

BenchmarkResult run_method_comparison(const BenchmarkConfig& config) {
  const std::vector<CellData> cells = prepare_cells(config);
  BenchmarkResult result;
  for (const auto& cd : cells) {
    result.train_rows += cd.train.rows();
    result.test_rows += cd.test.rows();
  }

  Partition similarity_groups;
  bool have_similarity = false;
  for (const BenchMethod method : config.methods) {
    Partition partition;
    bool hybrid = false;
    switch (method) {
      case BenchMethod::kGlobal:
        partition = global_partition(cells);
        break;
      case BenchMethod::kPerCell:
        partition = per_cell_partition(cells);
        break;
      case BenchMethod::kGridSpatial:
        partition = grid_partition(cells, config.grid_divisions);
        break;
      case BenchMethod::kSimilarityOnly:
      case BenchMethod::kHybridMtl:
        if (!have_similarity) {
          similarity_groups =
              similarity_partition(cells, config, &result.grouping_ari);
          have_similarity = true;
        }
        partition = similarity_groups;
        hybrid = method == BenchMethod::kHybridMtl;
        break;
    }
    const FittedMethod fitted = fit_partition(partition, config, hybrid);
    result.methods.push_back(score_method(method, fitted, cells,
                                          config.learner.task,
                                          config.prediction_sink));
  }
  return result;
}

BenchmarkResult run_method_comparison_median(const BenchmarkConfig& config,
                                             int n_seeds,
                                             std::uint64_t base_seed) {
  if (n_seeds < 1) throw ConfigError("median comparison: n_seeds must be >= 1");
  std::vector<BenchmarkResult> runs;
  for (int s = 0; s < n_seeds; ++s) {
    BenchmarkConfig cfg = config;
    cfg.scenario.seed = base_seed + static_cast<std::uint64_t>(s);
    runs.push_back(run_method_comparison(cfg));
  }
  const auto median_of = [](std::vector<double> v) {
    std::sort(v.begin(), v.end());
    const std::size_t n = v.size();
    return n % 2 == 1 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
  };
  BenchmarkResult out;
  out.train_rows = runs.front().train_rows;
  out.test_rows = runs.front().test_rows;
  std::vector<double> aris;
  for (const auto& r : runs) aris.push_back(r.grouping_ari);
  out.grouping_ari = median_of(aris);
  for (std::size_t m = 0; m < runs.front().methods.size(); ++m) {
    std::vector<double> acc, bal, rmse, secs;
    for (const auto& r : runs) {
      acc.push_back(r.methods[m].accuracy);
      bal.push_back(r.methods[m].balanced_accuracy);
      rmse.push_back(r.methods[m].rmse);
      secs.push_back(r.methods[m].train_seconds);
    }
    MethodResult mr;
    mr.method = runs.front().methods[m].method;
    mr.n_partitions = runs.front().methods[m].n_partitions;
    mr.accuracy = median_of(acc);
    mr.balanced_accuracy = median_of(bal);
    mr.rmse = median_of(rmse);
    mr.train_seconds = median_of(secs);
    out.methods.push_back(mr);
  }
  return out;
}

UpdateTimingResult run_update_timing(const UpdateTimingConfig& config) {
  BenchmarkConfig prep;
  prep.scenario = config.scenario;
  prep.samples_per_cell = config.n_windows * config.rows_per_window_per_cell;
  prep.test_samples_per_cell = config.test_samples_per_cell;
  prep.features = config.features;
  const std::vector<CellData> cells = prepare_cells(prep);

  // Window w's minibatch for each cell is its w-th chunk of training rows.
  std::map<std::string, std::vector<Dataset>> chunks;
  for (const auto& cd : cells) {
    chunks[cd.cell.key()] = chunk_dataset(cd.train, config.n_windows);
  }

  UpdateTimingResult result;

  // Incremental path: offline fit on window 1, online updates thereafter.
  std::map<std::string, Dataset> first_window;
  for (const auto& cd : cells) {
    first_window[cd.cell.key()] = chunks.at(cd.cell.key()).front();
  }
  HybridModel incremental = fit_offline(first_window, config.learner);
  for (int w = 1; w < config.n_windows; ++w) {
    const auto start = Clock::now();
    for (const auto& cd : cells) {
      const auto& cell_chunks = chunks.at(cd.cell.key());
      if (w < static_cast<int>(cell_chunks.size())) {
        incremental = update_online(incremental, cd.cell.key(), cell_chunks[w], w);
      }
    }
    const double elapsed = seconds_since(start);
    if (w == config.n_windows - 1) result.incremental_update_seconds = elapsed;
  }

  // Naive path: rebuild from scratch on the cumulative pool.
  {
    Dataset cumulative;
    for (const auto& cd : cells) {
      if (!cumulative.schema) cumulative.schema = cd.train.schema;
      cumulative.x.insert(cumulative.x.end(), cd.train.x.begin(), cd.train.x.end());
      cumulative.y.insert(cumulative.y.end(), cd.train.y.begin(), cd.train.y.end());
    }
    const auto start = Clock::now();
    const HybridModel full = fit_offline(cumulative, config.learner);
    result.full_retrain_seconds = seconds_since(start);

    std::int64_t correct_full = 0, correct_inc = 0;
    double sse_full = 0.0, sse_inc = 0.0;
    std::size_t n = 0;
    const std::int64_t now = config.n_windows - 1;
    for (const auto& cd : cells) {
      for (std::size_t i = 0; i < cd.test.rows(); ++i) {
        const double pf = full.predict(cd.cell.key(), cd.test.row(i), now);
        const double pi = incremental.predict(cd.cell.key(), cd.test.row(i), now);
        if (config.learner.task == Task::kClassification) {
          const bool actual = cd.test.y[i] > 0.5;
          if ((pf >= 0.5) == actual) ++correct_full;
          if ((pi >= 0.5) == actual) ++correct_inc;
        } else {
          const double ef = cd.test.y[i] - pf;
          const double ei = cd.test.y[i] - pi;
          sse_full += ef * ef;
          sse_inc += ei * ei;
        }
        ++n;
      }
    }
    if (n > 0) {
      result.full_retrain_accuracy =
          static_cast<double>(correct_full) / static_cast<double>(n);
      result.incremental_accuracy =
          static_cast<double>(correct_inc) / static_cast<double>(n);
      result.full_retrain_rmse = std::sqrt(sse_full / static_cast<double>(n));
      result.incremental_rmse = std::sqrt(sse_inc / static_cast<double>(n));
    }
  }
  return result;
}

}  // namespace ranperf
