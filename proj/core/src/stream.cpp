#include "ranperf/stream.hpp"

#include <algorithm>

#include "ranperf/errors.hpp"

namespace ranperf {

void WindowSpec::validate() const {
  if (window_ms <= 0 || slide_ms <= 0) {
    throw ConfigError("window spec: durations must be positive");
  }
  if (slide_ms > window_ms) {
    throw ConfigError("window spec: slide must not exceed window");
  }
  if (window_ms % slide_ms != 0) {
    throw ConfigError("window spec: window must be a multiple of slide");
  }
}

std::size_t WindowedGroups::record_count() const {
  std::size_t n = 0;
  for (const auto& [cell, recs] : records) n += recs.size();
  return n;
}

std::vector<const BearerRecord*> WindowedGroups::group_records(int group) const {
  std::vector<const BearerRecord*> out;
  if (group < 0 || group >= static_cast<int>(grouping.groups.size())) return out;
  for (const auto& cell : grouping.groups[group]) {
    const auto it = records.find(cell);
    if (it == records.end()) continue;
    for (const auto& rec : it->second) out.push_back(&rec);
  }
  return out;
}

namespace {

std::int64_t floor_to_grid(std::int64_t ts, std::int64_t slide) {
  std::int64_t q = ts / slide;
  if (ts < 0 && ts % slide != 0) --q;
  return q * slide;
}

}  // namespace

SimilarityWindowEngine::SimilarityWindowEngine(WindowSpec spec,
                                               SimilarityConfig sim,
                                               std::map<CellId, GeoLocation> locations,
                                               int lateness_slides)
    : spec_(spec), sim_(std::move(sim)), locations_(std::move(locations)) {
  spec_.validate();
  if (lateness_slides < 0) throw ConfigError("lateness must be >= 0 slides");
  lateness_ms_ = static_cast<std::int64_t>(lateness_slides) * spec_.slide_ms;
}

void SimilarityWindowEngine::push(const BearerRecord& record) {
  const std::int64_t ts = record.timestamp_ms;
  const std::int64_t last_start = floor_to_grid(ts, spec_.slide_ms);
  const std::int64_t first_start = last_start - spec_.window_ms + spec_.slide_ms;

  if (!saw_data_) {
    saw_data_ = true;
    next_emit_start_ = first_start;
    max_ts_ = ts;
  }
  max_ts_ = std::max(max_ts_, ts);

  if (last_start < next_emit_start_) {
    ++late_dropped_;  // every window holding this record already closed
    return;
  }
  ++accepted_;
  for (std::int64_t s = std::max(first_start, next_emit_start_); s <= last_start;
       s += spec_.slide_ms) {
    buckets_[s][record.cell].push_back(record);
  }
}

WindowedGroups SimilarityWindowEngine::close_window(std::int64_t start_ms) {
  WindowedGroups wg;
  wg.index = emission_index_++;
  wg.window_start_ms = start_ms;
  wg.window_end_ms = start_ms + spec_.window_ms;
  const auto bucket = buckets_.find(start_ms);
  if (bucket != buckets_.end()) {
    wg.records = std::move(bucket->second);
    buckets_.erase(bucket);
  }

  FeatureBuildConfig row_cfg;
  row_cfg.features = sim_.columns;
  row_cfg.rho = sim_.rho;

  std::vector<CellId> matrix_cells;
  std::vector<LoadingMatrix> loadings;
  for (const auto& [cell, recs] : wg.records) {
    std::vector<std::vector<double>> rows;
    rows.reserve(recs.size());
    for (const auto& rec : recs) {
      if (auto row = build_feature_row(rec, row_cfg)) rows.push_back(*row);
    }
    if (rows.size() < std::max<std::size_t>(2, sim_.min_rows)) {
      wg.ungrouped_singletons.push_back(cell);
      continue;
    }
    MeasurementMatrix mm =
        build_measurement_matrix(cell, sim_.columns, rows, wg.window_start_ms,
                                 wg.window_end_ms, sim_.standardize);
    try {
      loadings.push_back(pca_loadings(mm, sim_.variance_target));
    } catch (const DataError&) {
      wg.ungrouped_singletons.push_back(cell);  // degenerate matrix
      continue;
    }
    matrix_cells.push_back(cell);
    wg.matrices.push_back(std::move(mm));
  }

  if (!matrix_cells.empty()) {
    double tau = 0.0;
    if (sim_.threshold) {
      tau = *sim_.threshold;
    } else if (matrix_cells.size() >= 2) {
      tau = auto_threshold(
          pairwise_sf(loadings, matrix_cells, locations_, sim_.weight),
          sim_.threshold_percentile);
    }
    wg.threshold_used = tau;
    const SimilarityGraph graph = build_graph_from_loadings(
        matrix_cells, loadings, locations_, tau, sim_.weight);
    wg.grouping = connected_components(graph);
  }
  for (const auto& cell : wg.ungrouped_singletons) {
    wg.grouping.groups.push_back({cell});
  }
  std::sort(wg.grouping.groups.begin(), wg.grouping.groups.end(),
            [](const auto& a, const auto& b) { return a.front() < b.front(); });
  wg.grouping.generation = wg.index;
  wg.grouping.lineage.clear();
  for (std::size_t g = 0; g < wg.grouping.groups.size(); ++g) {
    wg.grouping.lineage[static_cast<int>(g)] = std::nullopt;
  }

  if (previous_grouping_) {
    wg.lineage = match_groups(*previous_grouping_, wg.grouping,
                              sim_.stability_threshold);
    for (const auto& m : wg.lineage.matches) {
      wg.grouping.lineage[m.next_group] = m.prev_group;
    }
  }
  previous_grouping_ = wg.grouping;
  return wg;
}

void SimilarityWindowEngine::advance_ready(std::vector<WindowedGroups>& out,
                                           std::int64_t limit_start) {
  while (saw_data_ && next_emit_start_ <= limit_start) {
    out.push_back(close_window(next_emit_start_));
    next_emit_start_ += spec_.slide_ms;
  }
}

std::vector<WindowedGroups> SimilarityWindowEngine::poll() {
  std::vector<WindowedGroups> out;
  if (!saw_data_) return out;
  const std::int64_t watermark = max_ts_ - lateness_ms_;
  // A window [s, s+window) closes once the watermark passes its end.
  advance_ready(out, watermark - spec_.window_ms);
  return out;
}

std::vector<WindowedGroups> SimilarityWindowEngine::flush() {
  std::vector<WindowedGroups> out;
  if (!saw_data_) return out;
  advance_ready(out, floor_to_grid(max_ts_, spec_.slide_ms));
  return out;
}

JoinWindowEngine::JoinWindowEngine(WindowSpec spec, SimilarityConfig sim_a,
                                   SimilarityConfig sim_b,
                                   std::map<CellId, GeoLocation> locations,
                                   int lateness_slides)
    : engine_(spec, sim_a, std::move(locations), lateness_slides) {
  if (sim_a.columns != sim_b.columns) {
    throw SchemaError(
        "join: the two streams use different similarity feature schemas");
  }
}

void JoinWindowEngine::push_tagged(const BearerRecord& record, bool from_a) {
  BearerRecord tagged = record;
  tagged.extras[kSourceKey] = from_a ? "\"a\"" : "\"b\"";
  engine_.push(tagged);
}

void JoinWindowEngine::push_a(const BearerRecord& record) {
  push_tagged(record, true);
}

void JoinWindowEngine::push_b(const BearerRecord& record) {
  push_tagged(record, false);
}

std::vector<JoinedGroups> JoinWindowEngine::convert(
    std::vector<WindowedGroups> emissions) {
  std::vector<JoinedGroups> out;
  out.reserve(emissions.size());
  for (auto& wg : emissions) {
    JoinedGroups jg;
    jg.index = wg.index;
    jg.window_start_ms = wg.window_start_ms;
    jg.window_end_ms = wg.window_end_ms;
    jg.grouping = wg.grouping;
    jg.a_records.resize(wg.grouping.groups.size());
    jg.b_records.resize(wg.grouping.groups.size());
    for (std::size_t g = 0; g < wg.grouping.groups.size(); ++g) {
      for (const auto& cell : wg.grouping.groups[g]) {
        const auto it = wg.records.find(cell);
        if (it == wg.records.end()) continue;
        for (const auto& rec : it->second) {
          const auto tag = rec.extras.find(kSourceKey);
          const bool from_a = tag != rec.extras.end() && tag->second == "\"a\"";
          BearerRecord clean = rec;
          clean.extras.erase(kSourceKey);
          (from_a ? jg.a_records : jg.b_records)[g].push_back(std::move(clean));
        }
      }
    }
    out.push_back(std::move(jg));
  }
  return out;
}

std::vector<JoinedGroups> JoinWindowEngine::poll() {
  return convert(engine_.poll());
}

std::vector<JoinedGroups> JoinWindowEngine::flush() {
  return convert(engine_.flush());
}

}  // namespace ranperf
