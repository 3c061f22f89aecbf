#pragma once

#include <cstdint>
#include <deque>
#include <functional>
#include <map>
#include <optional>
#include <vector>

#include "ranperf/features.hpp"
#include "ranperf/partitioner.hpp"
#include "ranperf/similarity.hpp"
#include "ranperf/trace.hpp"

namespace ranperf {

struct WindowSpec {
  std::int64_t window_ms = 600000;  // 10 minutes
  std::int64_t slide_ms = 600000;

  void validate() const;  // both > 0, slide <= window, window % slide == 0
  std::int64_t panes() const { return window_ms / slide_ms; }
};

/// Knobs for per-window similarity grouping.
struct SimilarityConfig {
  std::vector<std::string> columns = {"rsrp", "rsrq", "ul_sinr", "bler"};
  double variance_target = 0.95;
  bool standardize = true;
  DistanceWeight weight;
  std::optional<double> threshold;     // fixed tau; unset -> percentile rule
  double threshold_percentile = 0.10;
  std::size_t min_rows = 8;            // records needed to form a matrix
  double stability_threshold = 0.8;    // lineage minor/major boundary
  double rho = 1.0;                    // rsrq conversion parameter
};

/// One window emission: the trailing window's records keyed by cell, the
/// measurement matrices that could be formed, and the similarity grouping
/// with lineage against the previous emission. Cells whose window had too
/// few usable rows stand as singleton groups and are listed separately.
struct WindowedGroups {
  std::int64_t index = 0;  // emission counter, 0-based
  std::int64_t window_start_ms = 0;
  std::int64_t window_end_ms = 0;
  std::map<CellId, std::vector<BearerRecord>> records;
  std::vector<MeasurementMatrix> matrices;
  CellGrouping grouping;
  MatchReport lineage;
  double threshold_used = 0.0;
  std::vector<CellId> ungrouped_singletons;

  std::size_t record_count() const;
  std::vector<const BearerRecord*> group_records(int group) const;
};

/// Event-time sliding-window engine. Records may arrive out of order within
/// the lateness bound (default one slide); later ones are counted and
/// dropped, never an error. Windows live on the slide grid; every window
/// that intersects the observed span is emitted (so a record belongs to
/// exactly window/slide emissions), in start order, once the watermark
/// passes its end.
class SimilarityWindowEngine {
 public:
  SimilarityWindowEngine(WindowSpec spec, SimilarityConfig sim,
                         std::map<CellId, GeoLocation> locations,
                         int lateness_slides = 1);

  void push(const BearerRecord& record);

  /// Drains emissions whose windows closed under the current watermark.
  std::vector<WindowedGroups> poll();

  /// End of stream: emits every remaining window that holds data.
  std::vector<WindowedGroups> flush();

  std::uint64_t late_dropped() const { return late_dropped_; }
  std::uint64_t accepted() const { return accepted_; }

 private:
  WindowedGroups close_window(std::int64_t start_ms);
  void advance_ready(std::vector<WindowedGroups>& out, std::int64_t limit_start);

  WindowSpec spec_;
  SimilarityConfig sim_;
  std::map<CellId, GeoLocation> locations_;
  std::int64_t lateness_ms_ = 0;

  std::map<std::int64_t, std::map<CellId, std::vector<BearerRecord>>> buckets_;
  bool saw_data_ = false;
  std::int64_t next_emit_start_ = 0;
  std::int64_t max_ts_ = 0;
  std::int64_t emission_index_ = 0;
  std::uint64_t late_dropped_ = 0;
  std::uint64_t accepted_ = 0;
  std::optional<CellGrouping> previous_grouping_;
};

/// Per-group fold emission of reduce_by_similarity_and_window.
template <typename T>
struct ReducedGroups {
  std::int64_t index = 0;
  std::int64_t window_start_ms = 0;
  std::int64_t window_end_ms = 0;
  CellGrouping grouping;
  std::vector<T> values;  // one per group, group id order
};

/// Applies an associative user fold per group per emission. The fold order
/// is unspecified (cells ascending, arrival order within a cell), which is
/// exactly why the combine operation must be associative.
template <typename T>
ReducedGroups<T> reduce_groups(const WindowedGroups& wg,
                               const std::function<T(const BearerRecord&)>& map,
                               const std::function<T(const T&, const T&)>& combine) {
  ReducedGroups<T> out;
  out.index = wg.index;
  out.window_start_ms = wg.window_start_ms;
  out.window_end_ms = wg.window_end_ms;
  out.grouping = wg.grouping;
  for (std::size_t g = 0; g < wg.grouping.groups.size(); ++g) {
    std::optional<T> acc;
    for (const auto& cell : wg.grouping.groups[g]) {
      const auto it = wg.records.find(cell);
      if (it == wg.records.end()) continue;
      for (const auto& rec : it->second) {
        acc = acc ? combine(*acc, map(rec)) : map(rec);
      }
    }
    out.values.push_back(acc.value_or(T{}));
  }
  return out;
}

/// join_by_similarity_and_window: both streams buffer into the same window
/// grid, the union of their window contents is grouped once, and each group
/// carries the records of either side. The two streams must be configured
/// with the same similarity columns; mismatch is a schema error at
/// construction.
struct JoinedGroups {
  std::int64_t index = 0;
  std::int64_t window_start_ms = 0;
  std::int64_t window_end_ms = 0;
  CellGrouping grouping;
  std::vector<std::vector<BearerRecord>> a_records;  // per group
  std::vector<std::vector<BearerRecord>> b_records;
};

class JoinWindowEngine {
 public:
  JoinWindowEngine(WindowSpec spec, SimilarityConfig sim_a, SimilarityConfig sim_b,
                   std::map<CellId, GeoLocation> locations,
                   int lateness_slides = 1);

  void push_a(const BearerRecord& record);
  void push_b(const BearerRecord& record);
  std::vector<JoinedGroups> poll();
  std::vector<JoinedGroups> flush();

 private:
  void push_tagged(const BearerRecord& record, bool from_a);
  std::vector<JoinedGroups> convert(std::vector<WindowedGroups> emissions);

  SimilarityWindowEngine engine_;
  // Source tagging rides on a record extra, set before push and stripped on
  // output.
  static constexpr const char* kSourceKey = "__join_source";
};

}  // namespace ranperf
