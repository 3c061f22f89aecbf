#include "ranperf/partitioner.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "ranperf/errors.hpp"

namespace ranperf {

int CellGrouping::group_of(const CellId& cell) const {
  for (std::size_t g = 0; g < groups.size(); ++g) {
    if (std::binary_search(groups[g].begin(), groups[g].end(), cell)) {
      return static_cast<int>(g);
    }
  }
  return -1;
}

std::size_t CellGrouping::cell_count() const {
  std::size_t n = 0;
  for (const auto& g : groups) n += g.size();
  return n;
}

namespace {

double pair_distance_km(const CellId& a, const CellId& b,
                        const std::map<CellId, GeoLocation>& locations) {
  const auto ia = locations.find(a);
  const auto ib = locations.find(b);
  if (ia == locations.end()) {
    throw ConfigError("build_graph: no location for cell " + a.key());
  }
  if (ib == locations.end()) {
    throw ConfigError("build_graph: no location for cell " + b.key());
  }
  return haversine_km(ia->second, ib->second);
}

}  // namespace

SimilarityGraph build_graph_from_loadings(
    const std::vector<CellId>& cells, const std::vector<LoadingMatrix>& loadings,
    const std::map<CellId, GeoLocation>& locations, double threshold,
    const DistanceWeight& weight) {
  if (cells.size() != loadings.size()) {
    throw DataError("build_graph: cells/loadings size mismatch");
  }
  SimilarityGraph g;
  g.vertices = cells;
  g.threshold = threshold;
  for (std::size_t i = 0; i < cells.size(); ++i) {
    for (std::size_t j = i + 1; j < cells.size(); ++j) {
      const double d = pair_distance_km(cells[i], cells[j], locations);
      const double sf = loading_sf(loadings[i], loadings[j], d, weight);
      if (sf < threshold) g.edges.push_back({i, j, sf});
    }
  }
  return g;
}

SimilarityGraph build_graph(const std::vector<MeasurementMatrix>& matrices,
                            const std::map<CellId, GeoLocation>& locations,
                            double threshold, const DistanceWeight& weight,
                            double variance_target) {
  std::vector<CellId> cells;
  std::vector<LoadingMatrix> loadings;
  cells.reserve(matrices.size());
  loadings.reserve(matrices.size());
  for (const auto& mm : matrices) {
    cells.push_back(mm.cell);
    loadings.push_back(pca_loadings(mm, variance_target));
  }
  return build_graph_from_loadings(cells, loadings, locations, threshold, weight);
}

std::vector<double> pairwise_sf(const std::vector<LoadingMatrix>& loadings,
                                const std::vector<CellId>& cells,
                                const std::map<CellId, GeoLocation>& locations,
                                const DistanceWeight& weight) {
  if (cells.size() != loadings.size()) {
    throw DataError("pairwise_sf: cells/loadings size mismatch");
  }
  std::vector<double> values;
  values.reserve(cells.size() * (cells.size() - 1) / 2);
  for (std::size_t i = 0; i < cells.size(); ++i) {
    for (std::size_t j = i + 1; j < cells.size(); ++j) {
      const double d = pair_distance_km(cells[i], cells[j], locations);
      values.push_back(loading_sf(loadings[i], loadings[j], d, weight));
    }
  }
  return values;
}

CellGrouping connected_components(const SimilarityGraph& graph) {
  const std::size_t n = graph.vertices.size();
  std::vector<std::size_t> parent(n);
  std::iota(parent.begin(), parent.end(), 0);
  const auto find = [&parent](std::size_t x) {
    while (parent[x] != x) {
      parent[x] = parent[parent[x]];
      x = parent[x];
    }
    return x;
  };
  for (const auto& e : graph.edges) {
    const std::size_t ra = find(e.a);
    const std::size_t rb = find(e.b);
    if (ra != rb) parent[std::max(ra, rb)] = std::min(ra, rb);
  }

  std::map<std::size_t, std::vector<CellId>> buckets;
  for (std::size_t i = 0; i < n; ++i) {
    buckets[find(i)].push_back(graph.vertices[i]);
  }
  CellGrouping grouping;
  for (auto& [root, members] : buckets) {
    std::sort(members.begin(), members.end());
    grouping.groups.push_back(std::move(members));
  }
  std::sort(grouping.groups.begin(), grouping.groups.end(),
            [](const auto& a, const auto& b) { return a.front() < b.front(); });
  for (std::size_t g = 0; g < grouping.groups.size(); ++g) {
    grouping.lineage[static_cast<int>(g)] = std::nullopt;
  }
  return grouping;
}

double auto_threshold(std::vector<double> values, double percentile) {
  if (values.empty()) throw DataError("auto_threshold: empty SF multiset");
  if (percentile < 0.0 || percentile > 1.0) {
    throw DataError("auto_threshold: percentile outside [0, 1]");
  }
  std::sort(values.begin(), values.end());
  const double rank = (static_cast<double>(values.size()) - 1.0) * percentile;
  const std::size_t lo = static_cast<std::size_t>(std::floor(rank));
  const std::size_t hi = std::min(values.size() - 1, lo + 1);
  const double frac = rank - static_cast<double>(lo);
  return values[lo] + frac * (values[hi] - values[lo]);
}

const char* to_string(GroupChange change) {
  switch (change) {
    case GroupChange::kUnchanged: return "unchanged";
    case GroupChange::kMinorChange: return "minor-change";
    case GroupChange::kMajorChange: return "major-change";
    case GroupChange::kNew: return "new";
  }
  return "unknown";
}

MatchReport match_groups(const CellGrouping& prev, const CellGrouping& next,
                         double stability_threshold) {
  MatchReport report;
  for (std::size_t g = 0; g < next.groups.size(); ++g) {
    const auto& members = next.groups[g];
    GroupMatch match;
    match.next_group = static_cast<int>(g);
    for (std::size_t p = 0; p < prev.groups.size(); ++p) {
      const auto& old_members = prev.groups[p];
      std::vector<CellId> common;
      std::set_intersection(members.begin(), members.end(), old_members.begin(),
                            old_members.end(), std::back_inserter(common));
      if (common.empty()) continue;
      const double uni = static_cast<double>(members.size() + old_members.size() -
                                             common.size());
      const double jac = static_cast<double>(common.size()) / uni;
      if (jac > match.jaccard) {  // ties keep the smaller prev id
        match.jaccard = jac;
        match.prev_group = static_cast<int>(p);
      }
    }
    if (!match.prev_group) {
      match.change = GroupChange::kNew;
    } else if (match.jaccard == 1.0) {
      match.change = GroupChange::kUnchanged;
    } else if (match.jaccard >= stability_threshold) {
      match.change = GroupChange::kMinorChange;
    } else {
      match.change = GroupChange::kMajorChange;
    }
    report.matches.push_back(match);
  }
  return report;
}

double adjusted_rand_index(const std::vector<int>& labels_a,
                           const std::vector<int>& labels_b) {
  if (labels_a.size() != labels_b.size()) {
    throw DataError("adjusted_rand_index: label vectors differ in length");
  }
  const auto choose2 = [](double x) { return x * (x - 1.0) / 2.0; };
  std::map<std::pair<int, int>, std::int64_t> contingency;
  std::map<int, std::int64_t> count_a, count_b;
  for (std::size_t i = 0; i < labels_a.size(); ++i) {
    ++contingency[{labels_a[i], labels_b[i]}];
    ++count_a[labels_a[i]];
    ++count_b[labels_b[i]];
  }
  double sum_cells = 0.0, sum_a = 0.0, sum_b = 0.0;
  for (const auto& [key, c] : contingency) sum_cells += choose2(static_cast<double>(c));
  for (const auto& [key, c] : count_a) sum_a += choose2(static_cast<double>(c));
  for (const auto& [key, c] : count_b) sum_b += choose2(static_cast<double>(c));
  const double total = choose2(static_cast<double>(labels_a.size()));
  const double expected = sum_a * sum_b / total;
  const double max_index = 0.5 * (sum_a + sum_b);
  if (max_index == expected) return 1.0;  // both partitions trivial
  return (sum_cells - expected) / (max_index - expected);
}

}  // namespace ranperf
