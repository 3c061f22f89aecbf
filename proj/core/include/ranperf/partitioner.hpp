#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <vector>

#include "ranperf/geo.hpp"
#include "ranperf/similarity.hpp"
#include "ranperf/trace.hpp"

namespace ranperf {

/// Undirected similarity graph over cells: an edge exists where the weighted
/// loading SF is strictly below the threshold.
struct SimilarityGraph {
  struct Edge {
    std::size_t a = 0;  // indices into vertices
    std::size_t b = 0;
    double sf = 0.0;
  };

  std::vector<CellId> vertices;
  std::vector<Edge> edges;
  double threshold = 0.0;
};

/// Disjoint cell groups covering every vertex. Group ids are indices into
/// `groups` for this generation; lineage points at the previous generation's
/// group id when one was matched.
struct CellGrouping {
  std::vector<std::vector<CellId>> groups;  // each sorted, groups sorted by first cell
  std::int64_t generation = 0;
  std::map<int, std::optional<int>> lineage;  // group id -> predecessor id

  int group_of(const CellId& cell) const;  // -1 when absent
  std::size_t cell_count() const;
};

/// Evaluates all cell pairs (desk scale) and keeps edges with SF < threshold.
/// Matrices must share the feature schema; every cell needs a location.
SimilarityGraph build_graph(const std::vector<MeasurementMatrix>& matrices,
                            const std::map<CellId, GeoLocation>& locations,
                            double threshold, const DistanceWeight& weight = {},
                            double variance_target = 0.95);

/// Same, from precomputed loadings (avoids re-running PCA when the caller
/// already has them).
SimilarityGraph build_graph_from_loadings(
    const std::vector<CellId>& cells, const std::vector<LoadingMatrix>& loadings,
    const std::map<CellId, GeoLocation>& locations, double threshold,
    const DistanceWeight& weight = {});

/// All pairwise SF values of a graph build, for threshold selection.
std::vector<double> pairwise_sf(const std::vector<LoadingMatrix>& loadings,
                                const std::vector<CellId>& cells,
                                const std::map<CellId, GeoLocation>& locations,
                                const DistanceWeight& weight = {});

CellGrouping connected_components(const SimilarityGraph& graph);

/// Empirical percentile of the SF distribution (linear interpolation between
/// order statistics: rank = (count - 1) * percentile). Default percentile
/// 0.10 keeps the knob scale-free across feature schemas.
double auto_threshold(std::vector<double> pairwise_sf_values,
                      double percentile = 0.10);

enum class GroupChange { kUnchanged, kMinorChange, kMajorChange, kNew };

const char* to_string(GroupChange change);

struct GroupMatch {
  int next_group = 0;
  std::optional<int> prev_group;  // maximal-Jaccard predecessor
  double jaccard = 0.0;
  GroupChange change = GroupChange::kNew;
};

struct MatchReport {
  std::vector<GroupMatch> matches;  // one per next-group, in group id order
};

/// Correspondence between consecutive groupings: each next-group maps to the
/// previous group with maximal Jaccard overlap (ties to the smaller previous
/// id). Groups at or above `stability_threshold` overlap count as minor
/// changes, identical sets as unchanged, zero overlap as new.
MatchReport match_groups(const CellGrouping& prev, const CellGrouping& next,
                         double stability_threshold = 0.8);

/// Adjusted Rand Index between two labelings of the same cells (1.0 for
/// identical partitions, ~0 for independent ones).
double adjusted_rand_index(const std::vector<int>& labels_a,
                           const std::vector<int>& labels_b);

}  // namespace ranperf
