#include "ranperf/stream.hpp"

#include <gtest/gtest.h>

#include <chrono>
#include <set>

#include "ranperf/errors.hpp"
#include "ranperf/rng.hpp"
#include "ranperf/synth.hpp"

namespace ranperf {
namespace {

constexpr std::int64_t kMinute = 60000;

BearerRecord record_at(const std::string& cell, std::int64_t ts,
                       CounterRng& rng, bool dropped = false) {
  BearerRecord rec;
  rec.cell = {cell, "s"};
  rec.timestamp_ms = ts;
  rec.rsrp = -120.0 + 40.0 * rng.next_double();
  rec.rsrq = -20.0 + 15.0 * rng.next_double();
  rec.ul_sinr = rng.normal(0.0, 8.0);
  rec.bler = rng.next_double() * 0.5;
  rec.rlc_bytes = static_cast<std::int64_t>(rng.uniform_below(10000));
  rec.dropped = dropped;
  static std::int64_t seq = 0;
  rec.extras["seq"] = std::to_string(seq++);
  return rec;
}

std::map<CellId, GeoLocation> locations_for(int n_cells) {
  std::map<CellId, GeoLocation> out;
  for (int i = 0; i < n_cells; ++i) {
    out[{"c" + std::to_string(i), "s"}] =
        GeoLocation{40.0 + 0.001 * i, -74.0};
  }
  return out;
}

SimilarityConfig small_sim() {
  SimilarityConfig sim;
  sim.columns = {"rsrp", "rsrq", "ul_sinr", "bler"};
  sim.min_rows = 2;
  return sim;
}

TEST(WindowSpec, Validation) {
  EXPECT_THROW((WindowSpec{0, 1000}).validate(), ConfigError);
  EXPECT_THROW((WindowSpec{1000, 2000}).validate(), ConfigError);
  EXPECT_THROW((WindowSpec{2500, 1000}).validate(), ConfigError);
  EXPECT_NO_THROW((WindowSpec{2000, 1000}).validate());
}

TEST(Engine, TumblingConservation) {
  // Two tumbling windows of data: every record lands in exactly one emission.
  CounterRng rng(1);
  SimilarityWindowEngine engine({kMinute, kMinute}, small_sim(), locations_for(3));
  const int n_records = 300;
  std::set<std::string> pushed;
  for (int i = 0; i < n_records; ++i) {
    const auto rec = record_at("c" + std::to_string(i % 3),
                               rng.uniform_below(2 * kMinute), rng);
    pushed.insert(rec.extras.at("seq"));
    engine.push(rec);
  }
  auto emissions = engine.poll();
  const auto tail = engine.flush();
  emissions.insert(emissions.end(), tail.begin(), tail.end());

  ASSERT_EQ(emissions.size(), 2u);
  EXPECT_EQ(emissions[0].window_start_ms, 0);
  EXPECT_EQ(emissions[1].window_start_ms, kMinute);

  std::multiset<std::string> seen;
  for (const auto& wg : emissions) {
    for (const auto& [cell, recs] : wg.records) {
      for (const auto& rec : recs) seen.insert(rec.extras.at("seq"));
    }
  }
  EXPECT_EQ(seen.size(), pushed.size());
  for (const auto& seq : pushed) EXPECT_EQ(seen.count(seq), 1u) << seq;
  EXPECT_EQ(engine.late_dropped(), 0u);
}

TEST(Engine, SlidingMultiplicityIsExactlyWindowOverSlide) {
  // window = 2 * slide: every record appears in exactly two consecutive
  // emissions, including records near the stream boundaries.
  CounterRng rng(2);
  const WindowSpec spec{2 * kMinute, kMinute};
  SimilarityWindowEngine engine(spec, small_sim(), locations_for(2));
  std::map<std::string, int> multiplicity;
  for (int i = 0; i < 400; ++i) {
    const auto rec = record_at("c" + std::to_string(i % 2),
                               rng.uniform_below(4 * kMinute), rng);
    multiplicity[rec.extras.at("seq")] = 0;
    engine.push(rec);
  }
  auto emissions = engine.poll();
  const auto tail = engine.flush();
  emissions.insert(emissions.end(), tail.begin(), tail.end());

  std::map<std::string, std::vector<std::int64_t>> seen_in;
  for (const auto& wg : emissions) {
    for (const auto& [cell, recs] : wg.records) {
      for (const auto& rec : recs) {
        ++multiplicity[rec.extras.at("seq")];
        seen_in[rec.extras.at("seq")].push_back(wg.index);
      }
    }
  }
  for (const auto& [seq, count] : multiplicity) {
    EXPECT_EQ(count, 2) << "record " << seq;
    const auto& windows = seen_in[seq];
    EXPECT_EQ(windows[1], windows[0] + 1);  // consecutive emissions
  }

  // Emission count: consecutive run over the grid covering the data span.
  const std::int64_t coverage =
      emissions.back().window_end_ms - emissions.front().window_start_ms;
  EXPECT_EQ(static_cast<std::int64_t>(emissions.size()),
            (coverage - spec.window_ms) / spec.slide_ms + 1);
}

TEST(Engine, LateRecordsAreCountedNotLost) {
  CounterRng rng(3);
  SimilarityWindowEngine engine({kMinute, kMinute}, small_sim(),
                                locations_for(1), /*lateness_slides=*/1);
  // Fill minute 0, then jump the watermark to minute 3.
  for (int i = 0; i < 50; ++i) {
    engine.push(record_at("c0", rng.uniform_below(kMinute), rng));
  }
  engine.push(record_at("c0", 3 * kMinute + 1000, rng));
  const auto ready = engine.poll();
  // Watermark = 3min - 1min lateness: windows [0,1m) and [1m,2m) closed.
  ASSERT_EQ(ready.size(), 2u);

  // A record for the closed first window is late; one within the bound is not.
  engine.push(record_at("c0", 500, rng));
  EXPECT_EQ(engine.late_dropped(), 1u);
  engine.push(record_at("c0", 2 * kMinute + 500, rng));
  EXPECT_EQ(engine.late_dropped(), 1u);
  const auto rest = engine.flush();
  std::size_t in_window2 = 0;
  for (const auto& wg : rest) {
    if (wg.window_start_ms == 2 * kMinute) in_window2 = wg.record_count();
  }
  EXPECT_EQ(in_window2, 1u);
}

TEST(Engine, GroupingRecoversPlantedStructureAcrossWindows) {
  // Two planted groups with distinct covariance structure; the per-window
  // grouping should keep them apart and lineage should stay stable.
  ScenarioSpec spec;
  spec.seed = 5;
  spec.n_cells = 8;
  spec.n_groups = 2;
  spec.base_intensity_per_min = 60.0;
  spec.intensity_sigma = 0.2;
  spec.cell_jitter_km = 1.0;
  GroupProfile g0;
  g0.mean = (Eigen::VectorXd(5) << -100, -10, 8, 0, 0.05).finished();
  g0.covariance = covariance_from_std_corr({12, 3, 2, 6, 0.02}, {{0, 1, 0.9}});
  GroupProfile g1;
  g1.mean = (Eigen::VectorXd(5) << -100, -10, 8, 0, 0.05).finished();
  g1.covariance = covariance_from_std_corr({12, 3, 2, 6, 0.02}, {{3, 4, 0.9}});
  spec.groups = {g0, g1};
  const auto trace = generate(spec, 10.0);

  std::map<CellId, GeoLocation> locations;
  for (const auto& ct : trace.truth.cells) locations[ct.cell] = ct.location;

  SimilarityConfig sim = small_sim();
  sim.min_rows = 16;
  SimilarityWindowEngine engine({2 * kMinute, 2 * kMinute}, sim, locations);
  std::vector<WindowedGroups> emissions;
  for (const auto& rec : trace.records) {
    engine.push(rec);
    for (auto& wg : engine.poll()) emissions.push_back(std::move(wg));
  }
  for (auto& wg : engine.flush()) emissions.push_back(std::move(wg));
  ASSERT_GE(emissions.size(), 4u);

  int stable = 0, total = 0;
  for (std::size_t e = 1; e < emissions.size(); ++e) {
    for (const auto& m : emissions[e].lineage.matches) {
      ++total;
      if (m.change == GroupChange::kUnchanged ||
          m.change == GroupChange::kMinorChange) {
        ++stable;
      }
    }
  }
  ASSERT_GT(total, 0);
  EXPECT_GE(static_cast<double>(stable) / total, 0.9);
}

TEST(Reduce, CountAndSumMatchBruteForceRescan) {
  CounterRng rng(6);
  SimilarityWindowEngine engine({kMinute, kMinute}, small_sim(), locations_for(4));
  std::vector<BearerRecord> all;
  for (int i = 0; i < 500; ++i) {
    all.push_back(record_at("c" + std::to_string(i % 4),
                            rng.uniform_below(3 * kMinute), rng));
    engine.push(all.back());
  }
  auto emissions = engine.poll();
  const auto tail = engine.flush();
  emissions.insert(emissions.end(), tail.begin(), tail.end());

  for (const auto& wg : emissions) {
    const auto counts = reduce_groups<std::int64_t>(
        wg, [](const BearerRecord&) { return std::int64_t{1}; },
        [](const std::int64_t& a, const std::int64_t& b) { return a + b; });
    const auto sums = reduce_groups<std::int64_t>(
        wg, [](const BearerRecord& r) { return r.rlc_bytes; },
        [](const std::int64_t& a, const std::int64_t& b) { return a + b; });

    for (std::size_t g = 0; g < wg.grouping.groups.size(); ++g) {
      // Brute-force re-scan: filter the full stream by window and group
      // membership, independent of the engine's bucketing.
      std::int64_t expect_count = 0, expect_sum = 0;
      for (const auto& rec : all) {
        if (rec.timestamp_ms < wg.window_start_ms ||
            rec.timestamp_ms >= wg.window_end_ms) {
          continue;
        }
        if (wg.grouping.group_of(rec.cell) != static_cast<int>(g)) continue;
        ++expect_count;
        expect_sum += rec.rlc_bytes;
      }
      EXPECT_EQ(counts.values[g], expect_count);
      EXPECT_EQ(sums.values[g], expect_sum);
    }
  }
}

TEST(Reduce, FoldOrderIrrelevantForAssociativeOps) {
  CounterRng rng(7);
  SimilarityWindowEngine engine({kMinute, kMinute}, small_sim(), locations_for(3));
  for (int i = 0; i < 200; ++i) {
    engine.push(record_at("c" + std::to_string(i % 3),
                          rng.uniform_below(kMinute), rng));
  }
  const auto emissions = engine.flush();
  ASSERT_EQ(emissions.size(), 1u);
  const auto& wg = emissions[0];

  const auto engine_fold = reduce_groups<std::int64_t>(
      wg, [](const BearerRecord& r) { return r.rlc_bytes; },
      [](const std::int64_t& a, const std::int64_t& b) { return a + b; });

  // Re-associate: fold right-to-left instead.
  for (std::size_t g = 0; g < wg.grouping.groups.size(); ++g) {
    const auto recs = wg.group_records(static_cast<int>(g));
    std::int64_t acc = 0;
    for (auto it = recs.rbegin(); it != recs.rend(); ++it) {
      acc = (*it)->rlc_bytes + acc;
    }
    EXPECT_EQ(engine_fold.values[g], acc);
  }
}

TEST(Join, EmptySideAndIdenticalStreams) {
  CounterRng rng(8);
  std::vector<BearerRecord> stream;
  for (int i = 0; i < 200; ++i) {
    stream.push_back(record_at("c" + std::to_string(i % 3),
                               rng.uniform_below(kMinute), rng));
  }

  // b empty: groups match group_by on a alone; b-sides all empty.
  JoinWindowEngine join_a({kMinute, kMinute}, small_sim(), small_sim(),
                          locations_for(3));
  SimilarityWindowEngine solo({kMinute, kMinute}, small_sim(), locations_for(3));
  for (const auto& rec : stream) {
    join_a.push_a(rec);
    solo.push(rec);
  }
  const auto joined = join_a.flush();
  const auto alone = solo.flush();
  ASSERT_EQ(joined.size(), 1u);
  ASSERT_EQ(alone.size(), 1u);
  ASSERT_EQ(joined[0].grouping.groups.size(), alone[0].grouping.groups.size());
  for (std::size_t g = 0; g < joined[0].grouping.groups.size(); ++g) {
    EXPECT_EQ(joined[0].grouping.groups[g], alone[0].grouping.groups[g]);
    EXPECT_TRUE(joined[0].b_records[g].empty());
  }

  // a == b: both sides hold the same records per group.
  JoinWindowEngine join_ab({kMinute, kMinute}, small_sim(), small_sim(),
                           locations_for(3));
  for (const auto& rec : stream) {
    join_ab.push_a(rec);
    join_ab.push_b(rec);
  }
  const auto both = join_ab.flush();
  ASSERT_EQ(both.size(), 1u);
  for (std::size_t g = 0; g < both[0].grouping.groups.size(); ++g) {
    ASSERT_EQ(both[0].a_records[g].size(), both[0].b_records[g].size());
    for (std::size_t i = 0; i < both[0].a_records[g].size(); ++i) {
      EXPECT_EQ(serialize_record(both[0].a_records[g][i]),
                serialize_record(both[0].b_records[g][i]));
    }
  }
}

TEST(Join, SchemaMismatchIsAnError) {
  SimilarityConfig other = small_sim();
  other.columns = {"rsrp", "bler"};
  EXPECT_THROW(JoinWindowEngine({kMinute, kMinute}, small_sim(), other,
                                locations_for(1)),
               SchemaError);
}

TEST(Join, SharedCovarianceCellsFromBothStreamsGroupTogether) {
  // Disjoint cell sets in the two streams, same underlying distribution:
  // similarity puts them in one group.
  CounterRng rng(9);
  auto locations = locations_for(4);
  JoinWindowEngine join({kMinute, kMinute}, small_sim(), small_sim(), locations);
  for (int i = 0; i < 400; ++i) {
    // Correlated rsrp/rsrq structure shared by all four cells.
    const double base = rng.normal(-100.0, 12.0);
    BearerRecord rec;
    rec.cell = {"c" + std::to_string(i % 2), "s"};
    rec.timestamp_ms = static_cast<std::int64_t>(rng.uniform_below(kMinute));
    rec.rsrp = std::clamp(base, -150.0, -40.0);
    rec.rsrq = std::clamp(-10.0 + 0.2 * (base + 100.0) + rng.normal(0.0, 0.5),
                          -25.0, 0.0);
    rec.ul_sinr = rng.normal(0.0, 1.0);
    rec.bler = 0.2 + 0.1 * rng.next_double();
    if (i % 2 == 0) {
      join.push_a(rec);
    } else {
      rec.cell = {"c" + std::to_string(2 + i % 2), "s"};
      join.push_b(rec);
    }
  }
  const auto emissions = join.flush();
  ASSERT_EQ(emissions.size(), 1u);
  ASSERT_EQ(emissions[0].grouping.groups.size(), 1u)
      << "same-distribution cells should merge";
  EXPECT_FALSE(emissions[0].a_records[0].empty());
  EXPECT_FALSE(emissions[0].b_records[0].empty());
}

TEST(Engine, MillionRecordThroughputFloor) {
  // Desk-scale performance contract: 10^6 records, 10-minute tumbling
  // windows, well under a minute end to end.
  ScenarioSpec spec;
  spec.seed = 10;
  spec.n_cells = 20;
  spec.n_groups = 2;
  spec.base_intensity_per_min = 850.0;
  spec.intensity_sigma = 0.1;
  GroupProfile g0;
  g0.mean = (Eigen::VectorXd(5) << -100, -10, 8, 0, 0.05).finished();
  g0.covariance = covariance_from_std_corr({12, 3, 2, 6, 0.02}, {{0, 1, 0.8}});
  GroupProfile g1 = g0;
  g1.covariance = covariance_from_std_corr({12, 3, 2, 6, 0.02}, {{3, 4, 0.8}});
  spec.groups = {g0, g1};
  const auto trace = generate(spec, 60.0);
  ASSERT_GE(trace.records.size(), 1000000u);

  std::map<CellId, GeoLocation> locations;
  for (const auto& ct : trace.truth.cells) locations[ct.cell] = ct.location;
  SimilarityConfig sim = small_sim();
  sim.min_rows = 32;

  const auto start = std::chrono::steady_clock::now();
  SimilarityWindowEngine engine({10 * kMinute, 10 * kMinute}, sim, locations);
  std::size_t emitted = 0, records_seen = 0;
  for (const auto& rec : trace.records) {
    engine.push(rec);
  }
  for (const auto& wg : engine.flush()) {
    ++emitted;
    records_seen += wg.record_count();
  }
  const double seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start)
          .count();
  EXPECT_EQ(records_seen, trace.records.size());
  EXPECT_GE(emitted, 6u);
  EXPECT_LT(seconds, 60.0);
}

}  // namespace
}  // namespace ranperf
