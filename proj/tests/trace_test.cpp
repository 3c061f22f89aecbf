#include "ranperf/trace.hpp"

#include <gtest/gtest.h>

#include <sstream>

#include "ranperf/geo.hpp"
#include "ranperf/rng.hpp"

namespace ranperf {
namespace {

ParseOutcome parse_one(const std::string& line) {
  std::istringstream in(line + "\n");
  TraceJsonReader reader(in);
  const auto outcome = reader.next();
  EXPECT_TRUE(outcome.has_value());
  return *outcome;
}

const char* kFullLine =
    R"({"cell_id":"c1","site":"s1","timestamp":1000,"dropped":true,)"
    R"("rsrp":-135.0,"rsrq":-11.5,"cqi_stream1":7,"cqi_stream2":8,)"
    R"("ul_sinr":-3.25,"bler":0.125,"prb_div":10,"prb_mux":4,)"
    R"("tx_time_div":0.25,"tx_time_mux":0.5,"first_tx_count":9,)"
    R"("total_tx_count":10,"rlc_bytes":4096,"vendor_tag":"x9"})";

TEST(TraceJson, ParsesAllFields) {
  const auto outcome = parse_one(kFullLine);
  ASSERT_TRUE(std::holds_alternative<BearerRecord>(outcome));
  const auto& rec = std::get<BearerRecord>(outcome);
  EXPECT_EQ(rec.cell.id, "c1");
  EXPECT_EQ(rec.cell.site, "s1");
  EXPECT_EQ(rec.timestamp_ms, 1000);
  EXPECT_TRUE(rec.dropped);
  EXPECT_DOUBLE_EQ(*rec.rsrp, -135.0);
  EXPECT_DOUBLE_EQ(*rec.rsrq, -11.5);
  EXPECT_EQ(*rec.cqi_stream1, 7);
  EXPECT_EQ(*rec.cqi_stream2, 8);
  EXPECT_DOUBLE_EQ(*rec.ul_sinr, -3.25);
  EXPECT_DOUBLE_EQ(*rec.bler, 0.125);
  EXPECT_EQ(rec.prb_div, 10);
  EXPECT_EQ(rec.first_tx_count, 9);
  EXPECT_EQ(rec.total_tx_count, 10);
  EXPECT_EQ(rec.rlc_bytes, 4096);
  ASSERT_EQ(rec.extras.count("vendor_tag"), 1u);
  EXPECT_EQ(rec.extras.at("vendor_tag"), "\"x9\"");
}

TEST(TraceJson, RejectsCqiOutOfRange) {
  const auto outcome = parse_one(
      R"({"cell_id":"c1","site":"s1","timestamp":1,"dropped":false,"cqi_stream1":22})");
  ASSERT_TRUE(std::holds_alternative<RejectedRecord>(outcome));
  const auto& rej = std::get<RejectedRecord>(outcome);
  EXPECT_EQ(rej.reason, RejectReason::kRange);
  EXPECT_EQ(rej.field, "cqi_stream1");
}

TEST(TraceJson, RejectsEmptyLine) {
  const auto outcome = parse_one("");
  ASSERT_TRUE(std::holds_alternative<RejectedRecord>(outcome));
  EXPECT_EQ(std::get<RejectedRecord>(outcome).reason, RejectReason::kEmpty);
}

TEST(TraceJson, RejectsMalformedJson) {
  const auto outcome = parse_one("{not json");
  ASSERT_TRUE(std::holds_alternative<RejectedRecord>(outcome));
  EXPECT_EQ(std::get<RejectedRecord>(outcome).reason, RejectReason::kParse);
}

TEST(TraceJson, RejectsMissingRequiredField) {
  const auto outcome =
      parse_one(R"({"cell_id":"c1","site":"s1","timestamp":1})");
  ASSERT_TRUE(std::holds_alternative<RejectedRecord>(outcome));
  const auto& rej = std::get<RejectedRecord>(outcome);
  EXPECT_EQ(rej.reason, RejectReason::kMissing);
  EXPECT_EQ(rej.field, "dropped");
}

TEST(TraceJson, RejectsRetransmissionInvariant) {
  const auto outcome = parse_one(
      R"({"cell_id":"c1","site":"s1","timestamp":1,"dropped":false,)"
      R"("first_tx_count":11,"total_tx_count":10})");
  ASSERT_TRUE(std::holds_alternative<RejectedRecord>(outcome));
  EXPECT_EQ(std::get<RejectedRecord>(outcome).reason, RejectReason::kInvariant);
}

TEST(TraceJson, RejectsRsrpOutOfRange) {
  const auto outcome = parse_one(
      R"({"cell_id":"c1","site":"s1","timestamp":1,"dropped":false,"rsrp":-10})");
  ASSERT_TRUE(std::holds_alternative<RejectedRecord>(outcome));
  EXPECT_EQ(std::get<RejectedRecord>(outcome).field, "rsrp");
}

TEST(TraceJson, ParsingIsTotal) {
  // Every line, valid or garbage, yields exactly one outcome.
  CounterRng rng(99);
  std::ostringstream stream;
  const int n_lines = 200;
  for (int i = 0; i < n_lines; ++i) {
    switch (rng.uniform_below(4)) {
      case 0:
        stream << R"({"cell_id":"c","site":"s","timestamp":)" << i
               << R"(,"dropped":false})" << "\n";
        break;
      case 1:
        stream << "garbage line " << i << "\n";
        break;
      case 2:
        stream << "\n";
        break;
      default:
        stream << R"({"cell_id":"c","site":"s","timestamp":)" << i
               << R"(,"dropped":false,"bler":)" << (rng.next_double() * 2.0)
               << "}\n";
        break;
    }
  }
  std::istringstream in(stream.str());
  TraceJsonReader reader(in);
  int accepted = 0, rejected = 0;
  while (auto outcome = reader.next()) {
    std::holds_alternative<BearerRecord>(*outcome) ? ++accepted : ++rejected;
  }
  EXPECT_EQ(accepted + rejected, n_lines);
  EXPECT_GT(accepted, 0);
  EXPECT_GT(rejected, 0);
}

TEST(TraceJson, SerializeRoundTripsAnalysisFields) {
  const auto original = std::get<BearerRecord>(parse_one(kFullLine));
  const std::string serialized = serialize_record(original);
  const auto reparsed = std::get<BearerRecord>(parse_one(serialized));
  EXPECT_EQ(reparsed.cell, original.cell);
  EXPECT_EQ(reparsed.timestamp_ms, original.timestamp_ms);
  EXPECT_EQ(reparsed.dropped, original.dropped);
  EXPECT_EQ(*reparsed.rsrp, *original.rsrp);
  EXPECT_EQ(*reparsed.rsrq, *original.rsrq);
  EXPECT_EQ(*reparsed.cqi_stream1, *original.cqi_stream1);
  EXPECT_EQ(*reparsed.cqi_stream2, *original.cqi_stream2);
  EXPECT_EQ(*reparsed.ul_sinr, *original.ul_sinr);
  EXPECT_EQ(*reparsed.bler, *original.bler);
  EXPECT_EQ(reparsed.prb_div, original.prb_div);
  EXPECT_EQ(reparsed.prb_mux, original.prb_mux);
  EXPECT_EQ(reparsed.tx_time_div, original.tx_time_div);
  EXPECT_EQ(reparsed.tx_time_mux, original.tx_time_mux);
  EXPECT_EQ(reparsed.first_tx_count, original.first_tx_count);
  EXPECT_EQ(reparsed.total_tx_count, original.total_tx_count);
  EXPECT_EQ(reparsed.rlc_bytes, original.rlc_bytes);
  EXPECT_EQ(reparsed.extras, original.extras);
  // A second serialization is byte-identical.
  EXPECT_EQ(serialize_record(reparsed), serialized);
}

TEST(TraceCsv, ReadsWithHeaderMapping) {
  std::istringstream in(
      "cell,station,ts,drop,power,extra_col\n"
      "c1,s1,5000,true,-101.5,hello\n"
      "c2,s1,6000,false,,world\n");
  TraceCsvReader reader(in, {{"cell", "cell_id"},
                             {"station", "site"},
                             {"ts", "timestamp"},
                             {"drop", "dropped"},
                             {"power", "rsrp"}});
  const auto first = reader.next();
  ASSERT_TRUE(first && std::holds_alternative<BearerRecord>(*first));
  const auto& r1 = std::get<BearerRecord>(*first);
  EXPECT_EQ(r1.cell.id, "c1");
  EXPECT_TRUE(r1.dropped);
  EXPECT_DOUBLE_EQ(*r1.rsrp, -101.5);
  EXPECT_EQ(r1.extras.at("extra_col"), "\"hello\"");

  const auto second = reader.next();
  ASSERT_TRUE(second && std::holds_alternative<BearerRecord>(*second));
  EXPECT_FALSE(std::get<BearerRecord>(*second).rsrp.has_value());
  EXPECT_FALSE(reader.next().has_value());
}

TEST(TraceCsv, RejectsBadColumnCountAndRange) {
  std::istringstream in(
      "cell_id,site,timestamp,dropped,rsrp\n"
      "c1,s1,1,false\n"
      "c1,s1,1,false,-999\n");
  TraceCsvReader reader(in);
  const auto first = reader.next();
  ASSERT_TRUE(first && std::holds_alternative<RejectedRecord>(*first));
  EXPECT_EQ(std::get<RejectedRecord>(*first).reason, RejectReason::kParse);
  const auto second = reader.next();
  ASSERT_TRUE(second && std::holds_alternative<RejectedRecord>(*second));
  EXPECT_EQ(std::get<RejectedRecord>(*second).reason, RejectReason::kRange);
}

TEST(Haversine, IdentityAndKnownArc) {
  const GeoLocation a{12.5, 33.25};
  EXPECT_EQ(haversine_km(a, a), 0.0);
  const GeoLocation eq0{0.0, 0.0};
  const GeoLocation eq1{0.0, 1.0};
  EXPECT_NEAR(haversine_km(eq0, eq1), 111.19, 0.1);
}

TEST(Haversine, SymmetryAndTriangleInequality) {
  CounterRng rng(4);
  for (int i = 0; i < 200; ++i) {
    const GeoLocation a{rng.next_double() * 180.0 - 90.0,
                        rng.next_double() * 360.0 - 180.0};
    const GeoLocation b{rng.next_double() * 180.0 - 90.0,
                        rng.next_double() * 360.0 - 180.0};
    const GeoLocation c{rng.next_double() * 180.0 - 90.0,
                        rng.next_double() * 360.0 - 180.0};
    EXPECT_EQ(haversine_km(a, b), haversine_km(b, a));
    const double ab = haversine_km(a, b);
    const double bc = haversine_km(b, c);
    const double ac = haversine_km(a, c);
    EXPECT_LE(ac, ab + bc + 1e-9 * (ab + bc + 1.0));
  }
}

TEST(Haversine, RejectsInvalidLocation) {
  EXPECT_THROW(haversine_km({91.0, 0.0}, {0.0, 0.0}), DataError);
}

}  // namespace
}  // namespace ranperf
