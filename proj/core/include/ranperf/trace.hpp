#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "ranperf/geo.hpp"

namespace ranperf {

/// A cell under a base station (site). One site hosts one or more cells;
/// (site, id) is unique within a dataset and the cell is the unit at which
/// matrices, groups and models are keyed.
struct CellId {
  std::string id;
  std::string site;

  bool valid() const { return !id.empty() && !site.empty(); }
  std::string key() const { return site + "/" + id; }

  friend bool operator==(const CellId&, const CellId&) = default;
  friend auto operator<=>(const CellId&, const CellId&) = default;
};

/// One bearer-level trace row. Radio fields are optional per record: RSRQ in
/// particular is only reported around handoff decisions, so analyses declare
/// the fields they need and drop records missing them rather than imputing.
/// Counters default to zero when absent. Unknown input keys ride along in
/// `extras` untouched.
struct BearerRecord {
  CellId cell;
  std::int64_t timestamp_ms = 0;

  std::optional<double> rsrp;     // dBm, [-150, -40]
  std::optional<double> rsrq;     // dB, [-25, 0]
  std::optional<int> cqi_stream1; // [1, 15]
  std::optional<int> cqi_stream2; // [1, 15]
  std::optional<double> ul_sinr;  // dB
  std::optional<double> bler;     // [0, 1]

  std::int64_t prb_div = 0;
  std::int64_t prb_mux = 0;
  double tx_time_div = 0.0;  // seconds
  double tx_time_mux = 0.0;  // seconds
  std::int64_t first_tx_count = 0;
  std::int64_t total_tx_count = 0;
  std::int64_t rlc_bytes = 0;
  bool dropped = false;

  /// Unknown keys, serialized JSON value per key (pass-through).
  std::map<std::string, std::string> extras;
};

enum class RejectReason {
  kEmpty,      // blank input line
  kParse,      // malformed JSON / CSV
  kMissing,    // required field absent (cell_id, site, timestamp, dropped)
  kType,       // field present with wrong type
  kRange,      // numeric field outside its declared range
  kInvariant,  // cross-field violation (first_tx_count > total_tx_count)
};

const char* to_string(RejectReason reason);

struct RejectedRecord {
  std::size_t line_number = 0;
  RejectReason reason = RejectReason::kParse;
  std::string field;    // offending field for kMissing/kType/kRange/kInvariant
  std::string detail;
};

using ParseOutcome = std::variant<BearerRecord, RejectedRecord>;

/// Validates ranges and invariants on an already-typed record. Returns the
/// reject describing the first violation, or nullopt when the record is good.
std::optional<RejectedRecord> validate_record(const BearerRecord& rec);

/// One JSON object per line; see docs/trace-format.md. Parsing is total:
/// every input line yields exactly one BearerRecord or RejectedRecord.
class TraceJsonReader {
 public:
  explicit TraceJsonReader(std::istream& in) : in_(in) {}

  /// Next outcome, or nullopt at end of stream.
  std::optional<ParseOutcome> next();

  std::size_t lines_read() const { return line_number_; }

 private:
  std::istream& in_;
  std::size_t line_number_ = 0;
};

/// CSV with a header row. `header_mapping` renames CSV columns to record
/// fields (csv column -> field name); unmapped columns become extras.
/// Empty cells are treated as absent.
class TraceCsvReader {
 public:
  TraceCsvReader(std::istream& in,
                 std::map<std::string, std::string> header_mapping = {});

  std::optional<ParseOutcome> next();

 private:
  std::istream& in_;
  std::map<std::string, std::string> mapping_;
  std::vector<std::string> columns_;  // mapped field names, positional
  std::size_t line_number_ = 0;
  bool header_parsed_ = false;
  std::optional<RejectedRecord> header_error_;
};

/// Canonical JSON line for a record (no trailing newline). Analysis fields
/// round-trip bit-exactly; extras are preserved by value.
std::string serialize_record(const BearerRecord& rec);

}  // namespace ranperf
