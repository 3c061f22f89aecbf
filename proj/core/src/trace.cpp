#include "ranperf/trace.hpp"

#include <cmath>
#include <cstdlib>
#include <istream>

#include <json.hpp>

namespace ranperf {

using nlohmann::json;

const char* to_string(RejectReason reason) {
  switch (reason) {
    case RejectReason::kEmpty: return "empty";
    case RejectReason::kParse: return "parse";
    case RejectReason::kMissing: return "missing";
    case RejectReason::kType: return "type";
    case RejectReason::kRange: return "range";
    case RejectReason::kInvariant: return "invariant";
  }
  return "unknown";
}

namespace {

struct FieldRange {
  double lo;
  double hi;
};

std::optional<RejectedRecord> check_range(const char* field, double value,
                                          FieldRange range) {
  if (!std::isfinite(value) || value < range.lo || value > range.hi) {
    return RejectedRecord{0, RejectReason::kRange, field,
                          "value " + std::to_string(value) + " outside [" +
                              std::to_string(range.lo) + ", " +
                              std::to_string(range.hi) + "]"};
  }
  return std::nullopt;
}

std::optional<RejectedRecord> check_nonneg(const char* field, double value) {
  if (!std::isfinite(value) || value < 0) {
    return RejectedRecord{0, RejectReason::kRange, field, "negative or non-finite"};
  }
  return std::nullopt;
}

}  // namespace

std::optional<RejectedRecord> validate_record(const BearerRecord& rec) {
  if (!rec.cell.valid()) {
    return RejectedRecord{0, RejectReason::kMissing,
                          rec.cell.id.empty() ? "cell_id" : "site",
                          "empty identifier"};
  }
  if (rec.rsrp) {
    if (auto r = check_range("rsrp", *rec.rsrp, {-150.0, -40.0})) return r;
  }
  if (rec.rsrq) {
    if (auto r = check_range("rsrq", *rec.rsrq, {-25.0, 0.0})) return r;
  }
  if (rec.cqi_stream1 && (*rec.cqi_stream1 < 1 || *rec.cqi_stream1 > 15)) {
    return RejectedRecord{0, RejectReason::kRange, "cqi_stream1",
                          "outside [1, 15]"};
  }
  if (rec.cqi_stream2 && (*rec.cqi_stream2 < 1 || *rec.cqi_stream2 > 15)) {
    return RejectedRecord{0, RejectReason::kRange, "cqi_stream2",
                          "outside [1, 15]"};
  }
  if (rec.ul_sinr && !std::isfinite(*rec.ul_sinr)) {
    return RejectedRecord{0, RejectReason::kRange, "ul_sinr", "non-finite"};
  }
  if (rec.bler) {
    if (auto r = check_range("bler", *rec.bler, {0.0, 1.0})) return r;
  }
  if (rec.prb_div < 0) return RejectedRecord{0, RejectReason::kRange, "prb_div", "negative"};
  if (rec.prb_mux < 0) return RejectedRecord{0, RejectReason::kRange, "prb_mux", "negative"};
  if (auto r = check_nonneg("tx_time_div", rec.tx_time_div)) return r;
  if (auto r = check_nonneg("tx_time_mux", rec.tx_time_mux)) return r;
  if (rec.first_tx_count < 0) {
    return RejectedRecord{0, RejectReason::kRange, "first_tx_count", "negative"};
  }
  if (rec.total_tx_count < 0) {
    return RejectedRecord{0, RejectReason::kRange, "total_tx_count", "negative"};
  }
  if (rec.first_tx_count > rec.total_tx_count) {
    return RejectedRecord{0, RejectReason::kInvariant, "first_tx_count",
                          "first_tx_count > total_tx_count"};
  }
  if (rec.rlc_bytes < 0) {
    return RejectedRecord{0, RejectReason::kRange, "rlc_bytes", "negative"};
  }
  return std::nullopt;
}

namespace {

// Field extraction helpers shared by the JSON path. Each returns a reject on
// type violation and leaves `out` untouched when the key is absent.

std::optional<RejectedRecord> take_double(const json& obj, const char* key,
                                          std::optional<double>& out) {
  const auto it = obj.find(key);
  if (it == obj.end() || it->is_null()) return std::nullopt;
  if (!it->is_number()) {
    return RejectedRecord{0, RejectReason::kType, key, "expected number"};
  }
  out = it->get<double>();
  return std::nullopt;
}

std::optional<RejectedRecord> take_int(const json& obj, const char* key,
                                       std::optional<std::int64_t>& out) {
  const auto it = obj.find(key);
  if (it == obj.end() || it->is_null()) return std::nullopt;
  if (it->is_number_integer() || it->is_number_unsigned()) {
    out = it->get<std::int64_t>();
    return std::nullopt;
  }
  if (it->is_number_float()) {
    const double d = it->get<double>();
    if (d == std::floor(d) && std::isfinite(d)) {
      out = static_cast<std::int64_t>(d);
      return std::nullopt;
    }
  }
  return RejectedRecord{0, RejectReason::kType, key, "expected integer"};
}

constexpr const char* kKnownKeys[] = {
    "cell_id", "site", "timestamp", "rsrp", "rsrq", "cqi_stream1",
    "cqi_stream2", "ul_sinr", "bler", "prb_div", "prb_mux", "tx_time_div",
    "tx_time_mux", "first_tx_count", "total_tx_count", "rlc_bytes", "dropped"};

bool is_known_key(const std::string& key) {
  for (const char* k : kKnownKeys) {
    if (key == k) return true;
  }
  return false;
}

ParseOutcome parse_json_object(const json& obj, std::size_t line_number) {
  const auto reject = [line_number](RejectedRecord r) {
    r.line_number = line_number;
    return ParseOutcome(std::move(r));
  };

  BearerRecord rec;
  for (const char* key : {"cell_id", "site", "timestamp", "dropped"}) {
    if (!obj.contains(key)) {
      return reject({0, RejectReason::kMissing, key, "required field absent"});
    }
  }
  if (!obj["cell_id"].is_string() || !obj["site"].is_string()) {
    return reject({0, RejectReason::kType, "cell_id", "expected string"});
  }
  rec.cell.id = obj["cell_id"].get<std::string>();
  rec.cell.site = obj["site"].get<std::string>();
  if (!obj["timestamp"].is_number()) {
    return reject({0, RejectReason::kType, "timestamp", "expected integer ms"});
  }
  rec.timestamp_ms = obj["timestamp"].get<std::int64_t>();
  if (!obj["dropped"].is_boolean()) {
    return reject({0, RejectReason::kType, "dropped", "expected boolean"});
  }
  rec.dropped = obj["dropped"].get<bool>();

  if (auto r = take_double(obj, "rsrp", rec.rsrp)) return reject(*r);
  if (auto r = take_double(obj, "rsrq", rec.rsrq)) return reject(*r);
  if (auto r = take_double(obj, "ul_sinr", rec.ul_sinr)) return reject(*r);
  if (auto r = take_double(obj, "bler", rec.bler)) return reject(*r);

  std::optional<std::int64_t> i;
  if (auto r = take_int(obj, "cqi_stream1", i)) return reject(*r);
  if (i) rec.cqi_stream1 = static_cast<int>(*i);
  i.reset();
  if (auto r = take_int(obj, "cqi_stream2", i)) return reject(*r);
  if (i) rec.cqi_stream2 = static_cast<int>(*i);

  const auto take_count = [&](const char* key, std::int64_t& out)
      -> std::optional<RejectedRecord> {
    std::optional<std::int64_t> v;
    if (auto r = take_int(obj, key, v)) return r;
    if (v) out = *v;
    return std::nullopt;
  };
  if (auto r = take_count("prb_div", rec.prb_div)) return reject(*r);
  if (auto r = take_count("prb_mux", rec.prb_mux)) return reject(*r);
  if (auto r = take_count("first_tx_count", rec.first_tx_count)) return reject(*r);
  if (auto r = take_count("total_tx_count", rec.total_tx_count)) return reject(*r);
  if (auto r = take_count("rlc_bytes", rec.rlc_bytes)) return reject(*r);

  std::optional<double> d;
  if (auto r = take_double(obj, "tx_time_div", d)) return reject(*r);
  if (d) rec.tx_time_div = *d;
  d.reset();
  if (auto r = take_double(obj, "tx_time_mux", d)) return reject(*r);
  if (d) rec.tx_time_mux = *d;

  for (const auto& [key, value] : obj.items()) {
    if (!is_known_key(key)) rec.extras[key] = value.dump();
  }

  if (auto r = validate_record(rec)) return reject(*r);
  return rec;
}

}  // namespace

std::optional<ParseOutcome> TraceJsonReader::next() {
  std::string line;
  if (!std::getline(in_, line)) return std::nullopt;
  ++line_number_;
  if (line.find_first_not_of(" \t\r") == std::string::npos) {
    return ParseOutcome(
        RejectedRecord{line_number_, RejectReason::kEmpty, "", "blank line"});
  }
  json obj = json::parse(line, nullptr, /*allow_exceptions=*/false);
  if (obj.is_discarded() || !obj.is_object()) {
    return ParseOutcome(RejectedRecord{line_number_, RejectReason::kParse, "",
                                       "not a JSON object"});
  }
  return parse_json_object(obj, line_number_);
}

TraceCsvReader::TraceCsvReader(std::istream& in,
                               std::map<std::string, std::string> header_mapping)
    : in_(in), mapping_(std::move(header_mapping)) {}

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> cells;
  std::string cur;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"') {
        if (i + 1 < line.size() && line[i + 1] == '"') {
          cur += '"';
          ++i;
        } else {
          quoted = false;
        }
      } else {
        cur += c;
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      cells.push_back(cur);
      cur.clear();
    } else if (c != '\r') {
      cur += c;
    }
  }
  cells.push_back(cur);
  return cells;
}

}  // namespace

std::optional<ParseOutcome> TraceCsvReader::next() {
  if (!header_parsed_) {
    std::string header;
    if (!std::getline(in_, header)) return std::nullopt;
    ++line_number_;
    for (const auto& col : split_csv_line(header)) {
      const auto it = mapping_.find(col);
      columns_.push_back(it != mapping_.end() ? it->second : col);
    }
    header_parsed_ = true;
  }
  std::string line;
  if (!std::getline(in_, line)) return std::nullopt;
  ++line_number_;
  if (line.find_first_not_of(" \t\r,") == std::string::npos) {
    return ParseOutcome(
        RejectedRecord{line_number_, RejectReason::kEmpty, "", "blank line"});
  }
  const auto cells = split_csv_line(line);
  if (cells.size() != columns_.size()) {
    return ParseOutcome(RejectedRecord{
        line_number_, RejectReason::kParse, "",
        "expected " + std::to_string(columns_.size()) + " columns, got " +
            std::to_string(cells.size())});
  }
  // Re-encode as a JSON object and reuse the typed extraction path. Numeric
  // text becomes numbers, "true"/"false" booleans, everything else strings.
  json obj = json::object();
  for (std::size_t c = 0; c < cells.size(); ++c) {
    const std::string& field = columns_[c];
    const std::string& text = cells[c];
    if (text.empty()) continue;
    if (field == "cell_id" || field == "site") {
      obj[field] = text;
      continue;
    }
    if (text == "true" || text == "false") {
      obj[field] = (text == "true");
      continue;
    }
    char* end = nullptr;
    const double d = std::strtod(text.c_str(), &end);
    if (end != text.c_str() && *end == '\0') {
      if (d == std::floor(d) && std::abs(d) < 9.2e18 &&
          text.find_first_of(".eE") == std::string::npos) {
        obj[field] = static_cast<std::int64_t>(d);
      } else {
        obj[field] = d;
      }
    } else {
      obj[field] = text;
    }
  }
  return parse_json_object(obj, line_number_);
}

std::string serialize_record(const BearerRecord& rec) {
  json obj = json::object();
  obj["cell_id"] = rec.cell.id;
  obj["site"] = rec.cell.site;
  obj["timestamp"] = rec.timestamp_ms;
  obj["dropped"] = rec.dropped;
  if (rec.rsrp) obj["rsrp"] = *rec.rsrp;
  if (rec.rsrq) obj["rsrq"] = *rec.rsrq;
  if (rec.cqi_stream1) obj["cqi_stream1"] = *rec.cqi_stream1;
  if (rec.cqi_stream2) obj["cqi_stream2"] = *rec.cqi_stream2;
  if (rec.ul_sinr) obj["ul_sinr"] = *rec.ul_sinr;
  if (rec.bler) obj["bler"] = *rec.bler;
  obj["prb_div"] = rec.prb_div;
  obj["prb_mux"] = rec.prb_mux;
  obj["tx_time_div"] = rec.tx_time_div;
  obj["tx_time_mux"] = rec.tx_time_mux;
  obj["first_tx_count"] = rec.first_tx_count;
  obj["total_tx_count"] = rec.total_tx_count;
  obj["rlc_bytes"] = rec.rlc_bytes;
  for (const auto& [key, value] : rec.extras) {
    if (!is_known_key(key)) {
      obj[key] = json::parse(value, nullptr, /*allow_exceptions=*/false);
    }
  }
  return obj.dump();
}

}  // namespace ranperf
