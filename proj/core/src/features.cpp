#include "ranperf/features.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include "ranperf/errors.hpp"

namespace ranperf {

CqiSinrTable::CqiSinrTable(std::array<double, 15> sinr_db) : sinr_db_(sinr_db) {
  for (std::size_t i = 1; i < sinr_db_.size(); ++i) {
    if (!(sinr_db_[i] > sinr_db_[i - 1])) {
      throw DataError("CqiSinrTable: entries must be strictly increasing");
    }
  }
}

CqiSinrTable CqiSinrTable::default_table() {
  std::array<double, 15> t{};
  for (int i = 0; i < 15; ++i) t[i] = -6.0 + 2.0 * i;
  return CqiSinrTable(t);
}

CqiSinrTable CqiSinrTable::from_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open CQI table: " + path);
  std::array<double, 15> t{};
  std::array<bool, 15> seen{};
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    std::istringstream ls(line);
    int cqi = 0;
    char comma = 0;
    double db = 0;
    if (!(ls >> cqi >> comma >> db) || comma != ',') {
      throw DataError("CQI table: expected 'cqi,sinr_db' line, got: " + line);
    }
    if (cqi < 1 || cqi > 15) throw DataError("CQI table: index outside [1, 15]");
    t[cqi - 1] = db;
    seen[cqi - 1] = true;
  }
  for (int i = 0; i < 15; ++i) {
    if (!seen[i]) {
      throw DataError("CQI table: missing entry for CQI " + std::to_string(i + 1));
    }
  }
  return CqiSinrTable(t);
}

double CqiSinrTable::sinr_db(int cqi) const {
  if (cqi < 1 || cqi > 15) {
    throw DataError("CQI " + std::to_string(cqi) + " outside [1, 15]");
  }
  return sinr_db_[cqi - 1];
}

double rsrq_to_sinr(double rsrq_linear, double rho) {
  if (!(rsrq_linear > 0.0)) {
    throw DataError("rsrq_to_sinr: rsrq must be positive, got " +
                    std::to_string(rsrq_linear));
  }
  const double denom = 1.0 / (12.0 * rsrq_linear) - rho;
  if (!(denom > 0.0)) {
    throw DataError("rsrq_to_sinr: 1/(12*rsrq) - rho not positive (rsrq=" +
                    std::to_string(rsrq_linear) + ", rho=" + std::to_string(rho) +
                    "); RSRQ inconsistent with utilization assumption");
  }
  return 1.0 / denom;
}

double cqi_to_sinr_db(int cqi, const CqiSinrTable& table) {
  return table.sinr_db(cqi);
}

double diversity_sinr_db(int cqi1, int cqi2, const CqiSinrTable& table,
                         double diversity_gain_db) {
  const double db1 = table.sinr_db(cqi1);
  if (cqi1 == cqi2) return db1 + diversity_gain_db;  // averaging is identity
  const double db2 = table.sinr_db(cqi2);
  const double se1 = std::log2(1.0 + db_to_linear(db1));
  const double se2 = std::log2(1.0 + db_to_linear(db2));
  const double se_avg = 0.5 * (se1 + se2);
  const double sinr_back = std::exp2(se_avg) - 1.0;
  return linear_to_db(sinr_back) + diversity_gain_db;
}

double mac_efficiency(std::int64_t first_tx, std::int64_t total_tx) {
  if (first_tx < 0 || first_tx > total_tx) {
    throw DataError("mac_efficiency: need 0 <= first_tx <= total_tx, got " +
                    std::to_string(first_tx) + "/" + std::to_string(total_tx));
  }
  if (total_tx == 0) return 1.0;  // no transmissions, no retransmission loss
  return static_cast<double>(first_tx) / static_cast<double>(total_tx);
}

namespace {

double capacity_factor(double beta_mac, std::int64_t prb, double tx_time,
                       const ThroughputConfig& cfg) {
  return cfg.mac_term(beta_mac) * cfg.constants.bler_success *
         (1.0 - cfg.constants.prb_overhead) * cfg.constants.prb_bandwidth_hz *
         static_cast<double>(prb) / tx_time;
}

void check_phase_inputs(const char* phase, std::int64_t prb, double tx_time) {
  if (prb < 0) throw DataError(std::string(phase) + ": negative PRB count");
  if (!(tx_time > 0.0)) {
    throw DataError(std::string(phase) + ": tx_time must be positive, got " +
                    std::to_string(tx_time));
  }
}

double shannon_bits(double sinr_linear) {
  if (!(sinr_linear > -1.0)) {
    throw DataError("throughput: linear SINR must exceed -1, got " +
                    std::to_string(sinr_linear));
  }
  return std::log2(1.0 + sinr_linear);
}

}  // namespace

double predicted_throughput_div(double beta_mac, std::int64_t prb_div,
                                double sinr_div_linear, double tx_time_div,
                                const ThroughputConfig& cfg) {
  check_phase_inputs("throughput_div", prb_div, tx_time_div);
  return capacity_factor(beta_mac, prb_div, tx_time_div, cfg) *
         shannon_bits(sinr_div_linear);
}

double predicted_throughput_mux(double beta_mac, std::int64_t prb_mux,
                                double sinr1_linear, double sinr2_linear,
                                double tx_time_mux, const ThroughputConfig& cfg) {
  check_phase_inputs("throughput_mux", prb_mux, tx_time_mux);
  return capacity_factor(beta_mac, prb_mux, tx_time_mux, cfg) *
         (shannon_bits(sinr1_linear) + shannon_bits(sinr2_linear));
}

double predicted_throughput_total(double beta_mac, std::int64_t prb_div,
                                  double sinr_div_linear, double tx_time_div,
                                  std::int64_t prb_mux, double sinr1_linear,
                                  double sinr2_linear, double tx_time_mux,
                                  const ThroughputConfig& cfg) {
  const double total_time = tx_time_div + tx_time_mux;
  if (!(total_time > 0.0)) {
    throw DataError("throughput_total: both transmission times are zero");
  }
  double weighted = 0.0;
  if (tx_time_div > 0.0) {
    weighted += tx_time_div * predicted_throughput_div(beta_mac, prb_div,
                                                       sinr_div_linear,
                                                       tx_time_div, cfg);
  }
  if (tx_time_mux > 0.0) {
    weighted += tx_time_mux * predicted_throughput_mux(beta_mac, prb_mux,
                                                       sinr1_linear, sinr2_linear,
                                                       tx_time_mux, cfg);
  }
  return weighted / total_time;
}

LinkAdaptationBounds link_adaptation_bounds(double beta_mac, std::int64_t prb_div,
                                            double sinr_div_db, double tx_time_div,
                                            const ThroughputConfig& cfg) {
  const double swing = cfg.constants.link_adapt_range_db;
  LinkAdaptationBounds b;
  b.nominal_sinr_db = sinr_div_db;
  b.nominal_bps = predicted_throughput_div(beta_mac, prb_div,
                                           db_to_linear(sinr_div_db),
                                           tx_time_div, cfg);
  b.lower_bps = predicted_throughput_div(beta_mac, prb_div,
                                         db_to_linear(sinr_div_db - swing),
                                         tx_time_div, cfg);
  b.upper_bps = predicted_throughput_div(beta_mac, prb_div,
                                         db_to_linear(sinr_div_db + swing),
                                         tx_time_div, cfg);
  return b;
}

double prediction_error(double actual_bps, const LinkAdaptationBounds& bounds) {
  if (actual_bps >= bounds.lower_bps && actual_bps <= bounds.upper_bps) return 0.0;
  return actual_bps < bounds.lower_bps ? bounds.lower_bps - actual_bps
                                       : actual_bps - bounds.upper_bps;
}

double db_loss(double actual_bps, double beta_mac, std::int64_t prb_div,
               double sinr_div_db, double tx_time_div,
               const ThroughputConfig& cfg) {
  if (!(actual_bps > 0.0)) {
    throw DataError("db_loss: actual throughput must be positive");
  }
  check_phase_inputs("db_loss", prb_div, tx_time_div);
  const double c = capacity_factor(beta_mac, prb_div, tx_time_div, cfg);
  if (!(c > 0.0)) {
    throw DataError("db_loss: zero capacity factor, throughput not invertible");
  }
  const double implied_linear = std::exp2(actual_bps / c) - 1.0;
  if (!(implied_linear > 0.0)) {
    throw DataError("db_loss: implied SINR not positive");
  }
  return sinr_div_db - linear_to_db(implied_linear);
}

FeatureSchema::FeatureSchema(std::vector<std::string> names)
    : names_(std::move(names)) {
  if (names_.empty()) throw DataError("FeatureSchema: empty feature list");
  // FNV-1a over names with separators; stable across platforms.
  std::uint64_t h = 1469598103934665603ull;
  for (const auto& n : names_) {
    for (const char c : n) {
      h ^= static_cast<unsigned char>(c);
      h *= 1099511628211ull;
    }
    h ^= 0x1f;
    h *= 1099511628211ull;
  }
  hash_ = h;
}

int FeatureSchema::index_of(const std::string& name) const {
  for (std::size_t i = 0; i < names_.size(); ++i) {
    if (names_[i] == name) return static_cast<int>(i);
  }
  return -1;
}

std::string FeatureSchema::manifest() const {
  std::string out;
  for (const auto& n : names_) {
    out += n;
    out += '\n';
  }
  return out;
}

void Dataset::push_row(const std::vector<double>& row, double label) {
  x.insert(x.end(), row.begin(), row.end());
  y.push_back(label);
}

namespace {

std::optional<double> derive_feature(const std::string& name,
                                     const BearerRecord& rec,
                                     const FeatureBuildConfig& cfg) {
  if (name == "rsrp") return rec.rsrp;
  if (name == "rsrq") return rec.rsrq;
  if (name == "ul_sinr") return rec.ul_sinr;
  if (name == "bler") return rec.bler;
  if (name == "cqi_stream1") {
    if (!rec.cqi_stream1) return std::nullopt;
    return static_cast<double>(*rec.cqi_stream1);
  }
  if (name == "cqi_stream2") {
    if (!rec.cqi_stream2) return std::nullopt;
    return static_cast<double>(*rec.cqi_stream2);
  }
  if (name == "rsrq_sinr_db") {
    if (!rec.rsrq) return std::nullopt;
    const double rsrq_linear = db_to_linear(*rec.rsrq);
    const double denom = 1.0 / (12.0 * rsrq_linear) - cfg.rho;
    if (!(denom > 0.0)) return std::nullopt;  // outside formula domain
    return linear_to_db(1.0 / denom);
  }
  if (name == "cqi_sinr_db") {
    if (!rec.cqi_stream1) return std::nullopt;
    return cfg.table.sinr_db(*rec.cqi_stream1);
  }
  if (name == "diversity_sinr_db") {
    if (!rec.cqi_stream1 || !rec.cqi_stream2) return std::nullopt;
    return diversity_sinr_db(*rec.cqi_stream1, *rec.cqi_stream2, cfg.table,
                             cfg.throughput.constants.diversity_gain_db);
  }
  if (name == "sinr_gap_db") {
    const auto rsrq_based = derive_feature("rsrq_sinr_db", rec, cfg);
    const auto cqi_based = derive_feature("cqi_sinr_db", rec, cfg);
    if (!rsrq_based || !cqi_based) return std::nullopt;
    return *rsrq_based - *cqi_based;
  }
  if (name == "mac_efficiency") {
    if (rec.first_tx_count > rec.total_tx_count) return std::nullopt;
    return mac_efficiency(rec.first_tx_count, rec.total_tx_count);
  }
  if (name == "prb_div") return static_cast<double>(rec.prb_div);
  if (name == "prb_mux") return static_cast<double>(rec.prb_mux);
  if (name == "rlc_bytes") return static_cast<double>(rec.rlc_bytes);
  throw ConfigError("unknown feature name: " + name);
}

}  // namespace

std::optional<std::vector<double>> build_feature_row(
    const BearerRecord& rec, const FeatureBuildConfig& cfg) {
  std::vector<double> row;
  row.reserve(cfg.features.size());
  for (const auto& name : cfg.features) {
    const auto v = derive_feature(name, rec, cfg);
    if (!v || !std::isfinite(*v)) return std::nullopt;
    row.push_back(*v);
  }
  return row;
}

std::optional<double> build_label(const BearerRecord& rec,
                                  const FeatureBuildConfig& cfg) {
  if (cfg.label == LabelKind::kDrop) return rec.dropped ? 1.0 : 0.0;
  const double total_time = rec.tx_time_div + rec.tx_time_mux;
  if (!(total_time > 0.0)) return std::nullopt;
  return static_cast<double>(rec.rlc_bytes) * 8.0 / total_time;
}

Dataset build_dataset(const std::vector<BearerRecord>& records,
                      const FeatureBuildConfig& cfg) {
  Dataset ds;
  ds.schema = std::make_shared<FeatureSchema>(cfg.features);
  for (const auto& rec : records) {
    const auto row = build_feature_row(rec, cfg);
    if (!row) continue;
    const auto label = build_label(rec, cfg);
    if (!label) continue;
    ds.push_row(*row, *label);
  }
  return ds;
}

}  // namespace ranperf
