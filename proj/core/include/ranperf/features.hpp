#pragma once

#include <array>
#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "ranperf/trace.hpp"

namespace ranperf {

inline double db_to_linear(double db) { return std::pow(10.0, db / 10.0); }
inline double linear_to_db(double linear) { return 10.0 * std::log10(linear); }

/// CQI index (1..15) to SINR dB mapping as used by the base-station
/// scheduler. The operator table is proprietary; the shipped default is
/// linear in dB from -6.0 (CQI 1) to 22.0 (CQI 15), 2 dB per step, and can
/// be replaced from a file of 15 "cqi,sinr_db" lines.
class CqiSinrTable {
 public:
  /// Strictly increasing table, entries[0] for CQI 1.
  explicit CqiSinrTable(std::array<double, 15> sinr_db);

  static CqiSinrTable default_table();
  static CqiSinrTable from_file(const std::string& path);

  double sinr_db(int cqi) const;  // throws DataError outside [1, 15]

 private:
  std::array<double, 15> sinr_db_;
};

/// Named physical-layer constants. Defaults carry the published values;
/// every one is overridable through configuration.
struct RadioConstants {
  double bler_success = 0.9;        // 1 - BLER target (target is 10%)
  double prb_overhead = 0.29;       // control-channel overhead per PRB
  double prb_bandwidth_hz = 180e3;  // PRB width
  double diversity_gain_db = 3.0;   // transmit-diversity gain
  double link_adapt_range_db = 6.0; // max link-adaptation swing
};

/// How the MAC factor enters the throughput equation. The published equation
/// multiplies by (1 - beta_mac) even though beta_mac is itself an efficiency,
/// so `kAsPrinted` is the default; `kEfficiency` multiplies by beta_mac.
enum class MacFactorMode { kAsPrinted, kEfficiency };

struct ThroughputConfig {
  RadioConstants constants;
  MacFactorMode mac_factor = MacFactorMode::kAsPrinted;

  double mac_term(double beta_mac) const {
    return mac_factor == MacFactorMode::kAsPrinted ? 1.0 - beta_mac : beta_mac;
  }
};

/// RSRQ (linear ratio) to linear SINR: 1 / (1/(12*rsrq) - rho).
/// rho reflects subcarrier utilization; for two antennas it spans
/// [1/3, 5/3] (1/3 at 0% utilization, 5/3 at 100%), default 1.0.
/// Throws DataError when the denominator is not positive, which signals an
/// RSRQ inconsistent with the utilization assumption.
double rsrq_to_sinr(double rsrq_linear, double rho);

inline constexpr double kRhoMin = 1.0 / 3.0;
inline constexpr double kRhoMax = 5.0 / 3.0;
inline constexpr double kRhoDefault = 1.0;

double cqi_to_sinr_db(int cqi, const CqiSinrTable& table);

/// Single SINR for transmit diversity from the two reported CQIs: convert
/// both to linear SINR, average the Shannon spectral efficiencies, convert
/// back, add the diversity gain.
double diversity_sinr_db(int cqi1, int cqi2, const CqiSinrTable& table,
                         double diversity_gain_db = 3.0);

/// beta_MAC: first transmissions over total transmissions. Defined as 1.0
/// when nothing was transmitted. Throws DataError when first > total.
double mac_efficiency(std::int64_t first_tx, std::int64_t total_tx);

/// Predicted RLC throughput (bits/sec) for the transmit-diversity phase:
///   mac_term * bler_success * (1 - prb_overhead) * 180e3 * prb
///     * log2(1 + sinr_linear) / tx_time.
double predicted_throughput_div(double beta_mac, std::int64_t prb_div,
                                double sinr_div_linear, double tx_time_div,
                                const ThroughputConfig& cfg = {});

/// Spatial-multiplexing phase: the two streams' Shannon capacities add.
double predicted_throughput_mux(double beta_mac, std::int64_t prb_mux,
                                double sinr1_linear, double sinr2_linear,
                                double tx_time_mux,
                                const ThroughputConfig& cfg = {});

/// Final prediction: the two phase throughputs weighted by their fraction of
/// transmission time. Throws DataError when both times are zero.
double predicted_throughput_total(double beta_mac, std::int64_t prb_div,
                                  double sinr_div_linear, double tx_time_div,
                                  std::int64_t prb_mux, double sinr1_linear,
                                  double sinr2_linear, double tx_time_mux,
                                  const ThroughputConfig& cfg = {});

/// Link-adaptation envelope around a diversity-phase prediction: the base
/// station adjusts at most +/-6 dB, so the acceptance band is the prediction
/// re-evaluated at sinr -6 dB and +6 dB.
struct LinkAdaptationBounds {
  double lower_bps = 0.0;
  double upper_bps = 0.0;
  double nominal_bps = 0.0;
  double nominal_sinr_db = 0.0;
};

LinkAdaptationBounds link_adaptation_bounds(double beta_mac, std::int64_t prb_div,
                                            double sinr_div_db, double tx_time_div,
                                            const ThroughputConfig& cfg = {});

/// Zero inside the band (bounds inclusive), otherwise distance to the
/// nearest bound.
double prediction_error(double actual_bps, const LinkAdaptationBounds& bounds);

/// Efficiency loss in dB: nominal SINR minus the SINR implied by inverting
/// the throughput equation at the observed throughput. Throws DataError for
/// actual <= 0 or a non-invertible configuration (zero capacity factor).
double db_loss(double actual_bps, double beta_mac, std::int64_t prb_div,
               double sinr_div_db, double tx_time_div,
               const ThroughputConfig& cfg = {});

/// Ordered, named feature layout for one analysis. Arity is fixed across a
/// dataset; the hash pins model files to the schema they were trained on.
class FeatureSchema {
 public:
  explicit FeatureSchema(std::vector<std::string> names);

  const std::vector<std::string>& names() const { return names_; }
  std::size_t size() const { return names_.size(); }
  int index_of(const std::string& name) const;  // -1 when absent
  std::uint64_t hash() const { return hash_; }

  std::string manifest() const;  // one name per line, order preserved

 private:
  std::vector<std::string> names_;
  std::uint64_t hash_;
};

using FeatureSchemaPtr = std::shared_ptr<const FeatureSchema>;

/// Labelled dataset with row-major storage. y is 0/1 for classification.
struct Dataset {
  FeatureSchemaPtr schema;
  std::vector<double> x;  // n_rows * schema->size()
  std::vector<double> y;

  std::size_t rows() const { return y.size(); }
  std::size_t cols() const { return schema ? schema->size() : 0; }
  const double* row(std::size_t i) const { return x.data() + i * cols(); }
  void push_row(const std::vector<double>& row, double label);
};

enum class LabelKind { kDrop, kThroughputBps };

/// Options for turning raw bearer records into model features. Every listed
/// feature must be derivable from the record; records missing a required raw
/// field are skipped (no imputation).
struct FeatureBuildConfig {
  std::vector<std::string> features = {"rsrp",    "rsrq_sinr_db", "cqi_sinr_db",
                                       "ul_sinr", "bler",         "mac_efficiency"};
  LabelKind label = LabelKind::kDrop;
  double rho = kRhoDefault;
  CqiSinrTable table = CqiSinrTable::default_table();
  ThroughputConfig throughput;
};

/// Derivable feature names: rsrp, rsrq (dB), ul_sinr, bler, cqi_stream1,
/// cqi_stream2, rsrq_sinr_db, cqi_sinr_db, diversity_sinr_db, sinr_gap_db,
/// mac_efficiency, prb_div, prb_mux, rlc_bytes.
std::optional<std::vector<double>> build_feature_row(
    const BearerRecord& rec, const FeatureBuildConfig& cfg);

std::optional<double> build_label(const BearerRecord& rec,
                                  const FeatureBuildConfig& cfg);

/// Dataset over all records whose required fields are present.
Dataset build_dataset(const std::vector<BearerRecord>& records,
                      const FeatureBuildConfig& cfg);

}  // namespace ranperf
