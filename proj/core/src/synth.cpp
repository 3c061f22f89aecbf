#include "ranperf/synth.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "ranperf/errors.hpp"
#include "ranperf/features.hpp"
#include "ranperf/rng.hpp"

namespace ranperf {

using nlohmann::json;

const std::vector<std::string>& synth_columns() {
  static const std::vector<std::string> cols = {"rsrp", "rsrq", "cqi", "ul_sinr",
                                                "bler"};
  return cols;
}

namespace {

int synth_column_index(const std::string& name) {
  const auto& cols = synth_columns();
  for (std::size_t i = 0; i < cols.size(); ++i) {
    if (cols[i] == name) return static_cast<int>(i);
  }
  throw ConfigError("unknown generator column: " + name);
}

std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

}  // namespace

double DropTerm::probability(double value) const {
  const double margin = direction == '<' ? (threshold - value) : (value - threshold);
  return p_max / (1.0 + std::exp(-margin / width_db));
}

double DropRule::probability(const Eigen::VectorXd& features) const {
  double keep = 1.0 - base_rate;
  for (const auto& term : terms) {
    keep *= 1.0 - term.probability(features(synth_column_index(term.column)));
  }
  return 1.0 - keep;
}

std::string DropRule::dominant_cause(const Eigen::VectorXd& features) const {
  std::string cause = "background";
  double best = base_rate;
  for (const auto& term : terms) {
    const double p = term.probability(features(synth_column_index(term.column)));
    if (p > best) {
      best = p;
      cause = term.column;
    }
  }
  return cause;
}

std::vector<int> ScenarioSpec::resolved_cells_per_group() const {
  if (!cells_per_group.empty()) return cells_per_group;
  std::vector<int> out(n_groups, n_cells / n_groups);
  for (int i = 0; i < n_cells % n_groups; ++i) ++out[i];
  return out;
}

void ScenarioSpec::validate() const {
  if (n_cells < 1) throw ConfigError("scenario: n_cells must be >= 1");
  if (n_groups < 1) throw ConfigError("scenario: n_groups must be >= 1");
  if (static_cast<int>(groups.size()) != n_groups) {
    throw ConfigError("scenario: expected " + std::to_string(n_groups) +
                      " group profiles, got " + std::to_string(groups.size()));
  }
  const auto sizes = resolved_cells_per_group();
  if (static_cast<int>(sizes.size()) != n_groups) {
    throw ConfigError("scenario: cells_per_group length != n_groups");
  }
  int total = 0;
  for (const int s : sizes) {
    if (s < 1) throw ConfigError("scenario: group sizes must be >= 1");
    total += s;
  }
  if (total != n_cells) {
    throw ConfigError("scenario: group sizes sum to " + std::to_string(total) +
                      ", expected n_cells=" + std::to_string(n_cells));
  }
  if (!(base_intensity_per_min > 0.0)) {
    throw ConfigError("scenario: base_intensity_per_min must be > 0");
  }
  if (rsrq_missing_prob < 0.0 || rsrq_missing_prob > 1.0) {
    throw ConfigError("scenario: rsrq_missing_prob outside [0, 1]");
  }
  if (!center.valid()) throw ConfigError("scenario: invalid center location");
  for (int g = 0; g < n_groups; ++g) {
    const auto& prof = groups[g];
    if (prof.mean.size() != kSynthColumnCount ||
        prof.covariance.rows() != kSynthColumnCount ||
        prof.covariance.cols() != kSynthColumnCount) {
      throw ConfigError("scenario: group " + std::to_string(g) +
                        " profile has wrong dimensions");
    }
    if (!prof.covariance.isApprox(prof.covariance.transpose(), 1e-9)) {
      throw ConfigError("scenario: group " + std::to_string(g) +
                        " covariance not symmetric");
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(prof.covariance);
    if (es.eigenvalues().minCoeff() < -1e-9) {
      throw ConfigError("scenario: group " + std::to_string(g) +
                        " covariance not positive semi-definite");
    }
    for (const auto& term : prof.drop_rule.terms) {
      synth_column_index(term.column);  // throws on unknown column
      if (term.direction != '<' && term.direction != '>') {
        throw ConfigError("scenario: drop term direction must be '<' or '>'");
      }
      if (!(term.width_db > 0.0)) {
        throw ConfigError("scenario: drop term width must be > 0");
      }
      if (term.p_max < 0.0 || term.p_max > 1.0) {
        throw ConfigError("scenario: drop term p_max outside [0, 1]");
      }
    }
  }
  for (const auto& ev : drift_events) {
    if (ev.group < 0 || ev.group >= n_groups) {
      throw ConfigError("scenario: drift event references unknown group " +
                        std::to_string(ev.group));
    }
    if (ev.mean_shift.size() != kSynthColumnCount) {
      throw ConfigError("scenario: drift mean_shift has wrong arity");
    }
    if (ev.minute < 0.0) throw ConfigError("scenario: drift minute negative");
  }
}

Eigen::MatrixXd covariance_from_std_corr(
    const std::vector<double>& stddevs,
    const std::vector<std::tuple<int, int, double>>& correlations) {
  const int n = static_cast<int>(stddevs.size());
  Eigen::MatrixXd corr = Eigen::MatrixXd::Identity(n, n);
  for (const auto& [i, j, rho] : correlations) {
    if (i < 0 || j < 0 || i >= n || j >= n || i == j) {
      throw ConfigError("covariance: bad correlation index pair");
    }
    if (rho < -1.0 || rho > 1.0) {
      throw ConfigError("covariance: correlation outside [-1, 1]");
    }
    corr(i, j) = rho;
    corr(j, i) = rho;
  }
  Eigen::VectorXd d(n);
  for (int i = 0; i < n; ++i) {
    if (stddevs[i] < 0.0) throw ConfigError("covariance: negative stddev");
    d(i) = stddevs[i];
  }
  const Eigen::MatrixXd cov = d.asDiagonal() * corr * d.asDiagonal();
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(cov);
  if (es.eigenvalues().minCoeff() < -1e-9) {
    throw ConfigError("covariance: correlation entries do not form a PSD matrix");
  }
  return cov;
}

namespace {

// Square root of a PSD covariance via eigendecomposition; LLT would reject
// the semi-definite boundary the spec allows.
Eigen::MatrixXd psd_sqrt(const Eigen::MatrixXd& cov) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(cov);
  Eigen::VectorXd vals = es.eigenvalues().cwiseMax(0.0);
  return es.eigenvectors() * vals.cwiseSqrt().asDiagonal();
}

struct CellState {
  CellId id;
  int group = 0;
  GeoLocation location;
  double intensity = 0.0;
  DropRule rule;  // group rule with per-cell threshold jitter applied
};

DropRule jitter_rule(const DropRule& rule, double jitter_db, CounterRng& rng) {
  DropRule out = rule;
  for (auto& term : out.terms) {
    term.threshold += jitter_db > 0.0 ? rng.normal(0.0, jitter_db) : 0.0;
  }
  return out;
}

constexpr double kKmPerDegLat = 111.19492664455873;  // 6371 km sphere

GeoLocation offset_km(const GeoLocation& base, double north_km, double east_km) {
  GeoLocation out = base;
  out.latitude += north_km / kKmPerDegLat;
  const double lat_rad = base.latitude * 3.141592653589793238462643383279502884 / 180.0;
  out.longitude += east_km / (kKmPerDegLat * std::max(0.2, std::cos(lat_rad)));
  return out;
}

struct GroupState {
  Eigen::VectorXd base_mean;
  Eigen::MatrixXd factor;  // psd sqrt, fixed across drift (means shift, shape stays)
  DropRule base_rule;
};

// Effective profile for a group at a given minute, folding in drift events.
void effective_profile(const ScenarioSpec& spec, const GroupState& gs, int group,
                       double minute, Eigen::VectorXd* mean_out,
                       const DropRule** rule_out) {
  *mean_out = gs.base_mean;
  const DropRule* rule = &gs.base_rule;
  for (const auto& ev : spec.drift_events) {
    if (ev.group != group || minute < ev.minute) continue;
    *mean_out += ev.mean_shift;
    if (ev.new_rule) rule = &*ev.new_rule;
  }
  *rule_out = rule;
}

std::int64_t binomial_draw(CounterRng& rng, std::int64_t n, double p) {
  std::int64_t k = 0;
  for (std::int64_t i = 0; i < n; ++i) {
    if (rng.next_double() < p) ++k;
  }
  return k;
}

}  // namespace

GeneratedTrace generate(const ScenarioSpec& spec, double duration_min) {
  spec.validate();
  if (!(duration_min > 0.0)) throw ConfigError("generate: duration must be > 0");

  CounterRng master(spec.seed);
  const auto group_sizes = spec.resolved_cells_per_group();

  std::vector<GroupState> group_states(spec.n_groups);
  for (int g = 0; g < spec.n_groups; ++g) {
    group_states[g].base_mean = spec.groups[g].mean;
    group_states[g].factor = psd_sqrt(spec.groups[g].covariance);
    group_states[g].base_rule = spec.groups[g].drop_rule;
  }

  // Lay out cells: group centroids on a circle of radius centroid_spread_km,
  // cells jittered around their centroid. Spread 0 interleaves all groups.
  std::vector<CellState> cells(spec.n_cells);
  {
    int next_cell = 0;
    for (int g = 0; g < spec.n_groups; ++g) {
      const double angle = 2.0 * 3.141592653589793238462643383279502884 *
                           static_cast<double>(g) / static_cast<double>(spec.n_groups);
      const GeoLocation centroid =
          offset_km(spec.center, spec.centroid_spread_km * std::sin(angle),
                    spec.centroid_spread_km * std::cos(angle));
      for (int c = 0; c < group_sizes[g]; ++c, ++next_cell) {
        CellState& cell = cells[next_cell];
        CounterRng rng = master.substream(0x100 + next_cell);
        cell.id.id = "c" + std::to_string(next_cell);
        cell.id.site = "s" + std::to_string(next_cell / 3);
        cell.group = g;
        cell.location = offset_km(centroid, rng.normal(0.0, spec.cell_jitter_km),
                                  rng.normal(0.0, spec.cell_jitter_km));
        const double sigma = spec.intensity_sigma;
        cell.intensity = spec.base_intensity_per_min *
                         rng.lognormal(-0.5 * sigma * sigma, sigma);
        cell.rule = jitter_rule(group_states[g].base_rule, spec.rule_jitter_db, rng);
      }
    }
  }

  GeneratedTrace out;
  out.truth.drift_events = spec.drift_events;
  for (const auto& cell : cells) {
    out.truth.cells.push_back({cell.id, cell.group, cell.location, cell.intensity});
  }

  const CqiSinrTable table = CqiSinrTable::default_table();
  const int total_minutes = static_cast<int>(std::ceil(duration_min));
  std::vector<std::int64_t> seq(spec.n_cells, 0);
  out.records.reserve(static_cast<std::size_t>(
      spec.base_intensity_per_min * spec.n_cells * duration_min * 1.2));

  for (int minute = 0; minute < total_minutes; ++minute) {
    for (int ci = 0; ci < spec.n_cells; ++ci) {
      CellState& cell = cells[ci];
      CounterRng rng = master.substream(0x10000 + ci).substream(minute);

      Eigen::VectorXd mean;
      const DropRule* group_rule = nullptr;
      effective_profile(spec, group_states[cell.group], cell.group,
                        static_cast<double>(minute), &mean, &group_rule);
      DropRule rule = *group_rule;
      if (spec.rule_jitter_db > 0.0) {
        // Keep the cell's own jittered thresholds when the rule itself did
        // not change; re-jittering per minute would wash the planted signal.
        if (rule.terms.size() == cell.rule.terms.size()) {
          bool same_shape = true;
          for (std::size_t t = 0; t < rule.terms.size(); ++t) {
            if (rule.terms[t].column != cell.rule.terms[t].column) same_shape = false;
          }
          if (same_shape) rule = cell.rule;
        }
      }

      const std::int64_t count = rng.poisson(cell.intensity);
      const Eigen::MatrixXd& factor = group_states[cell.group].factor;
      for (std::int64_t b = 0; b < count; ++b) {
        Eigen::VectorXd z(kSynthColumnCount);
        for (int d = 0; d < kSynthColumnCount; ++d) z(d) = rng.normal();
        Eigen::VectorXd x = mean + factor * z;

        BearerRecord rec;
        rec.cell = cell.id;
        rec.timestamp_ms = static_cast<std::int64_t>(minute) * 60000 +
                           static_cast<std::int64_t>(rng.next_double() * 60000.0);

        x(0) = std::clamp(x(0), -150.0, -40.0);  // rsrp
        x(1) = std::clamp(x(1), -25.0, 0.0);     // rsrq
        x(4) = std::clamp(x(4), 0.0, 1.0);       // bler
        const int cqi1 =
            std::clamp(static_cast<int>(std::llround(x(2))), 1, 15);
        const int cqi2 = std::clamp(
            cqi1 + static_cast<int>(rng.uniform_below(3)) - 1, 1, 15);
        x(2) = static_cast<double>(cqi1);

        rec.rsrp = x(0);
        if (!(rng.next_double() < spec.rsrq_missing_prob)) rec.rsrq = x(1);
        rec.cqi_stream1 = cqi1;
        rec.cqi_stream2 = cqi2;
        rec.ul_sinr = x(3);
        rec.bler = x(4);

        rec.prb_div = 1 + rng.poisson(8.0);
        rec.prb_mux = rng.poisson(12.0);
        rec.tx_time_div = 0.05 + 0.45 * rng.next_double();
        rec.tx_time_mux = rec.prb_mux > 0 ? 0.02 + 0.2 * rng.next_double() : 0.0;
        rec.total_tx_count = 10 + rng.poisson(20.0);
        rec.first_tx_count = binomial_draw(
            rng, rec.total_tx_count, std::clamp(1.0 - x(4), 0.5, 1.0));

        const double beta = mac_efficiency(rec.first_tx_count, rec.total_tx_count);
        const double sinr_div =
            db_to_linear(diversity_sinr_db(cqi1, cqi2, table));
        const double s1 = db_to_linear(table.sinr_db(cqi1));
        const double s2 = db_to_linear(table.sinr_db(cqi2));
        const double tput = predicted_throughput_total(
            beta, rec.prb_div, sinr_div, rec.tx_time_div, rec.prb_mux, s1, s2,
            rec.tx_time_mux);
        const double noise = rng.lognormal(0.0, 0.15);
        rec.rlc_bytes = std::max<std::int64_t>(
            0, static_cast<std::int64_t>(
                   tput * (rec.tx_time_div + rec.tx_time_mux) * noise / 8.0));

        const double p_drop = rule.probability(x);
        rec.dropped = rng.next_double() < p_drop;

        rec.extras["seq"] = std::to_string(seq[ci]);
        if (rec.dropped) {
          out.truth.drop_causes.push_back(
              {cell.id.key(), seq[ci], rule.dominant_cause(x)});
        }
        ++seq[ci];
        out.records.push_back(std::move(rec));
      }
    }
  }
  return out;
}

void generate_to_file(const ScenarioSpec& spec, double duration_min,
                      const std::string& trace_path,
                      const std::string& truth_path) {
  const GeneratedTrace trace = generate(spec, duration_min);
  std::ofstream out(trace_path);
  if (!out) throw IoError("cannot write trace file: " + trace_path);
  for (const auto& rec : trace.records) {
    out << serialize_record(rec) << '\n';
  }
  if (!out) throw IoError("write failed: " + trace_path);
  std::ofstream truth(truth_path);
  if (!truth) throw IoError("cannot write ground truth file: " + truth_path);
  truth << trace.truth.to_json() << '\n';
}

int GroundTruth::group_of(const CellId& cell) const {
  for (const auto& ct : cells) {
    if (ct.cell == cell) return ct.group;
  }
  return -1;
}

namespace {

json rule_to_json(const DropRule& rule) {
  json terms = json::array();
  for (const auto& t : rule.terms) {
    terms.push_back({{"column", t.column},
                     {"direction", std::string(1, t.direction)},
                     {"threshold", t.threshold},
                     {"p_max", t.p_max},
                     {"width_db", t.width_db}});
  }
  return {{"base_rate", rule.base_rate}, {"terms", terms}};
}

}  // namespace

std::string GroundTruth::to_json() const {
  json cells_json = json::array();
  for (const auto& ct : cells) {
    cells_json.push_back({{"cell_id", ct.cell.id},
                          {"site", ct.cell.site},
                          {"group", ct.group},
                          {"latitude", ct.location.latitude},
                          {"longitude", ct.location.longitude},
                          {"intensity_per_min", ct.intensity_per_min}});
  }
  json drift_json = json::array();
  for (const auto& ev : drift_events) {
    json entry = {{"minute", ev.minute}, {"group", ev.group}};
    json shift = json::array();
    for (int i = 0; i < ev.mean_shift.size(); ++i) shift.push_back(ev.mean_shift(i));
    entry["mean_shift"] = shift;
    if (ev.new_rule) entry["new_rule"] = rule_to_json(*ev.new_rule);
    drift_json.push_back(entry);
  }
  json drops_json = json::array();
  for (const auto& dc : drop_causes) {
    drops_json.push_back(
        {{"cell", dc.cell_key}, {"seq", dc.seq}, {"cause", dc.cause}});
  }
  const json doc = {{"format_version", 1},
                    {"columns", synth_columns()},
                    {"cells", cells_json},
                    {"drift_events", drift_json},
                    {"drop_causes", drops_json}};
  return doc.dump();
}

namespace {

DropTerm parse_term(const std::string& text) {
  const auto lt = text.find_first_of("<>");
  if (lt == std::string::npos) {
    throw ConfigError("drop term '" + text + "': expected column<thr:pmax:width");
  }
  DropTerm term;
  term.column = text.substr(0, lt);
  term.direction = text[lt];
  const auto rest = split_list(text.substr(lt + 1), ':');
  if (rest.size() != 3) {
    throw ConfigError("drop term '" + text + "': expected threshold:p_max:width");
  }
  term.threshold = std::stod(rest[0]);
  term.p_max = std::stod(rest[1]);
  term.width_db = std::stod(rest[2]);
  return term;
}

std::string term_to_string(const DropTerm& t) {
  return t.column + std::string(1, t.direction) + format_double(t.threshold) +
         ":" + format_double(t.p_max) + ":" + format_double(t.width_db);
}

DropRule parse_rule(const std::string& base_key, ConfigView& cfg) {
  DropRule rule;
  rule.base_rate = cfg.get_double(base_key + ".base", 0.01);
  const std::string terms = cfg.get_string(base_key + ".terms", "");
  if (!terms.empty()) {
    for (const auto& t : split_list(terms, ';')) rule.terms.push_back(parse_term(t));
  }
  return rule;
}

}  // namespace

ScenarioSpec ScenarioSpec::from_config(ConfigView& cfg) {
  ScenarioSpec spec;
  spec.seed = static_cast<std::uint64_t>(cfg.get_int("scenario.seed", 1));
  spec.n_cells = static_cast<int>(cfg.get_int("scenario.n_cells", 8));
  spec.n_groups = static_cast<int>(cfg.get_int("scenario.n_groups", 2));
  if (cfg.has("scenario.cells_per_group")) {
    for (const double v : cfg.get_doubles("scenario.cells_per_group", {})) {
      spec.cells_per_group.push_back(static_cast<int>(v));
    }
  }
  spec.base_intensity_per_min =
      cfg.get_double("scenario.base_intensity_per_min", 30.0);
  spec.intensity_sigma = cfg.get_double("scenario.intensity_sigma", 0.5);
  spec.rule_jitter_db = cfg.get_double("scenario.rule_jitter_db", 0.0);
  spec.rsrq_missing_prob = cfg.get_double("scenario.rsrq_missing_prob", 0.0);
  spec.center.latitude = cfg.get_double("geo.center_lat", 40.75);
  spec.center.longitude = cfg.get_double("geo.center_lon", -73.99);
  spec.centroid_spread_km = cfg.get_double("geo.centroid_spread_km", 0.0);
  spec.cell_jitter_km = cfg.get_double("geo.cell_jitter_km", 2.0);

  for (int g = 0; g < spec.n_groups; ++g) {
    const std::string base = "group." + std::to_string(g);
    GroupProfile prof;
    const auto mean = cfg.get_doubles(base + ".mean", {});
    if (static_cast<int>(mean.size()) != kSynthColumnCount) {
      throw ConfigError("scenario: " + base + ".mean needs " +
                        std::to_string(kSynthColumnCount) + " values");
    }
    prof.mean = Eigen::Map<const Eigen::VectorXd>(mean.data(), mean.size());
    const auto stds = cfg.get_doubles(base + ".std", {});
    if (static_cast<int>(stds.size()) != kSynthColumnCount) {
      throw ConfigError("scenario: " + base + ".std needs " +
                        std::to_string(kSynthColumnCount) + " values");
    }
    std::vector<std::tuple<int, int, double>> corr;
    const std::string corr_text = cfg.get_string(base + ".corr", "");
    if (!corr_text.empty()) {
      for (const auto& entry : split_list(corr_text, ';')) {
        const auto parts = split_list(entry, ':');
        if (parts.size() != 3) {
          throw ConfigError("scenario: " + base + ".corr entries are i:j:rho");
        }
        corr.emplace_back(std::stoi(parts[0]), std::stoi(parts[1]),
                          std::stod(parts[2]));
      }
    }
    prof.covariance = covariance_from_std_corr(stds, corr);
    prof.drop_rule = parse_rule(base + ".drop", cfg);
    spec.groups.push_back(std::move(prof));
  }

  for (int d = 0;; ++d) {
    const std::string base = "drift." + std::to_string(d);
    if (!cfg.has(base + ".minute")) break;
    DriftEvent ev;
    ev.minute = cfg.require_double(base + ".minute");
    ev.group = static_cast<int>(cfg.require_int(base + ".group"));
    const auto shift =
        cfg.get_doubles(base + ".mean_shift",
                        std::vector<double>(kSynthColumnCount, 0.0));
    if (static_cast<int>(shift.size()) != kSynthColumnCount) {
      throw ConfigError("scenario: " + base + ".mean_shift needs " +
                        std::to_string(kSynthColumnCount) + " values");
    }
    ev.mean_shift = Eigen::Map<const Eigen::VectorXd>(shift.data(), shift.size());
    if (cfg.has(base + ".rule.terms") || cfg.has(base + ".rule.base")) {
      ev.new_rule = parse_rule(base + ".rule", cfg);
    }
    spec.drift_events.push_back(std::move(ev));
  }
  spec.validate();
  return spec;
}

std::string ScenarioSpec::to_config() const {
  std::ostringstream out;
  out << "scenario.seed=" << seed << "\n";
  out << "scenario.n_cells=" << n_cells << "\n";
  out << "scenario.n_groups=" << n_groups << "\n";
  if (!cells_per_group.empty()) {
    out << "scenario.cells_per_group=";
    for (std::size_t i = 0; i < cells_per_group.size(); ++i) {
      out << (i ? "," : "") << cells_per_group[i];
    }
    out << "\n";
  }
  out << "scenario.base_intensity_per_min=" << format_double(base_intensity_per_min)
      << "\n";
  out << "scenario.intensity_sigma=" << format_double(intensity_sigma) << "\n";
  out << "scenario.rule_jitter_db=" << format_double(rule_jitter_db) << "\n";
  out << "scenario.rsrq_missing_prob=" << format_double(rsrq_missing_prob) << "\n";
  out << "geo.center_lat=" << format_double(center.latitude) << "\n";
  out << "geo.center_lon=" << format_double(center.longitude) << "\n";
  out << "geo.centroid_spread_km=" << format_double(centroid_spread_km) << "\n";
  out << "geo.cell_jitter_km=" << format_double(cell_jitter_km) << "\n";
  for (int g = 0; g < n_groups; ++g) {
    const std::string base = "group." + std::to_string(g);
    out << base << ".mean=";
    for (int i = 0; i < kSynthColumnCount; ++i) {
      out << (i ? "," : "") << format_double(groups[g].mean(i));
    }
    out << "\n";
    // Decompose covariance back to std + correlations.
    Eigen::VectorXd sd = groups[g].covariance.diagonal().cwiseSqrt();
    out << base << ".std=";
    for (int i = 0; i < kSynthColumnCount; ++i) {
      out << (i ? "," : "") << format_double(sd(i));
    }
    out << "\n";
    std::string corr;
    for (int i = 0; i < kSynthColumnCount; ++i) {
      for (int j = i + 1; j < kSynthColumnCount; ++j) {
        if (sd(i) <= 0.0 || sd(j) <= 0.0) continue;
        const double rho = groups[g].covariance(i, j) / (sd(i) * sd(j));
        if (std::abs(rho) > 1e-12) {
          if (!corr.empty()) corr += ";";
          corr += std::to_string(i) + ":" + std::to_string(j) + ":" +
                  format_double(rho);
        }
      }
    }
    if (!corr.empty()) out << base << ".corr=" << corr << "\n";
    out << base << ".drop.base=" << format_double(groups[g].drop_rule.base_rate)
        << "\n";
    if (!groups[g].drop_rule.terms.empty()) {
      out << base << ".drop.terms=";
      for (std::size_t t = 0; t < groups[g].drop_rule.terms.size(); ++t) {
        out << (t ? ";" : "") << term_to_string(groups[g].drop_rule.terms[t]);
      }
      out << "\n";
    }
  }
  for (std::size_t d = 0; d < drift_events.size(); ++d) {
    const auto& ev = drift_events[d];
    const std::string base = "drift." + std::to_string(d);
    out << base << ".minute=" << format_double(ev.minute) << "\n";
    out << base << ".group=" << ev.group << "\n";
    out << base << ".mean_shift=";
    for (int i = 0; i < kSynthColumnCount; ++i) {
      out << (i ? "," : "") << format_double(ev.mean_shift(i));
    }
    out << "\n";
    if (ev.new_rule) {
      out << base << ".rule.base=" << format_double(ev.new_rule->base_rate) << "\n";
      if (!ev.new_rule->terms.empty()) {
        out << base << ".rule.terms=";
        for (std::size_t t = 0; t < ev.new_rule->terms.size(); ++t) {
          out << (t ? ";" : "") << term_to_string(ev.new_rule->terms[t]);
        }
        out << "\n";
      }
    }
  }
  return out.str();
}

}  // namespace ranperf
