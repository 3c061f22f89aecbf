#include "ranperf/learner.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>

#include <json.hpp>

#include "ranperf/errors.hpp"
#include "ranperf/rng.hpp"

namespace ranperf {

using nlohmann::json;

const char* to_string(Task task) {
  return task == Task::kClassification ? "classification" : "regression";
}

double DecisionTree::predict(const double* row) const {
  int i = 0;
  while (nodes[i].feature >= 0) {
    i = row[nodes[i].feature] < nodes[i].threshold ? nodes[i].left
                                                   : nodes[i].right;
  }
  return nodes[i].value;
}

int DecisionTree::depth() const {
  int max_depth = 0;
  // Depth via parent-pointer-free walk: recompute per node.
  std::vector<int> depth(nodes.size(), 0);
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    if (nodes[i].feature >= 0) {
      depth[nodes[i].left] = depth[i] + 1;
      depth[nodes[i].right] = depth[i] + 1;
      max_depth = std::max(max_depth, depth[i] + 1);
    }
  }
  return max_depth;
}

void DecisionTree::accumulate_importance(std::vector<double>& by_feature,
                                         double weight) const {
  for (const auto& node : nodes) {
    if (node.feature >= 0 &&
        node.feature < static_cast<int>(by_feature.size())) {
      by_feature[node.feature] += weight * node.gain;
    }
  }
}

namespace {

// Multiset-stable sum: accumulate in sorted order so the result depends only
// on the multiset of values, not on row order.
double stable_sum(std::vector<double> values) {
  std::sort(values.begin(), values.end());
  double s = 0.0;
  for (const double v : values) s += v;
  return s;
}

struct SplitChoice {
  int feature = -1;
  double threshold = 0.0;
  double gain = 0.0;
};

// Impurity bookkeeping shared by both criteria. For regression the impurity
// of a row set is its sum of squared errors; for classification it is
// n * gini. Gains are reductions of these, which makes them additive across
// splits (the importance unit).
class TreeBuilder {
 public:
  TreeBuilder(const Dataset& data, const TreeParams& params,
              const std::vector<double>& targets,
              const std::vector<double>* newton_num,
              const std::vector<double>* newton_den)
      : data_(data),
        params_(params),
        targets_(targets),
        newton_num_(newton_num),
        newton_den_(newton_den) {}

  DecisionTree build(const std::vector<std::int64_t>& rows) {
    DecisionTree tree;
    build_node(rows, 0, tree);
    return tree;
  }

 private:
  double leaf_value(const std::vector<std::int64_t>& rows) const {
    if (newton_num_) {
      std::vector<double> num, den;
      num.reserve(rows.size());
      den.reserve(rows.size());
      for (const auto r : rows) {
        num.push_back((*newton_num_)[r]);
        den.push_back((*newton_den_)[r]);
      }
      const double d = stable_sum(std::move(den));
      if (d <= 1e-12) return 0.0;
      return stable_sum(std::move(num)) / d;
    }
    std::vector<double> vals;
    vals.reserve(rows.size());
    for (const auto r : rows) vals.push_back(targets_[r]);
    return stable_sum(std::move(vals)) / static_cast<double>(rows.size());
  }

  double node_impurity(const std::vector<std::int64_t>& rows) const {
    const double n = static_cast<double>(rows.size());
    if (params_.task == Task::kClassification && !newton_num_) {
      std::int64_t pos = 0;
      for (const auto r : rows) pos += targets_[r] > 0.5 ? 1 : 0;
      const double p = static_cast<double>(pos) / n;
      return n * 2.0 * p * (1.0 - p);  // n * gini for two classes
    }
    std::vector<double> vals, sq;
    vals.reserve(rows.size());
    sq.reserve(rows.size());
    for (const auto r : rows) {
      vals.push_back(targets_[r]);
      sq.push_back(targets_[r] * targets_[r]);
    }
    const double s = stable_sum(std::move(vals));
    const double s2 = stable_sum(std::move(sq));
    return s2 - s * s / n;  // sum of squared errors
  }

  SplitChoice best_split(const std::vector<std::int64_t>& rows) const {
    SplitChoice best;
    const double parent = node_impurity(rows);
    if (parent <= 1e-12) return best;
    const std::int64_t n = static_cast<std::int64_t>(rows.size());
    const int n_features = static_cast<int>(data_.cols());
    const bool classify = params_.task == Task::kClassification && !newton_num_;

    std::vector<std::pair<double, double>> pairs(rows.size());
    for (int f = 0; f < n_features; ++f) {
      for (std::size_t i = 0; i < rows.size(); ++i) {
        pairs[i] = {data_.row(rows[i])[f], targets_[rows[i]]};
      }
      // Sorting by (value, target) keeps prefix sums a function of the
      // multiset, which is what makes tie-breaking order-independent.
      std::sort(pairs.begin(), pairs.end());

      // Boundaries between distinct values, capped at max_thresholds via
      // even strides over the distinct boundaries.
      std::vector<std::int64_t> boundaries;  // split after index b
      for (std::int64_t i = 0; i + 1 < n; ++i) {
        if (pairs[i].first < pairs[i + 1].first) boundaries.push_back(i);
      }
      if (boundaries.empty()) continue;
      std::vector<std::int64_t> chosen;
      if (static_cast<int>(boundaries.size()) <= params_.max_thresholds) {
        chosen = boundaries;
      } else {
        chosen.reserve(params_.max_thresholds);
        const double stride = static_cast<double>(boundaries.size()) /
                              static_cast<double>(params_.max_thresholds);
        for (int t = 0; t < params_.max_thresholds; ++t) {
          chosen.push_back(boundaries[static_cast<std::int64_t>(
              stride * (static_cast<double>(t) + 0.5))]);
        }
        chosen.erase(std::unique(chosen.begin(), chosen.end()), chosen.end());
      }

      // Prefix statistics in sorted order.
      std::vector<double> prefix_sum(rows.size() + 1, 0.0);
      std::vector<double> prefix_sq(rows.size() + 1, 0.0);
      std::vector<std::int64_t> prefix_pos(rows.size() + 1, 0);
      for (std::size_t i = 0; i < pairs.size(); ++i) {
        prefix_sum[i + 1] = prefix_sum[i] + pairs[i].second;
        prefix_sq[i + 1] = prefix_sq[i] + pairs[i].second * pairs[i].second;
        prefix_pos[i + 1] = prefix_pos[i] + (pairs[i].second > 0.5 ? 1 : 0);
      }

      for (const std::int64_t b : chosen) {
        const std::int64_t nl = b + 1;
        const std::int64_t nr = n - nl;
        if (nl < params_.min_leaf || nr < params_.min_leaf) continue;
        double child_impurity;
        if (classify) {
          const double pl = static_cast<double>(prefix_pos[nl]) /
                            static_cast<double>(nl);
          const double pr =
              static_cast<double>(prefix_pos[n] - prefix_pos[nl]) /
              static_cast<double>(nr);
          child_impurity = static_cast<double>(nl) * 2.0 * pl * (1.0 - pl) +
                           static_cast<double>(nr) * 2.0 * pr * (1.0 - pr);
        } else {
          const double sl = prefix_sum[nl];
          const double s2l = prefix_sq[nl];
          const double sr = prefix_sum[n] - sl;
          const double s2r = prefix_sq[n] - s2l;
          child_impurity = (s2l - sl * sl / static_cast<double>(nl)) +
                           (s2r - sr * sr / static_cast<double>(nr));
        }
        const double gain = parent - child_impurity;
        // Strictly-greater keeps the first optimum in (feature, threshold)
        // scan order: lowest feature index, then lowest threshold.
        if (gain > best.gain + 1e-12 * std::max(1.0, parent)) {
          best.feature = f;
          best.threshold = 0.5 * (pairs[b].first + pairs[b + 1].first);
          best.gain = gain;
        }
      }
    }
    return best;
  }

  int build_node(const std::vector<std::int64_t>& rows, int depth,
                 DecisionTree& tree) {
    const int index = static_cast<int>(tree.nodes.size());
    tree.nodes.emplace_back();
    tree.nodes[index].n_samples = static_cast<std::int64_t>(rows.size());
    SplitChoice split;
    if (depth < params_.max_depth &&
        static_cast<std::int64_t>(rows.size()) >= 2 * params_.min_leaf) {
      split = best_split(rows);
    }
    if (split.feature < 0) {
      tree.nodes[index].value = leaf_value(rows);
      return index;
    }
    std::vector<std::int64_t> left_rows, right_rows;
    left_rows.reserve(rows.size());
    right_rows.reserve(rows.size());
    for (const auto r : rows) {
      (data_.row(r)[split.feature] < split.threshold ? left_rows : right_rows)
          .push_back(r);
    }
    tree.nodes[index].feature = split.feature;
    tree.nodes[index].threshold = split.threshold;
    tree.nodes[index].gain = split.gain;
    const int left = build_node(left_rows, depth + 1, tree);
    const int right = build_node(right_rows, depth + 1, tree);
    tree.nodes[index].left = left;
    tree.nodes[index].right = right;
    return index;
  }

  const Dataset& data_;
  const TreeParams& params_;
  const std::vector<double>& targets_;
  const std::vector<double>* newton_num_;
  const std::vector<double>* newton_den_;
};

}  // namespace

DecisionTree fit_tree(const Dataset& data, const TreeParams& params) {
  if (data.rows() == 0) throw DataError("fit_tree: empty dataset");
  if (static_cast<std::int64_t>(data.rows()) < params.min_leaf) {
    throw DataError("fit_tree: fewer rows than min_leaf");
  }
  std::vector<std::int64_t> rows(data.rows());
  std::iota(rows.begin(), rows.end(), 0);
  TreeBuilder builder(data, params, data.y, nullptr, nullptr);
  return builder.build(rows);
}

namespace {

double sigmoid(double z) { return 1.0 / (1.0 + std::exp(-z)); }

// Residual tree for one boosting round over the given rows.
DecisionTree fit_boost_tree(const Dataset& data,
                            const std::vector<double>& residuals,
                            const std::vector<double>* newton_num,
                            const std::vector<double>* newton_den,
                            const std::vector<std::int64_t>& rows,
                            int max_depth, int min_leaf) {
  TreeParams tp;
  tp.task = Task::kRegression;  // structure always fits residual variance
  tp.max_depth = max_depth;
  tp.min_leaf = min_leaf;
  TreeBuilder builder(data, tp, residuals, newton_num, newton_den);
  return builder.build(rows);
}

std::vector<std::int64_t> subsample_rows(std::size_t n, double fraction,
                                         CounterRng rng) {
  std::vector<std::int64_t> rows(n);
  std::iota(rows.begin(), rows.end(), 0);
  if (fraction >= 1.0) return rows;
  const std::size_t keep = std::max<std::size_t>(
      1, static_cast<std::size_t>(fraction * static_cast<double>(n)));
  // Partial Fisher-Yates, then sort for deterministic scan order.
  for (std::size_t i = 0; i < keep; ++i) {
    const std::size_t j = i + rng.uniform_below(n - i);
    std::swap(rows[i], rows[j]);
  }
  rows.resize(keep);
  std::sort(rows.begin(), rows.end());
  return rows;
}

void boost_rounds(const Dataset& data, const GbtParams& params, int n_rounds,
                  int max_depth, double subsample, std::uint64_t seed,
                  std::vector<double>& scores,
                  std::vector<DecisionTree>& out_trees) {
  const std::size_t n = data.rows();
  CounterRng rng(seed);
  std::vector<double> residuals(n);
  std::vector<double> newton_num, newton_den;
  const bool classify = params.task == Task::kClassification;
  if (classify) {
    newton_num.resize(n);
    newton_den.resize(n);
  }
  for (int t = 0; t < n_rounds; ++t) {
    for (std::size_t i = 0; i < n; ++i) {
      if (classify) {
        const double p = sigmoid(scores[i]);
        residuals[i] = data.y[i] - p;
        newton_num[i] = residuals[i];
        newton_den[i] = std::max(p * (1.0 - p), 1e-12);
      } else {
        residuals[i] = data.y[i] - scores[i];
      }
    }
    const auto rows = subsample_rows(n, subsample, rng.substream(t));
    DecisionTree tree =
        fit_boost_tree(data, residuals, classify ? &newton_num : nullptr,
                       classify ? &newton_den : nullptr, rows, max_depth,
                       params.min_leaf);
    for (std::size_t i = 0; i < n; ++i) {
      scores[i] += params.learning_rate * tree.predict(data.row(i));
    }
    out_trees.push_back(std::move(tree));
  }
}

}  // namespace

HybridModel fit_offline(const Dataset& pooled, const GbtParams& params) {
  if (pooled.rows() == 0) throw DataError("fit_offline: empty pool");
  if (!pooled.schema) throw DataError("fit_offline: dataset has no schema");
  HybridModel model;
  model.task = params.task;
  model.schema = pooled.schema;
  model.base_score = 0.0;
  model.half_life_windows = params.half_life_windows;
  model.params = params;

  std::vector<double> scores(pooled.rows(), model.base_score);
  std::vector<DecisionTree> trees;
  boost_rounds(pooled, params, params.n_trees, params.max_depth,
               params.subsample, params.seed, scores, trees);
  model.common.reserve(trees.size());
  for (auto& t : trees) {
    model.common.push_back({std::move(t), params.learning_rate});
  }
  return model;
}

HybridModel fit_offline(const std::map<std::string, Dataset>& per_cell,
                        const GbtParams& params) {
  Dataset pooled;
  for (const auto& [key, ds] : per_cell) {
    if (!pooled.schema) {
      pooled.schema = ds.schema;
    } else if (ds.schema && ds.schema->hash() != pooled.schema->hash()) {
      throw SchemaError("fit_offline: feature schema differs across cells");
    }
    pooled.x.insert(pooled.x.end(), ds.x.begin(), ds.x.end());
    pooled.y.insert(pooled.y.end(), ds.y.begin(), ds.y.end());
  }
  return fit_offline(pooled, params);
}

double HybridModel::raw_score(const std::string& cell_key, const double* row,
                              std::int64_t now_window) const {
  double score = base_score;
  for (const auto& wt : common) score += wt.weight * wt.tree.predict(row);
  const auto it = per_cell.find(cell_key);
  if (it != per_cell.end()) {
    for (const auto& ot : it->second) {
      double decay = 1.0;
      if (std::isfinite(half_life_windows) && half_life_windows > 0.0) {
        const double age =
            static_cast<double>(std::max<std::int64_t>(0, now_window - ot.birth_window));
        decay = std::exp2(-age / half_life_windows);
      }
      score += ot.weight * decay * ot.tree.predict(row);
    }
  }
  return score;
}

double HybridModel::predict(const std::string& cell_key, const double* row,
                            std::int64_t now_window) const {
  const double score = raw_score(cell_key, row, now_window);
  return task == Task::kClassification ? sigmoid(score) : score;
}

HybridModel update_online(const HybridModel& model, const std::string& cell_key,
                          const Dataset& minibatch, std::int64_t now_window) {
  if (minibatch.rows() == 0) throw DataError("update_online: empty minibatch");
  if (!minibatch.schema || !model.schema ||
      minibatch.schema->hash() != model.schema->hash()) {
    throw SchemaError("update_online: minibatch schema does not match model");
  }
  HybridModel next = model;
  auto& online = next.per_cell[cell_key];

  const std::size_t n = minibatch.rows();
  const bool classify = model.task == Task::kClassification;
  std::vector<double> residuals(n), newton_num, newton_den;
  if (classify) {
    newton_num.resize(n);
    newton_den.resize(n);
  }
  std::vector<std::int64_t> rows(n);
  std::iota(rows.begin(), rows.end(), 0);

  for (int t = 0; t < model.params.online_trees_per_update; ++t) {
    for (std::size_t i = 0; i < n; ++i) {
      const double score =
          next.raw_score(cell_key, minibatch.row(i), now_window);
      if (classify) {
        const double p = sigmoid(score);
        residuals[i] = minibatch.y[i] - p;
        newton_num[i] = residuals[i];
        newton_den[i] = std::max(p * (1.0 - p), 1e-12);
      } else {
        residuals[i] = minibatch.y[i] - score;
      }
    }
    DecisionTree tree = fit_boost_tree(
        minibatch, residuals, classify ? &newton_num : nullptr,
        classify ? &newton_den : nullptr, rows, model.params.online_max_depth,
        model.params.min_leaf);
    online.push_back({std::move(tree), model.params.learning_rate, now_window});
  }
  return next;
}

double mean_loss(const HybridModel& model, const std::string& cell_key,
                 const Dataset& data, std::int64_t now_window) {
  if (data.rows() == 0) throw DataError("mean_loss: empty dataset");
  double total = 0.0;
  for (std::size_t i = 0; i < data.rows(); ++i) {
    const double score = model.raw_score(cell_key, data.row(i), now_window);
    if (model.task == Task::kClassification) {
      // -y log p - (1-y) log (1-p), numerically via log1p(exp(.)).
      const double z = score;
      const double y = data.y[i];
      total += (z > 0 ? z : 0.0) - y * z + std::log1p(std::exp(-std::abs(z)));
    } else {
      const double e = data.y[i] - score;
      total += e * e;
    }
  }
  return total / static_cast<double>(data.rows());
}

EvalMetrics evaluate(const HybridModel& model, const std::string& cell_key,
                     const Dataset& data, std::int64_t now_window) {
  EvalMetrics m;
  m.n = data.rows();
  if (data.rows() == 0) return m;
  if (model.task == Task::kClassification) {
    std::int64_t correct = 0, tp = 0, tn = 0, pos = 0, neg = 0;
    for (std::size_t i = 0; i < data.rows(); ++i) {
      const bool predicted =
          model.predict(cell_key, data.row(i), now_window) >= 0.5;
      const bool actual = data.y[i] > 0.5;
      if (predicted == actual) ++correct;
      if (actual) {
        ++pos;
        if (predicted) ++tp;
      } else {
        ++neg;
        if (!predicted) ++tn;
      }
    }
    m.accuracy = static_cast<double>(correct) / static_cast<double>(data.rows());
    const double recall_pos =
        pos > 0 ? static_cast<double>(tp) / static_cast<double>(pos) : 1.0;
    const double recall_neg =
        neg > 0 ? static_cast<double>(tn) / static_cast<double>(neg) : 1.0;
    m.balanced_accuracy = 0.5 * (recall_pos + recall_neg);
  } else {
    double sse = 0.0;
    for (std::size_t i = 0; i < data.rows(); ++i) {
      const double e =
          data.y[i] - model.predict(cell_key, data.row(i), now_window);
      sse += e * e;
    }
    m.rmse = std::sqrt(sse / static_cast<double>(data.rows()));
  }
  return m;
}

std::vector<double> feature_importances(const HybridModel& model) {
  if (!model.schema) throw DataError("feature_importances: model has no schema");
  std::vector<double> imp(model.schema->size(), 0.0);
  for (const auto& wt : model.common) {
    wt.tree.accumulate_importance(imp, wt.weight);
  }
  for (const auto& [cell, trees] : model.per_cell) {
    for (const auto& ot : trees) ot.tree.accumulate_importance(imp, ot.weight);
  }
  const double total = std::accumulate(imp.begin(), imp.end(), 0.0);
  if (total > 0.0) {
    for (auto& v : imp) v /= total;
  }
  return imp;
}

namespace {

json tree_to_json(const DecisionTree& tree) {
  json nodes = json::array();
  for (const auto& n : tree.nodes) {
    nodes.push_back({{"f", n.feature},
                     {"t", n.threshold},
                     {"l", n.left},
                     {"r", n.right},
                     {"v", n.value},
                     {"g", n.gain},
                     {"n", n.n_samples}});
  }
  return {{"nodes", nodes}};
}

DecisionTree tree_from_json(const json& j) {
  DecisionTree tree;
  for (const auto& n : j.at("nodes")) {
    DecisionTree::Node node;
    node.feature = n.at("f").get<int>();
    node.threshold = n.at("t").get<double>();
    node.left = n.at("l").get<int>();
    node.right = n.at("r").get<int>();
    node.value = n.at("v").get<double>();
    node.gain = n.at("g").get<double>();
    node.n_samples = n.at("n").get<std::int64_t>();
    tree.nodes.push_back(node);
  }
  if (tree.nodes.empty()) throw DataError("model file: empty tree");
  return tree;
}

}  // namespace

void save_model(const HybridModel& model, const std::string& path) {
  if (!model.schema) throw DataError("save_model: model has no schema");
  json doc;
  doc["format_version"] = 1;
  doc["task"] = to_string(model.task);
  doc["schema"] = {{"names", model.schema->names()},
                   {"hash", model.schema->hash()}};
  doc["base_score"] = model.base_score;
  doc["half_life_windows"] =
      std::isfinite(model.half_life_windows)
          ? json(model.half_life_windows)
          : json("inf");
  json common = json::array();
  for (const auto& wt : model.common) {
    common.push_back({{"weight", wt.weight}, {"tree", tree_to_json(wt.tree)}});
  }
  doc["common"] = common;
  json per_cell = json::object();
  for (const auto& [cell, trees] : model.per_cell) {
    json list = json::array();
    for (const auto& ot : trees) {
      list.push_back({{"weight", ot.weight},
                      {"birth_window", ot.birth_window},
                      {"tree", tree_to_json(ot.tree)}});
    }
    per_cell[cell] = list;
  }
  doc["per_cell"] = per_cell;
  json params;
  params["n_trees"] = model.params.n_trees;
  params["learning_rate"] = model.params.learning_rate;
  params["max_depth"] = model.params.max_depth;
  params["min_leaf"] = model.params.min_leaf;
  params["subsample"] = model.params.subsample;
  params["seed"] = model.params.seed;
  params["online_trees_per_update"] = model.params.online_trees_per_update;
  params["online_max_depth"] = model.params.online_max_depth;
  doc["params"] = params;

  std::ofstream out(path);
  if (!out) throw IoError("cannot write model file: " + path);
  out << doc.dump(2) << '\n';
  if (!out) throw IoError("model write failed: " + path);
}

HybridModel load_model(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open model file: " + path);
  json doc = json::parse(in, nullptr, /*allow_exceptions=*/false);
  if (doc.is_discarded()) throw DataError("model file: invalid JSON");
  if (!doc.contains("format_version") || doc["format_version"].get<int>() != 1) {
    throw SchemaError("model file: unsupported format version");
  }
  HybridModel model;
  const std::string task = doc.at("task").get<std::string>();
  if (task == "classification") {
    model.task = Task::kClassification;
  } else if (task == "regression") {
    model.task = Task::kRegression;
  } else {
    throw DataError("model file: unknown task " + task);
  }
  const auto names = doc.at("schema").at("names").get<std::vector<std::string>>();
  model.schema = std::make_shared<FeatureSchema>(names);
  const auto stored_hash = doc.at("schema").at("hash").get<std::uint64_t>();
  if (stored_hash != model.schema->hash()) {
    throw SchemaError("model file: schema hash mismatch");
  }
  model.base_score = doc.at("base_score").get<double>();
  if (doc.at("half_life_windows").is_string()) {
    model.half_life_windows = std::numeric_limits<double>::infinity();
  } else {
    model.half_life_windows = doc.at("half_life_windows").get<double>();
  }
  for (const auto& wt : doc.at("common")) {
    model.common.push_back(
        {tree_from_json(wt.at("tree")), wt.at("weight").get<double>()});
  }
  for (const auto& [cell, list] : doc.at("per_cell").items()) {
    auto& trees = model.per_cell[cell];
    for (const auto& ot : list) {
      trees.push_back({tree_from_json(ot.at("tree")),
                       ot.at("weight").get<double>(),
                       ot.at("birth_window").get<std::int64_t>()});
    }
  }
  const auto& params = doc.at("params");
  model.params.task = model.task;
  model.params.n_trees = params.at("n_trees").get<int>();
  model.params.learning_rate = params.at("learning_rate").get<double>();
  model.params.max_depth = params.at("max_depth").get<int>();
  model.params.min_leaf = params.at("min_leaf").get<int>();
  model.params.subsample = params.at("subsample").get<double>();
  model.params.seed = params.at("seed").get<std::uint64_t>();
  model.params.online_trees_per_update =
      params.at("online_trees_per_update").get<int>();
  model.params.online_max_depth = params.at("online_max_depth").get<int>();
  model.params.half_life_windows = model.half_life_windows;
  return model;
}

}  // namespace ranperf
