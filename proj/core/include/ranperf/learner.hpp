#pragma once

#include <cstdint>
#include <limits>
#include <map>
#include <string>
#include <vector>

#include "ranperf/features.hpp"

namespace ranperf {

enum class Task { kClassification, kRegression };

const char* to_string(Task task);

/// Binary decision tree. Internal nodes route x[feature] < threshold to the
/// left child; leaves carry the prediction value (class probability for a
/// standalone classification tree, additive score contribution inside an
/// ensemble).
class DecisionTree {
 public:
  struct Node {
    int feature = -1;  // -1 marks a leaf
    double threshold = 0.0;
    int left = -1;
    int right = -1;
    double value = 0.0;
    double gain = 0.0;  // impurity reduction at this split (importance unit)
    std::int64_t n_samples = 0;
  };

  std::vector<Node> nodes;  // nodes[0] is the root

  double predict(const double* row) const;
  int depth() const;
  bool is_leaf_only() const { return nodes.size() == 1; }

  /// Total impurity reduction attributed to each feature.
  void accumulate_importance(std::vector<double>& by_feature, double weight) const;
};

struct TreeParams {
  Task task = Task::kClassification;
  int max_depth = 5;
  int min_leaf = 1;
  int max_thresholds = 64;  // candidate-threshold cap per feature (quantiles)
};

/// Greedy top-down induction: Gini impurity for classification, variance
/// reduction for regression, candidate thresholds at midpoints of sorted
/// unique values. Tie-breaking is order-independent (lowest feature index,
/// then lowest threshold), so permuting rows yields an identical tree.
DecisionTree fit_tree(const Dataset& data, const TreeParams& params);

struct GbtParams {
  Task task = Task::kClassification;
  int n_trees = 30;
  double learning_rate = 0.1;
  int max_depth = 5;
  int min_leaf = 5;
  double subsample = 0.8;  // stochastic boosting fraction per tree
  std::uint64_t seed = 7;

  double half_life_windows = std::numeric_limits<double>::infinity();
  int online_trees_per_update = 1;
  int online_max_depth = 3;
};

/// Shared offline ensemble plus per-cell online deltas. The common part is
/// fit once per group and reused; online trees are appended per cell as new
/// minibatches arrive and their weights decay with age, favouring the
/// freshest models. Models are immutable values: updates return a new model.
struct HybridModel {
  struct WeightedTree {
    DecisionTree tree;
    double weight = 1.0;
  };
  struct OnlineTree {
    DecisionTree tree;
    double weight = 1.0;
    std::int64_t birth_window = 0;
  };

  Task task = Task::kClassification;
  FeatureSchemaPtr schema;
  double base_score = 0.0;
  std::vector<WeightedTree> common;
  std::map<std::string, std::vector<OnlineTree>> per_cell;  // CellId::key()
  double half_life_windows = std::numeric_limits<double>::infinity();
  GbtParams params;

  /// Additive ensemble score: common trees plus the cell's online trees,
  /// the latter decayed by 2^(-age / half_life). Unknown cells use the
  /// common part alone (the bootstrap path for cells joining a group).
  double raw_score(const std::string& cell_key, const double* row,
                   std::int64_t now_window) const;

  /// Probability for classification (logistic of the raw score), raw score
  /// for regression.
  double predict(const std::string& cell_key, const double* row,
                 std::int64_t now_window) const;
};

/// Gradient boosting over the pooled group data (squared-error gradients
/// for regression, logistic for classification; leaf values by Newton step).
HybridModel fit_offline(const Dataset& pooled, const GbtParams& params);

/// Convenience pool-and-fit over per-cell datasets (schemas must match).
HybridModel fit_offline(const std::map<std::string, Dataset>& per_cell,
                        const GbtParams& params);

/// Appends `params.online_trees_per_update` trees fit on the residuals of
/// the current prediction for this cell over the minibatch. Never touches
/// the common part; cost depends only on the minibatch size.
HybridModel update_online(const HybridModel& model, const std::string& cell_key,
                          const Dataset& minibatch, std::int64_t now_window);

/// Mean training loss of the model on a dataset (logistic loss or MSE).
double mean_loss(const HybridModel& model, const std::string& cell_key,
                 const Dataset& data, std::int64_t now_window);

struct EvalMetrics {
  double accuracy = 0.0;           // classification only
  double balanced_accuracy = 0.0;  // mean of per-class recalls
  double rmse = 0.0;               // regression only
  std::size_t n = 0;
};

EvalMetrics evaluate(const HybridModel& model, const std::string& cell_key,
                     const Dataset& data, std::int64_t now_window);

/// Normalized split-importance per schema feature (sums to 1 when any split
/// exists). Includes common and all per-cell trees.
std::vector<double> feature_importances(const HybridModel& model);

/// Versioned self-describing model file (JSON). Loading verifies the format
/// version and the stored schema hash; mismatches raise SchemaError.
void save_model(const HybridModel& model, const std::string& path);
HybridModel load_model(const std::string& path);

}  // namespace ranperf
