#include "ranperf/learner.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <numeric>

#include "ranperf/errors.hpp"
#include "ranperf/rng.hpp"

namespace ranperf {
namespace {

Dataset make_dataset(const std::vector<std::string>& names,
                     const std::vector<std::vector<double>>& rows,
                     const std::vector<double>& labels) {
  Dataset ds;
  ds.schema = std::make_shared<FeatureSchema>(names);
  for (std::size_t i = 0; i < rows.size(); ++i) ds.push_row(rows[i], labels[i]);
  return ds;
}

TEST(FitTree, PureLabelsGiveSingleLeaf) {
  const auto ds = make_dataset({"x"}, {{1.0}, {2.0}, {3.0}}, {1.0, 1.0, 1.0});
  TreeParams params;
  const auto tree = fit_tree(ds, params);
  ASSERT_TRUE(tree.is_leaf_only());
  EXPECT_DOUBLE_EQ(tree.nodes[0].value, 1.0);
}

TEST(FitTree, PerfectSplitAtFive) {
  const auto ds = make_dataset({"x"}, {{4.0}, {4.5}, {5.5}, {6.0}},
                               {0.0, 0.0, 1.0, 1.0});
  TreeParams params;
  const auto tree = fit_tree(ds, params);
  ASSERT_FALSE(tree.is_leaf_only());
  EXPECT_EQ(tree.nodes[0].feature, 0);
  EXPECT_DOUBLE_EQ(tree.nodes[0].threshold, 5.0);
  EXPECT_DOUBLE_EQ(tree.predict(ds.row(0)), 0.0);
  EXPECT_DOUBLE_EQ(tree.predict(ds.row(3)), 1.0);
}

TEST(FitTree, RecoversPlantedThreshold) {
  // Bernoulli drops with a logistic ramp below -130 dBm; the root split
  // should land within 2 dBm of the planted threshold on 10^4 rows.
  CounterRng rng(13);
  std::vector<std::vector<double>> rows;
  std::vector<double> labels;
  for (int i = 0; i < 10000; ++i) {
    const double rsrp = -150.0 + 60.0 * rng.next_double();
    const double noise = rng.normal(0.0, 5.0);
    const double p = 0.9 / (1.0 + std::exp((rsrp + 130.0) / 2.0)) + 0.02;
    rows.push_back({rsrp, noise});
    labels.push_back(rng.next_double() < p ? 1.0 : 0.0);
  }
  const auto ds = make_dataset({"rsrp", "noise"}, rows, labels);
  TreeParams params;
  params.max_depth = 3;
  params.min_leaf = 50;
  const auto tree = fit_tree(ds, params);
  ASSERT_FALSE(tree.is_leaf_only());
  EXPECT_EQ(tree.nodes[0].feature, 0);
  EXPECT_NEAR(tree.nodes[0].threshold, -130.0, 2.0);
}

TEST(FitTree, RowPermutationYieldsIdenticalTree) {
  CounterRng rng(31);
  std::vector<std::vector<double>> rows;
  std::vector<double> labels;
  for (int i = 0; i < 400; ++i) {
    rows.push_back({rng.normal(), rng.normal(), rng.normal()});
    labels.push_back(rng.next_double() < 0.4 ? 1.0 : 0.0);
  }
  const auto ds = make_dataset({"a", "b", "c"}, rows, labels);

  // Deterministic permutation: reverse plus a rotation.
  std::vector<std::vector<double>> shuffled_rows;
  std::vector<double> shuffled_labels;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const std::size_t j = (rows.size() - 1 - i + 137) % rows.size();
    shuffled_rows.push_back(rows[j]);
    shuffled_labels.push_back(labels[j]);
  }
  const auto shuffled = make_dataset({"a", "b", "c"}, shuffled_rows,
                                     shuffled_labels);

  TreeParams params;
  params.max_depth = 4;
  params.min_leaf = 5;
  const auto t1 = fit_tree(ds, params);
  const auto t2 = fit_tree(shuffled, params);
  ASSERT_EQ(t1.nodes.size(), t2.nodes.size());
  for (std::size_t i = 0; i < t1.nodes.size(); ++i) {
    EXPECT_EQ(t1.nodes[i].feature, t2.nodes[i].feature);
    EXPECT_DOUBLE_EQ(t1.nodes[i].threshold, t2.nodes[i].threshold);
    EXPECT_DOUBLE_EQ(t1.nodes[i].value, t2.nodes[i].value);
    EXPECT_EQ(t1.nodes[i].n_samples, t2.nodes[i].n_samples);
  }
}

TEST(FitTree, ErrorsOnEmptyData) {
  Dataset empty;
  empty.schema = std::make_shared<FeatureSchema>(std::vector<std::string>{"x"});
  EXPECT_THROW(fit_tree(empty, TreeParams{}), DataError);
}

TEST(FitOffline, SingleTreeUnitRateOnConstantLabels) {
  const auto ds = make_dataset({"x"}, {{1.0}, {2.0}, {3.0}}, {4.0, 4.0, 4.0});
  GbtParams params;
  params.task = Task::kRegression;
  params.n_trees = 1;
  params.learning_rate = 1.0;
  params.subsample = 1.0;
  params.min_leaf = 1;
  const auto model = fit_offline(ds, params);
  ASSERT_EQ(model.common.size(), 1u);
  EXPECT_TRUE(model.common[0].tree.is_leaf_only());
  EXPECT_DOUBLE_EQ(model.common[0].tree.nodes[0].value, 4.0);
  EXPECT_DOUBLE_EQ(model.predict("any", ds.row(0), 0), 4.0);
}

TEST(FitOffline, TrainingLossMonotoneInTreeCount) {
  CounterRng rng(41);
  std::vector<std::vector<double>> rows;
  std::vector<double> y_reg, y_cls;
  for (int i = 0; i < 300; ++i) {
    const double a = rng.normal(), b = rng.normal();
    rows.push_back({a, b});
    y_reg.push_back(2.0 * a - b + rng.normal(0.0, 0.3));
    y_cls.push_back(a + 0.5 * b + rng.normal(0.0, 0.5) > 0 ? 1.0 : 0.0);
  }
  for (const Task task : {Task::kRegression, Task::kClassification}) {
    const auto ds = make_dataset({"a", "b"}, rows,
                                 task == Task::kRegression ? y_reg : y_cls);
    GbtParams params;
    params.task = task;
    params.n_trees = 12;
    params.subsample = 1.0;
    params.min_leaf = 5;
    const auto model = fit_offline(ds, params);
    double prev = std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k <= model.common.size(); ++k) {
      HybridModel truncated = model;
      truncated.common.assign(model.common.begin(), model.common.begin() + k);
      const double loss = mean_loss(truncated, "", ds, 0);
      EXPECT_LE(loss, prev + 1e-9) << "at " << k << " trees, task "
                                   << to_string(task);
      prev = loss;
    }
  }
}

TEST(FitOffline, PoolsPerCellDataAndChecksSchemas) {
  std::map<std::string, Dataset> per_cell;
  per_cell["a"] = make_dataset({"x"}, {{1.0}, {2.0}}, {0.0, 1.0});
  per_cell["b"] = make_dataset({"y"}, {{1.0}, {2.0}}, {0.0, 1.0});
  EXPECT_THROW(fit_offline(per_cell, GbtParams{}), SchemaError);
  EXPECT_THROW(fit_offline(std::map<std::string, Dataset>{}, GbtParams{}),
               DataError);
}

TEST(UpdateOnline, ZeroResidualsAppendZeroLeaf) {
  const auto ds = make_dataset({"x"}, {{1.0}, {2.0}}, {3.0, 3.0});
  GbtParams params;
  params.task = Task::kRegression;
  params.n_trees = 1;
  params.learning_rate = 1.0;
  params.subsample = 1.0;
  params.min_leaf = 1;
  const auto model = fit_offline(ds, params);
  const auto updated = update_online(model, "cell", ds, 1);
  const auto& online = updated.per_cell.at("cell");
  ASSERT_EQ(online.size(), 1u);
  EXPECT_TRUE(online[0].tree.is_leaf_only());
  EXPECT_NEAR(online[0].tree.nodes[0].value, 0.0, 1e-12);
  for (std::size_t i = 0; i < ds.rows(); ++i) {
    EXPECT_NEAR(updated.predict("cell", ds.row(i), 1),
                model.predict("cell", ds.row(i), 1), 1e-12);
  }
}

TEST(UpdateOnline, ReducesMinibatchLossAndLeavesCommonAlone) {
  CounterRng rng(51);
  std::vector<std::vector<double>> rows;
  std::vector<double> labels;
  for (int i = 0; i < 200; ++i) {
    const double a = rng.normal();
    rows.push_back({a});
    labels.push_back(3.0 * a + rng.normal(0.0, 0.1));
  }
  const auto base = make_dataset({"a"}, rows, labels);
  GbtParams params;
  params.task = Task::kRegression;
  params.n_trees = 5;
  params.subsample = 1.0;
  const auto model = fit_offline(base, params);

  // A shifted minibatch the common model has never seen.
  std::vector<std::vector<double>> shifted_rows;
  std::vector<double> shifted_labels;
  for (int i = 0; i < 100; ++i) {
    const double a = rng.normal();
    shifted_rows.push_back({a});
    shifted_labels.push_back(3.0 * a + 5.0);
  }
  const auto minibatch = make_dataset({"a"}, shifted_rows, shifted_labels);

  const double before = mean_loss(model, "cell", minibatch, 1);
  const auto updated = update_online(model, "cell", minibatch, 1);
  const double after = mean_loss(updated, "cell", minibatch, 1);
  EXPECT_LE(after, before);

  ASSERT_EQ(updated.common.size(), model.common.size());
  for (std::size_t t = 0; t < model.common.size(); ++t) {
    EXPECT_EQ(updated.common[t].tree.nodes.size(),
              model.common[t].tree.nodes.size());
  }
}

TEST(UpdateOnline, PerCellIsolation) {
  const auto ds = make_dataset({"x"}, {{0.0}, {1.0}, {2.0}, {3.0}},
                               {0.0, 0.0, 1.0, 1.0});
  GbtParams params;
  params.task = Task::kClassification;
  params.n_trees = 3;
  params.subsample = 1.0;
  const auto model = fit_offline(ds, params);
  const auto updated = update_online(model, "c1", ds, 2);

  const double x[1] = {1.5};
  EXPECT_NE(updated.predict("c1", x, 2), model.predict("c1", x, 2));
  // Other cells and unknown cells see exactly the common-only prediction.
  EXPECT_DOUBLE_EQ(updated.predict("c2", x, 2), model.predict("c2", x, 2));
  EXPECT_DOUBLE_EQ(updated.predict("unknown", x, 2),
                   updated.predict("another-unknown", x, 2));
}

TEST(UpdateOnline, SchemaMismatchAndEmptyBatchErrors) {
  const auto ds = make_dataset({"x"}, {{1.0}, {2.0}}, {0.0, 1.0});
  GbtParams params;
  params.subsample = 1.0;
  const auto model = fit_offline(ds, params);
  const auto other = make_dataset({"y"}, {{1.0}}, {0.0});
  EXPECT_THROW(update_online(model, "c", other, 1), SchemaError);
  Dataset empty;
  empty.schema = ds.schema;
  EXPECT_THROW(update_online(model, "c", empty, 1), DataError);
}

TEST(Predict, StalenessDecayHalvesPerHalfLife) {
  // One online tree with value 1.0; common empty. Decayed contribution is
  // 2^(-age/half_life) on the raw score.
  HybridModel model;
  model.task = Task::kRegression;
  model.schema = std::make_shared<FeatureSchema>(std::vector<std::string>{"x"});
  model.half_life_windows = 2.0;
  DecisionTree leaf;
  leaf.nodes.push_back({-1, 0.0, -1, -1, 1.0, 0.0, 1});
  model.per_cell["c"].push_back({leaf, 1.0, 0});

  const double x[1] = {0.0};
  EXPECT_DOUBLE_EQ(model.predict("c", x, 0), 1.0);
  EXPECT_DOUBLE_EQ(model.predict("c", x, 2), 0.5);
  EXPECT_DOUBLE_EQ(model.predict("c", x, 4), 0.25);

  model.half_life_windows = std::numeric_limits<double>::infinity();
  EXPECT_DOUBLE_EQ(model.predict("c", x, 100), 1.0);
}

TEST(Boosting, LogisticGradientMatchesFiniteDifferences) {
  // d/dz of the logistic loss at random points, against central differences.
  CounterRng rng(61);
  for (int i = 0; i < 10; ++i) {
    const double z = rng.normal(0.0, 2.0);
    const double y = rng.next_double() < 0.5 ? 0.0 : 1.0;
    const auto loss = [y](double score) {
      return (score > 0 ? score : 0.0) - y * score +
             std::log1p(std::exp(-std::abs(score)));
    };
    const double analytic = 1.0 / (1.0 + std::exp(-z)) - y;
    const double h = 1e-6;
    const double numeric = (loss(z + h) - loss(z - h)) / (2.0 * h);
    EXPECT_NEAR(analytic, numeric, 1e-5 * std::max(1.0, std::abs(analytic)));
  }
}

TEST(Importances, SumToOneAndFollowSplits) {
  CounterRng rng(71);
  std::vector<std::vector<double>> rows;
  std::vector<double> labels;
  for (int i = 0; i < 500; ++i) {
    const double a = rng.normal();
    const double b = rng.normal();
    rows.push_back({a, b});
    labels.push_back(a > 0.3 ? 1.0 : 0.0);  // depends on feature 0 only
  }
  const auto ds = make_dataset({"a", "b"}, rows, labels);
  GbtParams params;
  params.n_trees = 5;
  params.subsample = 1.0;
  const auto model = fit_offline(ds, params);
  const auto imp = feature_importances(model);
  ASSERT_EQ(imp.size(), 2u);
  EXPECT_NEAR(imp[0] + imp[1], 1.0, 1e-9);
  EXPECT_GT(imp[0], 0.9);
}

TEST(Serialization, RoundTripPreservesPredictions) {
  CounterRng rng(81);
  std::vector<std::vector<double>> rows;
  std::vector<double> labels;
  for (int i = 0; i < 200; ++i) {
    rows.push_back({rng.normal(), rng.normal()});
    labels.push_back(rng.next_double() < 0.3 ? 1.0 : 0.0);
  }
  const auto ds = make_dataset({"a", "b"}, rows, labels);
  GbtParams params;
  params.n_trees = 4;
  auto model = fit_offline(ds, params);
  model = update_online(model, "s/c1", ds, 3);
  model.half_life_windows = 4.0;

  const std::string path =
      (std::filesystem::temp_directory_path() / "ranperf_model_test.json")
          .string();
  save_model(model, path);
  const auto loaded = load_model(path);
  EXPECT_EQ(loaded.task, model.task);
  EXPECT_EQ(loaded.schema->hash(), model.schema->hash());
  EXPECT_EQ(loaded.half_life_windows, model.half_life_windows);
  for (int i = 0; i < 20; ++i) {
    const double x[2] = {rng.normal(), rng.normal()};
    EXPECT_DOUBLE_EQ(loaded.predict("s/c1", x, 5), model.predict("s/c1", x, 5));
    EXPECT_DOUBLE_EQ(loaded.predict("other", x, 5), model.predict("other", x, 5));
  }
  std::filesystem::remove(path);
}

TEST(Serialization, RejectsTamperedSchemaHash) {
  const auto ds = make_dataset({"a"}, {{1.0}, {2.0}}, {0.0, 1.0});
  GbtParams params;
  const auto model = fit_offline(ds, params);
  const std::string path =
      (std::filesystem::temp_directory_path() / "ranperf_model_tamper.json")
          .string();
  save_model(model, path);

  // Corrupt the stored hash, keeping valid JSON.
  std::ifstream in(path);
  std::string text((std::istreambuf_iterator<char>(in)),
                   std::istreambuf_iterator<char>());
  in.close();
  const auto pos = text.find("\"hash\":");
  ASSERT_NE(pos, std::string::npos);
  text[pos + 8] = text[pos + 8] == '1' ? '2' : '1';
  std::ofstream out(path);
  out << text;
  out.close();

  EXPECT_THROW(load_model(path), SchemaError);
  std::filesystem::remove(path);
}

TEST(Evaluate, BalancedAccuracyOnImbalancedLabels) {
  // Model that always predicts "no drop": accuracy 0.9 on 10% drops, but
  // balanced accuracy 0.5.
  HybridModel model;
  model.task = Task::kClassification;
  model.schema = std::make_shared<FeatureSchema>(std::vector<std::string>{"x"});
  model.base_score = -5.0;  // sigmoid ~ 0.007

  std::vector<std::vector<double>> rows;
  std::vector<double> labels;
  for (int i = 0; i < 100; ++i) {
    rows.push_back({0.0});
    labels.push_back(i < 10 ? 1.0 : 0.0);
  }
  const auto ds = make_dataset({"x"}, rows, labels);
  const auto metrics = evaluate(model, "c", ds, 0);
  EXPECT_DOUBLE_EQ(metrics.accuracy, 0.9);
  EXPECT_DOUBLE_EQ(metrics.balanced_accuracy, 0.5);
}

}  // namespace
}  // namespace ranperf
