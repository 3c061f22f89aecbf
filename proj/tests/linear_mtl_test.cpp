#include "ranperf/linear_mtl.hpp"

#include <gtest/gtest.h>

#include <cmath>

#include "oracle/ols.hpp"
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

TEST(LinearMtl, LambdaZeroSingleCellMatchesOlsOracle) {
  // 5x3 consistent-ish system; effective weights must match closed form.
  const std::vector<std::vector<double>> x = {{1.0, 0.2, -0.5},
                                              {0.3, -1.1, 0.8},
                                              {-0.7, 0.5, 0.1},
                                              {1.2, 0.9, -0.3},
                                              {-0.2, -0.4, 1.5}};
  const std::vector<double> y = {1.1, -0.4, 0.2, 1.9, -0.8};

  std::map<std::string, Dataset> per_cell;
  per_cell["c"] = make_dataset({"a", "b", "c"}, x, y);
  const auto fit = fit_linear_mtl(per_cell, 0.0, MtlLoss::kSquared);
  EXPECT_TRUE(fit.converged);

  const auto expected = oracle::ols_closed_form(x, y);
  const Eigen::VectorXd w = fit.model.effective_weights("c");
  ASSERT_EQ(w.size(), 3);
  for (int j = 0; j < 3; ++j) {
    EXPECT_NEAR(w(j), expected[j], 1e-6);
  }
}

TEST(LinearMtl, LargeLambdaZeroesEverythingExactly) {
  CounterRng rng(5);
  std::map<std::string, Dataset> per_cell;
  for (int c = 0; c < 3; ++c) {
    std::vector<std::vector<double>> x;
    std::vector<double> y;
    for (int i = 0; i < 30; ++i) {
      x.push_back({rng.normal(), rng.normal()});
      y.push_back(rng.normal());
    }
    per_cell["c" + std::to_string(c)] = make_dataset({"a", "b"}, x, y);
  }
  // Gradient of the smooth part at zero: sum over rows of -y * x per block.
  double max_grad = 0.0;
  for (const auto& [key, ds] : per_cell) {
    double g0 = 0.0, g1 = 0.0;
    for (std::size_t i = 0; i < ds.rows(); ++i) {
      g0 += -ds.y[i] * ds.row(i)[0];
      g1 += -ds.y[i] * ds.row(i)[1];
    }
    max_grad = std::max({max_grad, std::abs(g0), std::abs(g1)});
  }
  const auto fit =
      fit_linear_mtl(per_cell, 10.0 * max_grad * per_cell.size(), MtlLoss::kSquared);
  EXPECT_EQ(fit.model.w_common.lpNorm<1>(), 0.0);
  for (const auto& [key, w] : fit.model.w_specific) {
    EXPECT_EQ(w.lpNorm<1>(), 0.0);
  }
}

TEST(LinearMtl, ObjectiveMonotoneNonIncreasing) {
  CounterRng rng(9);
  std::map<std::string, Dataset> per_cell;
  for (int c = 0; c < 4; ++c) {
    std::vector<std::vector<double>> x;
    std::vector<double> y;
    for (int i = 0; i < 40; ++i) {
      const double a = rng.normal(), b = rng.normal();
      x.push_back({a, b});
      y.push_back(1.5 * a - 0.5 * b + 0.2 * c + rng.normal(0.0, 0.2));
    }
    per_cell["c" + std::to_string(c)] = make_dataset({"a", "b"}, x, y);
  }
  const auto fit = fit_linear_mtl(per_cell, 0.5, MtlLoss::kSquared);
  ASSERT_GT(fit.objective_trace.size(), 2u);
  for (std::size_t i = 1; i < fit.objective_trace.size(); ++i) {
    EXPECT_LE(fit.objective_trace[i], fit.objective_trace[i - 1] + 1e-9);
  }
}

TEST(LinearMtl, SharedDistributionShrinksSpecificWeights) {
  // All cells drawn from one linear model: the l1 penalty should push the
  // per-cell deltas to a small fraction of the common weight mass.
  CounterRng rng(17);
  std::map<std::string, Dataset> per_cell;
  for (int c = 0; c < 5; ++c) {
    std::vector<std::vector<double>> x;
    std::vector<double> y;
    for (int i = 0; i < 60; ++i) {
      const double a = rng.normal(), b = rng.normal(), d = rng.normal();
      x.push_back({a, b, d});
      y.push_back(2.0 * a - 1.0 * b + 0.5 * d + rng.normal(0.0, 0.1));
    }
    per_cell["c" + std::to_string(c)] = make_dataset({"a", "b", "d"}, x, y);
  }
  const auto fit = fit_linear_mtl(per_cell, /*lambda_common=*/0.05,
                                  /*lambda_specific=*/5.0, MtlLoss::kSquared);
  double specific_mass = 0.0;
  for (const auto& [key, w] : fit.model.w_specific) {
    specific_mass += w.lpNorm<1>();
  }
  const double common_mass = fit.model.w_common.lpNorm<1>();
  ASSERT_GT(common_mass, 1.0);
  EXPECT_LT(specific_mass, 0.1 * common_mass);
}

TEST(LinearMtl, LogisticLossSeparatesAndDescends) {
  CounterRng rng(23);
  std::map<std::string, Dataset> per_cell;
  std::vector<std::vector<double>> x;
  std::vector<double> y;
  for (int i = 0; i < 200; ++i) {
    const double a = rng.normal();
    x.push_back({a});
    y.push_back(a > 0.0 ? 1.0 : 0.0);
  }
  per_cell["c"] = make_dataset({"a"}, x, y);
  const auto fit = fit_linear_mtl(per_cell, 0.01, MtlLoss::kLogistic);
  EXPECT_GT(fit.model.effective_weights("c")(0), 0.5);
  for (std::size_t i = 1; i < fit.objective_trace.size(); ++i) {
    EXPECT_LE(fit.objective_trace[i], fit.objective_trace[i - 1] + 1e-9);
  }
}

TEST(LinearMtl, InputValidation) {
  EXPECT_THROW(fit_linear_mtl({}, 0.1, MtlLoss::kSquared), DataError);

  std::map<std::string, Dataset> bad;
  bad["c"] = make_dataset({"a"}, {{std::nan("")}}, {1.0});
  EXPECT_THROW(fit_linear_mtl(bad, 0.1, MtlLoss::kSquared), DataError);

  std::map<std::string, Dataset> mismatched;
  mismatched["c1"] = make_dataset({"a"}, {{1.0}}, {1.0});
  mismatched["c2"] = make_dataset({"a", "b"}, {{1.0, 2.0}}, {1.0});
  EXPECT_THROW(fit_linear_mtl(mismatched, 0.1, MtlLoss::kSquared), SchemaError);

  std::map<std::string, Dataset> ok;
  ok["c"] = make_dataset({"a"}, {{1.0}}, {1.0});
  EXPECT_THROW(fit_linear_mtl(ok, -1.0, MtlLoss::kSquared), DataError);
}

}  // namespace
}  // namespace ranperf
