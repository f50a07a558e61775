#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <vector>

#include "mabrl/error.hpp"
#include "mabrl/extratrees.hpp"
#include "mabrl/rng.hpp"

using namespace mabrl;

namespace {

struct Data {
  RowMatrix x;
  std::vector<double> y;
};

Data make_data(std::size_t n, std::size_t dim, std::uint64_t seed,
              double (*f)(std::span<const double>)) {
  Rng rng(seed);
  Data d{RowMatrix(n, dim), {}};
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < dim; ++j) d.x(i, j) = uniform01(rng);
    d.y.push_back(f(d.x.row(i)));
  }
  return d;
}

double first(std::span<const double> r) { return r[0]; }
double bumpy(std::span<const double> r) { return std::sin(6.0 * r[0]) + r[1] * r[1] - 0.3 * r[2]; }

}  // namespace

TEST(ExtraTrees, ConstantTargetsGiveSingleLeaf) {
  Data d = make_data(200, 3, 1, first);
  std::fill(d.y.begin(), d.y.end(), 2.5);
  const Forest f = fit_forest(d.x, d.y, {5, 0, 2}, 1);
  for (const auto& t : f.trees) {
    ASSERT_EQ(t.nodes.size(), 1u);
    EXPECT_EQ(t.nodes[0].value, 2.5);
  }
  EXPECT_EQ(predict_forest(f, d.x.row(7)), 2.5);
}

TEST(ExtraTrees, MinSamplesAboveSizeGivesMean) {
  const Data d = make_data(20, 2, 2, first);
  const Forest f = fit_forest(d.x, d.y, {3, 0, 21}, 1);
  double mean = 0.0;
  for (double v : d.y) mean += v;
  mean /= 20.0;
  for (const auto& t : f.trees) EXPECT_EQ(t.nodes.size(), 1u);
  EXPECT_NEAR(predict_forest(f, d.x.row(0)), mean, 1e-12);
}

TEST(ExtraTrees, LearnsIdentityOfFirstFeature) {
  const Data train = make_data(2000, 3, 3, first);
  const Data test = make_data(500, 3, 4, first);
  const Forest f = fit_forest(train.x, train.y, {50, 0, 5}, 5);
  double sse = 0.0;
  for (std::size_t i = 0; i < test.y.size(); ++i) {
    const double e = predict_forest(f, test.x.row(i)) - test.y[i];
    sse += e * e;
  }
  EXPECT_LT(std::sqrt(sse / static_cast<double>(test.y.size())), 0.05);
}

TEST(ExtraTrees, PredictionsStayInTargetRange) {
  const Data d = make_data(300, 3, 6, bumpy);
  const Forest f = fit_forest(d.x, d.y, {10, 2, 3}, 7);
  const double lo = *std::min_element(d.y.begin(), d.y.end());
  const double hi = *std::max_element(d.y.begin(), d.y.end());
  Rng rng(8);
  for (int k = 0; k < 10000; ++k) {
    const std::vector<double> p{uniform(rng, -1.0, 2.0), uniform(rng, -1.0, 2.0), uniform(rng, -1.0, 2.0)};
    const double v = predict_forest(f, p);
    EXPECT_GE(v, lo);
    EXPECT_LE(v, hi);
  }
}

TEST(ExtraTrees, DuplicatedRowsAreNotSplit) {
  Data d = make_data(1, 3, 9, bumpy);
  const std::vector<double> row(d.x.row(0).begin(), d.x.row(0).end());
  for (int i = 0; i < 30; ++i) {
    d.x.push_row(row);
    d.y.push_back(i % 2 ? 1.0 : -1.0);
  }
  const Forest f = fit_forest(d.x, d.y, {4, 0, 2}, 10);
  for (const auto& t : f.trees) EXPECT_EQ(t.nodes.size(), 1u);
}

TEST(ExtraTrees, CutsAreStrictAndChildrenNonEmpty) {
  const Data d = make_data(500, 4, 11, bumpy);
  const Forest f = fit_forest(d.x, d.y, {5, 2, 4}, 12);
  for (const auto& t : f.trees) {
    std::vector<std::size_t> visits(t.nodes.size(), 0);
    for (std::size_t i = 0; i < d.y.size(); ++i) {
      const auto row = d.x.row(i);
      std::size_t n = 0;
      ++visits[n];
      while (!t.nodes[n].is_leaf()) {
        const auto& node = t.nodes[n];
        n = static_cast<std::size_t>(node.left) + (row[static_cast<std::size_t>(node.feature)] < node.value ? 0 : 1);
        ++visits[n];
      }
    }
    for (std::size_t n = 0; n < t.nodes.size(); ++n) {
      EXPECT_GT(visits[n], 0u) << "empty node " << n;
      if (!t.nodes[n].is_leaf()) EXPECT_GE(visits[n], 4u);
    }
  }
}

TEST(ExtraTrees, FullyGrownTreeInterpolatesTraining) {
  const Data d = make_data(300, 3, 13, bumpy);
  const Forest f = fit_forest(d.x, d.y, {1, 0, 2}, 14);
  for (std::size_t i = 0; i < d.y.size(); ++i) {
    EXPECT_NEAR(predict_forest(f, d.x.row(i)), d.y[i], 1e-12);
  }
  EXPECT_EQ(f.trees[0].leaf_count(), d.y.size());
}

TEST(ExtraTrees, DeterministicAndSerializable) {
  const Data d = make_data(400, 3, 15, bumpy);
  const Forest a = fit_forest(d.x, d.y, {6, 2, 5}, 16);
  EXPECT_EQ(a, fit_forest(d.x, d.y, {6, 2, 5}, 16));
  EXPECT_FALSE(a == fit_forest(d.x, d.y, {6, 2, 5}, 17));

  const auto path = std::filesystem::temp_directory_path() / "mabrl_unit_forest.json";
  save_forest(a, path);
  const Forest b = load_forest(path);
  EXPECT_EQ(a, b);
  EXPECT_EQ(b.params.tree_count, 6u);
  EXPECT_EQ(predict_forest(a, d.x.row(3)), predict_forest(b, d.x.row(3)));
  EXPECT_THROW(load_forest(path.string() + ".missing"), FormatError);
}

TEST(ExtraTrees, Errors) {
  const Data d = make_data(10, 3, 18, first);
  EXPECT_THROW(fit_forest(d.x, d.y, {0, 0, 2}, 1), InvalidArgument);
  EXPECT_THROW(fit_forest(d.x, d.y, {1, 4, 2}, 1), InvalidArgument);
  EXPECT_THROW(fit_forest(d.x, d.y, {1, 0, 1}, 1), InvalidArgument);
  EXPECT_THROW(fit_forest(RowMatrix{}, std::vector<double>{}, {1, 0, 2}, 1), InvalidArgument);
  const std::vector<double> short_y(9, 0.0);
  EXPECT_THROW(fit_forest(d.x, short_y, {1, 0, 2}, 1), InvalidArgument);
  const Forest f = fit_forest(d.x, d.y, {1, 0, 2}, 1);
  const std::vector<double> wrong(2, 0.0);
  EXPECT_THROW(predict_forest(f, wrong), InvalidArgument);
}
