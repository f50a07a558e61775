#include "mabrl/extratrees.hpp"

#include <algorithm>
#include <atomic>
#include <exception>
#include <fstream>
#include <limits>
#include <mutex>
#include <numeric>
#include <optional>
#include <string>
#include <thread>
#include <utility>

#include <nlohmann/json.hpp>

#include "mabrl/error.hpp"
#include "mabrl/rng.hpp"

namespace mabrl {

void ForestParams::validate(std::size_t feature_dim) const {
  if (tree_count < 1) throw InvalidArgument("forest needs at least one tree");
  if (features_per_split > feature_dim) {
    throw InvalidArgument("features_per_split exceeds the feature dimension");
  }
  if (min_samples_split < 2) throw InvalidArgument("min_samples_split must be at least 2");
}

double RegressionTree::predict(std::span<const double> row) const {
  std::size_t i = 0;
  while (!nodes[i].is_leaf()) {
    const auto& n = nodes[i];
    i = static_cast<std::size_t>(n.left) + (row[static_cast<std::size_t>(n.feature)] < n.value ? 0 : 1);
  }
  return nodes[i].value;
}

std::size_t RegressionTree::leaf_count() const {
  return static_cast<std::size_t>(
      std::count_if(nodes.begin(), nodes.end(), [](const TreeNode& n) { return n.is_leaf(); }));
}

namespace {

// Column-major copy of the training rows shared by all trees of one fit.
struct Columns {
  std::size_t n = 0;
  std::size_t dim = 0;
  std::vector<double> values;  // values[f * n + i]
};

// Each tree works on its own copy of the columns and targets, kept in node
// order: the samples of a node occupy one contiguous range in every array.
class TreeBuilder {
 public:
  TreeBuilder(const Columns& cols, std::span<const double> targets, std::size_t k,
              std::size_t n_min, std::uint64_t seed)
      : n_(cols.n), dim_(cols.dim), x_(cols.values), y_(targets.begin(), targets.end()),
        k_(k), n_min_(n_min), rng_(seed), lo_(cols.dim), hi_(cols.dim) {}

  RegressionTree build() {
    RegressionTree tree;
    tree.nodes.reserve(2 * n_ / std::max<std::size_t>(n_min_ / 2, 1) + 1);
    tree.nodes.emplace_back();
    struct Pending {
      std::size_t node, begin, end;
    };
    std::vector<Pending> stack{{0, 0, n_}};
    while (!stack.empty()) {
      const Pending p = stack.back();
      stack.pop_back();
      const auto split = choose_split(p.begin, p.end);
      if (!split) {
        tree.nodes[p.node] = TreeNode{-1, -1, leaf_value(p.begin, p.end)};
        continue;
      }
      const std::size_t mid = partition(p.begin, p.end, split->feature, split->cut);
      const auto left = static_cast<std::int32_t>(tree.nodes.size());
      tree.nodes[p.node] = TreeNode{static_cast<std::int32_t>(split->feature), left, split->cut};
      tree.nodes.emplace_back();
      tree.nodes.emplace_back();
      stack.push_back({static_cast<std::size_t>(left) + 1, mid, p.end});
      stack.push_back({static_cast<std::size_t>(left), p.begin, mid});
    }
    return tree;
  }

 private:
  struct Split {
    std::size_t feature;
    double cut;
  };

  const double* column(std::size_t f) const { return x_.data() + f * n_; }

  // Four independent accumulators keep the reductions from serializing.
  static std::pair<double, double> column_range(const double* col, std::size_t begin, std::size_t end) {
    double lo[4] = {col[begin], col[begin], col[begin], col[begin]};
    double hi[4] = {col[begin], col[begin], col[begin], col[begin]};
    std::size_t j = begin;
    for (; j + 4 <= end; j += 4) {
      for (int a = 0; a < 4; ++a) {
        lo[a] = col[j + a] < lo[a] ? col[j + a] : lo[a];
        hi[a] = col[j + a] > hi[a] ? col[j + a] : hi[a];
      }
    }
    for (; j < end; ++j) {
      lo[0] = std::min(lo[0], col[j]);
      hi[0] = std::max(hi[0], col[j]);
    }
    return {std::min(std::min(lo[0], lo[1]), std::min(lo[2], lo[3])),
            std::max(std::max(hi[0], hi[1]), std::max(hi[2], hi[3]))};
  }

  // Sum of centered targets and count of samples left of the cut.
  std::pair<double, std::size_t> left_moments(const double* col, std::size_t begin, std::size_t end,
                                              double cut, double y_mean) const {
    double sum[4] = {0.0, 0.0, 0.0, 0.0};
    std::size_t n[4] = {0, 0, 0, 0};
    std::size_t j = begin;
    for (; j + 4 <= end; j += 4) {
      for (int a = 0; a < 4; ++a) {
        const bool left = col[j + a] < cut;
        sum[a] += left ? y_[j + a] - y_mean : 0.0;
        n[a] += left ? 1 : 0;
      }
    }
    for (; j < end; ++j) {
      const bool left = col[j] < cut;
      sum[0] += left ? y_[j] - y_mean : 0.0;
      n[0] += left ? 1 : 0;
    }
    return {(sum[0] + sum[1]) + (sum[2] + sum[3]), n[0] + n[1] + n[2] + n[3]};
  }

  double leaf_value(std::size_t begin, std::size_t end) const {
    double sum = 0.0;
    double lo = std::numeric_limits<double>::infinity();
    double hi = -lo;
    for (std::size_t j = begin; j < end; ++j) {
      sum += y_[j];
      lo = std::min(lo, y_[j]);
      hi = std::max(hi, y_[j]);
    }
    return std::clamp(sum / static_cast<double>(end - begin), lo, hi);
  }

  // Moves samples with x[f] < cut to the front of [begin, end).
  std::size_t partition(std::size_t begin, std::size_t end, std::size_t f, double cut) {
    const double* key = column(f);
    std::size_t i = begin;
    std::size_t j = end;
    while (true) {
      while (i < j && key[i] < cut) ++i;
      while (i < j && !(key[j - 1] < cut)) --j;
      if (i >= j) break;
      --j;
      for (std::size_t g = 0; g < dim_; ++g) std::swap(x_[g * n_ + i], x_[g * n_ + j]);
      std::swap(y_[i], y_[j]);
      ++i;
    }
    return i;
  }

  std::optional<Split> choose_split(std::size_t begin, std::size_t end) {
    const std::size_t count = end - begin;
    if (count < n_min_) return std::nullopt;

    double y_lo = y_[begin];
    double y_hi = y_lo;
    double y_sum = 0.0;
    for (std::size_t j = begin; j < end; ++j) {
      y_lo = std::min(y_lo, y_[j]);
      y_hi = std::max(y_hi, y_[j]);
      y_sum += y_[j];
    }
    if (y_lo == y_hi) return std::nullopt;
    const double y_mean = y_sum / static_cast<double>(count);

    candidates_.clear();
    for (std::size_t f = 0; f < dim_; ++f) {
      const auto [lo, hi] = column_range(column(f), begin, end);
      lo_[f] = lo;
      hi_[f] = hi;
      if (lo < hi) candidates_.push_back(f);
    }
    if (candidates_.empty()) return std::nullopt;

    // Partial Fisher-Yates draw of K features, then scored in index order so
    // ties resolve to the lowest feature index.
    const std::size_t k = std::min(k_, candidates_.size());
    for (std::size_t i = 0; i < k; ++i) {
      const std::size_t j = i + static_cast<std::size_t>(rng_() % (candidates_.size() - i));
      std::swap(candidates_[i], candidates_[j]);
    }
    std::sort(candidates_.begin(), candidates_.begin() + static_cast<std::ptrdiff_t>(k));

    std::optional<Split> best;
    double best_score = -std::numeric_limits<double>::infinity();
    for (std::size_t c = 0; c < k; ++c) {
      const std::size_t f = candidates_[c];
      double cut = uniform(rng_, lo_[f], hi_[f]);
      if (!(cut > lo_[f] && cut < hi_[f])) cut = 0.5 * (lo_[f] + hi_[f]);
      if (!(cut > lo_[f] && cut < hi_[f])) cut = hi_[f];  // adjacent doubles
      const double* col = column(f);
      const auto [left_sum, left_n] = left_moments(col, begin, end, cut, y_mean);
      const std::size_t right_n = count - left_n;
      if (left_n == 0 || right_n == 0) continue;
      // Centered sums: sum_r = -sum_l, so the reduction is sum_l^2 (1/n_l + 1/n_r).
      const double score = left_sum * left_sum *
                           (1.0 / static_cast<double>(left_n) + 1.0 / static_cast<double>(right_n));
      if (score > best_score) {
        best_score = score;
        best = Split{f, cut};
      }
    }
    return best;
  }

  std::size_t n_;
  std::size_t dim_;
  std::vector<double> x_;
  std::vector<double> y_;
  std::size_t k_;
  std::size_t n_min_;
  Rng rng_;
  std::vector<std::size_t> candidates_;
  std::vector<double> lo_;
  std::vector<double> hi_;
};

}  // namespace

Forest fit_forest(const RowMatrix& rows, std::span<const double> targets,
                  const ForestParams& params, std::uint64_t seed) {
  if (rows.empty() || targets.empty()) throw InvalidArgument("fit_forest: empty input");
  if (rows.rows() != targets.size()) {
    throw InvalidArgument("fit_forest: row and target counts differ");
  }
  params.validate(rows.cols());

  Columns cols;
  cols.n = rows.rows();
  cols.dim = rows.cols();
  cols.values.resize(cols.n * cols.dim);
  for (std::size_t i = 0; i < cols.n; ++i) {
    for (std::size_t f = 0; f < cols.dim; ++f) cols.values[f * cols.n + i] = rows(i, f);
  }

  Forest forest;
  forest.params = params;
  forest.feature_dim = rows.cols();
  const auto [lo, hi] = std::minmax_element(targets.begin(), targets.end());
  forest.target_min = *lo;
  forest.target_max = *hi;

  const std::size_t k = params.features_per_split == 0 ? cols.dim : params.features_per_split;
  // Trees are independent given their seeds, so the result does not depend on
  // the number of worker threads.
  forest.trees.resize(params.tree_count);
  auto build = [&](std::size_t t) {
    TreeBuilder builder(cols, targets, k, params.min_samples_split, derive_seed(seed, t));
    forest.trees[t] = builder.build();
  };
  const std::size_t workers =
      std::min<std::size_t>(params.tree_count, std::max(1u, std::thread::hardware_concurrency()));
  if (workers <= 1 || cols.n < 256) {
    for (std::size_t t = 0; t < params.tree_count; ++t) build(t);
    return forest;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  std::vector<std::thread> pool;
  for (std::size_t w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      try {
        for (std::size_t t = next++; t < params.tree_count; t = next++) build(t);
      } catch (...) {
        const std::lock_guard lock(failure_mutex);
        if (!failure) failure = std::current_exception();
      }
    });
  }
  for (auto& th : pool) th.join();
  if (failure) std::rethrow_exception(failure);
  return forest;
}

double predict_forest(const Forest& forest, std::span<const double> row) {
  if (row.size() != forest.feature_dim) {
    throw InvalidArgument("predict_forest: row has " + std::to_string(row.size()) +
                          " features, forest expects " + std::to_string(forest.feature_dim));
  }
  double sum = 0.0;
  for (const auto& tree : forest.trees) sum += tree.predict(row);
  const double mean = sum / static_cast<double>(forest.trees.size());
  return std::clamp(mean, forest.target_min, forest.target_max);
}

void save_forest(const Forest& forest, const std::filesystem::path& path) {
  nlohmann::json j;
  j["feature_dim"] = forest.feature_dim;
  j["target_min"] = forest.target_min;
  j["target_max"] = forest.target_max;
  j["params"] = {{"tree_count", forest.params.tree_count},
                 {"features_per_split", forest.params.features_per_split},
                 {"min_samples_split", forest.params.min_samples_split}};
  auto& trees = j["trees"] = nlohmann::json::array();
  for (const auto& tree : forest.trees) {
    auto nodes = nlohmann::json::array();
    for (const auto& n : tree.nodes) nodes.push_back({n.feature, n.left, n.value});
    trees.push_back(std::move(nodes));
  }
  std::ofstream out(path);
  if (!out) throw FormatError("cannot write forest file " + path.string());
  out << j.dump();
}

Forest load_forest(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw FormatError("cannot open forest file " + path.string());
  Forest forest;
  try {
    const auto j = nlohmann::json::parse(in);
    forest.feature_dim = j.at("feature_dim").get<std::size_t>();
    forest.target_min = j.at("target_min").get<double>();
    forest.target_max = j.at("target_max").get<double>();
    const auto& p = j.at("params");
    forest.params.tree_count = p.at("tree_count").get<std::size_t>();
    forest.params.features_per_split = p.at("features_per_split").get<std::size_t>();
    forest.params.min_samples_split = p.at("min_samples_split").get<std::size_t>();
    for (const auto& t : j.at("trees")) {
      RegressionTree tree;
      for (const auto& n : t) {
        tree.nodes.push_back(
            TreeNode{n.at(0).get<std::int32_t>(), n.at(1).get<std::int32_t>(), n.at(2).get<double>()});
      }
      forest.trees.push_back(std::move(tree));
    }
  } catch (const nlohmann::json::exception& e) {
    throw FormatError("malformed forest file " + path.string() + ": " + e.what());
  }
  if (forest.trees.empty()) throw FormatError("forest file has no trees");
  return forest;
}

}  // namespace mabrl
