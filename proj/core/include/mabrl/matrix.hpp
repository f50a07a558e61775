#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "mabrl/error.hpp"

namespace mabrl {

// Dense row-major matrix of doubles; the lingua franca between modules.
class RowMatrix {
 public:
  RowMatrix() = default;
  RowMatrix(std::size_t rows, std::size_t cols, double fill = 0.0)
      : rows_(rows), cols_(cols), data_(rows * cols, fill) {}
  RowMatrix(std::size_t rows, std::size_t cols, std::vector<double> data)
      : rows_(rows), cols_(cols), data_(std::move(data)) {
    if (data_.size() != rows_ * cols_) {
      throw InvalidArgument("RowMatrix: data size does not match shape");
    }
  }

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  bool empty() const { return rows_ == 0; }

  std::span<double> row(std::size_t i) { return {data_.data() + i * cols_, cols_}; }
  std::span<const double> row(std::size_t i) const { return {data_.data() + i * cols_, cols_}; }
  double& operator()(std::size_t i, std::size_t j) { return data_[i * cols_ + j]; }
  double operator()(std::size_t i, std::size_t j) const { return data_[i * cols_ + j]; }

  const std::vector<double>& data() const { return data_; }

  // Appends a row; the first row fixes the column count of an empty matrix.
  void push_row(std::span<const double> values) {
    if (rows_ == 0 && cols_ == 0) cols_ = values.size();
    if (values.size() != cols_) {
      throw InvalidArgument("RowMatrix::push_row: wrong row width");
    }
    data_.insert(data_.end(), values.begin(), values.end());
    ++rows_;
  }

  friend bool operator==(const RowMatrix&, const RowMatrix&) = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

// Per-dimension affine map x -> (x - lo) / (hi - lo) onto [0, 1].
struct MinMaxScaler {
  std::vector<double> lo;
  std::vector<double> hi;

  std::size_t dim() const { return lo.size(); }

  double apply(std::size_t d, double x) const {
    const double span = hi[d] - lo[d];
    return span > 0.0 ? (x - lo[d]) / span : 0.0;
  }

  std::vector<double> apply(std::span<const double> x) const {
    if (x.size() != lo.size()) {
      throw InvalidArgument("MinMaxScaler: dimension mismatch");
    }
    std::vector<double> out(x.size());
    for (std::size_t d = 0; d < x.size(); ++d) out[d] = apply(d, x[d]);
    return out;
  }

  friend bool operator==(const MinMaxScaler&, const MinMaxScaler&) = default;
};

}  // namespace mabrl
