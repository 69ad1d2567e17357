#pragma once

#include <cassert>
#include <cmath>
#include <cstddef>
#include <initializer_list>
#include <span>
#include <vector>

#include "semshift/error.hpp"

namespace semshift {

// Dense row-major matrix of doubles; one row per usage vector.
class Matrix {
 public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols)
      : rows_(rows), cols_(cols), data_(rows * cols, 0.0) {}

  Matrix(std::initializer_list<std::initializer_list<double>> rows) {
    for (const auto& r : rows) append_row(std::vector<double>(r));
  }

  static Matrix from_rows(const std::vector<std::vector<double>>& rows) {
    Matrix m;
    for (const auto& r : rows) m.append_row(r);
    return m;
  }

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }
  bool empty() const noexcept { return rows_ == 0; }

  std::span<double> row(std::size_t i) {
    assert(i < rows_);
    return {data_.data() + i * cols_, cols_};
  }
  std::span<const double> row(std::size_t i) const {
    assert(i < rows_);
    return {data_.data() + i * cols_, cols_};
  }

  double& operator()(std::size_t i, std::size_t j) { return data_[i * cols_ + j]; }
  double operator()(std::size_t i, std::size_t j) const {
    return data_[i * cols_ + j];
  }

  void append_row(std::span<const double> r) {
    if (rows_ == 0 && cols_ == 0) cols_ = r.size();
    if (r.size() != cols_) {
      throw Error(ErrorCode::kDimMismatch,
                  "row of dimension " + std::to_string(r.size()) +
                      " appended to matrix of dimension " +
                      std::to_string(cols_));
    }
    data_.insert(data_.end(), r.begin(), r.end());
    ++rows_;
  }
  void append_row(const std::vector<double>& r) {
    append_row(std::span<const double>(r));
  }

  const std::vector<double>& data() const noexcept { return data_; }

  friend bool operator==(const Matrix&, const Matrix&) = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

inline double dot(std::span<const double> a, std::span<const double> b) {
  assert(a.size() == b.size());
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

inline double squared_distance(std::span<const double> a,
                               std::span<const double> b) {
  assert(a.size() == b.size());
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = a[i] - b[i];
    s += d * d;
  }
  return s;
}

inline double l2_norm(std::span<const double> a) { return std::sqrt(dot(a, a)); }

// Vertical concatenation; both operands must share a column count.
inline Matrix stack(const Matrix& top, const Matrix& bottom) {
  Matrix out = top;
  for (std::size_t i = 0; i < bottom.rows(); ++i) out.append_row(bottom.row(i));
  return out;
}

}  // namespace semshift
