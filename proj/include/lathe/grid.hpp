// Copyright 2026 The Lathe Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <cassert>
#include <cstddef>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <vector>

#include <Eigen/Core>

namespace lathe {

using Vec2 = Eigen::Vector2d;
using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;
/// Linear or tone-mapped RGB triple.
using Color = Eigen::Vector3d;

/// Dense row-major 2D array. Row 0 is the top of an image or texture.
template <class T>
class Grid {
 public:
  Grid() = default;
  Grid(int rows, int cols, const T& fill = T())
      : rows_(rows), cols_(cols),
        data_(static_cast<std::size_t>(checked(rows, cols)), fill) {}

  int rows() const { return rows_; }
  int cols() const { return cols_; }
  std::size_t size() const { return data_.size(); }
  bool empty() const { return data_.empty(); }

  T& operator()(int r, int c) {
    assert(r >= 0 && r < rows_ && c >= 0 && c < cols_);
    return data_[static_cast<std::size_t>(r) * cols_ + c];
  }
  const T& operator()(int r, int c) const {
    assert(r >= 0 && r < rows_ && c >= 0 && c < cols_);
    return data_[static_cast<std::size_t>(r) * cols_ + c];
  }
  T& operator[](std::size_t i) { return data_[i]; }
  const T& operator[](std::size_t i) const { return data_[i]; }

  std::span<T> span() { return data_; }
  std::span<const T> span() const { return data_; }
  std::vector<T>& data() { return data_; }
  const std::vector<T>& data() const { return data_; }

  auto begin() { return data_.begin(); }
  auto end() { return data_.end(); }
  auto begin() const { return data_.begin(); }
  auto end() const { return data_.end(); }

  bool same_shape(const Grid& o) const { return rows_ == o.rows_ && cols_ == o.cols_; }
  template <class U>
  bool same_shape(const Grid<U>& o) const { return rows_ == o.rows() && cols_ == o.cols(); }

  bool operator==(const Grid& o) const {
    return rows_ == o.rows_ && cols_ == o.cols_ && data_ == o.data_;
  }

 private:
  static long long checked(int rows, int cols) {
    if (rows < 0 || cols < 0) throw std::invalid_argument("Grid: negative dimension");
    return static_cast<long long>(rows) * cols;
  }

  int rows_ = 0;
  int cols_ = 0;
  std::vector<T> data_;
};

using ScalarMap = Grid<double>;
using ColorMap = Grid<Color>;
using VectorMap = Grid<Vec3>;
/// 0/1 validity or coverage flags.
using Mask = Grid<std::uint8_t>;

/// Columns [first, first + count) of `src`.
template <class T>
Grid<T> crop_columns(const Grid<T>& src, int first, int count) {
  if (first < 0 || count < 0 || first + count > src.cols())
    throw std::out_of_range("crop_columns: range outside grid");
  Grid<T> out(src.rows(), count);
  for (int r = 0; r < src.rows(); ++r)
    for (int c = 0; c < count; ++c) out(r, c) = src(r, first + c);
  return out;
}

/// `copies` side-by-side copies of `src`.
template <class T>
Grid<T> tile_columns(const Grid<T>& src, int copies) {
  Grid<T> out(src.rows(), src.cols() * copies);
  for (int r = 0; r < src.rows(); ++r)
    for (int c = 0; c < out.cols(); ++c) out(r, c) = src(r, c % src.cols());
  return out;
}

}  // namespace lathe
