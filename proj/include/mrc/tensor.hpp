#pragma once

#include <cstddef>
#include <vector>

namespace mrc {

using Vec = std::vector<double>;

/// Dense row-major matrix of doubles.
struct Mat {
  size_t rows = 0;
  size_t cols = 0;
  Vec data;

  Mat() = default;
  Mat(size_t r, size_t c) : rows(r), cols(c), data(r * c, 0.0) {}

  double& operator()(size_t i, size_t j) { return data[i * cols + j]; }
  double operator()(size_t i, size_t j) const { return data[i * cols + j]; }
  double* row(size_t i) { return data.data() + i * cols; }
  const double* row(size_t i) const { return data.data() + i * cols; }
  size_t size() const { return data.size(); }
  void zero() { data.assign(data.size(), 0.0); }
  bool operator==(const Mat&) const = default;
};

}  // namespace mrc
