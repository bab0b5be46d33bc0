#pragma once

#include <string>
#include <vector>

#include "aircast/types.hpp"

namespace aircast {

// Dense n-dimensional array of 64-bit reals, row-major.
struct Tensor {
  std::vector<Index> shape;
  Eigen::ArrayXd data;

  Tensor() = default;

  static Tensor zeros(std::vector<Index> shape);
  static Tensor constant(std::vector<Index> shape, double value);
  static Tensor scalar(double value);
  static Tensor from_matrix(const Matrix& m);  // shape [rows, cols]
  static Tensor from_vector(const Vector& v);  // shape [n]

  Index size() const { return data.size(); }
  Index rank() const { return static_cast<Index>(shape.size()); }
  Index extent(Index axis) const;

  double& at(Index i) { return data[i]; }
  double at(Index i) const { return data[i]; }
  double& at(Index i, Index j);
  double at(Index i, Index j) const;
  double& at(Index i, Index j, Index k);
  double at(Index i, Index j, Index k) const;

  // Rank-1 or rank-2 tensor as a matrix (rank-1 → 1×n row).
  Matrix matrix() const;

  bool all_finite() const { return data.allFinite(); }
};

Index shape_size(const std::vector<Index>& shape);
bool same_shape(const Tensor& a, const Tensor& b);
std::string shape_string(const std::vector<Index>& shape);

}  // namespace aircast
