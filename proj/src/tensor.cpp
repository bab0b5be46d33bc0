#include "aircast/tensor.hpp"

namespace aircast {

Index shape_size(const std::vector<Index>& shape) {
  Index n = 1;
  for (Index e : shape) {
    if (e < 0) throw InvalidArgument("tensor extent must be non-negative");
    n *= e;
  }
  return n;
}

bool same_shape(const Tensor& a, const Tensor& b) { return a.shape == b.shape; }

std::string shape_string(const std::vector<Index>& shape) {
  std::string out = "[";
  for (std::size_t i = 0; i < shape.size(); ++i) {
    if (i > 0) out += ",";
    out += std::to_string(shape[i]);
  }
  return out + "]";
}

Tensor Tensor::zeros(std::vector<Index> shape) {
  Tensor t;
  const Index n = shape_size(shape);
  t.shape = std::move(shape);
  t.data = Eigen::ArrayXd::Zero(n);
  return t;
}

Tensor Tensor::constant(std::vector<Index> shape, double value) {
  Tensor t;
  const Index n = shape_size(shape);
  t.shape = std::move(shape);
  t.data = Eigen::ArrayXd::Constant(n, value);
  return t;
}

Tensor Tensor::scalar(double value) {
  Tensor t;
  t.shape = {1};
  t.data = Eigen::ArrayXd::Constant(1, value);
  return t;
}

Tensor Tensor::from_matrix(const Matrix& m) {
  Tensor t;
  t.shape = {m.rows(), m.cols()};
  t.data.resize(m.size());
  for (Index r = 0; r < m.rows(); ++r)
    for (Index c = 0; c < m.cols(); ++c) t.data[r * m.cols() + c] = m(r, c);
  return t;
}

Tensor Tensor::from_vector(const Vector& v) {
  Tensor t;
  t.shape = {v.size()};
  t.data = v.array();
  return t;
}

Index Tensor::extent(Index axis) const {
  if (axis < 0 || axis >= rank())
    throw InvalidArgument("tensor axis " + std::to_string(axis) + " out of range for shape " +
                          shape_string(shape));
  return shape[static_cast<std::size_t>(axis)];
}

double& Tensor::at(Index i, Index j) {
  return data[i * shape[1] + j];
}

double Tensor::at(Index i, Index j) const {
  return data[i * shape[1] + j];
}

double& Tensor::at(Index i, Index j, Index k) {
  return data[(i * shape[1] + j) * shape[2] + k];
}

double Tensor::at(Index i, Index j, Index k) const {
  return data[(i * shape[1] + j) * shape[2] + k];
}

Matrix Tensor::matrix() const {
  if (rank() == 1) {
    Matrix m(1, size());
    for (Index i = 0; i < size(); ++i) m(0, i) = data[i];
    return m;
  }
  if (rank() != 2)
    throw InvalidArgument("tensor of shape " + shape_string(shape) + " is not a matrix");
  Matrix m(shape[0], shape[1]);
  for (Index r = 0; r < shape[0]; ++r)
    for (Index c = 0; c < shape[1]; ++c) m(r, c) = at(r, c);
  return m;
}

}  // namespace aircast
