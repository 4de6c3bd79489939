#pragma once

#include <vector>

#include <Eigen/Dense>

namespace cpdkit {

using Index = Eigen::Index;
using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

/// Dense order-N tensor with first-index-fastest (column-major) storage.
class DenseTensor {
public:
  DenseTensor() = default;

  /// Zero tensor of the given shape.
  explicit DenseTensor(std::vector<Index> shape);

  /// Takes ownership of a flat buffer; data.size() must equal the shape product.
  DenseTensor(std::vector<Index> shape, Vector data);

  Index order() const { return static_cast<Index>(shape_.size()); }
  Index dim(Index mode) const { return shape_.at(static_cast<std::size_t>(mode)); }
  const std::vector<Index>& shape() const { return shape_; }
  Index size() const { return data_.size(); }

  const Vector& data() const { return data_; }
  Vector& data() { return data_; }

  double operator[](Index flat) const { return data_[flat]; }
  double& operator[](Index flat) { return data_[flat]; }

  /// Element access by multi-index (0-based).
  double at(const std::vector<Index>& idx) const { return data_[flat_index(idx)]; }
  double& at(const std::vector<Index>& idx) { return data_[flat_index(idx)]; }

  Index flat_index(const std::vector<Index>& idx) const;

  double norm() const { return data_.norm(); }

  bool same_shape(const DenseTensor& other) const { return shape_ == other.shape_; }

private:
  std::vector<Index> shape_;
  Vector data_;
};

/// Mode-n unfolding X_(n) of shape I_n x prod of the other mode lengths.
/// Column j enumerates the remaining indices with the lowest mode fastest.
Matrix matricize(const DenseTensor& t, Index mode);

/// Inverse of matricize under the same index map.
DenseTensor tensorize(const Matrix& m, std::vector<Index> shape, Index mode);

/// Column-wise Kronecker product of the matrices in the given order; within
/// each column the last matrix's row index varies fastest.
Matrix khatri_rao(const std::vector<Matrix>& ms);
Matrix khatri_rao(const Matrix& a, const Matrix& b);

/// Elementwise product; shapes must match.
Matrix hadamard(const Matrix& a, const Matrix& b);

/// X_(n) times the Khatri-Rao product of the other factors (modes descending,
/// n omitted), computed in one pass over the dense tensor without forming the
/// Khatri-Rao product itself. factors[mode] must have dim(mode) rows; entry n
/// only contributes its shape.
Matrix mttkrp(const DenseTensor& t, const std::vector<Matrix>& factors, Index mode);

/// Full contraction sum x_{i1..iN} * prod_n v^(n)_{in}.
double multilinear_eval(const DenseTensor& t, const std::vector<Vector>& vs);

/// Contraction over all modes except open_mode; returns a vector of length
/// dim(open_mode). vs[open_mode] is ignored.
Vector multilinear_contract(const DenseTensor& t, const std::vector<Vector>& vs,
                            Index open_mode);

/// Simultaneous mode-n products: z_{j1..jN} = sum_t x_{i1..iN} prod_n m^(n)_{in jn}.
/// maps[n] must have dim(n) rows; the result has shape (cols of each map).
DenseTensor multimode_transform(const DenseTensor& t, const std::vector<Matrix>& maps);

/// Frobenius inner product of same-shape tensors.
double inner(const DenseTensor& a, const DenseTensor& b);

}  // namespace cpdkit
