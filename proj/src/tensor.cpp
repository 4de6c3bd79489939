#include "cpdkit/tensor.hpp"

#include <numeric>
#include <stdexcept>
#include <string>

namespace cpdkit {

namespace {

Index shape_product(const std::vector<Index>& shape) {
  if (shape.empty()) throw std::invalid_argument("tensor order must be >= 1");
  Index n = 1;
  for (Index d : shape) {
    if (d < 1) throw std::invalid_argument("mode lengths must be >= 1");
    n *= d;
  }
  return n;
}

void check_mode(const DenseTensor& t, Index mode) {
  if (mode < 0 || mode >= t.order())
    throw std::invalid_argument("mode index " + std::to_string(mode) +
                                " out of range for order " + std::to_string(t.order()));
}

}  // namespace

DenseTensor::DenseTensor(std::vector<Index> shape)
    : shape_(std::move(shape)), data_(Vector::Zero(shape_product(shape_))) {}

DenseTensor::DenseTensor(std::vector<Index> shape, Vector data) : shape_(std::move(shape)) {
  if (data.size() != shape_product(shape_))
    throw std::invalid_argument("data length does not match shape product");
  data_ = std::move(data);
}

Index DenseTensor::flat_index(const std::vector<Index>& idx) const {
  if (idx.size() != shape_.size()) throw std::invalid_argument("index arity mismatch");
  Index flat = 0;
  Index stride = 1;
  for (std::size_t n = 0; n < shape_.size(); ++n) {
    if (idx[n] < 0 || idx[n] >= shape_[n]) throw std::out_of_range("index out of range");
    flat += idx[n] * stride;
    stride *= shape_[n];
  }
  return flat;
}

Matrix matricize(const DenseTensor& t, Index mode) {
  check_mode(t, mode);
  const auto& shape = t.shape();
  Index left = 1, right = 1;
  for (Index m = 0; m < mode; ++m) left *= shape[m];
  for (Index m = mode + 1; m < t.order(); ++m) right *= shape[m];
  const Index in = shape[mode];

  Matrix out(in, left * right);
  const double* src = t.data().data();
  for (Index rr = 0; rr < right; ++rr)
    for (Index i = 0; i < in; ++i)
      for (Index l = 0; l < left; ++l)
        out(i, l + left * rr) = src[l + left * (i + in * rr)];
  return out;
}

DenseTensor tensorize(const Matrix& m, std::vector<Index> shape, Index mode) {
  const Index order = static_cast<Index>(shape.size());
  if (mode < 0 || mode >= order) throw std::invalid_argument("mode index out of range");
  Index left = 1, right = 1;
  for (Index k = 0; k < mode; ++k) left *= shape[k];
  for (Index k = mode + 1; k < order; ++k) right *= shape[k];
  const Index in = shape[mode];
  if (m.rows() != in || m.cols() != left * right)
    throw std::invalid_argument("matrix shape does not match the requested unfolding");

  DenseTensor t(std::move(shape));
  double* dst = t.data().data();
  for (Index rr = 0; rr < right; ++rr)
    for (Index i = 0; i < in; ++i)
      for (Index l = 0; l < left; ++l)
        dst[l + left * (i + in * rr)] = m(i, l + left * rr);
  return t;
}

Matrix khatri_rao(const std::vector<Matrix>& ms) {
  if (ms.empty()) throw std::invalid_argument("khatri_rao needs at least one matrix");
  const Index cols = ms.front().cols();
  for (const auto& m : ms)
    if (m.cols() != cols) throw std::invalid_argument("khatri_rao column-count mismatch");

  Matrix out = ms.front();
  for (std::size_t k = 1; k < ms.size(); ++k) {
    const Matrix& b = ms[k];
    Matrix next(out.rows() * b.rows(), cols);
    for (Index r = 0; r < cols; ++r)
      for (Index i = 0; i < out.rows(); ++i)
        next.col(r).segment(i * b.rows(), b.rows()) = out(i, r) * b.col(r);
    out = std::move(next);
  }
  return out;
}

Matrix khatri_rao(const Matrix& a, const Matrix& b) { return khatri_rao({a, b}); }

Matrix hadamard(const Matrix& a, const Matrix& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols())
    throw std::invalid_argument("hadamard shape mismatch");
  return a.cwiseProduct(b);
}

namespace {

// Khatri-Rao over modes [0, hi) in descending order; ones(1, R) when empty.
Matrix kr_below(const std::vector<Matrix>& factors, Index hi, Index r) {
  std::vector<Matrix> ms;
  for (Index m = hi - 1; m >= 0; --m) ms.push_back(factors[m]);
  if (ms.empty()) return Matrix::Ones(1, r);
  return khatri_rao(ms);
}

// Accumulates the mode-n MTTKRP of the contiguous block rooted at `data`
// covering modes [0, level]; trailing modes > n carry the running per-column
// weights `w`. `kr_left` is the Khatri-Rao product of modes below n.
void mttkrp_recurse(const double* data, const std::vector<Index>& shape,
                    const std::vector<Index>& strides, const std::vector<Matrix>& factors,
                    Index n, Index level, const Eigen::RowVectorXd& w, const Matrix& kr_left,
                    Matrix& out, Matrix& scratch) {
  if (level == n) {
    const Index left = strides[n];
    Eigen::Map<const Matrix> block(data, left, shape[n]);
    scratch = kr_left;
    scratch.array().rowwise() *= w.array();
    out.noalias() += block.transpose() * scratch;
    return;
  }
  for (Index i = 0; i < shape[level]; ++i) {
    const Eigen::RowVectorXd wi = w.cwiseProduct(factors[level].row(i));
    mttkrp_recurse(data + i * strides[level], shape, strides, factors, n, level - 1, wi,
                   kr_left, out, scratch);
  }
}

}  // namespace

Matrix mttkrp(const DenseTensor& t, const std::vector<Matrix>& factors, Index mode) {
  check_mode(t, mode);
  const Index order = t.order();
  if (static_cast<Index>(factors.size()) != order)
    throw std::invalid_argument("mttkrp expects one factor per mode");
  const Index r = factors.front().cols();
  for (Index m = 0; m < order; ++m) {
    if (factors[m].rows() != t.dim(m))
      throw std::invalid_argument("mttkrp factor row-count mismatch at mode " +
                                  std::to_string(m));
    if (factors[m].cols() != r)
      throw std::invalid_argument("mttkrp factor column-count mismatch");
  }

  const auto& shape = t.shape();
  std::vector<Index> strides(shape.size());
  Index s = 1;
  for (std::size_t m = 0; m < shape.size(); ++m) {
    strides[m] = s;
    s *= shape[m];
  }

  Matrix out = Matrix::Zero(t.dim(mode), r);
  if (order == 1) {
    out.colwise() = t.data();
    return out;
  }

  if (mode == order - 1) {
    // Stream the second-to-last mode; Khatri-Rao covers the modes below it.
    const Index sm = order - 2;
    const Matrix krl = kr_below(factors, sm, r);
    const Index left = strides[sm];
    Matrix scaled(left, r);
    for (Index i = 0; i < shape[sm]; ++i) {
      scaled = krl;
      scaled.array().rowwise() *= factors[sm].row(i).array();
      Eigen::Map<const Matrix, 0, Eigen::OuterStride<>> block(
          t.data().data() + i * left, left, shape[mode], Eigen::OuterStride<>(strides[mode]));
      out.noalias() += block.transpose() * scaled;
    }
    return out;
  }

  const Matrix krl = kr_below(factors, mode, r);
  Matrix scratch(krl.rows(), r);
  mttkrp_recurse(t.data().data(), shape, strides, factors, mode, order - 1,
                 Eigen::RowVectorXd::Ones(r), krl, out, scratch);
  return out;
}

double multilinear_eval(const DenseTensor& t, const std::vector<Vector>& vs) {
  if (static_cast<Index>(vs.size()) != t.order())
    throw std::invalid_argument("multilinear_eval expects one vector per mode");
  for (Index m = 0; m < t.order(); ++m)
    if (vs[m].size() != t.dim(m))
      throw std::invalid_argument("multilinear_eval vector length mismatch at mode " +
                                  std::to_string(m));

  // Contract the last mode repeatedly.
  Vector cur = t.data();
  for (Index m = t.order() - 1; m >= 1; --m) {
    const Index rest = cur.size() / t.dim(m);
    Eigen::Map<const Matrix> block(cur.data(), rest, t.dim(m));
    Vector next = block * vs[m];
    cur = std::move(next);
  }
  return cur.dot(vs[0]);
}

Vector multilinear_contract(const DenseTensor& t, const std::vector<Vector>& vs,
                            Index open_mode) {
  check_mode(t, open_mode);
  if (static_cast<Index>(vs.size()) != t.order())
    throw std::invalid_argument("multilinear_contract expects one vector per mode");
  for (Index m = 0; m < t.order(); ++m)
    if (m != open_mode && vs[m].size() != t.dim(m))
      throw std::invalid_argument("multilinear_contract vector length mismatch");

  // Contract trailing modes above open_mode, then the leading ones.
  Vector cur = t.data();
  for (Index m = t.order() - 1; m > open_mode; --m) {
    const Index rest = cur.size() / t.dim(m);
    Eigen::Map<const Matrix> block(cur.data(), rest, t.dim(m));
    Vector next = block * vs[m];
    cur = std::move(next);
  }
  for (Index m = 0; m < open_mode; ++m) {
    const Index rest = cur.size() / t.dim(m);
    Eigen::Map<const Matrix> block(cur.data(), t.dim(m), rest);
    Vector next = block.transpose() * vs[m];
    cur = std::move(next);
  }
  return cur;
}

DenseTensor multimode_transform(const DenseTensor& t, const std::vector<Matrix>& maps) {
  if (static_cast<Index>(maps.size()) != t.order())
    throw std::invalid_argument("multimode_transform expects one matrix per mode");
  for (Index m = 0; m < t.order(); ++m)
    if (maps[m].rows() != t.dim(m))
      throw std::invalid_argument("multimode_transform row-count mismatch at mode " +
                                  std::to_string(m));

  std::vector<Index> shape = t.shape();
  Vector cur = t.data();
  for (Index m = 0; m < t.order(); ++m) {
    const Index in = shape[m];
    const Index jn = maps[m].cols();
    Index left = 1, right = 1;
    for (Index k = 0; k < m; ++k) left *= shape[k];
    for (Index k = m + 1; k < t.order(); ++k) right *= shape[k];

    Vector next(left * jn * right);
    for (Index rr = 0; rr < right; ++rr) {
      Eigen::Map<const Matrix> src(cur.data() + rr * left * in, left, in);
      Eigen::Map<Matrix> dst(next.data() + rr * left * jn, left, jn);
      dst.noalias() = src * maps[m];
    }
    cur = std::move(next);
    shape[m] = jn;
  }
  return DenseTensor(std::move(shape), std::move(cur));
}

double inner(const DenseTensor& a, const DenseTensor& b) {
  if (!a.same_shape(b)) throw std::invalid_argument("inner shape mismatch");
  return a.data().dot(b.data());
}

}  // namespace cpdkit
