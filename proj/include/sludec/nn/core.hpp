#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <random>
#include <sstream>
#include <string>

#include "sludec/errors.hpp"

namespace sludec {

template <typename Scalar>
using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
template <typename Scalar>
using RowMatrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
template <typename Scalar>
using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

using MatrixD = Matrix<double>;
using RowMatrixD = RowMatrix<double>;
using VectorD = Vector<double>;

template <typename Derived>
std::string shape_of(const Eigen::DenseBase<Derived>& m) {
  std::ostringstream os;
  os << m.rows() << "x" << m.cols();
  return os.str();
}

template <typename Derived>
bool all_finite(const Eigen::DenseBase<Derived>& m) {
  return m.derived().array().isFinite().all();
}

// A learned tensor with its accumulated gradient. Vectors are stored as n x 1.
template <typename Scalar>
struct Parameter {
  std::string name;
  Matrix<Scalar> value;
  Matrix<Scalar> grad;

  Parameter() = default;
  Parameter(std::string n, Eigen::Index rows, Eigen::Index cols)
      : name(std::move(n)), value(Matrix<Scalar>::Zero(rows, cols)),
        grad(Matrix<Scalar>::Zero(rows, cols)) {}

  void zero_grad() { grad.setZero(); }
  Eigen::Index size() const { return value.size(); }
};

template <typename Scalar, typename Rng>
void uniform_init(Parameter<Scalar>& p, Rng& rng, double bound = 0.1) {
  std::uniform_real_distribution<double> dist(-bound, bound);
  for (Eigen::Index j = 0; j < p.value.cols(); ++j)
    for (Eigen::Index i = 0; i < p.value.rows(); ++i)
      p.value(i, j) = static_cast<Scalar>(dist(rng));
}

// W x + b
template <typename Scalar, typename DX, typename DW, typename DB>
Vector<Scalar> affine(const Eigen::MatrixBase<DX>& x, const Eigen::MatrixBase<DW>& W,
                      const Eigen::MatrixBase<DB>& b) {
  if (x.cols() != 1 || b.cols() != 1 || W.cols() != x.rows() || W.rows() != b.rows())
    throw DimensionError("affine: W " + shape_of(W) + " incompatible with x " + shape_of(x) +
                         " and b " + shape_of(b));
  return W * x + b;
}

template <typename Derived>
auto tanh(const Eigen::MatrixBase<Derived>& v) {
  return v.array().tanh().matrix();
}

template <typename Derived>
auto sigmoid(const Eigen::MatrixBase<Derived>& v) {
  using S = typename Derived::Scalar;
  return (S(1) / (S(1) + (-v.array()).exp())).matrix();
}

// Derivatives expressed through the forward outputs.
template <typename Derived>
auto tanh_grad_from_output(const Eigen::MatrixBase<Derived>& y) {
  using S = typename Derived::Scalar;
  return (S(1) - y.array().square()).matrix();
}

template <typename Derived>
auto sigmoid_grad_from_output(const Eigen::MatrixBase<Derived>& y) {
  using S = typename Derived::Scalar;
  return (y.array() * (S(1) - y.array())).matrix();
}

template <typename Derived>
Vector<typename Derived::Scalar> softmax(const Eigen::MatrixBase<Derived>& logits) {
  using S = typename Derived::Scalar;
  if (logits.size() == 0) throw DomainError("softmax: empty logits");
  Vector<S> e = (logits.array() - logits.maxCoeff()).exp().matrix();
  return e / e.sum();
}

template <typename Derived>
typename Derived::Scalar nll_loss(const Eigen::MatrixBase<Derived>& probs, Eigen::Index target) {
  using std::log;
  if (target < 0 || target >= probs.size())
    throw DomainError("nll_loss: target " + std::to_string(target) + " outside [0," +
                      std::to_string(probs.size()) + ")");
  return -log(probs(target));
}

// d(nll(softmax(z)))/dz = p - onehot(target)
template <typename Derived>
Vector<typename Derived::Scalar> softmax_nll_grad(const Eigen::MatrixBase<Derived>& probs,
                                                  Eigen::Index target) {
  if (target < 0 || target >= probs.size())
    throw DomainError("softmax_nll_grad: target out of range");
  Vector<typename Derived::Scalar> g = probs;
  g(target) -= 1;
  return g;
}

template <typename Scalar>
struct PoolResult {
  Scalar value;
  Eigen::Index index;
};

// Ties resolve to the lowest index.
template <typename Derived>
PoolResult<typename Derived::Scalar> max_pool(const Eigen::MatrixBase<Derived>& feature_map) {
  if (feature_map.size() == 0) throw DomainError("max_pool: empty feature map");
  Eigen::Index idx = 0;
  const auto value = feature_map.maxCoeff(&idx);
  return {value, idx};
}

template <typename Scalar>
Vector<Scalar> max_pool_backward(Eigen::Index n, const PoolResult<Scalar>& pooled, Scalar upstream) {
  if (pooled.index < 0 || pooled.index >= n) throw StateError("max_pool_backward: stale argmax");
  Vector<Scalar> g = Vector<Scalar>::Zero(n);
  g(pooled.index) = upstream;
  return g;
}

// Accumulates dW += dy x^T, db += dy and returns dx = W^T dy.
template <typename Scalar, typename DX, typename DY>
Vector<Scalar> affine_backward(const Eigen::MatrixBase<DX>& x, const Eigen::MatrixBase<DY>& dy,
                               Parameter<Scalar>& W, Parameter<Scalar>* b) {
  if (W.value.rows() != dy.rows() || W.value.cols() != x.rows())
    throw DimensionError("affine_backward: W " + shape_of(W.value) + " vs x " + shape_of(x) +
                         ", dy " + shape_of(dy));
  W.grad.noalias() += dy * x.transpose();
  if (b) b->grad += dy;
  return W.value.transpose() * dy;
}

}  // namespace sludec
