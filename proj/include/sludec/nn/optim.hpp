#pragma once

#include <vector>

#include "sludec/nn/core.hpp"

namespace sludec {

template <typename Scalar>
struct AdadeltaState {
  Matrix<Scalar> sq_grad;   // E[g^2]
  Matrix<Scalar> sq_delta;  // E[dx^2]
  Scalar rho = Scalar(0.95);
  Scalar eps = Scalar(1e-6);

  AdadeltaState() = default;
  AdadeltaState(Eigen::Index rows, Eigen::Index cols, Scalar rho_, Scalar eps_)
      : sq_grad(Matrix<Scalar>::Zero(rows, cols)), sq_delta(Matrix<Scalar>::Zero(rows, cols)),
        rho(rho_), eps(eps_) {
    if (!(rho > 0 && rho < 1)) throw DomainError("adadelta: rho must lie in (0,1)");
    if (!(eps > 0)) throw DomainError("adadelta: eps must be positive");
  }
};

// One Adadelta update. The state is left untouched when the gradient is not finite.
template <typename Scalar, typename DG>
void adadelta_step(Matrix<Scalar>& param, const Eigen::MatrixBase<DG>& grad,
                   AdadeltaState<Scalar>& state) {
  if (param.rows() != grad.rows() || param.cols() != grad.cols() ||
      state.sq_grad.rows() != param.rows() || state.sq_grad.cols() != param.cols())
    throw DimensionError("adadelta_step: param " + shape_of(param) + ", grad " + shape_of(grad) +
                         ", state " + shape_of(state.sq_grad));
  if (!all_finite(grad)) throw NumericError("adadelta_step: non-finite gradient");

  const Scalar rho = state.rho;
  const Scalar eps = state.eps;
  auto g = grad.array();
  state.sq_grad.array() = rho * state.sq_grad.array() + (Scalar(1) - rho) * g.square();
  const Matrix<Scalar> delta =
      (-((state.sq_delta.array() + eps).sqrt() / (state.sq_grad.array() + eps).sqrt()) * g)
          .matrix();
  state.sq_delta.array() = rho * state.sq_delta.array() + (Scalar(1) - rho) * delta.array().square();
  param += delta;
}

// Adadelta over a fixed list of parameters, one state per parameter.
template <typename Scalar>
class Adadelta {
 public:
  Adadelta(const std::vector<Parameter<Scalar>*>& params, Scalar rho, Scalar eps) : params_(params) {
    states_.reserve(params_.size());
    for (auto* p : params_) states_.emplace_back(p->value.rows(), p->value.cols(), rho, eps);
  }

  // Applies grad * scale to every parameter; all gradients are validated first so a
  // failing step leaves every parameter untouched.
  void step(Scalar grad_scale = Scalar(1)) {
    for (auto* p : params_)
      if (!all_finite(p->grad)) throw NumericError("adadelta: non-finite gradient in " + p->name);
    for (std::size_t i = 0; i < params_.size(); ++i) {
      Parameter<Scalar>& p = *params_[i];
      if (grad_scale == Scalar(1))
        adadelta_step(p.value, p.grad, states_[i]);
      else
        adadelta_step(p.value, (p.grad * grad_scale).eval(), states_[i]);
    }
  }

  void zero_grad() {
    for (auto* p : params_) p->zero_grad();
  }

  const std::vector<AdadeltaState<Scalar>>& states() const { return states_; }

 private:
  std::vector<Parameter<Scalar>*> params_;
  std::vector<AdadeltaState<Scalar>> states_;
};

enum class Mode { train, infer };

template <typename Scalar>
struct DropoutMask {
  Vector<Scalar> keep;  // 0/1 entries
  Scalar keep_prob = Scalar(1);

  Eigen::Index size() const { return keep.size(); }
};

template <typename Scalar, typename Rng>
DropoutMask<Scalar> make_dropout_mask(Eigen::Index n, double rate, Mode mode, Rng& rng) {
  if (!(rate >= 0.0 && rate < 1.0)) throw DomainError("dropout: rate must lie in [0,1)");
  DropoutMask<Scalar> mask;
  mask.keep = Vector<Scalar>::Ones(n);
  if (mode == Mode::infer || rate == 0.0) return mask;
  mask.keep_prob = Scalar(1.0 - rate);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (Eigen::Index i = 0; i < n; ++i) mask.keep(i) = u(rng) < rate ? Scalar(0) : Scalar(1);
  return mask;
}

// Inverted dropout: kept units are scaled by 1/(1-rate) so inference is the identity.
template <typename Scalar, typename Derived>
Vector<Scalar> dropout_apply(const Eigen::MatrixBase<Derived>& v, const DropoutMask<Scalar>& mask) {
  if (v.size() != mask.size()) throw DimensionError("dropout: mask/input size mismatch");
  return (v.array() * mask.keep.array() / mask.keep_prob).matrix();
}

template <typename Scalar, typename Rng, typename Derived>
Vector<Scalar> dropout_apply(const Eigen::MatrixBase<Derived>& v, double rate, Mode mode, Rng& rng) {
  return dropout_apply(v, make_dropout_mask<Scalar>(v.size(), rate, mode, rng));
}

template <typename Scalar, typename Derived>
Vector<Scalar> dropout_backward(const Eigen::MatrixBase<Derived>& upstream,
                                const DropoutMask<Scalar>& mask) {
  return dropout_apply(upstream, mask);
}

}  // namespace sludec
