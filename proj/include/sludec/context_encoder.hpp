#pragma once

#include <string>
#include <vector>

#include "sludec/embeddings.hpp"
#include "sludec/nn/core.hpp"

namespace sludec {

// Gate blocks are stacked in the order input, forget, output, candidate.
enum Gate : int { kInputGate = 0, kForgetGate = 1, kOutputGate = 2, kCandidate = 3 };

template <typename Scalar>
struct LstmParams {
  int input_dim = 0;
  int hidden = 0;
  Parameter<Scalar> W;  // 4h x k
  Parameter<Scalar> U;  // 4h x h
  Parameter<Scalar> b;  // 4h x 1

  LstmParams() = default;
  LstmParams(int k, int h)
      : input_dim(k), hidden(h), W("lstm.W", 4 * h, k), U("lstm.U", 4 * h, h), b("lstm.b", 4 * h, 1) {
    if (k <= 0 || h <= 0) throw DomainError("lstm sizes must be positive");
  }

  auto W_gate(Gate g) { return W.value.middleRows(g * hidden, hidden); }
  auto U_gate(Gate g) { return U.value.middleRows(g * hidden, hidden); }
  auto b_gate(Gate g) { return b.value.middleRows(g * hidden, hidden); }

  template <typename Rng>
  void init(Rng& rng) {
    uniform_init(W, rng);
    uniform_init(U, rng);
    b.value.setZero();
  }

  std::vector<Parameter<Scalar>*> parameters() { return {&W, &U, &b}; }
};

template <typename Scalar>
struct LstmStep {
  Vector<Scalar> x, h_prev, c_prev;
  Vector<Scalar> i, f, o, u;
  Vector<Scalar> c, h;
  Vector<Scalar> tanh_c;
};

template <typename Scalar, typename DX, typename DH, typename DC>
LstmStep<Scalar> lstm_step(const Eigen::MatrixBase<DX>& x, const Eigen::MatrixBase<DH>& h_prev,
                           const Eigen::MatrixBase<DC>& c_prev, const LstmParams<Scalar>& p) {
  const Eigen::Index h = p.hidden;
  if (x.size() != p.input_dim || h_prev.size() != h || c_prev.size() != h)
    throw DimensionError("lstm_step: x " + shape_of(x) + ", h " + shape_of(h_prev) + ", c " +
                         shape_of(c_prev) + " vs W " + shape_of(p.W.value) + ", U " +
                         shape_of(p.U.value));
  LstmStep<Scalar> s;
  s.x = x;
  s.h_prev = h_prev;
  s.c_prev = c_prev;
  const Vector<Scalar> a = p.W.value * s.x + p.U.value * s.h_prev + p.b.value.col(0);
  s.i = sigmoid(a.segment(kInputGate * h, h));
  s.f = sigmoid(a.segment(kForgetGate * h, h));
  s.o = sigmoid(a.segment(kOutputGate * h, h));
  s.u = tanh(a.segment(kCandidate * h, h));
  s.c = s.i.cwiseProduct(s.u) + s.f.cwiseProduct(s.c_prev);
  s.tanh_c = tanh(s.c);
  s.h = s.o.cwiseProduct(s.tanh_c);
  return s;
}

template <typename Scalar>
struct StepGrads {
  Vector<Scalar> dx, dh_prev, dc_prev;
};

// Accumulates W/U/b gradients for one step given dL/dh and dL/dc at its outputs.
template <typename Scalar>
StepGrads<Scalar> lstm_step_backward(const LstmStep<Scalar>& s, LstmParams<Scalar>& p,
                                     const Vector<Scalar>& dh, const Vector<Scalar>& dc_in) {
  const Eigen::Index h = p.hidden;
  if (s.h.size() != h) throw StateError("lstm_step_backward: no forward step cached");
  const Vector<Scalar> d_o = dh.cwiseProduct(s.tanh_c);
  const Vector<Scalar> dc =
      dc_in + dh.cwiseProduct(s.o).cwiseProduct(tanh_grad_from_output(s.tanh_c));
  const Vector<Scalar> d_i = dc.cwiseProduct(s.u);
  const Vector<Scalar> d_u = dc.cwiseProduct(s.i);
  const Vector<Scalar> d_f = dc.cwiseProduct(s.c_prev);

  Vector<Scalar> da(4 * h);
  da.segment(kInputGate * h, h) = d_i.cwiseProduct(sigmoid_grad_from_output(s.i));
  da.segment(kForgetGate * h, h) = d_f.cwiseProduct(sigmoid_grad_from_output(s.f));
  da.segment(kOutputGate * h, h) = d_o.cwiseProduct(sigmoid_grad_from_output(s.o));
  da.segment(kCandidate * h, h) = d_u.cwiseProduct(tanh_grad_from_output(s.u));

  p.W.grad.noalias() += da * s.x.transpose();
  p.U.grad.noalias() += da * s.h_prev.transpose();
  p.b.grad += da;

  StepGrads<Scalar> g;
  g.dx = p.W.value.transpose() * da;
  g.dh_prev = p.U.value.transpose() * da;
  g.dc_prev = dc.cwiseProduct(s.f);
  return g;
}

template <typename Scalar>
struct LstmTrace {
  std::vector<LstmStep<Scalar>> steps;
  Vector<Scalar> h;  // final hidden state (zero for an empty sequence)
  Vector<Scalar> c;  // final cell state
};

// Runs the LSTM over the rows of inputs from a zero state.
template <typename Scalar, typename Derived>
LstmTrace<Scalar> run_lstm(const Eigen::MatrixBase<Derived>& inputs, const LstmParams<Scalar>& p) {
  LstmTrace<Scalar> t;
  t.h = Vector<Scalar>::Zero(p.hidden);
  t.c = Vector<Scalar>::Zero(p.hidden);
  if (inputs.rows() > 0 && inputs.cols() != p.input_dim)
    throw DimensionError("run_lstm: inputs " + shape_of(inputs) + " vs k=" +
                         std::to_string(p.input_dim));
  for (Eigen::Index r = 0; r < inputs.rows(); ++r) {
    t.steps.push_back(lstm_step(inputs.row(r).transpose(), t.h, t.c, p));
    t.h = t.steps.back().h;
    t.c = t.steps.back().c;
  }
  return t;
}

// Backpropagation through time. Returns d(inputs), one row per step.
template <typename Scalar>
RowMatrix<Scalar> lstm_backward(const LstmTrace<Scalar>& t, LstmParams<Scalar>& p,
                                const Vector<Scalar>& dh_final, const Vector<Scalar>& dc_final) {
  if (t.h.size() != p.hidden) throw StateError("lstm_backward: no forward pass cached");
  RowMatrix<Scalar> dx(static_cast<Eigen::Index>(t.steps.size()), p.input_dim);
  Vector<Scalar> dh = dh_final;
  Vector<Scalar> dc = dc_final;
  for (auto r = static_cast<Eigen::Index>(t.steps.size()) - 1; r >= 0; --r) {
    auto g = lstm_step_backward(t.steps[r], p, dh, dc);
    dx.row(r) = g.dx.transpose();
    dh = std::move(g.dh_prev);
    dc = std::move(g.dc_prev);
  }
  return dx;
}

enum class ContextMode { none, last_1, last_4, all };

std::string to_string(ContextMode mode);

// The selected system turns, oldest first. last_w keeps min(w, L) most recent.
std::vector<SystemTurn> select_context(const std::vector<SystemTurn>& history, ContextMode mode);

// Flattens the selected turns, oldest to newest, into one system-act token stream.
TokenSequence context_tokens(const std::vector<SystemTurn>& selected);

// Final hidden state of the LSTM over the flattened window; zero for an empty window.
template <typename Scalar>
Vector<Scalar> encode_context(const std::vector<SystemTurn>& history, ContextMode mode,
                              const EmbeddingTable& table, const LstmParams<Scalar>& p) {
  const auto lookup = table.lookup(context_tokens(select_context(history, mode)));
  return run_lstm(lookup.vectors.template cast<Scalar>(), p).h;
}

enum class CombineMode { identity, tanh, lstm_input };

std::string to_string(CombineMode mode);

template <typename Scalar>
struct CombinerParams {
  CombineMode mode = CombineMode::identity;
  Parameter<Scalar> Ws;  // h x F (tanh)
  Parameter<Scalar> Wc;  // h x h (tanh)
  Parameter<Scalar> P;   // k x F (lstm_input)

  CombinerParams() = default;
  CombinerParams(CombineMode m, int sentence_dim, int hidden, int embed_dim) : mode(m) {
    if (mode == CombineMode::tanh) {
      Ws = Parameter<Scalar>("combine.Ws", hidden, sentence_dim);
      Wc = Parameter<Scalar>("combine.Wc", hidden, hidden);
    } else if (mode == CombineMode::lstm_input) {
      P = Parameter<Scalar>("combine.P", embed_dim, sentence_dim);
    }
  }

  template <typename Rng>
  void init(Rng& rng) {
    for (auto* q : parameters()) uniform_init(*q, rng);
  }

  std::vector<Parameter<Scalar>*> parameters() {
    switch (mode) {
      case CombineMode::tanh: return {&Ws, &Wc};
      case CombineMode::lstm_input: return {&P};
      default: return {};
    }
  }
};

template <typename Scalar>
struct Combined {
  CombineMode mode = CombineMode::identity;
  Vector<Scalar> s;
  Vector<Scalar> h_ctx;
  Vector<Scalar> c_ctx;
  LstmStep<Scalar> extra;  // lstm_input only
  Vector<Scalar> out;      // h-hat
};

// identity: h-hat = s. tanh: h-hat = tanh(Ws s + Wc h). lstm_input: P s is one more LSTM step
// continuing from the context state, and h-hat is its hidden output.
template <typename Scalar>
Combined<Scalar> combine(const Vector<Scalar>& s, const Vector<Scalar>& h_ctx,
                         const Vector<Scalar>& c_ctx, CombineMode mode,
                         const CombinerParams<Scalar>& cp, const LstmParams<Scalar>* lstm) {
  if (mode != cp.mode)
    throw ConfigError("combine: model built for " + to_string(cp.mode) + " but asked for " +
                      to_string(mode));
  Combined<Scalar> r;
  r.mode = mode;
  r.s = s;
  r.h_ctx = h_ctx;
  r.c_ctx = c_ctx;
  switch (mode) {
    case CombineMode::identity:
      r.out = s;
      break;
    case CombineMode::tanh:
      if (cp.Ws.value.cols() != s.size() || cp.Wc.value.cols() != h_ctx.size())
        throw DimensionError("combine: Ws " + shape_of(cp.Ws.value) + ", Wc " +
                             shape_of(cp.Wc.value) + " vs s " + shape_of(s) + ", h " +
                             shape_of(h_ctx));
      r.out = tanh(cp.Ws.value * s + cp.Wc.value * h_ctx);
      break;
    case CombineMode::lstm_input:
      if (!lstm) throw ConfigError("combine: lstm_input mode requires LSTM parameters");
      if (cp.P.value.cols() != s.size()) throw DimensionError("combine: P does not match s");
      r.extra = lstm_step(cp.P.value * s, h_ctx, c_ctx, *lstm);
      r.out = r.extra.h;
      break;
  }
  return r;
}

template <typename Scalar>
struct CombineGrads {
  Vector<Scalar> ds, dh_ctx, dc_ctx;
};

template <typename Scalar>
CombineGrads<Scalar> combine_backward(const Combined<Scalar>& r, CombinerParams<Scalar>& cp,
                                      LstmParams<Scalar>* lstm, const Vector<Scalar>& d_out) {
  if (r.out.size() == 0) throw StateError("combine_backward: no forward pass cached");
  CombineGrads<Scalar> g;
  switch (r.mode) {
    case CombineMode::identity:
      g.ds = d_out;
      g.dh_ctx = Vector<Scalar>::Zero(r.h_ctx.size());
      g.dc_ctx = Vector<Scalar>::Zero(r.c_ctx.size());
      break;
    case CombineMode::tanh: {
      const Vector<Scalar> dz = d_out.cwiseProduct(tanh_grad_from_output(r.out));
      cp.Ws.grad.noalias() += dz * r.s.transpose();
      cp.Wc.grad.noalias() += dz * r.h_ctx.transpose();
      g.ds = cp.Ws.value.transpose() * dz;
      g.dh_ctx = cp.Wc.value.transpose() * dz;
      g.dc_ctx = Vector<Scalar>::Zero(r.c_ctx.size());
      break;
    }
    case CombineMode::lstm_input: {
      if (!lstm) throw ConfigError("combine_backward: lstm_input mode requires LSTM parameters");
      auto sg = lstm_step_backward(r.extra, *lstm, d_out, Vector<Scalar>::Zero(d_out.size()).eval());
      cp.P.grad.noalias() += sg.dx * r.s.transpose();
      g.ds = cp.P.value.transpose() * sg.dx;
      g.dh_ctx = std::move(sg.dh_prev);
      g.dc_ctx = std::move(sg.dc_prev);
      break;
    }
  }
  return g;
}

}  // namespace sludec
