#pragma once

#include <memory>
#include <string>
#include <vector>

#include "sludec/context_encoder.hpp"
#include "sludec/embeddings.hpp"
#include "sludec/nn/core.hpp"
#include "sludec/nn/optim.hpp"
#include "sludec/sentence_encoder.hpp"

namespace sludec {

enum class ModelVariant { cnn, cnn_lstm_w1, cnn_lstm_w4, cnn_lstm_w, lstm_all };

ModelVariant parse_variant(const std::string& name);
std::string to_string(ModelVariant v);
ContextMode context_mode(ModelVariant v);
CombineMode combine_mode(ModelVariant v);

struct NetworkShape {
  int embed_dim = 100;
  std::vector<int> windows{3, 4, 5};
  int maps = 100;
  int hidden = 100;
  ModelVariant variant = ModelVariant::cnn_lstm_w4;
  std::vector<int> head_sizes;

  int sentence_dim() const { return maps * static_cast<int>(windows.size()); }
  int feature_dim() const {
    return combine_mode(variant) == CombineMode::identity ? sentence_dim() : hidden;
  }
  bool uses_context() const { return context_mode(variant) != ContextMode::none; }
  bool operator==(const NetworkShape&) const = default;
};

// One example as embedding-table rows: each hypothesis with its raw confidence, and the
// flattened context window.
struct NetworkInput {
  std::vector<std::vector<int>> hypotheses;
  std::vector<double> confidences;
  std::vector<int> context_rows;
};

// Sentence CNN, optional LSTM context, combiner and a set of softmax heads over h-hat.
// Forward passes are const and return their own cache, so a trained network can be shared
// by concurrent readers; backward accumulates into the parameter gradients.
template <typename Scalar>
class Network {
 public:
  struct Pass {
    SentenceRep<Scalar> sentence;
    LstmTrace<Scalar> context;
    std::vector<int> context_rows;
    Combined<Scalar> combined;
    DropoutMask<Scalar> mask;
    Vector<Scalar> features;  // h-hat after dropout
    std::vector<Vector<Scalar>> probs;
    bool complete = false;
  };

  Network(NetworkShape shape, std::shared_ptr<const EmbeddingTable> table)
      : shape_(std::move(shape)), table_(std::move(table)) {
    if (!table_) throw DomainError("network needs an embedding table");
    if (table_->dim() != shape_.embed_dim)
      throw DimensionError("embedding table k=" + std::to_string(table_->dim()) +
                           " vs network k=" + std::to_string(shape_.embed_dim));
    if (shape_.head_sizes.empty()) throw DomainError("network needs at least one head");
    bank_ = ConvFilterBank<Scalar>(shape_.embed_dim, shape_.windows, shape_.maps);
    if (shape_.uses_context()) {
      lstm_ = LstmParams<Scalar>(shape_.embed_dim, shape_.hidden);
      row_slot_.assign(table_->size(), -1);
      const auto rows = table_->trainable_rows();
      act_embeddings_ = Parameter<Scalar>("embed.system_act", static_cast<Eigen::Index>(rows.size()),
                                          shape_.embed_dim);
      for (std::size_t i = 0; i < rows.size(); ++i) {
        row_slot_[rows[i]] = static_cast<int>(i);
        act_embeddings_.value.row(static_cast<Eigen::Index>(i)) =
            table_->row(rows[i]).transpose().template cast<Scalar>();
      }
    }
    combiner_ = CombinerParams<Scalar>(combine_mode(shape_.variant), shape_.sentence_dim(),
                                       shape_.hidden, shape_.embed_dim);
    for (std::size_t i = 0; i < shape_.head_sizes.size(); ++i) {
      const int n = shape_.head_sizes[i];
      if (n < 1) throw DomainError("head sizes must be positive");
      head_W_.emplace_back("head" + std::to_string(i) + ".W", n, shape_.feature_dim());
      head_b_.emplace_back("head" + std::to_string(i) + ".b", n, 1);
    }
  }

  // Weights uniform(-0.1, 0.1), biases zero; tuned system-act rows start from the table.
  template <typename Rng>
  void init(Rng& rng) {
    bank_.init(rng);
    if (shape_.uses_context()) lstm_.init(rng);
    combiner_.init(rng);
    for (auto& w : head_W_) uniform_init(w, rng);
    for (auto& b : head_b_) b.value.setZero();
  }

  const NetworkShape& shape() const { return shape_; }
  const EmbeddingTable& table() const { return *table_; }
  std::shared_ptr<const EmbeddingTable> table_ptr() const { return table_; }
  std::size_t num_heads() const { return head_W_.size(); }

  // Vector used for a context token: the tuned copy when the row is trainable.
  Vector<Scalar> context_embedding(int row) const {
    if (row < 0 || row >= table_->size()) throw DomainError("context row out of range");
    if (!row_slot_.empty() && row_slot_[row] >= 0)
      return act_embeddings_.value.row(row_slot_[row]).transpose();
    return table_->row(row).template cast<Scalar>();
  }

  template <typename Rng>
  Pass forward(const NetworkInput& in, Mode mode, double dropout, Rng& rng) const {
    Pass pass;
    std::vector<RowMatrixD> hyps;
    hyps.reserve(in.hypotheses.size());
    for (const auto& rows : in.hypotheses) {
      RowMatrixD x(static_cast<Eigen::Index>(rows.size()), shape_.embed_dim);
      for (std::size_t i = 0; i < rows.size(); ++i) {
        if (rows[i] < 0 || rows[i] >= table_->size()) throw DomainError("hypothesis row out of range");
        x.row(static_cast<Eigen::Index>(i)) = table_->row(rows[i]).transpose();
      }
      hyps.push_back(std::move(x));
    }
    pass.sentence = encode_sentence(hyps, in.confidences, bank_);

    Vector<Scalar> h_ctx, c_ctx;
    if (shape_.uses_context()) {
      pass.context_rows = in.context_rows;
      RowMatrix<Scalar> xs(static_cast<Eigen::Index>(in.context_rows.size()), shape_.embed_dim);
      for (std::size_t t = 0; t < in.context_rows.size(); ++t)
        xs.row(static_cast<Eigen::Index>(t)) = context_embedding(in.context_rows[t]).transpose();
      pass.context = run_lstm(xs, lstm_);
      h_ctx = pass.context.h;
      c_ctx = pass.context.c;
    }
    pass.combined = combine(pass.sentence.s, h_ctx, c_ctx, combiner_.mode, combiner_,
                            shape_.uses_context() ? &lstm_ : nullptr);
    pass.mask = make_dropout_mask<Scalar>(pass.combined.out.size(), dropout, mode, rng);
    pass.features = dropout_apply(pass.combined.out, pass.mask);

    for (std::size_t i = 0; i < head_W_.size(); ++i) {
      const Vector<Scalar> logits = affine<Scalar>(pass.features, head_W_[i].value, head_b_[i].value);
      if (!all_finite(logits)) throw NumericError("network head produced non-finite logits");
      pass.probs.push_back(softmax(logits));
    }
    pass.complete = true;
    return pass;
  }

  Pass predict(const NetworkInput& in) const {
    std::mt19937_64 unused(0);
    return forward(in, Mode::infer, 0.0, unused);
  }

  Scalar loss(const Pass& pass, const std::vector<int>& targets,
              const std::vector<double>& head_weights) const {
    check_targets(pass, targets, head_weights);
    Scalar total = 0;
    for (std::size_t i = 0; i < pass.probs.size(); ++i)
      if (head_weights[i] != 0.0)
        total += static_cast<Scalar>(head_weights[i]) * nll_loss(pass.probs[i], targets[i]);
    return total;
  }

  // Accumulates scale * d(loss)/d(params) into every parameter's grad.
  void backward(const Pass& pass, const std::vector<int>& targets,
                const std::vector<double>& head_weights, Scalar scale = Scalar(1)) {
    if (!pass.complete) throw StateError("backward called before a completed forward pass");
    check_targets(pass, targets, head_weights);

    Vector<Scalar> d_features = Vector<Scalar>::Zero(pass.features.size());
    for (std::size_t i = 0; i < pass.probs.size(); ++i) {
      if (head_weights[i] == 0.0) continue;
      const Vector<Scalar> g =
          (scale * static_cast<Scalar>(head_weights[i])) * softmax_nll_grad(pass.probs[i], targets[i]);
      d_features += affine_backward(pass.features, g, head_W_[i], &head_b_[i]);
    }
    const Vector<Scalar> d_out = dropout_backward(d_features, pass.mask);
    auto cg = combine_backward(pass.combined, combiner_, shape_.uses_context() ? &lstm_ : nullptr,
                               d_out);
    if (shape_.uses_context()) {
      const RowMatrix<Scalar> dx = lstm_backward(pass.context, lstm_, cg.dh_ctx, cg.dc_ctx);
      for (std::size_t t = 0; t < pass.context_rows.size(); ++t) {
        const int slot = row_slot_[pass.context_rows[t]];
        if (slot >= 0) act_embeddings_.grad.row(slot) += dx.row(static_cast<Eigen::Index>(t));
      }
    }
    sentence_backward(pass.sentence, bank_, cg.ds);
  }

  std::vector<Parameter<Scalar>*> parameters() {
    std::vector<Parameter<Scalar>*> out;
    if (shape_.uses_context()) out.push_back(&act_embeddings_);
    for (auto* p : bank_.parameters()) out.push_back(p);
    if (shape_.uses_context())
      for (auto* p : lstm_.parameters()) out.push_back(p);
    for (auto* p : combiner_.parameters()) out.push_back(p);
    for (std::size_t i = 0; i < head_W_.size(); ++i) {
      out.push_back(&head_W_[i]);
      out.push_back(&head_b_[i]);
    }
    return out;
  }

  std::vector<const Parameter<Scalar>*> parameters() const {
    auto mut = const_cast<Network*>(this)->parameters();
    return {mut.begin(), mut.end()};
  }

  Parameter<Scalar>* find_parameter(const std::string& name) {
    for (auto* p : parameters())
      if (p->name == name) return p;
    return nullptr;
  }

  void zero_grad() {
    for (auto* p : parameters()) p->zero_grad();
  }

  bool parameters_finite() const {
    for (const auto* p : parameters())
      if (!all_finite(p->value)) return false;
    return true;
  }

 private:
  void check_targets(const Pass& pass, const std::vector<int>& targets,
                     const std::vector<double>& head_weights) const {
    if (targets.size() != pass.probs.size() || head_weights.size() != pass.probs.size())
      throw DimensionError("network: " + std::to_string(pass.probs.size()) + " heads but " +
                           std::to_string(targets.size()) + " targets and " +
                           std::to_string(head_weights.size()) + " head weights");
  }

  NetworkShape shape_;
  std::shared_ptr<const EmbeddingTable> table_;
  ConvFilterBank<Scalar> bank_;
  LstmParams<Scalar> lstm_;
  CombinerParams<Scalar> combiner_;
  Parameter<Scalar> act_embeddings_;
  std::vector<int> row_slot_;
  std::vector<Parameter<Scalar>> head_W_;
  std::vector<Parameter<Scalar>> head_b_;
};

}  // namespace sludec
