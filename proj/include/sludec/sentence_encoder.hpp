#pragma once

#include <algorithm>
#include <string>
#include <vector>

#include "sludec/embeddings.hpp"
#include "sludec/nn/core.hpp"

namespace sludec {

// Convolution filters for each window size l: maps filters of length l*k plus a bias each.
template <typename Scalar>
struct ConvFilterBank {
  int embed_dim = 0;
  int maps = 0;
  std::vector<int> windows;
  std::vector<Parameter<Scalar>> weights;  // maps x (l*k)
  std::vector<Parameter<Scalar>> biases;   // maps x 1

  ConvFilterBank() = default;
  ConvFilterBank(int k, std::vector<int> window_sizes, int maps_per_window)
      : embed_dim(k), maps(maps_per_window), windows(std::move(window_sizes)) {
    if (k <= 0 || maps <= 0 || windows.empty())
      throw DomainError("filter bank needs k > 0, maps > 0 and at least one window");
    for (int l : windows) {
      if (l <= 0) throw DomainError("window sizes must be positive");
      weights.emplace_back("conv.w" + std::to_string(l) + ".weight", maps, l * k);
      biases.emplace_back("conv.w" + std::to_string(l) + ".bias", maps, 1);
    }
  }

  int output_dim() const { return maps * static_cast<int>(windows.size()); }
  int max_window() const { return *std::max_element(windows.begin(), windows.end()); }

  template <typename Rng>
  void init(Rng& rng) {
    for (auto& w : weights) uniform_init(w, rng);
    for (auto& b : biases) b.value.setZero();
  }

  std::vector<Parameter<Scalar>*> parameters() {
    std::vector<Parameter<Scalar>*> out;
    for (std::size_t i = 0; i < windows.size(); ++i) {
      out.push_back(&weights[i]);
      out.push_back(&biases[i]);
    }
    return out;
  }
};

// Pooled features of one hypothesis plus what backward needs.
template <typename Scalar>
struct HypothesisFeatures {
  Vector<Scalar> features;
  RowMatrix<Scalar> padded;              // m' x k input after padding
  std::vector<Eigen::VectorXi> argmax;   // per window: winning window start per filter
};

// Right-pads with zero rows so every window fits; an empty hypothesis becomes all padding.
template <typename Scalar, typename Derived>
RowMatrix<Scalar> pad_hypothesis(const Eigen::MatrixBase<Derived>& x, Eigen::Index k,
                                 Eigen::Index min_len) {
  if (x.rows() > 0 && x.cols() != k)
    throw DimensionError("hypothesis embeddings " + shape_of(x) + " do not match k=" +
                         std::to_string(k));
  RowMatrix<Scalar> out = RowMatrix<Scalar>::Zero(std::max(x.rows(), min_len), k);
  if (x.rows() > 0) out.topRows(x.rows()) = x.template cast<Scalar>();
  return out;
}

// Convolution with tanh, one feature map per filter, max pooling over time.
template <typename Scalar, typename Derived>
HypothesisFeatures<Scalar> encode_hypothesis(const Eigen::MatrixBase<Derived>& embeddings,
                                             const ConvFilterBank<Scalar>& bank) {
  const Eigen::Index k = bank.embed_dim;
  HypothesisFeatures<Scalar> out;
  out.padded = pad_hypothesis<Scalar>(embeddings, k, bank.max_window());
  out.features.resize(bank.output_dim());
  out.argmax.resize(bank.windows.size());
  const Eigen::Index m = out.padded.rows();

  for (std::size_t w = 0; w < bank.windows.size(); ++w) {
    const Eigen::Index l = bank.windows[w];
    const Eigen::Index n = m - l + 1;
    // Row i of the window matrix is x_i ++ ... ++ x_{i+l-1}, contiguous in row-major storage.
    Eigen::Map<const RowMatrix<Scalar>, 0, Eigen::OuterStride<>> windows(
        out.padded.data(), n, l * k, Eigen::OuterStride<>(k));
    Matrix<Scalar> z = windows * bank.weights[w].value.transpose();
    z.rowwise() += bank.biases[w].value.col(0).transpose();
    // tanh is monotone, so pooling the pre-activations selects the same window.
    out.argmax[w].resize(bank.maps);
    for (int f = 0; f < bank.maps; ++f) {
      const auto pooled = max_pool(z.col(f));
      out.argmax[w](f) = static_cast<int>(pooled.index);
      out.features(static_cast<Eigen::Index>(w) * bank.maps + f) = std::tanh(pooled.value);
    }
  }
  return out;
}

template <typename Scalar>
Vector<Scalar> encode_hypothesis(const TokenSequence& tokens, const EmbeddingTable& table,
                                 const ConvFilterBank<Scalar>& bank) {
  if (table.dim() != bank.embed_dim)
    throw DimensionError("embedding k=" + std::to_string(table.dim()) + " vs filter bank k=" +
                         std::to_string(bank.embed_dim));
  return encode_hypothesis(table.lookup(tokens).vectors, bank).features;
}

// Accumulates filter gradients for upstream d(features); optionally returns d(input) over the
// unpadded rows.
template <typename Scalar, typename DF>
void hypothesis_backward(const HypothesisFeatures<Scalar>& cache, ConvFilterBank<Scalar>& bank,
                         const Eigen::MatrixBase<DF>& d_features, RowMatrix<Scalar>* d_input,
                         Eigen::Index input_rows = -1) {
  if (cache.argmax.size() != bank.windows.size() || cache.features.size() != bank.output_dim())
    throw StateError("hypothesis_backward: no forward pass cached");
  if (d_features.size() != bank.output_dim())
    throw DimensionError("hypothesis_backward: upstream gradient has wrong size");
  const Eigen::Index k = bank.embed_dim;
  RowMatrix<Scalar> dx;
  if (d_input) dx = RowMatrix<Scalar>::Zero(cache.padded.rows(), k);

  for (std::size_t w = 0; w < bank.windows.size(); ++w) {
    const Eigen::Index l = bank.windows[w];
    for (int f = 0; f < bank.maps; ++f) {
      const Eigen::Index idx = static_cast<Eigen::Index>(w) * bank.maps + f;
      const Scalar c = cache.features(idx);
      const Scalar dz = d_features(idx) * (Scalar(1) - c * c);
      if (dz == Scalar(0)) continue;
      const Eigen::Index r = cache.argmax[w](f);
      Eigen::Map<const Eigen::Matrix<Scalar, 1, Eigen::Dynamic>> window(cache.padded.data() + r * k,
                                                                        l * k);
      bank.weights[w].grad.row(f) += dz * window;
      bank.biases[w].grad(f, 0) += dz;
      if (d_input) {
        Eigen::Map<Eigen::Matrix<Scalar, 1, Eigen::Dynamic>> dwin(dx.data() + r * k, l * k);
        dwin += dz * bank.weights[w].value.row(f);
      }
    }
  }
  if (d_input) {
    const Eigen::Index rows = input_rows < 0 ? dx.rows() : input_rows;
    *d_input = dx.topRows(rows);
  }
}

struct NBestEntry {
  TokenSequence tokens;
  double confidence = 0;
};
using NBestList = std::vector<NBestEntry>;

// Scores become a distribution: any negative score marks the list as log-domain and all
// scores are exponentiated first. An all-zero list becomes uniform.
std::vector<double> normalize_confidences(const std::vector<double>& raw);

template <typename Scalar>
struct SentenceRep {
  Vector<Scalar> s;
  std::vector<HypothesisFeatures<Scalar>> hypotheses;
  std::vector<Scalar> weights;  // normalized p_j

  bool has_cache() const { return !hypotheses.empty(); }
};

// s = sum_j p_j f_j over the hypotheses, after normalizing the confidences.
template <typename Scalar>
SentenceRep<Scalar> encode_sentence(const std::vector<RowMatrixD>& hypotheses,
                                    const std::vector<double>& confidences,
                                    const ConvFilterBank<Scalar>& bank) {
  if (hypotheses.empty()) throw DomainError("encode_sentence: empty n-best list");
  if (hypotheses.size() != confidences.size())
    throw DimensionError("encode_sentence: " + std::to_string(hypotheses.size()) +
                         " hypotheses but " + std::to_string(confidences.size()) + " confidences");
  const auto p = normalize_confidences(confidences);
  SentenceRep<Scalar> rep;
  rep.s = Vector<Scalar>::Zero(bank.output_dim());
  std::vector<Vector<Scalar>> terms;
  for (std::size_t j = 0; j < hypotheses.size(); ++j) {
    rep.hypotheses.push_back(encode_hypothesis(hypotheses[j], bank));
    rep.weights.push_back(static_cast<Scalar>(p[j]));
    terms.push_back(rep.weights.back() * rep.hypotheses.back().features);
  }
  // Accumulate in a canonical order so the sum is bit-identical under any list permutation.
  std::sort(terms.begin(), terms.end(), [](const Vector<Scalar>& a, const Vector<Scalar>& b) {
    return std::lexicographical_compare(a.data(), a.data() + a.size(), b.data(), b.data() + b.size());
  });
  for (const auto& t : terms) rep.s += t;
  return rep;
}

// Keeps the first max_n entries of the list.
template <typename Scalar>
SentenceRep<Scalar> encode_sentence(const NBestList& nbest, const EmbeddingTable& table,
                                    const ConvFilterBank<Scalar>& bank, std::size_t max_n = 10) {
  if (nbest.empty()) throw DomainError("encode_sentence: empty n-best list");
  std::vector<RowMatrixD> hyps;
  std::vector<double> conf;
  for (std::size_t j = 0; j < std::min(max_n, nbest.size()); ++j) {
    hyps.push_back(table.lookup(nbest[j].tokens).vectors);
    conf.push_back(nbest[j].confidence);
  }
  return encode_sentence(hyps, conf, bank);
}

template <typename Scalar, typename DS>
void sentence_backward(const SentenceRep<Scalar>& rep, ConvFilterBank<Scalar>& bank,
                       const Eigen::MatrixBase<DS>& ds,
                       std::vector<RowMatrix<Scalar>>* d_inputs = nullptr,
                       const std::vector<Eigen::Index>* input_rows = nullptr) {
  if (!rep.has_cache()) throw StateError("sentence_backward: no forward pass cached");
  if (d_inputs) d_inputs->assign(rep.hypotheses.size(), RowMatrix<Scalar>());
  for (std::size_t j = 0; j < rep.hypotheses.size(); ++j) {
    const Vector<Scalar> df = rep.weights[j] * ds;
    hypothesis_backward(rep.hypotheses[j], bank, df, d_inputs ? &(*d_inputs)[j] : nullptr,
                        input_rows ? (*input_rows)[j] : -1);
  }
}

}  // namespace sludec
