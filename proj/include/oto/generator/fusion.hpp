#pragma once

#include <cmath>
#include <string>
#include <string_view>
#include <vector>

#include "oto/core/eigen.hpp"
#include "oto/core/error.hpp"
#include "oto/dataset/labels.hpp"
#include "oto/generator/vocabulary.hpp"
#include "oto/nn/layers.hpp"

namespace oto::generator {

inline constexpr std::string_view kDefaultPromptTemplate =
    "Category: {class}. Given an otoscopic image, generate a patient-friendly summary.";

/// Replaces every "{class}" with the display name of `label`.
/// Throws UnknownPlaceholder when the template has none.
std::string render_prompt(ClassLabel label, std::string_view tmpl = kDefaultPromptTemplate);

std::vector<int> prompt_token_ids(ClassLabel label, const Vocabulary& vocab,
                                  std::string_view tmpl = kDefaultPromptTemplate);

template <class S>
struct PromptSequence {
  std::vector<int> token_ids;
  Mat<S> embedded;  // tokens x d
};

template <class S>
struct FusedSequence {
  Mat<S> data;  // tokens x d
  bool position_encoded = false;
};

/// `table` is the vocab x d token embedding.
template <class S>
PromptSequence<S> build_prompt(ClassLabel label, const Vocabulary& vocab, const Mat<S>& table,
                               std::string_view tmpl = kDefaultPromptTemplate) {
  PromptSequence<S> out;
  out.token_ids = prompt_token_ids(label, vocab, tmpl);
  out.embedded = nn::embedding_forward(table, std::span<const int>(out.token_ids));
  return out;
}

/// Row t = prompt.embedded[t] + (image_emb W^T + b). `weight` is d x 512.
template <class S, class E>
FusedSequence<S> fuse(const Eigen::MatrixBase<E>& image_emb, const PromptSequence<S>& prompt, const Mat<S>& weight,
                      const Mat<S>& bias) {
  if (image_emb.size() != weight.cols()) {
    throw ShapeError("image embedding has " + std::to_string(image_emb.size()) + " entries, projection expects " +
                     std::to_string(weight.cols()));
  }
  if (prompt.embedded.cols() != weight.rows() || bias.size() != weight.rows()) {
    throw ShapeError("projection output does not match the prompt embedding width");
  }
  Mat<S> v(1, weight.cols());
  for (Eigen::Index i = 0; i < v.cols(); ++i) v(0, i) = static_cast<S>(image_emb(i));
  const Mat<S> proj = nn::dense_forward(v, weight, bias);
  FusedSequence<S> out;
  out.data = prompt.embedded.rowwise() + proj.row(0);
  return out;
}

/// Entry (k, 2i) = sin(k / 10000^(2i/d)), (k, 2i+1) = cos(same). Throws OddDimension.
template <class S = double>
Mat<S> positional_encoding(int seq_len, int d) {
  if (d % 2 != 0) throw OddDimension("positional encoding needs an even width, got " + std::to_string(d));
  if (seq_len < 0 || d < 0) throw InvalidArgument("negative positional table size");
  Mat<S> pe(seq_len, d);
  for (int k = 0; k < seq_len; ++k) {
    for (int i = 0; i < d / 2; ++i) {
      const double angle = static_cast<double>(k) / std::pow(10000.0, 2.0 * i / static_cast<double>(d));
      pe(k, 2 * i) = static_cast<S>(std::sin(angle));
      pe(k, 2 * i + 1) = static_cast<S>(std::cos(angle));
    }
  }
  return pe;
}

template <class S>
FusedSequence<S> add_positional(FusedSequence<S> fused) {
  if (fused.position_encoded) throw DoubleEncoding("sequence already carries positional encodings");
  fused.data += positional_encoding<S>(static_cast<int>(fused.data.rows()), static_cast<int>(fused.data.cols()));
  fused.position_encoded = true;
  return fused;
}

}  // namespace oto::generator
