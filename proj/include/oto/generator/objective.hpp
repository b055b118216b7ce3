#pragma once

#include <span>
#include <vector>

#include "oto/generator/transformer.hpp"

namespace oto::generator {

/// One teacher-forced sequence: decoder input [BOS, y...] and output [y..., EOS].
template <class S>
struct SequenceSample {
  const Mat<S>* image = nullptr;
  std::vector<int> prompt;
  std::vector<int> input;
  std::vector<int> output;
};

/// Token cross-entropy summed over the batch and divided by its target token
/// count. With `with_grad`, adds the gradient into `p.grad`.
template <class S>
double generator_objective(const Seq2Seq<S>& net, nn::ParameterStore<S>& p, std::span<const SequenceSample<S>> batch,
                           bool with_grad) {
  long tokens = 0;
  for (const auto& s : batch) tokens += static_cast<long>(s.output.size());
  if (tokens == 0) return 0.0;
  const double scale = 1.0 / static_cast<double>(tokens);
  double loss = 0.0;
  for (const auto& s : batch) {
    EncodeCache<S> ec;
    DecodeCache<S> dc;
    const Mat<S> memory = net.encode(p, *s.image, s.prompt, with_grad ? &ec : nullptr);
    const Mat<S> logits = net.decode(p, memory, s.input, with_grad ? &dc : nullptr);
    Mat<S> dlogits;
    loss += token_cross_entropy(logits, s.output, scale, with_grad ? &dlogits : nullptr);
    if (with_grad) net.backward_encode(p, net.backward_decode(p, dlogits, dc), ec);
  }
  return loss * scale;
}

}  // namespace oto::generator
