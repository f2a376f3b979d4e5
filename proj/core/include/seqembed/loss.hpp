#pragma once

#include <cstddef>

#include "seqembed/tensor.hpp"

namespace seqembed {

struct SoftmaxCeResult {
  double loss = 0.0;
  Tensor probabilities;
};

/// Numerically stabilized softmax + categorical cross entropy for one example.
/// loss = -log p[true_class]; probabilities sum to 1 within 1e-9.
SoftmaxCeResult softmax_cross_entropy(const Tensor& logits, std::size_t true_class);

/// Max-subtracted softmax alone.
Tensor softmax(const Tensor& logits);

/// Gradient of the loss w.r.t. the logits: p - onehot(true_class).
Tensor softmax_ce_grad(const Tensor& probabilities, std::size_t true_class);

}  // namespace seqembed
