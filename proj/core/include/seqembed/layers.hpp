#pragma once

#include <cstdint>
#include <vector>

#include "seqembed/tensor.hpp"

namespace seqembed {

/// Output length of a strided sliding window: floor((len - kernel) / stride) + 1.
/// Requires len >= kernel.
std::size_t strided_out_len(std::size_t len, std::size_t kernel, std::size_t stride);

// ---------------------------------------------------------------------------
// 1-D convolution over a masked step sequence.
//
// weights: K x Cin x F (filter index contiguous), bias: F.
// Output rows beyond the propagated valid length stay zero, so padding can
// never leak through. Backward accumulates into d_weights/d_bias and, when
// d_input is non-null, overwrites it with the input gradient.
// ---------------------------------------------------------------------------

MaskedSequence conv1d_forward(const MaskedSequence& input, const Tensor& weights,
                              const Tensor& bias, std::size_t stride,
                              const char* layer_name);

void conv1d_backward(const MaskedSequence& input, const Tensor& weights,
                     std::size_t stride, const MaskedSequence& d_output,
                     Tensor& d_weights, Tensor& d_bias, MaskedSequence* d_input);

// ---------------------------------------------------------------------------
// Elementwise ReLU. Gradient at exactly zero is defined as zero.
// ---------------------------------------------------------------------------

MaskedSequence relu_forward(const MaskedSequence& input);

void relu_backward(const MaskedSequence& pre_activation, const MaskedSequence& d_output,
                   MaskedSequence& d_input);

// ---------------------------------------------------------------------------
// Per-channel max pooling. Windows cover valid steps only. Backward routes
// each output gradient to its argmax position; ties go to the lowest index.
// ---------------------------------------------------------------------------

MaskedSequence maxpool1d_forward(const MaskedSequence& input, std::size_t kernel,
                                 std::size_t stride, const char* layer_name,
                                 std::vector<std::uint32_t>* argmax = nullptr);

void maxpool1d_backward(const MaskedSequence& input, std::size_t kernel,
                        std::size_t stride, const std::vector<std::uint32_t>& argmax,
                        const MaskedSequence& d_output, MaskedSequence& d_input);

// ---------------------------------------------------------------------------
// Affine map y = W^T x + b with weights D x O, bias O.
// ---------------------------------------------------------------------------

Tensor dense_forward(const Tensor& input, const Tensor& weights, const Tensor& bias);

void dense_backward(const Tensor& input, const Tensor& weights, const Tensor& d_output,
                    Tensor& d_weights, Tensor& d_bias, Tensor* d_input);

}  // namespace seqembed
