#pragma once

#include <cstddef>

#include "seqembed/tensor.hpp"

namespace seqembed {

/// LSTM weights. Rows of w_input/w_recur and entries of bias are grouped in
/// four H-sized blocks ordered (input, forget, candidate, output).
struct LstmParams {
  Parameter w_input;  // 4H x C
  Parameter w_recur;  // 4H x H
  Parameter bias;     // 4H

  std::size_t hidden_dim() const { return bias.value.size() / 4; }
  std::size_t input_dim() const { return w_input.value.shape[1]; }
};

LstmParams make_lstm_params(const std::string& name_prefix, std::size_t input_dim,
                            std::size_t hidden_dim);

/// Activations recorded during the forward recurrence, needed for
/// backpropagation through time. Rows at step >= valid are zero.
struct LstmCache {
  Tensor gates;   // T x 4H, post-activation (sigmoid / tanh) gate values
  Tensor cells;   // T x H
  Tensor hidden;  // T x H
  std::size_t valid = 0;
};

/// Runs the recurrence over the first input.valid_len steps. Gates use the
/// logistic sigmoid; candidate and hidden output use tanh.
void lstm_forward(const MaskedSequence& input, const LstmParams& params,
                  LstmCache& cache);

/// Hidden state at step valid-1 (the last step carrying content).
Tensor lstm_last_hidden(const LstmCache& cache);

/// All hidden states as a masked sequence; rows >= valid are zero.
MaskedSequence lstm_all_hidden(const LstmCache& cache);

/// Full backprop through time. d_hidden holds dL/dh_t for every step (rows
/// >= valid must be zero). Accumulates parameter gradients; when d_input is
/// non-null it is overwritten with dL/dx.
void lstm_backward(const MaskedSequence& input, const LstmParams& params,
                   const LstmCache& cache, const Tensor& d_hidden, Tensor& d_w_input,
                   Tensor& d_w_recur, Tensor& d_bias, MaskedSequence* d_input);

// ---------------------------------------------------------------------------
// Bidirectional LSTM: a forward pass over steps 0..valid-1 concatenated with
// a backward pass over the reversed valid steps. Output is T x 2H with the
// forward direction in columns [0, H) and the backward direction, re-aligned
// to input positions, in columns [H, 2H).
// ---------------------------------------------------------------------------

struct BiLstmParams {
  LstmParams fwd;
  LstmParams bwd;
};

BiLstmParams make_bilstm_params(const std::string& name_prefix, std::size_t input_dim,
                                std::size_t hidden_dim_per_dir);

struct BiLstmCache {
  LstmCache fwd;
  LstmCache bwd;
  MaskedSequence reversed_input;
};

MaskedSequence bilstm_forward(const MaskedSequence& input, const BiLstmParams& params,
                              BiLstmCache& cache);

void bilstm_backward(const MaskedSequence& input, const BiLstmParams& params,
                     const BiLstmCache& cache, const MaskedSequence& d_output,
                     Tensor& d_fwd_w_input, Tensor& d_fwd_w_recur, Tensor& d_fwd_bias,
                     Tensor& d_bwd_w_input, Tensor& d_bwd_w_recur, Tensor& d_bwd_bias,
                     MaskedSequence* d_input);

}  // namespace seqembed
