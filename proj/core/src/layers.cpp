#include "seqembed/layers.hpp"

#include <string>

#include "seqembed/error.hpp"

namespace seqembed {

std::size_t strided_out_len(std::size_t len, std::size_t kernel, std::size_t stride) {
  return (len - kernel) / stride + 1;
}

namespace {

void check_window_precondition(const MaskedSequence& input, std::size_t kernel,
                               const char* layer_name) {
  if (input.valid_len < kernel) {
    throw DataError(std::string(layer_name) + ": valid length " +
                    std::to_string(input.valid_len) + " is shorter than kernel " +
                    std::to_string(kernel));
  }
  if (input.valid_len > input.step_count()) {
    throw ConfigError(std::string(layer_name) + ": valid length exceeds step count");
  }
}

}  // namespace

MaskedSequence conv1d_forward(const MaskedSequence& input, const Tensor& weights,
                              const Tensor& bias, std::size_t stride,
                              const char* layer_name) {
  const std::size_t kernel = weights.shape[0];
  const std::size_t in_ch = weights.shape[1];
  const std::size_t filters = weights.shape[2];
  check_window_precondition(input, kernel, layer_name);
  if (input.channels() != in_ch) {
    throw ConfigError(std::string(layer_name) + ": input has " +
                      std::to_string(input.channels()) + " channels, weights expect " +
                      std::to_string(in_ch));
  }

  const std::size_t out_steps = strided_out_len(input.step_count(), kernel, stride);
  const std::size_t out_valid = strided_out_len(input.valid_len, kernel, stride);
  MaskedSequence out(out_steps, filters, out_valid);

  const double* w = weights.data.data();
  for (std::size_t t = 0; t < out_valid; ++t) {
    double* out_row = out.steps.row(t);
    for (std::size_t f = 0; f < filters; ++f) out_row[f] = bias.data[f];
    for (std::size_t k = 0; k < kernel; ++k) {
      const double* in_row = input.steps.row(t * stride + k);
      for (std::size_t c = 0; c < in_ch; ++c) {
        const double v = in_row[c];
        if (v == 0.0) continue;  // one-hot and padded inputs are mostly zero
        const double* w_row = w + (k * in_ch + c) * filters;
        for (std::size_t f = 0; f < filters; ++f) out_row[f] += v * w_row[f];
      }
    }
  }
  return out;
}

void conv1d_backward(const MaskedSequence& input, const Tensor& weights,
                     std::size_t stride, const MaskedSequence& d_output,
                     Tensor& d_weights, Tensor& d_bias, MaskedSequence* d_input) {
  const std::size_t kernel = weights.shape[0];
  const std::size_t in_ch = weights.shape[1];
  const std::size_t filters = weights.shape[2];
  const std::size_t out_valid = d_output.valid_len;

  if (d_input) {
    *d_input = MaskedSequence(input.step_count(), in_ch, input.valid_len);
  }
  const double* w = weights.data.data();
  double* dw = d_weights.data.data();
  for (std::size_t t = 0; t < out_valid; ++t) {
    const double* d_out_row = d_output.steps.row(t);
    for (std::size_t f = 0; f < filters; ++f) d_bias.data[f] += d_out_row[f];
    for (std::size_t k = 0; k < kernel; ++k) {
      const std::size_t in_t = t * stride + k;
      const double* in_row = input.steps.row(in_t);
      double* d_in_row = d_input ? d_input->steps.row(in_t) : nullptr;
      for (std::size_t c = 0; c < in_ch; ++c) {
        const std::size_t off = (k * in_ch + c) * filters;
        const double v = in_row[c];
        if (v != 0.0) {
          double* dw_row = dw + off;
          for (std::size_t f = 0; f < filters; ++f) dw_row[f] += v * d_out_row[f];
        }
        if (d_in_row) {
          const double* w_row = w + off;
          double acc = 0.0;
          for (std::size_t f = 0; f < filters; ++f) acc += w_row[f] * d_out_row[f];
          d_in_row[c] += acc;
        }
      }
    }
  }
}

MaskedSequence relu_forward(const MaskedSequence& input) {
  MaskedSequence out(input.step_count(), input.channels(), input.valid_len);
  const std::size_t n = input.valid_len * input.channels();
  const double* x = input.steps.data.data();
  double* y = out.steps.data.data();
  for (std::size_t i = 0; i < n; ++i) y[i] = x[i] > 0.0 ? x[i] : 0.0;
  return out;
}

void relu_backward(const MaskedSequence& pre_activation, const MaskedSequence& d_output,
                   MaskedSequence& d_input) {
  d_input = MaskedSequence(pre_activation.step_count(), pre_activation.channels(),
                           pre_activation.valid_len);
  const std::size_t n = pre_activation.valid_len * pre_activation.channels();
  const double* x = pre_activation.steps.data.data();
  const double* dy = d_output.steps.data.data();
  double* dx = d_input.steps.data.data();
  for (std::size_t i = 0; i < n; ++i) dx[i] = x[i] > 0.0 ? dy[i] : 0.0;
}

MaskedSequence maxpool1d_forward(const MaskedSequence& input, std::size_t kernel,
                                 std::size_t stride, const char* layer_name,
                                 std::vector<std::uint32_t>* argmax) {
  check_window_precondition(input, kernel, layer_name);
  const std::size_t ch = input.channels();
  const std::size_t out_steps = strided_out_len(input.step_count(), kernel, stride);
  const std::size_t out_valid = strided_out_len(input.valid_len, kernel, stride);
  MaskedSequence out(out_steps, ch, out_valid);
  if (argmax) argmax->assign(out_valid * ch, 0);

  for (std::size_t t = 0; t < out_valid; ++t) {
    const std::size_t base = t * stride;
    double* out_row = out.steps.row(t);
    for (std::size_t c = 0; c < ch; ++c) {
      double best = input.steps.at(base, c);
      std::size_t best_idx = base;
      for (std::size_t k = 1; k < kernel; ++k) {
        const double v = input.steps.at(base + k, c);
        if (v > best) {  // strict: ties keep the lowest index
          best = v;
          best_idx = base + k;
        }
      }
      out_row[c] = best;
      if (argmax) (*argmax)[t * ch + c] = static_cast<std::uint32_t>(best_idx);
    }
  }
  return out;
}

void maxpool1d_backward(const MaskedSequence& input, std::size_t kernel,
                        std::size_t stride, const std::vector<std::uint32_t>& argmax,
                        const MaskedSequence& d_output, MaskedSequence& d_input) {
  (void)kernel;
  (void)stride;
  const std::size_t ch = input.channels();
  d_input = MaskedSequence(input.step_count(), ch, input.valid_len);
  for (std::size_t t = 0; t < d_output.valid_len; ++t) {
    const double* d_out_row = d_output.steps.row(t);
    for (std::size_t c = 0; c < ch; ++c) {
      d_input.steps.at(argmax[t * ch + c], c) += d_out_row[c];
    }
  }
}

Tensor dense_forward(const Tensor& input, const Tensor& weights, const Tensor& bias) {
  const std::size_t in_dim = weights.shape[0];
  const std::size_t out_dim = weights.shape[1];
  if (input.size() != in_dim) {
    throw ConfigError("dense: input length " + std::to_string(input.size()) +
                      " does not match weight rows " + std::to_string(in_dim));
  }
  Tensor out({out_dim});
  for (std::size_t o = 0; o < out_dim; ++o) out.data[o] = bias.data[o];
  for (std::size_t d = 0; d < in_dim; ++d) {
    const double v = input.data[d];
    if (v == 0.0) continue;
    const double* w_row = weights.row(d);
    for (std::size_t o = 0; o < out_dim; ++o) out.data[o] += v * w_row[o];
  }
  return out;
}

void dense_backward(const Tensor& input, const Tensor& weights, const Tensor& d_output,
                    Tensor& d_weights, Tensor& d_bias, Tensor* d_input) {
  const std::size_t in_dim = weights.shape[0];
  const std::size_t out_dim = weights.shape[1];
  if (d_input) *d_input = Tensor({in_dim});
  for (std::size_t o = 0; o < out_dim; ++o) d_bias.data[o] += d_output.data[o];
  for (std::size_t d = 0; d < in_dim; ++d) {
    const double v = input.data[d];
    double* dw_row = d_weights.row(d);
    const double* w_row = weights.row(d);
    double acc = 0.0;
    for (std::size_t o = 0; o < out_dim; ++o) {
      dw_row[o] += v * d_output.data[o];
      acc += w_row[o] * d_output.data[o];
    }
    if (d_input) d_input->data[d] = acc;
  }
}

}  // namespace seqembed
