#include "seqembed/model.hpp"

#include <cmath>
#include <string>

#include "seqembed/error.hpp"
#include "seqembed/loss.hpp"
#include "seqembed/parallel.hpp"
#include "seqembed/rng.hpp"

namespace seqembed {

namespace {

// LSTM weight range as a multiple of 1/sqrt(hidden). Flat scaled-uniform;
// forget-gate biases start at 1.0, the other biases at 0.
constexpr double kLstmInitScale = 1.0;

// Parameter indices in EmbedNet::parameters() order.
enum ParamIndex : std::size_t {
  kConv1W = 0,
  kConv1B,
  kConv2W,
  kConv2B,
  kBiFwdWInput,
  kBiFwdWRecur,
  kBiFwdBias,
  kBiBwdWInput,
  kBiBwdWRecur,
  kBiBwdBias,
  kSumWInput,
  kSumWRecur,
  kSumBias,
  kHeadW,
  kHeadB,
  kParamCount,
};

void glorot_uniform(Tensor& t, std::size_t fan_in, std::size_t fan_out, RngStream& rng) {
  const double limit = std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
  for (double& x : t.data) x = rng.uniform(-limit, limit);
}

void scaled_uniform(Tensor& t, double limit, RngStream& rng) {
  for (double& x : t.data) x = rng.uniform(-limit, limit);
}

void init_lstm(LstmParams& p, std::uint64_t seed, std::size_t first_stream_index) {
  const std::size_t h = p.hidden_dim();
  const double limit = kLstmInitScale / std::sqrt(static_cast<double>(h));
  RngStream r_in = RngStream::derive(seed, RngComponent::kParamInit, first_stream_index);
  RngStream r_rec =
      RngStream::derive(seed, RngComponent::kParamInit, first_stream_index + 1);
  scaled_uniform(p.w_input.value, limit, r_in);
  scaled_uniform(p.w_recur.value, limit, r_rec);
  p.bias.value.fill(0.0);
  for (std::size_t u = 0; u < h; ++u) p.bias.value.data[h + u] = 1.0;  // forget gate
}

}  // namespace

ModelConfig ModelConfig::full_preset(std::size_t num_classes, std::uint64_t seed) {
  ModelConfig c;
  c.max_len = 4500;
  c.conv1 = {3, 3, 26};
  c.conv2 = {26, 1, 320};
  c.pool = {13, 13};
  c.bilstm_dim_per_dir = 320;
  c.embedding_dim = 256;
  c.num_classes = num_classes;
  c.seed = seed;
  return c;
}

ModelConfig ModelConfig::desk_preset(std::size_t num_classes, std::uint64_t seed) {
  ModelConfig c;
  c.max_len = 600;
  c.conv1 = {3, 3, 26};
  c.conv2 = {13, 1, 64};
  c.pool = {7, 7};
  c.bilstm_dim_per_dir = 64;
  c.embedding_dim = 64;
  c.num_classes = num_classes;
  c.seed = seed;
  return c;
}

void ModelConfig::validate() const {
  auto positive = [](std::size_t v, const char* what) {
    if (v == 0) throw ConfigError(std::string("config: ") + what + " must be positive");
  };
  positive(max_len, "max_len");
  positive(conv1.kernel, "conv1.kernel");
  positive(conv1.stride, "conv1.stride");
  positive(conv1.filters, "conv1.filters");
  positive(conv2.kernel, "conv2.kernel");
  positive(conv2.stride, "conv2.stride");
  positive(conv2.filters, "conv2.filters");
  positive(pool.kernel, "pool.kernel");
  positive(pool.stride, "pool.stride");
  positive(bilstm_dim_per_dir, "bilstm_dim_per_dir");
  positive(embedding_dim, "embedding_dim");
  positive(num_classes, "num_classes");

  if (max_len < conv1.kernel) {
    throw ConfigError("config: conv1 kernel " + std::to_string(conv1.kernel) +
                      " exceeds max_len " + std::to_string(max_len));
  }
  const std::size_t s1 = strided_out_len(max_len, conv1.kernel, conv1.stride);
  if (s1 < conv2.kernel) {
    throw ConfigError("config: conv2 kernel " + std::to_string(conv2.kernel) +
                      " exceeds conv1 output length " + std::to_string(s1));
  }
  const std::size_t s2 = strided_out_len(s1, conv2.kernel, conv2.stride);
  if (s2 < pool.kernel) {
    throw ConfigError("config: pool kernel " + std::to_string(pool.kernel) +
                      " exceeds conv2 output length " + std::to_string(s2));
  }
}

std::size_t ModelConfig::min_input_length() const {
  // Walk the shape algebra backwards: a window layer (k, s) needs
  // (m - 1) * s + k inputs to emit m outputs.
  const std::size_t conv2_in = (pool.kernel - 1) * conv2.stride + conv2.kernel;
  return (conv2_in - 1) * conv1.stride + conv1.kernel;
}

ModelConfig::StepChain ModelConfig::step_chain(std::size_t input_len) const {
  StepChain chain{};
  chain.conv1_steps = strided_out_len(input_len, conv1.kernel, conv1.stride);
  chain.conv2_steps = strided_out_len(chain.conv1_steps, conv2.kernel, conv2.stride);
  chain.pool_steps = strided_out_len(chain.conv2_steps, pool.kernel, pool.stride);
  return chain;
}

std::vector<Parameter*> EmbedNet::parameters() {
  return {&conv1_w,
          &conv1_b,
          &conv2_w,
          &conv2_b,
          &bilstm.fwd.w_input,
          &bilstm.fwd.w_recur,
          &bilstm.fwd.bias,
          &bilstm.bwd.w_input,
          &bilstm.bwd.w_recur,
          &bilstm.bwd.bias,
          &summary.w_input,
          &summary.w_recur,
          &summary.bias,
          &head_w,
          &head_b};
}

std::vector<const Parameter*> EmbedNet::parameters() const {
  auto* self = const_cast<EmbedNet*>(this);
  std::vector<Parameter*> mut = self->parameters();
  return {mut.begin(), mut.end()};
}

std::size_t EmbedNet::parameter_count() const {
  std::size_t n = 0;
  for (const Parameter* p : parameters()) n += p->value.size();
  return n;
}

EmbedNet build(const ModelConfig& config) {
  config.validate();
  EmbedNet net;
  net.config = config;

  net.conv1_w = Parameter("conv1.w", {config.conv1.kernel, 4, config.conv1.filters});
  net.conv1_b = Parameter("conv1.b", {config.conv1.filters});
  net.conv2_w = Parameter(
      "conv2.w", {config.conv2.kernel, config.conv1.filters, config.conv2.filters});
  net.conv2_b = Parameter("conv2.b", {config.conv2.filters});
  net.bilstm =
      make_bilstm_params("bilstm", config.conv2.filters, config.bilstm_dim_per_dir);
  net.summary =
      make_lstm_params("summary", 2 * config.bilstm_dim_per_dir, config.embedding_dim);
  net.head_w = Parameter("head.w", {config.embedding_dim, config.num_classes});
  net.head_b = Parameter("head.b", {config.num_classes});

  const std::uint64_t seed = config.seed;
  {
    RngStream r = RngStream::derive(seed, RngComponent::kParamInit, kConv1W);
    glorot_uniform(net.conv1_w.value, config.conv1.kernel * 4,
                   config.conv1.kernel * config.conv1.filters, r);
  }
  {
    RngStream r = RngStream::derive(seed, RngComponent::kParamInit, kConv2W);
    glorot_uniform(net.conv2_w.value, config.conv2.kernel * config.conv1.filters,
                   config.conv2.kernel * config.conv2.filters, r);
  }
  init_lstm(net.bilstm.fwd, seed, kBiFwdWInput);
  init_lstm(net.bilstm.bwd, seed, kBiBwdWInput);
  init_lstm(net.summary, seed, kSumWInput);
  {
    RngStream r = RngStream::derive(seed, RngComponent::kParamInit, kHeadW);
    glorot_uniform(net.head_w.value, config.embedding_dim, config.num_classes, r);
  }
  return net;
}

namespace {

void check_forward_input(const EmbedNet& net, const MaskedSequence& input) {
  if (input.channels() != 4) {
    throw DataError("forward: expected 4 input channels, got " +
                    std::to_string(input.channels()));
  }
  const std::size_t min_len = net.config.min_input_length();
  if (input.valid_len < min_len) {
    throw DataError("forward: sequence of length " + std::to_string(input.valid_len) +
                    " is shorter than the model minimum " + std::to_string(min_len));
  }
}

void run_forward(const EmbedNet& net, const MaskedSequence& input, ForwardCache& c) {
  check_forward_input(net, input);
  c.input = input;
  c.conv1_pre = conv1d_forward(c.input, net.conv1_w.value, net.conv1_b.value,
                               net.config.conv1.stride, "conv1");
  c.conv1_act = relu_forward(c.conv1_pre);
  c.conv2_pre = conv1d_forward(c.conv1_act, net.conv2_w.value, net.conv2_b.value,
                               net.config.conv2.stride, "conv2");
  c.conv2_act = relu_forward(c.conv2_pre);
  c.pooled = maxpool1d_forward(c.conv2_act, net.config.pool.kernel,
                               net.config.pool.stride, "maxpool", &c.pool_argmax);
  c.bilstm_out = bilstm_forward(c.pooled, net.bilstm, c.bilstm);
  lstm_forward(c.bilstm_out, net.summary, c.summary);
  c.embedding = lstm_last_hidden(c.summary);
  if (!c.embedding.all_finite()) {
    throw NumericError("forward: non-finite embedding");
  }
}

}  // namespace

Tensor forward_embedding(const EmbedNet& net, const MaskedSequence& input,
                         ForwardCache* cache) {
  ForwardCache local;
  ForwardCache& c = cache ? *cache : local;
  run_forward(net, input, c);
  return c.embedding;
}

ClassScores forward_logits(const EmbedNet& net, const MaskedSequence& input,
                           ForwardCache* cache) {
  ForwardCache local;
  ForwardCache& c = cache ? *cache : local;
  run_forward(net, input, c);
  c.logits = dense_forward(c.embedding, net.head_w.value, net.head_b.value);

  ClassScores scores;
  scores.logits = c.logits;
  scores.probabilities = softmax(c.logits);
  scores.predicted = 0;
  for (std::size_t i = 1; i < scores.probabilities.size(); ++i) {
    if (scores.probabilities.data[i] > scores.probabilities.data[scores.predicted]) {
      scores.predicted = i;
    }
  }
  return scores;
}

std::vector<Tensor> make_grad_buffer(const EmbedNet& net) {
  std::vector<Tensor> grads;
  grads.reserve(kParamCount);
  for (const Parameter* p : net.parameters()) grads.emplace_back(p->value.shape);
  return grads;
}

void backward_from_logits(const EmbedNet& net, const ForwardCache& cache,
                          const Tensor& d_logits, std::vector<Tensor>& grads) {
  Tensor d_embedding;
  dense_backward(cache.embedding, net.head_w.value, d_logits, grads[kHeadW],
                 grads[kHeadB], &d_embedding);

  // Only the last valid step of the summary LSTM feeds the head.
  Tensor d_summary_h({cache.summary.hidden.shape[0], cache.summary.hidden.shape[1]});
  double* last_row = d_summary_h.row(cache.summary.valid - 1);
  for (std::size_t u = 0; u < d_embedding.size(); ++u) last_row[u] = d_embedding.data[u];

  MaskedSequence d_bilstm_out;
  lstm_backward(cache.bilstm_out, net.summary, cache.summary, d_summary_h,
                grads[kSumWInput], grads[kSumWRecur], grads[kSumBias], &d_bilstm_out);

  MaskedSequence d_pooled;
  bilstm_backward(cache.pooled, net.bilstm, cache.bilstm, d_bilstm_out,
                  grads[kBiFwdWInput], grads[kBiFwdWRecur], grads[kBiFwdBias],
                  grads[kBiBwdWInput], grads[kBiBwdWRecur], grads[kBiBwdBias],
                  &d_pooled);

  MaskedSequence d_conv2_act;
  maxpool1d_backward(cache.conv2_act, net.config.pool.kernel, net.config.pool.stride,
                     cache.pool_argmax, d_pooled, d_conv2_act);

  MaskedSequence d_conv2_pre;
  relu_backward(cache.conv2_pre, d_conv2_act, d_conv2_pre);

  MaskedSequence d_conv1_act;
  conv1d_backward(cache.conv1_act, net.conv2_w.value, net.config.conv2.stride,
                  d_conv2_pre, grads[kConv2W], grads[kConv2B], &d_conv1_act);

  MaskedSequence d_conv1_pre;
  relu_backward(cache.conv1_pre, d_conv1_act, d_conv1_pre);

  conv1d_backward(cache.input, net.conv1_w.value, net.config.conv1.stride, d_conv1_pre,
                  grads[kConv1W], grads[kConv1B], nullptr);
}

double train_forward_backward(const EmbedNet& net, const MaskedSequence& input,
                              std::size_t true_class, std::vector<Tensor>& grads) {
  ForwardCache cache;
  run_forward(net, input, cache);
  cache.logits = dense_forward(cache.embedding, net.head_w.value, net.head_b.value);
  SoftmaxCeResult ce = softmax_cross_entropy(cache.logits, true_class);
  if (!std::isfinite(ce.loss)) throw NumericError("train: non-finite loss");
  Tensor d_logits = softmax_ce_grad(ce.probabilities, true_class);
  backward_from_logits(net, cache, d_logits, grads);
  return ce.loss;
}

EmbeddingBatch forward_embedding_batch(const EmbedNet& net,
                                       const std::vector<MaskedSequence>& batch,
                                       std::size_t threads) {
  EmbeddingBatch out;
  out.items.resize(batch.size());
  std::vector<std::string> errors(batch.size());
  parallel_for(batch.size(), threads, [&](std::size_t i) {
    try {
      out.items[i] = forward_embedding(net, batch[i]);
    } catch (const Error& e) {
      errors[i] = e.what();
    }
  });
  for (std::size_t i = 0; i < batch.size(); ++i) {
    if (!errors[i].empty()) out.errors.push_back({i, errors[i]});
  }
  return out;
}

LogitsBatch forward_logits_batch(const EmbedNet& net,
                                 const std::vector<MaskedSequence>& batch,
                                 std::size_t threads) {
  LogitsBatch out;
  out.items.resize(batch.size());
  std::vector<std::string> errors(batch.size());
  parallel_for(batch.size(), threads, [&](std::size_t i) {
    try {
      out.items[i] = forward_logits(net, batch[i]);
    } catch (const Error& e) {
      errors[i] = e.what();
    }
  });
  for (std::size_t i = 0; i < batch.size(); ++i) {
    if (!errors[i].empty()) out.errors.push_back({i, errors[i]});
  }
  return out;
}

}  // namespace seqembed
