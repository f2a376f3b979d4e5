#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "seqembed/layers.hpp"
#include "seqembed/lstm.hpp"
#include "seqembed/tensor.hpp"

namespace seqembed {

struct ConvSpec {
  std::size_t kernel = 0;
  std::size_t stride = 0;
  std::size_t filters = 0;
};

struct PoolSpec {
  std::size_t kernel = 0;
  std::size_t stride = 0;
};

/// Architecture hyperparameters. The full-scale preset follows the original
/// codon-stride design; the desk preset is a scaled-down variant that trains
/// in minutes on a laptop CPU.
struct ModelConfig {
  std::size_t max_len = 4500;
  ConvSpec conv1{3, 3, 26};
  ConvSpec conv2{26, 1, 320};
  PoolSpec pool{13, 13};
  std::size_t bilstm_dim_per_dir = 320;
  std::size_t embedding_dim = 256;
  std::size_t num_classes = 30;
  std::uint64_t seed = 0;

  static ModelConfig full_preset(std::size_t num_classes, std::uint64_t seed);
  static ModelConfig desk_preset(std::size_t num_classes, std::uint64_t seed);

  /// Throws ConfigError naming the first failing layer.
  void validate() const;

  /// Smallest input length (in nucleotides) that yields valid shapes through
  /// the pooling layer.
  std::size_t min_input_length() const;

  /// Step counts after conv1 / conv2 / pool for a given input length.
  struct StepChain {
    std::size_t conv1_steps;
    std::size_t conv2_steps;
    std::size_t pool_steps;
  };
  StepChain step_chain(std::size_t input_len) const;
};

/// The embedding network: conv -> ReLU -> conv -> ReLU -> maxpool -> BiLSTM
/// (all steps) -> forward LSTM (last step) -> dense softmax head. The final
/// LSTM's hidden size equals embedding_dim; its last-step hidden state is the
/// embedding, taken with no further normalization.
struct EmbedNet {
  ModelConfig config;
  Parameter conv1_w, conv1_b;
  Parameter conv2_w, conv2_b;
  BiLstmParams bilstm;
  LstmParams summary;
  Parameter head_w, head_b;

  /// Fixed parameter order; checkpoints and optimizer state rely on it.
  std::vector<Parameter*> parameters();
  std::vector<const Parameter*> parameters() const;
  std::size_t parameter_count() const;
};

/// Deterministic construction from (config, config.seed).
EmbedNet build(const ModelConfig& config);

/// Activations from one forward pass, retained for backward.
struct ForwardCache {
  MaskedSequence input;
  MaskedSequence conv1_pre, conv1_act;
  MaskedSequence conv2_pre, conv2_act;
  MaskedSequence pooled;
  std::vector<std::uint32_t> pool_argmax;
  BiLstmCache bilstm;
  MaskedSequence bilstm_out;
  LstmCache summary;
  Tensor embedding;
  Tensor logits;
};

/// Embedding for one sequence; requires valid_len >= min_input_length.
Tensor forward_embedding(const EmbedNet& net, const MaskedSequence& input,
                         ForwardCache* cache = nullptr);

struct ClassScores {
  Tensor logits;
  Tensor probabilities;
  std::size_t predicted = 0;  // argmax; ties resolve to the lowest index
};

ClassScores forward_logits(const EmbedNet& net, const MaskedSequence& input,
                           ForwardCache* cache = nullptr);

/// Gradient buffer aligned with EmbedNet::parameters() order.
std::vector<Tensor> make_grad_buffer(const EmbedNet& net);

/// Cross-entropy forward + backward for one example. Accumulates into
/// `grads` and returns the loss.
double train_forward_backward(const EmbedNet& net, const MaskedSequence& input,
                              std::size_t true_class, std::vector<Tensor>& grads);

/// Backward pass from an arbitrary gradient on the logits; exposed for
/// gradient checking.
void backward_from_logits(const EmbedNet& net, const ForwardCache& cache,
                          const Tensor& d_logits, std::vector<Tensor>& grads);

// Batch wrappers. A too-short or otherwise failing example yields an error
// message in its slot; the rest of the batch is still processed.
struct BatchItemError {
  std::size_t index = 0;
  std::string message;
};

struct EmbeddingBatch {
  std::vector<std::optional<Tensor>> items;
  std::vector<BatchItemError> errors;
};

EmbeddingBatch forward_embedding_batch(const EmbedNet& net,
                                       const std::vector<MaskedSequence>& batch,
                                       std::size_t threads = 0);

struct LogitsBatch {
  std::vector<std::optional<ClassScores>> items;
  std::vector<BatchItemError> errors;
};

LogitsBatch forward_logits_batch(const EmbedNet& net,
                                 const std::vector<MaskedSequence>& batch,
                                 std::size_t threads = 0);

}  // namespace seqembed
