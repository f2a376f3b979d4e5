#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "seqembed/adam.hpp"
#include "seqembed/dataset.hpp"
#include "seqembed/model.hpp"
#include "seqembed/rng.hpp"

namespace seqembed {

struct TrainConfig {
  std::size_t batch_size = 100;
  std::size_t steps = 1;
  double lr = 0.001;
  std::uint64_t seed = 0;
  std::size_t eval_every = 0;       // 0 = no periodic eval/checkpoint
  std::string checkpoint_path;      // empty = keep the model in memory only
  std::size_t threads = 0;          // 0 = hardware default
};

/// Tight (unpadded) one-hot encoding for a model input; rejects sequences
/// longer than config.max_len. Masking invariance makes this equivalent to
/// padding out to max_len.
MaskedSequence encode_for_net(const ModelConfig& config, const DnaSequence& seq);

/// Balanced batch sampler: draws a class uniformly, then a train-split record
/// uniformly within that class. Deterministic given the stream.
class BatchSampler {
 public:
  BatchSampler(const LabeledDataset& ds, RngStream rng);

  std::vector<std::size_t> sample(std::size_t batch_size);

 private:
  const LabeledDataset* ds_;
  std::vector<std::vector<std::size_t>> class_pools_;
  RngStream rng_;
};

struct AdamState {
  AdamConfig config;
  std::uint64_t t = 0;
};

/// One optimization step on a batch of record indices: per-example forward +
/// backward (fanned out over threads), gradients averaged in example order,
/// one Adam update. Returns the mean loss.
double train_step(EmbedNet& net, const LabeledDataset& ds,
                  std::span<const std::size_t> batch, AdamState& opt,
                  std::size_t threads = 0);

struct TrainLogEntry {
  std::size_t step = 0;
  double loss = 0.0;
  std::optional<double> test_accuracy;
};

struct TrainLog {
  std::vector<TrainLogEntry> entries;

  /// TSV lines `step<TAB>loss<TAB>test_acc?`; the accuracy column is empty on
  /// steps without an evaluation.
  void write_tsv(std::ostream& os) const;
  void write_tsv_file(const std::string& path) const;
};

/// Runs cfg.steps optimization steps with freshly sampled balanced batches.
/// Writes a checkpoint and records test accuracy every cfg.eval_every steps
/// (and at the end when a checkpoint path is set).
TrainLog fit(EmbedNet& net, const LabeledDataset& ds, const TrainConfig& cfg);

/// Fraction of the given split whose argmax class matches the label.
double eval_accuracy(const EmbedNet& net, const LabeledDataset& ds,
                     Split split = Split::kTest, std::size_t threads = 0);

}  // namespace seqembed
