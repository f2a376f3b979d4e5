#include "seqembed/train.hpp"

#include <cmath>
#include <fstream>
#include <ostream>

#include "seqembed/checkpoint.hpp"
#include "seqembed/error.hpp"
#include "seqembed/parallel.hpp"

namespace seqembed {

MaskedSequence encode_for_net(const ModelConfig& config, const DnaSequence& seq) {
  if (seq.length() > config.max_len) {
    throw DataError("sequence '" + seq.id + "' has length " +
                    std::to_string(seq.length()) + " exceeding the model max_len " +
                    std::to_string(config.max_len));
  }
  return encode_onehot(seq, seq.length(), LengthPolicy::kReject);
}

BatchSampler::BatchSampler(const LabeledDataset& ds, RngStream rng)
    : ds_(&ds), class_pools_(ds.by_class(Split::kTrain)), rng_(rng) {
  for (std::size_t c = 0; c < class_pools_.size(); ++c) {
    if (class_pools_[c].empty()) {
      throw DataError("class '" + ds.class_names[c] + "' has no training records");
    }
  }
  if (class_pools_.empty()) throw DataError("dataset has no classes");
}

std::vector<std::size_t> BatchSampler::sample(std::size_t batch_size) {
  std::vector<std::size_t> batch;
  batch.reserve(batch_size);
  for (std::size_t i = 0; i < batch_size; ++i) {
    const std::size_t cls = rng_.uniform_index(class_pools_.size());
    const auto& pool = class_pools_[cls];
    batch.push_back(pool[rng_.uniform_index(pool.size())]);
  }
  return batch;
}

double train_step(EmbedNet& net, const LabeledDataset& ds,
                  std::span<const std::size_t> batch, AdamState& opt,
                  std::size_t threads) {
  if (batch.empty()) throw DataError("train_step: empty batch");

  const std::size_t n = batch.size();
  std::vector<std::vector<Tensor>> example_grads(n);
  std::vector<double> losses(n, 0.0);

  parallel_for(n, threads, [&](std::size_t i) {
    const LabeledRecord& rec = ds.records[batch[i]];
    MaskedSequence input = encode_for_net(net.config, rec.sequence);
    example_grads[i] = make_grad_buffer(net);
    losses[i] = train_forward_backward(net, input, rec.class_index, example_grads[i]);
  });

  // Reduce in example order: the result is independent of the thread count.
  std::vector<Parameter*> params = net.parameters();
  const double inv_n = 1.0 / static_cast<double>(n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t p = 0; p < params.size(); ++p) {
      double* dst = params[p]->grad.data.data();
      const double* src = example_grads[i][p].data.data();
      const std::size_t len = example_grads[i][p].size();
      for (std::size_t j = 0; j < len; ++j) dst[j] += src[j];
    }
  }
  double loss_sum = 0.0;
  for (std::size_t i = 0; i < n; ++i) loss_sum += losses[i];

  for (Parameter* p : params) {
    for (double& g : p->grad.data) g *= inv_n;
  }

  opt.t += 1;
  adam_step(params, opt.config, opt.t);

  for (Parameter* p : params) {
    if (!p->value.all_finite()) {
      throw NumericError("train_step: parameter '" + p->name +
                         "' became non-finite at step " + std::to_string(opt.t));
    }
  }
  return loss_sum * inv_n;
}

void TrainLog::write_tsv(std::ostream& os) const {
  os << "step\tloss\ttest_acc\n";
  for (const TrainLogEntry& e : entries) {
    os << e.step << '\t' << e.loss << '\t';
    if (e.test_accuracy) os << *e.test_accuracy;
    os << '\n';
  }
}

void TrainLog::write_tsv_file(const std::string& path) const {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write training log '" + path + "'");
  write_tsv(out);
  if (!out) throw DataError("I/O error writing '" + path + "'");
}

TrainLog fit(EmbedNet& net, const LabeledDataset& ds, const TrainConfig& cfg) {
  if (cfg.batch_size < 1) throw ConfigError("fit: batch_size must be >= 1");

  TrainLog log;
  if (cfg.steps == 0) return log;

  BatchSampler sampler(ds, RngStream::derive(cfg.seed, RngComponent::kSampler));
  AdamState opt;
  opt.config.lr = cfg.lr;

  for (std::size_t step = 1; step <= cfg.steps; ++step) {
    std::vector<std::size_t> batch = sampler.sample(cfg.batch_size);
    const double loss = train_step(net, ds, batch, opt, cfg.threads);

    TrainLogEntry entry;
    entry.step = step;
    entry.loss = loss;
    const bool eval_now =
        (cfg.eval_every > 0 && step % cfg.eval_every == 0) || step == cfg.steps;
    if (eval_now) {
      entry.test_accuracy = eval_accuracy(net, ds, Split::kTest, cfg.threads);
      if (!cfg.checkpoint_path.empty()) save_checkpoint(net, cfg.checkpoint_path);
    }
    log.entries.push_back(entry);
  }
  return log;
}

double eval_accuracy(const EmbedNet& net, const LabeledDataset& ds, Split split,
                     std::size_t threads) {
  const std::vector<std::size_t> idx = ds.indices_of(split);
  if (idx.empty()) throw DataError("eval_accuracy: split is empty");

  std::vector<unsigned char> correct(idx.size(), 0);
  parallel_for(idx.size(), threads, [&](std::size_t i) {
    const LabeledRecord& rec = ds.records[idx[i]];
    MaskedSequence input = encode_for_net(net.config, rec.sequence);
    const ClassScores scores = forward_logits(net, input);
    correct[i] = scores.predicted == rec.class_index ? 1 : 0;
  });

  std::size_t hits = 0;
  for (unsigned char c : correct) hits += c;
  return static_cast<double>(hits) / static_cast<double>(idx.size());
}

}  // namespace seqembed
