#include "seqembed/eval.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <unordered_set>

#include "seqembed/error.hpp"
#include "seqembed/parallel.hpp"
#include "seqembed/train.hpp"

namespace seqembed {

void RecallReport::write_tsv(std::ostream& os) const {
  os << "# pairs=" << num_pairs << '\n';
  os << "n\trecall\n";
  for (std::size_t i = 0; i < ns.size(); ++i) {
    os << ns[i] << '\t' << recall[i] << '\n';
  }
}

RecallReport recall_from_embeddings(const EmbeddingDatabase& database,
                                    const std::vector<Tensor>& queries,
                                    std::vector<std::size_t> ns) {
  if (queries.size() != database.size()) {
    throw DataError("recall: " + std::to_string(queries.size()) + " queries vs " +
                    std::to_string(database.size()) + " database entries");
  }
  std::sort(ns.begin(), ns.end());

  const std::size_t n = queries.size();
  std::vector<std::size_t> partner_rank(n, 0);
  for (std::size_t q = 0; q < n; ++q) {
    const std::vector<Neighbor> ranked = knn_query(
        database, std::span<const double>(queries[q].data.data(), queries[q].size()),
        database.size());
    for (std::size_t pos = 0; pos < ranked.size(); ++pos) {
      if (ranked[pos].index == q) {
        partner_rank[q] = pos + 1;
        break;
      }
    }
  }

  RecallReport report;
  report.num_pairs = n;
  report.ns = ns;
  for (std::size_t want : ns) {
    std::size_t hits = 0;
    for (std::size_t rank : partner_rank) {
      if (rank <= want) ++hits;
    }
    report.recall.push_back(static_cast<double>(hits) / static_cast<double>(n));
  }
  return report;
}

RecallReport recall_at_n(const EmbedNet& net, const std::vector<RecordPair>& pairs,
                         std::vector<std::size_t> ns, std::size_t threads) {
  if (pairs.empty()) throw DataError("recall: no pairs given");
  std::unordered_set<std::string> labels;
  for (const RecordPair& pr : pairs) {
    if (!labels.insert(pr.first.label).second) {
      throw DataError("recall: class '" + pr.first.label +
                      "' appears in more than one pair");
    }
    if (pr.first.label != pr.second.label) {
      throw DataError("recall: pair for class '" + pr.first.label +
                      "' mixes labels");
    }
  }

  std::vector<Tensor> query_vecs(pairs.size());
  std::vector<Tensor> partner_vecs(pairs.size());
  parallel_for(pairs.size(), threads, [&](std::size_t i) {
    query_vecs[i] = forward_embedding(
        net, encode_for_net(net.config, pairs[i].first.sequence));
    partner_vecs[i] = forward_embedding(
        net, encode_for_net(net.config, pairs[i].second.sequence));
  });

  EmbeddingDatabase db(net.config.embedding_dim);
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    db.add(pairs[i].second.sequence.id, pairs[i].second.label,
           std::span<const double>(partner_vecs[i].data.data(), partner_vecs[i].size()));
  }
  return recall_from_embeddings(db, query_vecs, std::move(ns));
}

std::vector<RecordPair> draw_class_pairs(const LabeledDataset& ds, std::uint64_t seed) {
  std::vector<std::vector<std::size_t>> pools(ds.num_classes());
  for (std::size_t i = 0; i < ds.records.size(); ++i) {
    pools[ds.records[i].class_index].push_back(i);
  }

  std::vector<RecordPair> pairs;
  pairs.reserve(ds.num_classes());
  for (std::size_t c = 0; c < pools.size(); ++c) {
    const auto& pool = pools[c];
    if (pool.size() < 2) {
      throw DataError("class '" + ds.class_names[c] +
                      "' has fewer than 2 records; cannot draw a pair");
    }
    RngStream rng = RngStream::derive(seed, RngComponent::kEval, c);
    const std::size_t qi = rng.uniform_index(pool.size());
    std::size_t pi = rng.uniform_index(pool.size() - 1);
    if (pi >= qi) ++pi;
    pairs.emplace_back(ds.records[pool[qi]], ds.records[pool[pi]]);
  }
  return pairs;
}

namespace {

std::vector<AccuracyBin> bin_accuracy(const std::vector<double>& values,
                                      const std::vector<bool>& correct,
                                      std::size_t bins) {
  double lo = values[0], hi = values[0];
  for (double v : values) {
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
  if (hi == lo) bins = 1;
  const double width = (hi - lo) / static_cast<double>(bins);

  std::vector<AccuracyBin> out(bins);
  for (std::size_t b = 0; b < bins; ++b) {
    out[b].lo = lo + width * static_cast<double>(b);
    out[b].hi = b + 1 == bins ? hi : lo + width * static_cast<double>(b + 1);
  }
  for (std::size_t i = 0; i < values.size(); ++i) {
    std::size_t b = bins - 1;
    if (width > 0.0) {
      b = std::min(bins - 1,
                   static_cast<std::size_t>((values[i] - lo) / width));
    }
    ++out[b].total;
    if (correct[i]) ++out[b].correct;
  }
  return out;
}

}  // namespace

ClassReport make_class_report(std::span<const std::size_t> true_classes,
                              std::span<const std::size_t> predicted,
                              std::span<const std::size_t> lengths,
                              std::size_t num_classes, std::size_t length_bins) {
  if (true_classes.empty() || true_classes.size() != predicted.size() ||
      true_classes.size() != lengths.size()) {
    throw DataError("class report: inconsistent or empty outcome arrays");
  }
  if (length_bins < 1) throw ConfigError("class report: need at least one bin");

  ClassReport report;
  report.num_classes = num_classes;
  report.total = true_classes.size();
  report.confusion.assign(num_classes * num_classes, 0);

  std::vector<bool> correct(report.total);
  std::size_t hits = 0;
  for (std::size_t i = 0; i < report.total; ++i) {
    if (true_classes[i] >= num_classes || predicted[i] >= num_classes) {
      throw DataError("class report: class index out of range");
    }
    ++report.confusion[true_classes[i] * num_classes + predicted[i]];
    correct[i] = true_classes[i] == predicted[i];
    if (correct[i]) ++hits;
  }
  report.accuracy = static_cast<double>(hits) / static_cast<double>(report.total);

  std::vector<double> len_values(report.total);
  for (std::size_t i = 0; i < report.total; ++i) {
    len_values[i] = static_cast<double>(lengths[i]);
  }
  report.by_length = bin_accuracy(len_values, correct, length_bins);

  // Distance from the class mean length, the second panel of the length
  // analysis.
  std::vector<double> class_len_sum(num_classes, 0.0);
  std::vector<std::size_t> class_count(num_classes, 0);
  for (std::size_t i = 0; i < report.total; ++i) {
    class_len_sum[true_classes[i]] += len_values[i];
    ++class_count[true_classes[i]];
  }
  std::vector<double> offsets(report.total);
  for (std::size_t i = 0; i < report.total; ++i) {
    const double mean =
        class_len_sum[true_classes[i]] / static_cast<double>(class_count[true_classes[i]]);
    offsets[i] = std::abs(len_values[i] - mean);
  }
  report.by_length_offset = bin_accuracy(offsets, correct, length_bins);
  return report;
}

void ClassReport::write_tsv(std::ostream& os,
                            const std::vector<std::string>& class_names) const {
  os << "# accuracy\t" << accuracy << "\ttotal\t" << total << '\n';
  os << "# confusion: rows true, columns predicted\n";
  os << "class";
  for (const std::string& name : class_names) os << '\t' << name;
  os << '\n';
  for (std::size_t t = 0; t < num_classes; ++t) {
    os << class_names[t];
    for (std::size_t p = 0; p < num_classes; ++p) {
      os << '\t' << confusion_at(t, p);
    }
    os << '\n';
  }
  auto dump_bins = [&os](const char* title, const std::vector<AccuracyBin>& bins) {
    os << "# " << title << "\nlo\thi\ttotal\tcorrect\taccuracy\n";
    for (const AccuracyBin& b : bins) {
      os << b.lo << '\t' << b.hi << '\t' << b.total << '\t' << b.correct << '\t';
      if (b.total > 0) {
        os << static_cast<double>(b.correct) / static_cast<double>(b.total);
      } else {
        os << "";
      }
      os << '\n';
    }
  };
  dump_bins("accuracy by sequence length", by_length);
  dump_bins("accuracy by |length - class mean|", by_length_offset);
}

ClassReport classification_report(const EmbedNet& net, const LabeledDataset& ds,
                                  std::size_t length_bins, std::size_t threads) {
  const std::vector<std::size_t> idx = ds.indices_of(Split::kTest);
  if (idx.empty()) throw DataError("classification report: test split is empty");

  std::vector<std::size_t> truth(idx.size()), pred(idx.size()), lengths(idx.size());
  parallel_for(idx.size(), threads, [&](std::size_t i) {
    const LabeledRecord& rec = ds.records[idx[i]];
    const ClassScores scores =
        forward_logits(net, encode_for_net(net.config, rec.sequence));
    truth[i] = rec.class_index;
    pred[i] = scores.predicted;
    lengths[i] = rec.sequence.length();
  });
  return make_class_report(truth, pred, lengths, ds.num_classes(), length_bins);
}

std::vector<NoisePoint> noise_sweep(const EmbedNet& net, const LabeledDataset& ds,
                                    NoiseKind kind, std::span<const double> p_values,
                                    std::uint64_t seed, bool codon_aligned,
                                    std::size_t threads) {
  const std::vector<std::size_t> idx = ds.indices_of(Split::kTest);
  if (idx.empty()) throw DataError("noise sweep: test split is empty");

  std::vector<NoisePoint> points;
  points.reserve(p_values.size());
  for (std::size_t pi = 0; pi < p_values.size(); ++pi) {
    const double p = p_values[pi];
    std::vector<unsigned char> correct(idx.size(), 0);
    parallel_for(idx.size(), threads, [&](std::size_t i) {
      const LabeledRecord& rec = ds.records[idx[i]];
      RngStream rng =
          RngStream::derive(seed, RngComponent::kNoise, (pi << 32) + idx[i]);
      NoiseSpec spec{kind, p, codon_aligned, seed};
      try {
        const DnaSequence noisy = apply_noise(rec.sequence, spec, rng);
        const ClassScores scores =
            forward_logits(net, encode_for_net(net.config, noisy));
        correct[i] = scores.predicted == rec.class_index ? 1 : 0;
      } catch (const Error&) {
        correct[i] = 0;  // a sequence degraded below the model minimum counts
                         // as a miss
      }
    });
    std::size_t hits = 0;
    for (unsigned char c : correct) hits += c;
    points.push_back({p, static_cast<double>(hits) / static_cast<double>(idx.size())});
  }
  return points;
}

void write_noise_tsv(std::ostream& os, const std::vector<NoisePoint>& points) {
  os << "p\taccuracy\n";
  for (const NoisePoint& pt : points) os << pt.p << '\t' << pt.accuracy << '\n';
}

}  // namespace seqembed
