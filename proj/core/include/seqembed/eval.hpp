#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "seqembed/dataset.hpp"
#include "seqembed/embed_db.hpp"
#include "seqembed/model.hpp"
#include "seqembed/noise.hpp"

namespace seqembed {

// ---------------------------------------------------------------------------
// Recall-at-N over held-out classes: one (query, database) pair per class
// absent from training; each query ranks the full partner database and counts
// as recalled at N when its own partner ranks within the top N.
// ---------------------------------------------------------------------------

struct RecallReport {
  std::vector<std::size_t> ns;
  std::vector<double> recall;  // aligned with ns, nondecreasing
  std::size_t num_pairs = 0;

  void write_tsv(std::ostream& os) const;
};

using RecordPair = std::pair<LabeledRecord, LabeledRecord>;  // (query, database)

RecallReport recall_at_n(const EmbedNet& net, const std::vector<RecordPair>& pairs,
                         std::vector<std::size_t> ns, std::size_t threads = 0);

/// Core protocol on precomputed embeddings; queries[i] partners database
/// entry i. Exposed for null-model studies.
RecallReport recall_from_embeddings(const EmbeddingDatabase& database,
                                    const std::vector<Tensor>& queries,
                                    std::vector<std::size_t> ns);

/// Draws one (query, database) pair per class from a held-out dataset.
std::vector<RecordPair> draw_class_pairs(const LabeledDataset& ds, std::uint64_t seed);

// ---------------------------------------------------------------------------
// Classification report: confusion matrix plus accuracy histograms over
// sequence length and over |length - class mean length|.
// ---------------------------------------------------------------------------

struct AccuracyBin {
  double lo = 0.0;
  double hi = 0.0;
  std::size_t total = 0;
  std::size_t correct = 0;
};

struct ClassReport {
  std::size_t num_classes = 0;
  std::size_t total = 0;
  double accuracy = 0.0;
  std::vector<std::size_t> confusion;  // row-major true x predicted counts
  std::vector<AccuracyBin> by_length;
  std::vector<AccuracyBin> by_length_offset;  // |len - class mean length|

  std::size_t confusion_at(std::size_t truth, std::size_t pred) const {
    return confusion[truth * num_classes + pred];
  }
  void write_tsv(std::ostream& os, const std::vector<std::string>& class_names) const;
};

/// Pure aggregation from per-example outcomes; classification_report wraps it.
ClassReport make_class_report(std::span<const std::size_t> true_classes,
                              std::span<const std::size_t> predicted,
                              std::span<const std::size_t> lengths,
                              std::size_t num_classes, std::size_t length_bins);

ClassReport classification_report(const EmbedNet& net, const LabeledDataset& ds,
                                  std::size_t length_bins = 10,
                                  std::size_t threads = 0);

// ---------------------------------------------------------------------------
// Noise sweep: test accuracy after perturbing every test sequence, per p.
// ---------------------------------------------------------------------------

struct NoisePoint {
  double p = 0.0;
  double accuracy = 0.0;
};

std::vector<NoisePoint> noise_sweep(const EmbedNet& net, const LabeledDataset& ds,
                                    NoiseKind kind, std::span<const double> p_values,
                                    std::uint64_t seed, bool codon_aligned = true,
                                    std::size_t threads = 0);

void write_noise_tsv(std::ostream& os, const std::vector<NoisePoint>& points);

}  // namespace seqembed
