#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "seqembed/dna.hpp"

namespace seqembed {

enum class Split : unsigned char { kTrain, kTest };

struct LabeledRecord {
  DnaSequence sequence;
  std::string label;
  std::size_t class_index = 0;
  Split split = Split::kTrain;
};

/// Records plus the label dictionary. class_index values are assigned by
/// sorting the distinct labels lexicographically, so they are a pure function
/// of the label set regardless of file order.
struct LabeledDataset {
  std::vector<LabeledRecord> records;
  std::vector<std::string> class_names;

  std::size_t num_classes() const { return class_names.size(); }
  std::size_t size() const { return records.size(); }

  std::vector<std::size_t> indices_of(Split split) const;

  /// Per-class record indices restricted to a split; outer index = class.
  std::vector<std::vector<std::size_t>> by_class(Split split) const;

  /// Recomputes class_names and class_index from the records' labels.
  void reindex();
};

/// FASTA reader: '>' headers (id = text up to the first whitespace),
/// multi-line bodies concatenated, case-insensitive bases. Errors carry line
/// numbers. Duplicate ids are rejected.
std::vector<DnaSequence> read_fasta(const std::string& path);

void write_fasta(const std::vector<DnaSequence>& seqs, const std::string& path,
                 std::size_t line_width = 70);

/// Label file: one `id<TAB>label` per line, UTF-8.
/// Every FASTA id must be labeled and every label row must name a known id.
LabeledDataset load_dataset(const std::string& fasta_path,
                            const std::string& labels_path);

void write_labels(const LabeledDataset& ds, const std::string& path);
void write_dataset(const LabeledDataset& ds, const std::string& fasta_path,
                   const std::string& labels_path);

}  // namespace seqembed
