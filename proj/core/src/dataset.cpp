#include "seqembed/dataset.hpp"

#include <algorithm>
#include <fstream>
#include <map>
#include <sstream>
#include <unordered_map>
#include <unordered_set>

#include "seqembed/error.hpp"

namespace seqembed {

std::vector<std::size_t> LabeledDataset::indices_of(Split split) const {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < records.size(); ++i) {
    if (records[i].split == split) out.push_back(i);
  }
  return out;
}

std::vector<std::vector<std::size_t>> LabeledDataset::by_class(Split split) const {
  std::vector<std::vector<std::size_t>> out(num_classes());
  for (std::size_t i = 0; i < records.size(); ++i) {
    if (records[i].split == split) out[records[i].class_index].push_back(i);
  }
  return out;
}

void LabeledDataset::reindex() {
  std::map<std::string, std::size_t> dict;
  for (const LabeledRecord& r : records) dict.emplace(r.label, 0);
  std::size_t next = 0;
  for (auto& [label, idx] : dict) idx = next++;
  class_names.resize(dict.size());
  for (const auto& [label, idx] : dict) class_names[idx] = label;
  for (LabeledRecord& r : records) r.class_index = dict.at(r.label);
}

std::vector<DnaSequence> read_fasta(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open FASTA file '" + path + "'");

  std::vector<DnaSequence> seqs;
  std::unordered_set<std::string> seen;
  std::string line;
  std::string current_id;
  std::string current_body;
  std::size_t line_no = 0;
  std::size_t header_line = 0;
  bool have_record = false;

  auto flush = [&]() {
    if (!have_record) return;
    if (current_body.empty()) {
      throw DataError(path + ":" + std::to_string(header_line) + ": record '" +
                      current_id + "' has no sequence data");
    }
    if (!seen.insert(current_id).second) {
      throw DataError(path + ":" + std::to_string(header_line) + ": duplicate id '" +
                      current_id + "'");
    }
    seqs.push_back(make_sequence(current_id, current_body));
    current_body.clear();
  };

  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (line[0] == '>') {
      flush();
      std::string header = line.substr(1);
      const std::size_t ws = header.find_first_of(" \t");
      current_id = ws == std::string::npos ? header : header.substr(0, ws);
      if (current_id.empty()) {
        throw DataError(path + ":" + std::to_string(line_no) + ": empty FASTA header");
      }
      header_line = line_no;
      have_record = true;
    } else {
      if (!have_record) {
        throw DataError(path + ":" + std::to_string(line_no) +
                        ": sequence data before any '>' header");
      }
      current_body += line;
    }
  }
  flush();
  if (seqs.empty()) throw DataError("FASTA file '" + path + "' contains no records");
  return seqs;
}

void write_fasta(const std::vector<DnaSequence>& seqs, const std::string& path,
                 std::size_t line_width) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write FASTA file '" + path + "'");
  for (const DnaSequence& s : seqs) {
    out << '>' << s.id << '\n';
    for (std::size_t i = 0; i < s.bases.size(); i += line_width) {
      out << s.bases.substr(i, line_width) << '\n';
    }
  }
  if (!out) throw DataError("I/O error writing '" + path + "'");
}

LabeledDataset load_dataset(const std::string& fasta_path,
                            const std::string& labels_path) {
  std::vector<DnaSequence> seqs = read_fasta(fasta_path);

  std::ifstream in(labels_path);
  if (!in) throw DataError("cannot open label file '" + labels_path + "'");

  std::unordered_map<std::string, std::size_t> id_to_pos;
  for (std::size_t i = 0; i < seqs.size(); ++i) id_to_pos.emplace(seqs[i].id, i);

  std::unordered_map<std::string, std::string> labels;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const std::size_t tab = line.find('\t');
    if (tab == std::string::npos || tab == 0 || tab + 1 >= line.size()) {
      throw DataError(labels_path + ":" + std::to_string(line_no) +
                      ": expected 'id<TAB>label'");
    }
    std::string id = line.substr(0, tab);
    std::string label = line.substr(tab + 1);
    if (!id_to_pos.count(id)) {
      throw DataError(labels_path + ":" + std::to_string(line_no) + ": id '" + id +
                      "' does not appear in '" + fasta_path + "'");
    }
    if (!labels.emplace(std::move(id), std::move(label)).second) {
      throw DataError(labels_path + ":" + std::to_string(line_no) +
                      ": duplicate label row for id '" + line.substr(0, tab) + "'");
    }
  }

  LabeledDataset ds;
  ds.records.reserve(seqs.size());
  for (DnaSequence& s : seqs) {
    auto it = labels.find(s.id);
    if (it == labels.end()) {
      throw DataError("id '" + s.id + "' from '" + fasta_path + "' has no label in '" +
                      labels_path + "'");
    }
    LabeledRecord r;
    r.sequence = std::move(s);
    r.label = it->second;
    ds.records.push_back(std::move(r));
  }
  ds.reindex();
  return ds;
}

void write_labels(const LabeledDataset& ds, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write label file '" + path + "'");
  for (const LabeledRecord& r : ds.records) {
    out << r.sequence.id << '\t' << r.label << '\n';
  }
  if (!out) throw DataError("I/O error writing '" + path + "'");
}

void write_dataset(const LabeledDataset& ds, const std::string& fasta_path,
                   const std::string& labels_path) {
  std::vector<DnaSequence> seqs;
  seqs.reserve(ds.records.size());
  for (const LabeledRecord& r : ds.records) seqs.push_back(r.sequence);
  write_fasta(seqs, fasta_path);
  write_labels(ds, labels_path);
}

}  // namespace seqembed
