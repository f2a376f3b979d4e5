#include "seqembed/embed_db.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <unordered_set>

#include "seqembed/error.hpp"
#include "seqembed/parallel.hpp"
#include "seqembed/train.hpp"

namespace seqembed {

void EmbeddingDatabase::add(std::string id, std::string label,
                            std::span<const double> vec) {
  if (dim_ == 0) dim_ = vec.size();
  if (vec.size() != dim_) {
    throw DataError("embedding '" + id + "' has dimension " +
                    std::to_string(vec.size()) + ", database expects " +
                    std::to_string(dim_));
  }
  if (!index_by_id_.emplace(id, ids_.size()).second) {
    throw DataError("duplicate embedding id '" + id + "'");
  }
  ids_.push_back(std::move(id));
  labels_.push_back(std::move(label));
  vectors_.insert(vectors_.end(), vec.begin(), vec.end());
}

std::vector<Neighbor> knn_query(const EmbeddingDatabase& db,
                                std::span<const double> query, std::size_t k) {
  if (query.size() != db.dim()) {
    throw DataError("query has dimension " + std::to_string(query.size()) +
                    ", database expects " + std::to_string(db.dim()));
  }
  if (k < 1 || k > db.size()) {
    throw DataError("k = " + std::to_string(k) + " is out of range for a database of " +
                    std::to_string(db.size()) + " entries");
  }

  const std::size_t n = db.size();
  std::vector<Neighbor> all(n);
  for (std::size_t i = 0; i < n; ++i) {
    std::span<const double> v = db.vec(i);
    double acc = 0.0;
    for (std::size_t d = 0; d < v.size(); ++d) {
      const double diff = v[d] - query[d];
      acc += diff * diff;
    }
    all[i] = {i, acc};
  }

  auto closer = [](const Neighbor& a, const Neighbor& b) {
    return a.distance != b.distance ? a.distance < b.distance : a.index < b.index;
  };
  std::partial_sort(all.begin(), all.begin() + static_cast<std::ptrdiff_t>(k), all.end(),
                    closer);
  all.resize(k);
  for (Neighbor& nb : all) nb.distance = std::sqrt(nb.distance);
  return all;
}

std::vector<QueryHit> resolve_hits(const EmbeddingDatabase& db,
                                   const std::vector<Neighbor>& neighbors) {
  std::vector<QueryHit> hits;
  hits.reserve(neighbors.size());
  for (const Neighbor& nb : neighbors) {
    hits.push_back({db.id(nb.index), db.label(nb.index), nb.distance});
  }
  return hits;
}

EmbeddingDatabase build_db(const EmbedNet& net, const LabeledDataset& ds,
                           std::optional<Split> subset, std::size_t threads,
                           BuildReport* report) {
  std::vector<std::size_t> idx;
  for (std::size_t i = 0; i < ds.records.size(); ++i) {
    if (!subset || ds.records[i].split == *subset) idx.push_back(i);
  }

  std::vector<std::optional<Tensor>> embeddings(idx.size());
  std::vector<std::string> errors(idx.size());
  parallel_for(idx.size(), threads, [&](std::size_t i) {
    try {
      MaskedSequence input = encode_for_net(net.config, ds.records[idx[i]].sequence);
      embeddings[i] = forward_embedding(net, input);
    } catch (const Error& e) {
      errors[i] = e.what();
    }
  });

  EmbeddingDatabase db(net.config.embedding_dim);
  for (std::size_t i = 0; i < idx.size(); ++i) {
    const LabeledRecord& rec = ds.records[idx[i]];
    if (!embeddings[i]) {
      if (report) {
        ++report->skipped;
        report->errors.push_back({idx[i], errors[i]});
      }
      continue;
    }
    db.add(rec.sequence.id, rec.label,
           std::span<const double>(embeddings[i]->data.data(), embeddings[i]->size()));
  }
  return db;
}

void export_embeddings(const EmbeddingDatabase& db, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write embeddings file '" + path + "'");
  out << "id\tlabel";
  for (std::size_t d = 0; d < db.dim(); ++d) out << "\tv" << (d + 1);
  out << '\n';

  char buf[40];
  for (std::size_t i = 0; i < db.size(); ++i) {
    out << db.id(i) << '\t' << db.label(i);
    for (double v : db.vec(i)) {
      std::snprintf(buf, sizeof(buf), "%.9g", v);
      out << '\t' << buf;
    }
    out << '\n';
  }
  if (!out) throw DataError("I/O error writing '" + path + "'");
}

EmbeddingDatabase import_embeddings(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open embeddings file '" + path + "'");

  std::string line;
  if (!std::getline(in, line)) {
    throw DataError("embeddings file '" + path + "' is empty");
  }
  if (line.rfind("id\tlabel", 0) != 0) {
    throw DataError(path + ":1: expected header starting with 'id<TAB>label'");
  }
  std::size_t dim = 0;
  for (char ch : line) {
    if (ch == '\t') ++dim;
  }
  if (dim < 1) throw DataError(path + ":1: header names no vector columns");
  dim -= 1;

  EmbeddingDatabase db(dim);
  std::vector<double> vec(dim);
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    std::istringstream ss(line);
    std::string id, label, field;
    if (!std::getline(ss, id, '\t') || !std::getline(ss, label, '\t')) {
      throw DataError(path + ":" + std::to_string(line_no) + ": malformed row");
    }
    for (std::size_t d = 0; d < dim; ++d) {
      if (!std::getline(ss, field, '\t')) {
        throw DataError(path + ":" + std::to_string(line_no) + ": expected " +
                        std::to_string(dim) + " vector columns");
      }
      try {
        vec[d] = std::stod(field);
      } catch (const std::exception&) {
        throw DataError(path + ":" + std::to_string(line_no) +
                        ": bad number '" + field + "'");
      }
    }
    if (std::getline(ss, field, '\t')) {
      throw DataError(path + ":" + std::to_string(line_no) + ": too many columns");
    }
    db.add(std::move(id), std::move(label), vec);
  }
  return db;
}

}  // namespace seqembed
