#pragma once

#include <optional>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "seqembed/dataset.hpp"
#include "seqembed/model.hpp"

namespace seqembed {

/// Searchable collection of labeled embedding vectors. Insertion order is
/// part of the contract: equal distances rank by it, which keeps results
/// platform-independent.
class EmbeddingDatabase {
 public:
  EmbeddingDatabase() = default;
  explicit EmbeddingDatabase(std::size_t dim) : dim_(dim) {}

  std::size_t dim() const { return dim_; }
  std::size_t size() const { return ids_.size(); }

  void add(std::string id, std::string label, std::span<const double> vec);

  const std::string& id(std::size_t i) const { return ids_[i]; }
  const std::string& label(std::size_t i) const { return labels_[i]; }
  std::span<const double> vec(std::size_t i) const {
    return {vectors_.data() + i * dim_, dim_};
  }

 private:
  std::size_t dim_ = 0;
  std::vector<std::string> ids_;
  std::vector<std::string> labels_;
  std::vector<double> vectors_;  // row-major size() x dim()
  std::unordered_map<std::string, std::size_t> index_by_id_;
};

struct Neighbor {
  std::size_t index = 0;
  double distance = 0.0;
};

/// Exact k nearest neighbors by Euclidean distance: a full scan of the
/// database. Ties order by database insertion index. The contract is
/// backend-agnostic; an approximate index could sit behind the same shape.
std::vector<Neighbor> knn_query(const EmbeddingDatabase& db,
                                std::span<const double> query, std::size_t k);

struct QueryHit {
  std::string id;
  std::string label;
  double distance = 0.0;
};

std::vector<QueryHit> resolve_hits(const EmbeddingDatabase& db,
                                   const std::vector<Neighbor>& neighbors);

struct BuildReport {
  std::size_t skipped = 0;
  std::vector<BatchItemError> errors;
};

/// Embeds every record (optionally restricted to one split). Failing records
/// are skipped and counted.
EmbeddingDatabase build_db(const EmbedNet& net, const LabeledDataset& ds,
                           std::optional<Split> subset = std::nullopt,
                           std::size_t threads = 0, BuildReport* report = nullptr);

/// TSV export: header `id<TAB>label<TAB>v1..vd`, values at 9 significant
/// digits. Reloading reproduces distances to within 1e-6 relative.
void export_embeddings(const EmbeddingDatabase& db, const std::string& path);

EmbeddingDatabase import_embeddings(const std::string& path);

}  // namespace seqembed
