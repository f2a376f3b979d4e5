#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <unistd.h>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <sstream>

#include "seqembed/datagen.hpp"
#include "seqembed/embed_db.hpp"
#include "seqembed/error.hpp"
#include "seqembed/eval.hpp"
#include "seqembed/train.hpp"
#include "test_util.hpp"

using namespace seqembed;
using namespace seqembed::testutil;
namespace fs = std::filesystem;

namespace {

struct TempDir {
  fs::path path;
  TempDir() {
    path = fs::temp_directory_path() /
           ("seqembed_index_" + std::to_string(::getpid()));
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
  std::string file(const std::string& name) const { return (path / name).string(); }
};

/// Independent oracle: sort every (distance, insertion index) pair.
std::vector<Neighbor> naive_knn(const EmbeddingDatabase& db,
                                std::span<const double> query, std::size_t k) {
  std::vector<Neighbor> all;
  for (std::size_t i = 0; i < db.size(); ++i) {
    double acc = 0.0;
    std::span<const double> v = db.vec(i);
    for (std::size_t d = 0; d < v.size(); ++d) {
      acc += (v[d] - query[d]) * (v[d] - query[d]);
    }
    all.push_back({i, std::sqrt(acc)});
  }
  std::stable_sort(all.begin(), all.end(), [](const Neighbor& a, const Neighbor& b) {
    return a.distance < b.distance;
  });
  all.resize(k);
  return all;
}

EmbeddingDatabase random_db(std::size_t n, std::size_t dim, RngStream& rng,
                            bool with_duplicates) {
  EmbeddingDatabase db(dim);
  std::vector<double> v(dim);
  std::vector<std::vector<double>> previous;
  for (std::size_t i = 0; i < n; ++i) {
    if (with_duplicates && !previous.empty() && rng.bernoulli(0.25)) {
      v = previous[rng.uniform_index(previous.size())];  // force exact ties
    } else {
      for (double& x : v) x = rng.uniform(-1.0, 1.0);
    }
    previous.push_back(v);
    db.add("e" + std::to_string(i), "l" + std::to_string(i % 5), v);
  }
  return db;
}

}  // namespace

TEST_CASE("knn matches the naive oracle on randomized instances") {
  RngStream rng(90);
  for (int it = 0; it < 300; ++it) {
    const std::size_t n = 1 + rng.uniform_index(60);
    const std::size_t dim = 1 + rng.uniform_index(16);
    EmbeddingDatabase db = random_db(n, dim, rng, true);
    std::vector<double> q(dim);
    for (double& x : q) x = rng.uniform(-1.0, 1.0);
    const std::size_t k = 1 + rng.uniform_index(n);

    const auto got = knn_query(db, q, k);
    const auto want = naive_knn(db, q, k);
    REQUIRE(got.size() == want.size());
    for (std::size_t i = 0; i < k; ++i) {
      CHECK(got[i].index == want[i].index);
      CHECK(got[i].distance == doctest::Approx(want[i].distance).epsilon(1e-12));
    }
  }
}

TEST_CASE("knn basics") {
  RngStream rng(91);
  EmbeddingDatabase db = random_db(20, 4, rng, false);

  // Query equal to a database vector comes back first at distance zero.
  std::vector<double> q(db.vec(7).begin(), db.vec(7).end());
  const auto hits = knn_query(db, q, 3);
  CHECK(hits[0].index == 7);
  CHECK(hits[0].distance == 0.0);

  // k == size gives a total ordering.
  const auto all = knn_query(db, q, 20);
  CHECK(all.size() == 20);
  for (std::size_t i = 1; i < all.size(); ++i) {
    CHECK(all[i].distance >= all[i - 1].distance);
  }

  // Error contracts.
  std::vector<double> bad(5, 0.0);
  CHECK_THROWS_AS(knn_query(db, bad, 3), DataError);
  CHECK_THROWS_AS(knn_query(db, q, 0), DataError);
  CHECK_THROWS_AS(knn_query(db, q, 21), DataError);
}

TEST_CASE("ties rank by insertion order") {
  EmbeddingDatabase db(2);
  const std::vector<double> a{1.0, 0.0};
  db.add("first", "x", a);
  db.add("second", "x", a);
  db.add("third", "x", std::vector<double>{0.5, 0.0});
  const auto hits = knn_query(db, std::vector<double>{1.0, 0.0}, 3);
  CHECK(hits[0].index == 0);
  CHECK(hits[1].index == 1);
  CHECK(hits[2].index == 2);
}

TEST_CASE("database rejects duplicates and dimension mismatches") {
  EmbeddingDatabase db(2);
  db.add("a", "l", std::vector<double>{1.0, 2.0});
  CHECK_THROWS_AS(db.add("a", "l", std::vector<double>{3.0, 4.0}), DataError);
  CHECK_THROWS_AS(db.add("b", "l", std::vector<double>{1.0}), DataError);
}

TEST_CASE("export/import round trip preserves rankings") {
  TempDir dir;
  RngStream rng(92);
  EmbeddingDatabase db = random_db(50, 8, rng, false);
  export_embeddings(db, dir.file("emb.tsv"));
  EmbeddingDatabase back = import_embeddings(dir.file("emb.tsv"));
  REQUIRE(back.size() == 50);
  REQUIRE(back.dim() == 8);
  CHECK(back.id(13) == db.id(13));
  CHECK(back.label(13) == db.label(13));

  for (int it = 0; it < 20; ++it) {
    std::vector<double> q(8);
    for (double& x : q) x = rng.uniform(-1.0, 1.0);
    const auto h1 = knn_query(db, q, 10);
    const auto h2 = knn_query(back, q, 10);
    for (std::size_t i = 0; i < 10; ++i) {
      CHECK(h1[i].index == h2[i].index);
      const double denom = std::max(h1[i].distance, 1e-9);
      CHECK(std::abs(h1[i].distance - h2[i].distance) / denom < 1e-6);
    }
  }
}

TEST_CASE("export of an empty database is header-only") {
  TempDir dir;
  EmbeddingDatabase db(64);
  export_embeddings(db, dir.file("empty.tsv"));
  std::ifstream in(dir.file("empty.tsv"));
  std::string line;
  REQUIRE(std::getline(in, line));
  // id + label + 64 vector columns.
  CHECK(std::count(line.begin(), line.end(), '\t') == 65);
  CHECK_FALSE(std::getline(in, line));
}

TEST_CASE("recall report invariants") {
  RngStream rng(93);
  const std::size_t classes = 30;
  EmbeddingDatabase db(4);
  std::vector<Tensor> queries;
  for (std::size_t c = 0; c < classes; ++c) {
    std::vector<double> v(4);
    for (double& x : v) x = rng.uniform(-1.0, 1.0);
    db.add("p" + std::to_string(c), "c" + std::to_string(c), v);
    Tensor q({4});
    for (double& x : q.data) x = rng.uniform(-1.0, 1.0);
    queries.push_back(q);
  }

  RecallReport rep = recall_from_embeddings(db, queries, {1, 5, 10, 30});
  CHECK(rep.num_pairs == classes);
  for (std::size_t i = 1; i < rep.recall.size(); ++i) {
    CHECK(rep.recall[i] >= rep.recall[i - 1]);
  }
  CHECK(rep.recall.back() == 1.0);  // N == number of pairs always recalls

  // Identical query and partner vectors give recall@1 == 1.
  std::vector<Tensor> same;
  for (std::size_t c = 0; c < classes; ++c) {
    Tensor q({4});
    std::copy(db.vec(c).begin(), db.vec(c).end(), q.data.begin());
    same.push_back(q);
  }
  RecallReport perfect = recall_from_embeddings(db, same, {1});
  CHECK(perfect.recall[0] == 1.0);
}

TEST_CASE("random embeddings recall sits at the permutation null") {
  // With i.i.d. query/partner vectors the partner rank is uniform, so
  // recall@1 over C classes concentrates around 1/C.
  RngStream rng(94);
  const std::size_t classes = 100;
  std::size_t hits = 0;
  const int reps = 30;
  for (int rep = 0; rep < reps; ++rep) {
    EmbeddingDatabase db(8);
    std::vector<Tensor> queries;
    for (std::size_t c = 0; c < classes; ++c) {
      std::vector<double> v(8);
      for (double& x : v) x = rng.uniform(-1.0, 1.0);
      db.add("p" + std::to_string(c), "c" + std::to_string(c), v);
      Tensor q({8});
      for (double& x : q.data) x = rng.uniform(-1.0, 1.0);
      queries.push_back(q);
    }
    RecallReport rep1 = recall_from_embeddings(db, queries, {1});
    hits += static_cast<std::size_t>(rep1.recall[0] * classes + 0.5);
  }
  // Binomial(3000, 0.01): mean 30, sigma = 5.45; 3 sigma band.
  const double sigma = std::sqrt(reps * classes * 0.01 * 0.99);
  CHECK(std::abs(static_cast<double>(hits) - 30.0) <= 3.0 * sigma);
}

TEST_CASE("recall protocol rejects duplicate classes") {
  GenSpec spec;
  spec.num_families = 2;
  spec.sequences_per_family = 4;
  spec.seed = 14;
  auto [ds, fams] = generate_families(spec);
  EmbedNet net = build(ModelConfig::desk_preset(2, 30));

  std::vector<RecordPair> pairs;
  pairs.emplace_back(ds.records[0], ds.records[1]);
  pairs.emplace_back(ds.records[2], ds.records[3]);  // same family again
  CHECK_THROWS_WITH_AS(recall_at_n(net, pairs, {1}), doctest::Contains("more than one"),
                       DataError);
}

TEST_CASE("draw_class_pairs picks two distinct records per class") {
  GenSpec spec;
  spec.num_families = 6;
  spec.sequences_per_family = 5;
  spec.seed = 15;
  auto [ds, fams] = generate_families(spec);
  const auto pairs = draw_class_pairs(ds, 123);
  CHECK(pairs.size() == 6);
  for (const auto& [q, p] : pairs) {
    CHECK(q.label == p.label);
    CHECK(q.sequence.id != p.sequence.id);
  }
  const auto again = draw_class_pairs(ds, 123);
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    CHECK(pairs[i].first.sequence.id == again[i].first.sequence.id);
    CHECK(pairs[i].second.sequence.id == again[i].second.sequence.id);
  }
}

TEST_CASE("class report aggregates confusion and bins") {
  // Perfect predictor.
  std::vector<std::size_t> truth{0, 1, 2, 0, 1, 2};
  std::vector<std::size_t> lengths{100, 200, 300, 110, 190, 310};
  ClassReport perfect = make_class_report(truth, truth, lengths, 3, 4);
  CHECK(perfect.accuracy == 1.0);
  for (std::size_t t = 0; t < 3; ++t) {
    for (std::size_t p = 0; p < 3; ++p) {
      CHECK(perfect.confusion_at(t, p) == (t == p ? 2u : 0u));
    }
  }

  // Constant predictor on a balanced set: one full column, accuracy 1/C.
  std::vector<std::size_t> constant(6, 1);
  ClassReport fixed = make_class_report(truth, constant, lengths, 3, 4);
  CHECK(fixed.accuracy == doctest::Approx(1.0 / 3.0));
  for (std::size_t t = 0; t < 3; ++t) {
    CHECK(fixed.confusion_at(t, 1) == 2);
    CHECK(fixed.confusion_at(t, 0) == 0);
  }

  // Row sums equal per-class counts; accuracy equals trace over total.
  std::size_t trace = 0;
  for (std::size_t t = 0; t < 3; ++t) {
    std::size_t row = 0;
    for (std::size_t p = 0; p < 3; ++p) row += fixed.confusion_at(t, p);
    CHECK(row == 2);
    trace += fixed.confusion_at(t, t);
  }
  CHECK(fixed.accuracy == doctest::Approx(double(trace) / 6.0));

  // Bin totals cover every example.
  std::size_t binned = 0;
  for (const AccuracyBin& b : fixed.by_length) binned += b.total;
  CHECK(binned == 6);
}

TEST_CASE("distances form a metric on embeddings") {
  RngStream rng(95);
  EmbeddingDatabase db = random_db(10, 6, rng, false);
  for (std::size_t i = 0; i < db.size(); ++i) {
    std::vector<double> vi(db.vec(i).begin(), db.vec(i).end());
    const auto self = knn_query(db, vi, db.size());
    for (const Neighbor& nb : self) {
      CHECK(nb.distance >= 0.0);
      if (nb.index == i) CHECK(nb.distance == 0.0);
    }
    // Symmetry: d(i, j) computed from either side agrees.
    for (std::size_t j = 0; j < db.size(); ++j) {
      std::vector<double> vj(db.vec(j).begin(), db.vec(j).end());
      const auto from_j = knn_query(db, vj, db.size());
      double dij = 0.0, dji = 0.0;
      for (const Neighbor& nb : self) {
        if (nb.index == j) dij = nb.distance;
      }
      for (const Neighbor& nb : from_j) {
        if (nb.index == i) dji = nb.distance;
      }
      CHECK(dij == doctest::Approx(dji).epsilon(1e-12));
    }
  }
}

TEST_CASE("build_db skips failing records and keeps the rest") {
  GenSpec spec;
  spec.num_families = 2;
  spec.sequences_per_family = 3;
  spec.seed = 16;
  auto [ds, fams] = generate_families(spec);
  // Sabotage one record with a too-short sequence.
  ds.records[2].sequence.bases = "ACGACG";

  EmbedNet net = build(ModelConfig::desk_preset(2, 31));
  BuildReport report;
  EmbeddingDatabase db = build_db(net, ds, std::nullopt, 0, &report);
  CHECK(db.size() == 5);
  CHECK(report.skipped == 1);
  REQUIRE(report.errors.size() == 1);
  CHECK(report.errors[0].index == 2);

  // Identical content embeds identically.
  GenSpec dup = spec;
  dup.substitution_rate = 0.0;
  auto [ds2, fams2] = generate_families(dup);
  EmbeddingDatabase db2 = build_db(net, ds2);
  const auto v0 = db2.vec(0);
  const auto v1 = db2.vec(1);
  for (std::size_t d = 0; d < v0.size(); ++d) CHECK(v0[d] == v1[d]);

  // Rebuilding from the same net is bitwise identical.
  EmbeddingDatabase db3 = build_db(net, ds2);
  for (std::size_t i = 0; i < db2.size(); ++i) {
    const auto a = db2.vec(i), b = db3.vec(i);
    for (std::size_t d = 0; d < a.size(); ++d) CHECK(a[d] == b[d]);
  }
}
