#include "seqembed/datagen.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>

#include "seqembed/error.hpp"

namespace seqembed {

namespace {

// Substream tags within the datagen component.
constexpr std::uint64_t kPrototypeStream = 1ULL << 40;
constexpr std::uint64_t kMemberStream = 2ULL << 40;

char random_base(RngStream& rng) { return kBaseOrder[rng.uniform_index(4)]; }

char random_other_base(char base, RngStream& rng) {
  // Uniform over the three alternatives.
  const std::size_t shift = 1 + rng.uniform_index(3);
  std::size_t idx = 0;
  for (std::size_t i = 0; i < 4; ++i) {
    if (kBaseOrder[i] == base) idx = i;
  }
  return kBaseOrder[(idx + shift) % 4];
}

std::size_t random_multiple_of_3(std::size_t lo, std::size_t hi, RngStream& rng) {
  const std::size_t n = (hi - lo) / 3 + 1;
  return lo + 3 * rng.uniform_index(n);
}

}  // namespace

void GenSpec::validate() const {
  auto positive = [](std::size_t v, const char* what) {
    if (v == 0) throw ConfigError(std::string("gen spec: ") + what + " must be positive");
  };
  positive(num_families, "num_families");
  positive(sequences_per_family, "sequences_per_family");
  positive(motif_count_min, "motif_count_min");
  positive(motif_len_min, "motif_len_min");
  positive(len_min, "len_min");
  if (motif_count_max < motif_count_min || motif_len_max < motif_len_min ||
      len_max < len_min) {
    throw ConfigError("gen spec: max bounds must be >= min bounds");
  }
  if (len_min % 3 != 0 || len_max % 3 != 0) {
    throw ConfigError("gen spec: sequence lengths must be multiples of 3");
  }
  if (motif_len_min % 3 != 0 || motif_len_max % 3 != 0) {
    throw ConfigError("gen spec: motif lengths must be multiples of 3");
  }
  if (substitution_rate < 0.0 || substitution_rate >= 1.0) {
    throw ConfigError("gen spec: substitution_rate must be in [0, 1)");
  }
  if (motif_count_max * motif_len_max > len_min) {
    throw ConfigError("gen spec: worst-case motif budget " +
                      std::to_string(motif_count_max * motif_len_max) +
                      " exceeds len_min " + std::to_string(len_min) +
                      "; reduce motif count or length");
  }
}

std::string family_label(std::size_t family_id) {
  char buf[16];
  std::snprintf(buf, sizeof(buf), "fam%04zu", family_id);
  return buf;
}

DnaSequence mutate_sequence(const DnaSequence& seq, double rate, RngStream& rng) {
  if (rate < 0.0 || rate >= 1.0) {
    throw ConfigError("mutate_sequence: rate must be in [0, 1)");
  }
  DnaSequence out = seq;
  for (char& base : out.bases) {
    if (rng.bernoulli(rate)) base = random_other_base(base, rng);
  }
  return out;
}

namespace {

/// Non-overlapping codon-aligned anchors, left to right, with the slack
/// distributed uniformly over the gaps (stars and bars in codon units).
/// Always succeeds when the motifs fit at all.
std::vector<std::size_t> pack_anchors(const std::vector<std::size_t>& motif_lens,
                                      std::size_t len_min, RngStream& rng,
                                      std::size_t family_id) {
  std::size_t occupied = 0;
  for (std::size_t len : motif_lens) occupied += len;
  if (occupied > len_min) {
    throw DataError("family " + std::to_string(family_id) + ": " +
                    std::to_string(occupied) + " bases of motif cannot pack into length " +
                    std::to_string(len_min));
  }

  const std::size_t slack = (len_min - occupied) / 3;
  std::vector<std::size_t> cuts(motif_lens.size());
  for (std::size_t& c : cuts) c = rng.uniform_index(slack + 1);
  std::sort(cuts.begin(), cuts.end());

  std::vector<std::size_t> anchors(motif_lens.size());
  std::size_t used = 0;
  for (std::size_t m = 0; m < motif_lens.size(); ++m) {
    anchors[m] = 3 * cuts[m] + used;
    used += motif_lens[m];
  }
  return anchors;
}

FamilySpec make_family_spec(const GenSpec& spec, std::size_t family_id) {
  RngStream rng =
      RngStream::derive(spec.seed, RngComponent::kDatagen, kPrototypeStream + family_id);

  FamilySpec fam;
  fam.family_id = family_id;
  fam.len_min = spec.len_min;
  fam.len_max = spec.len_max;
  fam.substitution_rate = spec.substitution_rate;

  const std::size_t count =
      spec.motif_count_min +
      rng.uniform_index(spec.motif_count_max - spec.motif_count_min + 1);
  std::vector<std::size_t> lens(count);
  for (std::size_t& len : lens) {
    len = random_multiple_of_3(spec.motif_len_min, spec.motif_len_max, rng);
  }
  const std::vector<std::size_t> anchors =
      pack_anchors(lens, spec.len_min, rng, family_id);

  for (std::size_t m = 0; m < count; ++m) {
    Motif motif;
    motif.bases.resize(lens[m]);
    for (char& b : motif.bases) b = random_base(rng);
    motif.anchor_lo = motif.anchor_hi = anchors[m];
    fam.motifs.push_back(std::move(motif));
  }
  return fam;
}

DnaSequence make_prototype(const FamilySpec& fam, RngStream& rng) {
  const std::size_t len = random_multiple_of_3(fam.len_min, fam.len_max, rng);
  DnaSequence proto;
  proto.bases.resize(len);
  for (char& b : proto.bases) b = random_base(rng);
  for (const Motif& motif : fam.motifs) {
    std::size_t anchor = motif.anchor_lo;
    if (motif.anchor_hi > motif.anchor_lo) {
      anchor = random_multiple_of_3(motif.anchor_lo, motif.anchor_hi, rng);
    }
    if (anchor % 3 != 0 || anchor + motif.bases.size() > len) {
      throw DataError("family " + std::to_string(fam.family_id) +
                      ": motif does not fit at anchor " + std::to_string(anchor));
    }
    std::copy(motif.bases.begin(), motif.bases.end(), proto.bases.begin() + anchor);
  }
  return proto;
}

}  // namespace

LabeledDataset generate_from_specs(const std::vector<FamilySpec>& families,
                                   std::size_t sequences_per_family,
                                   std::uint64_t seed) {
  LabeledDataset ds;
  ds.records.reserve(families.size() * sequences_per_family);

  for (const FamilySpec& fam : families) {
    // The prototype and each member draw from their own substream, so member
    // counts never shift another member's bases.
    RngStream proto_rng = RngStream::derive(seed, RngComponent::kDatagen,
                                            kMemberStream + (fam.family_id << 20));
    const DnaSequence prototype = make_prototype(fam, proto_rng);

    const std::string label = family_label(fam.family_id);
    for (std::size_t m = 0; m < sequences_per_family; ++m) {
      RngStream member_rng = RngStream::derive(
          seed, RngComponent::kDatagen, kMemberStream + (fam.family_id << 20) + m + 1);
      LabeledRecord rec;
      rec.sequence = mutate_sequence(prototype, fam.substitution_rate, member_rng);
      char buf[32];
      std::snprintf(buf, sizeof(buf), "f%04zu_m%04zu", fam.family_id, m);
      rec.sequence.id = buf;
      rec.label = label;
      ds.records.push_back(std::move(rec));
    }
  }
  ds.reindex();
  return ds;
}

std::pair<LabeledDataset, std::vector<FamilySpec>> generate_families(const GenSpec& spec) {
  spec.validate();
  std::vector<FamilySpec> families;
  families.reserve(spec.num_families);
  for (std::size_t f = 0; f < spec.num_families; ++f) {
    families.push_back(make_family_spec(spec, spec.first_family_id + f));
  }
  LabeledDataset ds =
      generate_from_specs(families, spec.sequences_per_family, spec.seed);
  return {std::move(ds), std::move(families)};
}

void split_dataset(LabeledDataset& ds, double test_fraction, RngStream rng) {
  if (test_fraction <= 0.0 || test_fraction >= 1.0) {
    throw ConfigError("split: test_fraction must be in (0, 1)");
  }
  for (LabeledRecord& r : ds.records) r.split = Split::kTrain;

  std::vector<std::vector<std::size_t>> pools(ds.num_classes());
  for (std::size_t i = 0; i < ds.records.size(); ++i) {
    pools[ds.records[i].class_index].push_back(i);
  }
  for (std::size_t c = 0; c < pools.size(); ++c) {
    auto& pool = pools[c];
    if (pool.size() < 2) {
      throw DataError("class '" + ds.class_names[c] +
                      "' has fewer than 2 members; cannot split");
    }
    // Fisher-Yates with our stream, then take the head as the test slice.
    for (std::size_t i = pool.size() - 1; i > 0; --i) {
      const std::size_t j = rng.uniform_index(i + 1);
      std::swap(pool[i], pool[j]);
    }
    std::size_t n_test =
        static_cast<std::size_t>(static_cast<double>(pool.size()) * test_fraction);
    n_test = std::max<std::size_t>(1, std::min(n_test, pool.size() - 1));
    for (std::size_t i = 0; i < n_test; ++i) ds.records[pool[i]].split = Split::kTest;
  }
}

void write_manifest(const GenSpec& spec, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write manifest '" + path + "'");
  out << "num_families=" << spec.num_families << '\n'
      << "sequences_per_family=" << spec.sequences_per_family << '\n'
      << "first_family_id=" << spec.first_family_id << '\n'
      << "motif_count_min=" << spec.motif_count_min << '\n'
      << "motif_count_max=" << spec.motif_count_max << '\n'
      << "motif_len_min=" << spec.motif_len_min << '\n'
      << "motif_len_max=" << spec.motif_len_max << '\n'
      << "len_min=" << spec.len_min << '\n'
      << "len_max=" << spec.len_max << '\n'
      << "substitution_rate=" << spec.substitution_rate << '\n'
      << "seed=" << spec.seed << '\n';
  if (!out) throw DataError("I/O error writing '" + path + "'");
}

}  // namespace seqembed
