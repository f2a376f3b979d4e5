#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "seqembed/dataset.hpp"
#include "seqembed/rng.hpp"

namespace seqembed {

/// A motif planted into a family's prototype at a codon-aligned anchor drawn
/// from [anchor_lo, anchor_hi] (both multiples of 3).
struct Motif {
  std::string bases;
  std::size_t anchor_lo = 0;
  std::size_t anchor_hi = 0;
};

struct FamilySpec {
  std::size_t family_id = 0;
  std::vector<Motif> motifs;
  std::size_t len_min = 0;  // multiples of 3
  std::size_t len_max = 0;
  double substitution_rate = 0.0;  // in [0, 1)
};

struct GenSpec {
  std::size_t num_families = 10;
  std::size_t sequences_per_family = 100;
  std::size_t first_family_id = 0;  // held-out sets use disjoint id ranges
  std::size_t motif_count_min = 4;
  std::size_t motif_count_max = 6;
  std::size_t motif_len_min = 12;  // multiples of 3
  std::size_t motif_len_max = 21;
  std::size_t len_min = 150;  // multiples of 3
  std::size_t len_max = 300;
  double substitution_rate = 0.35;
  std::uint64_t seed = 0;

  void validate() const;  // throws ConfigError
};

/// Family label for a family id, e.g. "fam0007".
std::string family_label(std::size_t family_id);

/// Each base is independently replaced by a uniform choice among the other
/// three with probability `rate`.
DnaSequence mutate_sequence(const DnaSequence& seq, double rate, RngStream& rng);

/// Builds num_families synthetic families: per family a random prototype of
/// random legal length with motifs planted at codon-aligned anchors over an
/// i.i.d. uniform background; each member is an independently mutated copy of
/// the prototype. Pure function of the spec (bit-reproducible).
std::pair<LabeledDataset, std::vector<FamilySpec>> generate_families(const GenSpec& spec);

/// Generates one member of an explicit family spec; exposed so overlapping
/// families (shared motif sets) can be constructed for confusion studies.
LabeledDataset generate_from_specs(const std::vector<FamilySpec>& families,
                                   std::size_t sequences_per_family,
                                   std::uint64_t seed);

/// Stratified split: per family, floor(n * test_fraction) members (at least
/// one) are tagged test, the rest train. Every family lands in both splits.
void split_dataset(LabeledDataset& ds, double test_fraction, RngStream rng);

void write_manifest(const GenSpec& spec, const std::string& path);

}  // namespace seqembed
