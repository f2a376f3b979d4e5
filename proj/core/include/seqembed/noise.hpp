#pragma once

#include <cstdint>

#include "seqembed/dna.hpp"
#include "seqembed/rng.hpp"

namespace seqembed {

enum class NoiseKind { kSubstitution, kDeletion };

struct NoiseSpec {
  NoiseKind kind = NoiseKind::kSubstitution;
  double p = 0.0;
  bool codon_aligned = false;  // deletion only
  std::uint64_t seed = 0;
};

/// Read-noise model: each base independently flips with probability p to a
/// uniform choice among the other three. Length is preserved; p = 1 changes
/// every base.
DnaSequence substitute(const DnaSequence& seq, double p, RngStream& rng);

/// Removes one contiguous segment of round(p * len) bases, start uniform over
/// valid positions. With codon_aligned the start is restricted to multiples
/// of 3 and the segment length is rounded to the nearest multiple of 3, so
/// the downstream reading frame is preserved.
DnaSequence delete_segment(const DnaSequence& seq, double p, bool codon_aligned,
                           RngStream& rng);

DnaSequence apply_noise(const DnaSequence& seq, const NoiseSpec& spec, RngStream& rng);

}  // namespace seqembed
