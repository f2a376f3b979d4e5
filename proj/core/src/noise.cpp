#include "seqembed/noise.hpp"

#include <cmath>
#include <string>

#include "seqembed/error.hpp"

namespace seqembed {

namespace {

char flip_base(char base, RngStream& rng) {
  std::size_t idx = 0;
  for (std::size_t i = 0; i < 4; ++i) {
    if (kBaseOrder[i] == base) idx = i;
  }
  const std::size_t shift = 1 + rng.uniform_index(3);
  return kBaseOrder[(idx + shift) % 4];
}

std::size_t round_half_up(double x) {
  return static_cast<std::size_t>(std::floor(x + 0.5));
}

}  // namespace

DnaSequence substitute(const DnaSequence& seq, double p, RngStream& rng) {
  if (p < 0.0 || p > 1.0) throw ConfigError("substitute: p must be in [0, 1]");
  DnaSequence out = seq;
  for (char& base : out.bases) {
    if (base == 'N') continue;
    if (rng.bernoulli(p)) base = flip_base(base, rng);
  }
  return out;
}

DnaSequence delete_segment(const DnaSequence& seq, double p, bool codon_aligned,
                           RngStream& rng) {
  if (p < 0.0 || p >= 1.0) throw ConfigError("delete_segment: p must be in [0, 1)");
  const std::size_t len = seq.length();

  std::size_t cut = round_half_up(p * static_cast<double>(len));
  if (codon_aligned) cut = 3 * round_half_up(static_cast<double>(cut) / 3.0);
  if (cut == 0) return seq;
  if (cut >= len) {
    throw DataError("delete_segment: removing " + std::to_string(cut) +
                    " bases would empty sequence '" + seq.id + "' of length " +
                    std::to_string(len));
  }

  std::size_t start;
  if (codon_aligned) {
    const std::size_t slots = (len - cut) / 3 + 1;
    start = 3 * rng.uniform_index(slots);
  } else {
    start = rng.uniform_index(len - cut + 1);
  }

  DnaSequence out;
  out.id = seq.id;
  out.bases = seq.bases.substr(0, start) + seq.bases.substr(start + cut);
  return out;
}

DnaSequence apply_noise(const DnaSequence& seq, const NoiseSpec& spec, RngStream& rng) {
  switch (spec.kind) {
    case NoiseKind::kSubstitution:
      return substitute(seq, spec.p, rng);
    case NoiseKind::kDeletion:
      return delete_segment(seq, spec.p, spec.codon_aligned, rng);
  }
  throw ConfigError("apply_noise: unknown noise kind");
}

}  // namespace seqembed
