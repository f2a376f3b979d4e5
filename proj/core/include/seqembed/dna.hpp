#pragma once

#include <string>
#include <string_view>

#include "seqembed/tensor.hpp"

namespace seqembed {

/// A DNA sequence over {A,C,G,T,N}, uppercase. N marks an ambiguous base.
struct DnaSequence {
  std::string id;
  std::string bases;

  std::size_t length() const { return bases.size(); }
};

/// Channel order of one-hot rows.
inline constexpr char kBaseOrder[4] = {'A', 'C', 'G', 'T'};

/// Uppercases and validates; throws DataError naming `id` on a bad symbol or
/// an empty sequence.
std::string normalize_bases(std::string_view raw, const std::string& id);

DnaSequence make_sequence(std::string id, std::string_view raw);

enum class LengthPolicy {
  kReject,                // overlong sequence is an error
  kTruncateCodonBoundary  // cut at the largest multiple of 3 <= max_len
};

/// One-hot matrix: a MaskedSequence of shape max_len x 4 where each valid row
/// has exactly one channel set (or none, for N) and padded rows are zero.
using OneHotMatrix = MaskedSequence;

OneHotMatrix encode_onehot(const DnaSequence& seq, std::size_t max_len,
                           LengthPolicy policy = LengthPolicy::kReject);

/// Inverse of encode_onehot over valid rows; an all-zero valid row decodes to
/// N. Throws DataError on a row with more than one set channel.
DnaSequence decode_onehot(const OneHotMatrix& m);

}  // namespace seqembed
