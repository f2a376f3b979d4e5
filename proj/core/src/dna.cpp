#include "seqembed/dna.hpp"

#include <cctype>

#include "seqembed/error.hpp"

namespace seqembed {

std::string normalize_bases(std::string_view raw, const std::string& id) {
  if (raw.empty()) throw DataError("sequence '" + id + "' is empty");
  std::string out;
  out.reserve(raw.size());
  for (char ch : raw) {
    const char up = static_cast<char>(std::toupper(static_cast<unsigned char>(ch)));
    switch (up) {
      case 'A':
      case 'C':
      case 'G':
      case 'T':
      case 'N':
        out.push_back(up);
        break;
      default:
        throw DataError("sequence '" + id + "' contains invalid symbol '" +
                        std::string(1, ch) + "'");
    }
  }
  return out;
}

DnaSequence make_sequence(std::string id, std::string_view raw) {
  DnaSequence s;
  s.bases = normalize_bases(raw, id);
  s.id = std::move(id);
  return s;
}

namespace {

int channel_of(char base) {
  switch (base) {
    case 'A': return 0;
    case 'C': return 1;
    case 'G': return 2;
    case 'T': return 3;
    default: return -1;  // N
  }
}

}  // namespace

OneHotMatrix encode_onehot(const DnaSequence& seq, std::size_t max_len,
                           LengthPolicy policy) {
  if (max_len < 1) throw ConfigError("encode_onehot: max_len must be >= 1");
  std::size_t take = seq.length();
  if (take > max_len) {
    if (policy == LengthPolicy::kReject) {
      throw DataError("sequence '" + seq.id + "' has length " +
                      std::to_string(seq.length()) + " exceeding max_len " +
                      std::to_string(max_len));
    }
    take = max_len - max_len % 3;
    if (take == 0) {
      throw DataError("sequence '" + seq.id +
                      "' cannot be truncated to a codon boundary within max_len " +
                      std::to_string(max_len));
    }
  }

  OneHotMatrix m(max_len, 4, take);
  for (std::size_t i = 0; i < take; ++i) {
    const int ch = channel_of(seq.bases[i]);
    if (ch >= 0) m.steps.at(i, static_cast<std::size_t>(ch)) = 1.0;
  }
  return m;
}

DnaSequence decode_onehot(const OneHotMatrix& m) {
  if (m.valid_len < 1 || m.valid_len > m.step_count() || m.channels() != 4) {
    throw DataError("decode_onehot: malformed one-hot matrix");
  }
  DnaSequence seq;
  seq.bases.reserve(m.valid_len);
  for (std::size_t i = 0; i < m.valid_len; ++i) {
    int set_channel = -1;
    for (std::size_t c = 0; c < 4; ++c) {
      const double v = m.steps.at(i, c);
      if (v == 0.0) continue;
      if (v != 1.0 || set_channel >= 0) {
        throw DataError("decode_onehot: row " + std::to_string(i) +
                        " is not one-hot");
      }
      set_channel = static_cast<int>(c);
    }
    seq.bases.push_back(set_channel < 0 ? 'N' : kBaseOrder[set_channel]);
  }
  return seq;
}

}  // namespace seqembed
