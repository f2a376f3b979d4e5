#pragma once

#include <string>

#include "seqembed/model.hpp"

namespace seqembed {

/// Binary checkpoint: magic "SQE1", format version, the ModelConfig, then the
/// named parameter tensors in EmbedNet::parameters() order as little-endian
/// 32-bit floats, closed by a 64-bit FNV-1a checksum of the payload.
///
/// Values are stored at 32-bit precision: save(load(save(net))) is
/// byte-identical to save(net), and two loads of the same file agree bitwise.
inline constexpr char kCheckpointMagic[4] = {'S', 'Q', 'E', '1'};
inline constexpr std::uint32_t kCheckpointVersion = 1;

void save_checkpoint(const EmbedNet& net, const std::string& path);

/// Throws DataError with a distinct message for a bad magic, an unsupported
/// version, a truncated file, or a checksum mismatch.
EmbedNet load_checkpoint(const std::string& path);

}  // namespace seqembed
