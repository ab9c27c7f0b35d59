#ifndef DFMSYNTH_SRC_DIGEST_H_
#define DFMSYNTH_SRC_DIGEST_H_

#include <string>
#include <string_view>

namespace dfmsynth::internal {

// Lowercase hex SHA-256.
std::string sha256_hex(std::string_view data);

}  // namespace dfmsynth::internal

#endif  // DFMSYNTH_SRC_DIGEST_H_
