#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <utility>

#include "langevin/logistic.hpp"

namespace langevin {

enum class IdxErrorKind { bad_magic, truncated, count_mismatch };

// Parse failure with the byte offset at which the file stopped making sense.
struct IdxError : std::runtime_error {
  IdxError(IdxErrorKind k, long long off, const std::string& msg)
      : std::runtime_error(msg), kind(k), offset(off) {}
  IdxErrorKind kind;
  long long offset;
};

// Reads an IDX image/label file pair (big-endian, magic 0x00000803 for
// images and 0x00000801 for labels), keeps only rows whose label is one of
// the two given digits, scales pixels to [0,1] and flattens each image.
// Labels are remapped: smaller kept digit -> 0, larger -> 1.
LogisticData load_idx(const std::string& images_path,
                      const std::string& labels_path,
                      std::pair<int, int> keep_digits);

}  // namespace langevin
