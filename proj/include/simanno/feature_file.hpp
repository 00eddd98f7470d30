#pragma once

// FVEC feature files: ASCII header `FVEC 1 <dim> <count>\n`, then `count`
// records of (u16 id length, UTF-8 id bytes, dim x float32), little-endian.

#include <cstddef>
#include <filesystem>
#include <span>
#include <vector>

#include "simanno/vector_index.hpp"

namespace simanno {

struct FeatureSet {
  std::size_t dim = 0;
  std::vector<FeatureVector> vectors;
};

FeatureSet read_features(const std::filesystem::path& path);

/// Every vector must have `dim` finite values and a 1..65535-byte id.
void write_features(const std::filesystem::path& path, std::size_t dim,
                    std::span<const FeatureVector> vectors);

}  // namespace simanno
