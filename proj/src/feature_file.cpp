#include "simanno/feature_file.hpp"

#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>
#include <string>

#include "simanno/atomic_file.hpp"
#include "simanno/binary_io.hpp"
#include "simanno/errors.hpp"

namespace simanno {

namespace {

constexpr int kFormatVersion = 1;

}  // namespace

FeatureSet read_features(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open feature file " + path.string());

  std::string header;
  if (!std::getline(in, header)) throw ParseError(path.string(), 1, "missing FVEC header");
  std::istringstream hs(header);
  std::string magic;
  long long version = 0, dim = 0, count = 0;
  std::string extra;
  if (!(hs >> magic >> version >> dim >> count) || (hs >> extra) || magic != "FVEC") {
    throw ParseError(path.string(), 1, "malformed FVEC header '" + header + "'");
  }
  if (version != kFormatVersion) {
    throw ParseError(path.string(), 1, "unsupported FVEC version " + std::to_string(version));
  }
  if (dim <= 0 || count < 0) throw ParseError(path.string(), 1, "invalid dim/count in FVEC header");

  FeatureSet set;
  set.dim = static_cast<std::size_t>(dim);
  set.vectors.reserve(static_cast<std::size_t>(count));
  for (long long r = 0; r < count; ++r) {
    FeatureVector fv;
    const auto len = binary::read_le<std::uint16_t>(in, "record id length");
    if (len == 0) throw ParseError(path.string(), 0, "record " + std::to_string(r) + " has an empty id");
    fv.id = binary::read_bytes(in, len, "record id");
    fv.values.resize(set.dim);
    binary::read_le_array(in, std::span<float>(fv.values), "record values");
    for (float v : fv.values) {
      if (!std::isfinite(v)) {
        throw ParseError(path.string(), 0, "non-finite value in record '" + fv.id + "'");
      }
    }
    set.vectors.push_back(std::move(fv));
  }
  if (in.peek() != std::char_traits<char>::eof()) {
    throw ParseError(path.string(), 0, "trailing bytes after " + std::to_string(count) + " records");
  }
  return set;
}

void write_features(const std::filesystem::path& path, std::size_t dim,
                    std::span<const FeatureVector> vectors) {
  for (const auto& fv : vectors) {
    if (fv.id.empty() || fv.id.size() > std::numeric_limits<std::uint16_t>::max()) {
      throw std::invalid_argument("feature id must be 1..65535 bytes: '" + fv.id + "'");
    }
    if (fv.values.size() != dim) throw DimensionError(dim, fv.values.size());
  }
  write_file_atomically(
      path,
      [&](std::ostream& out) {
        out << "FVEC " << kFormatVersion << ' ' << dim << ' ' << vectors.size() << '\n';
        for (const auto& fv : vectors) {
          binary::write_le(out, static_cast<std::uint16_t>(fv.id.size()));
          out.write(fv.id.data(), static_cast<std::streamsize>(fv.id.size()));
          binary::write_le_array(out, std::span<const float>(fv.values));
        }
      },
      /*binary=*/true);
}

}  // namespace simanno
