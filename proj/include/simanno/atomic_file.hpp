#pragma once

#include <filesystem>
#include <functional>
#include <ostream>

namespace simanno {

/// Writes through a sibling temp file and renames it over `path` only after
/// `writer` returns and the stream flushed cleanly. No partial file is left
/// behind on failure.
void write_file_atomically(const std::filesystem::path& path,
                           const std::function<void(std::ostream&)>& writer, bool binary = false);

}  // namespace simanno
