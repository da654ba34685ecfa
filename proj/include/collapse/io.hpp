#pragma once

#include <filesystem>
#include <string>

namespace collapse {

// Writes via a temp file in the same directory plus rename, so an
// interrupted run never leaves a partial file behind.
void atomic_write_file(const std::filesystem::path& path, const std::string& contents);

}  // namespace collapse
