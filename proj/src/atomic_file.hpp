#pragma once

#include <filesystem>
#include <string_view>

namespace curvetac {

/// Write to a sibling temporary file and rename it over `path`, so readers
/// never observe a partially written file.
void write_file_atomic(const std::filesystem::path& path, std::string_view bytes);

}  // namespace curvetac
