#pragma once

#include <filesystem>
#include <string>

namespace ipag {

std::string read_file(const std::filesystem::path& path);
/// Writes through a temporary file in the same directory and renames it over
/// `path`, so readers never see a partial file.
void write_file_atomic(const std::filesystem::path& path, const std::string& content);

}  // namespace ipag
