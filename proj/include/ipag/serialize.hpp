#pragma once

#include <filesystem>
#include <stdexcept>
#include <string>
#include <vector>

#include "ipag/ipag.hpp"

namespace ipag {

inline constexpr int kIpagFormatVersion = 1;

class FormatError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

std::string dump_ipag_corpus(const std::vector<Ipag>& graphs);
/// Parses and validates every graph; invariant violations raise FormatError.
std::vector<Ipag> parse_ipag_corpus(const std::string& text);

std::vector<Ipag> load_ipag_corpus(const std::filesystem::path& path);
void save_ipag_corpus(const std::filesystem::path& path, const std::vector<Ipag>& graphs);

}  // namespace ipag
