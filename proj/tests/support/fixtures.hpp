#pragma once

#include <filesystem>
#include <string>

#include "ipag/ast.hpp"

namespace ipag::test {

std::filesystem::path data_dir();
std::string read_text(const std::filesystem::path& path);
/// The three routines of the listing fixture, parsed.
RoutineCorpus listing_corpus();
const Ast& listing_routine(const RoutineCorpus& corpus, const std::string& name);

}  // namespace ipag::test
