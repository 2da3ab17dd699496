#pragma once

#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>

#include "ipag/ast.hpp"

namespace ipag {

/// Malformed interchange text. `byte_offset` is set for JSON syntax errors.
class InterchangeError : public std::runtime_error {
 public:
  InterchangeError(const std::string& message, std::optional<std::size_t> byte_offset);
  const std::optional<std::size_t>& byte_offset() const { return byte_offset_; }

 private:
  std::optional<std::size_t> byte_offset_;
};

inline constexpr int kInterchangeVersion = 1;

/// Reads `{version, routines: [{name, language, nodes, root}]}`. Every routine
/// is validated; structural violations surface as AstValidationError.
RoutineCorpus parse_ast_interchange(const std::string& text);
RoutineCorpus load_ast_interchange(const std::filesystem::path& path);

std::string dump_ast_interchange(const std::vector<Ast>& asts);

}  // namespace ipag
