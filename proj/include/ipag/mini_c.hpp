#pragma once

#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "ipag/ast.hpp"

namespace ipag {

enum class LexemeKind { identifier, keyword, number, string, character, punct, end };

struct Lexeme {
  LexemeKind kind = LexemeKind::end;
  std::string text;
  int line = 0;
  int column = 0;
};

class ParseError : public std::runtime_error {
 public:
  ParseError(int line, int column, const std::string& message);
  int line() const { return line_; }
  int column() const { return column_; }

 private:
  int line_;
  int column_;
};

class UnsupportedConstruct : public ParseError {
 public:
  UnsupportedConstruct(int line, int column, std::string construct);
  const std::string& construct() const { return construct_; }

 private:
  std::string construct_;
};

/// Splits mini-C source into lexemes. Comments and preprocessor lines are
/// dropped. The returned list always ends with an `end` lexeme.
std::vector<Lexeme> tokenize_mini_c(std::string_view source);

/// True for punctuation that only delimits structure: ( ) { } [ ] , ; :
/// These never become token nodes; their role is carried by the tree shape.
bool is_structural(std::string_view lexeme);

/// The lexeme texts that become token nodes, in source order. This is the
/// "tokenized source" that a routine's token frontier reproduces.
std::vector<std::string> significant_tokens(std::string_view source);

/// Parses zero or more function definitions. Each Ast is validated and its
/// node ids are renumbered in preorder (root = 0).
std::vector<Ast> parse_mini_c(std::string_view source);

/// Every property label parse_mini_c can emit.
std::span<const std::string_view> mini_c_vocabulary();

}  // namespace ipag
