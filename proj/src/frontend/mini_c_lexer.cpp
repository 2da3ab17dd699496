#include <cctype>

#include "ipag/mini_c.hpp"

namespace ipag {

namespace {

constexpr std::string_view kKeywords[] = {
    "auto",     "break",    "case",   "char",     "const",   "continue", "default",
    "do",       "double",   "else",   "enum",     "extern",  "float",    "for",
    "goto",     "if",       "inline", "int",      "long",    "register", "restrict",
    "return",   "short",    "signed", "sizeof",   "static",  "struct",   "switch",
    "typedef",  "union",    "unsigned", "void",   "volatile", "while",   "_Bool",
    "bool",     "asm",      "__asm__", "__attribute__", "_Complex", "_Atomic",
    "_Noreturn", "_Static_assert", "_Thread_local"};

// Longest first within each leading character.
constexpr std::string_view kPunct[] = {
    "...", "<<=", ">>=", "->", "++", "--", "<<", ">>", "<=", ">=", "==", "!=",
    "&&",  "||",  "+=",  "-=", "*=", "/=", "%=", "&=", "|=", "^=", "(",  ")",
    "{",   "}",   "[",   "]",  ";",  ",",  ":",  "?",  "=",  "<",  ">",  "+",
    "-",   "*",   "/",   "%",  "&",  "|",  "^",  "!",  "~",  ".",  "#",  "@"};

bool is_keyword(std::string_view word) {
  for (auto kw : kKeywords)
    if (kw == word) return true;
  return false;
}

bool ident_start(char c) { return std::isalpha(static_cast<unsigned char>(c)) || c == '_'; }
bool ident_char(char c) { return std::isalnum(static_cast<unsigned char>(c)) || c == '_'; }

class Lexer {
 public:
  explicit Lexer(std::string_view src) : src_(src) {}

  std::vector<Lexeme> run() {
    std::vector<Lexeme> out;
    bool line_start = true;
    while (pos_ < src_.size()) {
      char c = src_[pos_];
      if (c == '\n') {
        advance();
        line_start = true;
        continue;
      }
      if (std::isspace(static_cast<unsigned char>(c))) {
        advance();
        continue;
      }
      if (c == '#' && line_start) {
        skip_preprocessor();
        continue;
      }
      line_start = false;
      if (c == '/' && peek(1) == '/') {
        while (pos_ < src_.size() && src_[pos_] != '\n') advance();
        continue;
      }
      if (c == '/' && peek(1) == '*') {
        skip_block_comment();
        continue;
      }
      out.push_back(next_lexeme());
    }
    out.push_back({LexemeKind::end, "", line_, col_});
    return out;
  }

 private:
  char peek(std::size_t ahead) const {
    return pos_ + ahead < src_.size() ? src_[pos_ + ahead] : '\0';
  }

  void advance() {
    if (src_[pos_] == '\n') {
      ++line_;
      col_ = 1;
    } else {
      ++col_;
    }
    ++pos_;
  }

  void skip_preprocessor() {
    while (pos_ < src_.size()) {
      if (src_[pos_] == '\\' && peek(1) == '\n') {
        advance();
        advance();
        continue;
      }
      if (src_[pos_] == '\n') return;
      advance();
    }
  }

  void skip_block_comment() {
    int line = line_, col = col_;
    advance();
    advance();
    while (pos_ < src_.size()) {
      if (src_[pos_] == '*' && peek(1) == '/') {
        advance();
        advance();
        return;
      }
      advance();
    }
    throw ParseError(line, col, "unterminated comment");
  }

  Lexeme next_lexeme() {
    Lexeme lex;
    lex.line = line_;
    lex.column = col_;
    const std::size_t start = pos_;
    char c = src_[pos_];

    if ((c == 'L' || c == 'u' || c == 'U') && (peek(1) == '"' || peek(1) == '\'')) {
      advance();
      c = src_[pos_];
    }
    if (ident_start(c)) {
      while (pos_ < src_.size() && ident_char(src_[pos_])) advance();
      lex.text = std::string(src_.substr(start, pos_ - start));
      lex.kind = is_keyword(lex.text) ? LexemeKind::keyword : LexemeKind::identifier;
      return lex;
    }
    if (std::isdigit(static_cast<unsigned char>(c)) ||
        (c == '.' && std::isdigit(static_cast<unsigned char>(peek(1))))) {
      while (pos_ < src_.size()) {
        char d = src_[pos_];
        if (ident_char(d) || d == '.') {
          bool exp = d == 'e' || d == 'E' || d == 'p' || d == 'P';
          advance();
          if (exp && pos_ < src_.size() && (src_[pos_] == '+' || src_[pos_] == '-')) advance();
          continue;
        }
        break;
      }
      lex.kind = LexemeKind::number;
      lex.text = std::string(src_.substr(start, pos_ - start));
      return lex;
    }
    if (c == '"' || c == '\'') {
      const char quote = c;
      advance();
      while (true) {
        if (pos_ >= src_.size() || src_[pos_] == '\n')
          throw ParseError(lex.line, lex.column, "unterminated literal");
        if (src_[pos_] == '\\') {
          advance();
          if (pos_ < src_.size()) advance();
          continue;
        }
        if (src_[pos_] == quote) {
          advance();
          break;
        }
        advance();
      }
      lex.kind = quote == '"' ? LexemeKind::string : LexemeKind::character;
      lex.text = std::string(src_.substr(start, pos_ - start));
      return lex;
    }
    for (auto p : kPunct) {
      if (src_.substr(pos_, p.size()) == p) {
        for (std::size_t i = 0; i < p.size(); ++i) advance();
        lex.kind = LexemeKind::punct;
        lex.text = std::string(p);
        return lex;
      }
    }
    throw ParseError(lex.line, lex.column, std::string("unexpected character '") + c + "'");
  }

  std::string_view src_;
  std::size_t pos_ = 0;
  int line_ = 1;
  int col_ = 1;
};

}  // namespace

ParseError::ParseError(int line, int column, const std::string& message)
    : std::runtime_error(std::to_string(line) + ":" + std::to_string(column) + ": " + message),
      line_(line),
      column_(column) {}

UnsupportedConstruct::UnsupportedConstruct(int line, int column, std::string construct)
    : ParseError(line, column, "unsupported construct: " + construct),
      construct_(std::move(construct)) {}

std::vector<Lexeme> tokenize_mini_c(std::string_view source) { return Lexer(source).run(); }

bool is_structural(std::string_view lexeme) {
  return lexeme == "(" || lexeme == ")" || lexeme == "{" || lexeme == "}" || lexeme == "[" ||
         lexeme == "]" || lexeme == "," || lexeme == ";" || lexeme == ":";
}

std::vector<std::string> significant_tokens(std::string_view source) {
  std::vector<std::string> out;
  for (auto& lex : tokenize_mini_c(source)) {
    if (lex.kind == LexemeKind::end) break;
    if (lex.kind == LexemeKind::punct && is_structural(lex.text)) continue;
    out.push_back(std::move(lex.text));
  }
  return out;
}

}  // namespace ipag
