#include <algorithm>
#include <optional>
#include <set>

#include "ipag/mini_c.hpp"

namespace ipag {

namespace {

constexpr std::string_view kVocabulary[] = {
    "FunctionDefinition",    "SimpleDeclSpecifier",    "NamedTypeSpecifier",
    "ElaboratedTypeSpecifier", "Name",                 "FunctionDeclarator",
    "Declarator",            "ArrayDeclarator",        "ArrayModifier",
    "Pointer",               "ParameterDeclaration",   "EqualsInitializer",
    "InitializerList",       "CompoundStatement",      "ExpressionStatement",
    "DeclarationStatement",  "SimpleDeclaration",      "IfStatement",
    "WhileStatement",        "DoStatement",            "ForStatement",
    "SwitchStatement",       "CaseStatement",          "DefaultStatement",
    "ReturnStatement",       "BreakStatement",         "ContinueStatement",
    "GotoStatement",         "LabelStatement",         "NullStatement",
    "BinaryExpression",      "UnaryExpression",        "ConditionalExpression",
    "CastExpression",        "FunctionCallExpression", "ArraySubscriptExpression",
    "FieldReference",        "IdExpression",           "LiteralExpression",
    "TypeIdExpression",      "TypeId"};

bool is_type_word(std::string_view w) {
  return w == "void" || w == "char" || w == "short" || w == "int" || w == "long" ||
         w == "float" || w == "double" || w == "signed" || w == "unsigned" || w == "_Bool" ||
         w == "bool" || w == "_Complex";
}

bool is_qualifier_word(std::string_view w) {
  return w == "const" || w == "volatile" || w == "static" || w == "extern" || w == "inline" ||
         w == "register" || w == "auto" || w == "restrict" || w == "_Atomic" ||
         w == "_Noreturn" || w == "_Thread_local";
}

bool is_tag_word(std::string_view w) { return w == "struct" || w == "union" || w == "enum"; }

bool is_assignment_op(std::string_view op) {
  return op == "=" || op == "+=" || op == "-=" || op == "*=" || op == "/=" || op == "%=" ||
         op == "&=" || op == "|=" || op == "^=" || op == "<<=" || op == ">>=";
}

int binary_precedence(std::string_view op) {
  if (op == "||") return 1;
  if (op == "&&") return 2;
  if (op == "|") return 3;
  if (op == "^") return 4;
  if (op == "&") return 5;
  if (op == "==" || op == "!=") return 6;
  if (op == "<" || op == ">" || op == "<=" || op == ">=") return 7;
  if (op == "<<" || op == ">>") return 8;
  if (op == "+" || op == "-") return 9;
  if (op == "*" || op == "/" || op == "%") return 10;
  return 0;
}

class TreeBuilder {
 public:
  NodeId property(std::string_view label, const Lexeme& at, std::vector<NodeId> children = {}) {
    AstNode node;
    node.id = static_cast<NodeId>(nodes_.size());
    node.kind = AstKind::property;
    node.label = std::string(label);
    node.children = std::move(children);
    node.span = SourcePos{at.line, at.column};
    nodes_.push_back(std::move(node));
    return nodes_.back().id;
  }

  NodeId token(std::string text, const Lexeme& at) {
    AstNode node;
    node.id = static_cast<NodeId>(nodes_.size());
    node.kind = AstKind::token;
    node.label = std::move(text);
    node.span = SourcePos{at.line, at.column};
    nodes_.push_back(std::move(node));
    return nodes_.back().id;
  }

  void append(NodeId parent, NodeId child) { nodes_[parent].children.push_back(child); }
  const AstNode& at(NodeId id) const { return nodes_.at(id); }

  /// Moves the built tree out, renumbering ids in preorder from the root.
  std::vector<AstNode> finish(NodeId root) {
    std::vector<NodeId> order;
    std::vector<NodeId> stack{root};
    while (!stack.empty()) {
      NodeId id = stack.back();
      stack.pop_back();
      order.push_back(id);
      const auto& ch = nodes_[id].children;
      for (auto it = ch.rbegin(); it != ch.rend(); ++it) stack.push_back(*it);
    }
    std::vector<NodeId> remap(nodes_.size(), 0);
    for (std::size_t i = 0; i < order.size(); ++i) remap[order[i]] = static_cast<NodeId>(i);
    std::vector<AstNode> out;
    out.reserve(order.size());
    for (NodeId old : order) {
      AstNode node = std::move(nodes_[old]);
      node.id = remap[old];
      for (auto& c : node.children) c = remap[c];
      out.push_back(std::move(node));
    }
    nodes_.clear();
    return out;
  }

 private:
  std::vector<AstNode> nodes_;
};

class Parser {
 public:
  explicit Parser(std::string_view source) : lex_(tokenize_mini_c(source)) {}

  std::vector<Ast> run() {
    std::vector<Ast> out;
    while (!at_end()) out.push_back(function_definition());
    return out;
  }

 private:
  // ---- lexeme cursor ----

  const Lexeme& cur() const { return lex_[pos_]; }
  const Lexeme& ahead(std::size_t n) const {
    return lex_[std::min(pos_ + n, lex_.size() - 1)];
  }
  bool at_end() const { return cur().kind == LexemeKind::end; }
  bool is(std::string_view text) const {
    return cur().kind != LexemeKind::end && cur().kind != LexemeKind::string &&
           cur().kind != LexemeKind::character && cur().text == text;
  }
  bool is_ident() const { return cur().kind == LexemeKind::identifier; }

  const Lexeme& take() {
    const Lexeme& l = lex_[pos_];
    if (!at_end()) ++pos_;
    return l;
  }

  void expect(std::string_view text) {
    if (!is(text)) fail("expected '" + std::string(text) + "'");
    take();
  }

  [[noreturn]] void fail(const std::string& what) const {
    std::string got = at_end() ? "end of input" : "'" + cur().text + "'";
    throw ParseError(cur().line, cur().column, what + ", got " + got);
  }

  [[noreturn]] void unsupported(const std::string& construct) const {
    throw UnsupportedConstruct(cur().line, cur().column, construct);
  }

  NodeId token_here() {
    const Lexeme& l = take();
    return tree_.token(l.text, l);
  }

  NodeId name_here() {
    if (!is_ident()) fail("expected identifier");
    const Lexeme& l = cur();
    NodeId tok = token_here();
    return tree_.property("Name", l, {tok});
  }

  void reject_unsupported_keywords() const {
    if (is("typedef")) unsupported("typedef");
    if (is("__attribute__")) unsupported("__attribute__");
    if (is("asm") || is("__asm__")) unsupported("inline assembly");
    if (is("_Static_assert")) unsupported("_Static_assert");
  }

  // ---- top level ----

  Ast function_definition() {
    reject_unsupported_keywords();
    const std::size_t sig_begin = pos_;
    const Lexeme& start = cur();
    NodeId spec = decl_specifiers();
    auto decl = declarator(false);
    if (!decl || tree_.at(*decl).label != "FunctionDeclarator") {
      if (is(";") || is("=") || is(","))
        unsupported("top-level declaration (only function definitions are accepted)");
      fail("expected function declarator");
    }
    if (is(";")) unsupported("function prototype (only function definitions are accepted)");
    const std::size_t sig_end = pos_;
    reject_unsupported_keywords();
    if (!is("{")) fail("expected function body");
    NodeId body = compound_statement();
    NodeId root = tree_.property("FunctionDefinition", start, {spec, *decl, body});

    Ast ast;
    ast.routine_name = declared_name(*decl);
    ast.signature = joined_text(sig_begin, sig_end);
    ast.language = Language::c;
    ast.nodes = tree_.finish(root);
    ast.root = 0;
    validate_ast(ast);
    ast.source_hash = stable_hash(frontier_text(ast));
    return ast;
  }

  std::string joined_text(std::size_t from, std::size_t to) const {
    std::string out;
    for (std::size_t i = from; i < to; ++i) {
      if (!out.empty()) out += ' ';
      out += lex_[i].text;
    }
    return out;
  }

  /// The identifier a declarator introduces, looking through nested
  /// declarators such as `(*fp)`.
  std::string declared_name(NodeId declarator) const {
    for (NodeId child : tree_.at(declarator).children) {
      const AstNode& node = tree_.at(child);
      if (node.label == "Name") return tree_.at(node.children.front()).label;
      if (node.label == "Declarator") return declared_name(child);
    }
    return {};
  }

  // ---- declarations ----

  bool at_type_start() const {
    if (cur().kind != LexemeKind::keyword) return false;
    return is_type_word(cur().text) || is_qualifier_word(cur().text) || is_tag_word(cur().text);
  }

  bool known_type(std::string_view name) const {
    return known_types_.count(std::string(name)) > 0 ||
           (name.size() > 2 && name.substr(name.size() - 2) == "_t");
  }

  NodeId decl_specifiers() {
    reject_unsupported_keywords();
    const Lexeme& start = cur();
    std::vector<std::string> words;
    auto join = [&words] {
      std::string s;
      for (const auto& w : words) {
        if (!s.empty()) s += ' ';
        s += w;
      }
      return s;
    };
    bool has_type = false;
    while (cur().kind == LexemeKind::keyword &&
           (is_type_word(cur().text) || is_qualifier_word(cur().text))) {
      has_type |= is_type_word(cur().text);
      words.push_back(take().text);
    }
    if (cur().kind == LexemeKind::keyword && is_tag_word(cur().text)) {
      if (has_type) fail("unexpected tag keyword");
      words.push_back(take().text);
      if (!is_ident()) {
        if (is("{")) unsupported("anonymous struct/union/enum definition");
        fail("expected tag name");
      }
      NodeId qual = tree_.token(join(), start);
      NodeId name = name_here();
      if (is("{")) unsupported("struct/union/enum definition");
      NodeId spec = tree_.property("ElaboratedTypeSpecifier", start, {qual, name});
      trailing_qualifiers(spec);
      return spec;
    }
    if (has_type) {
      NodeId tok = tree_.token(join(), start);
      return tree_.property("SimpleDeclSpecifier", start, {tok});
    }
    if (!is_ident()) fail("expected type specifier");
    std::vector<NodeId> children;
    if (!words.empty()) children.push_back(tree_.token(join(), start));
    known_types_.insert(cur().text);
    children.push_back(name_here());
    NodeId spec = tree_.property("NamedTypeSpecifier", start, std::move(children));
    trailing_qualifiers(spec);
    return spec;
  }

  void trailing_qualifiers(NodeId spec) {
    if (!(cur().kind == LexemeKind::keyword && is_qualifier_word(cur().text))) return;
    const Lexeme& at = cur();
    std::string text;
    while (cur().kind == LexemeKind::keyword && is_qualifier_word(cur().text)) {
      if (!text.empty()) text += ' ';
      text += take().text;
    }
    tree_.append(spec, tree_.token(text, at));
  }

  std::vector<NodeId> pointers() {
    std::vector<NodeId> out;
    while (is("*")) {
      const Lexeme& at = cur();
      std::string text = take().text;
      while (cur().kind == LexemeKind::keyword &&
             (cur().text == "const" || cur().text == "volatile" || cur().text == "restrict")) {
        text += ' ';
        text += take().text;
      }
      NodeId tok = tree_.token(text, at);
      out.push_back(tree_.property("Pointer", at, {tok}));
    }
    return out;
  }

  /// Parses a (possibly abstract) declarator. Returns nullopt when nothing was
  /// consumed.
  std::optional<NodeId> declarator(bool abstract_ok) {
    const Lexeme& start = cur();
    std::vector<NodeId> children = pointers();
    if (is("(") && ahead(1).text == "*") {
      take();
      auto inner = declarator(abstract_ok);
      if (!inner) fail("expected declarator");
      expect(")");
      children.push_back(*inner);
    } else if (is_ident()) {
      children.push_back(name_here());
    } else if (!abstract_ok) {
      fail("expected identifier");
    }

    if (is("(")) {
      take();
      parameters(children);
      expect(")");
      NodeId fd = tree_.property("FunctionDeclarator", start, std::move(children));
      return fd;
    }
    if (is("[")) {
      while (is("[")) {
        const Lexeme& at = take();
        std::vector<NodeId> dims;
        if (!is("]")) dims.push_back(expression());
        expect("]");
        children.push_back(tree_.property("ArrayModifier", at, std::move(dims)));
      }
      NodeId ad = tree_.property("ArrayDeclarator", start, std::move(children));
      return ad;
    }
    if (children.empty()) return std::nullopt;
    NodeId d = tree_.property("Declarator", start, std::move(children));
    return d;
  }

  void parameters(std::vector<NodeId>& into) {
    if (is(")")) return;
    if (is("void") && ahead(1).text == ")") {
      const Lexeme& at = cur();
      NodeId tok = token_here();
      NodeId spec = tree_.property("SimpleDeclSpecifier", at, {tok});
      into.push_back(tree_.property("ParameterDeclaration", at, {spec}));
      return;
    }
    while (true) {
      if (is("...")) {
        into.push_back(token_here());
        break;
      }
      if (is_ident() && (ahead(1).text == "," || ahead(1).text == ")") &&
          !known_type(cur().text))
        unsupported("parameter without a type (K&R style)");
      const Lexeme& at = cur();
      std::vector<NodeId> parts{decl_specifiers()};
      if (auto d = declarator(true)) parts.push_back(*d);
      into.push_back(tree_.property("ParameterDeclaration", at, std::move(parts)));
      if (!is(",")) break;
      take();
    }
  }

  NodeId initializer() {
    if (is("{")) {
      const Lexeme& at = take();
      std::vector<NodeId> items;
      while (!is("}")) {
        if (is(".")) unsupported("designated initializer");
        items.push_back(initializer());
        if (!is(",")) break;
        take();
      }
      expect("}");
      return tree_.property("InitializerList", at, std::move(items));
    }
    return assignment();
  }

  NodeId simple_declaration() {
    const Lexeme& start = cur();
    std::vector<NodeId> parts{decl_specifiers()};
    while (true) {
      auto d = declarator(false);
      if (!d) fail("expected declarator");
      if (is("=")) {
        const Lexeme& at = cur();
        NodeId eq = token_here();
        NodeId value = initializer();
        tree_.append(*d, tree_.property("EqualsInitializer", at, {eq, value}));
      }
      parts.push_back(*d);
      if (!is(",")) break;
      take();
    }
    expect(";");
    return tree_.property("SimpleDeclaration", start, std::move(parts));
  }

  bool looks_like_declaration() const {
    if (at_type_start()) return true;
    if (!is_ident()) return false;
    const auto& next = ahead(1);
    if (next.kind == LexemeKind::identifier) return true;
    if (next.text == "*") {
      std::size_t i = 1;
      while (ahead(i).text == "*") ++i;
      if (ahead(i).kind != LexemeKind::identifier) return false;
      const auto& after = ahead(i + 1).text;
      if (known_type(cur().text)) return true;
      return after == ";" || after == "=" || after == "," || after == "[";
    }
    return false;
  }

  // ---- statements ----

  NodeId compound_statement() {
    const Lexeme& at = cur();
    expect("{");
    std::vector<NodeId> stmts;
    while (!is("}")) {
      if (at_end()) fail("expected '}'");
      stmts.push_back(statement());
    }
    take();
    return tree_.property("CompoundStatement", at, std::move(stmts));
  }

  NodeId statement() {
    reject_unsupported_keywords();
    const Lexeme& at = cur();
    if (is("{")) return compound_statement();
    if (is(";")) {
      take();
      return tree_.property("NullStatement", at);
    }
    if (is("if")) {
      std::vector<NodeId> parts{token_here()};
      expect("(");
      parts.push_back(expression());
      expect(")");
      parts.push_back(statement());
      if (is("else")) {
        parts.push_back(token_here());
        parts.push_back(statement());
      }
      return tree_.property("IfStatement", at, std::move(parts));
    }
    if (is("while")) {
      std::vector<NodeId> parts{token_here()};
      expect("(");
      parts.push_back(expression());
      expect(")");
      parts.push_back(statement());
      return tree_.property("WhileStatement", at, std::move(parts));
    }
    if (is("do")) {
      std::vector<NodeId> parts{token_here()};
      parts.push_back(statement());
      if (!is("while")) fail("expected 'while'");
      parts.push_back(token_here());
      expect("(");
      parts.push_back(expression());
      expect(")");
      expect(";");
      return tree_.property("DoStatement", at, std::move(parts));
    }
    if (is("for")) {
      std::vector<NodeId> parts{token_here()};
      expect("(");
      const Lexeme& init_at = cur();
      if (is(";")) {
        take();
        parts.push_back(tree_.property("NullStatement", init_at));
      } else if (looks_like_declaration()) {
        NodeId decl = simple_declaration();
        parts.push_back(tree_.property("DeclarationStatement", init_at, {decl}));
      } else {
        NodeId e = expression();
        expect(";");
        parts.push_back(tree_.property("ExpressionStatement", init_at, {e}));
      }
      if (!is(";")) parts.push_back(expression());
      expect(";");
      if (!is(")")) parts.push_back(expression());
      expect(")");
      parts.push_back(statement());
      return tree_.property("ForStatement", at, std::move(parts));
    }
    if (is("switch")) {
      std::vector<NodeId> parts{token_here()};
      expect("(");
      parts.push_back(expression());
      expect(")");
      parts.push_back(statement());
      return tree_.property("SwitchStatement", at, std::move(parts));
    }
    if (is("case")) {
      std::vector<NodeId> parts{token_here()};
      parts.push_back(conditional());
      expect(":");
      return tree_.property("CaseStatement", at, std::move(parts));
    }
    if (is("default")) {
      std::vector<NodeId> parts{token_here()};
      expect(":");
      return tree_.property("DefaultStatement", at, std::move(parts));
    }
    if (is("return")) {
      std::vector<NodeId> parts{token_here()};
      if (!is(";")) parts.push_back(expression());
      expect(";");
      return tree_.property("ReturnStatement", at, std::move(parts));
    }
    if (is("break")) {
      NodeId tok = token_here();
      expect(";");
      return tree_.property("BreakStatement", at, {tok});
    }
    if (is("continue")) {
      NodeId tok = token_here();
      expect(";");
      return tree_.property("ContinueStatement", at, {tok});
    }
    if (is("goto")) {
      std::vector<NodeId> parts{token_here()};
      parts.push_back(name_here());
      expect(";");
      return tree_.property("GotoStatement", at, std::move(parts));
    }
    if (is_ident() && ahead(1).text == ":") {
      NodeId label = name_here();
      take();
      NodeId body = statement();
      return tree_.property("LabelStatement", at, {label, body});
    }
    if (looks_like_declaration()) {
      NodeId decl = simple_declaration();
      return tree_.property("DeclarationStatement", at, {decl});
    }
    NodeId e = expression();
    expect(";");
    return tree_.property("ExpressionStatement", at, {e});
  }

  // ---- expressions ----

  NodeId expression() {
    NodeId e = assignment();
    if (is(",")) unsupported("comma operator");
    return e;
  }

  NodeId assignment() {
    const Lexeme& at = cur();
    NodeId lhs = conditional();
    if (cur().kind == LexemeKind::punct && is_assignment_op(cur().text)) {
      NodeId op = token_here();
      NodeId rhs = assignment();
      return tree_.property("BinaryExpression", at, {lhs, op, rhs});
    }
    return lhs;
  }

  NodeId conditional() {
    const Lexeme& at = cur();
    NodeId cond = binary(1);
    if (!is("?")) return cond;
    NodeId q = token_here();
    NodeId yes = expression();
    expect(":");
    NodeId no = conditional();
    return tree_.property("ConditionalExpression", at, {cond, q, yes, no});
  }

  NodeId binary(int min_prec) {
    const Lexeme& at = cur();
    NodeId lhs = unary();
    while (cur().kind == LexemeKind::punct) {
      int prec = binary_precedence(cur().text);
      if (prec == 0 || prec < min_prec) break;
      NodeId op = token_here();
      NodeId rhs = binary(prec + 1);
      lhs = tree_.property("BinaryExpression", at, {lhs, op, rhs});
    }
    return lhs;
  }

  bool paren_starts_type() const {
    if (!is("(")) return false;
    const auto& next = ahead(1);
    if (next.kind == LexemeKind::keyword)
      return is_type_word(next.text) || is_qualifier_word(next.text) || is_tag_word(next.text);
    if (next.kind != LexemeKind::identifier) return false;
    std::size_t i = 2;
    while (ahead(i).text == "*") ++i;
    if (ahead(i).text != ")") return false;
    return i > 2 || known_type(next.text);
  }

  NodeId type_id() {
    const Lexeme& at = cur();
    std::vector<NodeId> parts{decl_specifiers()};
    if (auto d = declarator(true)) parts.push_back(*d);
    return tree_.property("TypeId", at, std::move(parts));
  }

  NodeId unary() {
    const Lexeme& at = cur();
    if (is("sizeof")) {
      NodeId op = token_here();
      if (paren_starts_type()) {
        take();
        NodeId type = type_id();
        expect(")");
        return tree_.property("TypeIdExpression", at, {op, type});
      }
      NodeId operand = unary();
      return tree_.property("UnaryExpression", at, {op, operand});
    }
    if (paren_starts_type()) {
      take();
      NodeId type = type_id();
      expect(")");
      if (is("{")) unsupported("compound literal");
      NodeId operand = unary();
      return tree_.property("CastExpression", at, {type, operand});
    }
    if (is("-") || is("+") || is("!") || is("~") || is("*") || is("&") || is("++") ||
        is("--")) {
      NodeId op = token_here();
      NodeId operand = unary();
      return tree_.property("UnaryExpression", at, {op, operand});
    }
    return postfix();
  }

  NodeId postfix() {
    const Lexeme& at = cur();
    NodeId e = primary();
    while (true) {
      if (is("(")) {
        take();
        std::vector<NodeId> parts{e};
        if (!is(")")) {
          while (true) {
            parts.push_back(assignment());
            if (!is(",")) break;
            take();
          }
        }
        expect(")");
        e = tree_.property("FunctionCallExpression", at, std::move(parts));
      } else if (is("[")) {
        take();
        NodeId index = expression();
        expect("]");
        e = tree_.property("ArraySubscriptExpression", at, {e, index});
      } else if (is("->") || is(".")) {
        NodeId op = token_here();
        NodeId field = name_here();
        e = tree_.property("FieldReference", at, {e, op, field});
      } else if (is("++") || is("--")) {
        NodeId op = token_here();
        e = tree_.property("UnaryExpression", at, {e, op});
      } else {
        return e;
      }
    }
  }

  NodeId primary() {
    const Lexeme& at = cur();
    if (is_ident()) {
      NodeId name = name_here();
      return tree_.property("IdExpression", at, {name});
    }
    if (cur().kind == LexemeKind::number || cur().kind == LexemeKind::character) {
      NodeId tok = token_here();
      return tree_.property("LiteralExpression", at, {tok});
    }
    if (cur().kind == LexemeKind::string) {
      std::vector<NodeId> parts;
      while (cur().kind == LexemeKind::string) parts.push_back(token_here());
      return tree_.property("LiteralExpression", at, std::move(parts));
    }
    if (is("(")) {
      take();
      if (is("{")) unsupported("statement expression");
      NodeId inner = expression();
      expect(")");
      return inner;
    }
    fail("expected expression");
  }

  std::vector<Lexeme> lex_;
  std::size_t pos_ = 0;
  TreeBuilder tree_;
  std::set<std::string> known_types_;
};

}  // namespace

std::vector<Ast> parse_mini_c(std::string_view source) { return Parser(source).run(); }

std::span<const std::string_view> mini_c_vocabulary() { return kVocabulary; }

}  // namespace ipag
