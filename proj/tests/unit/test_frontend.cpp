#include <random>
#include <set>

#include "doctest.h"
#include "fixtures.hpp"
#include "generators.hpp"
#include "ipag/interchange.hpp"
#include "ipag/mini_c.hpp"

using namespace ipag;

namespace {

// Renders a subtree as a bracketed string: Label[child child] or "tok".
std::string sexpr(const Ast& ast, NodeId id) {
  const AstNode& n = ast.node(id);
  if (n.kind == AstKind::token) return "'" + n.label + "'";
  std::string out = n.label + "[";
  for (std::size_t i = 0; i < n.children.size(); ++i) {
    if (i) out += ' ';
    out += sexpr(ast, n.children[i]);
  }
  return out + "]";
}

std::string joined(const std::vector<std::string>& xs) {
  std::string out;
  for (const auto& x : xs) {
    if (!out.empty()) out += ' ';
    out += x;
  }
  return out;
}

}  // namespace

TEST_CASE("lexer drops comments and preprocessor lines and prefers longest punctuation") {
  auto lx = tokenize_mini_c("#define X 1 \\\n  2\nint a; // c\n/* b */ a <<= 1; p->q;");
  std::vector<std::string> texts;
  for (const auto& l : lx)
    if (l.kind != LexemeKind::end) texts.push_back(l.text);
  CHECK(texts == std::vector<std::string>{"int", "a", ";", "a", "<<=", "1", ";", "p", "->", "q", ";"});
  CHECK(lx.back().kind == LexemeKind::end);
  CHECK(lx[0].line == 3);
}

TEST_CASE("structural punctuation is not significant") {
  CHECK(is_structural("("));
  CHECK(is_structural(";"));
  CHECK_FALSE(is_structural("*"));
  CHECK_FALSE(is_structural("?"));
  CHECK(significant_tokens("f(a, b[1]);") == std::vector<std::string>{"f", "a", "b", "1"});
}

TEST_CASE("a small routine parses to the expected tree") {
  auto asts = parse_mini_c("int f(){return g(1);}");
  REQUIRE(asts.size() == 1);
  const Ast& ast = asts[0];
  CHECK(ast.routine_name == "f");
  CHECK(ast.root == 0);
  CHECK(sexpr(ast, ast.root) ==
        "FunctionDefinition[SimpleDeclSpecifier['int'] FunctionDeclarator[Name['f']] "
        "CompoundStatement[ReturnStatement['return' FunctionCallExpression["
        "IdExpression[Name['g']] LiteralExpression['1']]]]]");
  CHECK(ast.signature == "int f ( )");
}

TEST_CASE("listing routine has the expected shape and counts") {
  auto corpus = test::listing_corpus();
  REQUIRE(corpus.size() == 3);
  const Ast& ast = test::listing_routine(corpus, "dump_relocs");
  CHECK(ast.token_count() == 9);
  CHECK(ast.property_count() == 21);  // includes the root
  CHECK(frontier_text(ast) ==
        "static void dump_relocs bfd * abfd bfd_map_over_sections abfd dump_relocs_in_section NULL");
  CHECK(sexpr(ast, ast.root) ==
        "FunctionDefinition[SimpleDeclSpecifier['static void'] FunctionDeclarator[Name['dump_relocs'] "
        "ParameterDeclaration[NamedTypeSpecifier[Name['bfd']] Declarator[Pointer['*'] Name['abfd']]]] "
        "CompoundStatement[ExpressionStatement[FunctionCallExpression["
        "IdExpression[Name['bfd_map_over_sections']] IdExpression[Name['abfd']] "
        "IdExpression[Name['dump_relocs_in_section']] IdExpression[Name['NULL']]]]]]");
}

TEST_CASE("node ids are preorder") {
  auto asts = parse_mini_c("int f(int a){ if (a) { return a + 1; } return 0; }");
  const Ast& ast = asts[0];
  std::vector<NodeId> order;
  std::vector<NodeId> stack{ast.root};
  while (!stack.empty()) {
    NodeId id = stack.back();
    stack.pop_back();
    order.push_back(id);
    const auto& ch = ast.node(id).children;
    for (auto it = ch.rbegin(); it != ch.rend(); ++it) stack.push_back(*it);
  }
  for (std::size_t i = 0; i < order.size(); ++i) CHECK(order[i] == i);
}

TEST_CASE("broad constructs parse") {
  const char* src = R"(
static unsigned long g (const char *s, struct node *n, size_t k, int (*cb)(int), ...)
{
  int a[4] = { 1, 2 }, *p = &a[0];
  unsigned int i;
  mytype_t m;
  for (i = 0; i < k; i++) { if (!s[i]) break; else continue; }
  while (n->next != NULL) n = n->next;
  do { k--; } while (k > 0);
  switch (k) { case 1: k = 2; break; default: ; }
  m = (mytype_t) sizeof (struct node);
  p = k ? &a[1] : (int *) 0;
  goto out;
out:
  return cb (a[0]) + "x" "y"[0] + 'c';
}
)";
  auto asts = parse_mini_c(src);
  REQUIRE(asts.size() == 1);
  CHECK(asts[0].routine_name == "g");
  CHECK(frontier_text(asts[0]) == joined(significant_tokens(src)));
}

TEST_CASE("unsupported constructs are rejected by name") {
  struct Case {
    const char* src;
    const char* construct;
  };
  const Case cases[] = {
      {"typedef int x;", "typedef"},
      {"struct s { int a; };", "struct/union/enum definition"},
      {"int x = 1;", "top-level declaration"},
      {"int f(int a);", "function prototype"},
      {"int f(){ return (a, b); }", "comma operator"},
      {"int f(){ g((struct s){1}); }", "compound literal"},
      {"int f(){ struct s v = { .a = 1 }; }", "designated initializer"},
      {"int f(a) int a; { }", "K&R"},
      {"int f() __attribute__((x)) { }", "__attribute__"},
      {"int f(){ asm(\"nop\"); }", "inline assembly"},
      {"int f(){ return ({ 1; }); }", "statement expression"},
  };
  for (const auto& c : cases) {
    CAPTURE(c.src);
    try {
      parse_mini_c(c.src);
      FAIL("accepted unsupported input");
    } catch (const UnsupportedConstruct& e) {
      CHECK(std::string(e.what()).find(c.construct) != std::string::npos);
    } catch (const ParseError& e) {
      FAIL("plain parse error instead of unsupported construct: " << std::string(e.what()));
    }
  }
}

TEST_CASE("syntax errors carry a position") {
  try {
    parse_mini_c("int f()\n{ return 1 +; }");
    FAIL("accepted bad input");
  } catch (const ParseError& e) {
    CHECK(e.line() == 2);
    CHECK(e.column() > 0);
  }
}

TEST_CASE("frontier reproduces the tokenized source of generated routines") {
  std::mt19937_64 rng(11);
  for (int i = 0; i < 200; ++i) {
    const std::string src = test::random_routine(rng, "f" + std::to_string(i), {"a", "b"});
    CAPTURE(src);
    auto asts = parse_mini_c(src);
    REQUIRE(asts.size() == 1);
    CHECK(frontier_text(asts[0]) == joined(significant_tokens(src)));
  }
}

TEST_CASE("every emitted label is in the declared vocabulary") {
  std::mt19937_64 rng(5);
  auto vocab = mini_c_vocabulary();
  const std::set<std::string_view> names(vocab.begin(), vocab.end());
  auto asts = parse_mini_c(test::random_program(rng, 40));
  for (const auto& ast : asts)
    for (const auto& n : ast.nodes)
      if (n.kind == AstKind::property) CHECK(names.count(n.label) == 1);
}

TEST_CASE("interchange round trip preserves routines") {
  auto corpus = test::listing_corpus();
  const std::string text = dump_ast_interchange(corpus.asts());
  auto back = parse_ast_interchange(text);
  REQUIRE(back.size() == corpus.size());
  for (std::size_t i = 0; i < back.size(); ++i) {
    const Ast& a = corpus.asts()[i];
    const Ast& b = back.asts()[i];
    CHECK(a.routine_name == b.routine_name);
    CHECK(a.signature == b.signature);
    CHECK(a.source_hash == b.source_hash);
    REQUIRE(a.nodes.size() == b.nodes.size());
    for (std::size_t j = 0; j < a.nodes.size(); ++j) {
      CHECK(a.nodes[j].label == b.nodes[j].label);
      CHECK(a.nodes[j].children == b.nodes[j].children);
      CHECK(a.nodes[j].span == b.nodes[j].span);
    }
  }
  CHECK(dump_ast_interchange(back.asts()) == text);
}

TEST_CASE("interchange errors") {
  SUBCASE("malformed json reports a byte offset") {
    try {
      parse_ast_interchange("{\"version\": 1, \"routines\": [");
      FAIL("accepted");
    } catch (const InterchangeError& e) {
      CHECK(e.byte_offset().has_value());
    }
  }
  SUBCASE("unknown version") {
    CHECK_THROWS_AS(parse_ast_interchange(R"({"version": 9, "routines": []})"), InterchangeError);
  }
  SUBCASE("token with children names the rule and routine") {
    const char* text = R"({"version":1,"routines":[{"name":"r","language":"c","root":0,"nodes":[
      {"id":0,"kind":"property","label":"A","children":[1]},
      {"id":1,"kind":"token","label":"x","children":[2]},
      {"id":2,"kind":"token","label":"y","children":[]}]}]})";
    try {
      parse_ast_interchange(text);
      FAIL("accepted");
    } catch (const AstValidationError& e) {
      CHECK(e.rule().find("token nodes have zero children") != std::string::npos);
      CHECK(e.rule().find("routine 'r'") != std::string::npos);
      CHECK(e.node() == NodeId{1});
    }
  }
  SUBCASE("shared child") {
    const char* text = R"({"version":1,"routines":[{"name":"r","root":0,"nodes":[
      {"id":0,"kind":"property","label":"A","children":[1,2]},
      {"id":1,"kind":"property","label":"B","children":[2]},
      {"id":2,"kind":"token","label":"y"}]}]})";
    CHECK_THROWS_AS(parse_ast_interchange(text), AstValidationError);
  }
  SUBCASE("disconnected node") {
    const char* text = R"({"version":1,"routines":[{"name":"r","root":0,"nodes":[
      {"id":0,"kind":"property","label":"A","children":[1]},
      {"id":1,"kind":"token","label":"x"},
      {"id":2,"kind":"token","label":"y"}]}]})";
    CHECK_THROWS_AS(parse_ast_interchange(text), AstValidationError);
  }
}

TEST_CASE("duplicate routine names resolve to the last definition and warn") {
  auto asts = parse_mini_c("int f(){return 1;} int f(){return 2;}");
  RoutineCorpus corpus(asts);
  CHECK(corpus.size() == 2);
  CHECK(frontier_text(*corpus.find("f")) == "int f return 2");
  CHECK(corpus.warnings().size() == 1);
}

TEST_CASE("random ASTs validate") {
  std::mt19937_64 rng(3);
  for (int i = 0; i < 50; ++i) {
    Ast ast = test::random_ast(rng, 2 + i, {"A", "B", "C"});
    CHECK_NOTHROW(validate_ast(ast));
  }
}
