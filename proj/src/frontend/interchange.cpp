#include "ipag/interchange.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

#include "json.hpp"

namespace ipag {

using nlohmann::json;

InterchangeError::InterchangeError(const std::string& message,
                                   std::optional<std::size_t> byte_offset)
    : std::runtime_error(byte_offset ? message + " (byte " + std::to_string(*byte_offset) + ")"
                                     : message),
      byte_offset_(byte_offset) {}

namespace {

Ast routine_from_json(const json& r) {
  Ast ast;
  ast.routine_name = r.at("name").get<std::string>();
  ast.language = language_from_string(r.value("language", std::string("other")));
  ast.signature = r.value("signature", std::string());
  for (const auto& n : r.at("nodes")) {
    AstNode node;
    node.id = n.at("id").get<NodeId>();
    node.kind = ast_kind_from_string(n.at("kind").get<std::string>());
    node.label = n.at("label").get<std::string>();
    node.children = n.value("children", std::vector<NodeId>{});
    if (n.contains("line")) node.span = SourcePos{n.at("line").get<int>(), n.value("col", 0)};
    ast.nodes.push_back(std::move(node));
  }
  std::stable_sort(ast.nodes.begin(), ast.nodes.end(),
                   [](const AstNode& a, const AstNode& b) { return a.id < b.id; });
  ast.root = r.at("root").get<NodeId>();
  return ast;
}

}  // namespace

RoutineCorpus parse_ast_interchange(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw InterchangeError(std::string("malformed interchange file: ") + e.what(), e.byte);
  }
  try {
    if (doc.at("version").get<int>() != kInterchangeVersion)
      throw InterchangeError("unsupported interchange version " + doc.at("version").dump(),
                             std::nullopt);
    RoutineCorpus corpus;
    for (const auto& r : doc.at("routines")) {
      Ast ast = routine_from_json(r);
      try {
        validate_ast(ast);
      } catch (const AstValidationError& e) {
        throw AstValidationError(e.node(), "routine '" + ast.routine_name + "': " + e.rule());
      }
      ast.source_hash = stable_hash(frontier_text(ast));
      corpus.add(std::move(ast));
    }
    return corpus;
  } catch (const json::exception& e) {
    throw InterchangeError(std::string("malformed interchange file: ") + e.what(), std::nullopt);
  }
}

RoutineCorpus load_ast_interchange(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InterchangeError("cannot open " + path.string(), std::nullopt);
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_ast_interchange(buf.str());
}

std::string dump_ast_interchange(const std::vector<Ast>& asts) {
  json routines = json::array();
  for (const auto& ast : asts) {
    json nodes = json::array();
    for (const auto& n : ast.nodes) {
      json node = {{"id", n.id},
                   {"kind", std::string(to_string(n.kind))},
                   {"label", n.label},
                   {"children", n.children}};
      if (n.span) {
        node["line"] = n.span->line;
        node["col"] = n.span->column;
      }
      nodes.push_back(std::move(node));
    }
    json r = {{"name", ast.routine_name},
              {"language", std::string(to_string(ast.language))},
              {"nodes", std::move(nodes)},
              {"root", ast.root}};
    if (!ast.signature.empty()) r["signature"] = ast.signature;
    routines.push_back(std::move(r));
  }
  json doc = {{"version", kInterchangeVersion}, {"routines", std::move(routines)}};
  return doc.dump(1);
}

}  // namespace ipag
