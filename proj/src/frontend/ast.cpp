#include "ipag/ast.hpp"

namespace ipag {

std::string_view to_string(AstKind kind) {
  return kind == AstKind::token ? "token" : "property";
}

std::string_view to_string(Language lang) {
  switch (lang) {
    case Language::c: return "c";
    case Language::java: return "java";
    case Language::other: return "other";
  }
  return "other";
}

AstKind ast_kind_from_string(std::string_view text) {
  if (text == "token") return AstKind::token;
  if (text == "property") return AstKind::property;
  throw std::invalid_argument("unknown node kind '" + std::string(text) + "'");
}

Language language_from_string(std::string_view text) {
  if (text == "c" || text == "C") return Language::c;
  if (text == "java" || text == "Java") return Language::java;
  return Language::other;
}

std::size_t Ast::token_count() const {
  std::size_t n = 0;
  for (const auto& node : nodes) n += node.kind == AstKind::token;
  return n;
}

std::size_t Ast::property_count() const { return nodes.size() - token_count(); }

AstValidationError::AstValidationError(std::optional<NodeId> node, std::string rule)
    : std::runtime_error(node ? "node " + std::to_string(*node) + ": " + rule : rule),
      node_(node),
      rule_(std::move(rule)) {}

void validate_ast(const Ast& ast) {
  const auto n = ast.nodes.size();
  if (n == 0) throw AstValidationError(std::nullopt, "ast has no nodes");
  for (std::size_t i = 0; i < n; ++i) {
    if (ast.nodes[i].id != i)
      throw AstValidationError(static_cast<NodeId>(i), "node ids must be dense from 0");
  }
  if (ast.root >= n) throw AstValidationError(ast.root, "root id out of range");
  if (ast.nodes[ast.root].kind != AstKind::property)
    throw AstValidationError(ast.root, "root must be a property node");

  std::vector<int> parents(n, 0);
  for (const auto& node : ast.nodes) {
    if (node.kind == AstKind::token && !node.children.empty())
      throw AstValidationError(node.id, "token nodes have zero children");
    for (NodeId child : node.children) {
      if (child >= n) throw AstValidationError(node.id, "child id out of range");
      if (++parents[child] > 1)
        throw AstValidationError(child, "every non-root node has exactly one parent");
    }
  }
  if (parents[ast.root] != 0) throw AstValidationError(ast.root, "root must not have a parent");

  // Single parents plus reachability from the root rules out cycles.
  std::vector<bool> seen(n, false);
  std::vector<NodeId> stack{ast.root};
  seen[ast.root] = true;
  std::size_t reached = 1;
  while (!stack.empty()) {
    NodeId id = stack.back();
    stack.pop_back();
    for (NodeId child : ast.nodes[id].children) {
      if (seen[child]) throw AstValidationError(child, "ast must be acyclic");
      seen[child] = true;
      ++reached;
      stack.push_back(child);
    }
  }
  if (reached != n) {
    for (std::size_t i = 0; i < n; ++i)
      if (!seen[i])
        throw AstValidationError(static_cast<NodeId>(i), "ast must be connected");
  }
}

std::vector<std::pair<NodeId, std::string>> token_frontier(const Ast& ast) {
  std::vector<std::pair<NodeId, std::string>> out;
  if (ast.nodes.empty()) return out;
  std::vector<NodeId> stack{ast.root};
  while (!stack.empty()) {
    const AstNode& node = ast.nodes[stack.back()];
    stack.pop_back();
    if (node.kind == AstKind::token) {
      out.emplace_back(node.id, node.label);
      continue;
    }
    for (auto it = node.children.rbegin(); it != node.children.rend(); ++it) stack.push_back(*it);
  }
  return out;
}

std::string frontier_text(const Ast& ast) {
  std::string text;
  for (const auto& [id, label] : token_frontier(ast)) {
    if (!text.empty()) text += ' ';
    text += label;
  }
  return text;
}

std::uint64_t stable_hash(std::string_view text) {
  // FNV-1a, 64 bit.
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char c : text) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return h;
}

RoutineCorpus::RoutineCorpus(std::vector<Ast> asts) {
  for (auto& ast : asts) add(std::move(ast));
}

void RoutineCorpus::add(Ast ast) {
  auto [it, inserted] = index_.try_emplace(ast.routine_name, asts_.size());
  if (!inserted) {
    warnings_.push_back({"duplicate routine '" + ast.routine_name +
                         "': last definition wins for call resolution"});
    it->second = asts_.size();
  }
  asts_.push_back(std::move(ast));
}

const Ast* RoutineCorpus::find(std::string_view name) const {
  auto it = index_.find(std::string(name));
  return it == index_.end() ? nullptr : &asts_[it->second];
}

}  // namespace ipag
