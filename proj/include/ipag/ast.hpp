#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

namespace ipag {

using NodeId = std::uint32_t;

enum class AstKind { property, token };
enum class Language { c, java, other };

std::string_view to_string(AstKind kind);
std::string_view to_string(Language lang);
AstKind ast_kind_from_string(std::string_view text);
Language language_from_string(std::string_view text);

struct SourcePos {
  int line = 0;
  int column = 0;
  bool operator==(const SourcePos&) const = default;
};

struct AstNode {
  NodeId id = 0;
  AstKind kind = AstKind::property;
  std::string label;
  std::vector<NodeId> children;
  std::optional<SourcePos> span;
};

/// A routine's syntax tree. Nodes are stored densely: `nodes[i].id == i`.
struct Ast {
  std::vector<AstNode> nodes;
  NodeId root = 0;
  std::string routine_name;
  Language language = Language::c;
  /// Text used to label the routine's declaration node. Falls back to the
  /// routine name when empty.
  std::string signature;
  std::uint64_t source_hash = 0;

  const AstNode& node(NodeId id) const { return nodes.at(id); }
  std::size_t token_count() const;
  std::size_t property_count() const;
};

/// Raised when an AST breaks one of its structural rules. `node` is the
/// offending node id when one can be named.
class AstValidationError : public std::runtime_error {
 public:
  AstValidationError(std::optional<NodeId> node, std::string rule);
  const std::optional<NodeId>& node() const { return node_; }
  const std::string& rule() const { return rule_; }

 private:
  std::optional<NodeId> node_;
  std::string rule_;
};

/// Checks every Ast invariant and throws AstValidationError on the first
/// violation found.
void validate_ast(const Ast& ast);

/// Terminal nodes in left-to-right order.
std::vector<std::pair<NodeId, std::string>> token_frontier(const Ast& ast);

/// Token labels joined with single spaces.
std::string frontier_text(const Ast& ast);

std::uint64_t stable_hash(std::string_view text);

struct CorpusWarning {
  std::string message;
};

/// A set of routines with a name index. Duplicate names resolve to the last
/// definition.
class RoutineCorpus {
 public:
  RoutineCorpus() = default;
  explicit RoutineCorpus(std::vector<Ast> asts);

  void add(Ast ast);
  const std::vector<Ast>& asts() const { return asts_; }
  std::size_t size() const { return asts_.size(); }
  bool empty() const { return asts_.empty(); }
  const Ast* find(std::string_view name) const;
  const std::vector<CorpusWarning>& warnings() const { return warnings_; }

 private:
  std::vector<Ast> asts_;
  std::unordered_map<std::string, std::size_t> index_;
  std::vector<CorpusWarning> warnings_;
};

}  // namespace ipag
