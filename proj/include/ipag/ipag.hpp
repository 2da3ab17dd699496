#pragma once

#include <array>
#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "ipag/ast.hpp"

namespace ipag {

enum class NodeKind : std::uint8_t { token, property, declaration };

/// The six edge families, in the order used for one-hot edge embeddings.
enum class EdgeKind : std::uint8_t { pd = 0, pp = 1, tp = 2, tt = 3, td = 4, dt = 5 };
inline constexpr std::size_t kEdgeKinds = 6;
inline constexpr std::array<EdgeKind, kEdgeKinds> kAllEdgeKinds = {
    EdgeKind::pd, EdgeKind::pp, EdgeKind::tp, EdgeKind::tt, EdgeKind::td, EdgeKind::dt};

enum class Stage : std::uint8_t { preliminary, sequence_reduced, aggregation_reduced, complete };

std::string_view to_string(NodeKind kind);
std::string_view to_string(EdgeKind kind);
std::string_view to_string(Stage stage);
Stage stage_from_string(std::string_view text);
EdgeKind edge_kind_from_string(std::string_view text);

/// Source and target node kinds an edge family connects.
struct EdgeSignature {
  NodeKind source;
  NodeKind target;
};
constexpr EdgeSignature signature_of(EdgeKind kind) {
  switch (kind) {
    case EdgeKind::pd: return {NodeKind::property, NodeKind::declaration};
    case EdgeKind::pp: return {NodeKind::property, NodeKind::property};
    case EdgeKind::tp: return {NodeKind::token, NodeKind::property};
    case EdgeKind::tt: return {NodeKind::token, NodeKind::token};
    case EdgeKind::td: return {NodeKind::token, NodeKind::declaration};
    case EdgeKind::dt: return {NodeKind::declaration, NodeKind::token};
  }
  return {NodeKind::token, NodeKind::token};
}

struct Edge {
  NodeId source = 0;
  NodeId target = 0;
  bool operator==(const Edge&) const = default;
  auto operator<=>(const Edge&) const = default;
};

struct IpagNode {
  NodeId id = 0;
  std::string label;
  bool operator==(const IpagNode&) const = default;
};

/// Inter-procedural abstract graph: three node sets and six directed edge
/// lists. Node ids are unique across all three sets.
struct Ipag {
  std::vector<IpagNode> tokens;
  std::vector<IpagNode> properties;
  std::vector<IpagNode> declarations;
  std::array<std::vector<Edge>, kEdgeKinds> edges;
  Stage stage = Stage::preliminary;
  std::string origin;
  Language language = Language::c;

  std::vector<Edge>& edges_of(EdgeKind kind) { return edges[static_cast<std::size_t>(kind)]; }
  const std::vector<Edge>& edges_of(EdgeKind kind) const {
    return edges[static_cast<std::size_t>(kind)];
  }
  std::vector<IpagNode>& nodes_of(NodeKind kind);
  const std::vector<IpagNode>& nodes_of(NodeKind kind) const;

  std::size_t node_count() const { return tokens.size() + properties.size() + declarations.size(); }
  std::size_t edge_count() const;
  /// Largest node id in use; fresh ids are allocated above it.
  NodeId max_id() const;
  /// The routine's own declaration node (the first one).
  const IpagNode& root_declaration() const { return declarations.at(0); }
};

/// id -> (kind, position within its node list).
class NodeIndex {
 public:
  struct Entry {
    NodeKind kind;
    std::size_t position;
  };

  explicit NodeIndex(const Ipag& g);
  std::optional<Entry> find(NodeId id) const;
  bool contains(NodeId id) const { return map_.count(id) > 0; }
  NodeKind kind(NodeId id) const { return map_.at(id).kind; }
  const std::string& label(NodeId id) const;

 private:
  const Ipag* graph_;
  std::unordered_map<NodeId, Entry> map_;
};

/// Preliminary IPAG of one routine: reversed AST edges partitioned by endpoint
/// kind, a next-token chain and a token-to-declaration edge per token.
Ipag build_preliminary(const Ast& ast);

struct Violation {
  std::string subject;
  std::string rule;
  bool operator==(const Violation&) const = default;
};

/// Every broken IPAG invariant, empty when the graph is well formed.
std::vector<Violation> validate_ipag(const Ipag& g);

/// Token ids along each e_tt chain, one chain per routine instance, ordered
/// by the chain's first token id.
std::vector<std::vector<NodeId>> token_chains(const Ipag& g);

/// Labels of the token chain belonging to declaration `decl`, joined with
/// single spaces.
std::string reconstruct_tokens(const Ipag& g, NodeId decl);
/// Same, for the graph's own routine.
std::string reconstruct_tokens(const Ipag& g);

}  // namespace ipag
