#include "ipag/ipag.hpp"

#include <algorithm>
#include <map>
#include <set>
#include <stdexcept>
#include <unordered_set>

namespace ipag {

std::string_view to_string(NodeKind kind) {
  switch (kind) {
    case NodeKind::token: return "token";
    case NodeKind::property: return "property";
    case NodeKind::declaration: return "declaration";
  }
  return "?";
}

std::string_view to_string(EdgeKind kind) {
  switch (kind) {
    case EdgeKind::pd: return "e_pd";
    case EdgeKind::pp: return "e_pp";
    case EdgeKind::tp: return "e_tp";
    case EdgeKind::tt: return "e_tt";
    case EdgeKind::td: return "e_td";
    case EdgeKind::dt: return "e_dt";
  }
  return "?";
}

std::string_view to_string(Stage stage) {
  switch (stage) {
    case Stage::preliminary: return "preliminary";
    case Stage::sequence_reduced: return "sequence_reduced";
    case Stage::aggregation_reduced: return "aggregation_reduced";
    case Stage::complete: return "complete";
  }
  return "?";
}

Stage stage_from_string(std::string_view text) {
  for (Stage s : {Stage::preliminary, Stage::sequence_reduced, Stage::aggregation_reduced,
                  Stage::complete})
    if (to_string(s) == text) return s;
  throw std::invalid_argument("unknown stage '" + std::string(text) + "'");
}

EdgeKind edge_kind_from_string(std::string_view text) {
  for (EdgeKind k : kAllEdgeKinds)
    if (to_string(k) == text || to_string(k).substr(2) == text) return k;
  throw std::invalid_argument("unknown edge kind '" + std::string(text) + "'");
}

std::vector<IpagNode>& Ipag::nodes_of(NodeKind kind) {
  switch (kind) {
    case NodeKind::token: return tokens;
    case NodeKind::property: return properties;
    case NodeKind::declaration: return declarations;
  }
  return tokens;
}

const std::vector<IpagNode>& Ipag::nodes_of(NodeKind kind) const {
  return const_cast<Ipag*>(this)->nodes_of(kind);
}

std::size_t Ipag::edge_count() const {
  std::size_t n = 0;
  for (const auto& list : edges) n += list.size();
  return n;
}

NodeId Ipag::max_id() const {
  NodeId m = 0;
  for (const auto* list : {&tokens, &properties, &declarations})
    for (const auto& node : *list) m = std::max(m, node.id);
  return m;
}

NodeIndex::NodeIndex(const Ipag& g) : graph_(&g) {
  map_.reserve(g.node_count());
  for (NodeKind kind : {NodeKind::token, NodeKind::property, NodeKind::declaration}) {
    const auto& list = g.nodes_of(kind);
    for (std::size_t i = 0; i < list.size(); ++i) map_.emplace(list[i].id, Entry{kind, i});
  }
}

std::optional<NodeIndex::Entry> NodeIndex::find(NodeId id) const {
  auto it = map_.find(id);
  if (it == map_.end()) return std::nullopt;
  return it->second;
}

const std::string& NodeIndex::label(NodeId id) const {
  const Entry& e = map_.at(id);
  return graph_->nodes_of(e.kind)[e.position].label;
}

Ipag build_preliminary(const Ast& ast) {
  validate_ast(ast);
  Ipag g;
  g.origin = ast.routine_name;
  g.language = ast.language;
  g.stage = Stage::preliminary;

  const NodeId root = ast.root;
  g.declarations.push_back({root, ast.signature.empty() ? ast.routine_name : ast.signature});

  // Preorder keeps node and edge order deterministic.
  std::vector<NodeId> stack{root};
  std::vector<NodeId> frontier;
  while (!stack.empty()) {
    const AstNode& node = ast.node(stack.back());
    stack.pop_back();
    if (node.id != root) {
      if (node.kind == AstKind::token) {
        g.tokens.push_back({node.id, node.label});
        frontier.push_back(node.id);
      } else {
        g.properties.push_back({node.id, node.label});
      }
    }
    for (NodeId child_id : node.children) {
      const AstNode& child = ast.node(child_id);
      if (node.id == root) {
        // A token directly under the root is represented only by its
        // mandatory token-to-declaration edge.
        if (child.kind == AstKind::property) g.edges_of(EdgeKind::pd).push_back({child_id, root});
      } else if (child.kind == AstKind::property) {
        g.edges_of(EdgeKind::pp).push_back({child_id, node.id});
      } else {
        g.edges_of(EdgeKind::tp).push_back({child_id, node.id});
      }
    }
    for (auto it = node.children.rbegin(); it != node.children.rend(); ++it) stack.push_back(*it);
  }
  for (std::size_t i = 0; i + 1 < frontier.size(); ++i)
    g.edges_of(EdgeKind::tt).push_back({frontier[i], frontier[i + 1]});
  for (NodeId t : frontier) g.edges_of(EdgeKind::td).push_back({t, root});
  return g;
}

namespace {

std::string edge_subject(EdgeKind kind, const Edge& e) {
  return std::string(to_string(kind)) + " (" + std::to_string(e.source) + ", " +
         std::to_string(e.target) + ")";
}

}  // namespace

std::vector<Violation> validate_ipag(const Ipag& g) {
  std::vector<Violation> out;

  std::unordered_map<NodeId, NodeKind> kinds;
  for (NodeKind kind : {NodeKind::token, NodeKind::property, NodeKind::declaration}) {
    for (const auto& node : g.nodes_of(kind)) {
      if (!kinds.emplace(node.id, kind).second)
        out.push_back({"node " + std::to_string(node.id), "node ids are unique across node sets"});
    }
  }

  // Edges that pass their signature check; later rules only look at these.
  std::array<std::vector<Edge>, kEdgeKinds> valid;
  std::map<Edge, EdgeKind> seen;
  for (EdgeKind kind : kAllEdgeKinds) {
    const EdgeSignature sig = signature_of(kind);
    for (const Edge& e : g.edges_of(kind)) {
      auto src = kinds.find(e.source);
      auto dst = kinds.find(e.target);
      if (src == kinds.end() || dst == kinds.end()) {
        out.push_back({edge_subject(kind, e), "edge endpoints must exist"});
        continue;
      }
      if (src->second != sig.source || dst->second != sig.target) {
        out.push_back({edge_subject(kind, e),
                       std::string(to_string(kind)) + " signature: " +
                           std::string(to_string(sig.source)) + " -> " +
                           std::string(to_string(sig.target))});
        continue;
      }
      auto [it, fresh] = seen.emplace(e, kind);
      if (!fresh) {
        out.push_back({edge_subject(kind, e),
                       it->second == kind ? "duplicate edge"
                                          : "edge lists are pairwise disjoint"});
        continue;
      }
      valid[static_cast<std::size_t>(kind)].push_back(e);
    }
  }

  // Per-token outgoing edge counts.
  std::unordered_map<NodeId, int> tp_out, td_out, tt_out, tt_in;
  std::unordered_map<NodeId, NodeId> token_decl;
  for (const Edge& e : valid[static_cast<std::size_t>(EdgeKind::tp)]) ++tp_out[e.source];
  for (const Edge& e : valid[static_cast<std::size_t>(EdgeKind::td)]) {
    ++td_out[e.source];
    token_decl[e.source] = e.target;
  }
  std::unordered_map<NodeId, NodeId> next;
  for (const Edge& e : valid[static_cast<std::size_t>(EdgeKind::tt)]) {
    ++tt_out[e.source];
    ++tt_in[e.target];
    next[e.source] = e.target;
  }
  for (const auto& t : g.tokens) {
    const std::string subject = "token " + std::to_string(t.id);
    if (tp_out[t.id] > 1) out.push_back({subject, "a token has at most one outgoing e_tp edge"});
    if (td_out[t.id] != 1) out.push_back({subject, "a token has exactly one outgoing e_td edge"});
    if (tt_out[t.id] > 1 || tt_in[t.id] > 1)
      out.push_back({subject, "e_tt forms simple paths"});
  }

  // Chains: each must stay within one routine instance and cover it.
  std::unordered_map<NodeId, std::size_t> chains_per_decl;
  std::unordered_set<NodeId> visited;
  for (const auto& t : g.tokens) {
    if (tt_in[t.id] != 0 || tt_out[t.id] > 1) continue;
    std::optional<NodeId> decl;
    bool mixed = false;
    NodeId cur = t.id;
    while (true) {
      if (!visited.insert(cur).second) break;
      auto d = token_decl.find(cur);
      if (d != token_decl.end()) {
        if (decl && *decl != d->second) mixed = true;
        decl = d->second;
      }
      auto it = next.find(cur);
      if (it == next.end()) break;
      cur = it->second;
    }
    if (mixed)
      out.push_back({"token " + std::to_string(t.id),
                     "an e_tt path stays within one routine's tokens"});
    if (decl) ++chains_per_decl[*decl];
  }
  for (const auto& t : g.tokens) {
    if (!visited.count(t.id) && tt_out[t.id] <= 1 && tt_in[t.id] <= 1)
      out.push_back({"token " + std::to_string(t.id), "e_tt forms simple paths (cycle)"});
  }
  for (const auto& [decl, count] : chains_per_decl) {
    if (count > 1)
      out.push_back({"declaration " + std::to_string(decl),
                     "e_tt covers each routine's tokens with a single path"});
  }

  if (g.stage != Stage::complete) {
    if (!g.edges_of(EdgeKind::dt).empty())
      out.push_back({"e_dt", "e_dt is empty before call linking"});
    if (g.declarations.size() != 1)
      out.push_back({"declarations", "exactly one declaration node before call linking"});
  }
  return out;
}

std::vector<std::vector<NodeId>> token_chains(const Ipag& g) {
  std::unordered_map<NodeId, NodeId> next;
  std::unordered_set<NodeId> has_prev;
  for (const Edge& e : g.edges_of(EdgeKind::tt)) {
    next[e.source] = e.target;
    has_prev.insert(e.target);
  }
  std::vector<NodeId> starts;
  for (const auto& t : g.tokens)
    if (!has_prev.count(t.id)) starts.push_back(t.id);
  std::sort(starts.begin(), starts.end());
  std::vector<std::vector<NodeId>> chains;
  for (NodeId s : starts) {
    std::vector<NodeId> chain{s};
    std::unordered_set<NodeId> guard{s};
    for (auto it = next.find(s); it != next.end(); it = next.find(it->second)) {
      if (!guard.insert(it->second).second) break;
      chain.push_back(it->second);
    }
    chains.push_back(std::move(chain));
  }
  return chains;
}

std::string reconstruct_tokens(const Ipag& g, NodeId decl) {
  std::unordered_set<NodeId> mine;
  for (const Edge& e : g.edges_of(EdgeKind::td))
    if (e.target == decl) mine.insert(e.source);
  NodeIndex index(g);
  std::string text;
  for (const auto& chain : token_chains(g)) {
    if (chain.empty() || !mine.count(chain.front())) continue;
    for (NodeId t : chain) {
      if (!text.empty()) text += ' ';
      text += index.label(t);
    }
    break;
  }
  return text;
}

std::string reconstruct_tokens(const Ipag& g) {
  return reconstruct_tokens(g, g.root_declaration().id);
}

}  // namespace ipag
