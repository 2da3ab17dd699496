#include <algorithm>
#include <map>
#include <unordered_map>

#include "ipag/compress.hpp"
#include "ipag/embed.hpp"

namespace ipag {

const Matrix& NodeFeatures::of(NodeKind kind) const {
  switch (kind) {
    case NodeKind::token: return tokens;
    case NodeKind::property: return properties;
    case NodeKind::declaration: return declarations;
  }
  return tokens;
}

namespace {

Matrix text_rows(const std::vector<IpagNode>& nodes, TextEmbedder& text) {
  Matrix m(nodes.size(), text.width());
  if (nodes.empty()) return m;
  // Embed each distinct label once.
  std::vector<std::string> distinct;
  std::map<std::string, std::size_t> slot;
  for (const auto& n : nodes)
    if (slot.emplace(n.label, distinct.size()).second) distinct.push_back(n.label);
  const auto vectors = text.embed(distinct);
  if (vectors.size() != distinct.size()) throw EmbedError("text embedder returned the wrong number of vectors");
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    const auto& v = vectors[slot[nodes[i].label]];
    if (v.size() != text.width()) throw EmbedError("text embedder returned the wrong width");
    std::copy(v.begin(), v.end(), m.row(i));
  }
  return m;
}

}  // namespace

NodeFeatures compute_features(const Ipag& g, const PropertyVocabulary& vocab, TextEmbedder& text,
                              UnknownNames unknown, std::vector<std::string>* warnings) {
  NodeFeatures f;
  f.text_width = text.width();
  f.tokens = text_rows(g.tokens, text);
  f.declarations = text_rows(g.declarations, text);
  f.properties = Matrix(g.properties.size(), kPropertyWidth);
  std::size_t unseen = 0;
  for (std::size_t i = 0; i < g.properties.size(); ++i) {
    const auto v = embed_property(g.properties[i].label, vocab, unknown, &unseen);
    std::copy(v.begin(), v.end(), f.properties.row(i));
  }
  if (unseen && warnings)
    warnings->push_back(g.origin + ": " + std::to_string(unseen) +
                        " property names outside the vocabulary mapped to index 0");
  return f;
}

bool is_upward(EdgeKind kind) {
  return kind == EdgeKind::tp || kind == EdgeKind::pp || kind == EdgeKind::pd || kind == EdgeKind::td;
}

std::array<std::vector<int>, kEdgeKinds> edge_depths(const Ipag& g) {
  std::unordered_map<NodeId, std::vector<NodeId>> up;
  for (EdgeKind k : kAllEdgeKinds)
    if (is_upward(k))
      for (const Edge& e : g.edges_of(k)) up[e.source].push_back(e.target);

  // Longest upward path length from each node, iteratively with a colour map
  // so deep graphs do not exhaust the stack.
  std::unordered_map<NodeId, int> longest;
  std::unordered_map<NodeId, int> colour;  // 1 on stack, 2 done
  auto solve = [&](NodeId start) {
    if (colour[start] == 2) return;
    std::vector<std::pair<NodeId, std::size_t>> stack{{start, 0}};
    colour[start] = 1;
    while (!stack.empty()) {
      auto& [node, next] = stack.back();
      const auto it = up.find(node);
      const std::size_t degree = it == up.end() ? 0 : it->second.size();
      if (next < degree) {
        const NodeId t = it->second[next++];
        const int c = colour[t];
        if (c == 1) throw EmbedError(g.origin + ": upward edges form a cycle through node " + std::to_string(t));
        if (c == 0) {
          colour[t] = 1;
          stack.push_back({t, 0});
        }
        continue;
      }
      int best = 0;
      if (it != up.end())
        for (NodeId t : it->second) best = std::max(best, 1 + longest[t]);
      longest[node] = best;
      colour[node] = 2;
      stack.pop_back();
    }
  };

  std::array<std::vector<int>, kEdgeKinds> out;
  int deepest = 1;
  for (EdgeKind k : kAllEdgeKinds) {
    if (!is_upward(k)) continue;
    auto& d = out[static_cast<std::size_t>(k)];
    for (const Edge& e : g.edges_of(k)) {
      solve(e.target);
      d.push_back(1 + longest[e.target]);
      deepest = std::max(deepest, d.back());
    }
  }
  for (EdgeKind k : kAllEdgeKinds)
    if (!is_upward(k)) out[static_cast<std::size_t>(k)].assign(g.edges_of(k).size(), deepest);
  return out;
}

EmbeddedGraph slice_subgraphs(const Ipag& g, NodeFeatures features) {
  if (g.stage != Stage::complete)
    throw StageError("embedding expects complete IPAGs; '" + g.origin + "' is " + std::string(to_string(g.stage)) +
                     " (run compress and link first)");
  if (features.tokens.rows != g.tokens.size() || features.properties.rows != g.properties.size() ||
      features.declarations.rows != g.declarations.size())
    throw EmbedError(g.origin + ": feature rows do not match node counts");
  NodeIndex index(g);
  const auto depths = edge_depths(g);
  EmbeddedGraph out;
  out.name = g.origin;
  out.features = std::move(features);
  for (EdgeKind k : kAllEdgeKinds) {
    Subgraph& s = out.units[static_cast<std::size_t>(k)];
    s.kind = k;
    const auto& edges = g.edges_of(k);
    auto ref = [&](NodeId id) {
      const auto e = index.find(id);
      if (!e) throw EmbedError(g.origin + ": edge endpoint " + std::to_string(id) + " is not a node");
      return NodeRef{e->kind, static_cast<std::uint32_t>(e->position)};
    };
    for (const Edge& e : edges) {
      s.nodes.push_back(ref(e.source));
      s.nodes.push_back(ref(e.target));
    }
    std::sort(s.nodes.begin(), s.nodes.end());
    s.nodes.erase(std::unique(s.nodes.begin(), s.nodes.end()), s.nodes.end());
    auto pos = [&](NodeId id) {
      const NodeRef r = ref(id);
      return static_cast<std::uint32_t>(std::lower_bound(s.nodes.begin(), s.nodes.end(), r) - s.nodes.begin());
    };
    for (std::size_t i = 0; i < edges.size(); ++i) {
      s.source.push_back(pos(edges[i].source));
      s.target.push_back(pos(edges[i].target));
      s.depth.push_back(depths[static_cast<std::size_t>(k)][i]);
      s.max_depth = std::max(s.max_depth, s.depth.back());
    }
  }
  return out;
}

}  // namespace ipag
