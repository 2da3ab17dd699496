#include <algorithm>
#include <cstdio>
#include <set>
#include <unordered_map>
#include <unordered_set>

#include "ipag/compress.hpp"

namespace ipag {

namespace {

struct Link {
  NodeId node;
  EdgeKind kind;
};

// Entry and exit edges of property nodes (e_tp, e_pp, e_pd only).
struct PropertyAdjacency {
  std::unordered_map<NodeId, std::vector<Link>> in;
  std::unordered_map<NodeId, std::vector<Link>> out;

  explicit PropertyAdjacency(const Ipag& g) {
    for (EdgeKind kind : {EdgeKind::tp, EdgeKind::pp, EdgeKind::pd})
      for (const Edge& e : g.edges_of(kind)) {
        if (kind != EdgeKind::pd) in[e.target].push_back({e.source, kind});
        if (kind != EdgeKind::tp) out[e.source].push_back({e.target, kind});
      }
  }
  const std::vector<Link>& entries(NodeId n) const { return get(in, n); }
  const std::vector<Link>& exits(NodeId n) const { return get(out, n); }
  std::size_t indeg(NodeId n) const { return entries(n).size(); }
  std::size_t outdeg(NodeId n) const { return exits(n).size(); }

 private:
  static const std::vector<Link>& get(const std::unordered_map<NodeId, std::vector<Link>>& m,
                                      NodeId n) {
    static const std::vector<Link> empty;
    auto it = m.find(n);
    return it == m.end() ? empty : it->second;
  }
};

struct MergeGroup {
  std::vector<NodeId> members;
  std::string label;
};

// Replaces each group of property nodes by one fresh node. Edges between
// members of a group vanish; every other edge touching a member is redirected
// to the group's node and keeps its kind and position.
Ipag contract(const Ipag& g, const std::vector<MergeGroup>& groups) {
  NodeId next_id = g.max_id() + 1;
  std::unordered_map<NodeId, std::size_t> group_of;
  std::vector<NodeId> fresh(groups.size());
  for (std::size_t i = 0; i < groups.size(); ++i) {
    fresh[i] = next_id++;
    for (NodeId m : groups[i].members) group_of[m] = i;
  }

  Ipag out;
  out.tokens = g.tokens;
  out.declarations = g.declarations;
  out.stage = g.stage;
  out.origin = g.origin;
  out.language = g.language;
  std::vector<bool> placed(groups.size(), false);
  for (const auto& p : g.properties) {
    auto it = group_of.find(p.id);
    if (it == group_of.end()) {
      out.properties.push_back(p);
    } else if (!placed[it->second]) {
      placed[it->second] = true;
      out.properties.push_back({fresh[it->second], groups[it->second].label});
    }
  }

  auto map_id = [&](NodeId id) -> std::pair<NodeId, long> {
    auto it = group_of.find(id);
    if (it == group_of.end()) return {id, -1};
    return {fresh[it->second], static_cast<long>(it->second)};
  };
  for (EdgeKind kind : kAllEdgeKinds) {
    std::set<Edge> seen;
    auto& dst = out.edges_of(kind);
    for (const Edge& e : g.edges_of(kind)) {
      auto [s, sg] = map_id(e.source);
      auto [t, tg] = map_id(e.target);
      if (sg >= 0 && sg == tg) continue;
      Edge ne{s, t};
      if (seen.insert(ne).second) dst.push_back(ne);
    }
  }
  return out;
}

std::string join(const std::vector<std::string>& parts, std::string_view sep) {
  std::string out;
  for (std::size_t i = 0; i < parts.size(); ++i) {
    if (i) out += sep;
    out += parts[i];
  }
  return out;
}

}  // namespace

std::vector<PropertySequence> find_sequences(const Ipag& g) {
  PropertyAdjacency adj(g);
  NodeIndex index(g);
  auto is_property = [&](NodeId n) {
    auto e = index.find(n);
    return e && e->kind == NodeKind::property;
  };
  // A node that can sit inside a sequence: one entry, one exit.
  auto is_link = [&](NodeId n) { return adj.indeg(n) == 1 && adj.outdeg(n) == 1; };

  std::vector<PropertySequence> out;
  for (const auto& p : g.properties) {
    const NodeId start = p.id;
    if (adj.indeg(start) < 1 || adj.outdeg(start) != 1) continue;
    // Skip nodes that a longer sequence would contain.
    if (adj.indeg(start) == 1) {
      const Link& only = adj.entries(start)[0];
      if (only.kind == EdgeKind::pp && adj.indeg(only.node) >= 1 && adj.outdeg(only.node) == 1)
        continue;
    }
    std::vector<NodeId> path{start};
    std::unordered_set<NodeId> on_path{start};
    bool valid = false;
    NodeId exit = 0;
    NodeId cur = start;
    while (true) {
      const Link& next = adj.exits(cur)[0];
      if (next.kind == EdgeKind::pd) {
        exit = next.node;
        valid = true;
        break;
      }
      if (!is_property(next.node) || on_path.count(next.node)) break;
      if (is_link(next.node)) {
        path.push_back(next.node);
        on_path.insert(next.node);
        cur = next.node;
        continue;
      }
      exit = next.node;
      valid = adj.indeg(next.node) >= 2;
      break;
    }
    if (!valid || path.size() < 2) continue;

    std::vector<NodeId> entry;
    for (const Link& l : adj.entries(start)) entry.push_back(l.node);

    // Split runs whose merged label would exceed the per-node name cap.
    std::vector<std::vector<NodeId>> chunks(1);
    std::size_t names = 0;
    for (NodeId n : path) {
      const std::size_t c = label_name_count(index.label(n));
      if (!chunks.back().empty() && names + c > kMaxNamesPerNode) {
        chunks.emplace_back();
        names = 0;
      }
      chunks.back().push_back(n);
      names += c;
    }
    for (std::size_t i = 0; i < chunks.size(); ++i) {
      if (chunks[i].size() < 2) continue;
      PropertySequence seq;
      seq.nodes = chunks[i];
      if (i == 0) {
        seq.entry = entry;
      } else {
        seq.entry = {chunks[i - 1].back()};
      }
      seq.exit = i + 1 < chunks.size() ? chunks[i + 1].front() : exit;
      out.push_back(std::move(seq));
    }
  }
  return out;
}

Ipag merge_sequences(const Ipag& g) {
  if (g.stage != Stage::preliminary && g.stage != Stage::sequence_reduced)
    throw StageError("merge_sequences expects a preliminary IPAG, got " +
                     std::string(to_string(g.stage)));
  NodeIndex index(g);
  std::vector<MergeGroup> groups;
  for (const auto& seq : find_sequences(g)) {
    std::vector<std::string> names;
    for (auto it = seq.nodes.rbegin(); it != seq.nodes.rend(); ++it) names.push_back(index.label(*it));
    groups.push_back({seq.nodes, join(names, kSequenceSeparator)});
  }
  Ipag out = contract(g, groups);
  out.stage = Stage::sequence_reduced;
  return out;
}

std::vector<AggregationStructure> find_aggregations(const Ipag& g, const CompressRuleset& rules) {
  PropertyAdjacency adj(g);
  NodeIndex index(g);
  std::vector<AggregationStructure> out;
  for (const auto& p : g.properties) {
    AggregationStructure agg;
    agg.parent = p.id;
    for (const Link& l : adj.entries(p.id))
      if (l.kind == EdgeKind::pp) agg.children.push_back(l.node);
    if (agg.children.size() < 2 || adj.outdeg(p.id) != 1) continue;
    agg.exit = adj.exits(p.id)[0].node;

    agg.structural_ok = true;
    std::size_t names = label_name_count(p.label);
    for (NodeId c : agg.children) {
      std::vector<NodeId> f;
      for (const Link& l : adj.entries(c)) f.push_back(l.node);
      if (f.size() != 1) agg.structural_ok = false;
      agg.feeders.push_back(std::move(f));
      names += label_name_count(index.label(c));
    }
    agg.semantic_ok = rules.is_compressible(entry_name(p.label));
    agg.compressible = agg.structural_ok && agg.semantic_ok && names <= kMaxNamesPerNode;
    out.push_back(std::move(agg));
  }
  return out;
}

Ipag merge_aggregations(const Ipag& g, const CompressRuleset& rules) {
  if (g.stage != Stage::sequence_reduced && g.stage != Stage::aggregation_reduced)
    throw StageError("merge_aggregations expects a sequence-reduced IPAG, got " +
                     std::string(to_string(g.stage)));
  NodeIndex index(g);
  std::vector<MergeGroup> groups;
  std::unordered_set<NodeId> used;
  for (const auto& agg : find_aggregations(g, rules)) {
    if (!agg.compressible) continue;
    std::vector<NodeId> members{agg.parent};
    members.insert(members.end(), agg.children.begin(), agg.children.end());
    if (std::any_of(members.begin(), members.end(), [&](NodeId n) { return used.count(n) > 0; }))
      continue;
    used.insert(members.begin(), members.end());
    std::vector<std::string> child_labels;
    for (NodeId c : agg.children) child_labels.push_back(index.label(c));
    groups.push_back(
        {members, index.label(agg.parent) + "(" + join(child_labels, kSiblingSeparator) + ")"});
  }
  Ipag out = contract(g, groups);
  out.stage = Stage::aggregation_reduced;
  return out;
}

Ipag compress(const Ipag& preliminary, const CompressRuleset& rules) {
  return merge_aggregations(merge_sequences(preliminary), rules);
}

CompressionReport compression_report(const std::vector<Ipag>& before,
                                      const std::vector<Ipag>& after) {
  if (before.size() != after.size())
    throw std::invalid_argument("compression report needs matching corpora (" +
                                std::to_string(before.size()) + " vs " +
                                std::to_string(after.size()) + " routines)");
  CompressionReport r;
  r.routines = before.size();
  auto bin = [](double ratio) {
    auto b = static_cast<long>(ratio * 10.0);
    return static_cast<std::size_t>(std::clamp(b, 0L, 9L));
  };
  for (std::size_t i = 0; i < before.size(); ++i) {
    const auto nb = before[i].node_count(), na = after[i].node_count();
    const auto eb = before[i].edge_count(), ea = after[i].edge_count();
    r.nodes_before += nb;
    r.nodes_after += na;
    r.edges_before += eb;
    r.edges_after += ea;
    ++r.node_ratio_histogram[bin(nb ? 1.0 - double(na) / double(nb) : 0.0)];
    ++r.edge_ratio_histogram[bin(eb ? 1.0 - double(ea) / double(eb) : 0.0)];
  }
  if (r.nodes_before) r.node_ratio = 1.0 - double(r.nodes_after) / double(r.nodes_before);
  if (r.edges_before) r.edge_ratio = 1.0 - double(r.edges_after) / double(r.edges_before);
  return r;
}

std::string format_report(const CompressionReport& r) {
  char line[256];
  std::string out;
  std::snprintf(line, sizeof line, "routines: %zu\n", r.routines);
  out += line;
  std::snprintf(line, sizeof line, "nodes: %zu -> %zu (reduction %.4f)\n", r.nodes_before,
                r.nodes_after, r.node_ratio);
  out += line;
  std::snprintf(line, sizeof line, "edges: %zu -> %zu (reduction %.4f)\n", r.edges_before,
                r.edges_after, r.edge_ratio);
  out += line;
  auto hist = [&](const char* name, const std::array<std::size_t, 10>& h) {
    out += name;
    for (std::size_t i = 0; i < h.size(); ++i) {
      std::snprintf(line, sizeof line, " [%.1f,%.1f):%zu", i / 10.0, (i + 1) / 10.0, h[i]);
      out += line;
    }
    out += '\n';
  };
  hist("node reduction histogram:", r.node_ratio_histogram);
  hist("edge reduction histogram:", r.edge_ratio_histogram);
  return out;
}

}  // namespace ipag
