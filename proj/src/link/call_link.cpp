#include "ipag/call_link.hpp"

#include <algorithm>
#include <functional>
#include <set>
#include <stdexcept>
#include <unordered_map>

#include "ipag/compress.hpp"

namespace ipag {

namespace {

bool is_call_name(std::string_view n) { return n == "FunctionCallExpression" || n == "MethodCallExpr"; }

bool is_identifier_name(std::string_view n) {
  return n == "IdExpression" || n == "Name" || n == "NameExpr" || n == "SimpleName";
}

template <class It>
bool identifier_only(It begin, It end) {
  return begin != end && std::all_of(begin, end, [](const std::string& n) { return is_identifier_name(n); });
}

bool identifier_only(const std::vector<std::string>& names) {
  return identifier_only(names.begin(), names.end());
}

// Position of the last call name in `names`, or -1.
long last_call(const std::vector<std::string>& names) {
  for (long i = static_cast<long>(names.size()) - 1; i >= 0; --i)
    if (is_call_name(names[static_cast<std::size_t>(i)])) return i;
  return -1;
}

std::map<std::string, std::size_t> name_index(const std::vector<Ipag>& corpus) {
  std::map<std::string, std::size_t> out;
  for (std::size_t i = 0; i < corpus.size(); ++i) out[corpus[i].origin] = i;
  return out;
}

}  // namespace

int CallDepthIndex::depth_of(const std::string& routine) const {
  auto it = depth.find(routine);
  if (it == depth.end()) throw LinkError("routine '" + routine + "' is not in the call depth index");
  return it->second;
}

std::vector<CallSite> candidate_call_sites(const Ipag& g, CallSitePolicy policy) {
  NodeIndex index(g);
  std::unordered_map<NodeId, std::size_t> order;
  for (const auto& chain : token_chains(g))
    for (NodeId t : chain) order.emplace(t, order.size());

  std::unordered_map<NodeId, std::vector<NodeId>> tokens_into, props_into;
  for (const Edge& e : g.edges_of(EdgeKind::tp)) tokens_into[e.target].push_back(e.source);
  for (const Edge& e : g.edges_of(EdgeKind::pp)) props_into[e.target].push_back(e.source);
  auto by_order = [&](std::vector<NodeId> ts) {
    std::sort(ts.begin(), ts.end(), [&](NodeId a, NodeId b) { return order[a] < order[b]; });
    return ts;
  };
  // The token of a child that is an identifier with exactly one token feeder.
  auto identifier_token = [&](NodeId child) -> std::optional<NodeId> {
    if (!identifier_only(label_names(index.label(child)))) return std::nullopt;
    if (props_into.count(child)) return std::nullopt;
    const auto& ts = tokens_into[child];
    if (ts.size() != 1) return std::nullopt;
    return ts[0];
  };

  std::set<NodeId> picked;
  for (const auto& p : g.properties) {
    if (!label_contains_name(p.label, "FunctionCallExpression") &&
        !label_contains_name(p.label, "MethodCallExpr"))
      continue;
    const auto groups = split_label(p.label);
    const auto direct = by_order(tokens_into[p.id]);

    if (policy == CallSitePolicy::every_resolved_token) {
      picked.insert(direct.begin(), direct.end());
      for (NodeId c : props_into[p.id])
        if (auto t = identifier_token(c)) picked.insert(*t);
      continue;
    }

    const auto& head = groups[0];
    const long at = last_call(head);
    const bool aggregated = groups.size() > 1;
    if (aggregated) {
      if (at >= 0 && static_cast<std::size_t>(at) + 1 == head.size() && identifier_only(groups[1]) &&
          !direct.empty())
        picked.insert(direct.front());
      // Zero-argument calls folded into a child. When every child was fed
      // by one token and the parent by none, tokens map to children in
      // order; otherwise the child cannot be told apart and all direct
      // tokens are offered for resolution.
      const bool exact = direct.size() + 1 == groups.size();
      for (std::size_t j = 1; j < groups.size(); ++j) {
        const long c = last_call(groups[j]);
        if (c < 0 || !identifier_only(groups[j].begin() + c + 1, groups[j].end())) continue;
        if (exact) {
          picked.insert(direct[j - 1]);
        } else {
          picked.insert(direct.begin(), direct.end());
        }
      }
    } else if (at >= 0 && static_cast<std::size_t>(at) + 1 == head.size()) {
      const auto& kids = props_into[p.id];
      if (!kids.empty())
        if (auto t = identifier_token(kids.front())) picked.insert(*t);
    } else if (at >= 0 && identifier_only(head.begin() + at + 1, head.end())) {
      // A call without arguments folds its callee into the same sequence.
      if (direct.size() == 1) picked.insert(direct.front());
    }
  }

  std::vector<CallSite> out;
  for (NodeId t : picked) out.push_back({t, index.label(t)});
  std::sort(out.begin(), out.end(),
            [&](const CallSite& a, const CallSite& b) { return order[a.token] < order[b.token]; });
  return out;
}

CallDepthIndex index_call_depths(const std::vector<Ipag>& corpus, const LinkOptions& options) {
  for (const auto& g : corpus)
    if (g.stage != Stage::aggregation_reduced)
      throw StageError("call linking expects aggregation-reduced IPAGs; '" + g.origin + "' is " +
                       std::string(to_string(g.stage)));
  const auto names = name_index(corpus);
  CallDepthIndex idx;

  // Resolved sites per routine, keyed by the graph that wins name lookup.
  std::map<std::string, std::vector<CallSite>> raw;
  for (const auto& [name, i] : names) {
    for (const auto& site : candidate_call_sites(corpus[i], options.policy)) {
      const bool known = names.count(site.callee) > 0;
      idx.resolution[{name, site.token}] = known ? site.callee : kUntraceable;
      if (known) raw[name].push_back(site);
    }
  }

  // Depth-first walk in corpus order; edges to routines on the stack close a
  // cycle and are dropped.
  std::map<std::string, int> state;  // 0 new, 1 on stack, 2 done
  std::set<std::pair<std::string, std::string>> dropped;
  std::function<void(const std::string&)> visit = [&](const std::string& r) {
    state[r] = 1;
    for (const auto& site : raw[r]) {
      const int s = state[site.callee];
      if (s == 1) {
        if (dropped.insert({r, site.callee}).second)
          idx.warnings.push_back("call cycle: dropped edge " + r + " -> " + site.callee);
      } else if (s == 0) {
        visit(site.callee);
      }
    }
    state[r] = 2;
  };
  for (const auto& g : corpus)
    if (state[g.origin] == 0) visit(g.origin);

  for (auto& [caller, sites] : raw) {
    for (const auto& site : sites) {
      if (dropped.count({caller, site.callee})) {
        idx.resolution[{caller, site.token}] = kUntraceable;
      } else {
        idx.sites[caller].push_back(site);
      }
    }
  }

  std::function<int(const std::string&)> depth = [&](const std::string& r) -> int {
    if (auto it = idx.depth.find(r); it != idx.depth.end()) return it->second;
    int d = 0;
    if (auto it = idx.sites.find(r); it != idx.sites.end())
      for (const auto& site : it->second) d = std::max(d, 1 + depth(site.callee));
    idx.depth[r] = d;
    return d;
  };
  std::set<std::string> seen;
  for (const auto& g : corpus) {
    if (!seen.insert(g.origin).second) continue;
    const int d = depth(g.origin);
    if (idx.partitions.size() <= static_cast<std::size_t>(d)) idx.partitions.resize(d + 1);
    idx.partitions[d].push_back(g.origin);
  }
  return idx;
}

namespace {

// Copy of `g` with every node id shifted to a fresh range starting at `base`.
Ipag renumbered(const Ipag& g, NodeId& next) {
  std::unordered_map<NodeId, NodeId> map;
  Ipag out = g;
  for (auto* list : {&out.tokens, &out.properties, &out.declarations})
    for (auto& n : *list) {
      map[n.id] = next;
      n.id = next++;
    }
  for (auto& list : out.edges)
    for (auto& e : list) {
      e.source = map.at(e.source);
      e.target = map.at(e.target);
    }
  return out;
}

void append(Ipag& into, const Ipag& part) {
  into.tokens.insert(into.tokens.end(), part.tokens.begin(), part.tokens.end());
  into.properties.insert(into.properties.end(), part.properties.begin(), part.properties.end());
  into.declarations.insert(into.declarations.end(), part.declarations.begin(),
                           part.declarations.end());
  for (std::size_t k = 0; k < kEdgeKinds; ++k)
    into.edges[k].insert(into.edges[k].end(), part.edges[k].begin(), part.edges[k].end());
}

}  // namespace

std::vector<Ipag> link_calls(const std::vector<Ipag>& corpus, const CallDepthIndex& index,
                             const LinkOptions& options, std::vector<std::string>* warnings) {
  const auto names = name_index(corpus);
  std::map<std::pair<std::string, int>, Ipag> memo;

  std::function<const Ipag&(const std::string&, int)> complete =
      [&](const std::string& name, int budget) -> const Ipag& {
    auto key = std::make_pair(name, budget);
    if (auto it = memo.find(key); it != memo.end()) return it->second;
    auto gi = names.find(name);
    if (gi == names.end()) throw LinkError("index names unknown routine '" + name + "'");
    Ipag out = corpus[gi->second];
    out.stage = Stage::complete;
    if (budget > 0) {
      if (auto it = index.sites.find(name); it != index.sites.end()) {
        NodeId next = out.max_id() + 1;
        for (const auto& site : it->second) {
          if (!names.count(site.callee))
            throw LinkError("call site in '" + name + "' resolves to unknown routine '" +
                            site.callee + "'");
          const Ipag& callee = complete(site.callee, budget - 1);
          if (out.node_count() + callee.node_count() > options.max_nodes) {
            if (warnings)
              warnings->push_back("skipped splicing " + site.callee + " into " + name +
                                  ": node cap reached");
            continue;
          }
          Ipag clone = renumbered(callee, next);
          const NodeId decl = clone.declarations.front().id;
          append(out, clone);
          out.edges_of(EdgeKind::dt).push_back({decl, site.token});
        }
      }
    }
    return memo.emplace(key, std::move(out)).first->second;
  };

  std::vector<Ipag> out;
  out.reserve(corpus.size());
  for (std::size_t i = 0; i < corpus.size(); ++i) {
    const auto& g = corpus[i];
    // A shadowed duplicate links against its own graph, not the winner's.
    if (names.at(g.origin) != i) {
      Ipag copy = g;
      copy.stage = Stage::complete;
      out.push_back(std::move(copy));
      continue;
    }
    out.push_back(complete(g.origin, options.max_call_depth));
  }
  return out;
}

double caller_sample_ratio(const CallDepthIndex& index, std::size_t corpus_size) {
  if (corpus_size == 0) return 0.0;
  std::size_t callers = 0;
  for (const auto& [name, sites] : index.sites)
    if (!sites.empty()) ++callers;
  return static_cast<double>(callers) / static_cast<double>(corpus_size);
}

}  // namespace ipag
