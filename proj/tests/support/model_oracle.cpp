#include "model_oracle.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <set>

namespace ipag::test {

namespace {

// Row vector times matrix.
Vec vm(const Vec& v, const Matrix& w) {
  Vec out(w.cols, 0.0);
  for (std::size_t p = 0; p < w.rows; ++p)
    for (std::size_t q = 0; q < w.cols; ++q) out[q] += v[p] * w(p, q);
  return out;
}

Vec relu(Vec v) {
  for (double& x : v) x = std::max(0.0, x);
  return v;
}

Vec cat(const Vec& a, const Vec& b) {
  Vec out = a;
  out.insert(out.end(), b.begin(), b.end());
  return out;
}

Vec plus(Vec a, const Vec& b) {
  for (std::size_t i = 0; i < a.size(); ++i) a[i] += b[i];
  return a;
}

Vec row_of(const Matrix& m, std::size_t r) { return Vec(m.row(r), m.row(r) + m.cols); }

}  // namespace

Rows to_rows(const Matrix& m) {
  Rows out;
  for (std::size_t r = 0; r < m.rows; ++r) out.push_back(row_of(m, r));
  return out;
}

Rows dense_unit(const Rows& x, const UnitTopology& topo, const std::vector<Matrix>& wd,
                const std::vector<Matrix>& wc, MessagePasser passer) {
  const std::size_t n = x.size();
  const std::size_t h = n ? x[0].size() : 0;
  const int tiers = static_cast<int>(wd.size());
  auto depth_of = [&](std::size_t e) { return passer == MessagePasser::sage ? 1 : topo.depth[e]; };
  int deepest = 0;
  for (std::size_t e = 0; e < topo.source.size(); ++e) deepest = std::max(deepest, depth_of(e));

  Rows cur = x;
  std::vector<bool> touched(n, false);
  for (int d = deepest; d >= 1; --d) {
    const int tier = std::min(d, tiers) - 1;
    Rows next = cur;
    for (std::size_t j = 0; j < n; ++j) {
      Vec sum(h, 0.0);
      int k = 0;
      for (std::size_t e = 0; e < topo.source.size(); ++e) {
        if (depth_of(e) != d || topo.target[e] != j) continue;
        const Vec& from = d == deepest ? x[topo.source[e]] : cur[topo.source[e]];
        sum = plus(sum, vm(from, wd[tier]));
        ++k;
      }
      if (k == 0) continue;
      for (double& v : sum) v /= k;
      next[j] = relu(vm(cat(x[j], sum), wc[tier]));
      touched[j] = true;
    }
    cur = next;
  }
  for (std::size_t j = 0; j < n; ++j)
    if (!touched[j]) cur[j] = relu(vm(cat(x[j], Vec(h, 0.0)), wc[0]));
  return cur;
}

double dense_score(const HagnnModel& model, const EmbeddedGraph& g) {
  const auto& cfg = model.config();
  auto& m = const_cast<HagnnModel&>(model);
  const std::size_t h = cfg.hidden;
  const NodeKind kinds[3] = {NodeKind::token, NodeKind::property, NodeKind::declaration};
  auto name = [](NodeKind k) { return std::string(to_string(k)); };

  std::array<Rows, 3> state;
  for (int k = 0; k < 3; ++k) {
    const Matrix& f = g.features.of(kinds[k]);
    for (std::size_t i = 0; i < f.rows; ++i)
      state[k].push_back(plus(vm(row_of(f, i), m.parameter("in." + name(kinds[k]) + ".w")),
                              row_of(m.parameter("in." + name(kinds[k]) + ".b"), 0)));
  }

  for (int layer = 0; layer < cfg.layers; ++layer) {
    std::array<Rows, 3> sum;
    std::array<std::vector<int>, 3> hits;
    for (int k = 0; k < 3; ++k) {
      sum[k].assign(state[k].size(), Vec(h, 0.0));
      hits[k].assign(state[k].size(), 0);
    }
    for (std::size_t u = 0; u < kEdgeKinds; ++u) {
      const Subgraph& s = g.units[u];
      if (s.edge_count() == 0) continue;
      Rows x;
      for (const NodeRef& r : s.nodes) {
        const int k = static_cast<int>(r.kind);
        Vec v = state[k][r.index];
        if (layer == 0) v = plus(v, row_of(m.parameter("in." + name(r.kind) + ".edge"), u));
        x.push_back(v);
      }
      std::vector<Matrix> wd, wc;
      for (int t = 1; t <= cfg.depth_tiers; ++t) {
        const std::string base = "unit" + std::to_string(u) + ".layer" + std::to_string(layer) + ".tier" + std::to_string(t);
        wd.push_back(m.parameter(base + ".wd"));
        wc.push_back(m.parameter(base + ".wc"));
      }
      const Rows out = dense_unit(x, {s.nodes.size(), s.source, s.target, s.depth}, wd, wc, cfg.passer);
      for (std::size_t i = 0; i < s.nodes.size(); ++i) {
        const int k = static_cast<int>(s.nodes[i].kind);
        sum[k][s.nodes[i].index] = plus(sum[k][s.nodes[i].index], out[i]);
        ++hits[k][s.nodes[i].index];
      }
    }
    for (int k = 0; k < 3; ++k)
      for (std::size_t i = 0; i < state[k].size(); ++i)
        if (hits[k][i]) {
          for (double& v : sum[k][i]) v /= hits[k][i];
          state[k][i] = sum[k][i];
        }
  }

  Vec joined;
  for (NodeKind kind : {NodeKind::declaration, NodeKind::property, NodeKind::token}) {
    const auto& rows = state[static_cast<int>(kind)];
    Vec pooled(h, 0.0);
    if (!rows.empty()) {
      const std::string n = "gsa." + name(kind);
      Vec gate;
      for (const auto& r : rows) gate.push_back(vm(r, m.parameter(n + ".gate"))[0] + m.parameter(n + ".gate_b")(0, 0));
      const double top = *std::max_element(gate.begin(), gate.end());
      double z = 0.0;
      for (double& v : gate) z += v = std::exp(v - top);
      for (std::size_t i = 0; i < rows.size(); ++i) {
        const Vec t = plus(vm(rows[i], m.parameter(n + ".w")), row_of(m.parameter(n + ".b"), 0));
        for (std::size_t q = 0; q < h; ++q) pooled[q] += gate[i] / z * t[q];
      }
    }
    joined.insert(joined.end(), pooled.begin(), pooled.end());
  }
  const Vec z1 = plus(vm(joined, m.parameter("head.linear.w")), row_of(m.parameter("head.linear.b"), 0));
  const Vec z2 = relu(plus(vm(z1, m.parameter("head.hidden.w")), row_of(m.parameter("head.hidden.b"), 0)));
  const double logit = vm(z2, m.parameter("head.out.w"))[0] + m.parameter("head.out.b")(0, 0);
  return 1.0 / (1.0 + std::exp(-logit));
}

std::array<std::vector<int>, kEdgeKinds> relaxed_depths(const Ipag& g) {
  std::vector<Edge> up;
  for (EdgeKind k : {EdgeKind::tp, EdgeKind::pp, EdgeKind::pd, EdgeKind::td})
    up.insert(up.end(), g.edges_of(k).begin(), g.edges_of(k).end());
  std::map<NodeId, int> longest;
  for (std::size_t round = 0; round <= g.node_count(); ++round) {
    bool changed = false;
    for (const Edge& e : up) {
      const int cand = longest[e.target] + 1;
      if (cand > longest[e.source]) {
        longest[e.source] = cand;
        changed = true;
      }
    }
    if (!changed) break;
  }
  std::array<std::vector<int>, kEdgeKinds> out;
  int deepest = 1;
  for (EdgeKind k : {EdgeKind::tp, EdgeKind::pp, EdgeKind::pd, EdgeKind::td})
    for (const Edge& e : g.edges_of(k)) {
      out[static_cast<std::size_t>(k)].push_back(longest[e.target] + 1);
      deepest = std::max(deepest, longest[e.target] + 1);
    }
  for (EdgeKind k : {EdgeKind::tt, EdgeKind::dt}) out[static_cast<std::size_t>(k)].assign(g.edges_of(k).size(), deepest);
  return out;
}

Matrix random_matrix(std::mt19937_64& rng, std::size_t rows, std::size_t cols, double scale) {
  std::uniform_real_distribution<double> u(-scale, scale);
  Matrix m(rows, cols);
  for (double& v : m.data) v = u(rng);
  return m;
}

UnitTopology random_topology(std::mt19937_64& rng, std::size_t max_nodes, int max_depth) {
  UnitTopology t;
  t.nodes = std::uniform_int_distribution<std::size_t>(1, max_nodes)(rng);
  const std::size_t edges = std::uniform_int_distribution<std::size_t>(0, t.nodes * 2)(rng);
  std::uniform_int_distribution<std::uint32_t> node(0, static_cast<std::uint32_t>(t.nodes - 1));
  std::uniform_int_distribution<int> depth(1, max_depth);
  std::set<std::pair<std::uint32_t, std::uint32_t>> seen;
  for (std::size_t e = 0; e < edges; ++e) {
    const auto s = node(rng), d = node(rng);
    if (!seen.insert({s, d}).second) continue;
    t.source.push_back(s);
    t.target.push_back(d);
    t.depth.push_back(depth(rng));
  }
  return t;
}

}  // namespace ipag::test
