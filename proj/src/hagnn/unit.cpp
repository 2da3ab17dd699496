#include <algorithm>

#include "ipag/hagnn.hpp"

namespace ipag {

Tape::Var unit_forward(Tape& tape, Tape::Var x, const UnitTopology& topo, const std::vector<Tape::Var>& wd,
                       const std::vector<Tape::Var>& wc, MessagePasser passer) {
  // Copies: tape values move when the tape grows.
  const std::size_t rows = tape.value(x).rows, cols = tape.value(x).cols;
  if (rows != topo.nodes) throw ShapeError("unit input has " + std::to_string(rows) + " rows for " +
                                             std::to_string(topo.nodes) + " nodes");
  if (wd.empty() || wd.size() != wc.size()) throw ShapeError("unit needs matching tier weights");
  const std::size_t m = topo.source.size();
  if (topo.target.size() != m || topo.depth.size() != m) throw ShapeError("unit edge lists differ in length");
  const int tiers = static_cast<int>(wd.size());

  // Depth groups, deepest first. SAGE sees every edge as one tier.
  std::vector<int> depth(m, 1);
  if (passer == MessagePasser::sage_plus) depth = topo.depth;
  int deepest = 0;
  for (int d : depth) {
    if (d < 1) throw ShapeError("edge depth below 1");
    deepest = std::max(deepest, d);
  }

  const Tape::Var prev = x;
  Tape::Var cur = x;
  std::vector<char> updated(topo.nodes, 0);
  for (int d = deepest; d >= 1; --d) {
    Tape::Index src, dst_slot, dst;
    std::vector<std::uint32_t> slot(topo.nodes, UINT32_MAX);
    for (std::size_t e = 0; e < m; ++e) {
      if (depth[e] != d) continue;
      const std::uint32_t t = topo.target[e];
      if (slot[t] == UINT32_MAX) {
        slot[t] = static_cast<std::uint32_t>(dst.size());
        dst.push_back(t);
      }
      src.push_back(topo.source[e]);
      dst_slot.push_back(slot[t]);
    }
    if (src.empty()) continue;
    const std::size_t tier = static_cast<std::size_t>(std::min(d, tiers) - 1);
    std::vector<double> inv(dst.size(), 0.0);
    for (auto s : dst_slot) inv[s] += 1.0;
    for (double& v : inv) v = 1.0 / v;
    const Tape::Var from = d == deepest ? prev : cur;
    const Tape::Var msgs = tape.matmul(tape.gather_rows(from, std::move(src)), wd[tier]);
    const Tape::Var mean = tape.scale_rows(tape.scatter_sum(msgs, std::move(dst_slot), dst.size()), std::move(inv));
    const Tape::Var upd = tape.relu(tape.matmul(tape.concat_cols(tape.gather_rows(prev, dst), mean), wc[tier]));
    for (auto t : dst) updated[t] = 1;
    cur = tape.replace_rows(cur, std::move(dst), upd);
  }

  // Nodes without incoming edges take the update with a zero message.
  Tape::Index rest;
  for (std::uint32_t i = 0; i < topo.nodes; ++i)
    if (!updated[i]) rest.push_back(i);
  if (!rest.empty()) {
    const Tape::Var zero = tape.constant(Matrix(rest.size(), cols));
    const Tape::Var upd = tape.relu(tape.matmul(tape.concat_cols(tape.gather_rows(prev, rest), zero), wc[0]));
    cur = tape.replace_rows(cur, std::move(rest), upd);
  }
  return cur;
}

Matrix unit_forward(const Matrix& x, const UnitTopology& topo, const std::vector<Matrix>& wd,
                    const std::vector<Matrix>& wc, MessagePasser passer) {
  Tape tape;
  std::vector<Tape::Var> vd, vc;
  for (const auto& w : wd) vd.push_back(tape.parameter(w));
  for (const auto& w : wc) vc.push_back(tape.parameter(w));
  return tape.value(unit_forward(tape, tape.parameter(x), topo, vd, vc, passer));
}

}  // namespace ipag
