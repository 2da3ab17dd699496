#include <algorithm>
#include <cmath>

#include "ipag/hagnn.hpp"

namespace ipag {

namespace {

constexpr std::array<NodeKind, 3> kKinds = {NodeKind::token, NodeKind::property, NodeKind::declaration};

std::string kind_name(NodeKind k) { return std::string(to_string(k)); }

std::string unit_name(std::size_t unit, int layer, int tier, const char* which) {
  return "unit" + std::to_string(unit) + ".layer" + std::to_string(layer) + ".tier" + std::to_string(tier) + "." +
         which;
}

}  // namespace

std::string_view to_string(MessagePasser p) { return p == MessagePasser::sage_plus ? "sage_plus" : "sage"; }

MessagePasser message_passer_from_string(std::string_view text) {
  if (text == "sage_plus" || text == "sage+") return MessagePasser::sage_plus;
  if (text == "sage") return MessagePasser::sage;
  throw ModelError("unknown message passer '" + std::string(text) + "'");
}

void HagnnConfig::validate() const {
  if (hidden < 1) throw ModelError("hidden width must be at least 1");
  if (layers < 1) throw ModelError("at least one layer is required");
  if (depth_tiers < 1) throw ModelError("at least one depth tier is required");
  if (text_width < 1) throw ModelError("text width must be positive");
  if (batch_size < 1) throw ModelError("batch size must be positive");
  if (epochs < 0) throw ModelError("epochs must not be negative");
  if (!std::isfinite(learning_rate) || learning_rate < 0) throw ModelError("learning rate must be finite and >= 0");
}

bool is_vulnerable(double score) { return score > HagnnConfig::threshold; }

void HagnnModel::add(std::string name, std::size_t rows, std::size_t cols, std::mt19937_64& rng, bool zero) {
  Matrix m(rows, cols);
  if (!zero) {
    const double limit = std::sqrt(6.0 / static_cast<double>(rows + cols));
    std::uniform_real_distribution<double> u(-limit, limit);
    for (double& v : m.data) v = u(rng);
  }
  by_name_[name] = params_.size();
  params_.push_back({std::move(name), std::move(m)});
}

HagnnModel::HagnnModel(HagnnConfig config, PropertyVocabulary vocab) : config_(config), vocab_(std::move(vocab)) {
  config_.validate();
  std::mt19937_64 rng(config_.seed);
  const std::size_t h = config_.hidden;
  for (NodeKind k : kKinds) {
    const std::size_t width = k == NodeKind::property ? kPropertyWidth : config_.text_width;
    // [features, edge one-hot] x [w; edge] split so the feature product is
    // shared by every unit the node is in.
    add("in." + kind_name(k) + ".w", width, h, rng);
    add("in." + kind_name(k) + ".edge", kEdgeWidth, h, rng);
    add("in." + kind_name(k) + ".b", 1, h, rng, true);
  }
  for (std::size_t u = 0; u < kEdgeKinds; ++u)
    for (int l = 0; l < config_.layers; ++l)
      for (int t = 1; t <= config_.depth_tiers; ++t) {
        add(unit_name(u, l, t, "wd"), h, h, rng);
        add(unit_name(u, l, t, "wc"), 2 * h, h, rng);
      }
  for (NodeKind k : kKinds) {
    add("gsa." + kind_name(k) + ".gate", h, 1, rng);
    add("gsa." + kind_name(k) + ".gate_b", 1, 1, rng, true);
    add("gsa." + kind_name(k) + ".w", h, h, rng);
    add("gsa." + kind_name(k) + ".b", 1, h, rng, true);
  }
  add("head.linear.w", 3 * h, h, rng);
  add("head.linear.b", 1, h, rng, true);
  add("head.hidden.w", h, h, rng);
  add("head.hidden.b", 1, h, rng, true);
  add("head.out.w", h, 1, rng);
  add("head.out.b", 1, 1, rng, true);
}

std::size_t HagnnModel::parameter_index(const std::string& name) const {
  auto it = by_name_.find(name);
  if (it == by_name_.end()) throw ModelError("no parameter named '" + name + "'");
  return it->second;
}

bool HagnnModel::all_finite() const {
  return std::all_of(params_.begin(), params_.end(), [](const Parameter& p) { return ipag::all_finite(p.value); });
}

/// One forward pass of the model over one graph on a tape.
class Forward {
 public:
  Forward(const HagnnModel& model, Tape& tape, Gradients* grads) : model_(model), tape_(tape), grads_(grads) {}

  Tape::Var param(const std::string& name) {
    const std::size_t i = model_.parameter_index(name);
    if (auto it = bound_.find(i); it != bound_.end()) return it->second;
    const Matrix& v = model_.params_[i].value;
    Matrix* g = nullptr;
    if (grads_) g = &grads_->try_emplace(i, Matrix(v.rows, v.cols)).first->second;
    return bound_[i] = tape_.parameter(v, g);
  }

  Tape::Var logit(const EmbeddedGraph& g, ForwardTrace* trace) {
    const auto& cfg = model_.config_;
    const std::size_t h = cfg.hidden;
    if (g.features.text_width != cfg.text_width)
      throw ModelError(g.name + ": text width " + std::to_string(g.features.text_width) + " differs from the model's " +
                       std::to_string(cfg.text_width));

    std::array<std::optional<Tape::Var>, 3> state;
    std::array<std::size_t, 3> count{};
    for (std::size_t k = 0; k < 3; ++k) {
      const Matrix& f = g.features.of(kKinds[k]);
      count[k] = f.rows;
      if (f.rows == 0) continue;
      const std::string n = "in." + kind_name(kKinds[k]);
      state[k] = tape_.add_row(tape_.matmul(tape_.parameter(f), param(n + ".w")), param(n + ".b"));
    }

    for (int layer = 0; layer < cfg.layers; ++layer) {
      std::array<std::vector<Tape::Var>, 3> parts;
      std::array<std::vector<double>, 3> hits;
      for (std::size_t k = 0; k < 3; ++k) hits[k].assign(count[k], 0.0);

      for (std::size_t u = 0; u < kEdgeKinds; ++u) {
        const Subgraph& s = g.units[u];
        if (s.edge_count() == 0) continue;
        // Input rows, one run per node kind in member order.
        std::vector<Tape::Var> pieces;
        std::vector<std::pair<std::size_t, Tape::Index>> runs;  // kind, node indices
        for (std::size_t i = 0; i < s.nodes.size();) {
          const NodeKind kind = s.nodes[i].kind;
          const std::size_t k = static_cast<std::size_t>(kind);
          Tape::Index idx;
          for (; i < s.nodes.size() && s.nodes[i].kind == kind; ++i) idx.push_back(s.nodes[i].index);
          Tape::Var piece = tape_.gather_rows(*state[k], idx);
          if (layer == 0) {
            const Tape::Var edge = tape_.gather_rows(param("in." + kind_name(kind) + ".edge"), {static_cast<std::uint32_t>(u)});
            piece = tape_.add_row(piece, edge);
          }
          pieces.push_back(piece);
          runs.emplace_back(k, std::move(idx));
        }
        const Tape::Var x = pieces.size() == 1 ? pieces[0] : tape_.concat_rows(pieces);

        UnitTopology topo{s.nodes.size(), s.source, s.target, s.depth};
        std::vector<Tape::Var> wd, wc;
        for (int t = 1; t <= cfg.depth_tiers; ++t) {
          // Only bind tiers that can be reached.
          if (t > 1 && (cfg.passer == MessagePasser::sage || t > s.max_depth)) {
            wd.push_back(wd.back());
            wc.push_back(wc.back());
            continue;
          }
          wd.push_back(param(unit_name(u, layer, t, "wd")));
          wc.push_back(param(unit_name(u, layer, t, "wc")));
        }
        const Tape::Var out = unit_forward(tape_, x, topo, wd, wc, cfg.passer);

        std::uint32_t row = 0;
        for (auto& [k, idx] : runs) {
          Tape::Index rows(idx.size());
          for (auto& r : rows) r = row++;
          for (auto i : idx) hits[k][i] += 1.0;
          parts[k].push_back(tape_.scatter_sum(tape_.gather_rows(out, std::move(rows)), std::move(idx), count[k]));
        }
      }

      // Mean over the units a node is in; nodes in none keep their state.
      for (std::size_t k = 0; k < 3; ++k) {
        if (parts[k].empty()) continue;
        Tape::Var sum = parts[k][0];
        for (std::size_t i = 1; i < parts[k].size(); ++i) sum = tape_.add(sum, parts[k][i]);
        std::vector<double> inv(count[k]), keep(count[k]);
        bool any_kept = false;
        for (std::size_t i = 0; i < count[k]; ++i) {
          inv[i] = hits[k][i] > 0 ? 1.0 / hits[k][i] : 0.0;
          keep[i] = hits[k][i] > 0 ? 0.0 : 1.0;
          any_kept |= hits[k][i] == 0;
        }
        Tape::Var next = tape_.scale_rows(sum, std::move(inv));
        if (any_kept) next = tape_.add(next, tape_.scale_rows(*state[k], std::move(keep)));
        state[k] = next;
      }
    }

    // Global soft attention per kind, in declaration, property, token order.
    std::vector<Tape::Var> pooled;
    for (NodeKind kind : {NodeKind::declaration, NodeKind::property, NodeKind::token}) {
      const std::size_t k = static_cast<std::size_t>(kind);
      if (count[k] == 0) {
        pooled.push_back(tape_.constant(Matrix(1, h)));
        continue;
      }
      const std::string n = "gsa." + kind_name(kind);
      const Tape::Var gate = tape_.add_row(tape_.matmul(*state[k], param(n + ".gate")), param(n + ".gate_b"));
      const Tape::Var w = tape_.softmax_col(gate);
      const Tape::Var t = tape_.add_row(tape_.matmul(*state[k], param(n + ".w")), param(n + ".b"));
      pooled.push_back(tape_.weighted_sum_rows(t, w));
      if (trace) {
        trace->attention[k] = tape_.value(w).data;
        trace->states[k] = tape_.value(*state[k]);
      }
    }
    const Tape::Var joined = tape_.concat_cols(tape_.concat_cols(pooled[0], pooled[1]), pooled[2]);
    const Tape::Var z1 = tape_.add_row(tape_.matmul(joined, param("head.linear.w")), param("head.linear.b"));
    const Tape::Var z2 = tape_.relu(tape_.add_row(tape_.matmul(z1, param("head.hidden.w")), param("head.hidden.b")));
    return tape_.add_row(tape_.matmul(z2, param("head.out.w")), param("head.out.b"));
  }

 private:
  const HagnnModel& model_;
  Tape& tape_;
  Gradients* grads_;
  std::map<std::size_t, Tape::Var> bound_;
};

ForwardTrace HagnnModel::trace(const EmbeddedGraph& g) const {
  Tape tape;
  Forward f(*this, tape, nullptr);
  ForwardTrace out;
  const Tape::Var z = f.logit(g, &out);
  out.logit = tape.value(z).data[0];
  out.score = sigmoid(out.logit);
  if (!std::isfinite(out.score)) throw ModelError(g.name + ": non-finite score");
  return out;
}

double HagnnModel::score(const EmbeddedGraph& g) const { return trace(g).score; }

double HagnnModel::loss_and_gradients(const EmbeddedGraph& g, Gradients& grads) const {
  if (!g.vulnerable) throw ModelError(g.name + ": training graph has no label");
  Tape tape;
  Forward f(*this, tape, &grads);
  const Tape::Var loss = tape.bce_with_logits(f.logit(g, nullptr), *g.vulnerable ? 1.0 : 0.0);
  const double value = tape.value(loss).data[0];
  if (std::isfinite(value)) tape.backward(loss);
  return value;
}

}  // namespace ipag
