#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <filesystem>
#include <map>
#include <optional>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

#include "ipag/autodiff.hpp"
#include "ipag/embed.hpp"
#include "ipag/tensor.hpp"

namespace ipag {

enum class MessagePasser { sage_plus, sage };
std::string_view to_string(MessagePasser p);
MessagePasser message_passer_from_string(std::string_view text);

struct HagnnConfig {
  std::size_t hidden = 256;
  int layers = 2;
  MessagePasser passer = MessagePasser::sage_plus;
  double learning_rate = 0.01;
  int epochs = 50;
  std::size_t batch_size = 16;
  std::uint64_t seed = 1;
  /// Edges deeper than this share the deepest tier's weights.
  int depth_tiers = 8;
  std::size_t text_width = kDefaultTextWidth;
  unsigned jobs = 1;
  static constexpr double threshold = 0.5;

  void validate() const;
};

class ModelError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Edges of one unit grouped for message passing. Positions index the rows
/// of the unit's state matrix.
struct UnitTopology {
  std::size_t nodes = 0;
  std::vector<std::uint32_t> source;
  std::vector<std::uint32_t> target;
  std::vector<int> depth;
};

/// One SAGE+ (or SAGE) unit on the tape. `wd[t]`, `wc[t]` are the tier t+1
/// weights (H x H and 2H x H).
Tape::Var unit_forward(Tape& tape, Tape::Var x, const UnitTopology& topo, const std::vector<Tape::Var>& wd,
                       const std::vector<Tape::Var>& wc, MessagePasser passer);

/// Plain-matrix wrapper around unit_forward.
Matrix unit_forward(const Matrix& x, const UnitTopology& topo, const std::vector<Matrix>& wd,
                    const std::vector<Matrix>& wc, MessagePasser passer);

struct Parameter {
  std::string name;
  Matrix value;
};

/// Gradient per parameter index; parameters a graph never touches are absent.
using Gradients = std::map<std::size_t, Matrix>;

struct ForwardTrace {
  double score = 0.0;
  double logit = 0.0;
  /// GSA weights per node kind (token, property, declaration).
  std::array<std::vector<double>, 3> attention;
  /// Node states after the last layer per kind.
  std::array<Matrix, 3> states;
};

class HagnnModel {
 public:
  HagnnModel() = default;
  HagnnModel(HagnnConfig config, PropertyVocabulary vocab);

  const HagnnConfig& config() const { return config_; }
  const PropertyVocabulary& vocabulary() const { return vocab_; }
  std::vector<Parameter>& parameters() { return params_; }
  const std::vector<Parameter>& parameters() const { return params_; }
  std::size_t parameter_index(const std::string& name) const;
  Matrix& parameter(const std::string& name) { return params_.at(parameter_index(name)).value; }

  double score(const EmbeddedGraph& g) const;
  ForwardTrace trace(const EmbeddedGraph& g) const;
  /// Loss of one labelled graph; adds d loss / d parameter into `grads`.
  double loss_and_gradients(const EmbeddedGraph& g, Gradients& grads) const;

  bool all_finite() const;

 private:
  friend class Forward;
  void add(std::string name, std::size_t rows, std::size_t cols, std::mt19937_64& rng, bool zero = false);

  HagnnConfig config_;
  PropertyVocabulary vocab_;
  std::vector<Parameter> params_;
  std::map<std::string, std::size_t> by_name_;
};

/// Label vulnerable iff score > 0.5.
bool is_vulnerable(double score);

struct EpochStats {
  int epoch = 0;
  double loss = 0.0;
  double accuracy = 0.0;
};

struct TrainResult {
  HagnnModel model;
  std::vector<EpochStats> history;
  bool diverged = false;
  std::string message;
};

/// Called after every epoch; returning false stops training early.
using EpochCallback = std::function<bool(const EpochStats&)>;

/// Mini-batch SGD on binary cross-entropy. On a non-finite loss the model is
/// rolled back to the weights at the start of that epoch and training stops.
TrainResult train(const std::vector<EmbeddedGraph>& corpus, const HagnnConfig& config,
                  const PropertyVocabulary& vocab, const EpochCallback& on_epoch = {});
/// Same, continuing from `start`.
TrainResult train_from(HagnnModel start, const std::vector<EmbeddedGraph>& corpus,
                       const EpochCallback& on_epoch = {});

struct Confusion {
  std::size_t tp = 0, tn = 0, fp = 0, fn = 0;
};

struct Metrics {
  Confusion counts;
  std::optional<double> accuracy, precision, recall, f1, fpr, fnr;
};

Metrics metrics_from(const Confusion& c);
/// Geometric mean of the defined values; absent when none is defined.
std::optional<double> geometric_mean(const std::vector<std::optional<double>>& values);

struct EvalReport {
  std::vector<Metrics> folds;
  Metrics mean;  // counts summed, ratios geometric means over folds
};

/// Stratified k-fold split: fold index per graph.
std::vector<int> stratified_folds(const std::vector<EmbeddedGraph>& corpus, int folds, std::uint64_t seed);

/// Trains a fresh model per fold and scores its held-out part.
EvalReport evaluate(const std::vector<EmbeddedGraph>& corpus, const HagnnConfig& config,
                    const PropertyVocabulary& vocab, int folds = 5);

struct Prediction {
  std::string routine;
  double score = 0.0;
  bool vulnerable = false;
};

std::vector<Prediction> predict(const HagnnModel& model, const std::vector<EmbeddedGraph>& corpus);

inline constexpr std::uint32_t kCheckpointVersion = 1;
void save_checkpoint(const HagnnModel& model, const std::filesystem::path& path);
HagnnModel load_checkpoint(const std::filesystem::path& path);

}  // namespace ipag
