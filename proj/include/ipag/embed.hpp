#pragma once

#include <array>
#include <chrono>
#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "ipag/ipag.hpp"
#include "ipag/tensor.hpp"

namespace ipag {

inline constexpr std::size_t kPropertyWidth = 360;
inline constexpr std::size_t kEdgeWidth = 6;
inline constexpr std::size_t kDefaultTextWidth = 768;

class EmbedError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Dense 1-based ordinal index over property names. Index 0 is reserved for
/// names the vocabulary has not seen.
class PropertyVocabulary {
 public:
  PropertyVocabulary() = default;
  /// Names are sorted and deduplicated.
  explicit PropertyVocabulary(std::vector<std::string> names);
  static PropertyVocabulary from_corpus(const std::vector<Ipag>& corpus);

  std::optional<int> find(std::string_view name) const;
  std::size_t size() const { return names_.size(); }
  /// names()[I - 1] has index I.
  const std::vector<std::string>& names() const { return names_; }
  bool operator==(const PropertyVocabulary& o) const { return names_ == o.names_; }

 private:
  std::vector<std::string> names_;
  std::map<std::string, int, std::less<>> index_;
};

enum class UnknownNames { error, reserved_index };

/// (I, P, D) triples of every name in the label, zero padded to 360. P counts
/// the non-empty groups of the label from 1 (the parent part first), D is the
/// position inside the group. Nested aggregates are flattened into their group.
std::vector<double> embed_property(std::string_view label, const PropertyVocabulary& vocab,
                                   UnknownNames unknown = UnknownNames::error,
                                   std::size_t* unknown_count = nullptr);

std::array<double, kEdgeWidth> edge_one_hot(EdgeKind kind);

enum class EmbedMode { hash, service };
std::string_view to_string(EmbedMode mode);
EmbedMode embed_mode_from_string(std::string_view text);

class TextEmbedder {
 public:
  virtual ~TextEmbedder() = default;
  virtual std::size_t width() const = 0;
  virtual EmbedMode mode() const = 0;
  /// One vector per text, in order.
  virtual std::vector<std::vector<double>> embed(const std::vector<std::string>& texts) = 0;
  std::vector<double> embed_one(const std::string& text) { return embed({text}).at(0); }
  /// True once any vector came from a fallback rather than this mode.
  virtual bool degraded() const { return false; }
};

std::uint64_t fnv1a64(std::string_view text);

/// Unit-norm pseudorandom vector seeded from the label's digest.
class HashEmbedder : public TextEmbedder {
 public:
  explicit HashEmbedder(std::size_t width, std::uint64_t seed = 0);
  std::size_t width() const override { return width_; }
  EmbedMode mode() const override { return EmbedMode::hash; }
  std::vector<std::vector<double>> embed(const std::vector<std::string>& texts) override;
  std::vector<double> vector_for(std::string_view text) const;

 private:
  std::size_t width_;
  std::uint64_t seed_;
};

struct ServiceOptions {
  /// http://host:port
  std::string endpoint;
  std::size_t width = kDefaultTextWidth;
  int retries = 3;
  std::chrono::milliseconds backoff{200};
  std::chrono::seconds timeout{30};
  std::size_t batch = 256;
  /// Fail instead of falling back to hash vectors.
  bool strict = false;
  std::uint64_t fallback_seed = 0;
};

/// Client for the embedding service. Safe to call from several threads.
class ServiceEmbedder : public TextEmbedder {
 public:
  explicit ServiceEmbedder(ServiceOptions options);
  std::size_t width() const override { return options_.width; }
  EmbedMode mode() const override { return EmbedMode::service; }
  std::vector<std::vector<double>> embed(const std::vector<std::string>& texts) override;

  bool healthy() const;
  /// model_id of the last successful reply.
  std::string model_id() const;
  bool fell_back() const;
  bool degraded() const override { return fell_back(); }
  std::vector<std::string> warnings() const;

 private:
  std::optional<std::vector<std::vector<double>>> request(const std::vector<std::string>& texts,
                                                          std::string& error);

  ServiceOptions options_;
  HashEmbedder fallback_;
  mutable std::mutex mutex_;
  std::string model_id_;
  bool fell_back_ = false;
  std::vector<std::string> warnings_;
};

/// Label vectors keyed by (mode, width, label digest), optionally backed by a
/// JSON file.
class EmbeddingCache {
 public:
  EmbeddingCache() = default;
  /// Adds the entries of a cache file; a missing file adds nothing.
  void load(const std::filesystem::path& path);
  void save(const std::filesystem::path& path) const;

  std::optional<std::vector<double>> get(EmbedMode mode, std::size_t width, std::string_view label) const;
  void put(EmbedMode mode, std::size_t width, std::string_view label, std::vector<double> v);
  std::size_t size() const;

 private:
  static std::string key(EmbedMode mode, std::size_t width, std::string_view label);
  mutable std::mutex mutex_;
  std::map<std::string, std::vector<double>> entries_;
};

/// Serves from the cache and forwards misses to `inner` in one batch.
class CachingEmbedder : public TextEmbedder {
 public:
  CachingEmbedder(TextEmbedder& inner, EmbeddingCache& cache) : inner_(inner), cache_(cache) {}
  std::size_t width() const override { return inner_.width(); }
  EmbedMode mode() const override { return inner_.mode(); }
  std::vector<std::vector<double>> embed(const std::vector<std::string>& texts) override;
  bool degraded() const override { return inner_.degraded(); }

 private:
  TextEmbedder& inner_;
  EmbeddingCache& cache_;
};

struct NodeFeatures {
  std::size_t text_width = 0;
  Matrix tokens;        // |N_t| x d_t
  Matrix properties;    // |N_p| x 360
  Matrix declarations;  // |N_d| x d_t

  const Matrix& of(NodeKind kind) const;
};

NodeFeatures compute_features(const Ipag& g, const PropertyVocabulary& vocab, TextEmbedder& text,
                              UnknownNames unknown = UnknownNames::error,
                              std::vector<std::string>* warnings = nullptr);

/// tp, pp, pd and td edges point towards the declaration.
bool is_upward(EdgeKind kind);

/// Depth of every edge, indexed like g.edges. Upward edges get 1 plus the
/// longest upward path from their target to a declaration; e_tt and e_dt
/// edges get the largest upward depth in the graph.
std::array<std::vector<int>, kEdgeKinds> edge_depths(const Ipag& g);

struct NodeRef {
  NodeKind kind;
  std::uint32_t index;  // position in the graph's node list of that kind
  auto operator<=>(const NodeRef&) const = default;
};

/// One typed subgraph. Nodes are sorted by (kind, index); edges refer to
/// positions in `nodes`.
struct Subgraph {
  EdgeKind kind = EdgeKind::pd;
  std::vector<NodeRef> nodes;
  std::vector<std::uint32_t> source;
  std::vector<std::uint32_t> target;
  std::vector<int> depth;
  int max_depth = 0;

  std::size_t edge_count() const { return source.size(); }
  std::array<double, kEdgeWidth> one_hot() const { return edge_one_hot(kind); }
};

struct EmbeddedGraph {
  std::string name;
  std::optional<bool> vulnerable;
  NodeFeatures features;
  std::array<Subgraph, kEdgeKinds> units;

  std::size_t node_count(NodeKind kind) const { return features.of(kind).rows; }
};

/// Requires a complete IPAG.
EmbeddedGraph slice_subgraphs(const Ipag& g, NodeFeatures features);

}  // namespace ipag
