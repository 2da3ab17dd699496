#pragma once

#include <array>
#include <filesystem>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "ipag/ipag.hpp"

namespace ipag {

// ---------------------------------------------------------------------------
// Merged labels
//
// A sequence-merged node is labelled with its member names from the exit end
// to the entry end, joined by ", " ("IdExpression, Name"). An aggregation-
// merged node is labelled `parent(child‖child‖...)`, where the parent and each
// child may themselves be sequence labels.
// ---------------------------------------------------------------------------

inline constexpr std::string_view kSequenceSeparator = ", ";
inline constexpr std::string_view kSiblingSeparator = "‖";  // ‖

/// Names of a merged label grouped by position: group 0 is the parent (or the
/// whole label when it is not an aggregation), group i > 0 is child i.
using LabelGroups = std::vector<std::vector<std::string>>;

LabelGroups split_label(std::string_view label);
/// Every component name, flattened in label order.
std::vector<std::string> label_names(std::string_view label);
std::size_t label_name_count(std::string_view label);
/// Name of the node that receives the label's entry edges: the entry-nearest
/// member of the parent group.
std::string entry_name(std::string_view label);
/// Exit-nearest member of the parent group.
std::string head_name(std::string_view label);
/// True when any component name equals `name`.
bool label_contains_name(std::string_view label, std::string_view name);

/// Merged nodes may hold at most this many names (3 embedding slots each
/// inside a 360-wide property vector).
inline constexpr std::size_t kMaxNamesPerNode = 120;

// ---------------------------------------------------------------------------
// Ruleset
// ---------------------------------------------------------------------------

class UnknownPropertyName : public std::runtime_error {
 public:
  explicit UnknownPropertyName(const std::string& name);
  const std::string& name() const { return name_; }

 private:
  std::string name_;
};

struct RuleEntry {
  std::string category;
  bool compressible = false;
};

/// Which property names may head a compressible aggregation, per language.
class CompressRuleset {
 public:
  CompressRuleset() = default;
  using NameMap = std::map<std::string, RuleEntry, std::less<>>;

  CompressRuleset(Language language, NameMap names, bool strict);

  /// Parses the shipped rules file format for one language.
  static CompressRuleset from_json(const std::string& text, Language language);
  static CompressRuleset load(const std::filesystem::path& path, Language language);
  /// The rules file compiled into the library.
  static CompressRuleset builtin(Language language);
  static const std::string& builtin_text();

  Language language() const { return language_; }
  bool strict() const { return strict_; }
  const NameMap& names() const { return names_; }

  bool knows(std::string_view name) const;
  /// Throws UnknownPropertyName for unlisted names when strict; otherwise
  /// unlisted names are incompressible.
  bool is_compressible(std::string_view name) const;
  std::optional<std::string> category(std::string_view name) const;

 private:
  Language language_ = Language::c;
  NameMap names_;
  bool strict_ = true;
};

/// Per-language rulesets, selected by each graph's language.
struct RulesetBundle {
  CompressRuleset c;
  CompressRuleset java;
  static RulesetBundle builtin();
  static RulesetBundle load(const std::filesystem::path& path);
  const CompressRuleset& for_language(Language lang) const;
};

// ---------------------------------------------------------------------------
// Structures
// ---------------------------------------------------------------------------

struct PropertySequence {
  /// n_1 .. n_k, entry end first.
  std::vector<NodeId> nodes;
  /// Nodes feeding n_1 (tokens and/or properties).
  std::vector<NodeId> entry;
  /// The node n_k feeds: a declaration or a property with >= 2 entries.
  NodeId exit = 0;
};

struct AggregationStructure {
  NodeId parent = 0;
  std::vector<NodeId> children;
  /// Entry sources of each child, parallel to `children`.
  std::vector<std::vector<NodeId>> feeders;
  NodeId exit = 0;
  bool structural_ok = false;
  bool semantic_ok = false;
  bool compressible = false;
};

class StageError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// All maximal property-node sequences, in property-list order of n_1.
std::vector<PropertySequence> find_sequences(const Ipag& g);
/// Collapses every sequence into one node. Accepts preliminary or
/// sequence-reduced graphs.
Ipag merge_sequences(const Ipag& g);

/// Every aggregation structure, tagged compressible or not.
std::vector<AggregationStructure> find_aggregations(const Ipag& g, const CompressRuleset& rules);
/// Collapses every compressible aggregation into one node. Accepts
/// sequence-reduced or aggregation-reduced graphs.
Ipag merge_aggregations(const Ipag& g, const CompressRuleset& rules);

/// merge_sequences followed by merge_aggregations.
Ipag compress(const Ipag& preliminary, const CompressRuleset& rules);

// ---------------------------------------------------------------------------
// Reporting
// ---------------------------------------------------------------------------

struct CompressionReport {
  std::size_t routines = 0;
  std::size_t nodes_before = 0;
  std::size_t nodes_after = 0;
  std::size_t edges_before = 0;
  std::size_t edges_after = 0;
  double node_ratio = 0.0;
  double edge_ratio = 0.0;
  /// Per-routine node reduction ratios bucketed into ten bins over [0, 1].
  std::array<std::size_t, 10> node_ratio_histogram{};
  std::array<std::size_t, 10> edge_ratio_histogram{};
};

CompressionReport compression_report(const std::vector<Ipag>& before,
                                      const std::vector<Ipag>& after);
std::string format_report(const CompressionReport& report);

}  // namespace ipag
