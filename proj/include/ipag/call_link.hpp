#pragma once

#include <cstddef>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "ipag/ipag.hpp"

namespace ipag {

/// Which tokens of a call expression count as call sites.
enum class CallSitePolicy {
  /// Only the token naming the called routine.
  callee_position,
  /// Every token under the call expression that names a corpus routine,
  /// including routine names passed as arguments.
  every_resolved_token,
};

struct LinkOptions {
  /// Splicing stops below this many nested callee levels.
  int max_call_depth = 8;
  CallSitePolicy policy = CallSitePolicy::callee_position;
  /// A splice that would push a complete IPAG past this many nodes is
  /// skipped with a warning.
  std::size_t max_nodes = 200000;
};

struct CallSite {
  NodeId token = 0;
  std::string callee;
  bool operator==(const CallSite&) const = default;
};

inline constexpr const char* kUntraceable = "untraceable";

struct CallDepthIndex {
  /// partitions[i] holds the routines with D(g) = i, in corpus order.
  std::vector<std::vector<std::string>> partitions;
  std::map<std::string, int> depth;
  /// (caller, candidate token id) -> callee name or kUntraceable.
  std::map<std::pair<std::string, NodeId>, std::string> resolution;
  /// Resolved sites per caller, in token order, after cycle breaking.
  std::map<std::string, std::vector<CallSite>> sites;
  std::vector<std::string> warnings;

  int depth_of(const std::string& routine) const;
};

/// Candidate call-site tokens of one graph with their labels, in token order.
std::vector<CallSite> candidate_call_sites(const Ipag& g, CallSitePolicy policy);

/// Call depth partition of a corpus of aggregation-reduced IPAGs. Cycles are
/// broken by dropping back edges found by a depth-first walk in corpus order.
CallDepthIndex index_call_depths(const std::vector<Ipag>& corpus, const LinkOptions& options = {});

/// Complete IPAGs, one per input graph in the same order.
std::vector<Ipag> link_calls(const std::vector<Ipag>& corpus, const CallDepthIndex& index,
                             const LinkOptions& options = {},
                             std::vector<std::string>* warnings = nullptr);

/// Fraction of routines with at least one resolved call site.
double caller_sample_ratio(const CallDepthIndex& index, std::size_t corpus_size);

class LinkError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace ipag
