#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "ipag/ast.hpp"
#include "ipag/call_link.hpp"
#include "ipag/compress.hpp"
#include "ipag/embed.hpp"

namespace ipag {

/// Preliminary IPAG, both merges and call linking for a parsed corpus.
std::vector<Ipag> build_complete(const std::vector<Ast>& asts, const RulesetBundle& rules,
                                 const LinkOptions& link = {}, std::vector<std::string>* warnings = nullptr,
                                 unsigned jobs = 1);

/// Features and subgraphs for every complete IPAG, in input order.
std::vector<EmbeddedGraph> embed_corpus(const std::vector<Ipag>& corpus, const PropertyVocabulary& vocab,
                                        TextEmbedder& text, UnknownNames unknown = UnknownNames::error,
                                        std::vector<std::string>* warnings = nullptr, unsigned jobs = 1);

class LabelError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Lines of `routine<TAB>0|1`; blank lines and lines starting with '#' are
/// skipped. Repeating a routine with the same label is allowed.
std::map<std::string, bool> parse_labels(const std::string& text);
std::map<std::string, bool> load_labels(const std::filesystem::path& path);

/// Sets each graph's label from `labels`; returns the routines left unlabelled.
std::vector<std::string> apply_labels(std::vector<EmbeddedGraph>& graphs, const std::map<std::string, bool>& labels);

}  // namespace ipag
