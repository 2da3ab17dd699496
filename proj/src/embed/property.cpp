#include <algorithm>

#include "ipag/compress.hpp"
#include "ipag/embed.hpp"

namespace ipag {

PropertyVocabulary::PropertyVocabulary(std::vector<std::string> names) : names_(std::move(names)) {
  std::sort(names_.begin(), names_.end());
  names_.erase(std::unique(names_.begin(), names_.end()), names_.end());
  for (std::size_t i = 0; i < names_.size(); ++i) index_.emplace(names_[i], static_cast<int>(i + 1));
}

PropertyVocabulary PropertyVocabulary::from_corpus(const std::vector<Ipag>& corpus) {
  std::vector<std::string> names;
  for (const auto& g : corpus)
    for (const auto& p : g.properties)
      for (auto& n : label_names(p.label)) names.push_back(std::move(n));
  return PropertyVocabulary(std::move(names));
}

std::optional<int> PropertyVocabulary::find(std::string_view name) const {
  auto it = index_.find(name);
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

std::vector<double> embed_property(std::string_view label, const PropertyVocabulary& vocab,
                                   UnknownNames unknown, std::size_t* unknown_count) {
  std::vector<double> out(kPropertyWidth, 0.0);
  std::size_t at = 0;
  int p = 0;
  for (const auto& group : split_label(label)) {
    std::vector<std::string> names;
    for (const auto& n : group) {
      if (n.find('(') == std::string::npos) {
        names.push_back(n);
      } else {
        auto inner = label_names(n);
        names.insert(names.end(), inner.begin(), inner.end());
      }
    }
    if (names.empty()) continue;
    ++p;
    int d = 0;
    for (const auto& n : names) {
      ++d;
      int index = 0;
      if (auto i = vocab.find(n)) {
        index = *i;
      } else if (unknown == UnknownNames::error) {
        throw EmbedError("property name '" + n + "' in label '" + std::string(label) +
                         "' is not in the vocabulary");
      } else if (unknown_count) {
        ++*unknown_count;
      }
      if (at + 3 > kPropertyWidth)
        throw EmbedError("label '" + std::string(label) + "' does not fit in " +
                         std::to_string(kPropertyWidth) + " values");
      out[at++] = index;
      out[at++] = p;
      out[at++] = d;
    }
  }
  return out;
}

std::array<double, kEdgeWidth> edge_one_hot(EdgeKind kind) {
  std::array<double, kEdgeWidth> v{};
  v[static_cast<std::size_t>(kind)] = 1.0;
  return v;
}

}  // namespace ipag
