#include "ipag/compress.hpp"

namespace ipag {

namespace {

// Splits `text` on `sep` where the paren depth is zero.
std::vector<std::string_view> split_top(std::string_view text, std::string_view sep) {
  std::vector<std::string_view> parts;
  int depth = 0;
  std::size_t start = 0;
  for (std::size_t i = 0; i < text.size();) {
    char c = text[i];
    if (c == '(') ++depth;
    if (c == ')') --depth;
    if (depth == 0 && text.compare(i, sep.size(), sep) == 0) {
      parts.push_back(text.substr(start, i - start));
      i += sep.size();
      start = i;
      continue;
    }
    ++i;
  }
  parts.push_back(text.substr(start));
  return parts;
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && s.front() == ' ') s.remove_prefix(1);
  while (!s.empty() && s.back() == ' ') s.remove_suffix(1);
  return s;
}

// Names never contain commas, so a bare "," is accepted as well as ", ".
std::vector<std::string> names_of(std::string_view group) {
  std::vector<std::string> out;
  for (auto part : split_top(group, ","))
    if (auto t = trim(part); !t.empty()) out.emplace_back(t);
  return out;
}

void flatten(std::string_view label, std::vector<std::string>& out) {
  for (const auto& group : split_label(label))
    for (const auto& name : group) {
      if (name.find('(') != std::string::npos)
        flatten(name, out);
      else
        out.push_back(name);
    }
}

}  // namespace

LabelGroups split_label(std::string_view label) {
  LabelGroups groups;
  const auto open = label.find('(');
  if (open == std::string_view::npos || label.empty() || label.back() != ')') {
    groups.push_back(names_of(label));
    return groups;
  }
  // The parent part may itself be a sequence whose last name carries the
  // children list, so split at the first top-level '('.
  groups.push_back(names_of(label.substr(0, open)));
  std::string_view inner = label.substr(open + 1, label.size() - open - 2);
  for (auto child : split_top(inner, kSiblingSeparator)) groups.push_back(names_of(child));
  return groups;
}

std::vector<std::string> label_names(std::string_view label) {
  std::vector<std::string> names;
  flatten(label, names);
  return names;
}

std::size_t label_name_count(std::string_view label) { return label_names(label).size(); }

std::string entry_name(std::string_view label) {
  auto groups = split_label(label);
  if (groups.empty() || groups[0].empty()) return std::string(label);
  return groups[0].back();
}

std::string head_name(std::string_view label) {
  auto groups = split_label(label);
  if (groups.empty() || groups[0].empty()) return std::string(label);
  return groups[0].front();
}

bool label_contains_name(std::string_view label, std::string_view name) {
  for (const auto& n : label_names(label))
    if (n == name) return true;
  return false;
}

}  // namespace ipag
