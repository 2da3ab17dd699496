#include <algorithm>

#include "ipag/compress.hpp"
#include "ipag/io.hpp"
#include "json.hpp"

namespace ipag {

namespace detail {
const char* builtin_rules_json();
}

UnknownPropertyName::UnknownPropertyName(const std::string& name)
    : std::runtime_error("property name '" + name + "' is not in the ruleset"), name_(name) {}

CompressRuleset::CompressRuleset(Language language, NameMap names, bool strict)
    : language_(language), names_(std::move(names)), strict_(strict) {}

namespace {

using nlohmann::json;

CompressRuleset from_doc(const json& doc, Language language) {
  const std::string key(to_string(language));
  if (!doc.contains("languages") || !doc["languages"].contains(key))
    throw std::runtime_error("rules file has no section for language '" + key + "'");
  const json& section = doc["languages"][key];
  CompressRuleset::NameMap names;
  for (const auto& cat : section.at("categories")) {
    const auto cat_name = cat.at("name").get<std::string>();
    const bool all = cat.value("compressible", false);
    const auto extra = cat.value("compressible_names", std::vector<std::string>{});
    for (const auto& n : cat.at("names")) {
      const auto name = n.get<std::string>();
      const bool starred = all || std::find(extra.begin(), extra.end(), name) != extra.end();
      if (!names.emplace(name, RuleEntry{cat_name, starred}).second)
        throw std::runtime_error("rules file lists '" + name + "' twice for " + key);
    }
  }
  return CompressRuleset(language, std::move(names), section.value("strict", true));
}

json parse_rules(const std::string& text) {
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    throw std::runtime_error(std::string("malformed rules file: ") + e.what());
  }
}

}  // namespace

CompressRuleset CompressRuleset::from_json(const std::string& text, Language language) {
  return from_doc(parse_rules(text), language);
}

CompressRuleset CompressRuleset::load(const std::filesystem::path& path, Language language) {
  return from_json(read_file(path), language);
}

const std::string& CompressRuleset::builtin_text() {
  static const std::string text = detail::builtin_rules_json();
  return text;
}

CompressRuleset CompressRuleset::builtin(Language language) {
  return from_json(builtin_text(), language);
}

bool CompressRuleset::knows(std::string_view name) const { return names_.find(name) != names_.end(); }

bool CompressRuleset::is_compressible(std::string_view name) const {
  auto it = names_.find(name);
  if (it == names_.end()) {
    if (strict_) throw UnknownPropertyName(std::string(name));
    return false;
  }
  return it->second.compressible;
}

std::optional<std::string> CompressRuleset::category(std::string_view name) const {
  auto it = names_.find(name);
  if (it == names_.end()) return std::nullopt;
  return it->second.category;
}

RulesetBundle RulesetBundle::builtin() {
  auto doc = parse_rules(CompressRuleset::builtin_text());
  return {from_doc(doc, Language::c), from_doc(doc, Language::java)};
}

RulesetBundle RulesetBundle::load(const std::filesystem::path& path) {
  auto doc = parse_rules(read_file(path));
  return {from_doc(doc, Language::c), from_doc(doc, Language::java)};
}

const CompressRuleset& RulesetBundle::for_language(Language lang) const {
  static const CompressRuleset none(Language::other, {}, false);
  if (lang == Language::other) return none;
  return lang == Language::java ? java : c;
}

}  // namespace ipag
