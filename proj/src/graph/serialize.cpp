#include "ipag/serialize.hpp"

#include "ipag/io.hpp"
#include "json.hpp"

namespace ipag {

using nlohmann::json;

namespace {

json nodes_json(const std::vector<IpagNode>& nodes) {
  json out = json::array();
  for (const auto& n : nodes) out.push_back(json::array({n.id, n.label}));
  return out;
}

std::vector<IpagNode> nodes_from(const json& j) {
  std::vector<IpagNode> out;
  for (const auto& n : j) out.push_back({n.at(0).get<NodeId>(), n.at(1).get<std::string>()});
  return out;
}

}  // namespace

std::string dump_ipag_corpus(const std::vector<Ipag>& graphs) {
  json list = json::array();
  for (const auto& g : graphs) {
    json edges = json::object();
    for (EdgeKind k : kAllEdgeKinds) {
      json es = json::array();
      for (const Edge& e : g.edges_of(k)) es.push_back(json::array({e.source, e.target}));
      edges[std::string(to_string(k))] = std::move(es);
    }
    list.push_back({{"origin", g.origin},
                    {"language", std::string(to_string(g.language))},
                    {"stage", std::string(to_string(g.stage))},
                    {"tokens", nodes_json(g.tokens)},
                    {"properties", nodes_json(g.properties)},
                    {"declarations", nodes_json(g.declarations)},
                    {"edges", std::move(edges)}});
  }
  json doc = {{"version", kIpagFormatVersion}, {"kind", "ipag-corpus"}, {"graphs", std::move(list)}};
  return doc.dump();
}

std::vector<Ipag> parse_ipag_corpus(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw FormatError(std::string("malformed IPAG corpus: ") + e.what());
  }
  std::vector<Ipag> out;
  try {
    if (doc.value("kind", std::string()) != "ipag-corpus")
      throw FormatError("not an IPAG corpus file");
    if (doc.at("version").get<int>() != kIpagFormatVersion)
      throw FormatError("unsupported IPAG corpus version " + doc.at("version").dump());
    for (const auto& j : doc.at("graphs")) {
      Ipag g;
      g.origin = j.at("origin").get<std::string>();
      g.language = language_from_string(j.value("language", std::string("c")));
      g.stage = stage_from_string(j.at("stage").get<std::string>());
      g.tokens = nodes_from(j.at("tokens"));
      g.properties = nodes_from(j.at("properties"));
      g.declarations = nodes_from(j.at("declarations"));
      for (EdgeKind k : kAllEdgeKinds) {
        const auto key = std::string(to_string(k));
        if (!j.at("edges").contains(key)) continue;
        for (const auto& e : j.at("edges").at(key))
          g.edges_of(k).push_back({e.at(0).get<NodeId>(), e.at(1).get<NodeId>()});
      }
      auto vs = validate_ipag(g);
      if (!vs.empty())
        throw FormatError("graph '" + g.origin + "': " + vs.front().subject + ": " + vs.front().rule);
      out.push_back(std::move(g));
    }
  } catch (const json::exception& e) {
    throw FormatError(std::string("malformed IPAG corpus: ") + e.what());
  } catch (const std::invalid_argument& e) {
    throw FormatError(std::string("malformed IPAG corpus: ") + e.what());
  }
  return out;
}

std::vector<Ipag> load_ipag_corpus(const std::filesystem::path& path) {
  return parse_ipag_corpus(read_file(path));
}

void save_ipag_corpus(const std::filesystem::path& path, const std::vector<Ipag>& graphs) {
  write_file_atomic(path, dump_ipag_corpus(graphs));
}

}  // namespace ipag
