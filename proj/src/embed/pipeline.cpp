#include "ipag/pipeline.hpp"

#include <mutex>
#include <sstream>
#include <thread>

#include "ipag/io.hpp"

namespace ipag {

namespace {

template <class Fn>
void each_parallel(std::size_t n, unsigned jobs, Fn fn) {
  jobs = std::max(1u, std::min<unsigned>(jobs, static_cast<unsigned>(n)));
  std::exception_ptr failure;
  std::mutex m;
  auto work = [&](unsigned w) {
    for (std::size_t i = w; i < n; i += jobs) {
      try {
        fn(i);
      } catch (...) {
        std::lock_guard lock(m);
        if (!failure) failure = std::current_exception();
      }
    }
  };
  if (jobs == 1) {
    work(0);
  } else {
    std::vector<std::thread> pool;
    for (unsigned w = 0; w < jobs; ++w) pool.emplace_back(work, w);
    for (auto& t : pool) t.join();
  }
  if (failure) std::rethrow_exception(failure);
}

}  // namespace

std::vector<Ipag> build_complete(const std::vector<Ast>& asts, const RulesetBundle& rules, const LinkOptions& link,
                                 std::vector<std::string>* warnings, unsigned jobs) {
  std::vector<Ipag> reduced(asts.size());
  each_parallel(asts.size(), jobs, [&](std::size_t i) {
    reduced[i] = compress(build_preliminary(asts[i]), rules.for_language(asts[i].language));
  });
  const auto index = index_call_depths(reduced, link);
  if (warnings) warnings->insert(warnings->end(), index.warnings.begin(), index.warnings.end());
  return link_calls(reduced, index, link, warnings);
}

std::vector<EmbeddedGraph> embed_corpus(const std::vector<Ipag>& corpus, const PropertyVocabulary& vocab,
                                        TextEmbedder& text, UnknownNames unknown, std::vector<std::string>* warnings,
                                        unsigned jobs) {
  std::vector<EmbeddedGraph> out(corpus.size());
  std::vector<std::vector<std::string>> notes(corpus.size());
  each_parallel(corpus.size(), jobs, [&](std::size_t i) {
    out[i] = slice_subgraphs(corpus[i], compute_features(corpus[i], vocab, text, unknown, &notes[i]));
  });
  if (warnings)
    for (auto& n : notes) warnings->insert(warnings->end(), n.begin(), n.end());
  return out;
}

std::map<std::string, bool> parse_labels(const std::string& text) {
  std::map<std::string, bool> out;
  std::map<std::string, std::size_t> first_line;
  std::istringstream in(text);
  std::string line;
  std::size_t no = 0;
  while (std::getline(in, line)) {
    ++no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    const auto tab = line.find('\t');
    const std::string value = tab == std::string::npos ? "" : line.substr(tab + 1);
    if (tab == 0 || (value != "0" && value != "1"))
      throw LabelError("line " + std::to_string(no) + ": expected 'routine<TAB>0|1', got '" + line + "'");
    const std::string name = line.substr(0, tab);
    const bool v = value == "1";
    auto [it, fresh] = out.emplace(name, v);
    if (fresh) {
      first_line[name] = no;
    } else if (it->second != v) {
      throw LabelError("conflicting labels for '" + name + "' on lines " + std::to_string(first_line[name]) +
                       " and " + std::to_string(no));
    }
  }
  return out;
}

std::map<std::string, bool> load_labels(const std::filesystem::path& path) { return parse_labels(read_file(path)); }

std::vector<std::string> apply_labels(std::vector<EmbeddedGraph>& graphs, const std::map<std::string, bool>& labels) {
  std::vector<std::string> missing;
  for (auto& g : graphs) {
    if (auto it = labels.find(g.name); it != labels.end()) {
      g.vulnerable = it->second;
    } else {
      missing.push_back(g.name);
    }
  }
  return missing;
}

}  // namespace ipag
