#include "fixtures.hpp"

#include <fstream>
#include <sstream>
#include <stdexcept>

#include "ipag/mini_c.hpp"

namespace ipag::test {

std::filesystem::path data_dir() { return IPAG_DATA_DIR; }

std::string read_text(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

RoutineCorpus listing_corpus() {
  RoutineCorpus corpus;
  for (auto& ast : parse_mini_c(read_text(data_dir() / "fixtures" / "listing1.c")))
    corpus.add(std::move(ast));
  return corpus;
}

const Ast& listing_routine(const RoutineCorpus& corpus, const std::string& name) {
  const Ast* ast = corpus.find(name);
  if (!ast) throw std::runtime_error("fixture routine missing: " + name);
  return *ast;
}

}  // namespace ipag::test
