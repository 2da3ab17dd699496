#include "datasets.hpp"

#include "generators.hpp"
#include "ipag/mini_c.hpp"
#include "ipag/pipeline.hpp"

namespace ipag::test {

LabelledProgram sink_program(std::mt19937_64& rng, int count) {
  LabelledProgram p;
  p.source = "int sink(char *dst, char *src){ strcpy(dst, src); return dst[0] * 3 + 1; }\n";
  std::vector<int> order(static_cast<std::size_t>(count));
  for (int i = 0; i < count; ++i) order[i] = i;
  std::shuffle(order.begin(), order.end(), rng);
  std::vector<bool> bad(static_cast<std::size_t>(count), false);
  for (int i = 0; i < count / 2; ++i) bad[order[i]] = true;
  for (int i = 0; i < count; ++i) {
    const std::string name = "r" + std::to_string(i);
    std::string body = random_routine(rng, name, {}, {2, 3});
    if (bad[i]) {
      // Splice a call into the body just after the opening brace.
      body.insert(body.find('{') + 1, " sink(a, b);");
    }
    p.source += body + "\n";
    p.labels[name] = bad[i];
  }
  return p;
}

std::vector<Ipag> complete_graphs(const std::string& source) {
  return build_complete(parse_mini_c(source), RulesetBundle::builtin());
}

std::vector<EmbeddedGraph> embedded(const std::vector<Ipag>& graphs, const std::map<std::string, bool>& labels,
                                    std::size_t text_width, PropertyVocabulary* vocab_out) {
  std::vector<Ipag> kept;
  for (const auto& g : graphs)
    if (labels.count(g.origin)) kept.push_back(g);
  const auto vocab = PropertyVocabulary::from_corpus(kept);
  HashEmbedder text(text_width, 7);
  auto out = embed_corpus(kept, vocab, text);
  apply_labels(out, labels);
  if (vocab_out) *vocab_out = vocab;
  return out;
}

}  // namespace ipag::test
