#include "ipag/cli.hpp"

#include <glob.h>

#include <cstdlib>
#include <iostream>
#include <memory>
#include <optional>
#include <sstream>

#include "CLI11.hpp"
#include "ipag/hagnn.hpp"
#include "ipag/interchange.hpp"
#include "ipag/io.hpp"
#include "ipag/mini_c.hpp"
#include "ipag/pipeline.hpp"
#include "ipag/serialize.hpp"
#include "ipag/simd.hpp"
#include "json.hpp"

namespace ipag {

using json = nlohmann::json;
namespace fs = std::filesystem;

namespace {

class InvalidInput : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct Common {
  std::vector<std::string> inputs;
  std::vector<std::string> ast_in;
  std::string rules;
  std::string embed_mode = "hash";
  std::string embed_endpoint;
  std::string embed_cache;
  bool strict_embed = false;
  int max_call_depth = 8;
  std::string call_sites = "callee";
  unsigned jobs = 1;
  std::uint64_t seed = 1;
  std::string model;
  int folds = 5;
  std::string out;
  std::string labels;
  std::string config;
  std::size_t text_width = kDefaultTextWidth;
  // Overrides applied on top of --config.
  std::optional<int> epochs, layers;
  std::optional<std::size_t> hidden, batch_size;
  std::optional<double> learning_rate;
  std::optional<std::string> passer;
  std::string before;
};

RoutineCorpus load_routines(const std::vector<std::string>& sources, const std::vector<std::string>& interchange) {
  RoutineCorpus corpus;
  auto add_all = [&](const std::string& p) {
    const auto loaded = load_ast_interchange(p);
    for (const auto& a : loaded.asts()) corpus.add(a);
  };
  for (const auto& p : interchange) add_all(p);
  for (const auto& p : sources) {
    if (fs::path(p).extension() == ".json") {
      add_all(p);
      continue;
    }
    try {
      for (auto& a : parse_mini_c(read_file(p))) corpus.add(std::move(a));
    } catch (const ParseError& e) {
      throw InvalidInput(p + ": " + e.what());
    }
  }
  if (corpus.empty()) throw InvalidInput("no routines in the input");
  return corpus;
}

LinkOptions link_options(const Common& c) {
  LinkOptions o;
  o.max_call_depth = c.max_call_depth;
  o.policy = c.call_sites == "every-token" ? CallSitePolicy::every_resolved_token : CallSitePolicy::callee_position;
  return o;
}

RulesetBundle rules_of(const Common& c) { return c.rules.empty() ? RulesetBundle::builtin() : RulesetBundle::load(c.rules); }

void emit(const Common& c, const std::string& text, std::ostream& out) {
  if (c.out.empty() || c.out == "-") {
    out << text;
    if (!text.empty() && text.back() != '\n') out << '\n';
  } else {
    write_file_atomic(c.out, text.back() == '\n' ? text : text + "\n");
  }
}

void warn_all(const std::vector<std::string>& warnings, std::ostream& err) {
  for (const auto& w : warnings) err << "warning: " << w << '\n';
}

std::vector<Ipag> load_single_corpus(const Common& c) {
  if (c.inputs.size() != 1) throw InvalidInput("expected exactly one IPAG corpus file");
  return load_ipag_corpus(c.inputs[0]);
}

struct Embedding {
  std::unique_ptr<TextEmbedder> base;
  std::unique_ptr<EmbeddingCache> cache;
  std::unique_ptr<CachingEmbedder> cached;
  TextEmbedder& get() { return cached ? static_cast<TextEmbedder&>(*cached) : *base; }
};

Embedding make_embedder(const Common& c, std::size_t width) {
  Embedding e;
  if (embed_mode_from_string(c.embed_mode) == EmbedMode::service) {
    ServiceOptions o;
    o.endpoint = c.embed_endpoint;
    o.width = width;
    o.strict = c.strict_embed;
    e.base = std::make_unique<ServiceEmbedder>(o);
  } else {
    e.base = std::make_unique<HashEmbedder>(width);
  }
  if (!c.embed_cache.empty()) {
    e.cache = std::make_unique<EmbeddingCache>();
    e.cache->load(c.embed_cache);
    e.cached = std::make_unique<CachingEmbedder>(*e.base, *e.cache);
  }
  return e;
}

void finish_embedding(const Common& c, Embedding& e, std::ostream& err) {
  if (auto* s = dynamic_cast<ServiceEmbedder*>(e.base.get())) warn_all(s->warnings(), err);
  if (e.cache) e.cache->save(c.embed_cache);
}

HagnnConfig config_of(const Common& c) {
  HagnnConfig cfg;
  if (!c.config.empty()) {
    json j;
    try {
      j = json::parse(read_file(c.config));
    } catch (const json::exception& e) {
      throw InvalidInput(c.config + ": " + e.what());
    }
    cfg.hidden = j.value("hidden", cfg.hidden);
    cfg.layers = j.value("layers", cfg.layers);
    if (j.contains("passer")) cfg.passer = message_passer_from_string(j["passer"].get<std::string>());
    cfg.learning_rate = j.value("learning_rate", cfg.learning_rate);
    cfg.epochs = j.value("epochs", cfg.epochs);
    cfg.batch_size = j.value("batch_size", cfg.batch_size);
    cfg.seed = j.value("seed", cfg.seed);
    cfg.depth_tiers = j.value("depth_tiers", cfg.depth_tiers);
    cfg.text_width = j.value("text_width", cfg.text_width);
  } else {
    cfg.seed = c.seed;
    cfg.text_width = c.text_width;
  }
  if (c.hidden) cfg.hidden = *c.hidden;
  if (c.layers) cfg.layers = *c.layers;
  if (c.epochs) cfg.epochs = *c.epochs;
  if (c.batch_size) cfg.batch_size = *c.batch_size;
  if (c.learning_rate) cfg.learning_rate = *c.learning_rate;
  if (c.passer) cfg.passer = message_passer_from_string(*c.passer);
  cfg.jobs = c.jobs;
  cfg.validate();
  return cfg;
}

json opt(const std::optional<double>& v) { return v ? json(*v) : json(nullptr); }

json metrics_json(const Metrics& m) {
  return {{"tp", m.counts.tp},        {"tn", m.counts.tn},          {"fp", m.counts.fp},
          {"fn", m.counts.fn},        {"accuracy", opt(m.accuracy)}, {"precision", opt(m.precision)},
          {"recall", opt(m.recall)},  {"f1", opt(m.f1)},             {"fpr", opt(m.fpr)},
          {"fnr", opt(m.fnr)}};
}

json eval_json(const EvalReport& r) {
  json folds = json::array();
  for (const auto& f : r.folds) folds.push_back(metrics_json(f));
  return {{"folds", folds}, {"geometric_mean", metrics_json(r.mean)}};
}

json counts_json(const Ipag& g) {
  return {{"tokens", g.tokens.size()},
          {"properties", g.properties.size()},
          {"declarations", g.declarations.size()},
          {"e_pd", g.edges_of(EdgeKind::pd).size()},
          {"e_pp", g.edges_of(EdgeKind::pp).size()},
          {"e_tp", g.edges_of(EdgeKind::tp).size()},
          {"e_tt", g.edges_of(EdgeKind::tt).size()},
          {"e_td", g.edges_of(EdgeKind::td).size()},
          {"e_dt", g.edges_of(EdgeKind::dt).size()}};
}

json report_json(const CompressionReport& r) {
  return {{"routines", r.routines},         {"nodes_before", r.nodes_before}, {"nodes_after", r.nodes_after},
          {"edges_before", r.edges_before}, {"edges_after", r.edges_after},   {"node_reduction", r.node_ratio},
          {"edge_reduction", r.edge_ratio}, {"node_histogram", r.node_ratio_histogram},
          {"edge_histogram", r.edge_ratio_histogram}};
}

std::vector<EmbeddedGraph> labelled(std::vector<EmbeddedGraph> graphs, const std::string& labels_path,
                                    std::ostream& err) {
  if (labels_path.empty()) throw InvalidInput("--labels is required");
  const auto labels = load_labels(labels_path);
  const auto missing = apply_labels(graphs, labels);
  for (const auto& m : missing) err << "warning: no label for '" << m << "'; skipped\n";
  std::vector<EmbeddedGraph> kept;
  for (auto& g : graphs)
    if (g.vulnerable) kept.push_back(std::move(g));
  return kept;
}

std::string predictions_tsv(const std::vector<Prediction>& ps) {
  std::ostringstream s;
  s << "routine\tscore\tvulnerable\n";
  s.precision(17);
  for (const auto& p : ps) s << p.routine << '\t' << p.score << '\t' << (p.vulnerable ? 1 : 0) << '\n';
  return s.str();
}

std::vector<std::string> expand_glob(const fs::path& base, const std::string& pattern) {
  const fs::path full = fs::path(pattern).is_absolute() ? fs::path(pattern) : base / pattern;
  glob_t g{};
  std::vector<std::string> out;
  if (::glob(full.c_str(), 0, nullptr, &g) == 0)
    for (std::size_t i = 0; i < g.gl_pathc; ++i) out.emplace_back(g.gl_pathv[i]);
  globfree(&g);
  if (out.empty()) throw InvalidInput("input pattern '" + pattern + "' matches no files");
  return out;
}

// The preliminary counts the listing fixture is known to produce.
json fixture_check(const std::vector<Ipag>& prelim) {
  for (const auto& g : prelim) {
    if (g.origin != "dump_relocs") continue;
    const std::vector<std::size_t> want = {9, 20, 1, 3, 17, 9, 8, 9};
    const std::vector<std::size_t> got = {g.tokens.size(),
                                          g.properties.size(),
                                          g.declarations.size(),
                                          g.edges_of(EdgeKind::pd).size(),
                                          g.edges_of(EdgeKind::pp).size(),
                                          g.edges_of(EdgeKind::tp).size(),
                                          g.edges_of(EdgeKind::tt).size(),
                                          g.edges_of(EdgeKind::td).size()};
    return {{"routine", "dump_relocs"}, {"expected", want}, {"actual", got}, {"pass", got == want}};
  }
  return nullptr;
}

int run_e2e(const std::string& manifest_path, const Common& flags, std::ostream& out, std::ostream& err) {
  json m;
  try {
    m = json::parse(read_file(manifest_path));
  } catch (const json::exception& e) {
    throw InvalidInput(manifest_path + ": " + e.what());
  }
  const fs::path base = fs::absolute(manifest_path).parent_path();
  auto resolve = [&](const std::string& p) { return fs::path(p).is_absolute() ? fs::path(p) : base / p; };

  Common c = flags;
  c.inputs.clear();
  for (const auto& pattern : m.value("inputs", std::vector<std::string>{}))
    for (auto& f : expand_glob(base, pattern)) c.inputs.push_back(f);
  for (const auto& p : m.value("ast_in", std::vector<std::string>{})) c.ast_in.push_back(resolve(p).string());
  if (m.contains("rules")) c.rules = resolve(m["rules"].get<std::string>()).string();
  if (m.contains("labels")) c.labels = resolve(m["labels"].get<std::string>()).string();
  if (m.contains("embed")) {
    const auto& e = m["embed"];
    c.embed_mode = e.value("mode", c.embed_mode);
    c.embed_endpoint = e.value("endpoint", c.embed_endpoint);
    c.strict_embed = e.value("strict", c.strict_embed);
  }
  c.seed = m.value("seed", c.seed);
  c.folds = m.value("folds", 0);
  c.max_call_depth = m.value("max_call_depth", c.max_call_depth);
  c.jobs = m.value("jobs", c.jobs);
  const bool checkpoints = m.value("stage_checkpoints", true);
  const fs::path out_dir = resolve(m.value("output_dir", std::string("out")));

  for (const auto& f : c.ast_in)
    if (!fs::exists(f)) throw InvalidInput("missing input " + f);
  for (const auto* f : {&c.rules, &c.labels})
    if (!f->empty() && !fs::exists(*f)) throw InvalidInput("missing file " + *f);
  fs::create_directories(out_dir);

  json report;
  std::vector<std::string> warnings;
  const auto corpus = load_routines(c.inputs, c.ast_in);
  for (const auto& w : corpus.warnings()) warnings.push_back(w.message);
  const auto rules = rules_of(c);

  std::vector<Ipag> prelim, reduced;
  for (const auto& a : corpus.asts()) {
    prelim.push_back(build_preliminary(a));
    reduced.push_back(compress(prelim.back(), rules.for_language(a.language)));
  }
  c.call_sites = m.value("call_sites", c.call_sites);
  const LinkOptions link = link_options(c);
  const auto index = index_call_depths(reduced, link);
  warnings.insert(warnings.end(), index.warnings.begin(), index.warnings.end());
  const auto complete = link_calls(reduced, index, link, &warnings);
  if (checkpoints) {
    save_ipag_corpus(out_dir / "preliminary.json", prelim);
    save_ipag_corpus(out_dir / "reduced.json", reduced);
    save_ipag_corpus(out_dir / "complete.json", complete);
  }
  report["routines"] = corpus.size();
  report["compression"] = report_json(compression_report(prelim, reduced));
  report["call_depth_partitions"] = index.partitions;
  report["caller_sample_ratio"] = caller_sample_ratio(index, reduced.size());
  report["fixture"] = fixture_check(prelim);
  bool ok = report["fixture"].is_null() || report["fixture"]["pass"].get<bool>();

  if (!c.labels.empty()) {
    Common cc = c;
    if (m.contains("model")) {
      const fs::path cfg_path = out_dir / "config.json";
      json model = m["model"];
      if (!model.contains("seed")) model["seed"] = c.seed;
      write_file_atomic(cfg_path, model.dump(2));
      cc.config = cfg_path.string();
    }
    const HagnnConfig cfg = config_of(cc);
    const auto vocab = PropertyVocabulary::from_corpus(complete);
    auto emb = make_embedder(c, cfg.text_width);
    auto graphs = labelled(embed_corpus(complete, vocab, emb.get(), UnknownNames::error, &warnings, c.jobs), c.labels, err);
    finish_embedding(c, emb, err);
    const auto trained = train(graphs, cfg, vocab);
    save_checkpoint(trained.model, out_dir / "model.ckpt");
    json history = json::array();
    for (const auto& h : trained.history) history.push_back({{"epoch", h.epoch}, {"loss", h.loss}, {"accuracy", h.accuracy}});
    report["training"] = {{"history", history}, {"diverged", trained.diverged}, {"message", trained.message}};
    ok = ok && !trained.diverged;
    write_file_atomic(out_dir / "predictions.tsv", predictions_tsv(predict(trained.model, graphs)));
    if (c.folds > 0) report["evaluation"] = eval_json(evaluate(graphs, cfg, vocab, c.folds));
  }
  report["warnings"] = warnings;
  report["status"] = ok ? "pass" : "fail";
  write_file_atomic(out_dir / "report.json", report.dump(2) + "\n");
  out << "report written to " << (out_dir / "report.json").string() << " (" << (ok ? "pass" : "fail") << ")\n";
  return ok ? kExitOk : kExitInvalid;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Inter-procedural abstract graphs and HAGNN vulnerability detection", "ipag"};
  app.require_subcommand(1);
  Common c;
  if (const char* env = std::getenv("IPAG_EMBED_ENDPOINT")) c.embed_endpoint = env;

  auto inputs = [&](CLI::App* s, bool required) {
    auto* o = s->add_option("inputs", c.inputs, "Input files");
    if (required) o->required();
  };
  auto sources = [&](CLI::App* s) {
    inputs(s, false);
    s->add_option("--ast-in", c.ast_in, "AST interchange files");
  };
  auto output = [&](CLI::App* s, bool required) {
    auto* o = s->add_option("-o,--out", c.out, "Output file");
    if (required) o->required();
  };
  auto embedding = [&](CLI::App* s) {
    s->add_option("--embed-mode", c.embed_mode, "hash or service")->check(CLI::IsMember({"hash", "service"}));
    s->add_option("--embed-endpoint", c.embed_endpoint, "Embedding service URL");
    s->add_flag("--strict-embed", c.strict_embed, "Fail when the service is unreachable");
    s->add_option("--embed-cache", c.embed_cache, "Label vector cache file");
    s->add_option("--jobs", c.jobs, "Worker threads")->check(CLI::PositiveNumber);
  };
  auto model_flags = [&](CLI::App* s) {
    s->add_option("--config", c.config, "Model config JSON");
    s->add_option("--seed", c.seed, "Random seed");
    s->add_option("--text-width", c.text_width, "Token and declaration embedding width");
    s->add_option("--epochs", c.epochs);
    s->add_option("--hidden", c.hidden);
    s->add_option("--layers", c.layers);
    s->add_option("--batch-size", c.batch_size);
    s->add_option("--lr", c.learning_rate);
    s->add_option("--passer", c.passer)->check(CLI::IsMember({"sage_plus", "sage"}));
  };

  auto* parse = app.add_subcommand("parse", "Parse mini-C into AST interchange JSON");
  sources(parse);
  output(parse, false);
  auto* build = app.add_subcommand("build-ipag", "Build preliminary IPAGs");
  sources(build);
  output(build, true);
  auto* comp = app.add_subcommand("compress", "Sequence and aggregation merges");
  inputs(comp, true);
  output(comp, true);
  comp->add_option("--rules", c.rules, "Compression ruleset JSON");
  comp->add_option("--jobs", c.jobs)->check(CLI::PositiveNumber);
  auto* link = app.add_subcommand("link", "Splice callee graphs into callers");
  inputs(link, true);
  output(link, true);
  link->add_option("--max-call-depth", c.max_call_depth)->check(CLI::NonNegativeNumber);
  link->add_option("--call-sites", c.call_sites, "callee or every-token")->check(CLI::IsMember({"callee", "every-token"}));
  auto* stats = app.add_subcommand("stats", "Node and edge counts and reduction ratios");
  inputs(stats, true);
  output(stats, false);
  stats->add_option("--before", c.before, "Uncompressed corpus to compare against");
  auto* embed = app.add_subcommand("embed", "Node features and typed subgraphs");
  inputs(embed, true);
  output(embed, true);
  embedding(embed);
  embed->add_option("--text-width", c.text_width);
  auto* tr = app.add_subcommand("train", "Train a model");
  inputs(tr, true);
  tr->add_option("--labels", c.labels)->required();
  tr->add_option("--model", c.model, "Checkpoint to write")->required();
  output(tr, false);
  embedding(tr);
  model_flags(tr);
  auto* ev = app.add_subcommand("eval", "Stratified k-fold evaluation");
  inputs(ev, true);
  ev->add_option("--labels", c.labels)->required();
  ev->add_option("--folds", c.folds)->check(CLI::Range(2, 1000));
  output(ev, false);
  embedding(ev);
  model_flags(ev);
  auto* pr = app.add_subcommand("predict", "Score routines with a trained model");
  inputs(pr, true);
  pr->add_option("--model", c.model, "Checkpoint")->required();
  output(pr, false);
  embedding(pr);
  auto* e2e = app.add_subcommand("e2e", "Run the whole pipeline from a manifest");
  std::string manifest;
  e2e->add_option("--manifest", manifest)->required();
  embedding(e2e);

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n" << app.help();
    return kExitUsage;
  }

  try {
    std::vector<std::string> warnings;
    if (parse->parsed()) {
      const auto corpus = load_routines(c.inputs, c.ast_in);
      for (const auto& w : corpus.warnings()) warnings.push_back(w.message);
      emit(c, dump_ast_interchange(corpus.asts()), out);
    } else if (build->parsed()) {
      const auto corpus = load_routines(c.inputs, c.ast_in);
      for (const auto& w : corpus.warnings()) warnings.push_back(w.message);
      std::vector<Ipag> graphs;
      for (const auto& a : corpus.asts()) graphs.push_back(build_preliminary(a));
      save_ipag_corpus(c.out, graphs);
    } else if (comp->parsed()) {
      const auto graphs = load_single_corpus(c);
      const auto rules = rules_of(c);
      std::vector<Ipag> reduced;
      for (const auto& g : graphs) {
        if (g.stage != Stage::preliminary && g.stage != Stage::sequence_reduced)
          throw StageError("compress expects preliminary IPAGs; '" + g.origin + "' is " + std::string(to_string(g.stage)));
        const auto& r = rules.for_language(g.language);
        reduced.push_back(merge_aggregations(g.stage == Stage::preliminary ? merge_sequences(g) : g, r));
      }
      save_ipag_corpus(c.out, reduced);
    } else if (link->parsed()) {
      const auto graphs = load_single_corpus(c);
      const LinkOptions o = link_options(c);
      const auto index = index_call_depths(graphs, o);
      warnings = index.warnings;
      save_ipag_corpus(c.out, link_calls(graphs, index, o, &warnings));
    } else if (stats->parsed()) {
      const auto graphs = load_single_corpus(c);
      json j;
      json per = json::array();
      for (const auto& g : graphs) {
        json x = counts_json(g);
        x["routine"] = g.origin;
        x["stage"] = std::string(to_string(g.stage));
        per.push_back(x);
      }
      j["graphs"] = per;
      std::vector<Ipag> before = graphs;
      if (!c.before.empty()) before = load_ipag_corpus(c.before);
      j["reduction"] = report_json(compression_report(before, graphs));
      emit(c, j.dump(2), out);
    } else if (embed->parsed()) {
      const auto graphs = load_single_corpus(c);
      const auto vocab = PropertyVocabulary::from_corpus(graphs);
      auto emb = make_embedder(c, c.text_width);
      const auto embedded = embed_corpus(graphs, vocab, emb.get(), UnknownNames::error, &warnings, c.jobs);
      finish_embedding(c, emb, err);
      json j;
      j["version"] = 1;
      j["kind"] = "embedded-corpus";
      j["mode"] = c.embed_mode;
      j["text_width"] = c.text_width;
      j["vocabulary"] = vocab.names();
      json gs = json::array();
      for (const auto& e : embedded) {
        json units = json::array();
        for (const auto& s : e.units) {
          json nodes = json::array();
          for (const auto& n : s.nodes) nodes.push_back({std::string(to_string(n.kind)), n.index});
          units.push_back({{"kind", std::string(to_string(s.kind))},
                           {"one_hot", s.one_hot()},
                           {"nodes", nodes},
                           {"source", s.source},
                           {"target", s.target},
                           {"depth", s.depth}});
        }
        auto rows = [](const Matrix& m) {
          json r = json::array();
          for (std::size_t i = 0; i < m.rows; ++i) r.push_back(std::vector<double>(m.row(i), m.row(i) + m.cols));
          return r;
        };
        gs.push_back({{"routine", e.name},
                      {"tokens", rows(e.features.tokens)},
                      {"properties", rows(e.features.properties)},
                      {"declarations", rows(e.features.declarations)},
                      {"subgraphs", units}});
      }
      j["graphs"] = gs;
      write_file_atomic(c.out, j.dump() + "\n");
    } else if (tr->parsed()) {
      const auto graphs = load_single_corpus(c);
      const HagnnConfig cfg = config_of(c);
      const auto vocab = PropertyVocabulary::from_corpus(graphs);
      auto emb = make_embedder(c, cfg.text_width);
      auto data = labelled(embed_corpus(graphs, vocab, emb.get(), UnknownNames::error, &warnings, c.jobs), c.labels, err);
      finish_embedding(c, emb, err);
      const auto r = train(data, cfg, vocab, [&](const EpochStats& s) {
        err << "epoch " << s.epoch << " loss " << s.loss << " accuracy " << s.accuracy << '\n';
        return true;
      });
      save_checkpoint(r.model, c.model);
      json history = json::array();
      for (const auto& h : r.history) history.push_back({{"epoch", h.epoch}, {"loss", h.loss}, {"accuracy", h.accuracy}});
      emit(c, json{{"history", history}, {"diverged", r.diverged}, {"message", r.message}}.dump(2), out);
      warn_all(warnings, err);
      if (r.diverged) {
        err << "error: " << r.message << '\n';
        return kExitInvalid;
      }
      return kExitOk;
    } else if (ev->parsed()) {
      const auto graphs = load_single_corpus(c);
      const HagnnConfig cfg = config_of(c);
      const auto vocab = PropertyVocabulary::from_corpus(graphs);
      auto emb = make_embedder(c, cfg.text_width);
      auto data = labelled(embed_corpus(graphs, vocab, emb.get(), UnknownNames::error, &warnings, c.jobs), c.labels, err);
      finish_embedding(c, emb, err);
      emit(c, eval_json(evaluate(data, cfg, vocab, c.folds)).dump(2), out);
    } else if (pr->parsed()) {
      const auto graphs = load_single_corpus(c);
      const HagnnModel model = load_checkpoint(c.model);
      auto emb = make_embedder(c, model.config().text_width);
      const auto data = embed_corpus(graphs, model.vocabulary(), emb.get(), UnknownNames::reserved_index, &warnings, c.jobs);
      finish_embedding(c, emb, err);
      emit(c, predictions_tsv(predict(model, data)), out);
    } else if (e2e->parsed()) {
      return run_e2e(manifest, c, out, err);
    }
    warn_all(warnings, err);
    return kExitOk;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitInvalid;
  }
}

}  // namespace ipag
