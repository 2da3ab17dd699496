#include <algorithm>
#include <atomic>
#include <cmath>
#include <filesystem>
#include <map>
#include <random>
#include <set>
#include <thread>

#include "datasets.hpp"
#include "doctest.h"
#include "fixtures.hpp"
#include "httplib.h"
#include "ipag/embed.hpp"
#include "ipag/pipeline.hpp"
#include "json.hpp"
#include "model_oracle.hpp"

using namespace ipag;
using json = nlohmann::json;

namespace {

std::vector<double> triples(std::initializer_list<double> head) {
  std::vector<double> v(kPropertyWidth, 0.0);
  std::size_t i = 0;
  for (double x : head) v[i++] = x;
  return v;
}

const PropertyVocabulary kAbcd({"a", "b", "c", "d"});

// In-process stand-in for the embedding service.
class FakeService {
 public:
  explicit FakeService(int fail_first = 0) : fail_first_(fail_first) {
    server_.Get("/healthz", [](const httplib::Request&, httplib::Response& res) {
      res.set_content(R"({"status":"ok","model_id":"fake-1","width":8})", "application/json");
    });
    server_.Post("/embed", [this](const httplib::Request& req, httplib::Response& res) {
      ++calls;
      if (calls <= fail_first_) {
        res.status = 503;
        return;
      }
      const json body = json::parse(req.body);
      const auto texts = body.at("texts").get<std::vector<std::string>>();
      if (texts.empty()) {
        res.status = 400;
        return;
      }
      const std::size_t width = body.at("width").get<std::size_t>();
      json vectors = json::array();
      for (const auto& t : texts) {
        std::vector<double> v(width, 0.0);
        v[t.size() % width] = 1.0;
        vectors.push_back(v);
      }
      res.set_content(json{{"vectors", vectors}, {"model_id", "fake-1"}}.dump(), "application/json");
    });
    port_ = server_.bind_to_any_port("127.0.0.1");
    thread_ = std::thread([this] { server_.listen_after_bind(); });
    server_.wait_until_ready();
  }
  ~FakeService() {
    server_.stop();
    thread_.join();
  }
  std::string endpoint() const { return "http://127.0.0.1:" + std::to_string(port_); }
  std::atomic<int> calls{0};

 private:
  int fail_first_;
  httplib::Server server_;
  int port_ = 0;
  std::thread thread_;
};

ServiceOptions quick(std::string endpoint) {
  ServiceOptions o;
  o.endpoint = std::move(endpoint);
  o.width = 8;
  o.retries = 2;
  o.backoff = std::chrono::milliseconds(1);
  o.timeout = std::chrono::seconds(2);
  return o;
}

std::multiset<std::pair<NodeId, NodeId>> edge_multiset(const Ipag& g, EdgeKind k) {
  std::multiset<std::pair<NodeId, NodeId>> out;
  for (const Edge& e : g.edges_of(k)) out.insert({e.source, e.target});
  return out;
}

}  // namespace

TEST_CASE("property embeddings of the three label shapes") {
  CHECK(embed_property("a", kAbcd) == triples({1, 1, 1}));
  CHECK(embed_property("a, b", kAbcd) == triples({1, 1, 1, 2, 1, 2}));
  const auto want = triples({1, 1, 1, 2, 2, 1, 3, 3, 1, 4, 3, 2});
  CHECK(embed_property("(a‖b‖c,d)", kAbcd) == want);
  CHECK(embed_property("a(b‖c, d)", kAbcd) == want);
  CHECK(embed_property("a, b", kAbcd).size() == 360);
}

TEST_CASE("property embedding errors and unseen names") {
  CHECK_THROWS_AS(embed_property("zzz", kAbcd), EmbedError);
  std::size_t unseen = 0;
  CHECK(embed_property("a, zzz", kAbcd, UnknownNames::reserved_index, &unseen) == triples({1, 1, 1, 0, 1, 2}));
  CHECK(unseen == 1);
  std::string big = "a";
  for (int i = 0; i < 120; ++i) big += ", a";
  try {
    embed_property(big, kAbcd);
    FAIL("accepted 121 names");
  } catch (const EmbedError& e) {
    CHECK(std::string(e.what()).find("does not fit") != std::string::npos);
  }
  std::string fits = "a";
  for (int i = 0; i < 119; ++i) fits += ", a";
  CHECK(embed_property(fits, kAbcd)[359] == 120);
}

TEST_CASE("distinct merged labels give distinct embeddings") {
  const PropertyVocabulary v({"A", "B", "C"});
  const std::vector<std::string> labels = {"A", "B", "A, B", "B, A", "A(B‖C)", "A(B, C)", "A, B(C)", "A(B‖C‖A)",
                                           "A(B(C‖A)‖C)"};
  std::set<std::vector<double>> seen;
  for (const auto& l : labels) CHECK(seen.insert(embed_property(l, v)).second);
}

TEST_CASE("vocabulary is sorted, dense and 1-based") {
  PropertyVocabulary v({"b", "a", "b", "c"});
  CHECK(v.size() == 3);
  CHECK(v.find("a") == 1);
  CHECK(v.find("c") == 3);
  CHECK_FALSE(v.find("d"));
  auto graphs = test::complete_graphs("int f(int a){ return a + 1; }");
  auto corpus = PropertyVocabulary::from_corpus(graphs);
  CHECK(corpus.find("BinaryExpression"));
  CHECK(corpus.find("ReturnStatement"));
}

TEST_CASE("edge one-hots") {
  using A = std::array<double, 6>;
  CHECK(edge_one_hot(EdgeKind::pd) == A{1, 0, 0, 0, 0, 0});
  CHECK(edge_one_hot(EdgeKind::pp) == A{0, 1, 0, 0, 0, 0});
  CHECK(edge_one_hot(EdgeKind::tp) == A{0, 0, 1, 0, 0, 0});
  CHECK(edge_one_hot(EdgeKind::tt) == A{0, 0, 0, 1, 0, 0});
  CHECK(edge_one_hot(EdgeKind::td) == A{0, 0, 0, 0, 1, 0});
  CHECK(edge_one_hot(EdgeKind::dt) == A{0, 0, 0, 0, 0, 1});
  A sum{};
  for (EdgeKind k : kAllEdgeKinds)
    for (std::size_t i = 0; i < 6; ++i) sum[i] += edge_one_hot(k)[i];
  CHECK(sum == A{1, 1, 1, 1, 1, 1});
}

TEST_CASE("hash embedder is deterministic and unit norm") {
  HashEmbedder h(64, 3);
  const auto a = h.embed_one("abfd");
  CHECK(a == h.embed_one("abfd"));
  CHECK(a != h.embed_one("abfe"));
  CHECK(a != HashEmbedder(64, 4).embed_one("abfd"));
  for (const char* s : {"x", "long", "int", "bfd_map_over_sections", ""}) {
    double n = 0.0;
    for (double x : h.embed_one(s)) n += x * x;
    CHECK(std::abs(std::sqrt(n) - 1.0) < 1e-9);
  }
  CHECK(HashEmbedder(7).embed_one("odd").size() == 7);
}

TEST_CASE("service client round trip") {
  FakeService service;
  ServiceEmbedder client(quick(service.endpoint()));
  CHECK(client.healthy());
  const auto v = client.embed({"abfd", "abfd", "xy"});
  REQUIRE(v.size() == 3);
  CHECK(v[0] == v[1]);
  CHECK(v[2][2] == 1.0);
  CHECK(client.model_id() == "fake-1");
  CHECK_FALSE(client.fell_back());
}

TEST_CASE("service client batches large requests") {
  FakeService service;
  auto opts = quick(service.endpoint());
  opts.batch = 2;
  ServiceEmbedder client(opts);
  CHECK(client.embed({"a", "bb", "ccc", "dddd", "eeeee"}).size() == 5);
  CHECK(service.calls == 3);
}

TEST_CASE("service client retries transient failures") {
  FakeService service(2);
  ServiceEmbedder client(quick(service.endpoint()));
  CHECK(client.embed({"abc"})[0][3] == 1.0);
  CHECK(service.calls == 3);
  CHECK_FALSE(client.fell_back());
}

TEST_CASE("unreachable service falls back to hash vectors or fails when strict") {
  FakeService service(100);
  ServiceEmbedder lenient(quick(service.endpoint()));
  const auto v = lenient.embed({"abc"});
  CHECK(lenient.fell_back());
  CHECK(v[0] == HashEmbedder(8).embed_one("abc"));
  CHECK(lenient.warnings().size() == 1);

  auto strict_opts = quick(service.endpoint());
  strict_opts.strict = true;
  ServiceEmbedder strict(strict_opts);
  CHECK_THROWS_AS(strict.embed({"abc"}), EmbedError);

  ServiceEmbedder nowhere(quick(""));
  CHECK_FALSE(nowhere.healthy());
  nowhere.embed({"abc"});
  CHECK(nowhere.fell_back());
}

TEST_CASE("embedding cache serves repeats and persists") {
  FakeService service;
  ServiceEmbedder client(quick(service.endpoint()));
  EmbeddingCache cache;
  CachingEmbedder cached(client, cache);
  cached.embed({"one", "two"});
  cached.embed({"two", "three"});
  CHECK(service.calls == 2);
  CHECK(cache.size() == 3);
  const auto path = std::filesystem::temp_directory_path() / "ipag_cache_test.json";
  cache.save(path);
  EmbeddingCache again;
  again.load(path);
  CHECK(again.size() == 3);
  CHECK(again.get(EmbedMode::service, 8, "two") == cache.get(EmbedMode::service, 8, "two"));
  CHECK_FALSE(again.get(EmbedMode::hash, 8, "two"));
  CHECK_FALSE(again.get(EmbedMode::service, 16, "two"));
  std::filesystem::remove(path);

  // Fallback vectors are not cached under the service key.
  FakeService down(100);
  ServiceEmbedder broken(quick(down.endpoint()));
  EmbeddingCache empty;
  CachingEmbedder c2(broken, empty);
  c2.embed({"abc"});
  CHECK(empty.size() == 0);
}

TEST_CASE("listing routine slices into six subgraphs") {
  auto corpus = test::listing_corpus();
  auto graphs = build_complete(corpus.asts(), RulesetBundle::builtin());
  const Ipag& g = *std::find_if(graphs.begin(), graphs.end(), [](const Ipag& x) { return x.origin == "dump_relocs"; });
  const auto vocab = PropertyVocabulary::from_corpus(graphs);
  HashEmbedder text(64);
  const EmbeddedGraph e = slice_subgraphs(g, compute_features(g, vocab, text));
  CHECK(e.units[5].edge_count() == 2);
  CHECK(e.features.tokens.cols == 64);
  CHECK(e.features.properties.cols == 360);
  std::size_t edges = 0;
  for (const auto& s : e.units) edges += s.edge_count();
  CHECK(edges == g.edge_count());
}

TEST_CASE("slicing partitions edges and covers endpoints") {
  std::mt19937_64 rng(17);
  for (int trial = 0; trial < 10; ++trial) {
    auto p = test::sink_program(rng, 6);
    auto graphs = test::complete_graphs(p.source);
    const auto vocab = PropertyVocabulary::from_corpus(graphs);
    HashEmbedder text(16);
    for (const auto& g : graphs) {
      const auto e = slice_subgraphs(g, compute_features(g, vocab, text));
      NodeIndex index(g);
      for (EdgeKind k : kAllEdgeKinds) {
        const Subgraph& s = e.units[static_cast<std::size_t>(k)];
        CHECK(s.kind == k);
        std::multiset<std::pair<NodeId, NodeId>> back;
        std::set<NodeRef> used;
        const auto sig = signature_of(k);
        for (std::size_t i = 0; i < s.edge_count(); ++i) {
          const NodeRef a = s.nodes[s.source[i]], b = s.nodes[s.target[i]];
          CHECK(a.kind == sig.source);
          CHECK(b.kind == sig.target);
          back.insert({g.nodes_of(a.kind)[a.index].id, g.nodes_of(b.kind)[b.index].id});
          used.insert(a);
          used.insert(b);
          CHECK(s.depth[i] >= 1);
        }
        CHECK(back == edge_multiset(g, k));
        CHECK(used.size() == s.nodes.size());
      }
    }
  }
}

TEST_CASE("routine without calls has an empty sixth subgraph") {
  auto graphs = test::complete_graphs("int f(int a){ return a + 1; }");
  HashEmbedder text(8);
  const auto e = slice_subgraphs(graphs[0], compute_features(graphs[0], PropertyVocabulary::from_corpus(graphs), text));
  CHECK(e.units[5].edge_count() == 0);
  for (std::size_t u = 0; u < 5; ++u) CHECK(e.units[u].edge_count() > 0);
}

TEST_CASE("edge depths") {
  SUBCASE("hand built chain") {
    Ipag g;
    g.stage = Stage::complete;
    g.tokens = {{1, "x"}};
    g.properties = {{2, "A"}, {3, "B"}};
    g.declarations = {{4, "f"}};
    g.edges_of(EdgeKind::tp) = {{1, 2}};
    g.edges_of(EdgeKind::pp) = {{2, 3}};
    g.edges_of(EdgeKind::pd) = {{3, 4}};
    g.edges_of(EdgeKind::td) = {{1, 4}};
    const auto d = edge_depths(g);
    CHECK(d[static_cast<int>(EdgeKind::tp)] == std::vector<int>{3});
    CHECK(d[static_cast<int>(EdgeKind::pp)] == std::vector<int>{2});
    CHECK(d[static_cast<int>(EdgeKind::pd)] == std::vector<int>{1});
    CHECK(d[static_cast<int>(EdgeKind::td)] == std::vector<int>{1});
    g.edges_of(EdgeKind::pp).push_back({3, 2});
    CHECK_THROWS_AS(edge_depths(g), EmbedError);
  }
  SUBCASE("edges into the routine's declaration have depth 1") {
    auto graphs = test::complete_graphs("int f(int a){ g(a); return a; }");
    const auto d = edge_depths(graphs[0]);
    for (int x : d[static_cast<int>(EdgeKind::pd)]) CHECK(x == 1);
    for (int x : d[static_cast<int>(EdgeKind::td)]) CHECK(x == 1);
  }
  SUBCASE("generated graphs agree with relaxation") {
    std::mt19937_64 rng(19);
    for (int trial = 0; trial < 10; ++trial) {
      auto p = test::sink_program(rng, 5);
      for (const auto& g : test::complete_graphs(p.source)) CHECK(edge_depths(g) == test::relaxed_depths(g));
    }
  }
  SUBCASE("random DAGs agree with relaxation") {
    std::mt19937_64 rng(20);
    for (int trial = 0; trial < 50; ++trial) {
      Ipag g;
      const int props = 2 + static_cast<int>(rng() % 10);
      g.declarations = {{0, "d"}};
      for (int i = 1; i <= props; ++i) g.properties.push_back({static_cast<NodeId>(i), "P"});
      // Properties only point to lower ids, so the graph is acyclic.
      for (int i = 1; i <= props; ++i) {
        g.edges_of(EdgeKind::pd).push_back({static_cast<NodeId>(i), 0});
        for (int j = 1; j < i; ++j)
          if (rng() % 3 == 0) g.edges_of(EdgeKind::pp).push_back({static_cast<NodeId>(i), static_cast<NodeId>(j)});
      }
      CHECK(edge_depths(g) == test::relaxed_depths(g));
    }
  }
}

TEST_CASE("slicing requires a complete graph") {
  auto graphs = test::complete_graphs("int f(){ return 0; }");
  Ipag g = graphs[0];
  g.stage = Stage::aggregation_reduced;
  HashEmbedder text(8);
  CHECK_THROWS_AS(slice_subgraphs(g, compute_features(g, PropertyVocabulary::from_corpus(graphs), text)),
                  StageError);
}

TEST_CASE("labels files") {
  CHECK(parse_labels("").empty());
  auto m = parse_labels("f\t1\ng\t0\n");
  CHECK(m.size() == 2);
  CHECK(m["f"]);
  CHECK_FALSE(m["g"]);
  CHECK(parse_labels("# header\nf\t1\nf\t1\n").size() == 1);
  try {
    parse_labels("f\t1\ng\t0\nf\t0\n");
    FAIL("accepted a conflict");
  } catch (const LabelError& e) {
    CHECK(std::string(e.what()).find("lines 1 and 3") != std::string::npos);
  }
  CHECK_THROWS_AS(parse_labels("f 1\n"), LabelError);
  CHECK_THROWS_AS(parse_labels("f\t2\n"), LabelError);
}
