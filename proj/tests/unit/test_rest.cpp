#include <gtest/gtest.h>
#include <httplib.h>

#include <json.hpp>
#include <thread>

#include "fedlog/error.hpp"
#include "fedlog/rest.hpp"
#include "test_env.hpp"

using namespace fedlog;
using namespace std::chrono_literals;

namespace {

RestOptions fast() {
  RestOptions o;
  o.backoff_base = 5ms;
  o.timeout = 2000ms;
  return o;
}

SourceDescriptor kegg_at(const std::string& endpoint) {
  auto catalog = SourceCatalog::load_file(testenv::data_dir() / "catalog.json");
  auto src = *catalog.find_source("kegg");
  src.endpoint = endpoint;
  src.mode = SourceMode::Online;
  return src;
}

SubQuery pathway_subquery() {
  SubQuery sq;
  sq.id = 3;
  sq.source_id = "kegg";
  sq.atoms = {Atom::source("kegg.gene_pathway", {Variable{"G"}, Variable{"Id"}, Variable{"Url"}})};
  sq.input_vars = {"G"};
  sq.output_vars = {"G", "Id", "Url"};
  return sq;
}

BindingBatch genes(std::initializer_list<const char*> gs) {
  BindingBatch b;
  b.vars = {"G"};
  for (auto g : gs) b.tuples.push_back({g});
  return b;
}

struct Mock {
  MockRestServer server{testenv::data_dir() / "replica"};
  Mock() { server.start(); }
};

// Minimal server with a canned body for one relation.
struct Canned {
  httplib::Server srv;
  std::thread th;
  int port = 0;
  explicit Canned(std::string body, int status = 200) {
    srv.Get(R"(/api/.*)", [body, status](const httplib::Request&, httplib::Response& res) {
      res.status = status;
      res.set_content(body, "application/json");
    });
    port = srv.bind_to_any_port("127.0.0.1");
    th = std::thread([this] { srv.listen_after_bind(); });
    srv.wait_until_ready();
  }
  ~Canned() {
    srv.stop();
    th.join();
  }
  std::string endpoint() const { return "http://127.0.0.1:" + std::to_string(port) + "/api"; }
};

}  // namespace

TEST(MockServer, HealthAndLookup) {
  Mock m;
  httplib::Client cli("127.0.0.1", m.server.port());
  auto h = cli.Get("/health");
  ASSERT_TRUE(h);
  EXPECT_EQ(h->body, "OK");
  auto r = cli.Get("/api/kegg.gene_pathway/CYP1A1");
  ASSERT_TRUE(r);
  auto doc = nlohmann::json::parse(r->body);
  ASSERT_EQ(doc.size(), 2u);
  EXPECT_EQ(doc[0]["pathway_id"], "hsa00980");
  auto none = cli.Get("/api/kegg.gene_pathway/NOPE");
  EXPECT_EQ(nlohmann::json::parse(none->body), nlohmann::json::array());
  EXPECT_EQ(cli.Get("/api/unknown.rel/X")->status, 404);
  EXPECT_EQ(m.server.requests(), 3u);
  auto rels = m.server.relations();
  EXPECT_NE(std::find(rels.begin(), rels.end(), "kegg.gene_pathway"), rels.end());
}

TEST(MockServer, MissingFixtureDir) { EXPECT_THROW(MockRestServer("/nonexistent/fixtures"), CatalogError); }

TEST(Rest, FetchesBoundKeys) {
  Mock m;
  auto src = kegg_at(m.server.endpoint());
  auto t = exec_rest(pathway_subquery(), src, genes({"CYP1A1"}), fast());
  EXPECT_EQ(t.row_set(), (std::set<Row>{{"CYP1A1", "hsa00980", "https://www.kegg.jp/pathway/hsa00980"},
                                        {"CYP1A1", "hsa05204", "https://www.kegg.jp/pathway/hsa05204"}}));
  EXPECT_EQ(t.columns[2].kind, ColumnKind::Link);
  auto abs = exec_rest(pathway_subquery(), src, genes({"TLR4"}), fast());
  EXPECT_EQ(abs.rows.at(0)[2], "https://www.kegg.jp/pathway/hsa04620");
}

TEST(Rest, ConstantsFilterRows) {
  Mock m;
  auto src = kegg_at(m.server.endpoint());
  auto sq = pathway_subquery();
  sq.atoms[0].terms[1] = Constant{"hsa04668"};
  sq.output_vars = {"G"};
  auto t = exec_rest(sq, src, genes({"TNF", "IL1B", "CYP1A1"}), fast());
  EXPECT_EQ(t.row_set(), (std::set<Row>{{"TNF"}, {"IL1B"}}));
}

TEST(Rest, EmptyBindingsMakeNoRequests) {
  Mock m;
  auto src = kegg_at(m.server.endpoint());
  RestAdapter adapter(src, fast());
  auto t = adapter.execute(pathway_subquery(), genes({}));
  EXPECT_TRUE(t.rows.empty());
  EXPECT_EQ(adapter.requests(), 0u);
  EXPECT_EQ(m.server.requests(), 0u);
}

TEST(Rest, RetriesTransientFailures) {
  Mock m;
  auto src = kegg_at(m.server.endpoint());
  m.server.fail_next(2);
  RestAdapter adapter(src, fast());
  auto t = adapter.execute(pathway_subquery(), genes({"TNF"}));
  EXPECT_EQ(t.rows.size(), 1u);
  EXPECT_EQ(adapter.requests(), 3u);
}

TEST(Rest, GivesUpAfterMaxRetries) {
  Mock m;
  auto src = kegg_at(m.server.endpoint());
  m.server.fail_next(100);
  RestAdapter adapter(src, fast());
  try {
    adapter.execute(pathway_subquery(), genes({"TNF"}));
    FAIL();
  } catch (const AdapterError& e) {
    EXPECT_EQ(e.source_id(), "kegg");
    EXPECT_EQ(e.subquery_id(), 3);
    EXPECT_NE(std::string(e.what()).find("503"), std::string::npos);
  }
  EXPECT_EQ(adapter.requests(), 4u);  // first try + 3 retries
}

TEST(Rest, ClientErrorsAreNotRetried) {
  Canned c("nope", 404);
  auto src = kegg_at(c.endpoint());
  RestAdapter adapter(src, fast());
  try {
    adapter.execute(pathway_subquery(), genes({"TNF"}));
    FAIL();
  } catch (const AdapterError& e) {
    EXPECT_NE(std::string(e.what()).find("after 1 attempt: HTTP 404"), std::string::npos) << e.what();
  }
  EXPECT_EQ(adapter.requests(), 1u);
}

TEST(Rest, UnreachableEndpoint) {
  auto src = kegg_at("http://127.0.0.1:1/api");
  auto opts = fast();
  opts.max_retries = 1;
  EXPECT_THROW(exec_rest(pathway_subquery(), src, genes({"TNF"}), opts), AdapterError);
}

TEST(Rest, ChunksLargeKeySets) {
  Mock m;
  auto src = kegg_at(m.server.endpoint());
  BindingBatch b;
  b.vars = {"G"};
  for (int i = 0; i < 118; ++i) b.tuples.push_back({"G" + std::to_string(i)});
  b.tuples.push_back({"TNF"});
  b.tuples.push_back({"CYP1A1"});
  RestAdapter adapter(src, fast());
  auto t = adapter.execute(pathway_subquery(), b);
  EXPECT_EQ(adapter.requests(), 3u);  // 120 keys, 50 per request
  EXPECT_EQ(t.rows.size(), 3u);
}

TEST(Rest, KeysArePercentEncoded) {
  EXPECT_EQ(percent_encode("Butyric acid"), "Butyric%20acid");
  EXPECT_EQ(percent_encode("a/b"), "a%2Fb");
  EXPECT_EQ(percent_encode("AZaz09-_.~"), "AZaz09-_.~");
  Mock m;
  auto catalog = SourceCatalog::load_file(testenv::data_dir() / "catalog.json");
  auto src = *catalog.find_source("hmdb");
  src.endpoint = m.server.endpoint();
  SubQuery sq;
  sq.source_id = "hmdb";
  sq.atoms = {Atom::source("hmdb.metabolite", {Constant{"HMDB0000738"}, Variable{"N"}, FreshVar{2}, Variable{"L"}})};
  sq.output_vars = {"N", "L"};
  auto t = exec_rest(sq, src, {}, fast());
  EXPECT_EQ(t.rows, (std::vector<Row>{{"Indole", "https://hmdb.ca/metabolites/HMDB0000738"}}));
}

TEST(Rest, UnboundKeyIsAnError) {
  Mock m;
  auto sq = pathway_subquery();
  EXPECT_THROW(exec_rest(sq, kegg_at(m.server.endpoint()), {}, fast()), AdapterError);
}

TEST(Rest, MalformedResponses) {
  for (const char* body : {"not json", "{\"a\":1}", "[1,2]", "[{\"gene_symbol\":\"TNF\"}]"}) {
    Canned c(body);
    EXPECT_THROW(exec_rest(pathway_subquery(), kegg_at(c.endpoint()), genes({"TNF"}), fast()), AdapterError) << body;
  }
}

TEST(Rest, NestedResponseFields) {
  Canned c(R"([{"gene":{"symbol":"TNF"},"pathway":{"id":"hsa04668","img":"/p/hsa04668"},"count":3}])");
  auto catalog = SourceCatalog::parse(R"({"sources":[{"id":"kegg","kind":"rest","endpoint":")" + c.endpoint() +
                                      R"(","relations":[{"name":"kegg.gene_pathway",
      "columns":["gene_symbol","pathway_id","pathway_image_url"],"key_column":"gene_symbol",
      "link_columns":["pathway_image_url"],"link_base":"https://x.org",
      "response":{"gene_symbol":"gene.symbol","pathway_id":"pathway.id","pathway_image_url":"pathway.img"}}]}]})");
  auto t = exec_rest(pathway_subquery(), *catalog.find_source("kegg"), genes({"TNF"}), fast());
  EXPECT_EQ(t.rows, (std::vector<Row>{{"TNF", "hsa04668", "https://x.org/p/hsa04668"}}));
}

TEST(Rest, NonStringCellsAreRendered) {
  Canned c(R"([{"gene_symbol":"TNF","pathway_id":42,"pathway_image_url":"/p"}])");
  auto t = exec_rest(pathway_subquery(), kegg_at(c.endpoint()), genes({"TNF"}), fast());
  EXPECT_EQ(t.rows.at(0)[1], "42");
}
