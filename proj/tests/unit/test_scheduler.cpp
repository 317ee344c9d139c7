#include <gtest/gtest.h>

#include <algorithm>
#include <random>

#include "fedlog/error.hpp"
#include "fedlog/reasoner.hpp"
#include "fedlog/rewriter.hpp"
#include "fedlog/scheduler.hpp"
#include "memory_adapter.hpp"
#include "test_env.hpp"

using namespace fedlog;

namespace {

const char* kToyCatalog = R"({"sources":[
  {"id":"a","kind":"relational","relations":[
     {"name":"a.r","columns":["x","y"],"key_column":"x","unique_key":false},
     {"name":"a.s","columns":["y","z"],"key_column":"y","unique_key":false}]},
  {"id":"b","kind":"relational","relations":[
     {"name":"b.t","columns":["x","z"],"key_column":"x","unique_key":false}]},
  {"id":"c","kind":"rest","endpoint":"http://127.0.0.1:1/api","relations":[
     {"name":"c.u","columns":["k","v"],"key_column":"k","unique_key":false}]},
  {"id":"d","kind":"rest","endpoint":"http://127.0.0.1:1/api","relations":[
     {"name":"d.w","columns":["k","v"],"key_column":"k","unique_key":false}]}
]})";

const SourceCatalog& toy() {
  static const SourceCatalog c = SourceCatalog::parse(kToyCatalog);
  return c;
}

struct Registry {
  std::map<std::string, std::shared_ptr<testenv::MemoryAdapter>> by_id;
  AdapterRegistry reg;
  explicit Registry(const oracle::FactBase& db, const SourceCatalog& cat = toy()) {
    for (const auto& s : cat.sources()) {
      auto a = std::make_shared<testenv::MemoryAdapter>(db);
      by_id[s.id] = a;
      reg.add(s.id, a);
    }
  }
};

std::set<Row> answers(const SchedulingPlan& p, AdapterRegistry& reg) { return execute(p, reg).row_set(); }

DatalogQuery q1_rewritten() {
  auto onto = Ontology::load_file(testenv::data_dir() / "sgmo.onto");
  auto rules = RuleRepository::build(onto, load_mapping_dir(testenv::data_dir() / "maps"));
  auto catalog = SourceCatalog::load_file(testenv::data_dir() / "catalog.json");
  auto q = parse_query(
      "?(Microbe_name,Gene_symbol,Gene_kegg_pathway):- class:Swine(Swine_index), class:Microbiota(Microbe_id),"
      " relationship:is_host_of(Swine_index,Microbe_id,<100>), attribute:p_value_dpf_tpf_difference(Microbe_id,<1>),"
      " attribute:microbe_name(Microbe_id,Microbe_name), attribute:microbe_time(Microbe_id,<100>),"
      " relationship:changes_the_expression_by_microbiota(Microbe_name,Gene_symbol),"
      " relationship:is_involved_in_pathway(Gene_symbol,Gene_kegg_pathway).");
  return rewrite(reason(q, onto, rules).query(), rules, catalog);
}

}  // namespace

TEST(Scheduler, Q1SplitsIntoThreeSubqueries) {
  auto catalog = SourceCatalog::load_file(testenv::data_dir() / "catalog.json");
  auto p = plan(q1_rewritten(), catalog);
  ASSERT_EQ(p.subqueries.size(), 3u);
  EXPECT_EQ(p.subqueries[0].source_id, "pgmdb");
  EXPECT_EQ(p.subqueries[0].atoms.size(), 4u);
  EXPECT_TRUE(p.subqueries[0].input_vars.empty());
  EXPECT_EQ(p.subqueries[0].output_vars, (std::vector<std::string>{"Microbe_name"}));
  EXPECT_EQ(p.subqueries[1].source_id, "gutmgene");
  EXPECT_EQ(p.subqueries[1].input_vars, (std::vector<std::string>{"Microbe_name"}));
  EXPECT_EQ(p.subqueries[2].source_id, "kegg");
  EXPECT_EQ(p.subqueries[2].input_vars, (std::vector<std::string>{"Gene_symbol"}));
  EXPECT_EQ(p.head_columns[2].kind, ColumnKind::Link);
  EXPECT_EQ(p.head_columns[0].kind, ColumnKind::Scalar);
  EXPECT_TRUE(p.warnings.empty());
  auto text = format_plan(p);
  EXPECT_NE(text.find("sub-query 3 @kegg  in(Gene_symbol)"), std::string::npos);
}

TEST(Scheduler, SingleSourceGivesOneSubquery) {
  auto p = plan(parse_query("?(X,Z):- a.r(X,Y), a.s(Y,Z)."), toy());
  ASSERT_EQ(p.subqueries.size(), 1u);
  EXPECT_EQ(p.subqueries[0].atoms.size(), 2u);
  EXPECT_EQ(p.subqueries[0].output_vars, (std::vector<std::string>{"X", "Z"}));
}

TEST(Scheduler, UnconnectedAtomsOfOneSourceSplit) {
  auto p = plan(parse_query("?(X,Z):- a.r(X,Y), a.s(W,Z)."), toy());
  EXPECT_EQ(p.subqueries.size(), 2u);
  EXPECT_EQ(p.warnings.size(), 2u);
}

TEST(Scheduler, CartesianProduct) {
  oracle::FactBase db;
  for (auto x : {"1", "2", "3"}) db.add(AtomKind::Source, "a.r", {x, "y"});
  for (auto z : {"p", "q"}) db.add(AtomKind::Source, "b.t", {z, "w"});
  auto p = plan(parse_query("?(X,Z):- a.r(X,VAR_1), b.t(Z,VAR_1)."), toy());
  ASSERT_EQ(p.subqueries.size(), 2u);
  ASSERT_FALSE(p.warnings.empty());
  EXPECT_NE(p.warnings[0].find("Cartesian"), std::string::npos);
  Registry r(db);
  EXPECT_EQ(answers(p, r.reg).size(), 6u);
}

TEST(Scheduler, RestNeedsBoundKey) {
  EXPECT_THROW(plan(parse_query("?(V):- c.u(VAR_0,V)."), toy()), PlanError);
  EXPECT_THROW(plan(parse_query("?(K,V):- c.u(K,V)."), toy()), PlanError);
  // the key may be a constant
  EXPECT_NO_THROW(plan(parse_query("?(V):- c.u(<k1>,V)."), toy()));
  // REST ordered after the producer even when declared first
  auto p = plan(parse_query("?(V):- c.u(K,V), b.t(K,VAR_1)."), toy());
  EXPECT_EQ(p.subqueries[0].source_id, "b");
  EXPECT_EQ(p.subqueries[1].source_id, "c");
}

TEST(Scheduler, CyclicDependency) {
  try {
    plan(parse_query("?(X,Y):- c.u(X,Y), d.w(Y,X)."), toy());
    FAIL();
  } catch (const PlanError& e) {
    EXPECT_NE(std::string(e.what()).find("cyclic"), std::string::npos);
  }
}

TEST(Scheduler, OtherPlanErrors) {
  EXPECT_THROW(plan(parse_query("?(X):- class:K(X)."), toy()), PlanError);
  EXPECT_THROW(plan(parse_query("?(X):- z.q(X)."), toy()), PlanError);
  EXPECT_THROW(plan(DatalogQuery{{"X"}, {}}, toy()), PlanError);
}

TEST(Scheduler, EmptyIntermediateShortCircuits) {
  oracle::FactBase db;
  db.add(AtomKind::Source, "b.t", {"1", "2"});
  db.add(AtomKind::Source, "c.u", {"1", "v"});
  auto p = plan(parse_query("?(X,V):- a.r(X,Y), b.t(X,Z), c.u(X,V)."), toy());
  ASSERT_EQ(p.subqueries.size(), 3u);
  Registry r(db);
  PlanExecution run(p, r.reg);
  run.run_subquery(0);
  EXPECT_TRUE(run.short_circuited());
  EXPECT_EQ(run.run_subquery(1), "skipped: empty intermediate result");
  run.run_subquery(2);
  EXPECT_TRUE(run.consolidate().rows.empty());
  EXPECT_EQ(r.by_id["a"]->calls(), 1u);
  EXPECT_EQ(r.by_id["b"]->calls(), 0u);
  EXPECT_EQ(r.by_id["c"]->calls(), 0u);
}

TEST(Scheduler, BindingsCarryDistinctUpstreamValues) {
  oracle::FactBase db;
  for (auto [x, y] : std::vector<std::pair<const char*, const char*>>{{"1", "a"}, {"1", "b"}, {"2", "c"}}) {
    db.add(AtomKind::Source, "b.t", {x, y});
  }
  db.add(AtomKind::Source, "c.u", {"1", "v1"});
  db.add(AtomKind::Source, "c.u", {"3", "v3"});
  auto p = plan(parse_query("?(X,V):- b.t(X,Z), c.u(X,V)."), toy());
  Registry r(db);
  auto out = execute(p, r.reg);
  EXPECT_EQ(out.row_set(), (std::set<Row>{{"1", "v1"}}));
  ASSERT_EQ(r.by_id["c"]->seen_bindings.size(), 1u);
  EXPECT_EQ(r.by_id["c"]->seen_bindings[0].values_of("X"), (std::vector<std::string>{"1", "2"}));
}

TEST(Scheduler, AdapterFailureIsTagged) {
  oracle::FactBase db;
  db.add(AtomKind::Source, "b.t", {"1", "2"});
  auto p = plan(parse_query("?(X,V):- b.t(X,Z), c.u(X,V)."), toy());
  Registry r(db);
  r.by_id["c"]->before = [](const SubQuery&) { throw std::runtime_error("boom"); };
  try {
    execute(p, r.reg);
    FAIL();
  } catch (const AdapterError& e) {
    EXPECT_EQ(e.source_id(), "c");
    EXPECT_EQ(e.subquery_id(), 2);
  }
  AdapterRegistry empty;
  EXPECT_THROW(execute(p, empty), AdapterError);
}

namespace {

// Random fact base over the toy catalog plus a random connected-ish query.
struct Case {
  oracle::FactBase db;
  DatalogQuery query;
};

Case random_case(unsigned seed) {
  std::mt19937 rng(seed);
  auto pick = [&](int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng); };
  Case c;
  const std::vector<std::string> rels{"a.r", "a.s", "b.t", "c.u", "d.w"};
  for (const auto& r : rels) {
    int n = pick(0, 8);
    for (int i = 0; i < n; ++i) c.db.add(AtomKind::Source, r, {std::to_string(pick(0, 3)), std::to_string(pick(0, 3))});
  }
  std::vector<std::string> vars{"X0", "X1", "X2", "X3"};
  int n = pick(2, 5);
  for (int i = 0; i < n; ++i) {
    const auto& r = rels[pick(0, 4)];
    std::vector<Term> ts;
    for (int k = 0; k < 2; ++k) {
      int roll = pick(0, 9);
      if (roll < 7) {
        ts.push_back(Variable{vars[pick(0, 3)]});
      } else if (roll < 9 || k == 0) {
        ts.push_back(Constant{std::to_string(pick(0, 3))});
      } else {
        ts.push_back(FreshVar{k});
      }
    }
    c.query.body.push_back(Atom::source(r, ts));
  }
  for (const auto& v : query_variables(c.query)) {
    if (pick(0, 1)) c.query.head.push_back(v);
  }
  if (c.query.head.empty()) {
    auto vs = query_variables(c.query);
    if (!vs.empty()) c.query.head.push_back(vs.front());
  }
  return c;
}

}  // namespace

TEST(SchedulerProperty, PlanPartitionsBodyAndRespectsDependencies) {
  int planned = 0;
  for (unsigned seed = 1; seed <= 300; ++seed) {
    auto c = random_case(seed);
    if (c.query.head.empty()) continue;
    SchedulingPlan p;
    try {
      p = plan(c.query, toy());
    } catch (const PlanError&) {
      continue;
    }
    ++planned;
    std::vector<Atom> all;
    std::set<std::string> produced;
    for (const auto& sq : p.subqueries) {
      for (const auto& a : sq.atoms) {
        EXPECT_EQ(toy().find_relation(a.predicate)->source->id, sq.source_id);
        all.push_back(a);
      }
      for (const auto& v : sq.input_vars) EXPECT_TRUE(produced.contains(v)) << "seed " << seed;
      for (const auto& a : sq.atoms) {
        auto vs = atom_variables(a);
        produced.insert(vs.begin(), vs.end());
      }
    }
    auto body = c.query.body;
    std::sort(all.begin(), all.end());
    std::sort(body.begin(), body.end());
    EXPECT_EQ(all, body) << "seed " << seed;
  }
  EXPECT_GT(planned, 100);
}

TEST(SchedulerProperty, BindJoinMatchesNaiveEvaluation) {
  int checked = 0;
  for (unsigned seed = 1; seed <= 300; ++seed) {
    auto c = random_case(seed);
    if (c.query.head.empty()) continue;
    SchedulingPlan p;
    try {
      p = plan(c.query, toy());
    } catch (const PlanError&) {
      continue;
    }
    Registry r(c.db);
    EXPECT_EQ(answers(p, r.reg), oracle::evaluate(c.query, c.db)) << "seed " << seed << "\n" << print_canonical(c.query);
    ++checked;
  }
  EXPECT_GT(checked, 100);
}

TEST(SchedulerProperty, AnswersInvariantUnderAtomPermutation) {
  int checked = 0;
  for (unsigned seed = 1; seed <= 150; ++seed) {
    auto c = random_case(seed);
    if (c.query.head.empty()) continue;
    std::set<Row> reference;
    try {
      Registry r(c.db);
      reference = answers(plan(c.query, toy()), r.reg);
    } catch (const PlanError&) {
      continue;
    }
    std::mt19937 rng(seed);
    for (int k = 0; k < 3; ++k) {
      auto q = c.query;
      std::shuffle(q.body.begin(), q.body.end(), rng);
      Registry r(c.db);
      EXPECT_EQ(answers(plan(q, toy()), r.reg), reference) << "seed " << seed;
    }
    ++checked;
  }
  EXPECT_GT(checked, 50);
}
