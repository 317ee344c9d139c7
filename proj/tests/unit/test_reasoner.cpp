#include <gtest/gtest.h>

#include "fedlog/error.hpp"
#include "fedlog/reasoner.hpp"
#include "naive_eval.hpp"
#include "test_env.hpp"

using namespace fedlog;

namespace {

struct Fixture {
  Ontology onto = Ontology::load_file(testenv::data_dir() / "sgmo.onto");
  RuleRepository rules = RuleRepository::build(onto, load_mapping_dir(testenv::data_dir() / "maps"));
};

const Fixture& fx() {
  static const Fixture f;
  return f;
}

}  // namespace

TEST(Reasoner, GoldenFragment) {
  auto in = parse_query(testenv::read_text(testenv::data_dir() / "queries/q1_fragment.dlog"), {.require_safe_head = false});
  auto expected = testenv::read_text(testenv::data_dir() / "queries/q1_fragment_reasoned.dlog");
  auto r = reason(in, fx().onto, fx().rules);
  ASSERT_EQ(r.branches.size(), 1u);
  EXPECT_EQ(print_canonical(r.query()), expected);
  ASSERT_EQ(r.report.removed_atoms.size(), 2u);
  EXPECT_EQ(print_atom(r.report.removed_atoms[0]), "class:Swine(Swine_index)");
  EXPECT_EQ(print_atom(r.report.removed_atoms[1]), "class:Microbiota(Microbe_id)");
  EXPECT_TRUE(r.report.flipped_atoms.empty());
}

TEST(Reasoner, KeepsClassAtomNotImplied) {
  auto q = parse_query("?(G):- class:Gene(G), attribute:swine_id(S,G).");
  auto r = reason(q, fx().onto, fx().rules);
  EXPECT_EQ(r.query().body.size(), 2u);
}

TEST(Reasoner, RemovesClassImpliedByRange) {
  auto q = parse_query("?(G):- class:Gene(G), relationship:changes_the_expression_by_microbiota(M,G).");
  auto r = reason(q, fx().onto, fx().rules);
  ASSERT_EQ(r.query().body.size(), 1u);
  EXPECT_EQ(r.query().body[0].kind, AtomKind::Relationship);
}

TEST(Reasoner, InverseFlipPreservesAnswers) {
  auto q = parse_query("?(S,M):- relationship:is_hosted_by(M,S,<100>).");
  auto r = reason(q, fx().onto, fx().rules);
  ASSERT_EQ(r.branches.size(), 1u);
  EXPECT_EQ(print_atom(r.query().body[0]), "relationship:is_host_of(S,M,<100>)");
  ASSERT_EQ(r.report.flipped_atoms.size(), 1u);

  // ten host facts, the inverse holding by definition
  oracle::FactBase db;
  for (int i = 0; i < 10; ++i) {
    std::string s = "S0" + std::to_string(i % 4), m = "M00" + std::to_string(i), day = i % 3 ? "100" : "155";
    db.add(AtomKind::Relationship, "is_host_of", {s, m, day});
    db.add(AtomKind::Relationship, "is_hosted_by", {m, s, day});
  }
  auto before = oracle::evaluate(q, db);
  auto after = oracle::evaluate(r.query(), db);
  EXPECT_EQ(before, after);
  EXPECT_EQ(after.size(), 6u);
}

TEST(Reasoner, NoFlipWhenBothOrNeitherMapped) {
  auto q = parse_query("?(S,M):- relationship:is_host_of(S,M,<100>).");
  auto r = reason(q, fx().onto, fx().rules);
  EXPECT_TRUE(r.report.flipped_atoms.empty());
  EXPECT_EQ(r.query(), q);
}

TEST(Reasoner, SubPropertyExpansionIsUnion) {
  auto q = parse_query("?(M,G):- relationship:regulates_gene(M,G), attribute:microbe_name(X,M).");
  auto r = reason(q, fx().onto, fx().rules);
  ASSERT_EQ(r.branches.size(), 2u);
  EXPECT_TRUE(r.is_union());
  EXPECT_EQ(r.branches[0].body[0].predicate, "downregulates_gene");
  EXPECT_EQ(r.branches[1].body[0].predicate, "upregulates_gene");
  ASSERT_EQ(r.report.expansions.size(), 1u);
  EXPECT_EQ(r.report.expansions[0].branches.size(), 2u);

  oracle::FactBase db;
  db.add(AtomKind::Relationship, "upregulates_gene", {"Lactobacillus", "IL10"});
  db.add(AtomKind::Relationship, "downregulates_gene", {"Prevotella", "TNF"});
  db.add(AtomKind::Relationship, "downregulates_gene", {"Lactobacillus", "TNF"});
  for (const auto& t : db.get(AtomKind::Relationship, "upregulates_gene")) db.add(AtomKind::Relationship, "regulates_gene", t);
  for (const auto& t : db.get(AtomKind::Relationship, "downregulates_gene")) db.add(AtomKind::Relationship, "regulates_gene", t);
  db.add(AtomKind::Attribute, "microbe_name", {"M1", "Lactobacillus"});
  db.add(AtomKind::Attribute, "microbe_name", {"M2", "Prevotella"});
  EXPECT_EQ(oracle::evaluate(q, db), oracle::evaluate_union(r.branches, db));
  EXPECT_EQ(oracle::evaluate(q, db).size(), 3u);
}

TEST(Reasoner, ReasoningIsIdempotent) {
  auto q = parse_query("?(M,G):- class:Microbiota(X), relationship:regulates_gene(X,G), attribute:microbe_name(X,M).");
  auto once = reason(q, fx().onto, fx().rules);
  auto twice = reason(once, fx().onto, fx().rules);
  EXPECT_EQ(once.branches, twice.branches);
  EXPECT_TRUE(twice.report.removed_atoms.empty());
}

TEST(Reasoner, DomainViolationStrictAndLenient) {
  auto q = parse_query("?(X,N):- class:Swine(X), attribute:microbe_name(X,N).");
  try {
    reason(q, fx().onto, fx().rules);
    FAIL();
  } catch (const ReasoningError& e) {
    EXPECT_EQ(e.kind(), ReasoningError::Kind::DomainViolation);
    EXPECT_EQ(e.stage(), "reason");
  }
  auto r = reason(q, fx().onto, fx().rules, {.strict_domains = false});
  ASSERT_EQ(r.report.validation_notes.size(), 1u);
  EXPECT_EQ(r.query(), q);
  EXPECT_NE(format_report(r.report).find("note"), std::string::npos);
}

TEST(Reasoner, DomainViolationThroughRelationship) {
  auto q = parse_query("?(S,N):- relationship:is_host_of(S,M,<100>), attribute:microbe_name(S,N).");
  EXPECT_THROW(reason(q, fx().onto, fx().rules), ReasoningError);
}

TEST(Reasoner, UnknownPredicatesAndArity) {
  auto kind_of = [&](const std::string& text) {
    try {
      reason(parse_query(text), fx().onto, fx().rules);
    } catch (const ReasoningError& e) {
      return e.kind();
    }
    ADD_FAILURE() << "no error for " << text;
    return ReasoningError::Kind::DomainViolation;
  };
  EXPECT_EQ(kind_of("?(X):- class:Pig(X)."), ReasoningError::Kind::UnknownPredicate);
  EXPECT_EQ(kind_of("?(X):- relationship:eats(X,Y)."), ReasoningError::Kind::UnknownPredicate);
  EXPECT_EQ(kind_of("?(X):- attribute:weight(X,Y)."), ReasoningError::Kind::UnknownPredicate);
  EXPECT_EQ(kind_of("?(X):- relationship:is_host_of(X,Y)."), ReasoningError::Kind::ArityMismatch);
  EXPECT_EQ(kind_of("?(X):- attribute:microbe_time(X,Y), relationship:microbe_time(X,Y)."),
            ReasoningError::Kind::UnknownPredicate);
}

TEST(Reasoner, ReportFormatting) {
  auto q = parse_query("?(S,M):- class:Swine(S), relationship:is_hosted_by(M,S,<100>).");
  auto text = format_report(reason(q, fx().onto, fx().rules).report);
  EXPECT_NE(text.find("removed  class:Swine(S)"), std::string::npos);
  EXPECT_NE(text.find("flipped  relationship:is_hosted_by(M,S,<100>) => relationship:is_host_of(S,M,<100>)"),
            std::string::npos);
}
