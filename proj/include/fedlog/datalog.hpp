#pragma once

#include <compare>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace fedlog {

// ---------------------------------------------------------------------------
// Terms
// ---------------------------------------------------------------------------

struct Variable {
  std::string name;
  auto operator<=>(const Variable&) const = default;
};

/// Literal written `<...>`. Untyped: compared as text everywhere.
struct Constant {
  std::string value;
  auto operator<=>(const Constant&) const = default;
};

/// Placeholder introduced by rewriting, printed `VAR_n`. Scoped to the atom
/// that carries it: equal indices in two different atoms are unrelated.
struct FreshVar {
  int index = 0;
  auto operator<=>(const FreshVar&) const = default;
};

using Term = std::variant<Variable, Constant, FreshVar>;

inline bool is_variable(const Term& t) { return std::holds_alternative<Variable>(t); }
inline bool is_constant(const Term& t) { return std::holds_alternative<Constant>(t); }
inline bool is_fresh(const Term& t) { return std::holds_alternative<FreshVar>(t); }

/// Name of a (non-fresh) variable term, or nullptr.
inline const std::string* variable_name(const Term& t) {
  const auto* v = std::get_if<Variable>(&t);
  return v ? &v->name : nullptr;
}

std::string print_term(const Term& term);

// ---------------------------------------------------------------------------
// Atoms
// ---------------------------------------------------------------------------

enum class AtomKind { Class, Relationship, Attribute, Source };

/// One body atom. For source atoms `predicate` is the qualified relation name
/// (`fsmm.microbe`); otherwise it is the ontology symbol.
struct Atom {
  AtomKind kind = AtomKind::Class;
  std::string predicate;
  std::vector<Term> terms;

  static Atom class_atom(std::string class_name, Term term);
  static Atom relationship(std::string property, std::vector<Term> terms);
  static Atom attribute(std::string property, Term subject, Term value);
  static Atom source(std::string relation, std::vector<Term> terms);

  bool operator==(const Atom&) const = default;
  auto operator<=>(const Atom&) const = default;
};

std::string_view atom_namespace(AtomKind kind);

/// `class:Swine(X)`, `fsmm.microbe(X,VAR_1)`; no terminating period.
std::string print_atom(const Atom& atom);

// ---------------------------------------------------------------------------
// Statements
// ---------------------------------------------------------------------------

struct DatalogQuery {
  std::vector<std::string> head;
  std::vector<Atom> body;

  bool operator==(const DatalogQuery&) const = default;
};

/// Storage-level rule: ontology predicate pattern :- one source atom.
struct MappingRule {
  Atom head;
  Atom body;

  bool operator==(const MappingRule&) const = default;
};

struct ParseOptions {
  /// Reject queries whose head names a variable absent from the body. Turned
  /// off only to read partial sub-query fragments.
  bool require_safe_head = true;
};

DatalogQuery parse_query(std::string_view text, ParseOptions options = {});

/// Parses a rule file. Heads may be bare (`name(X,Y)`) when preceded by a
/// `# relationship` or `# attribute` section line, or namespaced.
std::vector<MappingRule> parse_mapping_rules(std::string_view text);

/// Parses a list of `atom.` statements (the rewritten, source-level form).
std::vector<Atom> parse_statements(std::string_view text);

/// Throws SafetyError on the first head variable missing from the body.
void check_safety(const DatalogQuery& query);

/// Named variables in first-occurrence order over head then body.
std::vector<std::string> query_variables(const DatalogQuery& query);
std::set<std::string> atom_variables(const Atom& atom);

/// Deterministic text: `?(A,B):-` then one atom per line, comma-separated,
/// closed by a period. No whitespace inside atoms.
std::string print_canonical(const DatalogQuery& query);
std::string print_canonical(const MappingRule& rule);

/// Body atoms as standalone statements, one `atom.` per line.
std::string print_statements(const DatalogQuery& query);

}  // namespace fedlog
