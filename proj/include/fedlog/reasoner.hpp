#pragma once

#include <string>
#include <utility>
#include <vector>

#include "fedlog/datalog.hpp"
#include "fedlog/ontology.hpp"
#include "fedlog/rule_repository.hpp"

namespace fedlog {

struct Expansion {
  Atom general;
  std::vector<Atom> branches;

  bool operator==(const Expansion&) const = default;
};

/// What the reasoner changed and why.
struct ReasoningReport {
  std::vector<Atom> removed_atoms;
  std::vector<std::pair<Atom, Atom>> flipped_atoms;
  std::vector<Expansion> expansions;
  std::vector<std::string> validation_notes;

  bool empty() const {
    return removed_atoms.empty() && flipped_atoms.empty() && expansions.empty() && validation_notes.empty();
  }
};

/// Reasoning output. A single branch is an ordinary query; several branches
/// form a union whose answers are the set union of the branch answers.
struct ReasonedQuery {
  std::vector<DatalogQuery> branches;
  ReasoningReport report;

  bool is_union() const { return branches.size() > 1; }
  const DatalogQuery& query() const { return branches.front(); }
};

struct ReasonOptions {
  /// When false, attribute-domain conflicts are reported as validation notes
  /// instead of raising ReasoningError.
  bool strict_domains = true;
};

/// Applies the ontology rules in the order inverse normalisation, sub-property
/// expansion, redundant class-atom removal, attribute-domain validation.
ReasonedQuery reason(const DatalogQuery& query, const Ontology& ontology, const RuleRepository& rules,
                     ReasonOptions options = {});

/// Reasons every branch of an already-reasoned union.
ReasonedQuery reason(const ReasonedQuery& input, const Ontology& ontology, const RuleRepository& rules,
                     ReasonOptions options = {});

std::string format_report(const ReasoningReport& report);

}  // namespace fedlog
