#include "fedlog/reasoner.hpp"

#include <algorithm>
#include <map>
#include <set>

#include "fedlog/error.hpp"

namespace fedlog {

namespace {

void check_predicates(const DatalogQuery& query, const Ontology& ontology) {
  for (const auto& atom : query.body) {
    switch (atom.kind) {
      case AtomKind::Class:
        if (!ontology.find_class(atom.predicate)) {
          throw ReasoningError(ReasoningError::Kind::UnknownPredicate, "unknown class in " + print_atom(atom));
        }
        break;
      case AtomKind::Relationship: {
        const auto* op = ontology.find_object_property(atom.predicate);
        if (!op) {
          throw ReasoningError(ReasoningError::Kind::UnknownPredicate, "unknown object property in " + print_atom(atom));
        }
        if (atom.terms.size() != op->arity()) {
          throw ReasoningError(ReasoningError::Kind::ArityMismatch,
                               print_atom(atom) + " has " + std::to_string(atom.terms.size()) + " terms, " + op->name +
                                   " takes " + std::to_string(op->arity()));
        }
        break;
      }
      case AtomKind::Attribute:
        if (!ontology.find_data_property(atom.predicate)) {
          throw ReasoningError(ReasoningError::Kind::UnknownPredicate, "unknown data property in " + print_atom(atom));
        }
        break;
      case AtomKind::Source:
        break;
    }
  }
}

bool mapped(const RuleRepository& rules, std::string_view property) {
  return rules.find_mapping(MappingKind::Relationship, property) != nullptr;
}

// Rule 3: q(x,y,quals) => r(y,x,quals) when only r is mapped.
void normalize_inverses(DatalogQuery& q, const RuleRepository& rules, ReasoningReport& report) {
  for (auto& atom : q.body) {
    if (atom.kind != AtomKind::Relationship) continue;
    const auto* inverse = rules.inverse_of(atom.predicate);
    if (!inverse || mapped(rules, atom.predicate) || !mapped(rules, *inverse)) continue;
    Atom flipped = atom;
    flipped.predicate = *inverse;
    std::swap(flipped.terms[0], flipped.terms[1]);
    report.flipped_atoms.emplace_back(atom, flipped);
    atom = std::move(flipped);
  }
}

// Rule 4: the first unmapped relationship atom with sub-properties, if any.
std::optional<std::size_t> expandable_atom(const DatalogQuery& q, const RuleRepository& rules) {
  for (std::size_t i = 0; i < q.body.size(); ++i) {
    const auto& atom = q.body[i];
    if (atom.kind != AtomKind::Relationship || mapped(rules, atom.predicate)) continue;
    if (!rules.sub_properties(atom.predicate).empty()) return i;
  }
  return std::nullopt;
}

std::vector<DatalogQuery> expand_hierarchy(DatalogQuery q, const RuleRepository& rules, ReasoningReport& report) {
  std::vector<DatalogQuery> done;
  std::vector<DatalogQuery> pending{std::move(q)};
  while (!pending.empty()) {
    auto cur = std::move(pending.back());
    pending.pop_back();
    normalize_inverses(cur, rules, report);
    auto idx = expandable_atom(cur, rules);
    if (!idx) {
      if (std::find(done.begin(), done.end(), cur) == done.end()) done.push_back(std::move(cur));
      continue;
    }
    const Atom general = cur.body[*idx];
    Expansion exp{general, {}};
    auto subs = rules.sub_properties(general.predicate);
    // reverse so branches come out in sub-property order
    for (auto it = subs.rbegin(); it != subs.rend(); ++it) {
      DatalogQuery branch = cur;
      branch.body[*idx].predicate = *it;
      pending.push_back(std::move(branch));
    }
    for (const auto& s : subs) {
      Atom a = general;
      a.predicate = s;
      exp.branches.push_back(std::move(a));
    }
    report.expansions.push_back(std::move(exp));
  }
  return done;
}

// Rule 2: drop C(t) when a relationship or attribute atom already places t in C.
void remove_redundant_classes(DatalogQuery& q, const RuleRepository& rules, ReasoningReport& report) {
  auto implied = [&](const Atom& cls) {
    const Term& t = cls.terms[0];
    for (const auto& atom : q.body) {
      if (atom.kind == AtomKind::Relationship) {
        const auto* dr = rules.domain_range(atom.predicate);
        if (!dr) continue;
        if (dr->symbols[1] == cls.predicate && atom.terms[0] == t) return true;
        if (dr->symbols[2] == cls.predicate && atom.terms[1] == t) return true;
      } else if (atom.kind == AtomKind::Attribute) {
        const auto* ai = rules.attr_inclusion(atom.predicate);
        if (ai && ai->symbols[1] == cls.predicate && atom.terms[0] == t) return true;
      }
    }
    return false;
  };
  bool changed = true;
  while (changed) {
    changed = false;
    for (auto it = q.body.begin(); it != q.body.end(); ++it) {
      if (it->kind == AtomKind::Class && implied(*it)) {
        report.removed_atoms.push_back(*it);
        q.body.erase(it);
        changed = true;
        break;
      }
    }
  }
}

// Rule 1: an attribute's subject must not be pinned to a different class.
void validate_attribute_domains(const DatalogQuery& q, const RuleRepository& rules, const ReasonOptions& options,
                                ReasoningReport& report) {
  std::map<Term, std::set<std::string>> constraints;
  for (const auto& atom : q.body) {
    if (atom.kind == AtomKind::Class) {
      constraints[atom.terms[0]].insert(atom.predicate);
    } else if (atom.kind == AtomKind::Relationship) {
      if (const auto* dr = rules.domain_range(atom.predicate)) {
        constraints[atom.terms[0]].insert(dr->symbols[1]);
        constraints[atom.terms[1]].insert(dr->symbols[2]);
      }
    } else if (atom.kind == AtomKind::Attribute) {
      if (const auto* ai = rules.attr_inclusion(atom.predicate)) constraints[atom.terms[0]].insert(ai->symbols[1]);
    }
  }
  for (const auto& atom : q.body) {
    if (atom.kind != AtomKind::Attribute) continue;
    const auto* ai = rules.attr_inclusion(atom.predicate);
    if (!ai) continue;
    const auto& domain = ai->symbols[1];
    for (const auto& cls : constraints[atom.terms[0]]) {
      if (cls == domain) continue;
      std::string msg = print_atom(atom) + ": subject " + print_term(atom.terms[0]) + " is constrained to class " + cls +
                        " but " + atom.predicate + " has domain " + domain;
      if (options.strict_domains) throw ReasoningError(ReasoningError::Kind::DomainViolation, msg);
      report.validation_notes.push_back(std::move(msg));
    }
  }
}

}  // namespace

ReasonedQuery reason(const DatalogQuery& query, const Ontology& ontology, const RuleRepository& rules,
                     ReasonOptions options) {
  check_predicates(query, ontology);
  ReasonedQuery out;
  out.branches = expand_hierarchy(query, rules, out.report);
  for (auto& branch : out.branches) {
    remove_redundant_classes(branch, rules, out.report);
    validate_attribute_domains(branch, rules, options, out.report);
  }
  // removal can make two expanded branches identical
  std::vector<DatalogQuery> unique;
  for (auto& b : out.branches) {
    if (std::find(unique.begin(), unique.end(), b) == unique.end()) unique.push_back(std::move(b));
  }
  out.branches = std::move(unique);
  return out;
}

ReasonedQuery reason(const ReasonedQuery& input, const Ontology& ontology, const RuleRepository& rules,
                     ReasonOptions options) {
  ReasonedQuery out;
  for (const auto& branch : input.branches) {
    auto r = reason(branch, ontology, rules, options);
    for (auto& b : r.branches) {
      if (std::find(out.branches.begin(), out.branches.end(), b) == out.branches.end()) out.branches.push_back(std::move(b));
    }
    auto& rep = out.report;
    rep.removed_atoms.insert(rep.removed_atoms.end(), r.report.removed_atoms.begin(), r.report.removed_atoms.end());
    rep.flipped_atoms.insert(rep.flipped_atoms.end(), r.report.flipped_atoms.begin(), r.report.flipped_atoms.end());
    rep.expansions.insert(rep.expansions.end(), r.report.expansions.begin(), r.report.expansions.end());
    rep.validation_notes.insert(rep.validation_notes.end(), r.report.validation_notes.begin(),
                                r.report.validation_notes.end());
  }
  return out;
}

std::string format_report(const ReasoningReport& report) {
  std::string out;
  for (const auto& a : report.removed_atoms) out += "removed  " + print_atom(a) + "\n";
  for (const auto& [before, after] : report.flipped_atoms) {
    out += "flipped  " + print_atom(before) + " => " + print_atom(after) + "\n";
  }
  for (const auto& e : report.expansions) {
    out += "expanded " + print_atom(e.general) + " =>";
    for (std::size_t i = 0; i < e.branches.size(); ++i) out += (i ? " | " : " ") + print_atom(e.branches[i]);
    out += "\n";
  }
  for (const auto& n : report.validation_notes) out += "note     " + n + "\n";
  return out;
}

}  // namespace fedlog
