#include "fedlog/rewriter.hpp"

#include <map>

#include "fedlog/error.hpp"

namespace fedlog {

namespace {

void check_arity(const Atom& atom, const SourceCatalog& catalog) {
  auto ref = catalog.find_relation(atom.predicate);
  if (!ref) {
    throw RewriteError(RewriteError::Kind::ArityMismatch, print_atom(atom) + ": relation not in the source catalog");
  }
  if (ref->relation->columns.size() != atom.terms.size()) {
    throw RewriteError(RewriteError::Kind::ArityMismatch,
                       print_atom(atom) + " has " + std::to_string(atom.terms.size()) + " terms but " + atom.predicate +
                           " has " + std::to_string(ref->relation->columns.size()) + " columns");
  }
}

Term substitute(const std::map<std::string, Term>& subst, const Term& t) {
  if (const auto* name = variable_name(t)) {
    if (auto it = subst.find(*name); it != subst.end()) return it->second;
  }
  return t;
}

}  // namespace

DatalogQuery rewrite(const DatalogQuery& query, const RuleRepository& rules, const SourceCatalog& catalog) {
  DatalogQuery out;
  out.head = query.head;
  // query variables forced to a constant by a rule head
  std::map<std::string, Term> query_subst;

  for (const auto& atom : query.body) {
    if (atom.kind == AtomKind::Source) {
      check_arity(atom, catalog);
      out.body.push_back(atom);
      continue;
    }
    if (atom.kind == AtomKind::Class) {
      throw RewriteError(RewriteError::Kind::UnmappedPredicate,
                         print_atom(atom) + ": class atoms have no mapping; reason the query first");
    }
    const MappingRule* rule = rules.find_mapping(mapping_kind_of(atom.kind), atom.predicate);
    if (!rule) throw RewriteError(RewriteError::Kind::UnmappedPredicate, "no mapping rule for " + print_atom(atom));
    if (rule->head.terms.size() != atom.terms.size()) {
      throw RewriteError(RewriteError::Kind::ArityMismatch,
                         print_atom(atom) + " does not match the arity of rule head " + print_atom(rule->head));
    }

    std::map<std::string, Term> binding;
    for (std::size_t i = 0; i < atom.terms.size(); ++i) {
      const Term& h = rule->head.terms[i];
      const Term& a = atom.terms[i];
      if (const auto* hv = variable_name(h)) {
        binding.emplace(*hv, a);
        continue;
      }
      // rule head carries a constant
      if (is_constant(a)) {
        if (a != h) {
          throw RewriteError(RewriteError::Kind::UnificationFailure,
                             print_atom(atom) + " clashes with rule head " + print_atom(rule->head) + " at position " +
                                 std::to_string(i + 1));
        }
      } else if (const auto* av = variable_name(a)) {
        auto [it, inserted] = query_subst.emplace(*av, h);
        if (!inserted && it->second != h) {
          throw RewriteError(RewriteError::Kind::UnificationFailure,
                             "variable " + *av + " must equal both " + print_term(it->second) + " and " + print_term(h));
        }
      } else {
        throw RewriteError(RewriteError::Kind::UnificationFailure, print_atom(atom) + ": fresh variable in query atom");
      }
    }

    Atom src;
    src.kind = AtomKind::Source;
    src.predicate = rule->body.predicate;
    std::map<std::string, int> placeholder;
    for (std::size_t pos = 0; pos < rule->body.terms.size(); ++pos) {
      const Term& b = rule->body.terms[pos];
      if (const auto* bv = variable_name(b)) {
        if (auto it = binding.find(*bv); it != binding.end()) {
          src.terms.push_back(it->second);
        } else {
          auto [pit, _] = placeholder.emplace(*bv, static_cast<int>(pos));
          src.terms.push_back(FreshVar{pit->second});
        }
      } else {
        src.terms.push_back(b);
      }
    }
    check_arity(src, catalog);
    out.body.push_back(std::move(src));
  }

  if (!query_subst.empty()) {
    for (const auto& v : out.head) {
      if (query_subst.contains(v)) {
        throw RewriteError(RewriteError::Kind::UnificationFailure,
                           "head variable " + v + " would be fixed to constant " + print_term(query_subst.at(v)));
      }
    }
    for (auto& a : out.body) {
      for (auto& t : a.terms) t = substitute(query_subst, t);
    }
  }
  return out;
}

}  // namespace fedlog
