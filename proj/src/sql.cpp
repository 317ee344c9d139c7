#include "fedlog/sql.hpp"

#include <algorithm>
#include <map>
#include <optional>
#include <set>

#include "fedlog/error.hpp"

namespace fedlog {

std::string sql_quote(const std::string& value) {
  std::string out = "'";
  for (char c : value) {
    if (c == '\'') out += '\'';
    out += c;
  }
  return out + "'";
}

namespace {

struct TableRef {
  const RelationSchema* relation = nullptr;
  std::string alias;
  std::vector<const Atom*> atoms;
};

struct ColumnRef {
  std::size_t table;
  std::size_t column;
  bool operator==(const ColumnRef&) const = default;
};

}  // namespace

SqlStatement to_sql(const SubQuery& subquery, const SourceCatalog& catalog, const BindingBatch& bindings,
                    SqlOptions options) {
  if (subquery.atoms.empty()) throw PlanError("sub-query " + std::to_string(subquery.id) + " has no atoms");

  std::vector<TableRef> tables;
  // (relation, key term) -> table index, for merging
  std::map<std::pair<std::string, Term>, std::size_t> merged;
  std::map<std::string, int> alias_uses;

  for (const auto& atom : subquery.atoms) {
    auto ref = catalog.find_relation(atom.predicate);
    if (!ref) throw PlanError(print_atom(atom) + ": relation not in the source catalog");
    const RelationSchema* rel = ref->relation;
    if (rel->columns.size() != atom.terms.size()) {
      throw PlanError(print_atom(atom) + ": arity differs from " + rel->name);
    }
    const Term& key = atom.terms[rel->key_index()];
    if (options.merge_on_key && rel->unique_key && !is_fresh(key)) {
      auto [it, inserted] = merged.emplace(std::make_pair(rel->name, key), tables.size());
      if (!inserted) {
        tables[it->second].atoms.push_back(&atom);
        continue;
      }
    }
    TableRef t;
    t.relation = rel;
    int n = ++alias_uses[rel->table_name()];
    t.alias = n == 1 ? rel->table_name() : rel->table_name() + "_" + std::to_string(n);
    t.atoms.push_back(&atom);
    tables.push_back(std::move(t));
  }

  SqlStatement out;
  auto qualified = [&](ColumnRef c) { return tables[c.table].alias + "." + tables[c.table].relation->columns[c.column]; };

  std::vector<std::string> var_order;
  std::map<std::string, std::vector<ColumnRef>> occurrences;
  std::vector<std::string> filters;

  for (std::size_t ti = 0; ti < tables.size(); ++ti) {
    const auto& t = tables[ti];
    std::map<std::size_t, std::string> fixed;
    for (const Atom* atom : t.atoms) {
      for (std::size_t ci = 0; ci < atom->terms.size(); ++ci) {
        const Term& term = atom->terms[ci];
        if (const auto* c = std::get_if<Constant>(&term)) {
          auto [it, inserted] = fixed.emplace(ci, c->value);
          if (inserted) {
            filters.push_back(qualified({ti, ci}) + " = " + sql_quote(c->value));
          } else if (it->second != c->value) {
            out.warnings.push_back(qualified({ti, ci}) + " must equal both " + sql_quote(it->second) + " and " +
                                   sql_quote(c->value) + "; the sub-query is unsatisfiable");
            out.unsatisfiable = true;
          }
        } else if (const auto* v = variable_name(term)) {
          auto& occ = occurrences[*v];
          if (occ.empty()) var_order.push_back(*v);
          ColumnRef here{ti, ci};
          if (std::find(occ.begin(), occ.end(), here) == occ.end()) occ.push_back(here);
        }
      }
    }
  }

  std::vector<std::string> joins;
  for (const auto& v : var_order) {
    const auto& occ = occurrences[v];
    for (std::size_t i = 1; i < occ.size(); ++i) joins.push_back(qualified(occ.front()) + " = " + qualified(occ[i]));
  }

  for (std::size_t bi = 0; bi < bindings.vars.size(); ++bi) {
    const auto& var = bindings.vars[bi];
    auto it = occurrences.find(var);
    if (it == occurrences.end()) continue;
    auto values = bindings.values_of(var);
    if (values.empty()) {
      out.unsatisfiable = true;
      continue;
    }
    std::string list;
    for (std::size_t i = 0; i < values.size(); ++i) list += (i ? "," : "") + sql_quote(values[i]);
    filters.push_back(qualified(it->second.front()) + " IN (" + list + ")");
  }

  std::string select;
  for (const auto& v : subquery.output_vars) {
    auto it = occurrences.find(v);
    if (it == occurrences.end()) throw PlanError("output variable " + v + " is not bound in sub-query " + std::to_string(subquery.id));
    ColumnRef c = it->second.front();
    const RelationSchema* rel = tables[c.table].relation;
    bool link = rel->is_link(rel->columns[c.column]);
    if (!select.empty()) select += ", ";
    select += qualified(c) + " AS \"" + v + "\"";
    out.columns.push_back(v);
    out.is_link.push_back(link);
    out.link_bases.push_back(link ? rel->link_base : "");
  }
  if (select.empty()) select = "1";

  std::string from;
  for (const auto& t : tables) {
    if (!from.empty()) from += ", ";
    from += t.relation->name;
    if (t.alias != t.relation->table_name()) from += " AS " + t.alias;
  }

  std::vector<std::string> where = joins;
  where.insert(where.end(), filters.begin(), filters.end());
  if (out.unsatisfiable) where.push_back("1=0");

  out.text = "SELECT " + select + "\nFROM " + from;
  for (std::size_t i = 0; i < where.size(); ++i) out.text += (i ? "\n  AND " : "\nWHERE ") + where[i];
  if (subquery.output_vars.empty()) out.text += "\nLIMIT 1";
  out.text += ";";
  return out;
}

}  // namespace fedlog
