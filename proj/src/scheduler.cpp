#include "fedlog/scheduler.hpp"

#include <algorithm>
#include <map>
#include <numeric>
#include <set>

#include "fedlog/error.hpp"

namespace fedlog {

std::vector<std::string> BindingBatch::values_of(const std::string& var) const {
  auto it = std::find(vars.begin(), vars.end(), var);
  if (it == vars.end()) return {};
  auto col = static_cast<std::size_t>(it - vars.begin());
  std::vector<std::string> out;
  std::set<std::string> seen;
  for (const auto& t : tuples) {
    if (seen.insert(t[col]).second) out.push_back(t[col]);
  }
  return out;
}

namespace {

struct Group {
  std::string source_id;
  std::size_t source_order = 0;
  std::vector<std::size_t> atom_indices;
  std::set<std::string> vars;
  std::set<std::string> required;
};

bool intersects(const std::set<std::string>& a, const std::set<std::string>& b) {
  return std::any_of(a.begin(), a.end(), [&](const auto& v) { return b.contains(v); });
}

std::vector<std::string> ordered(const std::set<std::string>& vars, const std::vector<std::string>& order) {
  std::vector<std::string> out;
  for (const auto& v : order) {
    if (vars.contains(v)) out.push_back(v);
  }
  return out;
}

}  // namespace

SchedulingPlan plan(const DatalogQuery& rewritten, const SourceCatalog& catalog) {
  const auto& body = rewritten.body;
  if (body.empty()) throw PlanError("cannot plan a query with an empty body");

  std::vector<SourceCatalog::RelationRef> refs;
  for (const auto& atom : body) {
    if (atom.kind != AtomKind::Source) throw PlanError(print_atom(atom) + " is not a source atom; rewrite the query first");
    auto ref = catalog.find_relation(atom.predicate);
    if (!ref) throw PlanError(print_atom(atom) + ": relation not in the source catalog");
    refs.push_back(*ref);
  }

  // union-find over atoms of the same source that share a variable
  std::vector<std::size_t> parent(body.size());
  std::iota(parent.begin(), parent.end(), 0);
  auto find = [&](std::size_t x) {
    while (parent[x] != x) x = parent[x] = parent[parent[x]];
    return x;
  };
  for (std::size_t i = 0; i < body.size(); ++i) {
    auto vi = atom_variables(body[i]);
    for (std::size_t j = i + 1; j < body.size(); ++j) {
      if (refs[i].source != refs[j].source) continue;
      if (intersects(vi, atom_variables(body[j]))) parent[find(j)] = find(i);
    }
  }

  std::map<std::size_t, std::size_t> root_to_group;
  std::vector<Group> groups;
  for (std::size_t i = 0; i < body.size(); ++i) {
    auto root = find(i);
    auto [it, inserted] = root_to_group.emplace(root, groups.size());
    if (inserted) {
      Group g;
      g.source_id = refs[i].source->id;
      g.source_order = catalog.declaration_index(g.source_id);
      groups.push_back(std::move(g));
    }
    auto& g = groups[it->second];
    g.atom_indices.push_back(i);
    auto vars = atom_variables(body[i]);
    g.vars.insert(vars.begin(), vars.end());
    if (refs[i].source->kind == SourceKind::Rest) {
      const Term& key = body[i].terms[refs[i].relation->key_index()];
      if (is_fresh(key)) {
        throw PlanError(print_atom(body[i]) + ": REST relation needs its key column " + refs[i].relation->key_column +
                        " bound");
      }
      if (const auto* name = variable_name(key)) g.required.insert(*name);
    }
  }

  const auto var_order = query_variables(rewritten);
  std::set<std::string> head(rewritten.head.begin(), rewritten.head.end());

  SchedulingPlan out;
  out.head_vars = rewritten.head;

  for (std::size_t g = 0; g < groups.size() && groups.size() > 1; ++g) {
    bool shares = false;
    for (std::size_t h = 0; h < groups.size() && !shares; ++h) {
      shares = h != g && intersects(groups[g].vars, groups[h].vars);
    }
    if (!shares) {
      out.warnings.push_back("atoms on source " + groups[g].source_id +
                             " share no variable with the rest of the query; the answer is a Cartesian product");
    }
  }

  std::set<std::string> produced;
  std::vector<bool> scheduled(groups.size(), false);
  for (std::size_t step = 0; step < groups.size(); ++step) {
    std::optional<std::size_t> best;
    auto rank = [&](std::size_t g) {
      bool connected = produced.empty() || intersects(groups[g].vars, produced);
      return std::make_tuple(!connected, groups[g].source_order, groups[g].atom_indices.front());
    };
    for (std::size_t g = 0; g < groups.size(); ++g) {
      if (scheduled[g]) continue;
      bool ready = std::all_of(groups[g].required.begin(), groups[g].required.end(),
                               [&](const auto& v) { return produced.contains(v); });
      if (!ready) continue;
      if (!best || rank(g) < rank(*best)) best = g;
    }
    if (!best) {
      std::string waiting;
      for (std::size_t g = 0; g < groups.size(); ++g) {
        if (scheduled[g]) continue;
        for (const auto& v : groups[g].required) {
          if (!produced.contains(v)) waiting += " " + groups[g].source_id + " needs " + v + ";";
        }
      }
      throw PlanError("cyclic dependency between sub-queries:" + waiting);
    }
    const auto& g = groups[*best];
    scheduled[*best] = true;

    std::set<std::string> shared_elsewhere;
    for (std::size_t h = 0; h < groups.size(); ++h) {
      if (h == *best) continue;
      for (const auto& v : groups[h].vars) {
        if (g.vars.contains(v)) shared_elsewhere.insert(v);
      }
    }
    std::set<std::string> inputs, outputs;
    for (const auto& v : g.vars) {
      if (produced.contains(v)) inputs.insert(v);
      if (head.contains(v) || shared_elsewhere.contains(v)) outputs.insert(v);
    }

    SubQuery sq;
    sq.id = static_cast<int>(step) + 1;
    sq.source_id = g.source_id;
    for (auto i : g.atom_indices) sq.atoms.push_back(body[i]);
    sq.input_vars = ordered(inputs, var_order);
    sq.output_vars = ordered(outputs, var_order);
    out.join_keys.push_back(sq.input_vars);
    out.subqueries.push_back(std::move(sq));
    produced.insert(g.vars.begin(), g.vars.end());
  }

  for (const auto& v : rewritten.head) {
    if (!produced.contains(v)) throw PlanError("head variable " + v + " is not bound by any source atom");
    Column col{v, ColumnKind::Scalar};
    bool found = false;
    for (const auto& sq : out.subqueries) {
      for (const auto& atom : sq.atoms) {
        for (std::size_t p = 0; p < atom.terms.size() && !found; ++p) {
          const auto* name = variable_name(atom.terms[p]);
          if (!name || *name != v) continue;
          auto ref = catalog.find_relation(atom.predicate);
          if (ref->relation->is_link(ref->relation->columns[p])) col.kind = ColumnKind::Link;
          found = true;
        }
        if (found) break;
      }
      if (found) break;
    }
    out.head_columns.push_back(std::move(col));
  }
  return out;
}

std::string format_plan(const SchedulingPlan& plan) {
  auto join = [](const std::vector<std::string>& xs) {
    std::string s;
    for (std::size_t i = 0; i < xs.size(); ++i) s += (i ? "," : "") + xs[i];
    return s;
  };
  std::string out = "head: " + join(plan.head_vars) + "\n";
  for (const auto& sq : plan.subqueries) {
    out += "sub-query " + std::to_string(sq.id) + " @" + sq.source_id + "  in(" + join(sq.input_vars) + ") out(" +
           join(sq.output_vars) + ")\n";
    for (const auto& a : sq.atoms) out += "    " + print_atom(a) + "\n";
  }
  for (const auto& w : plan.warnings) out += "warning: " + w + "\n";
  return out;
}

PlanExecution::PlanExecution(const SchedulingPlan& plan, AdapterRegistry& adapters) : plan_(plan), adapters_(adapters) {}

std::string PlanExecution::run_subquery(std::size_t index) {
  const auto& sq = plan_.subqueries.at(index);
  if (empty_) return "skipped: empty intermediate result";
  auto* adapter = adapters_.find(sq.source_id);
  if (!adapter) throw AdapterError(sq.source_id, sq.id, "no adapter registered");

  BindingBatch batch;
  if (acc_ && !sq.input_vars.empty()) {
    ResultTable keys = acc_->project(sq.input_vars);
    keys.deduplicate();
    batch.vars = sq.input_vars;
    batch.tuples = std::move(keys.rows);
  }

  ResultTable rows;
  try {
    rows = adapter->execute(sq, batch);
  } catch (const AdapterError&) {
    throw;
  } catch (const std::exception& e) {
    throw AdapterError(sq.source_id, sq.id, e.what());
  }
  if (rows.column_names() != sq.output_vars) {
    throw AdapterError(sq.source_id, sq.id, "adapter returned unexpected columns");
  }
  std::size_t fetched = rows.rows.size();
  acc_ = acc_ ? acc_->natural_join(rows) : std::move(rows);
  if (acc_->rows.empty()) empty_ = true;
  return std::to_string(fetched) + " rows from " + sq.source_id + ", " + std::to_string(acc_->rows.size()) +
         " intermediate";
}

ResultTable PlanExecution::consolidate() const {
  ResultTable out(plan_.head_columns);
  if (empty_ || !acc_) return out;
  ResultTable projected = acc_->project(plan_.head_vars);
  projected.deduplicate();
  out.rows = std::move(projected.rows);
  return out;
}

ResultTable execute(const SchedulingPlan& plan, AdapterRegistry& adapters) {
  PlanExecution run(plan, adapters);
  for (std::size_t i = 0; i < plan.subqueries.size(); ++i) run.run_subquery(i);
  return run.consolidate();
}

}  // namespace fedlog
