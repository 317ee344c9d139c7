#pragma once

#include <optional>
#include <string>
#include <vector>

#include "fedlog/adapters.hpp"
#include "fedlog/catalog.hpp"
#include "fedlog/datalog.hpp"
#include "fedlog/result_table.hpp"
#include "fedlog/subquery.hpp"

namespace fedlog {

struct SchedulingPlan {
  /// Dependency order: each sub-query only consumes variables produced by
  /// the ones before it.
  std::vector<SubQuery> subqueries;
  std::vector<std::string> head_vars;
  /// Final column metadata, kinds taken from the catalog column that first
  /// binds each head variable.
  std::vector<Column> head_columns;
  /// join_keys[i]: variables sub-query i shares with the accumulated result.
  std::vector<std::vector<std::string>> join_keys;
  std::vector<std::string> warnings;
};

/// Groups the source atoms of a rewritten query into per-source connected
/// components and orders them. REST sub-queries need their key bound before
/// they run; remaining ties go to components connected to what is already
/// bound, then catalog order.
SchedulingPlan plan(const DatalogQuery& rewritten, const SourceCatalog& catalog);

std::string format_plan(const SchedulingPlan& plan);

/// Step-wise bind-join execution, so a workflow can drive one sub-query per
/// task. Once the intermediate result is empty, later steps are skipped.
class PlanExecution {
 public:
  PlanExecution(const SchedulingPlan& plan, AdapterRegistry& adapters);

  /// Runs sub-query `index` (0-based) against the accumulator; returns a
  /// short status line.
  std::string run_subquery(std::size_t index);
  ResultTable consolidate() const;

  bool short_circuited() const { return empty_; }
  const std::optional<ResultTable>& intermediate() const { return acc_; }

 private:
  const SchedulingPlan& plan_;
  AdapterRegistry& adapters_;
  std::optional<ResultTable> acc_;
  bool empty_ = false;
};

/// Runs every sub-query in plan order and consolidates.
ResultTable execute(const SchedulingPlan& plan, AdapterRegistry& adapters);

}  // namespace fedlog
