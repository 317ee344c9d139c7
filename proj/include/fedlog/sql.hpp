#pragma once

#include <string>
#include <vector>

#include "fedlog/catalog.hpp"
#include "fedlog/subquery.hpp"

namespace fedlog {

struct SqlStatement {
  std::string text;
  /// Output variables in SELECT order.
  std::vector<std::string> columns;
  /// Per output column: link prefix when it reads a link column, else empty.
  std::vector<std::string> link_bases;
  std::vector<bool> is_link;
  std::vector<std::string> warnings;
  bool unsatisfiable = false;
};

struct SqlOptions {
  /// Fold atoms on one relation that share their key term into a single
  /// table reference (only for relations whose key is unique).
  bool merge_on_key = true;
};

/// SELECT / FROM / WHERE text for the atoms of one relational sub-query.
/// Bindings become `IN (...)` filters, one per input variable.
SqlStatement to_sql(const SubQuery& subquery, const SourceCatalog& catalog, const BindingBatch& bindings = {},
                    SqlOptions options = {});

std::string sql_quote(const std::string& value);

}  // namespace fedlog
