#pragma once

#include "fedlog/catalog.hpp"
#include "fedlog/datalog.hpp"
#include "fedlog/rule_repository.hpp"

namespace fedlog {

/// Unfolds every relationship/attribute atom through its mapping rule into a
/// source atom. Rule-body placeholders become fresh variables numbered by
/// column position; the head is kept. Source atoms already in the body pass
/// through after an arity check against the catalog.
DatalogQuery rewrite(const DatalogQuery& query, const RuleRepository& rules, const SourceCatalog& catalog);

}  // namespace fedlog
