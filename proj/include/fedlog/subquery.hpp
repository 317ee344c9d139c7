#pragma once

#include <string>
#include <vector>

#include "fedlog/datalog.hpp"
#include "fedlog/result_table.hpp"

namespace fedlog {

/// Atoms answered by one source in one call.
struct SubQuery {
  int id = 0;  // 1-based position in the plan
  std::string source_id;
  std::vector<Atom> atoms;
  /// Variables already bound by earlier sub-queries.
  std::vector<std::string> input_vars;
  /// Variables this sub-query reports (head or shared with another sub-query).
  std::vector<std::string> output_vars;

  bool operator==(const SubQuery&) const = default;
};

/// Distinct upstream values for a sub-query's input variables.
struct BindingBatch {
  std::vector<std::string> vars;
  std::vector<Row> tuples;

  bool empty() const { return vars.empty(); }
  /// Distinct values of one variable in first-seen order.
  std::vector<std::string> values_of(const std::string& var) const;
};

}  // namespace fedlog
