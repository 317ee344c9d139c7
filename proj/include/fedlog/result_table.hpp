#pragma once

#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

namespace fedlog {

enum class ColumnKind { Scalar, Link };

std::string_view to_string(ColumnKind kind);

struct Column {
  std::string name;
  ColumnKind kind = ColumnKind::Scalar;

  bool operator==(const Column&) const = default;
};

using Row = std::vector<std::string>;

/// Named columns plus rows of text cells; the answer format of every stage.
struct ResultTable {
  std::vector<Column> columns;
  std::vector<Row> rows;

  ResultTable() = default;
  explicit ResultTable(std::vector<Column> cols) : columns(std::move(cols)) {}

  std::optional<std::size_t> column_index(std::string_view name) const;
  std::vector<std::string> column_names() const;

  /// Rows restricted to `names`, in that order. Throws on an unknown name.
  ResultTable project(const std::vector<std::string>& names) const;

  /// Removes duplicate rows, keeping first occurrences.
  void deduplicate();

  /// Natural join on every column name the two tables share; left columns
  /// first, then the right-only ones.
  ResultTable natural_join(const ResultTable& right) const;

  /// Rows as a set, for order-insensitive comparison.
  std::set<Row> row_set() const { return {rows.begin(), rows.end()}; }

  /// Row widths and link-cell shape. Throws std::logic_error on violation.
  void validate() const;

  nlohmann::json to_json() const;
  static ResultTable from_json(const nlohmann::json& j);

  /// Tab-separated text with a header line.
  std::string to_tsv() const;

  bool operator==(const ResultTable&) const = default;
};

bool is_absolute_url(std::string_view text);

/// `value` unchanged when it is already absolute, else `base` + `value`.
std::string absolute_link(std::string_view base, std::string_view value);

}  // namespace fedlog
