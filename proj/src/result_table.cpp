#include "fedlog/result_table.hpp"

#include <algorithm>
#include <map>
#include <stdexcept>

namespace fedlog {

std::string_view to_string(ColumnKind kind) { return kind == ColumnKind::Link ? "link" : "scalar"; }

std::optional<std::size_t> ResultTable::column_index(std::string_view name) const {
  for (std::size_t i = 0; i < columns.size(); ++i) {
    if (columns[i].name == name) return i;
  }
  return std::nullopt;
}

std::vector<std::string> ResultTable::column_names() const {
  std::vector<std::string> out;
  out.reserve(columns.size());
  for (const auto& c : columns) out.push_back(c.name);
  return out;
}

ResultTable ResultTable::project(const std::vector<std::string>& names) const {
  std::vector<std::size_t> idx;
  ResultTable out;
  for (const auto& n : names) {
    auto i = column_index(n);
    if (!i) throw std::out_of_range("no column named " + n);
    idx.push_back(*i);
    out.columns.push_back(columns[*i]);
  }
  out.rows.reserve(rows.size());
  for (const auto& r : rows) {
    Row pr;
    pr.reserve(idx.size());
    for (auto i : idx) pr.push_back(r[i]);
    out.rows.push_back(std::move(pr));
  }
  return out;
}

void ResultTable::deduplicate() {
  std::set<Row> seen;
  std::vector<Row> kept;
  for (auto& r : rows) {
    if (seen.insert(r).second) kept.push_back(std::move(r));
  }
  rows = std::move(kept);
}

ResultTable ResultTable::natural_join(const ResultTable& right) const {
  std::vector<std::pair<std::size_t, std::size_t>> shared;
  std::vector<std::size_t> right_only;
  ResultTable out(columns);
  for (std::size_t j = 0; j < right.columns.size(); ++j) {
    if (auto i = column_index(right.columns[j].name)) {
      shared.emplace_back(*i, j);
    } else {
      right_only.push_back(j);
      out.columns.push_back(right.columns[j]);
    }
  }
  std::multimap<Row, std::size_t> build;
  for (std::size_t j = 0; j < right.rows.size(); ++j) {
    Row key;
    for (auto [li, rj] : shared) key.push_back(right.rows[j][rj]);
    build.emplace(std::move(key), j);
  }
  for (const auto& lr : rows) {
    Row key;
    for (auto [li, rj] : shared) key.push_back(lr[li]);
    auto [lo, hi] = build.equal_range(key);
    for (auto it = lo; it != hi; ++it) {
      Row joined = lr;
      for (auto j : right_only) joined.push_back(right.rows[it->second][j]);
      out.rows.push_back(std::move(joined));
    }
  }
  return out;
}

void ResultTable::validate() const {
  for (const auto& r : rows) {
    if (r.size() != columns.size()) throw std::logic_error("row width differs from column count");
    for (std::size_t i = 0; i < columns.size(); ++i) {
      if (columns[i].kind == ColumnKind::Link && !r[i].empty() && !is_absolute_url(r[i])) {
        throw std::logic_error("link cell is not an absolute URL: " + r[i]);
      }
    }
  }
}

nlohmann::json ResultTable::to_json() const {
  nlohmann::json cols = nlohmann::json::array();
  for (const auto& c : columns) cols.push_back({{"name", c.name}, {"kind", std::string(to_string(c.kind))}});
  return {{"columns", cols}, {"rows", rows}};
}

ResultTable ResultTable::from_json(const nlohmann::json& j) {
  ResultTable t;
  for (const auto& c : j.at("columns")) {
    t.columns.push_back({c.at("name").get<std::string>(),
                         c.value("kind", std::string("scalar")) == "link" ? ColumnKind::Link : ColumnKind::Scalar});
  }
  t.rows = j.at("rows").get<std::vector<Row>>();
  return t;
}

std::string ResultTable::to_tsv() const {
  std::string out;
  for (std::size_t i = 0; i < columns.size(); ++i) out += (i ? "\t" : "") + columns[i].name;
  out += '\n';
  for (const auto& r : rows) {
    for (std::size_t i = 0; i < r.size(); ++i) out += (i ? "\t" : "") + r[i];
    out += '\n';
  }
  return out;
}

bool is_absolute_url(std::string_view text) {
  return text.starts_with("http://") || text.starts_with("https://");
}

std::string absolute_link(std::string_view base, std::string_view value) {
  if (value.empty() || is_absolute_url(value)) return std::string(value);
  std::string b(base);
  if (!b.empty() && b.back() == '/' && value.front() == '/') b.pop_back();
  if (!b.empty() && b.back() != '/' && value.front() != '/') b += '/';
  return b + std::string(value);
}

}  // namespace fedlog
