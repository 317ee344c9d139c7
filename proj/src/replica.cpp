#include "fedlog/replica.hpp"

#include <sqlite3.h>

#include <algorithm>

#include "fedlog/csv.hpp"
#include "fedlog/error.hpp"

namespace fedlog {

namespace {

std::string quote_ident(const std::string& name) {
  std::string out = "\"";
  for (char c : name) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

std::pair<std::string, std::string> split_name(const std::string& qualified) {
  auto dot = qualified.rfind('.');
  if (dot == std::string::npos) return {"main", qualified};
  return {qualified.substr(0, dot), qualified.substr(dot + 1)};
}

struct Stmt {
  sqlite3_stmt* s = nullptr;
  ~Stmt() { sqlite3_finalize(s); }
};

}  // namespace

ReplicaStore::ReplicaStore() {
  if (sqlite3_open(":memory:", &db_) != SQLITE_OK) {
    std::string msg = db_ ? sqlite3_errmsg(db_) : "out of memory";
    sqlite3_close(db_);
    throw CatalogError("cannot open replica database: " + msg);
  }
}

ReplicaStore::~ReplicaStore() { sqlite3_close(db_); }

void ReplicaStore::exec(const std::string& sql) const {
  char* err = nullptr;
  if (sqlite3_exec(db_, sql.c_str(), nullptr, nullptr, &err) != SQLITE_OK) {
    std::string msg = err ? err : "unknown error";
    sqlite3_free(err);
    throw CatalogError("replica: " + msg);
  }
}

void ReplicaStore::ensure_schema(const std::string& schema) {
  if (schema == "main" || std::find(schemas_.begin(), schemas_.end(), schema) != schemas_.end()) return;
  exec("ATTACH DATABASE ':memory:' AS " + quote_ident(schema) + ";");
  schemas_.push_back(schema);
}

void ReplicaStore::load_relation(const RelationSchema& relation, const std::vector<std::vector<std::string>>& rows) {
  std::lock_guard lock(mu_);
  auto [schema, table] = split_name(relation.name);
  ensure_schema(schema);
  std::string target = quote_ident(schema) + "." + quote_ident(table);
  std::string cols, params;
  for (std::size_t i = 0; i < relation.columns.size(); ++i) {
    cols += (i ? ", " : "") + quote_ident(relation.columns[i]) + " TEXT";
    params += i ? ",?" : "?";
  }
  exec("DROP TABLE IF EXISTS " + target + ";");
  exec("CREATE TABLE " + target + " (" + cols + ");");

  exec("BEGIN;");
  Stmt ins;
  std::string sql = "INSERT INTO " + target + " VALUES (" + params + ");";
  if (sqlite3_prepare_v2(db_, sql.c_str(), -1, &ins.s, nullptr) != SQLITE_OK) {
    throw CatalogError("replica: " + std::string(sqlite3_errmsg(db_)));
  }
  for (const auto& row : rows) {
    if (row.size() != relation.columns.size()) {
      exec("ROLLBACK;");
      throw CatalogError("replica row for " + relation.name + " has " + std::to_string(row.size()) + " cells, expected " +
                         std::to_string(relation.columns.size()));
    }
    sqlite3_reset(ins.s);
    for (std::size_t i = 0; i < row.size(); ++i) {
      sqlite3_bind_text(ins.s, static_cast<int>(i + 1), row[i].data(), static_cast<int>(row[i].size()),
                        SQLITE_TRANSIENT);
    }
    if (sqlite3_step(ins.s) != SQLITE_DONE) {
      exec("ROLLBACK;");
      throw CatalogError("replica insert into " + relation.name + ": " + sqlite3_errmsg(db_));
    }
  }
  exec("COMMIT;");
}

void ReplicaStore::load_csv(const RelationSchema& relation, const std::filesystem::path& file) {
  CsvTable csv;
  try {
    csv = read_csv(file);
  } catch (const std::runtime_error& e) {
    throw CatalogError(e.what());
  }
  if (csv.header != relation.columns) {
    throw CatalogError(file.string() + ": header does not match the declared columns of " + relation.name);
  }
  load_relation(relation, csv.rows);
}

std::filesystem::path replica_file(const SourceDescriptor& source, const RelationSchema& relation) {
  return source.data_dir / (relation.name + ".csv");
}

std::shared_ptr<ReplicaStore> ReplicaStore::from_catalog(const SourceCatalog& catalog) {
  auto store = std::make_shared<ReplicaStore>();
  for (const auto& src : catalog.sources()) {
    if (src.data_dir.empty()) continue;
    for (const auto& rel : src.relations) store->load_csv(rel, replica_file(src, rel));
  }
  return store;
}

ReplicaStore::Rows ReplicaStore::query(const std::string& sql) const {
  std::lock_guard lock(mu_);
  Stmt st;
  if (sqlite3_prepare_v2(db_, sql.c_str(), -1, &st.s, nullptr) != SQLITE_OK) {
    throw CatalogError("replica query failed: " + std::string(sqlite3_errmsg(db_)));
  }
  Rows out;
  int n = sqlite3_column_count(st.s);
  for (int i = 0; i < n; ++i) out.columns.emplace_back(sqlite3_column_name(st.s, i));
  int rc;
  while ((rc = sqlite3_step(st.s)) == SQLITE_ROW) {
    std::vector<std::string> row;
    row.reserve(n);
    for (int i = 0; i < n; ++i) {
      const auto* text = sqlite3_column_text(st.s, i);
      row.emplace_back(text ? reinterpret_cast<const char*>(text) : "");
    }
    out.rows.push_back(std::move(row));
  }
  if (rc != SQLITE_DONE) throw CatalogError("replica query failed: " + std::string(sqlite3_errmsg(db_)));
  return out;
}

ResultTable exec_relational(const SqlStatement& stmt, const ReplicaStore& store) {
  std::vector<Column> cols;
  for (std::size_t i = 0; i < stmt.columns.size(); ++i) {
    cols.push_back({stmt.columns[i], stmt.is_link[i] ? ColumnKind::Link : ColumnKind::Scalar});
  }
  ResultTable out(std::move(cols));
  if (stmt.unsatisfiable) return out;
  auto res = store.query(stmt.text);
  for (auto& r : res.rows) {
    if (stmt.columns.empty()) {
      out.rows.emplace_back();
      continue;
    }
    for (std::size_t i = 0; i < r.size(); ++i) {
      if (stmt.is_link[i]) r[i] = absolute_link(stmt.link_bases[i], r[i]);
    }
    out.rows.push_back(std::move(r));
  }
  out.deduplicate();
  return out;
}

std::string ReplicaAdapter::last_sql() const {
  std::lock_guard lock(mu_);
  return last_sql_;
}

ResultTable ReplicaAdapter::do_execute(const SubQuery& subquery, const BindingBatch& bindings) {
  try {
    auto stmt = to_sql(subquery, catalog_, bindings, options_);
    {
      std::lock_guard lock(mu_);
      last_sql_ = stmt.text;
    }
    return exec_relational(stmt, *store_);
  } catch (const CatalogError& e) {
    throw AdapterError(subquery.source_id, subquery.id, e.what());
  } catch (const PlanError& e) {
    throw AdapterError(subquery.source_id, subquery.id, e.what());
  }
}

}  // namespace fedlog
