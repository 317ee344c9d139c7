#pragma once

#include <filesystem>
#include <memory>
#include <mutex>
#include <string>
#include <vector>

#include "fedlog/adapters.hpp"
#include "fedlog/catalog.hpp"
#include "fedlog/sql.hpp"

struct sqlite3;

namespace fedlog {

/// Local copy of source relations held in an in-memory SQLite database. Each
/// relation `schema.table` is read from `<data_dir>/schema.table.csv` into
/// the attached database `schema`, all columns as TEXT.
class ReplicaStore {
 public:
  ReplicaStore();
  ~ReplicaStore();
  ReplicaStore(const ReplicaStore&) = delete;
  ReplicaStore& operator=(const ReplicaStore&) = delete;

  /// Loads every relation of every source that has a data directory.
  static std::shared_ptr<ReplicaStore> from_catalog(const SourceCatalog& catalog);

  /// Creates the table and inserts `rows` (header must equal the declared
  /// columns).
  void load_relation(const RelationSchema& relation, const std::vector<std::vector<std::string>>& rows);
  void load_csv(const RelationSchema& relation, const std::filesystem::path& file);

  struct Rows {
    std::vector<std::string> columns;
    std::vector<std::vector<std::string>> rows;
  };
  /// Runs one statement; NULL cells come back as empty strings.
  Rows query(const std::string& sql) const;

 private:
  void exec(const std::string& sql) const;
  void ensure_schema(const std::string& schema);

  sqlite3* db_ = nullptr;
  mutable std::mutex mu_;
  std::vector<std::string> schemas_;
};

std::filesystem::path replica_file(const SourceDescriptor& source, const RelationSchema& relation);

/// Runs generated SQL and renders link columns as absolute URLs.
ResultTable exec_relational(const SqlStatement& stmt, const ReplicaStore& store);

/// Answers sub-queries from the replica, whatever the source kind.
class ReplicaAdapter : public SourceAdapter {
 public:
  ReplicaAdapter(std::shared_ptr<const ReplicaStore> store, const SourceCatalog& catalog, SqlOptions options = {})
      : store_(std::move(store)), catalog_(catalog), options_(options) {}

  /// SQL text of the last call, for debugging.
  std::string last_sql() const;

 protected:
  ResultTable do_execute(const SubQuery& subquery, const BindingBatch& bindings) override;

 private:
  std::shared_ptr<const ReplicaStore> store_;
  const SourceCatalog& catalog_;
  SqlOptions options_;
  mutable std::mutex mu_;
  std::string last_sql_;
};

}  // namespace fedlog
