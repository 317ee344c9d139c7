#pragma once

#include <chrono>
#include <filesystem>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include <json.hpp>

#include "fedlog/cache.hpp"
#include "fedlog/catalog.hpp"
#include "fedlog/error.hpp"
#include "fedlog/ontology.hpp"
#include "fedlog/reasoner.hpp"
#include "fedlog/replica.hpp"
#include "fedlog/rest.hpp"
#include "fedlog/result_table.hpp"
#include "fedlog/rule_repository.hpp"
#include "fedlog/templates.hpp"
#include "fedlog/workflow.hpp"

namespace httplib {
class Server;
}

namespace fedlog {

/// JSON config. Relative paths resolve against the config file's directory.
///   { "ontology": "sgmo.onto", "maps": "maps", "catalog": "catalog.json",
///     "templates": "templates.yaml", "store_dir": "runs", "port": 8080,
///     "cache": { "ttl_seconds": 30, "max_entries": 1024 },
///     "endpoints": { "<source id>": "<url>" } }
struct EngineConfig {
  std::filesystem::path ontology;
  std::filesystem::path maps;
  std::filesystem::path catalog;
  std::filesystem::path templates;
  std::filesystem::path store_dir;
  int port = 8080;
  double cache_ttl_seconds = 30;
  std::size_t cache_max_entries = 1024;
  std::map<std::string, std::string> endpoints;

  static EngineConfig parse(const std::string& json_text, const std::filesystem::path& base_dir);
  static EngineConfig load(const std::filesystem::path& file);
};

struct QueryRequest {
  std::optional<std::string> template_id;
  std::map<std::string, std::string> slot_values;
  std::optional<std::string> raw;
  bool no_cache = false;
  /// Overrides the catalog mode of every REST source.
  std::optional<SourceMode> mode;

  static QueryRequest from_json(const nlohmann::json& j);
};

struct StageTiming {
  std::string stage;
  double ms = 0;
};

struct QueryResponse {
  std::string query_id;
  ResultTable table;
  bool cache_hit = false;
  std::vector<StageTiming> timings;
  double total_ms = 0;
  std::vector<std::string> warnings;

  nlohmann::json to_json() const;
};

/// A pipeline failure after a workflow instance was created; carries the
/// instance id so its log can be inspected.
class QueryFailure : public Error {
 public:
  QueryFailure(std::string stage, const std::string& message, std::string query_id)
      : Error(std::move(stage), message), query_id_(std::move(query_id)) {}
  const std::string& query_id() const noexcept { return query_id_; }

 private:
  std::string query_id_;
};

/// The full pipeline: parse, cache, reason, rewrite, plan, workflow run.
class QueryEngine {
 public:
  explicit QueryEngine(const EngineConfig& config);

  QueryResponse handle_query(const QueryRequest& request);

  const std::vector<QueryTemplate>& templates() const { return templates_; }
  const Ontology& ontology() const { return ontology_; }
  const RuleRepository& rules() const { return rules_; }
  const SourceCatalog& catalog() const { return catalog_; }
  ExecutionStore& store() { return store_; }
  QueryCache& cache() { return cache_; }
  const ReplicaStore& replica() const { return *replica_; }

  /// Points a REST source at another endpoint (e.g. a mock on a free port).
  void set_endpoint(const std::string& source_id, const std::string& url);
  void set_rest_options(const RestOptions& options);

  /// Adapter invocations since construction, over every adapter.
  std::size_t adapter_calls() const;

  /// Node records of an instance joined with its model; nullopt if unknown.
  std::optional<nlohmann::json> workflow_json(const std::string& query_id) const;

 private:
  AdapterRegistry registry_for(std::optional<SourceMode> mode) const;

  Ontology ontology_;
  RuleRepository rules_;
  SourceCatalog catalog_;
  std::vector<QueryTemplate> templates_;
  std::shared_ptr<ReplicaStore> replica_;
  ExecutionStore store_;
  QueryCache cache_;
  std::map<std::string, std::shared_ptr<ReplicaAdapter>> replica_adapters_;
  std::map<std::string, std::shared_ptr<RestAdapter>> rest_adapters_;
};

/// HTTP status for an error stage.
int http_status_for(const Error& error);
nlohmann::json error_json(const std::exception& error);

/// GET /health, GET /templates, POST /query, GET /query/{id}/workflow.
class HttpService {
 public:
  explicit HttpService(QueryEngine& engine);
  ~HttpService();

  int start(int port = 0, const std::string& host = "127.0.0.1");
  void listen_blocking(int port, const std::string& host = "0.0.0.0");
  void stop();
  int port() const { return port_; }

 private:
  QueryEngine& engine_;
  std::unique_ptr<httplib::Server> server_;
  std::thread thread_;
  int port_ = 0;
};

}  // namespace fedlog
