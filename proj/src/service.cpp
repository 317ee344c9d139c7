#include "fedlog/service.hpp"

#include <httplib.h>

#include <fstream>
#include <sstream>

#include "fedlog/rewriter.hpp"
#include "fedlog/scheduler.hpp"

namespace fedlog {

// ---------------------------------------------------------------------------
// config

EngineConfig EngineConfig::parse(const std::string& json_text, const std::filesystem::path& base_dir) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(json_text);
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("config is not valid JSON: ") + e.what());
  }
  if (!j.is_object()) throw ConfigError("config must be a JSON object");
  auto path = [&](const char* key, bool required) -> std::filesystem::path {
    if (!j.contains(key)) {
      if (required) throw ConfigError(std::string("config lacks `") + key + "`");
      return {};
    }
    if (!j[key].is_string()) throw ConfigError(std::string("config `") + key + "` must be a string");
    std::filesystem::path p = j[key].get<std::string>();
    return p.is_absolute() ? p : base_dir / p;
  };
  EngineConfig c;
  try {
    c.ontology = path("ontology", true);
    c.maps = path("maps", true);
    c.catalog = path("catalog", true);
    c.templates = path("templates", false);
    c.store_dir = path("store_dir", false);
    if (c.store_dir.empty()) c.store_dir = base_dir / "runs";
    c.port = j.value("port", 8080);
    if (j.contains("cache")) {
      const auto& cache = j["cache"];
      c.cache_ttl_seconds = cache.value("ttl_seconds", 30.0);
      c.cache_max_entries = cache.value("max_entries", std::size_t{1024});
      if (c.cache_ttl_seconds < 0) throw ConfigError("cache.ttl_seconds must not be negative");
    }
    if (j.contains("endpoints")) {
      for (const auto& [id, url] : j["endpoints"].items()) c.endpoints[id] = url.get<std::string>();
    }
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }
  return c;
}

EngineConfig EngineConfig::load(const std::filesystem::path& file) {
  std::ifstream in(file);
  if (!in) throw ConfigError("cannot read config " + file.string());
  std::stringstream buf;
  buf << in.rdbuf();
  return parse(buf.str(), file.parent_path());
}

// ---------------------------------------------------------------------------
// request / response

QueryRequest QueryRequest::from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw ConfigError("request body must be a JSON object");
  QueryRequest r;
  try {
    if (j.contains("template_id")) r.template_id = j["template_id"].get<std::string>();
    if (j.contains("raw")) r.raw = j["raw"].get<std::string>();
    if (j.contains("slots")) {
      for (const auto& [k, v] : j["slots"].items()) r.slot_values[k] = v.is_string() ? v.get<std::string>() : v.dump();
    }
    r.no_cache = j.value("no_cache", false);
    if (j.contains("mode")) {
      auto m = parse_source_mode(j["mode"].get<std::string>());
      if (!m) throw ConfigError("mode must be `local` or `online`");
      r.mode = m;
    }
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("bad request: ") + e.what());
  }
  if (r.template_id.has_value() == r.raw.has_value()) {
    throw ConfigError("request needs exactly one of `template_id` and `raw`");
  }
  return r;
}

nlohmann::json QueryResponse::to_json() const {
  nlohmann::json j = table.to_json();
  j["query_id"] = query_id;
  j["cache_hit"] = cache_hit;
  j["row_count"] = table.rows.size();
  j["total_ms"] = total_ms;
  j["timings"] = nlohmann::json::array();
  for (const auto& t : timings) j["timings"].push_back({{"stage", t.stage}, {"ms", t.ms}});
  j["warnings"] = warnings;
  return j;
}

int http_status_for(const Error& error) {
  const auto& s = error.stage();
  if (s == "execute") return 502;
  if (s == "workflow" || s == "ontology" || s == "rules" || s == "catalog") return 500;
  return 400;
}

nlohmann::json error_json(const std::exception& error) {
  nlohmann::json e{{"message", error.what()}};
  if (const auto* fe = dynamic_cast<const Error*>(&error)) e["stage"] = fe->stage();
  if (const auto* pe = dynamic_cast<const ParseError*>(&error)) {
    e["line"] = pe->line();
    e["column"] = pe->column();
  }
  if (const auto* ae = dynamic_cast<const AdapterError*>(&error)) {
    e["source"] = ae->source_id();
    e["subquery"] = ae->subquery_id();
  }
  if (const auto* qf = dynamic_cast<const QueryFailure*>(&error)) e["query_id"] = qf->query_id();
  return {{"error", e}};
}

// ---------------------------------------------------------------------------
// engine

QueryEngine::QueryEngine(const EngineConfig& config)
    : ontology_(Ontology::load_file(config.ontology)),
      rules_(RuleRepository::build(ontology_, load_mapping_dir(config.maps))),
      catalog_(SourceCatalog::load_file(config.catalog)),
      templates_(config.templates.empty() ? std::vector<QueryTemplate>{} : load_templates(config.templates)),
      store_(config.store_dir),
      cache_(std::chrono::milliseconds(static_cast<long long>(config.cache_ttl_seconds * 1000)),
             config.cache_max_entries) {
  for (const auto& [id, url] : config.endpoints) catalog_.set_endpoint(id, url);
  replica_ = ReplicaStore::from_catalog(catalog_);
  for (const auto& src : catalog_.sources()) {
    if (!src.data_dir.empty()) replica_adapters_[src.id] = std::make_shared<ReplicaAdapter>(replica_, catalog_);
  }
  set_rest_options({});
}

void QueryEngine::set_endpoint(const std::string& source_id, const std::string& url) {
  catalog_.set_endpoint(source_id, url);
}

void QueryEngine::set_rest_options(const RestOptions& options) {
  rest_adapters_.clear();
  for (const auto& src : catalog_.sources()) {
    if (src.kind == SourceKind::Rest) rest_adapters_[src.id] = std::make_shared<RestAdapter>(src, options);
  }
}

std::size_t QueryEngine::adapter_calls() const {
  std::size_t n = 0;
  for (const auto& [id, a] : replica_adapters_) n += a->calls();
  for (const auto& [id, a] : rest_adapters_) n += a->calls();
  return n;
}

AdapterRegistry QueryEngine::registry_for(std::optional<SourceMode> mode) const {
  AdapterRegistry reg;
  for (const auto& src : catalog_.sources()) {
    SourceMode m = src.mode;
    if (src.kind == SourceKind::Rest && mode) m = *mode;
    if (src.kind == SourceKind::Rest && m == SourceMode::Online) {
      reg.add(src.id, rest_adapters_.at(src.id));
    } else if (auto it = replica_adapters_.find(src.id); it != replica_adapters_.end()) {
      reg.add(src.id, it->second);
    }
  }
  return reg;
}

namespace {

using SteadyClock = std::chrono::steady_clock;

double ms_between(SteadyClock::time_point a, SteadyClock::time_point b) {
  return std::chrono::duration<double, std::milli>(b - a).count();
}

/// Consecutive laps; the laps always add up to the elapsed total.
class LapTimer {
 public:
  LapTimer() : start_(SteadyClock::now()), mark_(start_) {}
  void lap(std::vector<StageTiming>& out, std::string stage) {
    auto now = SteadyClock::now();
    out.push_back({std::move(stage), ms_between(mark_, now)});
    mark_ = now;
  }
  double total() const { return ms_between(start_, mark_); }

 private:
  SteadyClock::time_point start_, mark_;
};

}  // namespace

QueryResponse QueryEngine::handle_query(const QueryRequest& request) {
  QueryResponse resp;
  LapTimer timer;

  DatalogQuery query;
  if (request.template_id) {
    const QueryTemplate* t = find_template(templates_, *request.template_id);
    if (!t) throw TemplateError("unknown template " + *request.template_id);
    query = instantiate(*t, request.slot_values);
  } else {
    query = parse_query(*request.raw);
  }
  timer.lap(resp.timings, "parse");

  const auto key = cache_key(query);
  if (!request.no_cache) {
    if (auto hit = cache_.get(key)) {
      timer.lap(resp.timings, "cache_lookup");
      resp.query_id = store_.new_instance_id();
      resp.table = std::move(*hit);
      resp.cache_hit = true;
      resp.total_ms = timer.total();
      return resp;
    }
  }
  timer.lap(resp.timings, "cache_lookup");

  ReasonedQuery reasoned = reason(query, ontology_, rules_);
  for (const auto& note : reasoned.report.validation_notes) resp.warnings.push_back(note);
  timer.lap(resp.timings, "reason");

  std::vector<DatalogQuery> rewritten;
  for (const auto& b : reasoned.branches) rewritten.push_back(rewrite(b, rules_, catalog_));
  timer.lap(resp.timings, "rewrite");

  std::vector<SchedulingPlan> plans;
  for (const auto& r : rewritten) {
    plans.push_back(plan(r, catalog_));
    for (const auto& w : plans.back().warnings) resp.warnings.push_back(w);
  }
  timer.lap(resp.timings, "plan");

  AdapterRegistry registry = registry_for(request.mode);
  std::vector<std::unique_ptr<PlanExecution>> runs;
  for (const auto& p : plans) runs.push_back(std::make_unique<PlanExecution>(p, registry));

  ProcessModel model = model_plans(plans);
  std::map<std::string, TaskCallback> callbacks;
  std::vector<StageTiming> task_times;
  auto timed = [&task_times](std::string stage, std::function<std::string()> fn) -> TaskCallback {
    return [&task_times, stage = std::move(stage), fn = std::move(fn)] {
      auto t0 = SteadyClock::now();
      auto detail = fn();
      task_times.push_back({stage, ms_between(t0, SteadyClock::now())});
      return detail;
    };
  };
  std::size_t union_size = reasoned.branches.size();
  callbacks["reason"] = [&] {
    return std::to_string(union_size) + " branch(es)" +
           (reasoned.report.empty() ? std::string() : "\n" + format_report(reasoned.report));
  };
  callbacks["rewrite"] = [&] {
    std::string s;
    for (const auto& r : rewritten) s += print_statements(r);
    return s;
  };
  callbacks["plan"] = [&] {
    std::string s;
    for (const auto& p : plans) s += format_plan(p);
    return s;
  };
  for (std::size_t b = 0; b < plans.size(); ++b) {
    for (std::size_t i = 0; i < plans[b].subqueries.size(); ++i) {
      std::string n = std::to_string(i + 1);
      std::string ref = plans.size() > 1 ? "subquery(" + std::to_string(b + 1) + "." + n + ")" : "subquery(" + n + ")";
      callbacks[ref] = timed(ref, [&runs, b, i] { return runs[b]->run_subquery(i); });
    }
  }
  ResultTable final_table(plans.front().head_columns);
  callbacks["consolidate"] = timed("consolidate", [&] {
    for (const auto& r : runs) {
      auto part = r->consolidate();
      final_table.rows.insert(final_table.rows.end(), part.rows.begin(), part.rows.end());
    }
    final_table.deduplicate();
    return std::to_string(final_table.rows.size()) + " rows";
  });

  RunResult result = run(model, callbacks, store_);
  resp.query_id = result.instance_id;
  if (result.status == NodeStatus::Failed) {
    try {
      std::rethrow_exception(result.error);
    } catch (const Error& e) {
      throw QueryFailure(e.stage(), e.what(), result.instance_id);
    } catch (const std::exception& e) {
      throw QueryFailure("execute", e.what(), result.instance_id);
    }
  }
  double task_sum = 0;
  for (const auto& t : task_times) task_sum += t.ms;
  resp.timings.insert(resp.timings.end(), task_times.begin(), task_times.end());
  timer.lap(resp.timings, "orchestration");
  // the lap covered the tasks too
  resp.timings.back().ms = std::max(0.0, resp.timings.back().ms - task_sum);

  final_table.validate();
  resp.table = std::move(final_table);
  if (!request.no_cache) cache_.put(key, resp.table);
  timer.lap(resp.timings, "cache_store");
  resp.total_ms = timer.total();
  return resp;
}

std::optional<nlohmann::json> QueryEngine::workflow_json(const std::string& query_id) const {
  if (!store_.exists(query_id)) return std::nullopt;
  nlohmann::json j;
  j["query_id"] = query_id;
  auto model = store_.load_model(query_id);
  std::map<std::string, std::string> refs;
  if (model) {
    for (const auto& n : model->nodes) refs[n.id] = n.task_ref;
  }
  auto node_json = [&](const NodeRecord& r) {
    return nlohmann::json{{"node_id", r.node_id},
                          {"task_ref", refs[r.node_id]},
                          {"status", std::string(to_string(r.status))},
                          {"started_at", r.started_at},
                          {"finished_at", r.finished_at},
                          {"detail", r.detail}};
  };
  j["nodes"] = nlohmann::json::array();
  for (const auto& r : store_.latest(query_id)) j["nodes"].push_back(node_json(r));
  j["records"] = nlohmann::json::array();
  for (const auto& r : store_.records(query_id)) j["records"].push_back(node_json(r));
  return j;
}

// ---------------------------------------------------------------------------
// http

HttpService::HttpService(QueryEngine& engine) : engine_(engine), server_(std::make_unique<httplib::Server>()) {
  auto send_json = [](httplib::Response& res, int status, const nlohmann::json& body) {
    res.status = status;
    res.set_content(body.dump(), "application/json");
  };
  server_->Get("/health", [send_json](const httplib::Request&, httplib::Response& res) {
    send_json(res, 200, {{"status", "OK"}});
  });
  server_->Get("/templates", [this, send_json](const httplib::Request&, httplib::Response& res) {
    nlohmann::json list = nlohmann::json::array();
    for (const auto& t : engine_.templates()) list.push_back(t.to_json());
    send_json(res, 200, {{"templates", list}});
  });
  server_->Post("/query", [this, send_json](const httplib::Request& req, httplib::Response& res) {
    try {
      nlohmann::json body;
      try {
        body = nlohmann::json::parse(req.body);
      } catch (const nlohmann::json::exception& e) {
        throw ConfigError(std::string("request body is not valid JSON: ") + e.what());
      }
      send_json(res, 200, engine_.handle_query(QueryRequest::from_json(body)).to_json());
    } catch (const ConfigError& e) {
      send_json(res, 400, error_json(e));
    } catch (const Error& e) {
      send_json(res, http_status_for(e), error_json(e));
    } catch (const std::exception& e) {
      send_json(res, 500, error_json(e));
    }
  });
  server_->Get(R"(/query/([^/]+)/workflow)", [this, send_json](const httplib::Request& req, httplib::Response& res) {
    auto j = engine_.workflow_json(req.matches[1].str());
    if (!j) {
      send_json(res, 404, {{"error", {{"message", "unknown query id"}}}});
      return;
    }
    send_json(res, 200, *j);
  });
}

HttpService::~HttpService() { stop(); }

int HttpService::start(int port, const std::string& host) {
  if (port == 0) {
    port_ = server_->bind_to_any_port(host);
    if (port_ <= 0) throw ConfigError("cannot bind " + host);
  } else {
    if (!server_->bind_to_port(host, port)) throw ConfigError("cannot bind port " + std::to_string(port));
    port_ = port;
  }
  thread_ = std::thread([this] { server_->listen_after_bind(); });
  server_->wait_until_ready();
  return port_;
}

void HttpService::listen_blocking(int port, const std::string& host) {
  if (!server_->bind_to_port(host, port)) throw ConfigError("cannot bind port " + std::to_string(port));
  port_ = port;
  server_->listen_after_bind();
}

void HttpService::stop() {
  server_->stop();
  if (thread_.joinable()) thread_.join();
}

}  // namespace fedlog
