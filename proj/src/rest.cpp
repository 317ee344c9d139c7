#include "fedlog/rest.hpp"

#include <httplib.h>
#include <json.hpp>

#include <set>
#include <sstream>

#include "fedlog/csv.hpp"
#include "fedlog/error.hpp"

namespace fedlog {

std::string percent_encode(const std::string& text) {
  static const char* hex = "0123456789ABCDEF";
  std::string out;
  for (unsigned char c : text) {
    if (std::isalnum(c) || c == '-' || c == '_' || c == '.' || c == '~') {
      out += static_cast<char>(c);
    } else {
      out += '%';
      out += hex[c >> 4];
      out += hex[c & 15];
    }
  }
  return out;
}

namespace {

struct Endpoint {
  std::string origin;  // scheme://host:port
  std::string path;    // no trailing slash
};

Endpoint split_endpoint(const std::string& url) {
  auto scheme = url.find("://");
  if (scheme == std::string::npos) throw CatalogError("endpoint " + url + " has no scheme");
  auto slash = url.find('/', scheme + 3);
  Endpoint e;
  e.origin = url.substr(0, slash);
  e.path = slash == std::string::npos ? "" : url.substr(slash);
  while (!e.path.empty() && e.path.back() == '/') e.path.pop_back();
  return e;
}

std::string cell_text(const nlohmann::json& v) {
  if (v.is_null()) return "";
  if (v.is_string()) return v.get<std::string>();
  return v.dump();
}

const nlohmann::json* follow(const nlohmann::json& record, const std::string& path) {
  const nlohmann::json* cur = &record;
  std::size_t start = 0;
  while (true) {
    auto dot = path.find('.', start);
    std::string part = path.substr(start, dot == std::string::npos ? std::string::npos : dot - start);
    if (!cur->is_object()) return nullptr;
    auto it = cur->find(part);
    if (it == cur->end()) return nullptr;
    cur = &*it;
    if (dot == std::string::npos) return cur;
    start = dot + 1;
  }
}

class Fetcher {
 public:
  Fetcher(const SourceDescriptor& source, const RestOptions& options, int subquery_id, std::atomic<std::size_t>* counter)
      : source_(source), options_(options), subquery_id_(subquery_id), counter_(counter) {
    if (source.endpoint.empty()) fail("no endpoint configured");
    ep_ = split_endpoint(source.endpoint);
  }

  std::vector<std::vector<std::string>> fetch(const RelationSchema& rel, const std::vector<std::string>& keys) {
    std::vector<std::vector<std::string>> rows;
    httplib::Client cli(ep_.origin);
    auto secs = std::chrono::duration_cast<std::chrono::seconds>(options_.timeout);
    auto usecs = std::chrono::duration_cast<std::chrono::microseconds>(options_.timeout - secs);
    cli.set_connection_timeout(secs.count(), usecs.count());
    cli.set_read_timeout(secs.count(), usecs.count());

    for (std::size_t start = 0; start < keys.size(); start += options_.chunk_size) {
      std::string joined;
      for (std::size_t i = start; i < std::min(keys.size(), start + options_.chunk_size); ++i) {
        joined += (i > start ? "," : "") + percent_encode(keys[i]);
      }
      std::string path = ep_.path + "/" + rel.name + "/" + joined;
      parse_into(rel, get(cli, path), rows);
    }
    return rows;
  }

 private:
  [[noreturn]] void fail(const std::string& msg) const { throw AdapterError(source_.id, subquery_id_, msg); }

  std::string get(httplib::Client& cli, const std::string& path) {
    std::string last_error;
    int attempts = 0;
    for (int attempt = 0; attempt <= options_.max_retries; ++attempt) {
      if (attempt > 0) std::this_thread::sleep_for(options_.backoff_base * (1 << (attempt - 1)));
      if (counter_) counter_->fetch_add(1);
      ++attempts;
      auto res = cli.Get(path);
      if (!res) {
        last_error = httplib::to_string(res.error());
        continue;
      }
      if (res->status == 200) return res->body;
      last_error = "HTTP " + std::to_string(res->status);
      if (res->status >= 400 && res->status < 500) break;
    }
    fail("GET " + ep_.origin + path + " failed after " + std::to_string(attempts) +
         (attempts == 1 ? " attempt: " : " attempts: ") + last_error);
  }

  void parse_into(const RelationSchema& rel, const std::string& body, std::vector<std::vector<std::string>>& rows) const {
    nlohmann::json doc;
    try {
      doc = nlohmann::json::parse(body);
    } catch (const nlohmann::json::exception& e) {
      fail("malformed response for " + rel.name + ": " + e.what());
    }
    if (!doc.is_array()) fail("malformed response for " + rel.name + ": expected a JSON array");
    for (const auto& rec : doc) {
      if (!rec.is_object()) fail("malformed response for " + rel.name + ": record is not an object");
      std::vector<std::string> row;
      for (const auto& col : rel.columns) {
        const auto* v = follow(rec, rel.response_path(col));
        if (!v) fail("malformed response for " + rel.name + ": record lacks field " + rel.response_path(col));
        row.push_back(cell_text(*v));
      }
      rows.push_back(std::move(row));
    }
  }

  const SourceDescriptor& source_;
  const RestOptions& options_;
  int subquery_id_;
  std::atomic<std::size_t>* counter_;
  Endpoint ep_;
};

ResultTable run_rest(const SubQuery& sq, const SourceDescriptor& source, const BindingBatch& bindings,
                     const RestOptions& options, std::atomic<std::size_t>* counter) {
  Fetcher fetcher(source, options, sq.id, counter);
  std::optional<ResultTable> acc;

  for (const auto& atom : sq.atoms) {
    const RelationSchema* rel = source.find_relation(atom.predicate);
    if (!rel) throw AdapterError(source.id, sq.id, print_atom(atom) + ": relation not served by this source");
    if (rel->columns.size() != atom.terms.size()) {
      throw AdapterError(source.id, sq.id, print_atom(atom) + ": arity differs from " + rel->name);
    }
    const Term& key = atom.terms[rel->key_index()];
    std::vector<std::string> keys;
    if (const auto* c = std::get_if<Constant>(&key)) {
      keys.push_back(c->value);
    } else if (const auto* v = variable_name(key);
               v && std::find(bindings.vars.begin(), bindings.vars.end(), *v) != bindings.vars.end()) {
      keys = bindings.values_of(*v);
    } else {
      throw AdapterError(source.id, sq.id, print_atom(atom) + ": key column " + rel->key_column + " is not bound");
    }

    // variable -> first column, in atom order
    std::vector<std::pair<std::string, std::size_t>> slots;
    std::vector<Column> cols;
    for (std::size_t i = 0; i < atom.terms.size(); ++i) {
      const auto* v = variable_name(atom.terms[i]);
      if (!v || std::any_of(slots.begin(), slots.end(), [&](const auto& s) { return s.first == *v; })) continue;
      slots.emplace_back(*v, i);
      cols.push_back({*v, rel->is_link(rel->columns[i]) ? ColumnKind::Link : ColumnKind::Scalar});
    }
    ResultTable t(cols);
    for (const auto& row : keys.empty() ? std::vector<std::vector<std::string>>{} : fetcher.fetch(*rel, keys)) {
      bool ok = true;
      for (std::size_t i = 0; i < atom.terms.size() && ok; ++i) {
        if (const auto* c = std::get_if<Constant>(&atom.terms[i])) {
          ok = row[i] == c->value;
        } else if (const auto* v = variable_name(atom.terms[i])) {
          auto first = std::find_if(slots.begin(), slots.end(), [&](const auto& s) { return s.first == *v; });
          ok = row[first->second] == row[i];
        }
      }
      if (!ok) continue;
      Row out;
      for (const auto& [var, col] : slots) {
        out.push_back(rel->is_link(rel->columns[col]) ? absolute_link(rel->link_base, row[col]) : row[col]);
      }
      t.rows.push_back(std::move(out));
    }
    acc = acc ? acc->natural_join(t) : std::move(t);
  }

  ResultTable out = acc->project(sq.output_vars);
  out.deduplicate();
  return out;
}

}  // namespace

ResultTable exec_rest(const SubQuery& subquery, const SourceDescriptor& source, const BindingBatch& bindings,
                      const RestOptions& options) {
  return run_rest(subquery, source, bindings, options, nullptr);
}

ResultTable RestAdapter::do_execute(const SubQuery& subquery, const BindingBatch& bindings) {
  return run_rest(subquery, source_, bindings, options_, &requests_);
}

// ---------------------------------------------------------------------------
// mock server

MockRestServer::MockRestServer(const std::filesystem::path& fixture_dir) : server_(std::make_unique<httplib::Server>()) {
  if (!std::filesystem::is_directory(fixture_dir)) {
    throw CatalogError("fixture directory " + fixture_dir.string() + " does not exist");
  }
  std::vector<std::filesystem::path> files;
  for (const auto& entry : std::filesystem::recursive_directory_iterator(fixture_dir)) {
    if (entry.is_regular_file() && entry.path().extension() == ".csv") files.push_back(entry.path());
  }
  std::sort(files.begin(), files.end());
  for (const auto& f : files) {
    CsvTable csv = read_csv(f);
    if (csv.header.empty()) continue;
    Fixture fx;
    fx.columns = csv.header;
    for (auto& row : csv.rows) {
      auto key = row.front();
      fx.by_key.emplace(std::move(key), std::move(row));
    }
    fixtures_[f.stem().string()] = std::move(fx);
  }
  routes();
}

MockRestServer::~MockRestServer() { stop(); }

std::vector<std::string> MockRestServer::relations() const {
  std::vector<std::string> out;
  for (const auto& [name, fx] : fixtures_) out.push_back(name);
  return out;
}

void MockRestServer::routes() {
  server_->Get("/health", [](const httplib::Request&, httplib::Response& res) { res.set_content("OK", "text/plain"); });
  server_->Get(R"(/api/([^/]+)/(.*))", [this](const httplib::Request& req, httplib::Response& res) {
    requests_.fetch_add(1);
    if (long ms = latency_.load(); ms > 0) std::this_thread::sleep_for(std::chrono::milliseconds(ms));
    int pending = fail_next_.load();
    while (pending > 0 && !fail_next_.compare_exchange_weak(pending, pending - 1)) {
    }
    if (pending > 0) {
      res.status = 503;
      res.set_content("injected failure", "text/plain");
      return;
    }
    auto it = fixtures_.find(req.matches[1].str());
    if (it == fixtures_.end()) {
      res.status = 404;
      res.set_content("unknown relation", "text/plain");
      return;
    }
    const auto& fx = it->second;
    nlohmann::json out = nlohmann::json::array();
    std::set<std::string> seen;
    std::stringstream keys(req.matches[2].str());
    std::string key;
    while (std::getline(keys, key, ',')) {
      if (!seen.insert(key).second) continue;
      auto [lo, hi] = fx.by_key.equal_range(key);
      for (auto r = lo; r != hi; ++r) {
        nlohmann::json rec = nlohmann::json::object();
        for (std::size_t i = 0; i < fx.columns.size(); ++i) rec[fx.columns[i]] = r->second[i];
        out.push_back(std::move(rec));
      }
    }
    res.set_content(out.dump(), "application/json");
  });
}

int MockRestServer::start(int port, const std::string& host) {
  if (thread_.joinable()) throw CatalogError("mock server already running");
  if (port == 0) {
    port_ = server_->bind_to_any_port(host);
    if (port_ <= 0) throw CatalogError("mock server cannot bind " + host);
  } else {
    if (!server_->bind_to_port(host, port)) throw CatalogError("mock server cannot bind port " + std::to_string(port));
    port_ = port;
  }
  thread_ = std::thread([this] { server_->listen_after_bind(); });
  server_->wait_until_ready();
  return port_;
}

void MockRestServer::listen_blocking(int port, const std::string& host) {
  if (!server_->bind_to_port(host, port)) throw CatalogError("mock server cannot bind port " + std::to_string(port));
  port_ = port;
  server_->listen_after_bind();
}

void MockRestServer::stop() {
  server_->stop();
  if (thread_.joinable()) thread_.join();
}

std::string MockRestServer::endpoint() const { return "http://127.0.0.1:" + std::to_string(port_) + "/api"; }

}  // namespace fedlog
