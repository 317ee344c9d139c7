#pragma once

#include <atomic>
#include <chrono>
#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <string>
#include <thread>
#include <vector>

#include "fedlog/adapters.hpp"
#include "fedlog/catalog.hpp"

namespace httplib {
class Server;
}

namespace fedlog {

struct RestOptions {
  std::size_t chunk_size = 50;
  int max_retries = 3;
  std::chrono::milliseconds backoff_base{200};
  std::chrono::milliseconds timeout{5000};
};

/// One GET per chunk of distinct key values to
/// `<endpoint>/<relation>/<k1,k2,...>`, keys percent-encoded. The body is a
/// JSON array of records; columns are read through the relation's response
/// field paths.
ResultTable exec_rest(const SubQuery& subquery, const SourceDescriptor& source, const BindingBatch& bindings,
                      const RestOptions& options = {});

std::string percent_encode(const std::string& text);

/// Holds `source` by reference (it must outlive the adapter), so endpoint
/// changes made through the catalog take effect on the next call.
class RestAdapter : public SourceAdapter {
 public:
  RestAdapter(const SourceDescriptor& source, RestOptions options = {}) : source_(source), options_(options) {}

  std::size_t requests() const { return requests_.load(); }

 protected:
  ResultTable do_execute(const SubQuery& subquery, const BindingBatch& bindings) override;

 private:
  const SourceDescriptor& source_;
  RestOptions options_;
  std::atomic<std::size_t> requests_{0};
};

/// Fixture-backed stand-in for the online endpoints. Every `*.csv` below the
/// fixture directory is served as relation `<file stem>`, keyed on its first
/// column: `GET /api/<relation>/<k1,k2,...>` returns the matching rows as a
/// JSON array of flat objects. `GET /health` returns `OK`.
class MockRestServer {
 public:
  explicit MockRestServer(const std::filesystem::path& fixture_dir);
  ~MockRestServer();
  MockRestServer(const MockRestServer&) = delete;
  MockRestServer& operator=(const MockRestServer&) = delete;

  /// Binds to `port` (0 picks a free one) and serves on a background thread.
  /// Throws when the port cannot be bound.
  int start(int port = 0, const std::string& host = "127.0.0.1");
  /// Serves on the calling thread until stop().
  void listen_blocking(int port, const std::string& host = "0.0.0.0");
  void stop();

  int port() const { return port_; }
  std::string endpoint() const;

  /// The next `n` data requests answer HTTP 503.
  void fail_next(int n) { fail_next_ = n; }
  void set_latency(std::chrono::milliseconds latency) { latency_ = latency.count(); }
  std::size_t requests() const { return requests_.load(); }
  std::vector<std::string> relations() const;

 private:
  struct Fixture {
    std::vector<std::string> columns;
    std::multimap<std::string, std::vector<std::string>> by_key;
  };
  void routes();

  std::map<std::string, Fixture> fixtures_;
  std::unique_ptr<httplib::Server> server_;
  std::thread thread_;
  int port_ = 0;
  std::atomic<int> fail_next_{0};
  std::atomic<long> latency_{0};
  std::atomic<std::size_t> requests_{0};
};

}  // namespace fedlog
