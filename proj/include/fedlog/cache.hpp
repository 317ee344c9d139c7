#pragma once

#include <chrono>
#include <cstdint>
#include <functional>
#include <list>
#include <mutex>
#include <optional>
#include <string>
#include <unordered_map>

#include "fedlog/datalog.hpp"
#include "fedlog/result_table.hpp"

namespace fedlog {

/// FNV-1a 64 over print_canonical(query).
std::uint64_t cache_key(const DatalogQuery& query);
std::string format_key(std::uint64_t key);

/// TTL + LRU result cache. Expiry is checked when an entry is read.
class QueryCache {
 public:
  using Clock = std::function<std::chrono::steady_clock::time_point()>;

  explicit QueryCache(std::chrono::milliseconds default_ttl = std::chrono::seconds(30), std::size_t max_entries = 1024,
                      Clock clock = [] { return std::chrono::steady_clock::now(); });

  std::optional<ResultTable> get(std::uint64_t key);
  void put(std::uint64_t key, ResultTable table);
  void put(std::uint64_t key, ResultTable table, std::chrono::milliseconds ttl);

  std::size_t size() const;
  void clear();
  std::chrono::milliseconds default_ttl() const { return ttl_; }

 private:
  struct Entry {
    ResultTable table;
    std::chrono::steady_clock::time_point expires;
    std::list<std::uint64_t>::iterator lru;
  };

  std::chrono::milliseconds ttl_;
  std::size_t max_entries_;
  Clock clock_;
  mutable std::mutex mu_;
  std::unordered_map<std::uint64_t, Entry> entries_;
  std::list<std::uint64_t> lru_;  // most recent first
};

}  // namespace fedlog
