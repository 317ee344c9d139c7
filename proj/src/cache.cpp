#include "fedlog/cache.hpp"

#include <cstdio>

namespace fedlog {

std::uint64_t cache_key(const DatalogQuery& query) {
  std::uint64_t h = 14695981039346656037ull;
  for (unsigned char c : print_canonical(query)) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

std::string format_key(std::uint64_t key) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(key));
  return buf;
}

QueryCache::QueryCache(std::chrono::milliseconds default_ttl, std::size_t max_entries, Clock clock)
    : ttl_(default_ttl), max_entries_(max_entries), clock_(std::move(clock)) {}

std::optional<ResultTable> QueryCache::get(std::uint64_t key) {
  std::lock_guard lock(mu_);
  auto it = entries_.find(key);
  if (it == entries_.end()) return std::nullopt;
  if (clock_() >= it->second.expires) {
    lru_.erase(it->second.lru);
    entries_.erase(it);
    return std::nullopt;
  }
  lru_.splice(lru_.begin(), lru_, it->second.lru);
  return it->second.table;
}

void QueryCache::put(std::uint64_t key, ResultTable table) { put(key, std::move(table), ttl_); }

void QueryCache::put(std::uint64_t key, ResultTable table, std::chrono::milliseconds ttl) {
  std::lock_guard lock(mu_);
  if (max_entries_ == 0) return;
  auto expires = clock_() + ttl;
  if (auto it = entries_.find(key); it != entries_.end()) {
    it->second.table = std::move(table);
    it->second.expires = expires;
    lru_.splice(lru_.begin(), lru_, it->second.lru);
    return;
  }
  while (entries_.size() >= max_entries_) {
    entries_.erase(lru_.back());
    lru_.pop_back();
  }
  lru_.push_front(key);
  entries_.emplace(key, Entry{std::move(table), expires, lru_.begin()});
}

std::size_t QueryCache::size() const {
  std::lock_guard lock(mu_);
  return entries_.size();
}

void QueryCache::clear() {
  std::lock_guard lock(mu_);
  entries_.clear();
  lru_.clear();
}

}  // namespace fedlog
