#pragma once

#include <atomic>
#include <map>
#include <memory>
#include <string>
#include <string_view>

#include "fedlog/result_table.hpp"
#include "fedlog/subquery.hpp"

namespace fedlog {

/// Translates a sub-query into a source's native access and returns rows
/// whose columns are the sub-query's output variables. Implementations must
/// be callable concurrently.
class SourceAdapter {
 public:
  virtual ~SourceAdapter() = default;

  ResultTable execute(const SubQuery& subquery, const BindingBatch& bindings) {
    calls_.fetch_add(1, std::memory_order_relaxed);
    return do_execute(subquery, bindings);
  }

  std::size_t calls() const { return calls_.load(std::memory_order_relaxed); }

 protected:
  virtual ResultTable do_execute(const SubQuery& subquery, const BindingBatch& bindings) = 0;

 private:
  std::atomic<std::size_t> calls_{0};
};

class AdapterRegistry {
 public:
  void add(std::string source_id, std::shared_ptr<SourceAdapter> adapter) {
    adapters_[std::move(source_id)] = std::move(adapter);
  }

  SourceAdapter* find(std::string_view source_id) const {
    auto it = adapters_.find(source_id);
    return it == adapters_.end() ? nullptr : it->second.get();
  }

  std::size_t total_calls() const {
    std::size_t n = 0;
    for (const auto& [id, a] : adapters_) n += a->calls();
    return n;
  }

 private:
  std::map<std::string, std::shared_ptr<SourceAdapter>, std::less<>> adapters_;
};

}  // namespace fedlog
