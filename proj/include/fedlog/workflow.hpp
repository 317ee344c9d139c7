#pragma once

#include <cstdint>
#include <exception>
#include <filesystem>
#include <functional>
#include <map>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "fedlog/scheduler.hpp"

namespace fedlog {

enum class NodeKind { Start, Task, End };

struct ProcessNode {
  std::string id;
  NodeKind kind = NodeKind::Task;
  /// Stage name for tasks: reason, rewrite, plan, subquery(i) or
  /// subquery(b.i) for union branch b, consolidate.
  std::string task_ref;

  bool operator==(const ProcessNode&) const = default;
};

struct ProcessModel {
  std::string process_id = "query";
  std::vector<ProcessNode> nodes;
  std::vector<std::pair<std::string, std::string>> edges;

  const ProcessNode* find(const std::string& id) const;
  /// Throws WorkflowError unless there is one start, one end, every node is
  /// reachable from start and reaches end, and ids are unique.
  void validate() const;
  /// Node ids in topological order; ties go to declaration order.
  std::vector<std::string> topological_order() const;

  bool operator==(const ProcessModel&) const = default;
};

/// start, reason, rewrite, plan, one task per sub-query, consolidate, end.
ProcessModel model_plan(const SchedulingPlan& plan);
/// Same chain for a union: the sub-queries of every branch in branch order.
ProcessModel model_plans(const std::vector<SchedulingPlan>& plans);

std::string serialize_bpmn(const ProcessModel& model);
ProcessModel parse_bpmn(const std::string& xml);

enum class NodeStatus { Pending, Running, Done, Failed };
std::string_view to_string(NodeStatus status);
std::optional<NodeStatus> parse_node_status(std::string_view text);

struct NodeRecord {
  std::string instance_id;
  std::string node_id;
  NodeStatus status = NodeStatus::Pending;
  std::int64_t started_at = 0;   // epoch microseconds, 0 when not started
  std::int64_t finished_at = 0;  // epoch microseconds, 0 when not finished
  std::string detail;

  bool operator==(const NodeRecord&) const = default;
};

/// Append-only log, one file `<instance_id>.log` per process instance in
/// `dir`. One record per line:
///   instance \t node \t status \t started_at \t finished_at \t detail
/// with backslash, tab and newline in fields escaped as \\ \t \n.
class ExecutionStore {
 public:
  explicit ExecutionStore(std::filesystem::path dir);

  std::string new_instance_id();
  void append(const NodeRecord& record);
  /// Every record of an instance in write order; empty if unknown.
  std::vector<NodeRecord> records(const std::string& instance_id) const;
  /// Last record per node, in first-write order.
  std::vector<NodeRecord> latest(const std::string& instance_id) const;
  bool exists(const std::string& instance_id) const;

  /// The instance's process model, kept as `<instance_id>.bpmn`.
  void save_model(const std::string& instance_id, const ProcessModel& model);
  std::optional<ProcessModel> load_model(const std::string& instance_id) const;

  const std::filesystem::path& dir() const { return dir_; }

 private:
  std::filesystem::path file_of(const std::string& instance_id) const;

  std::filesystem::path dir_;
  mutable std::mutex mu_;
  std::uint64_t counter_ = 0;
};

std::string format_record(const NodeRecord& record);
NodeRecord parse_record(const std::string& line);

using TaskCallback = std::function<std::string()>;

struct RunResult {
  std::string instance_id;
  NodeStatus status = NodeStatus::Done;
  std::string failed_node;
  /// The exception thrown by the failing task.
  std::exception_ptr error;
};

/// Saves the model, writes a pending record for every node, then walks the topological order:
/// running, callback, done or failed. After a failure the remaining nodes
/// stay pending. Throws WorkflowError before writing anything if a task has
/// no callback.
RunResult run(const ProcessModel& model, const std::map<std::string, TaskCallback>& callbacks, ExecutionStore& store,
              std::string instance_id = {});

}  // namespace fedlog
