#include "fedlog/workflow.hpp"

#include <boost/property_tree/ptree.hpp>
#include <boost/property_tree/xml_parser.hpp>

#include <algorithm>
#include <chrono>
#include <deque>
#include <fstream>
#include <set>
#include <sstream>

#include "fedlog/error.hpp"

namespace fedlog {

namespace pt = boost::property_tree;

const ProcessNode* ProcessModel::find(const std::string& id) const {
  auto it = std::find_if(nodes.begin(), nodes.end(), [&](const auto& n) { return n.id == id; });
  return it == nodes.end() ? nullptr : &*it;
}

void ProcessModel::validate() const {
  std::set<std::string> ids;
  const ProcessNode* start = nullptr;
  const ProcessNode* end = nullptr;
  for (const auto& n : nodes) {
    if (n.id.empty()) throw WorkflowError("process node without id");
    if (!ids.insert(n.id).second) throw WorkflowError("duplicate node id " + n.id);
    if (n.kind == NodeKind::Start) {
      if (start) throw WorkflowError("process has more than one start event");
      start = &n;
    } else if (n.kind == NodeKind::End) {
      if (end) throw WorkflowError("process has more than one end event");
      end = &n;
    } else if (n.task_ref.empty()) {
      throw WorkflowError("service task " + n.id + " has no task reference");
    }
  }
  if (!start) throw WorkflowError("process has no start event");
  if (!end) throw WorkflowError("process has no end event");

  std::map<std::string, std::vector<std::string>> out, in;
  for (const auto& [from, to] : edges) {
    if (!ids.contains(from) || !ids.contains(to)) throw WorkflowError("sequence flow " + from + " -> " + to + " names an unknown node");
    out[from].push_back(to);
    in[to].push_back(from);
  }
  auto reach = [&](const std::string& root, std::map<std::string, std::vector<std::string>>& adj) {
    std::set<std::string> seen{root};
    std::deque<std::string> todo{root};
    while (!todo.empty()) {
      auto cur = todo.front();
      todo.pop_front();
      for (const auto& nx : adj[cur]) {
        if (seen.insert(nx).second) todo.push_back(nx);
      }
    }
    return seen;
  };
  auto fwd = reach(start->id, out);
  auto back = reach(end->id, in);
  for (const auto& n : nodes) {
    if (!fwd.contains(n.id)) throw WorkflowError("node " + n.id + " is not reachable from the start event");
    if (!back.contains(n.id)) throw WorkflowError("end event is not reachable from node " + n.id);
  }
}

std::vector<std::string> ProcessModel::topological_order() const {
  std::map<std::string, std::size_t> pos;
  for (std::size_t i = 0; i < nodes.size(); ++i) pos[nodes[i].id] = i;
  std::vector<int> indegree(nodes.size(), 0);
  std::vector<std::vector<std::size_t>> adj(nodes.size());
  for (const auto& [from, to] : edges) {
    adj[pos.at(from)].push_back(pos.at(to));
    ++indegree[pos.at(to)];
  }
  std::set<std::size_t> ready;
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    if (indegree[i] == 0) ready.insert(i);
  }
  std::vector<std::string> order;
  while (!ready.empty()) {
    auto i = *ready.begin();
    ready.erase(ready.begin());
    order.push_back(nodes[i].id);
    for (auto j : adj[i]) {
      if (--indegree[j] == 0) ready.insert(j);
    }
  }
  if (order.size() != nodes.size()) throw WorkflowError("process graph has a cycle");
  return order;
}

ProcessModel model_plans(const std::vector<SchedulingPlan>& plans) {
  ProcessModel m;
  m.nodes.push_back({"start", NodeKind::Start, ""});
  for (const char* stage : {"reason", "rewrite", "plan"}) m.nodes.push_back({stage, NodeKind::Task, stage});
  for (std::size_t b = 0; b < plans.size(); ++b) {
    for (const auto& sq : plans[b].subqueries) {
      std::string n = std::to_string(sq.id);
      if (plans.size() > 1) {
        m.nodes.push_back({"subquery_" + std::to_string(b + 1) + "_" + n, NodeKind::Task,
                           "subquery(" + std::to_string(b + 1) + "." + n + ")"});
      } else {
        m.nodes.push_back({"subquery_" + n, NodeKind::Task, "subquery(" + n + ")"});
      }
    }
  }
  m.nodes.push_back({"consolidate", NodeKind::Task, "consolidate"});
  m.nodes.push_back({"end", NodeKind::End, ""});
  for (std::size_t i = 0; i + 1 < m.nodes.size(); ++i) m.edges.emplace_back(m.nodes[i].id, m.nodes[i + 1].id);
  return m;
}

ProcessModel model_plan(const SchedulingPlan& plan) { return model_plans({plan}); }

std::string serialize_bpmn(const ProcessModel& model) {
  model.validate();
  pt::ptree process;
  process.put("<xmlattr>.id", model.process_id);
  process.put("<xmlattr>.isExecutable", "true");
  for (const auto& n : model.nodes) {
    pt::ptree el;
    el.put("<xmlattr>.id", n.id);
    const char* tag = "serviceTask";
    if (n.kind == NodeKind::Start) tag = "startEvent";
    if (n.kind == NodeKind::End) tag = "endEvent";
    if (n.kind == NodeKind::Task) {
      el.put("<xmlattr>.name", n.task_ref);
      el.put("<xmlattr>.taskRef", n.task_ref);
    }
    process.add_child(tag, el);
  }
  for (std::size_t i = 0; i < model.edges.size(); ++i) {
    pt::ptree el;
    el.put("<xmlattr>.id", "flow_" + std::to_string(i + 1));
    el.put("<xmlattr>.sourceRef", model.edges[i].first);
    el.put("<xmlattr>.targetRef", model.edges[i].second);
    process.add_child("sequenceFlow", el);
  }
  pt::ptree defs;
  defs.put("<xmlattr>.xmlns", "http://www.omg.org/spec/BPMN/20100524/MODEL");
  defs.put("<xmlattr>.id", "definitions_" + model.process_id);
  defs.add_child("process", process);
  pt::ptree doc;
  doc.add_child("definitions", defs);

  std::ostringstream out;
  pt::write_xml(out, doc, pt::xml_writer_make_settings<std::string>(' ', 2));
  return out.str();
}

ProcessModel parse_bpmn(const std::string& xml) {
  pt::ptree doc;
  std::istringstream in(xml);
  try {
    pt::read_xml(in, doc, pt::xml_parser::trim_whitespace);
  } catch (const pt::xml_parser_error& e) {
    throw WorkflowError(std::string("malformed BPMN XML: ") + e.what());
  }
  auto process = doc.get_child_optional("definitions.process");
  if (!process) throw WorkflowError("BPMN document has no definitions/process element");

  ProcessModel m;
  m.process_id = process->get("<xmlattr>.id", "");
  for (const auto& [tag, el] : *process) {
    auto attr = [&](const char* name) { return el.get<std::string>(std::string("<xmlattr>.") + name, ""); };
    if (tag == "startEvent") {
      m.nodes.push_back({attr("id"), NodeKind::Start, ""});
    } else if (tag == "endEvent") {
      m.nodes.push_back({attr("id"), NodeKind::End, ""});
    } else if (tag == "serviceTask") {
      m.nodes.push_back({attr("id"), NodeKind::Task, attr("taskRef")});
    } else if (tag == "sequenceFlow") {
      m.edges.emplace_back(attr("sourceRef"), attr("targetRef"));
    } else if (tag != "<xmlattr>") {
      throw WorkflowError("unsupported BPMN element " + tag);
    }
  }
  m.validate();
  return m;
}

std::string_view to_string(NodeStatus status) {
  switch (status) {
    case NodeStatus::Pending: return "pending";
    case NodeStatus::Running: return "running";
    case NodeStatus::Done: return "done";
    case NodeStatus::Failed: return "failed";
  }
  return "?";
}

std::optional<NodeStatus> parse_node_status(std::string_view text) {
  for (auto s : {NodeStatus::Pending, NodeStatus::Running, NodeStatus::Done, NodeStatus::Failed}) {
    if (to_string(s) == text) return s;
  }
  return std::nullopt;
}

namespace {

std::string escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '\\': out += "\\\\"; break;
      case '\t': out += "\\t"; break;
      case '\n': out += "\\n"; break;
      case '\r': out += "\\r"; break;
      default: out += c;
    }
  }
  return out;
}

std::string unescape(const std::string& s) {
  std::string out;
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (s[i] != '\\' || i + 1 == s.size()) {
      out += s[i];
      continue;
    }
    char c = s[++i];
    out += c == 't' ? '\t' : c == 'n' ? '\n' : c == 'r' ? '\r' : c;
  }
  return out;
}

std::int64_t now_us() {
  return std::chrono::duration_cast<std::chrono::microseconds>(std::chrono::system_clock::now().time_since_epoch())
      .count();
}

bool valid_instance_id(const std::string& id) {
  return !id.empty() && id.size() <= 64 &&
         std::all_of(id.begin(), id.end(), [](unsigned char c) { return std::isalnum(c) || c == '-' || c == '_'; });
}

}  // namespace

std::string format_record(const NodeRecord& r) {
  return escape(r.instance_id) + "\t" + escape(r.node_id) + "\t" + std::string(to_string(r.status)) + "\t" +
         std::to_string(r.started_at) + "\t" + std::to_string(r.finished_at) + "\t" + escape(r.detail);
}

NodeRecord parse_record(const std::string& line) {
  std::vector<std::string> f;
  std::size_t start = 0;
  while (true) {
    auto tab = line.find('\t', start);
    f.push_back(line.substr(start, tab == std::string::npos ? std::string::npos : tab - start));
    if (tab == std::string::npos) break;
    start = tab + 1;
  }
  if (f.size() != 6) throw WorkflowError("execution log record has " + std::to_string(f.size()) + " fields, expected 6");
  NodeRecord r;
  r.instance_id = unescape(f[0]);
  r.node_id = unescape(f[1]);
  auto st = parse_node_status(f[2]);
  if (!st) throw WorkflowError("execution log record has unknown status " + f[2]);
  r.status = *st;
  try {
    r.started_at = std::stoll(f[3]);
    r.finished_at = std::stoll(f[4]);
  } catch (const std::exception&) {
    throw WorkflowError("execution log record has a bad timestamp");
  }
  r.detail = unescape(f[5]);
  return r;
}

ExecutionStore::ExecutionStore(std::filesystem::path dir) : dir_(std::move(dir)) {
  std::error_code ec;
  std::filesystem::create_directories(dir_, ec);
  if (ec) throw WorkflowError("cannot create execution store " + dir_.string() + ": " + ec.message());
}

std::filesystem::path ExecutionStore::file_of(const std::string& instance_id) const {
  if (!valid_instance_id(instance_id)) throw WorkflowError("invalid process instance id");
  return dir_ / (instance_id + ".log");
}

std::string ExecutionStore::new_instance_id() {
  std::lock_guard lock(mu_);
  char buf[48];
  while (true) {
    std::snprintf(buf, sizeof buf, "q%llx-%llu", static_cast<unsigned long long>(now_us()),
                  static_cast<unsigned long long>(++counter_));
    if (!std::filesystem::exists(dir_ / (std::string(buf) + ".log"))) return buf;
  }
}

void ExecutionStore::append(const NodeRecord& record) {
  auto path = file_of(record.instance_id);
  std::lock_guard lock(mu_);
  std::ofstream out(path, std::ios::app);
  out << format_record(record) << '\n';
  out.flush();
  if (!out) throw WorkflowError("cannot write execution log " + path.string());
}

std::vector<NodeRecord> ExecutionStore::records(const std::string& instance_id) const {
  if (!valid_instance_id(instance_id)) return {};
  std::lock_guard lock(mu_);
  std::ifstream in(file_of(instance_id));
  std::vector<NodeRecord> out;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty()) out.push_back(parse_record(line));
  }
  return out;
}

std::vector<NodeRecord> ExecutionStore::latest(const std::string& instance_id) const {
  std::vector<NodeRecord> out;
  for (auto& r : records(instance_id)) {
    auto it = std::find_if(out.begin(), out.end(), [&](const auto& x) { return x.node_id == r.node_id; });
    if (it == out.end()) {
      out.push_back(std::move(r));
    } else {
      *it = std::move(r);
    }
  }
  return out;
}

bool ExecutionStore::exists(const std::string& instance_id) const {
  return valid_instance_id(instance_id) && std::filesystem::exists(dir_ / (instance_id + ".log"));
}

void ExecutionStore::save_model(const std::string& instance_id, const ProcessModel& model) {
  if (!valid_instance_id(instance_id)) throw WorkflowError("invalid process instance id");
  auto path = dir_ / (instance_id + ".bpmn");
  file_of(instance_id);
  auto xml = serialize_bpmn(model);
  std::lock_guard lock(mu_);
  std::ofstream out(path);
  out << xml;
  if (!out) throw WorkflowError("cannot write " + path.string());
}

std::optional<ProcessModel> ExecutionStore::load_model(const std::string& instance_id) const {
  if (!valid_instance_id(instance_id)) return std::nullopt;
  std::ifstream in(dir_ / (instance_id + ".bpmn"));
  if (!in) return std::nullopt;
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_bpmn(buf.str());
}

RunResult run(const ProcessModel& model, const std::map<std::string, TaskCallback>& callbacks, ExecutionStore& store,
              std::string instance_id) {
  model.validate();
  for (const auto& n : model.nodes) {
    if (n.kind == NodeKind::Task && !callbacks.contains(n.task_ref)) {
      throw WorkflowError("no callback registered for task " + n.task_ref);
    }
  }
  RunResult result;
  result.instance_id = instance_id.empty() ? store.new_instance_id() : std::move(instance_id);
  auto order = model.topological_order();
  store.save_model(result.instance_id, model);

  for (const auto& id : order) store.append({result.instance_id, id, NodeStatus::Pending, 0, 0, ""});

  std::int64_t last = 0;
  auto stamp = [&] { return last = std::max(last, now_us()); };
  for (const auto& id : order) {
    const ProcessNode& node = *model.find(id);
    NodeRecord rec{result.instance_id, id, NodeStatus::Running, stamp(), 0, ""};
    store.append(rec);
    try {
      if (node.kind == NodeKind::Task) rec.detail = callbacks.at(node.task_ref)();
      rec.status = NodeStatus::Done;
    } catch (const std::exception& e) {
      rec.status = NodeStatus::Failed;
      rec.detail = e.what();
      result.error = std::current_exception();
    }
    rec.finished_at = stamp();
    store.append(rec);
    if (rec.status == NodeStatus::Failed) {
      result.status = NodeStatus::Failed;
      result.failed_node = id;
      break;
    }
  }
  return result;
}

}  // namespace fedlog
