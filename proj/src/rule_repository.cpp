#include "fedlog/rule_repository.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

#include "fedlog/error.hpp"

namespace fedlog {

std::string_view to_string(ReasoningRuleKind kind) {
  switch (kind) {
    case ReasoningRuleKind::AttrInclusion:
      return "AttrInclusion";
    case ReasoningRuleKind::DomainRange:
      return "DomainRange";
    case ReasoningRuleKind::InverseEquiv:
      return "InverseEquiv";
    case ReasoningRuleKind::SubPropInherit:
      return "SubPropInherit";
  }
  return "?";
}

std::vector<ReasoningRule> generate_reasoning_rules(const Ontology& ontology) {
  std::vector<ReasoningRule> rules;
  for (const auto& dp : ontology.data_properties()) {
    rules.push_back({ReasoningRuleKind::AttrInclusion, {dp.name, dp.domain}});
  }
  for (const auto& op : ontology.object_properties()) {
    rules.push_back({ReasoningRuleKind::DomainRange, {op.name, op.domain, op.range}});
    // one rule per unordered pair
    if (op.inverse_of && op.name < *op.inverse_of) {
      rules.push_back({ReasoningRuleKind::InverseEquiv, {op.name, *op.inverse_of}});
    }
    if (op.parent) rules.push_back({ReasoningRuleKind::SubPropInherit, {op.name, *op.parent}});
  }
  std::sort(rules.begin(), rules.end());
  return rules;
}

MappingKind mapping_kind_of(AtomKind kind) {
  if (kind == AtomKind::Relationship) return MappingKind::Relationship;
  if (kind == AtomKind::Attribute) return MappingKind::Attribute;
  throw RuleError("only relationship and attribute atoms have mapping rules");
}

RuleRepository::RuleRepository(std::vector<ReasoningRule> reasoning, std::vector<MappingRule> mappings)
    : reasoning_(std::move(reasoning)), mappings_(std::move(mappings)) {
  for (std::size_t i = 0; i < reasoning_.size(); ++i) {
    const auto& r = reasoning_[i];
    if (r.symbols.empty()) throw RuleError("reasoning rule without symbols");
    reasoning_index_.emplace(r.symbols[0], i);
    if (r.kind == ReasoningRuleKind::InverseEquiv || r.kind == ReasoningRuleKind::SubPropInherit) {
      reasoning_index_.emplace(r.symbols.at(1), i);
    }
  }
  for (std::size_t i = 0; i < mappings_.size(); ++i) {
    const auto& m = mappings_[i];
    auto key = std::make_pair(mapping_kind_of(m.head.kind), m.head.predicate);
    if (!mapping_index_.emplace(key, i).second) {
      throw RuleError("duplicate mapping rule for " + print_atom(m.head));
    }
  }
}

RuleRepository RuleRepository::build(const Ontology& ontology, std::vector<MappingRule> mappings) {
  return RuleRepository(generate_reasoning_rules(ontology), std::move(mappings));
}

std::vector<const ReasoningRule*> RuleRepository::rules_for(std::string_view property) const {
  std::vector<const ReasoningRule*> out;
  auto [lo, hi] = reasoning_index_.equal_range(property);
  for (auto it = lo; it != hi; ++it) out.push_back(&reasoning_[it->second]);
  return out;
}

const ReasoningRule* RuleRepository::domain_range(std::string_view property) const {
  for (const auto* r : rules_for(property)) {
    if (r->kind == ReasoningRuleKind::DomainRange) return r;
  }
  return nullptr;
}

const ReasoningRule* RuleRepository::attr_inclusion(std::string_view property) const {
  for (const auto* r : rules_for(property)) {
    if (r->kind == ReasoningRuleKind::AttrInclusion) return r;
  }
  return nullptr;
}

const std::string* RuleRepository::inverse_of(std::string_view property) const {
  for (const auto* r : rules_for(property)) {
    if (r->kind != ReasoningRuleKind::InverseEquiv) continue;
    return r->symbols[0] == property ? &r->symbols[1] : &r->symbols[0];
  }
  return nullptr;
}

std::vector<std::string> RuleRepository::sub_properties(std::string_view property) const {
  std::vector<std::string> out;
  for (const auto* r : rules_for(property)) {
    if (r->kind == ReasoningRuleKind::SubPropInherit && r->symbols[1] == property) out.push_back(r->symbols[0]);
  }
  std::sort(out.begin(), out.end());
  return out;
}

const MappingRule* RuleRepository::find_mapping(MappingKind kind, std::string_view predicate) const {
  auto it = mapping_index_.find(std::make_pair(kind, std::string(predicate)));
  return it == mapping_index_.end() ? nullptr : &mappings_[it->second];
}

std::vector<MappingRule> load_mapping_dir(const std::filesystem::path& dir) {
  namespace fs = std::filesystem;
  if (!fs::is_directory(dir)) throw RuleError("mapping directory not found: " + dir.string());
  std::vector<fs::path> files;
  for (const auto& entry : fs::directory_iterator(dir)) {
    const auto name = entry.path().filename().string();
    if (entry.is_regular_file() && name.ends_with(".map.dlog")) files.push_back(entry.path());
  }
  std::sort(files.begin(), files.end());
  std::vector<MappingRule> rules;
  for (const auto& f : files) {
    std::ifstream in(f);
    std::stringstream buf;
    buf << in.rdbuf();
    auto parsed = parse_mapping_rules(buf.str());
    rules.insert(rules.end(), std::make_move_iterator(parsed.begin()), std::make_move_iterator(parsed.end()));
  }
  return rules;
}

}  // namespace fedlog
