#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "fedlog/datalog.hpp"
#include "fedlog/ontology.hpp"

namespace fedlog {

enum class ReasoningRuleKind { AttrInclusion, DomainRange, InverseEquiv, SubPropInherit };

std::string_view to_string(ReasoningRuleKind kind);

/// A user-level rule instantiated from the ontology. Symbol layout by kind:
///   AttrInclusion   {data property, domain class}
///   DomainRange     {object property, domain class, range class}
///   InverseEquiv    {p, q} with p < q
///   SubPropInherit  {sub-property, parent}
struct ReasoningRule {
  ReasoningRuleKind kind;
  std::vector<std::string> symbols;

  bool operator==(const ReasoningRule&) const = default;
  auto operator<=>(const ReasoningRule&) const = default;
};

/// Sorted by (kind, symbols).
std::vector<ReasoningRule> generate_reasoning_rules(const Ontology& ontology);

enum class MappingKind { Relationship, Attribute };

MappingKind mapping_kind_of(AtomKind kind);

/// Both rule families, immutable after construction.
class RuleRepository {
 public:
  RuleRepository() = default;
  RuleRepository(std::vector<ReasoningRule> reasoning, std::vector<MappingRule> mappings);

  static RuleRepository build(const Ontology& ontology, std::vector<MappingRule> mappings);

  const std::vector<ReasoningRule>& reasoning_rules() const { return reasoning_; }
  const std::vector<MappingRule>& mapping_rules() const { return mappings_; }

  /// Reasoning rules whose first symbol (the property) is `property`, plus
  /// inverse rules naming it in either slot.
  std::vector<const ReasoningRule*> rules_for(std::string_view property) const;

  const ReasoningRule* domain_range(std::string_view property) const;
  const ReasoningRule* attr_inclusion(std::string_view property) const;
  /// The property paired with `property` by an InverseEquiv rule, if any.
  const std::string* inverse_of(std::string_view property) const;
  /// Direct sub-properties per SubPropInherit rules, sorted.
  std::vector<std::string> sub_properties(std::string_view property) const;

  const MappingRule* find_mapping(MappingKind kind, std::string_view predicate) const;

 private:
  std::vector<ReasoningRule> reasoning_;
  std::vector<MappingRule> mappings_;
  std::multimap<std::string, std::size_t, std::less<>> reasoning_index_;
  std::map<std::pair<MappingKind, std::string>, std::size_t, std::less<>> mapping_index_;
};

/// Reads every `<source_id>.map.dlog` in `dir`, in file-name order.
std::vector<MappingRule> load_mapping_dir(const std::filesystem::path& dir);

}  // namespace fedlog
