#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "fedlog/datalog.hpp"

namespace fedlog {

enum class SlotKind { Enum, Integer };

struct TemplateSlot {
  std::string name;
  SlotKind kind = SlotKind::Enum;
  std::vector<std::string> values;  // enum
  long min = 0;                     // integer, inclusive
  long max = 0;
};

struct QueryTemplate {
  std::string id;
  /// Natural-language question with `{slot}` placeholders.
  std::string text;
  std::vector<TemplateSlot> slots;
  /// Query text; `{slot}` holes may only sit inside `<...>` constants.
  std::string skeleton;

  const TemplateSlot* find_slot(const std::string& name) const;
  nlohmann::json to_json() const;
};

/// YAML document with a `templates` sequence; see data/templates.yaml.
std::vector<QueryTemplate> parse_templates(const std::string& yaml_text);
std::vector<QueryTemplate> load_templates(const std::filesystem::path& file);

/// Skeleton with the holes filled, unparsed.
std::string substitute(const QueryTemplate& tmpl, const std::map<std::string, std::string>& values);
DatalogQuery instantiate(const QueryTemplate& tmpl, const std::map<std::string, std::string>& values);

const QueryTemplate* find_template(const std::vector<QueryTemplate>& templates, const std::string& id);

}  // namespace fedlog
