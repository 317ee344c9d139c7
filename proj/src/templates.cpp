#include "fedlog/templates.hpp"

#include <yaml-cpp/yaml.h>

#include <algorithm>
#include <fstream>
#include <regex>
#include <sstream>
#include <set>

#include "fedlog/error.hpp"

namespace fedlog {

const TemplateSlot* QueryTemplate::find_slot(const std::string& name) const {
  auto it = std::find_if(slots.begin(), slots.end(), [&](const auto& s) { return s.name == name; });
  return it == slots.end() ? nullptr : &*it;
}

nlohmann::json QueryTemplate::to_json() const {
  nlohmann::json j;
  j["id"] = id;
  j["text"] = text;
  j["skeleton"] = skeleton;
  j["slots"] = nlohmann::json::array();
  for (const auto& s : slots) {
    nlohmann::json js{{"name", s.name}, {"kind", s.kind == SlotKind::Enum ? "enum" : "integer"}};
    if (s.kind == SlotKind::Enum) {
      js["values"] = s.values;
    } else {
      js["min"] = s.min;
      js["max"] = s.max;
    }
    j["slots"].push_back(std::move(js));
  }
  return j;
}

namespace {

const std::regex& hole_pattern() {
  static const std::regex re(R"(\{([A-Za-z_][A-Za-z0-9_]*)\})");
  return re;
}

std::vector<std::string> holes(const std::string& text) {
  std::vector<std::string> out;
  for (std::sregex_iterator it(text.begin(), text.end(), hole_pattern()), end; it != end; ++it) {
    out.push_back((*it)[1].str());
  }
  return out;
}

// every hole must sit between '<' and '>'
void check_holes_in_constants(const QueryTemplate& t) {
  for (std::sregex_iterator it(t.skeleton.begin(), t.skeleton.end(), hole_pattern()), end; it != end; ++it) {
    auto pos = static_cast<std::size_t>(it->position());
    auto open = t.skeleton.rfind('<', pos);
    auto close = t.skeleton.rfind('>', pos);
    bool inside = open != std::string::npos && (close == std::string::npos || close < open) &&
                  t.skeleton.find('>', pos) != std::string::npos;
    if (!inside) throw TemplateError("template " + t.id + ": slot {" + (*it)[1].str() + "} is not inside a <...> constant");
  }
}

std::string sample_value(const TemplateSlot& s) { return s.kind == SlotKind::Enum ? s.values.front() : std::to_string(s.min); }

void check_value(const QueryTemplate& t, const TemplateSlot& s, const std::string& value) {
  if (s.kind == SlotKind::Enum) {
    if (std::find(s.values.begin(), s.values.end(), value) == s.values.end()) {
      std::string allowed;
      for (const auto& v : s.values) allowed += (allowed.empty() ? "" : ", ") + v;
      throw TemplateError("template " + t.id + ": value '" + value + "' for slot " + s.name + " is not one of {" +
                          allowed + "}");
    }
    return;
  }
  std::size_t used = 0;
  long v = 0;
  try {
    v = std::stol(value, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used == 0 || used != value.size()) {
    throw TemplateError("template " + t.id + ": slot " + s.name + " needs an integer, got '" + value + "'");
  }
  if (v < s.min || v > s.max) {
    throw TemplateError("template " + t.id + ": slot " + s.name + " value " + value + " is outside [" +
                        std::to_string(s.min) + ", " + std::to_string(s.max) + "]");
  }
}

std::string scalar(const YAML::Node& node, const std::string& what) {
  if (!node || !node.IsScalar()) throw TemplateError(what + " must be a scalar");
  return node.as<std::string>();
}

}  // namespace

std::vector<QueryTemplate> parse_templates(const std::string& yaml_text) {
  YAML::Node doc;
  try {
    doc = YAML::Load(yaml_text);
  } catch (const YAML::Exception& e) {
    throw TemplateError(std::string("template file: ") + e.what());
  }
  std::vector<QueryTemplate> out;
  if (!doc || doc.IsNull()) return out;
  if (!doc.IsMap()) throw TemplateError("template file must be a mapping with a `templates` list");
  auto list = doc["templates"];
  if (!list || list.IsNull()) return out;
  if (!list.IsSequence()) throw TemplateError("`templates` must be a list");

  std::set<std::string> ids;
  try {
    for (const auto& node : list) {
      QueryTemplate t;
      t.id = scalar(node["id"], "template id");
      if (!ids.insert(t.id).second) throw TemplateError("duplicate template id " + t.id);
      t.text = scalar(node["text"], "template " + t.id + " text");
      t.skeleton = scalar(node["skeleton"], "template " + t.id + " skeleton");
      if (auto slots = node["slots"]; slots) {
        if (!slots.IsSequence()) throw TemplateError("template " + t.id + ": slots must be a list");
        for (const auto& sn : slots) {
          TemplateSlot s;
          s.name = scalar(sn["name"], "template " + t.id + " slot name");
          if (t.find_slot(s.name)) throw TemplateError("template " + t.id + ": slot " + s.name + " declared twice");
          auto kind = scalar(sn["kind"], "slot " + s.name + " kind");
          if (kind == "enum") {
            s.kind = SlotKind::Enum;
            if (!sn["values"] || !sn["values"].IsSequence() || sn["values"].size() == 0) {
              throw TemplateError("template " + t.id + ": enum slot " + s.name + " needs a non-empty values list");
            }
            for (const auto& v : sn["values"]) s.values.push_back(scalar(v, "slot " + s.name + " value"));
          } else if (kind == "integer") {
            s.kind = SlotKind::Integer;
            s.min = sn["min"].as<long>();
            s.max = sn["max"].as<long>();
            if (s.min > s.max) throw TemplateError("template " + t.id + ": slot " + s.name + " has min > max");
          } else {
            throw TemplateError("template " + t.id + ": slot " + s.name + " has unknown kind " + kind);
          }
          t.slots.push_back(std::move(s));
        }
      }

      std::set<std::string> in_skeleton;
      for (const auto& h : holes(t.skeleton)) in_skeleton.insert(h);
      for (const auto& h : holes(t.text)) {
        if (!t.find_slot(h)) throw TemplateError("template " + t.id + ": text names undeclared slot {" + h + "}");
        if (!in_skeleton.contains(h)) throw TemplateError("template " + t.id + ": slot {" + h + "} is missing from the skeleton");
      }
      for (const auto& h : in_skeleton) {
        if (!t.find_slot(h)) throw TemplateError("template " + t.id + ": skeleton names undeclared slot {" + h + "}");
      }
      for (const auto& s : t.slots) {
        if (!in_skeleton.contains(s.name)) throw TemplateError("template " + t.id + ": slot {" + s.name + "} is missing from the skeleton");
      }
      check_holes_in_constants(t);

      std::map<std::string, std::string> sample;
      for (const auto& s : t.slots) sample[s.name] = sample_value(s);
      try {
        instantiate(t, sample);
      } catch (const TemplateError&) {
        throw;
      } catch (const Error& e) {
        throw TemplateError("template " + t.id + ": skeleton does not parse: " + e.what());
      }
      out.push_back(std::move(t));
    }
  } catch (const YAML::Exception& e) {
    throw TemplateError(std::string("template file: ") + e.what());
  }
  return out;
}

std::vector<QueryTemplate> load_templates(const std::filesystem::path& file) {
  std::ifstream in(file);
  if (!in) throw TemplateError("cannot read template file " + file.string());
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_templates(buf.str());
}

std::string substitute(const QueryTemplate& tmpl, const std::map<std::string, std::string>& values) {
  for (const auto& s : tmpl.slots) {
    auto it = values.find(s.name);
    if (it == values.end()) throw TemplateError("template " + tmpl.id + ": missing value for slot " + s.name);
    check_value(tmpl, s, it->second);
  }
  for (const auto& [name, v] : values) {
    if (!tmpl.find_slot(name)) throw TemplateError("template " + tmpl.id + " has no slot " + name);
  }
  std::string out;
  auto begin = tmpl.skeleton.cbegin();
  for (std::sregex_iterator it(tmpl.skeleton.begin(), tmpl.skeleton.end(), hole_pattern()), end; it != end; ++it) {
    out.append(begin, (*it)[0].first);
    out += values.at((*it)[1].str());
    begin = (*it)[0].second;
  }
  out.append(begin, tmpl.skeleton.cend());
  return out;
}

DatalogQuery instantiate(const QueryTemplate& tmpl, const std::map<std::string, std::string>& values) {
  return parse_query(substitute(tmpl, values));
}

const QueryTemplate* find_template(const std::vector<QueryTemplate>& templates, const std::string& id) {
  auto it = std::find_if(templates.begin(), templates.end(), [&](const auto& t) { return t.id == id; });
  return it == templates.end() ? nullptr : &*it;
}

}  // namespace fedlog
