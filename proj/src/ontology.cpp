#include "fedlog/ontology.hpp"

#include <cctype>
#include <charconv>
#include <fstream>
#include <set>
#include <sstream>

#include "fedlog/error.hpp"

namespace fedlog {

std::string_view to_string(ValueKind kind) {
  switch (kind) {
    case ValueKind::Text:
      return "text";
    case ValueKind::Integer:
      return "integer";
    case ValueKind::Decimal:
      return "decimal";
    case ValueKind::Flag:
      return "flag";
  }
  return "text";
}

namespace {

struct Word {
  std::string text;
  std::size_t column;
};

std::vector<Word> split_words(std::string_view line) {
  std::vector<Word> words;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && (line[i] == ' ' || line[i] == '\t' || line[i] == '\r')) ++i;
    if (i >= line.size()) break;
    std::size_t j = i;
    while (j < line.size() && line[j] != ' ' && line[j] != '\t' && line[j] != '\r') ++j;
    words.push_back({std::string(line.substr(i, j - i)), i + 1});
    i = j;
  }
  return words;
}

bool valid_identifier(std::string_view s) {
  if (s.empty()) return false;
  auto c0 = static_cast<unsigned char>(s[0]);
  if (!std::isalpha(c0) && s[0] != '_') return false;
  for (char c : s) {
    if (!std::isalnum(static_cast<unsigned char>(c)) && c != '_') return false;
  }
  return true;
}

std::optional<ValueKind> parse_value_kind(std::string_view s) {
  if (s == "text") return ValueKind::Text;
  if (s == "integer") return ValueKind::Integer;
  if (s == "decimal") return ValueKind::Decimal;
  if (s == "flag") return ValueKind::Flag;
  return std::nullopt;
}

}  // namespace

Ontology Ontology::load(std::string_view source_text) {
  Ontology onto;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos <= source_text.size()) {
    auto eol = source_text.find('\n', pos);
    if (eol == std::string_view::npos) eol = source_text.size();
    std::string_view line = source_text.substr(pos, eol - pos);
    pos = eol + 1;
    ++line_no;
    if (auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    auto words = split_words(line);
    if (words.empty()) {
      if (eol == source_text.size()) break;
      continue;
    }

    const auto& keyword = words[0];
    if (words.size() < 2) throw ParseError(line_no, keyword.column, "declaration '" + keyword.text + "' needs a name");
    const auto& name = words[1];
    if (!valid_identifier(name.text)) throw ParseError(line_no, name.column, "invalid identifier '" + name.text + "'");

    std::map<std::string, Word> options;
    for (std::size_t k = 2; k < words.size(); ++k) {
      auto eq = words[k].text.find('=');
      if (eq == std::string::npos || eq == 0) {
        throw ParseError(line_no, words[k].column, "expected key=value, found '" + words[k].text + "'");
      }
      std::string key = words[k].text.substr(0, eq);
      Word value{words[k].text.substr(eq + 1), words[k].column + eq + 1};
      if (!options.emplace(key, value).second) {
        throw ParseError(line_no, words[k].column, "option '" + key + "' given twice");
      }
    }
    auto take = [&](const std::string& key, bool required) -> std::optional<Word> {
      auto it = options.find(key);
      if (it == options.end()) {
        if (required) throw ParseError(line_no, keyword.column, keyword.text + " " + name.text + " is missing " + key + "=");
        return std::nullopt;
      }
      Word w = it->second;
      options.erase(it);
      return w;
    };
    auto identifier = [&](const std::optional<Word>& w) -> std::optional<std::string> {
      if (!w) return std::nullopt;
      if (!valid_identifier(w->text)) throw ParseError(line_no, w->column, "invalid identifier '" + w->text + "'");
      return w->text;
    };

    if (keyword.text == "class") {
      onto.classes_.push_back(OntoClass{name.text, {}});
    } else if (keyword.text == "dataprop") {
      DataProperty dp;
      dp.name = name.text;
      dp.domain = *identifier(take("domain", true));
      auto kind = take("kind", true);
      auto vk = parse_value_kind(kind->text);
      if (!vk) throw ParseError(line_no, kind->column, "unknown value kind '" + kind->text + "'");
      dp.value_kind = *vk;
      onto.data_properties_.push_back(std::move(dp));
    } else if (keyword.text == "objprop") {
      ObjectProperty op;
      op.name = name.text;
      op.domain = *identifier(take("domain", true));
      op.range = *identifier(take("range", true));
      op.inverse_of = identifier(take("inverse", false));
      op.parent = identifier(take("parent", false));
      if (auto q = take("qualifiers", false)) {
        int n = -1;
        auto [ptr, ec] = std::from_chars(q->text.data(), q->text.data() + q->text.size(), n);
        if (ec != std::errc{} || ptr != q->text.data() + q->text.size() || n < 0) {
          throw ParseError(line_no, q->column, "qualifiers must be a non-negative integer");
        }
        op.qualifier_arity = n;
      }
      onto.object_properties_.push_back(std::move(op));
    } else {
      throw ParseError(line_no, keyword.column, "unknown declaration '" + keyword.text + "'");
    }
    if (!options.empty()) {
      const auto& [key, w] = *options.begin();
      throw ParseError(line_no, w.column, "unknown option '" + key + "' for " + keyword.text);
    }
    if (eol == source_text.size()) break;
  }
  onto.resolve();
  return onto;
}

Ontology Ontology::load_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw OntologyError("cannot read ontology file " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  return load(buf.str());
}

void Ontology::resolve() {
  class_index_.clear();
  data_index_.clear();
  object_index_.clear();
  std::set<std::string, std::less<>> all_names;
  auto claim = [&](const std::string& name) {
    if (!all_names.insert(name).second) throw OntologyError("duplicate symbol '" + name + "'");
  };
  for (std::size_t i = 0; i < classes_.size(); ++i) {
    claim(classes_[i].name);
    class_index_.emplace(classes_[i].name, i);
    classes_[i].attributes.clear();
  }
  for (std::size_t i = 0; i < data_properties_.size(); ++i) {
    claim(data_properties_[i].name);
    data_index_.emplace(data_properties_[i].name, i);
  }
  for (std::size_t i = 0; i < object_properties_.size(); ++i) {
    claim(object_properties_[i].name);
    object_index_.emplace(object_properties_[i].name, i);
  }

  auto require_class = [&](const std::string& cls, const std::string& owner) {
    if (!class_index_.contains(cls)) throw OntologyError("dangling reference: " + owner + " refers to undeclared class '" + cls + "'");
  };
  for (const auto& dp : data_properties_) {
    require_class(dp.domain, dp.name);
    classes_[class_index_.find(dp.domain)->second].attributes.push_back(dp.name);
  }
  for (const auto& op : object_properties_) {
    require_class(op.domain, op.name);
    require_class(op.range, op.name);
    for (const auto* link : {&op.inverse_of, &op.parent}) {
      if (*link && !object_index_.contains(**link)) {
        throw OntologyError("dangling reference: " + op.name + " refers to undeclared object property '" + **link + "'");
      }
    }
  }
  for (const auto& op : object_properties_) {
    if (op.inverse_of) {
      const auto& inv = object_properties_[object_index_.find(*op.inverse_of)->second];
      if (!inv.inverse_of || *inv.inverse_of != op.name) {
        throw OntologyError("inverse asymmetry: " + op.name + " declares inverse " + inv.name + " but " + inv.name +
                            " does not declare inverse " + op.name);
      }
      if (inv.domain != op.range || inv.range != op.domain) {
        throw OntologyError("inverse asymmetry: " + op.name + " and " + inv.name + " must have swapped domain and range");
      }
      if (inv.qualifier_arity != op.qualifier_arity) {
        throw OntologyError("inverse asymmetry: " + op.name + " and " + inv.name + " differ in qualifier arity");
      }
    }
    if (op.parent) {
      const auto& parent = object_properties_[object_index_.find(*op.parent)->second];
      if (parent.qualifier_arity != op.qualifier_arity) {
        throw OntologyError("sub-property " + op.name + " must have the qualifier arity of its parent " + parent.name);
      }
      std::set<std::string> seen{op.name};
      const ObjectProperty* cur = &op;
      while (cur->parent) {
        if (!seen.insert(*cur->parent).second) {
          throw OntologyError("cyclic sub-property chain through " + op.name);
        }
        cur = &object_properties_[object_index_.find(*cur->parent)->second];
      }
    }
  }
}

std::string Ontology::serialize() const {
  std::string out;
  for (const auto& c : classes_) out += "class " + c.name + "\n";
  for (const auto& dp : data_properties_) {
    out += "dataprop " + dp.name + " domain=" + dp.domain + " kind=" + std::string(to_string(dp.value_kind)) + "\n";
  }
  for (const auto& op : object_properties_) {
    out += "objprop " + op.name + " domain=" + op.domain + " range=" + op.range;
    if (op.inverse_of) out += " inverse=" + *op.inverse_of;
    if (op.parent) out += " parent=" + *op.parent;
    if (op.qualifier_arity > 0) out += " qualifiers=" + std::to_string(op.qualifier_arity);
    out += "\n";
  }
  return out;
}

std::string Ontology::to_owl_functional(std::string_view iri) const {
  std::string base(iri);
  auto ref = [&](const std::string& n) { return "<" + base + "#" + n + ">"; };
  auto xsd = [](ValueKind k) -> std::string {
    switch (k) {
      case ValueKind::Integer:
        return "xsd:integer";
      case ValueKind::Decimal:
        return "xsd:decimal";
      case ValueKind::Flag:
        return "xsd:boolean";
      case ValueKind::Text:
        break;
    }
    return "xsd:string";
  };
  std::string out = "Prefix(xsd:=<http://www.w3.org/2001/XMLSchema#>)\nOntology(<" + base + ">\n";
  for (const auto& c : classes_) out += "  Declaration(Class(" + ref(c.name) + "))\n";
  for (const auto& dp : data_properties_) {
    out += "  Declaration(DataProperty(" + ref(dp.name) + "))\n";
    out += "  DataPropertyDomain(" + ref(dp.name) + " " + ref(dp.domain) + ")\n";
    out += "  DataPropertyRange(" + ref(dp.name) + " " + xsd(dp.value_kind) + ")\n";
  }
  for (const auto& op : object_properties_) {
    out += "  Declaration(ObjectProperty(" + ref(op.name) + "))\n";
    out += "  ObjectPropertyDomain(" + ref(op.name) + " " + ref(op.domain) + ")\n";
    out += "  ObjectPropertyRange(" + ref(op.name) + " " + ref(op.range) + ")\n";
    if (op.inverse_of && op.name < *op.inverse_of) {
      out += "  InverseObjectProperties(" + ref(op.name) + " " + ref(*op.inverse_of) + ")\n";
    }
    if (op.parent) out += "  SubObjectPropertyOf(" + ref(op.name) + " " + ref(*op.parent) + ")\n";
  }
  out += ")\n";
  return out;
}

const OntoClass* Ontology::find_class(std::string_view name) const {
  auto it = class_index_.find(name);
  return it == class_index_.end() ? nullptr : &classes_[it->second];
}

const DataProperty* Ontology::find_data_property(std::string_view name) const {
  auto it = data_index_.find(name);
  return it == data_index_.end() ? nullptr : &data_properties_[it->second];
}

const ObjectProperty* Ontology::find_object_property(std::string_view name) const {
  auto it = object_index_.find(name);
  return it == object_index_.end() ? nullptr : &object_properties_[it->second];
}

std::optional<PropertyDescriptor> Ontology::lookup_property(std::string_view name, PropertyKind kind) const {
  if (kind == PropertyKind::Object) {
    const auto* op = find_object_property(name);
    if (!op) return std::nullopt;
    return PropertyDescriptor{PropertyKind::Object, op->name, op->domain, op->range, std::nullopt, op->qualifier_arity};
  }
  const auto* dp = find_data_property(name);
  if (!dp) return std::nullopt;
  return PropertyDescriptor{PropertyKind::Data, dp->name, dp->domain, std::nullopt, dp->value_kind, 0};
}

std::vector<const ObjectProperty*> Ontology::sub_properties(std::string_view name) const {
  std::vector<const ObjectProperty*> out;
  for (const auto& op : object_properties_) {
    if (op.parent && *op.parent == name) out.push_back(&op);
  }
  return out;
}

}  // namespace fedlog
