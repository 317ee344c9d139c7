#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace fedlog {

enum class ValueKind { Text, Integer, Decimal, Flag };

std::string_view to_string(ValueKind kind);

struct OntoClass {
  std::string name;
  /// Data properties whose domain is this class, in declaration order.
  std::vector<std::string> attributes;

  bool operator==(const OntoClass&) const = default;
};

struct DataProperty {
  std::string name;
  std::string domain;
  ValueKind value_kind = ValueKind::Text;

  bool operator==(const DataProperty&) const = default;
};

struct ObjectProperty {
  std::string name;
  std::string domain;
  std::string range;
  std::optional<std::string> inverse_of;
  std::optional<std::string> parent;
  /// Extra untyped positions after subject and object, e.g. a sampling day.
  int qualifier_arity = 0;

  std::size_t arity() const { return 2 + static_cast<std::size_t>(qualifier_arity); }

  bool operator==(const ObjectProperty&) const = default;
};

enum class PropertyKind { Object, Data };

/// Uniform view over either property kind, returned by lookups.
struct PropertyDescriptor {
  PropertyKind kind;
  std::string name;
  std::string domain;
  std::optional<std::string> range;
  std::optional<ValueKind> value_kind;
  int qualifier_arity = 0;

  bool operator==(const PropertyDescriptor&) const = default;
};

/// Immutable domain model: classes, data properties and object properties.
/// Every cross-reference is resolved at load time.
class Ontology {
 public:
  Ontology() = default;

  /// Reads the line-oriented declaration format:
  ///   class <Name>
  ///   dataprop <name> domain=<Class> kind=<text|integer|decimal|flag>
  ///   objprop <name> domain=<Class> range=<Class> [inverse=<p>] [parent=<p>] [qualifiers=<n>]
  /// Declarations may appear in any order; `#` starts a comment.
  static Ontology load(std::string_view source_text);
  static Ontology load_file(const std::filesystem::path& path);

  /// Declaration text that `load` maps back to an equal model.
  std::string serialize() const;

  /// OWL 2 functional-syntax rendering of the same constructs.
  std::string to_owl_functional(std::string_view iri) const;

  const std::vector<OntoClass>& classes() const { return classes_; }
  const std::vector<DataProperty>& data_properties() const { return data_properties_; }
  const std::vector<ObjectProperty>& object_properties() const { return object_properties_; }

  const OntoClass* find_class(std::string_view name) const;
  const DataProperty* find_data_property(std::string_view name) const;
  const ObjectProperty* find_object_property(std::string_view name) const;

  std::optional<PropertyDescriptor> lookup_property(std::string_view name, PropertyKind kind) const;

  /// Direct sub-properties of `name` in declaration order.
  std::vector<const ObjectProperty*> sub_properties(std::string_view name) const;

  bool operator==(const Ontology& other) const {
    return classes_ == other.classes_ && data_properties_ == other.data_properties_ &&
           object_properties_ == other.object_properties_;
  }

 private:
  void resolve();

  std::vector<OntoClass> classes_;
  std::vector<DataProperty> data_properties_;
  std::vector<ObjectProperty> object_properties_;
  std::map<std::string, std::size_t, std::less<>> class_index_;
  std::map<std::string, std::size_t, std::less<>> data_index_;
  std::map<std::string, std::size_t, std::less<>> object_index_;
};

}  // namespace fedlog
