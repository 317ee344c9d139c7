#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace fedlog {

enum class SourceKind { Relational, Rest };
enum class SourceMode { Local, Online };

std::string_view to_string(SourceKind kind);
std::string_view to_string(SourceMode mode);
std::optional<SourceMode> parse_source_mode(std::string_view text);

struct RelationSchema {
  /// Qualified name as it appears in source atoms, e.g. `fsmm.microbe`.
  std::string name;
  std::vector<std::string> columns;
  std::string key_column;
  /// Whether `key_column` identifies rows; only then may atoms that share the
  /// key be merged into one table reference.
  bool unique_key = true;
  std::vector<std::string> link_columns;
  /// Prefix for link cells stored as site-relative paths.
  std::string link_base;
  /// REST only: column -> dotted field path in a response record. Columns
  /// without an entry read the field of the same name.
  std::map<std::string, std::string> response_fields;

  std::optional<std::size_t> column_index(std::string_view column) const;
  std::size_t key_index() const;
  bool is_link(std::string_view column) const;
  /// Last dotted component (`microbe` for `fsmm.microbe`).
  std::string table_name() const;
  std::string response_path(const std::string& column) const;
};

struct SourceDescriptor {
  std::string id;
  SourceKind kind = SourceKind::Relational;
  SourceMode mode = SourceMode::Local;
  /// REST base URL; requests go to `<endpoint>/<relation>/<keys>`.
  std::string endpoint;
  std::filesystem::path data_dir;
  std::vector<RelationSchema> relations;

  const RelationSchema* find_relation(std::string_view name) const;
};

/// Sources in declaration order with relation lookup across all of them.
class SourceCatalog {
 public:
  SourceCatalog() = default;
  explicit SourceCatalog(std::vector<SourceDescriptor> sources);

  /// JSON catalog; relative data_dir entries resolve against `base_dir`.
  static SourceCatalog parse(std::string_view json_text, const std::filesystem::path& base_dir = {});
  static SourceCatalog load_file(const std::filesystem::path& path);

  const std::vector<SourceDescriptor>& sources() const { return sources_; }
  const SourceDescriptor* find_source(std::string_view id) const;
  SourceDescriptor* find_source(std::string_view id);
  /// Declaration position, used to break planning ties.
  std::size_t declaration_index(std::string_view id) const;

  struct RelationRef {
    const SourceDescriptor* source;
    const RelationSchema* relation;
  };
  std::optional<RelationRef> find_relation(std::string_view qualified_name) const;

  void set_endpoint(std::string_view source_id, std::string endpoint);

 private:
  void index();

  std::vector<SourceDescriptor> sources_;
  std::map<std::string, std::pair<std::size_t, std::size_t>, std::less<>> relation_index_;
};

}  // namespace fedlog
