#include "fedlog/catalog.hpp"

#include <algorithm>
#include <fstream>
#include <json.hpp>
#include <set>
#include <sstream>

#include "fedlog/error.hpp"

namespace fedlog {

using nlohmann::json;

std::string_view to_string(SourceKind kind) { return kind == SourceKind::Rest ? "rest" : "relational"; }
std::string_view to_string(SourceMode mode) { return mode == SourceMode::Online ? "online" : "local"; }

std::optional<SourceMode> parse_source_mode(std::string_view text) {
  if (text == "local") return SourceMode::Local;
  if (text == "online") return SourceMode::Online;
  return std::nullopt;
}

std::optional<std::size_t> RelationSchema::column_index(std::string_view column) const {
  auto it = std::find(columns.begin(), columns.end(), column);
  if (it == columns.end()) return std::nullopt;
  return static_cast<std::size_t>(it - columns.begin());
}

std::size_t RelationSchema::key_index() const { return column_index(key_column).value(); }

bool RelationSchema::is_link(std::string_view column) const {
  return std::find(link_columns.begin(), link_columns.end(), column) != link_columns.end();
}

std::string RelationSchema::table_name() const {
  auto dot = name.rfind('.');
  return dot == std::string::npos ? name : name.substr(dot + 1);
}

std::string RelationSchema::response_path(const std::string& column) const {
  auto it = response_fields.find(column);
  return it == response_fields.end() ? column : it->second;
}

const RelationSchema* SourceDescriptor::find_relation(std::string_view name) const {
  for (const auto& r : relations) {
    if (r.name == name) return &r;
  }
  return nullptr;
}

SourceCatalog::SourceCatalog(std::vector<SourceDescriptor> sources) : sources_(std::move(sources)) { index(); }

void SourceCatalog::index() {
  relation_index_.clear();
  std::set<std::string> ids;
  for (std::size_t s = 0; s < sources_.size(); ++s) {
    const auto& src = sources_[s];
    if (src.id.empty()) throw CatalogError("source without id");
    if (!ids.insert(src.id).second) throw CatalogError("duplicate source id '" + src.id + "'");
    if (src.kind == SourceKind::Rest && src.mode == SourceMode::Online && src.endpoint.empty()) {
      throw CatalogError("online source '" + src.id + "' has no endpoint");
    }
    for (std::size_t r = 0; r < src.relations.size(); ++r) {
      const auto& rel = src.relations[r];
      if (rel.columns.empty()) throw CatalogError("relation " + rel.name + " declares no columns");
      std::set<std::string> cols(rel.columns.begin(), rel.columns.end());
      if (cols.size() != rel.columns.size()) throw CatalogError("relation " + rel.name + " repeats a column");
      if (!cols.contains(rel.key_column)) {
        throw CatalogError("relation " + rel.name + ": key column '" + rel.key_column + "' is not a column");
      }
      for (const auto& l : rel.link_columns) {
        if (!cols.contains(l)) throw CatalogError("relation " + rel.name + ": link column '" + l + "' is not a column");
      }
      for (const auto& [col, path] : rel.response_fields) {
        if (!cols.contains(col)) throw CatalogError("relation " + rel.name + ": response field for unknown column '" + col + "'");
      }
      if (!relation_index_.emplace(rel.name, std::make_pair(s, r)).second) {
        throw CatalogError("relation " + rel.name + " declared by two sources");
      }
    }
  }
}

SourceCatalog SourceCatalog::parse(std::string_view json_text, const std::filesystem::path& base_dir) {
  std::vector<SourceDescriptor> sources;
  try {
    auto doc = json::parse(json_text);
    for (const auto& js : doc.at("sources")) {
      SourceDescriptor src;
      src.id = js.at("id").get<std::string>();
      auto kind = js.at("kind").get<std::string>();
      if (kind == "relational") {
        src.kind = SourceKind::Relational;
      } else if (kind == "rest") {
        src.kind = SourceKind::Rest;
      } else {
        throw CatalogError("source " + src.id + ": unknown kind '" + kind + "'");
      }
      auto mode = parse_source_mode(js.value("mode", std::string("local")));
      if (!mode) throw CatalogError("source " + src.id + ": unknown mode");
      src.mode = *mode;
      if (src.kind == SourceKind::Relational && src.mode == SourceMode::Online) {
        throw CatalogError("relational source " + src.id + " only supports local mode");
      }
      src.endpoint = js.value("endpoint", std::string());
      if (js.contains("data_dir")) {
        std::filesystem::path dir = js.at("data_dir").get<std::string>();
        src.data_dir = dir.is_relative() ? base_dir / dir : dir;
      }
      for (const auto& jr : js.at("relations")) {
        RelationSchema rel;
        rel.name = jr.at("name").get<std::string>();
        rel.columns = jr.at("columns").get<std::vector<std::string>>();
        rel.key_column = jr.value("key_column", rel.columns.empty() ? std::string() : rel.columns.front());
        rel.unique_key = jr.value("unique_key", true);
        rel.link_columns = jr.value("link_columns", std::vector<std::string>{});
        rel.link_base = jr.value("link_base", std::string());
        rel.response_fields = jr.value("response", std::map<std::string, std::string>{});
        src.relations.push_back(std::move(rel));
      }
      sources.push_back(std::move(src));
    }
  } catch (const json::exception& e) {
    throw CatalogError(std::string("malformed catalog: ") + e.what());
  }
  return SourceCatalog(std::move(sources));
}

SourceCatalog SourceCatalog::load_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw CatalogError("cannot read catalog " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  return parse(buf.str(), path.parent_path());
}

const SourceDescriptor* SourceCatalog::find_source(std::string_view id) const {
  for (const auto& s : sources_) {
    if (s.id == id) return &s;
  }
  return nullptr;
}

SourceDescriptor* SourceCatalog::find_source(std::string_view id) {
  for (auto& s : sources_) {
    if (s.id == id) return &s;
  }
  return nullptr;
}

std::size_t SourceCatalog::declaration_index(std::string_view id) const {
  for (std::size_t i = 0; i < sources_.size(); ++i) {
    if (sources_[i].id == id) return i;
  }
  return sources_.size();
}

std::optional<SourceCatalog::RelationRef> SourceCatalog::find_relation(std::string_view qualified_name) const {
  auto it = relation_index_.find(qualified_name);
  if (it == relation_index_.end()) return std::nullopt;
  const auto& src = sources_[it->second.first];
  return RelationRef{&src, &src.relations[it->second.second]};
}

void SourceCatalog::set_endpoint(std::string_view source_id, std::string endpoint) {
  auto* src = find_source(source_id);
  if (!src) throw CatalogError("unknown source '" + std::string(source_id) + "'");
  src->endpoint = std::move(endpoint);
}

}  // namespace fedlog
