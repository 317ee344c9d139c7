// fedlog command-line front end.

#include <CLI11.hpp>

#include <csignal>
#include <fstream>
#include <iostream>
#include <sstream>

#include "fedlog/rewriter.hpp"
#include "fedlog/scheduler.hpp"
#include "fedlog/service.hpp"
#include "fedlog/sql.hpp"

using namespace fedlog;

namespace {

std::string read_file(const std::string& path) {
  if (path == "-") {
    std::stringstream buf;
    buf << std::cin.rdbuf();
    return buf.str();
  }
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read " + path);
  std::stringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

struct Knowledge {
  Ontology ontology;
  RuleRepository rules;
  SourceCatalog catalog;
};

Knowledge load_knowledge(const EngineConfig& cfg) {
  Knowledge k;
  k.ontology = Ontology::load_file(cfg.ontology);
  k.rules = RuleRepository::build(k.ontology, load_mapping_dir(cfg.maps));
  k.catalog = SourceCatalog::load_file(cfg.catalog);
  return k;
}

std::map<std::string, std::string> parse_sets(const std::vector<std::string>& sets) {
  std::map<std::string, std::string> out;
  for (const auto& s : sets) {
    auto eq = s.find('=');
    if (eq == std::string::npos) throw ConfigError("--set expects name=value, got " + s);
    out[s.substr(0, eq)] = s.substr(eq + 1);
  }
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"fedlog: ontology-mediated federated Datalog query engine"};
  app.require_subcommand(1);

  std::string config_path = FEDLOG_DEFAULT_CONFIG;
  app.add_option("-c,--config", config_path, "engine config (JSON)")->capture_default_str();

  auto* serve = app.add_subcommand("serve", "run the HTTP query service");
  int serve_port = 0;
  std::string serve_host = "0.0.0.0";
  serve->add_option("--port", serve_port, "overrides the config port");
  serve->add_option("--host", serve_host)->capture_default_str();

  auto* query = app.add_subcommand("query", "answer a query through the whole pipeline");
  std::string template_id, raw_file, mode_text, format = "tsv";
  std::vector<std::string> sets;
  bool no_cache = false;
  auto* tmpl_opt = query->add_option("--template", template_id, "template id");
  auto* raw_opt = query->add_option("--raw", raw_file, "file with a Datalog query ('-' for stdin)");
  tmpl_opt->excludes(raw_opt);
  query->add_option("--set", sets, "slot value, name=value")->needs(tmpl_opt);
  query->add_flag("--no-cache", no_cache);
  query->add_option("--mode", mode_text, "local or online, for REST sources")->check(CLI::IsMember({"local", "online"}));
  query->add_option("--format", format)->check(CLI::IsMember({"tsv", "json"}))->capture_default_str();

  std::string stage_file;
  bool fragment = false;
  bool lenient = false;
  auto* reason_cmd = app.add_subcommand("reason", "print the reasoned query");
  auto* rewrite_cmd = app.add_subcommand("rewrite", "print the source-level statements");
  auto* plan_cmd = app.add_subcommand("plan", "print the scheduling plan");
  auto* sql_cmd = app.add_subcommand("sql", "print the SQL of each relational sub-query");
  bool rewrite_reason = false;
  for (auto* c : {reason_cmd, rewrite_cmd, plan_cmd, sql_cmd}) {
    c->add_option("file", stage_file, "query file ('-' for stdin)")->required();
    c->add_flag("--fragment", fragment, "accept a head naming variables absent from the body");
    c->add_flag("--lenient", lenient, "report attribute-domain conflicts instead of failing");
  }
  rewrite_cmd->add_flag("--reason", rewrite_reason, "reason before rewriting");

  auto* mock = app.add_subcommand("mock", "serve CSV fixtures as a mock REST endpoint");
  std::string fixtures;
  int mock_port = 18080;
  std::string mock_host = "127.0.0.1";
  mock->add_option("--fixtures", fixtures, "fixture directory")->required();
  mock->add_option("--port", mock_port)->capture_default_str();
  mock->add_option("--host", mock_host)->capture_default_str();

  auto* templates_cmd = app.add_subcommand("templates", "template utilities");
  templates_cmd->require_subcommand(1);
  auto* templates_list = templates_cmd->add_subcommand("list", "list the configured templates");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*mock) {
      MockRestServer server(fixtures);
      std::cerr << "mock REST server on http://" << mock_host << ":" << mock_port << "/api (" << server.relations().size()
                << " relations)\n";
      server.listen_blocking(mock_port, mock_host);
      return 0;
    }

    EngineConfig cfg = EngineConfig::load(config_path);

    if (*serve) {
      QueryEngine engine(cfg);
      HttpService http(engine);
      int port = serve_port ? serve_port : cfg.port;
      std::cerr << "fedlog service on http://" << serve_host << ":" << port << "\n";
      http.listen_blocking(port, serve_host);
      return 0;
    }

    if (*templates_list) {
      for (const auto& t : load_templates(cfg.templates)) {
        std::cout << t.id << "\n  " << t.text << "\n";
        for (const auto& s : t.slots) {
          std::cout << "  {" << s.name << "}: ";
          if (s.kind == SlotKind::Enum) {
            for (std::size_t i = 0; i < s.values.size(); ++i) std::cout << (i ? ", " : "") << s.values[i];
          } else {
            std::cout << s.min << ".." << s.max;
          }
          std::cout << "\n";
        }
      }
      return 0;
    }

    if (*query) {
      if (template_id.empty() && raw_file.empty()) throw ConfigError("query needs --template or --raw");
      QueryEngine engine(cfg);
      QueryRequest req;
      if (!template_id.empty()) {
        req.template_id = template_id;
        req.slot_values = parse_sets(sets);
      } else {
        req.raw = read_file(raw_file);
      }
      req.no_cache = no_cache;
      if (!mode_text.empty()) req.mode = parse_source_mode(mode_text);
      auto resp = engine.handle_query(req);
      if (format == "json") {
        std::cout << resp.to_json().dump(2) << "\n";
      } else {
        std::cout << resp.table.to_tsv();
        std::cerr << resp.table.rows.size() << " rows, " << resp.total_ms << " ms, query " << resp.query_id
                  << (resp.cache_hit ? " (cached)" : "") << "\n";
        for (const auto& w : resp.warnings) std::cerr << "warning: " << w << "\n";
      }
      return 0;
    }

    // pipeline stage debugging
    Knowledge k = load_knowledge(cfg);
    ParseOptions popts;
    popts.require_safe_head = !fragment;
    DatalogQuery q = parse_query(read_file(stage_file), popts);
    ReasonOptions ropts;
    ropts.strict_domains = !lenient;

    if (*reason_cmd) {
      auto r = reason(q, k.ontology, k.rules, ropts);
      for (std::size_t i = 0; i < r.branches.size(); ++i) {
        if (r.is_union()) std::cout << (i ? "\n" : "") << "% branch " << i + 1 << "\n";
        std::cout << print_canonical(r.branches[i]);
      }
      if (!r.report.empty()) std::cerr << format_report(r.report);
      return 0;
    }
    if (*rewrite_cmd) {
      std::vector<DatalogQuery> inputs{q};
      if (rewrite_reason) inputs = reason(q, k.ontology, k.rules, ropts).branches;
      for (std::size_t i = 0; i < inputs.size(); ++i) {
        if (inputs.size() > 1) std::cout << (i ? "\n" : "") << "% branch " << i + 1 << "\n";
        std::cout << print_statements(rewrite(inputs[i], k.rules, k.catalog));
      }
      return 0;
    }
    auto branches = reason(q, k.ontology, k.rules, ropts).branches;
    for (std::size_t i = 0; i < branches.size(); ++i) {
      if (branches.size() > 1) std::cout << (i ? "\n" : "") << "% branch " << i + 1 << "\n";
      auto p = plan(rewrite(branches[i], k.rules, k.catalog), k.catalog);
      if (*plan_cmd) {
        std::cout << format_plan(p);
        continue;
      }
      for (const auto& sq : p.subqueries) {
        const auto* src = k.catalog.find_source(sq.source_id);
        std::cout << "-- sub-query " << sq.id << " @" << sq.source_id;
        if (src->kind == SourceKind::Rest) {
          std::cout << " (REST lookup)\n";
          continue;
        }
        auto stmt = to_sql(sq, k.catalog);
        std::cout << "\n" << stmt.text << "\n";
        for (const auto& w : stmt.warnings) std::cout << "-- warning: " << w << "\n";
      }
    }
    return 0;
  } catch (const ParseError& e) {
    std::cerr << "error [parse]: " << e.what() << "\n";
    return 2;
  } catch (const Error& e) {
    std::cerr << "error [" << e.stage() << "]: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
