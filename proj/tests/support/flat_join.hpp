#pragma once

// Brute-force answers for the shipped scenarios, computed by nested loops
// over the replica CSV files. Written against the file layout only: no
// Datalog, no planner, no SQL.

#include <set>
#include <string>
#include <vector>

#include "fedlog/csv.hpp"
#include "test_env.hpp"

namespace oracle {

struct Replica {
  fedlog::CsvTable swine, microbe, microbe_age, metabolome, is_host_of, produces, microbe_gene, metabolite_gene, kegg,
      hmdb;

  static Replica load(const std::filesystem::path& root = testenv::data_dir() / "replica") {
    Replica r;
    r.swine = fedlog::read_csv(root / "pgmdb/fsmm.swine.csv");
    r.microbe = fedlog::read_csv(root / "pgmdb/fsmm.microbe.csv");
    r.microbe_age = fedlog::read_csv(root / "pgmdb/fsmm.microbe_age.csv");
    r.metabolome = fedlog::read_csv(root / "pgmdb/fsmm.metabolome.csv");
    r.is_host_of = fedlog::read_csv(root / "pgmdb/relationship_entity.is_host_of.csv");
    r.produces = fedlog::read_csv(root / "pgmdb/relationship_entity.produces_metabolite.csv");
    r.microbe_gene = fedlog::read_csv(root / "gutmgene/gutmgene.microbe_gene.csv");
    r.metabolite_gene = fedlog::read_csv(root / "gutmgene/gutmgene.metabolite_gene.csv");
    r.kegg = fedlog::read_csv(root / "kegg/kegg.gene_pathway.csv");
    r.hmdb = fedlog::read_csv(root / "hmdb/hmdb.metabolite.csv");
    return r;
  }
};

inline std::string url(const std::string& base, const std::string& v) {
  return v.rfind("http://", 0) == 0 || v.rfind("https://", 0) == 0 ? v : base + v;
}

using Rows = std::set<std::vector<std::string>>;

/// Differential microbes hosted at `day`, their genes, and the genes' pathway links.
inline Rows microbes_at_age(const Replica& r, const std::string& day) {
  Rows out;
  for (const auto& m : r.microbe.rows) {
    // microbe_id, taxonomy_level, microbe_name, phylum, microbe_time, ..., diff (8)
    if (m[8] != "1" || m[4] != day) continue;
    bool hosted = false;
    for (const auto& h : r.is_host_of.rows) hosted = hosted || (h[1] == m[0] && h[2] == day);
    if (!hosted) continue;
    for (const auto& g : r.microbe_gene.rows) {
      if (g[0] != m[2]) continue;
      for (const auto& k : r.kegg.rows) {
        if (k[0] == g[1]) out.insert({m[2], g[1], url("https://www.kegg.jp", k[2])});
      }
    }
  }
  return out;
}

/// Differential metabolites produced at `day` with HMDB role/link and affected genes.
inline Rows metabolites_at_age(const Replica& r, const std::string& day) {
  Rows out;
  for (const auto& m : r.metabolome.rows) {
    // metabolite_id, name, time, hmdb_id, fold, vip, diff
    if (m[6] != "1" || m[2] != day) continue;
    bool produced = false;
    for (const auto& p : r.produces.rows) produced = produced || (p[1] == m[0] && p[2] == day);
    if (!produced) continue;
    for (const auto& h : r.hmdb.rows) {
      if (h[0] != m[3]) continue;
      for (const auto& g : r.metabolite_gene.rows) {
        if (g[0] == m[1]) out.insert({m[1], h[2], url("https://hmdb.ca", h[3]), g[1]});
      }
    }
  }
  return out;
}

/// Microbes differing between two ages, their genes and pathway links.
inline Rows microbes_between_ages(const Replica& r, const std::string& later, const std::string& earlier) {
  Rows out;
  for (const auto& c : r.microbe_age.rows) {
    if (c[2] != later || c[3] != earlier || c[5] != "1") continue;
    for (const auto& g : r.microbe_gene.rows) {
      if (g[0] != c[1]) continue;
      for (const auto& k : r.kegg.rows) {
        if (k[0] == g[1]) out.insert({c[1], g[1], url("https://www.kegg.jp", k[2])});
      }
    }
  }
  return out;
}

}  // namespace oracle
