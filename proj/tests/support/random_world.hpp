#pragma once

// Random small ontologies, mapping sets, fact bases and queries for the
// reasoner soundness property. Fact bases are models of their ontology:
// domain/range and attribute-domain memberships are materialized, inverse
// pairs hold both ways and an unmapped general property holds exactly on
// the union of its sub-properties.

#include <algorithm>
#include <map>
#include <random>
#include <set>
#include <string>
#include <vector>

#include "fedlog/datalog.hpp"
#include "fedlog/ontology.hpp"
#include "naive_eval.hpp"

namespace oracle {

struct RandomWorld {
  std::string ontology_text;
  std::string mapping_text;
  FactBase facts;
  std::vector<fedlog::DatalogQuery> queries;
};

namespace detail {

struct PropSpec {
  std::string name;
  std::string domain, range;
  int qualifiers = 0;
  std::string inverse;  // empty when none
  std::string parent;   // empty when none
  bool mapped = false;
};

}  // namespace detail

inline RandomWorld random_world(unsigned seed, int queries_per_world = 4) {
  std::mt19937 rng(seed);
  auto pick = [&](int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng); };
  auto chance = [&](double p) { return std::bernoulli_distribution(p)(rng); };

  RandomWorld w;
  int nclasses = pick(2, 4);
  std::vector<std::string> classes;
  for (int i = 0; i < nclasses; ++i) classes.push_back("K" + std::to_string(i));
  auto any_class = [&] { return classes[pick(0, nclasses - 1)]; };

  std::vector<detail::PropSpec> props;
  int nbase = pick(2, 4);
  for (int i = 0; i < nbase; ++i) {
    detail::PropSpec p{"p" + std::to_string(i), any_class(), any_class(), chance(0.3) ? 1 : 0, "", "", chance(0.6)};
    if (chance(0.45)) {
      detail::PropSpec q{p.name + "_inv", p.range, p.domain, p.qualifiers, p.name, "", false};
      p.inverse = q.name;
      // exactly one side mapped most of the time, so Rule 3 fires
      int mode = pick(0, 3);
      p.mapped = mode != 1 && mode != 3;
      q.mapped = mode == 1 || mode == 2;
      props.push_back(p);
      props.push_back(q);
    } else {
      props.push_back(p);
    }
  }
  int ngeneral = pick(0, 2);
  for (int g = 0; g < ngeneral; ++g) {
    std::string name = "g" + std::to_string(g);
    std::string dom = any_class(), ran = any_class();
    int quals = chance(0.3) ? 1 : 0;
    bool parent_mapped = chance(0.2);
    props.push_back({name, dom, ran, quals, "", "", parent_mapped});
    int nsubs = pick(2, 3);
    for (int s = 0; s < nsubs; ++s) {
      props.push_back({name + "_s" + std::to_string(s), dom, ran, quals, "", name, chance(0.85)});
    }
  }
  int ndata = pick(1, 3);
  std::vector<std::pair<std::string, std::string>> data;  // name, domain
  for (int i = 0; i < ndata; ++i) data.emplace_back("d" + std::to_string(i), any_class());

  for (const auto& c : classes) w.ontology_text += "class " + c + "\n";
  for (const auto& [n, d] : data) w.ontology_text += "dataprop " + n + " domain=" + d + " kind=text\n";
  for (const auto& p : props) {
    w.ontology_text += "objprop " + p.name + " domain=" + p.domain + " range=" + p.range;
    if (!p.inverse.empty()) w.ontology_text += " inverse=" + p.inverse;
    if (!p.parent.empty()) w.ontology_text += " parent=" + p.parent;
    if (p.qualifiers) w.ontology_text += " qualifiers=1";
    w.ontology_text += "\n";
  }

  // mappings: relation src.<name>
  for (const auto& p : props) {
    if (!p.mapped) continue;
    std::string args = p.qualifiers ? "X,Y,Z" : "X,Y";
    w.mapping_text += "relationship:" + p.name + "(" + args + "):- :src." + p.name + "(" + args + ").\n";
  }
  for (const auto& [n, d] : data) w.mapping_text += "attribute:" + n + "(X,Y):- :src." + n + "(X,Y).\n";

  // facts
  const int nind = 6;
  auto ind = [&] { return "a" + std::to_string(pick(0, nind - 1)); };
  auto qual = [&] { return "q" + std::to_string(pick(0, 1)); };
  auto val = [&] { return "v" + std::to_string(pick(0, 2)); };
  using fedlog::AtomKind;
  std::map<std::string, std::set<Tuple>> rel;
  for (const auto& p : props) {
    bool derived = (!p.inverse.empty() && p.name.size() > 4 && p.name.substr(p.name.size() - 4) == "_inv");
    bool is_general = std::any_of(props.begin(), props.end(), [&](const auto& s) { return s.parent == p.name; });
    if (derived || is_general) continue;
    int n = pick(0, 6);
    for (int k = 0; k < n; ++k) {
      Tuple t{ind(), ind()};
      if (p.qualifiers) t.push_back(qual());
      rel[p.name].insert(t);
    }
  }
  for (const auto& p : props) {
    if (!p.parent.empty()) rel[p.parent].insert(rel[p.name].begin(), rel[p.name].end());
  }
  for (const auto& p : props) {
    if (p.inverse.empty() || p.name.size() < 4 || p.name.substr(p.name.size() - 4) != "_inv") continue;
    for (auto t : rel[p.inverse]) {
      std::swap(t[0], t[1]);
      rel[p.name].insert(t);
    }
  }
  for (const auto& p : props) {
    for (const auto& t : rel[p.name]) {
      w.facts.add(AtomKind::Relationship, p.name, t);
      w.facts.add(AtomKind::Class, p.domain, {t[0]});
      w.facts.add(AtomKind::Class, p.range, {t[1]});
    }
  }
  for (const auto& [n, d] : data) {
    int cnt = pick(0, 5);
    for (int k = 0; k < cnt; ++k) {
      Tuple t{ind(), val()};
      w.facts.add(AtomKind::Attribute, n, t);
      w.facts.add(AtomKind::Class, d, {t[0]});
    }
  }
  for (int k = 0; k < pick(0, 4); ++k) w.facts.add(AtomKind::Class, any_class(), {ind()});

  // queries
  for (int qi = 0; qi < queries_per_world; ++qi) {
    fedlog::DatalogQuery q;
    std::vector<std::string> vars{"X0", "X1", "X2", "X3"};
    auto var = [&] { return fedlog::Term{fedlog::Variable{vars[pick(0, 3)]}}; };
    auto term = [&](auto make_const) { return chance(0.8) ? var() : fedlog::Term{fedlog::Constant{make_const()}}; };
    int natoms = pick(2, 5);
    for (int a = 0; a < natoms; ++a) {
      int kind = pick(0, 9);
      if (kind <= 2 && !q.body.empty() && chance(0.6)) {
        // class atom implied by an existing relationship or attribute, if any
        const auto& src = q.body[pick(0, static_cast<int>(q.body.size()) - 1)];
        if (src.kind == AtomKind::Relationship) {
          const auto& p = *std::find_if(props.begin(), props.end(), [&](const auto& x) { return x.name == src.predicate; });
          bool first = chance(0.5);
          q.body.push_back(fedlog::Atom::class_atom(first ? p.domain : p.range, src.terms[first ? 0 : 1]));
          continue;
        }
        if (src.kind == AtomKind::Attribute) {
          auto it = std::find_if(data.begin(), data.end(), [&](const auto& x) { return x.first == src.predicate; });
          q.body.push_back(fedlog::Atom::class_atom(it->second, src.terms[0]));
          continue;
        }
      }
      if (kind <= 2) {
        q.body.push_back(fedlog::Atom::class_atom(any_class(), term(ind)));
      } else if (kind <= 7) {
        const auto& p = props[pick(0, static_cast<int>(props.size()) - 1)];
        std::vector<fedlog::Term> ts{term(ind), term(ind)};
        if (p.qualifiers) ts.push_back(term(qual));
        q.body.push_back(fedlog::Atom::relationship(p.name, ts));
      } else {
        const auto& d = data[pick(0, static_cast<int>(data.size()) - 1)];
        q.body.push_back(fedlog::Atom::attribute(d.first, term(ind), term(val)));
      }
    }
    auto used = fedlog::query_variables(q);
    for (const auto& v : used) {
      if (chance(0.6)) q.head.push_back(v);
    }
    if (q.head.empty() && !used.empty()) q.head.push_back(used.front());
    w.queries.push_back(std::move(q));
  }
  return w;
}

}  // namespace oracle
