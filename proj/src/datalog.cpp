#include "fedlog/datalog.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>

#include "fedlog/error.hpp"

namespace fedlog {

std::string print_term(const Term& term) {
  return std::visit(
      [](const auto& t) -> std::string {
        using T = std::decay_t<decltype(t)>;
        if constexpr (std::is_same_v<T, Variable>) {
          return t.name;
        } else if constexpr (std::is_same_v<T, Constant>) {
          return "<" + t.value + ">";
        } else {
          return "VAR_" + std::to_string(t.index);
        }
      },
      term);
}

Atom Atom::class_atom(std::string class_name, Term term) {
  return Atom{AtomKind::Class, std::move(class_name), {std::move(term)}};
}

Atom Atom::relationship(std::string property, std::vector<Term> terms) {
  return Atom{AtomKind::Relationship, std::move(property), std::move(terms)};
}

Atom Atom::attribute(std::string property, Term subject, Term value) {
  return Atom{AtomKind::Attribute, std::move(property), {std::move(subject), std::move(value)}};
}

Atom Atom::source(std::string relation, std::vector<Term> terms) {
  return Atom{AtomKind::Source, std::move(relation), std::move(terms)};
}

std::string_view atom_namespace(AtomKind kind) {
  switch (kind) {
    case AtomKind::Class:
      return "class";
    case AtomKind::Relationship:
      return "relationship";
    case AtomKind::Attribute:
      return "attribute";
    case AtomKind::Source:
      return "";
  }
  return "";
}

std::string print_atom(const Atom& atom) {
  std::string out;
  if (atom.kind != AtomKind::Source) {
    out += atom_namespace(atom.kind);
    out += ':';
  }
  out += atom.predicate;
  out += '(';
  for (std::size_t i = 0; i < atom.terms.size(); ++i) {
    if (i > 0) out += ',';
    out += print_term(atom.terms[i]);
  }
  out += ')';
  return out;
}

std::string print_canonical(const DatalogQuery& query) {
  std::string out = "?(";
  for (std::size_t i = 0; i < query.head.size(); ++i) {
    if (i > 0) out += ',';
    out += query.head[i];
  }
  out += "):-\n";
  for (std::size_t i = 0; i < query.body.size(); ++i) {
    out += print_atom(query.body[i]);
    out += i + 1 < query.body.size() ? ",\n" : ".\n";
  }
  return out;
}

std::string print_canonical(const MappingRule& rule) {
  return print_atom(rule.head) + ":- " + print_atom(rule.body) + ".\n";
}

std::string print_statements(const DatalogQuery& query) {
  std::string out;
  for (const auto& atom : query.body) {
    out += print_atom(atom);
    out += ".\n";
  }
  return out;
}

std::set<std::string> atom_variables(const Atom& atom) {
  std::set<std::string> vars;
  for (const auto& t : atom.terms) {
    if (const auto* name = variable_name(t)) vars.insert(*name);
  }
  return vars;
}

std::vector<std::string> query_variables(const DatalogQuery& query) {
  std::vector<std::string> out;
  auto add = [&](const std::string& v) {
    if (std::find(out.begin(), out.end(), v) == out.end()) out.push_back(v);
  };
  for (const auto& v : query.head) add(v);
  for (const auto& atom : query.body) {
    for (const auto& t : atom.terms) {
      if (const auto* name = variable_name(t)) add(*name);
    }
  }
  return out;
}

void check_safety(const DatalogQuery& query) {
  std::set<std::string> bound;
  for (const auto& atom : query.body) {
    auto vars = atom_variables(atom);
    bound.insert(vars.begin(), vars.end());
  }
  for (const auto& v : query.head) {
    if (!bound.contains(v)) throw SafetyError(v);
  }
}

// ---------------------------------------------------------------------------
// Lexer
// ---------------------------------------------------------------------------

namespace {

enum class Tok { Ident, Constant, LParen, RParen, Comma, Dot, Colon, Implies, Question, Section, End };

struct Token {
  Tok type;
  std::string text;
  std::size_t line;
  std::size_t column;
};

bool ident_start(char c) { return std::isalpha(static_cast<unsigned char>(c)) || c == '_'; }
bool ident_char(char c) { return std::isalnum(static_cast<unsigned char>(c)) || c == '_'; }

std::string trim(std::string_view s) {
  auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

std::vector<Token> tokenize(std::string_view text) {
  std::vector<Token> out;
  std::size_t line = 1;
  std::size_t col = 1;
  std::size_t i = 0;
  auto advance = [&](std::size_t n) {
    for (std::size_t k = 0; k < n && i < text.size(); ++k, ++i) {
      if (text[i] == '\n') {
        ++line;
        col = 1;
      } else {
        ++col;
      }
    }
  };
  while (i < text.size()) {
    char c = text[i];
    if (c == ' ' || c == '\t' || c == '\r' || c == '\n') {
      advance(1);
      continue;
    }
    std::size_t tl = line;
    std::size_t tc = col;
    if (c == '#') {
      auto eol = text.find('\n', i);
      if (eol == std::string_view::npos) eol = text.size();
      std::string body = trim(text.substr(i + 1, eol - i - 1));
      std::transform(body.begin(), body.end(), body.begin(), [](unsigned char ch) { return std::tolower(ch); });
      if (body == "relationship" || body == "attribute") out.push_back({Tok::Section, body, tl, tc});
      advance(eol - i);
      continue;
    }
    if (ident_start(c)) {
      std::size_t j = i;
      while (j < text.size() && ident_char(text[j])) ++j;
      out.push_back({Tok::Ident, std::string(text.substr(i, j - i)), tl, tc});
      advance(j - i);
      continue;
    }
    if (c == '<') {
      auto close = text.find('>', i + 1);
      if (close == std::string_view::npos) throw ParseError(tl, tc, "unterminated constant");
      auto value = text.substr(i + 1, close - i - 1);
      if (value.find('\n') != std::string_view::npos) throw ParseError(tl, tc, "constant spans a line break");
      out.push_back({Tok::Constant, std::string(value), tl, tc});
      advance(close - i + 1);
      continue;
    }
    if (c == ':' && i + 1 < text.size() && text[i + 1] == '-') {
      out.push_back({Tok::Implies, ":-", tl, tc});
      advance(2);
      continue;
    }
    Tok t;
    switch (c) {
      case '(':
        t = Tok::LParen;
        break;
      case ')':
        t = Tok::RParen;
        break;
      case ',':
        t = Tok::Comma;
        break;
      case '.':
        t = Tok::Dot;
        break;
      case ':':
        t = Tok::Colon;
        break;
      case '?':
        t = Tok::Question;
        break;
      default:
        throw ParseError(tl, tc, std::string("unexpected character '") + c + "'");
    }
    out.push_back({t, std::string(1, c), tl, tc});
    advance(1);
  }
  out.push_back({Tok::End, "", line, col});
  return out;
}

std::string_view describe(Tok t) {
  switch (t) {
    case Tok::Ident:
      return "identifier";
    case Tok::Constant:
      return "constant";
    case Tok::LParen:
      return "'('";
    case Tok::RParen:
      return "')'";
    case Tok::Comma:
      return "','";
    case Tok::Dot:
      return "'.'";
    case Tok::Colon:
      return "':'";
    case Tok::Implies:
      return "':-'";
    case Tok::Question:
      return "'?'";
    case Tok::Section:
      return "section header";
    case Tok::End:
      return "end of input";
  }
  return "token";
}

std::optional<int> fresh_index(std::string_view name) {
  constexpr std::string_view prefix = "VAR_";
  if (!name.starts_with(prefix) || name.size() == prefix.size()) return std::nullopt;
  int value = 0;
  auto digits = name.substr(prefix.size());
  auto [ptr, ec] = std::from_chars(digits.data(), digits.data() + digits.size(), value);
  if (ec != std::errc{} || ptr != digits.data() + digits.size()) return std::nullopt;
  return value;
}

class Parser {
 public:
  explicit Parser(std::string_view text) : tokens_(tokenize(text)) {}

  bool at_end() const { return peek().type == Tok::End; }
  const Token& peek(std::size_t ahead = 0) const {
    return tokens_[std::min(pos_ + ahead, tokens_.size() - 1)];
  }

  const Token& expect(Tok type) {
    const auto& tok = peek();
    if (tok.type != type) {
      throw ParseError(tok.line, tok.column,
                       "expected " + std::string(describe(type)) + ", found " + std::string(describe(tok.type)) +
                           (tok.text.empty() ? "" : " '" + tok.text + "'"));
    }
    ++pos_;
    return tok;
  }

  bool accept(Tok type) {
    if (peek().type != type) return false;
    ++pos_;
    return true;
  }

  Term term() {
    const auto& tok = peek();
    if (tok.type == Tok::Constant) {
      ++pos_;
      return Constant{tok.text};
    }
    if (tok.type == Tok::Ident) {
      if (!std::isupper(static_cast<unsigned char>(tok.text[0]))) {
        throw ParseError(tok.line, tok.column, "variables must start with an uppercase letter: '" + tok.text + "'");
      }
      ++pos_;
      if (auto idx = fresh_index(tok.text)) return FreshVar{*idx};
      return Variable{tok.text};
    }
    throw ParseError(tok.line, tok.column, "expected a term, found " + std::string(describe(tok.type)));
  }

  std::vector<Term> term_list() {
    expect(Tok::LParen);
    std::vector<Term> terms;
    if (peek().type != Tok::RParen) {
      terms.push_back(term());
      while (accept(Tok::Comma)) terms.push_back(term());
    }
    expect(Tok::RParen);
    return terms;
  }

  /// Atom with an explicit namespace, or a (optionally ':'-prefixed) source
  /// atom `schema.relation(...)`. When `bare_kind` is set a plain `name(...)`
  /// is read as that kind.
  Atom atom(std::optional<AtomKind> bare_kind = std::nullopt) {
    bool leading_colon = accept(Tok::Colon);
    const auto& first = peek();
    if (first.type != Tok::Ident) {
      throw ParseError(first.line, first.column, "expected an atom, found " + std::string(describe(first.type)));
    }
    ++pos_;
    if (!leading_colon && peek().type == Tok::Colon) {
      ++pos_;
      const auto& name = expect(Tok::Ident);
      AtomKind kind;
      if (first.text == "class") {
        kind = AtomKind::Class;
      } else if (first.text == "relationship") {
        kind = AtomKind::Relationship;
      } else if (first.text == "attribute") {
        kind = AtomKind::Attribute;
      } else {
        throw ParseError(first.line, first.column, "unknown atom namespace '" + first.text + "'");
      }
      auto terms = term_list();
      return validate(Atom{kind, name.text, std::move(terms)}, first);
    }
    std::string relation = first.text;
    bool qualified = false;
    while (peek().type == Tok::Dot && peek(1).type == Tok::Ident &&
           (peek(2).type == Tok::LParen || peek(2).type == Tok::Dot)) {
      ++pos_;
      relation += '.';
      relation += expect(Tok::Ident).text;
      qualified = true;
    }
    if (qualified || leading_colon) {
      return validate(Atom{AtomKind::Source, relation, term_list()}, first);
    }
    if (bare_kind) {
      return validate(Atom{*bare_kind, relation, term_list()}, first);
    }
    throw ParseError(first.line, first.column,
                     "atom '" + first.text + "' needs a namespace (class:, relationship:, attribute:) or a source qualifier");
  }

  static Atom validate(Atom atom, const Token& at) {
    switch (atom.kind) {
      case AtomKind::Class:
        if (atom.terms.size() != 1) throw ParseError(at.line, at.column, "class atom takes exactly one term");
        break;
      case AtomKind::Attribute:
        if (atom.terms.size() != 2) throw ParseError(at.line, at.column, "attribute atom takes exactly two terms");
        break;
      case AtomKind::Relationship:
        if (atom.terms.size() < 2) throw ParseError(at.line, at.column, "relationship atom takes at least two terms");
        break;
      case AtomKind::Source:
        if (atom.terms.empty()) throw ParseError(at.line, at.column, "source atom takes at least one term");
        break;
    }
    std::set<int> fresh;
    for (const auto& t : atom.terms) {
      if (const auto* f = std::get_if<FreshVar>(&t); f && !fresh.insert(f->index).second) {
        throw ParseError(at.line, at.column, "fresh variable VAR_" + std::to_string(f->index) + " repeated in one atom");
      }
    }
    return atom;
  }

  DatalogQuery query() {
    expect(Tok::Question);
    expect(Tok::LParen);
    DatalogQuery q;
    std::set<std::string> seen;
    do {
      const auto& tok = peek();
      auto t = term();
      const auto* name = variable_name(t);
      if (!name) throw ParseError(tok.line, tok.column, "head positions must hold variables");
      if (!seen.insert(*name).second) throw ParseError(tok.line, tok.column, "duplicate head variable " + *name);
      q.head.push_back(*name);
    } while (accept(Tok::Comma));
    expect(Tok::RParen);
    expect(Tok::Implies);
    q.body.push_back(atom());
    while (accept(Tok::Comma)) q.body.push_back(atom());
    expect(Tok::Dot);
    return q;
  }

  void skip() { ++pos_; }

 private:
  std::vector<Token> tokens_;
  std::size_t pos_ = 0;
};

}  // namespace

DatalogQuery parse_query(std::string_view text, ParseOptions options) {
  Parser p(text);
  auto q = p.query();
  if (!p.at_end()) {
    const auto& tok = p.peek();
    throw ParseError(tok.line, tok.column, "unexpected input after the query");
  }
  if (options.require_safe_head) check_safety(q);
  return q;
}

std::vector<MappingRule> parse_mapping_rules(std::string_view text) {
  Parser p(text);
  std::vector<MappingRule> rules;
  std::optional<AtomKind> section;
  while (!p.at_end()) {
    if (p.peek().type == Tok::Section) {
      section = p.peek().text == "relationship" ? AtomKind::Relationship : AtomKind::Attribute;
      p.skip();
      continue;
    }
    const Token start = p.peek();
    MappingRule rule;
    rule.head = p.atom(section);
    if (rule.head.kind != AtomKind::Relationship && rule.head.kind != AtomKind::Attribute) {
      throw ParseError(start.line, start.column, "mapping rule head must be a relationship or attribute atom");
    }
    p.expect(Tok::Implies);
    const Token body_start = p.peek();
    rule.body = p.atom(std::nullopt);
    if (rule.body.kind != AtomKind::Source) {
      throw ParseError(body_start.line, body_start.column, "mapping rule body must be a single source atom");
    }
    p.expect(Tok::Dot);

    std::set<std::string> head_vars;
    for (const auto& t : rule.head.terms) {
      if (is_fresh(t)) throw ParseError(start.line, start.column, "fresh variables are not allowed in rule heads");
      if (const auto* name = variable_name(t); name && !head_vars.insert(*name).second) {
        throw RuleError("rule " + print_atom(rule.head) + ": variable " + *name + " repeated in the head");
      }
    }
    auto body_vars = atom_variables(rule.body);
    for (const auto& v : head_vars) {
      if (!body_vars.contains(v)) {
        throw RuleError("rule " + print_atom(rule.head) + ": head variable " + v + " does not occur in the body");
      }
    }
    rules.push_back(std::move(rule));
  }
  return rules;
}

std::vector<Atom> parse_statements(std::string_view text) {
  Parser p(text);
  std::vector<Atom> atoms;
  while (!p.at_end()) {
    if (p.peek().type == Tok::Section) {
      p.skip();
      continue;
    }
    atoms.push_back(p.atom());
    p.expect(Tok::Dot);
  }
  return atoms;
}

}  // namespace fedlog
