#include "mathcheck/syntax.hpp"

#include "mathcheck/errors.hpp"

#include <array>
#include <cctype>

namespace mathcheck {

namespace {

enum class Tok { Ident, Number, Keyword, Symbol, End };

struct Token {
  Tok kind;
  std::string text;
  std::size_t line;
  std::size_t column;
  std::size_t offset;
};

constexpr std::array kKeywords = {"forall", "exists", "in", "NN", "ZZ", "QQ", "RR",
                                  "true",   "false",  "definition", "if"};
// Longest first so that maximal munch works with a linear scan.
constexpr std::array kSymbols = {":=", "->", "/\\", "\\/", "!=", "<=", ">=", "(", ")", ",", ":", "|",
                                 ";",  "+",  "-",   "*",   "/",  "^",  "=",  "<", ">", "~"};

std::string describe(const Token& t) {
  if (t.kind == Tok::End) return "end of input";
  return "'" + t.text + "'";
}

std::vector<Token> lex(std::string_view src) {
  std::vector<Token> out;
  std::size_t line = 1, col = 1, i = 0;
  auto advance = [&](std::size_t n) {
    for (std::size_t k = 0; k < n; ++k, ++i) {
      if (src[i] == '\n') ++line, col = 1;
      else ++col;
    }
  };
  while (i < src.size()) {
    const char c = src[i];
    if (std::isspace(static_cast<unsigned char>(c))) {
      advance(1);
      continue;
    }
    const std::size_t start = i, l = line, cl = col;
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
      std::size_t j = i;
      while (j < src.size() && (std::isalnum(static_cast<unsigned char>(src[j])) || src[j] == '_' || src[j] == '\''))
        ++j;
      std::string word(src.substr(i, j - i));
      const bool kw = std::ranges::find(kKeywords, word) != kKeywords.end();
      out.push_back({kw ? Tok::Keyword : Tok::Ident, std::move(word), l, cl, start});
      advance(j - i);
      continue;
    }
    if (std::isdigit(static_cast<unsigned char>(c))) {
      std::size_t j = i;
      while (j < src.size() && std::isdigit(static_cast<unsigned char>(src[j]))) ++j;
      if (j + 1 < src.size() && src[j] == '.' && std::isdigit(static_cast<unsigned char>(src[j + 1]))) {
        ++j;
        while (j < src.size() && std::isdigit(static_cast<unsigned char>(src[j]))) ++j;
      }
      out.push_back({Tok::Number, std::string(src.substr(i, j - i)), l, cl, start});
      advance(j - i);
      continue;
    }
    bool matched = false;
    for (std::string_view sym : kSymbols) {
      if (src.substr(i, sym.size()) == sym) {
        out.push_back({Tok::Symbol, std::string(sym), l, cl, start});
        advance(sym.size());
        matched = true;
        break;
      }
    }
    if (!matched) throw SyntaxError(l, cl, "unexpected character '" + std::string(1, c) + "'");
  }
  out.push_back({Tok::End, "", line, col, src.size()});
  return out;
}

bool is_rel(const Token& t) {
  if (t.kind != Tok::Symbol) return false;
  return t.text == "=" || t.text == "!=" || t.text == "<" || t.text == "<=" || t.text == ">" || t.text == ">=";
}

Rel rel_of(const std::string& s) {
  if (s == "=") return Rel::Eq;
  if (s == "!=") return Rel::Ne;
  if (s == "<") return Rel::Lt;
  if (s == "<=") return Rel::Le;
  if (s == ">") return Rel::Gt;
  return Rel::Ge;
}

class Parser {
 public:
  explicit Parser(std::string_view src) : toks_(lex(src)) {}

  Term whole_term() {
    Term t = term();
    expect_end();
    return t;
  }

  Formula whole_formula() {
    Formula f = formula();
    expect_end();
    return f;
  }

  Definition whole_definition() {
    Definition d = definition();
    expect_end();
    return d;
  }

 private:
  const Token& peek(std::size_t ahead = 0) const { return toks_[std::min(pos_ + ahead, toks_.size() - 1)]; }
  bool at(std::string_view text) const {
    const auto& t = peek();
    return (t.kind == Tok::Symbol || t.kind == Tok::Keyword) && t.text == text;
  }
  bool accept(std::string_view text) {
    if (!at(text)) return false;
    ++pos_;
    return true;
  }
  [[noreturn]] void fail(std::vector<std::string> expected) const {
    const auto& t = peek();
    throw SyntaxError(t.line, t.column, "unexpected " + describe(t), std::move(expected));
  }
  void expect(std::string_view text) {
    if (!accept(text)) fail({"'" + std::string(text) + "'"});
  }
  std::string expect_ident() {
    if (peek().kind != Tok::Ident) fail({"identifier"});
    return toks_[pos_++].text;
  }
  Sort expect_sort() {
    const auto& t = peek();
    if (t.kind == Tok::Keyword)
      if (auto s = sort_from_keyword(t.text)) {
        ++pos_;
        return *s;
      }
    fail({"NN", "ZZ", "QQ", "RR"});
  }
  void expect_end() {
    if (peek().kind != Tok::End) fail({"end of input"});
  }

  // ---- formulas

  Formula formula() {
    Formula lhs = disjunction();
    if (accept("->")) return Formula::implies(lhs, formula());
    return lhs;
  }

  Formula disjunction() {
    Formula acc = conjunction();
    while (accept("\\/")) acc = Formula::disj(acc, conjunction());
    return acc;
  }

  Formula conjunction() {
    Formula acc = unary_formula();
    while (accept("/\\")) acc = Formula::conj(acc, unary_formula());
    return acc;
  }

  Formula unary_formula() {
    if (accept("~")) return Formula::negation(unary_formula());
    if (at("forall") || at("exists")) return quantified();
    return primary_formula();
  }

  Formula quantified() {
    const bool universal = at("forall");
    ++pos_;
    std::string var = expect_ident();
    std::optional<Sort> declared;
    if (accept(":")) declared = expect_sort();
    expect(",");
    Formula body = formula();
    const auto kind = universal ? FormulaKind::Forall : FormulaKind::Exists;
    const Sort s = declared.value_or(implied_binder_sort(kind, var, body));
    return universal ? Formula::forall(var, s, body) : Formula::exists(var, s, body);
  }

  static bool continues_term(const Token& t) {
    if (is_rel(t)) return true;
    if (t.kind == Tok::Keyword && t.text == "in") return true;
    return t.kind == Tok::Symbol &&
           (t.text == "+" || t.text == "-" || t.text == "*" || t.text == "/" || t.text == "^");
  }

  static bool further(const SyntaxError& a, const SyntaxError& b) {
    return std::pair(a.line(), a.column()) > std::pair(b.line(), b.column());
  }

  Formula primary_formula() {
    if (accept("true")) return Formula::truth();
    if (accept("false")) return Formula::falsity();
    if (at("(")) {
      // A parenthesised formula or the start of a parenthesised term.
      const std::size_t save = pos_;
      std::optional<SyntaxError> as_formula;
      try {
        ++pos_;
        Formula inner = formula();
        expect(")");
        if (!continues_term(peek())) return inner;
      } catch (const SyntaxError& e) {
        as_formula = e;
      }
      pos_ = save;
      try {
        return atom();
      } catch (const SyntaxError& e) {
        if (as_formula && further(*as_formula, e)) throw *as_formula;
        throw;
      }
    }
    return atom();
  }

  Formula atom() {
    Term lhs = term();
    if (is_rel(peek())) {
      const Rel r = rel_of(toks_[pos_++].text);
      return Formula::compare(r, lhs, term());
    }
    if (accept("in")) return Formula::member(lhs, expect_sort());
    fail({"relation", "'in'"});
  }

  // ---- terms

  Term term() {
    Term acc = product();
    for (;;) {
      if (accept("+")) acc = Term::add(acc, product());
      else if (accept("-")) acc = Term::sub(acc, product());
      else return acc;
    }
  }

  Term product() {
    Term acc = unary_term();
    for (;;) {
      if (accept("*")) acc = Term::mul(acc, unary_term());
      else if (accept("/")) acc = Term::div(acc, unary_term());
      else return acc;
    }
  }

  Term unary_term() {
    if (accept("-")) return Term::neg(unary_term());
    return power();
  }

  Term power() {
    Term base = primary_term();
    if (!at("^")) return base;
    ++pos_;
    Term exponent = exponent_term();
    if (at("^")) {
      const auto& t = peek();
      throw SyntaxError(t.line, t.column, "exponent must be an integer literal or a variable");
    }
    return Term::pow(base, exponent);
  }

  Term exponent_term() {
    const bool paren = accept("(");
    const bool negative = accept("-");
    const Token t = peek();
    Term result = Term::literal(0L);
    if (t.kind == Tok::Number) {
      Rational v = parse_rational(t.text);
      if (!is_integer(v)) throw SyntaxError(t.line, t.column, "exponent must be an integer literal or a variable");
      ++pos_;
      result = Term::literal(negative ? Rational(-v) : v);
    } else if (t.kind == Tok::Ident && !negative) {
      ++pos_;
      result = Term::variable(t.text);
    } else {
      fail({"integer literal", "identifier"});
    }
    if (paren) expect(")");
    return result;
  }

  Term primary_term() {
    const Token& t = peek();
    if (t.kind == Tok::Number) {
      ++pos_;
      return Term::literal(parse_rational(t.text));
    }
    if (t.kind == Tok::Ident) {
      ++pos_;
      if (!accept("(")) return Term::variable(t.text);
      std::vector<Term> args;
      if (!at(")")) {
        do args.push_back(term());
        while (accept(","));
      }
      expect(")");
      return Term::apply(t.text, std::move(args));
    }
    if (accept("(")) {
      Term inner = term();
      expect(")");
      return inner;
    }
    fail({"number", "identifier", "'('"});
  }

  // ---- definitions

  // `name(p1, ..., pk) :=`; returns nullopt (and rewinds) when absent.
  std::optional<std::pair<std::string, std::vector<std::string>>> branch_head() {
    const std::size_t save = pos_;
    if (peek().kind != Tok::Ident || !(peek(1).kind == Tok::Symbol && peek(1).text == "(")) return std::nullopt;
    std::string name = toks_[pos_].text;
    pos_ += 2;
    std::vector<std::string> params;
    if (!at(")")) {
      do {
        if (peek().kind != Tok::Ident) {
          pos_ = save;
          return std::nullopt;
        }
        params.push_back(toks_[pos_++].text);
      } while (accept(","));
    }
    if (!accept(")") || !accept(":=")) {
      pos_ = save;
      return std::nullopt;
    }
    return std::pair(std::move(name), std::move(params));
  }

  Branch branch_tail() {
    Term body = term();
    accept(",");
    Formula guard = Formula::truth();
    if (accept("if")) guard = formula();
    accept(";");
    return {body, guard};
  }

  Definition definition() {
    Definition d;
    expect("definition");
    expect("(");
    d.name = expect_ident();
    expect(")");
    expect(":");
    d.arg_sorts.push_back(expect_sort());
    while (accept(",") || accept("*")) d.arg_sorts.push_back(expect_sort());
    expect("->");
    d.result = expect_sort();

    const Token head_tok = peek();
    auto head = branch_head();
    if (!head) fail({"'" + d.name + "(...) :='"});
    if (head->first != d.name)
      throw SyntaxError(head_tok.line, head_tok.column,
                        "branch defines '" + head->first + "' inside definition of '" + d.name + "'");
    d.params = head->second;
    if (d.params.size() != d.arg_sorts.size())
      throw ArityError(d.name + " declares " + std::to_string(d.arg_sorts.size()) + " argument sort(s) but " +
                       std::to_string(d.params.size()) + " parameter(s)");
    d.branches.push_back(branch_tail());
    while (accept("|")) {
      const Token t = peek();
      if (auto h = branch_head()) {
        if (h->first != d.name)
          throw SyntaxError(t.line, t.column, "branch defines '" + h->first + "' inside definition of '" + d.name + "'");
        if (h->second.size() != d.params.size())
          throw ArityError("branch of " + d.name + " binds " + std::to_string(h->second.size()) +
                           " parameter(s), expected " + std::to_string(d.params.size()));
        if (h->second != d.params)
          throw SyntaxError(t.line, t.column, "branch parameters of '" + d.name + "' must match the first branch");
      }
      d.branches.push_back(branch_tail());
    }
    check_definition(d);
    return d;
  }

  std::vector<Token> toks_;
  std::size_t pos_ = 0;
};

// ---- printing

int term_prec(const Term& t) {
  switch (t.kind()) {
    case TermKind::Add:
    case TermKind::Sub: return 1;
    case TermKind::Mul:
    case TermKind::Div: return 2;
    case TermKind::Neg: return 3;
    case TermKind::Pow: return 4;
    case TermKind::Literal:
      if (t.value() < 0) return 3;
      if (!is_integer(t.value()) && !to_decimal(t.value())) return 2;
      return 5;
    default: return 5;
  }
}

std::string literal_text(const Rational& q) {
  if (is_integer(q)) return to_string(q);
  if (auto d = to_decimal(q)) return *d;
  return to_string(q);
}

std::string print_term_at(const Term& t, int min_prec) {
  std::string s;
  switch (t.kind()) {
    case TermKind::Literal: s = literal_text(t.value()); break;
    case TermKind::Variable: s = t.name(); break;
    case TermKind::Apply: {
      s = t.name() + "(";
      for (std::size_t i = 0; i < t.args().size(); ++i) {
        if (i) s += ", ";
        s += print_term_at(t.args()[i], 0);
      }
      s += ")";
      break;
    }
    case TermKind::Neg: s = "-" + print_term_at(t.args()[0], 3); break;
    case TermKind::Add: s = print_term_at(t.lhs(), 1) + " + " + print_term_at(t.rhs(), 2); break;
    case TermKind::Sub: s = print_term_at(t.lhs(), 1) + " - " + print_term_at(t.rhs(), 2); break;
    case TermKind::Mul: s = print_term_at(t.lhs(), 2) + " * " + print_term_at(t.rhs(), 3); break;
    case TermKind::Div: s = print_term_at(t.lhs(), 2) + " / " + print_term_at(t.rhs(), 3); break;
    case TermKind::Pow: {
      const Term& e = t.rhs();
      std::string exp = e.is_variable() ? e.name()
                        : e.value() < 0 ? "(" + to_string(e.value()) + ")"
                                        : to_string(e.value());
      s = print_term_at(t.lhs(), 5) + "^" + exp;
      break;
    }
  }
  return term_prec(t) < min_prec ? "(" + s + ")" : s;
}

int formula_prec(const Formula& f) {
  switch (f.kind()) {
    case FormulaKind::Implies: return 1;
    case FormulaKind::Or: return 2;
    case FormulaKind::And: return 3;
    case FormulaKind::Not: return 4;
    case FormulaKind::Forall:
    case FormulaKind::Exists: return 0;
    default: return 5;
  }
}

std::string print_formula_at(const Formula& f, int min_prec) {
  std::string s;
  switch (f.kind()) {
    case FormulaKind::True: s = "true"; break;
    case FormulaKind::False: s = "false"; break;
    case FormulaKind::Compare:
      s = print_term_at(f.terms()[0], 0) + " " + std::string(rel_symbol(f.rel())) + " " +
          print_term_at(f.terms()[1], 0);
      break;
    case FormulaKind::Member:
      s = print_term_at(f.terms()[0], 0) + " in " + std::string(sort_keyword(f.sort()));
      break;
    case FormulaKind::Not: s = "~" + print_formula_at(f.subs()[0], 4); break;
    case FormulaKind::And:
      s = print_formula_at(f.subs()[0], 3) + " /\\ " + print_formula_at(f.subs()[1], 4);
      break;
    case FormulaKind::Or:
      s = print_formula_at(f.subs()[0], 2) + " \\/ " + print_formula_at(f.subs()[1], 3);
      break;
    case FormulaKind::Implies:
      s = print_formula_at(f.subs()[0], 2) + " -> " + print_formula_at(f.subs()[1], 1);
      break;
    case FormulaKind::Forall:
    case FormulaKind::Exists: {
      s = f.kind() == FormulaKind::Forall ? "forall " : "exists ";
      s += f.var();
      if (implied_binder_sort(f.kind(), f.var(), f.body()) != f.sort())
        s += " : " + std::string(sort_keyword(f.sort()));
      s += ", " + print_formula_at(f.body(), 0);
      break;
    }
  }
  return formula_prec(f) < min_prec ? "(" + s + ")" : s;
}

// ---- JSON

std::string term_tag(TermKind k) {
  switch (k) {
    case TermKind::Literal: return "Rat";
    case TermKind::Variable: return "Var";
    case TermKind::Apply: return "App";
    case TermKind::Neg: return "Neg";
    case TermKind::Add: return "Add";
    case TermKind::Sub: return "Sub";
    case TermKind::Mul: return "Mul";
    case TermKind::Div: return "Div";
    case TermKind::Pow: return "Pow";
  }
  return "?";
}

std::string formula_tag(FormulaKind k) {
  switch (k) {
    case FormulaKind::True: return "True";
    case FormulaKind::False: return "False";
    case FormulaKind::Compare: return "Rel";
    case FormulaKind::Member: return "In";
    case FormulaKind::Not: return "Not";
    case FormulaKind::And: return "And";
    case FormulaKind::Or: return "Or";
    case FormulaKind::Implies: return "Implies";
    case FormulaKind::Forall: return "Forall";
    case FormulaKind::Exists: return "Exists";
  }
  return "?";
}

Sort sort_from_json(const nlohmann::json& j) {
  auto s = sort_from_keyword(j.get<std::string>());
  if (!s) throw Error("unknown sort " + j.dump());
  return *s;
}

}  // namespace

Term parse_term(std::string_view text) { return Parser(text).whole_term(); }
Formula parse_formula(std::string_view text) { return Parser(text).whole_formula(); }
Definition parse_definition(std::string_view text) { return Parser(text).whole_definition(); }

std::string print_term(const Term& t) { return print_term_at(t, 0); }
std::string print_formula(const Formula& f) { return print_formula_at(f, 0); }

std::string print_definition(const Definition& d) {
  std::string s = "definition(" + d.name + "): ";
  for (std::size_t i = 0; i < d.arg_sorts.size(); ++i) {
    if (i) s += ", ";
    s += sort_keyword(d.arg_sorts[i]);
  }
  s += " -> " + std::string(sort_keyword(d.result)) + " " + d.name + "(";
  for (std::size_t i = 0; i < d.params.size(); ++i) {
    if (i) s += ", ";
    s += d.params[i];
  }
  s += ") :=";
  for (std::size_t i = 0; i < d.branches.size(); ++i) {
    const auto& b = d.branches[i];
    s += (i ? " | " : " ") + print_term(b.body);
    if (b.guard.kind() != FormulaKind::True) s += " if " + print_formula(b.guard);
  }
  return s;
}

nlohmann::json to_json(const Term& t) {
  nlohmann::json j{{"tag", term_tag(t.kind())}};
  switch (t.kind()) {
    case TermKind::Literal:
      j["num"] = numerator_of(t.value()).str();
      j["den"] = denominator_of(t.value()).str();
      return j;
    case TermKind::Variable: j["name"] = t.name(); return j;
    case TermKind::Apply: j["name"] = t.name(); break;
    default: break;
  }
  j["args"] = nlohmann::json::array();
  for (const auto& a : t.args()) j["args"].push_back(to_json(a));
  return j;
}

nlohmann::json to_json(const Formula& f) {
  nlohmann::json j{{"tag", formula_tag(f.kind())}};
  switch (f.kind()) {
    case FormulaKind::True:
    case FormulaKind::False: return j;
    case FormulaKind::Compare:
      j["op"] = rel_symbol(f.rel());
      j["lhs"] = to_json(f.terms()[0]);
      j["rhs"] = to_json(f.terms()[1]);
      return j;
    case FormulaKind::Member:
      j["term"] = to_json(f.terms()[0]);
      j["sort"] = sort_keyword(f.sort());
      return j;
    case FormulaKind::Forall:
    case FormulaKind::Exists:
      j["var"] = f.var();
      j["sort"] = sort_keyword(f.sort());
      j["body"] = to_json(f.body());
      return j;
    default:
      j["args"] = nlohmann::json::array();
      for (const auto& s : f.subs()) j["args"].push_back(to_json(s));
      return j;
  }
}

nlohmann::json to_json(const Definition& d) {
  nlohmann::json j{{"tag", "Definition"}, {"name", d.name}, {"params", d.params},
                   {"result", sort_keyword(d.result)}};
  j["arg_sorts"] = nlohmann::json::array();
  for (Sort s : d.arg_sorts) j["arg_sorts"].push_back(sort_keyword(s));
  j["branches"] = nlohmann::json::array();
  for (const auto& b : d.branches) j["branches"].push_back({{"body", to_json(b.body)}, {"guard", to_json(b.guard)}});
  return j;
}

Term term_from_json(const nlohmann::json& j) {
  const std::string tag = j.at("tag").get<std::string>();
  auto args = [&] {
    std::vector<Term> out;
    for (const auto& a : j.at("args")) out.push_back(term_from_json(a));
    return out;
  };
  if (tag == "Rat")
    return Term::literal(Rational(Integer(j.at("num").get<std::string>()), Integer(j.at("den").get<std::string>())));
  if (tag == "Var") return Term::variable(j.at("name").get<std::string>());
  if (tag == "App") return Term::apply(j.at("name").get<std::string>(), args());
  if (tag == "Neg") return Term::neg(args().at(0));
  static const std::pair<const char*, TermKind> binary[] = {{"Add", TermKind::Add}, {"Sub", TermKind::Sub},
                                                            {"Mul", TermKind::Mul}, {"Div", TermKind::Div},
                                                            {"Pow", TermKind::Pow}};
  for (const auto& [name, kind] : binary)
    if (tag == name) {
      auto a = args();
      return Term::binary(kind, a.at(0), a.at(1));
    }
  throw Error("unknown term tag " + tag);
}

Formula formula_from_json(const nlohmann::json& j) {
  const std::string tag = j.at("tag").get<std::string>();
  if (tag == "True") return Formula::truth();
  if (tag == "False") return Formula::falsity();
  if (tag == "Rel")
    return Formula::compare(rel_of(j.at("op").get<std::string>()), term_from_json(j.at("lhs")),
                            term_from_json(j.at("rhs")));
  if (tag == "In") return Formula::member(term_from_json(j.at("term")), sort_from_json(j.at("sort")));
  if (tag == "Forall" || tag == "Exists") {
    auto body = formula_from_json(j.at("body"));
    auto var = j.at("var").get<std::string>();
    auto s = sort_from_json(j.at("sort"));
    return tag == "Forall" ? Formula::forall(var, s, body) : Formula::exists(var, s, body);
  }
  std::vector<Formula> subs;
  for (const auto& a : j.at("args")) subs.push_back(formula_from_json(a));
  if (tag == "Not") return Formula::negation(subs.at(0));
  if (tag == "And") return Formula::conj(subs.at(0), subs.at(1));
  if (tag == "Or") return Formula::disj(subs.at(0), subs.at(1));
  if (tag == "Implies") return Formula::implies(subs.at(0), subs.at(1));
  throw Error("unknown formula tag " + tag);
}

Definition definition_from_json(const nlohmann::json& j) {
  Definition d;
  d.name = j.at("name").get<std::string>();
  d.params = j.at("params").get<std::vector<std::string>>();
  d.result = sort_from_json(j.at("result"));
  for (const auto& s : j.at("arg_sorts")) d.arg_sorts.push_back(sort_from_json(s));
  for (const auto& b : j.at("branches"))
    d.branches.push_back({term_from_json(b.at("body")), formula_from_json(b.at("guard"))});
  check_definition(d);
  return d;
}

}  // namespace mathcheck
