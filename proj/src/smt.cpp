#include "mathcheck/smt.hpp"

#include "mathcheck/errors.hpp"
#include "mathcheck/eval.hpp"
#include "mathcheck/subprocess.hpp"
#include "mathcheck/syntax.hpp"

#include <openssl/evp.h>

#include <cstdio>
#include <deque>
#include <fstream>
#include <algorithm>
#include <set>

namespace mathcheck {

namespace {

void top_conjuncts(const Formula& f, std::vector<Formula>& out) {
  if (f.kind() == FormulaKind::And) {
    for (const auto& s : f.subs()) top_conjuncts(s, out);
  } else {
    out.push_back(f);
  }
}

bool is_int_sort(Sort s) { return s == Sort::Nat || s == Sort::Int; }

bool has_quantifier(const Formula& f) {
  if (f.is_quantifier()) return true;
  for (const auto& s : f.subs())
    if (has_quantifier(s)) return true;
  return false;
}

bool is_ground(const Term& t) {
  if (t.is_variable() || t.kind() == TermKind::Apply) return false;
  for (const auto& a : t.args())
    if (!is_ground(a)) return false;
  return true;
}

std::string smt_integer(const Integer& i) { return i < 0 ? "(- " + Integer(-i).str() + ")" : i.str(); }

std::string smt_real(const Rational& q) {
  const Integer n = abs(numerator_of(q)), d = denominator_of(q);
  std::string body = d == 1 ? n.str() + ".0" : "(/ " + n.str() + ".0 " + d.str() + ".0)";
  return q < 0 ? "(- " + body + ")" : body;
}

struct Typed {
  std::string text;
  bool is_int = false;
  bool constant = false;  // no symbols
  std::optional<Rational> literal;
};

class Translator {
 public:
  explicit Translator(const SortMap& sorts) : sorts_(sorts) {}

  bool uses_int = false, uses_real = false, mixed = false, nonlinear = false, quantified = false;

  std::string formula(const Formula& f) {
    switch (f.kind()) {
      case FormulaKind::True: return "true";
      case FormulaKind::False: return "false";
      case FormulaKind::Compare: {
        Typed l = term(f.terms()[0]), r = term(f.terms()[1]);
        if (l.is_int && r.is_int) uses_int = true;
        auto [a, b] = unify(l, r);
        switch (f.rel()) {
          case Rel::Eq: return "(= " + a + " " + b + ")";
          case Rel::Ne: return "(not (= " + a + " " + b + "))";
          case Rel::Lt: return "(< " + a + " " + b + ")";
          case Rel::Le: return "(<= " + a + " " + b + ")";
          case Rel::Gt: return "(> " + a + " " + b + ")";
          case Rel::Ge: return "(>= " + a + " " + b + ")";
        }
        break;
      }
      case FormulaKind::Member: {
        Typed t = term(f.terms()[0]);
        if (t.is_int) uses_int = true;
        const std::string zero = t.is_int ? "0" : "0.0";
        switch (f.sort()) {
          case Sort::Nat:
            if (t.is_int) return "(>= " + t.text + " 0)";
            mixed = true;
            return "(and (is_int " + t.text + ") (>= " + t.text + " " + zero + "))";
          case Sort::Int:
            if (t.is_int) return "true";
            mixed = true;
            return "(is_int " + t.text + ")";
          case Sort::Rat:
            if (t.is_int || (t.literal && true)) return "true";
            throw UnsupportedFeature("membership in QQ of the real-valued term " + print_term(f.terms()[0]));
          case Sort::Real: return "true";
        }
        break;
      }
      case FormulaKind::Not: return "(not " + formula(f.subs()[0]) + ")";
      case FormulaKind::And: return "(and " + formula(f.subs()[0]) + " " + formula(f.subs()[1]) + ")";
      case FormulaKind::Or: return "(or " + formula(f.subs()[0]) + " " + formula(f.subs()[1]) + ")";
      case FormulaKind::Implies: return "(=> " + formula(f.subs()[0]) + " " + formula(f.subs()[1]) + ")";
      case FormulaKind::Forall:
      case FormulaKind::Exists: {
        quantified = true;
        if (f.sort() == Sort::Rat) throw UnsupportedFeature("quantifier over QQ in " + print_formula(f));
        const bool integer = is_int_sort(f.sort());
        (integer ? uses_int : uses_real) = true;
        bound_.push_back({f.var(), f.sort()});
        std::string body = formula(f.body());
        bound_.pop_back();
        const bool all = f.kind() == FormulaKind::Forall;
        if (f.sort() == Sort::Nat)
          body = all ? "(=> (>= " + f.var() + " 0) " + body + ")" : "(and (>= " + f.var() + " 0) " + body + ")";
        return std::string(all ? "(forall" : "(exists") + " ((" + f.var() + (integer ? " Int" : " Real") + ")) " +
               body + ")";
      }
    }
    throw UnsupportedFeature("formula " + print_formula(f));
  }

  Typed term(const Term& t) {
    switch (t.kind()) {
      case TermKind::Literal: {
        Typed r;
        r.constant = true;
        r.literal = t.value();
        r.is_int = is_integer(t.value());
        r.text = r.is_int ? smt_integer(numerator_of(t.value())) : smt_real(t.value());
        if (!r.is_int) uses_real = true;
        return r;
      }
      case TermKind::Variable: {
        Sort s = Sort::Real;
        bool found = false;
        for (auto it = bound_.rbegin(); it != bound_.rend() && !found; ++it)
          if (it->first == t.name()) s = it->second, found = true;
        if (!found) {
          auto it = sorts_.variables.find(t.name());
          if (it != sorts_.variables.end()) s = it->second;
        }
        return {t.name(), is_int_sort(s), false, std::nullopt};
      }
      case TermKind::Apply: {
        const auto& sig = sorts_.functions.at(t.name());
        std::string text = "(" + t.name();
        for (std::size_t i = 0; i < t.args().size(); ++i) {
          Typed a = term(t.args()[i]);
          if (is_int_sort(sig.args[i])) {
            if (!a.is_int)
              throw UnsupportedFeature("real-valued argument " + print_term(t.args()[i]) + " to " + t.name());
            text += " " + a.text;
          } else {
            text += " " + to_real(a);
          }
        }
        return {text + ")", is_int_sort(sig.result), false, std::nullopt};
      }
      case TermKind::Neg: {
        Typed a = term(t.args()[0]);
        return {"(- " + a.text + ")", a.is_int, a.constant, std::nullopt};
      }
      case TermKind::Add:
      case TermKind::Sub:
      case TermKind::Mul: {
        Typed a = term(t.lhs()), b = term(t.rhs());
        if (t.kind() == TermKind::Mul && !a.constant && !b.constant) nonlinear = true;
        const char* op = t.kind() == TermKind::Add ? "+" : t.kind() == TermKind::Sub ? "-" : "*";
        auto [x, y] = unify(a, b);
        return {std::string("(") + op + " " + x + " " + y + ")", a.is_int && b.is_int, a.constant && b.constant,
                std::nullopt};
      }
      case TermKind::Div: {
        Typed a = term(t.lhs()), b = term(t.rhs());
        if (!b.constant) nonlinear = true;
        uses_real = true;
        return {"(/ " + to_real(a) + " " + to_real(b) + ")", false, a.constant && b.constant, std::nullopt};
      }
      case TermKind::Pow: {
        if (!t.rhs().is_literal()) throw UnsupportedFeature("symbolic exponent in " + print_term(t));
        const long k = numerator_of(t.rhs().value()).convert_to<long>();
        if (k > 64 || k < -64) throw UnsupportedFeature("exponent too large in " + print_term(t));
        Typed b = term(t.lhs());
        if (k == 0) return {b.is_int ? "1" : "1.0", b.is_int, true, std::nullopt};
        const long n = k < 0 ? -k : k;
        if (n > 1 && !b.constant) nonlinear = true;
        std::string prod = b.text;
        if (n > 1) {
          prod = "(*";
          for (long i = 0; i < n; ++i) prod += " " + b.text;
          prod += ")";
        }
        if (k > 0) return {prod, b.is_int, b.constant, std::nullopt};
        if (!b.constant) nonlinear = true;
        uses_real = true;
        Typed p{prod, b.is_int, b.constant, std::nullopt};
        return {"(/ 1.0 " + to_real(p) + ")", false, b.constant, std::nullopt};
      }
    }
    throw UnsupportedFeature("term " + print_term(t));
  }

 private:
  std::string to_real(const Typed& t) {
    uses_real = true;
    if (!t.is_int) return t.text;
    if (t.literal) return smt_real(*t.literal);
    mixed = true;
    return "(to_real " + t.text + ")";
  }

  std::pair<std::string, std::string> unify(const Typed& a, const Typed& b) {
    if (a.is_int == b.is_int) return {a.text, b.text};
    return {to_real(a), to_real(b)};
  }

  const SortMap& sorts_;
  std::vector<std::pair<std::string, Sort>> bound_;
};

void collect_ground_applications(const Term& t, std::vector<std::pair<std::string, std::vector<Rational>>>& out) {
  for (const auto& a : t.args()) collect_ground_applications(a, out);
  if (t.kind() != TermKind::Apply) return;
  std::vector<Rational> values;
  for (const auto& a : t.args()) {
    if (!is_ground(a)) return;
    try {
      values.push_back(eval_exact(a, {}));
    } catch (const Error&) {
      return;
    }
  }
  out.emplace_back(t.name(), std::move(values));
}

void collect_ground_applications(const Formula& f, std::vector<std::pair<std::string, std::vector<Rational>>>& out) {
  if (f.is_quantifier()) return;
  for (const auto& t : f.terms()) collect_ground_applications(t, out);
  for (const auto& s : f.subs()) collect_ground_applications(s, out);
}

// Guarded equations of `d` at literal arguments, chasing the applications they
// mention while the arguments stay small.
std::vector<Formula> ground_instances(const EntailmentQuery& q) {
  constexpr std::size_t kMaxInstances = 256;
  std::vector<std::pair<std::string, std::vector<Rational>>> pending;
  for (const auto& p : q.premises) collect_ground_applications(p, pending);
  collect_ground_applications(q.conclusion, pending);

  std::vector<Formula> out;
  std::set<std::pair<std::string, std::vector<Rational>>> done;
  std::deque<std::pair<std::string, std::vector<Rational>>> queue(pending.begin(), pending.end());
  while (!queue.empty() && done.size() < kMaxInstances) {
    auto key = queue.front();
    queue.pop_front();
    if (done.count(key)) continue;
    const Definition* def = nullptr;
    for (const auto& d : q.definitions)
      if (d.name == key.first && d.arity() == key.second.size()) def = &d;
    if (!def) continue;
    bool ok = true;
    for (std::size_t i = 0; i < key.second.size() && ok; ++i)
      ok = is_integer(key.second[i]) && abs(key.second[i]) <= kMaxInstanceArgument &&
           in_sort(key.second[i], def->arg_sorts[i]);
    if (!ok) continue;
    done.insert(key);

    std::vector<Term> args;
    for (const auto& v : key.second) args.push_back(Term::literal(v));
    const Term head = Term::apply(def->name, args);
    for (const auto& b : def->branches) {
      Term body = b.body;
      Formula guard = b.guard;
      for (std::size_t i = 0; i < def->arity(); ++i) {
        body = substitute(body, def->params[i], args[i]);
        guard = substitute(guard, def->params[i], args[i]);
      }
      Formula eq = Formula::eq(head, body);
      out.push_back(guard.kind() == FormulaKind::True ? eq : Formula::implies(guard, eq));
      std::vector<std::pair<std::string, std::vector<Rational>>> more;
      collect_ground_applications(body, more);
      collect_ground_applications(guard, more);
      queue.insert(queue.end(), more.begin(), more.end());
    }
  }
  return out;
}

std::string logic_name(const Translator& t, bool functions) {
  std::string logic = t.quantified ? "" : "QF_";
  if (functions) logic += "UF";
  logic += t.nonlinear ? "N" : "L";
  const bool ints = t.uses_int, reals = t.uses_real;
  if (t.mixed || (ints && reals)) logic += "IRA";
  else if (reals) logic += "RA";
  else logic += "IA";
  return logic;
}

}  // namespace

SortMap infer_sorts(const EntailmentQuery& q) {
  SortMap m;
  for (const auto& d : q.definitions) {
    FunctionSort sig{d.arg_sorts, d.result};
    auto [it, fresh] = m.functions.emplace(d.name, sig);
    if (!fresh && !(it->second == sig)) throw SortClash("conflicting definitions of " + d.name);
  }

  std::set<std::pair<std::string, std::size_t>> used;
  for (const auto& p : q.premises) collect_functions(p, used);
  collect_functions(q.conclusion, used);
  for (const auto& d : q.definitions)
    for (const auto& b : d.branches) {
      collect_functions(b.body, used);
      collect_functions(b.guard, used);
    }
  for (const auto& [name, arity] : used) {
    auto it = m.functions.find(name);
    if (it == m.functions.end()) {
      m.functions.emplace(name, FunctionSort{std::vector<Sort>(arity, Sort::Real), Sort::Real});
    } else if (it->second.args.size() != arity) {
      throw SortClash(name + " is used with " + std::to_string(arity) + " argument(s) but takes " +
                      std::to_string(it->second.args.size()));
    }
  }

  std::set<std::string> vars;
  for (const auto& p : q.premises)
    for (const auto& v : free_variables(p)) vars.insert(v);
  for (const auto& v : free_variables(q.conclusion)) vars.insert(v);
  for (const auto& v : vars) {
    if (m.functions.count(v)) throw SortClash(v + " is used both as a variable and as a function");
    m.variables[v] = Sort::Real;
  }

  std::map<std::string, Sort> declared;
  for (const auto& p : q.premises) {
    std::vector<Formula> parts;
    top_conjuncts(p, parts);
    for (const auto& c : parts) {
      if (c.kind() != FormulaKind::Member || !c.terms()[0].is_variable()) continue;
      const std::string& v = c.terms()[0].name();
      auto [it, fresh] = declared.emplace(v, c.sort());
      if (!fresh) it->second = sort_join(it->second, c.sort());
    }
  }
  for (const auto& [v, s] : declared) m.variables[v] = s;
  return m;
}

std::string SmtScript::text() const {
  std::string s;
  if (produce_models) s += "(set-option :produce-models true)\n";
  s += "(set-logic " + logic + ")\n";
  for (const auto& d : declarations) s += d + "\n";
  for (const auto& a : assertions) s += "(assert " + a + ")\n";
  s += "(check-sat)\n";
  if (produce_models) s += "(get-model)\n";
  s += "(get-info :reason-unknown)\n";
  return s;
}

SmtScript to_smtlib(const EntailmentQuery& q, int timeout_ms, bool ground_only) {
  const SortMap sorts = infer_sorts(q);
  Translator tr(sorts);
  SmtScript script;
  script.timeout_ms = timeout_ms;

  auto smt_sort = [&](Sort s) {
    (is_int_sort(s) ? tr.uses_int : tr.uses_real) = true;
    return std::string(is_int_sort(s) ? "Int" : "Real");
  };
  for (const auto& [name, sig] : sorts.functions) {
    std::string d = "(declare-fun " + name + " (";
    for (std::size_t i = 0; i < sig.args.size(); ++i) d += (i ? " " : "") + smt_sort(sig.args[i]);
    script.declarations.push_back(d + ") " + smt_sort(sig.result) + ")");
  }
  for (const auto& [name, s] : sorts.variables) {
    if (s == Sort::Rat) throw UnsupportedFeature("variable " + name + " of sort QQ");
    script.declarations.push_back("(declare-fun " + name + " () " + smt_sort(s) + ")");
  }

  for (const auto& [name, s] : sorts.variables)
    if (s == Sort::Nat) script.assertions.push_back("(>= " + name + " 0)");
  for (const auto& d : q.definitions) {
    if (ground_only || d.result != Sort::Nat) continue;
    // Result in NN whenever the arguments are in the domain.
    std::vector<Term> args;
    for (const auto& p : d.params) args.push_back(Term::variable(p));
    Formula f = Formula::member(Term::apply(d.name, args), Sort::Nat);
    for (std::size_t i = d.arity(); i-- > 0;)
      f = Formula::forall(d.params[i], d.arg_sorts[i],
                          Formula::implies(Formula::member(Term::variable(d.params[i]), d.arg_sorts[i]), f));
    script.assertions.push_back(tr.formula(f));
  }
  if (!ground_only)
    for (const auto& d : q.definitions) script.assertions.push_back(tr.formula(desugar_definition(d)));
  for (const auto& inst : ground_instances(q)) script.assertions.push_back(tr.formula(inst));
  for (const auto& p : q.premises) script.assertions.push_back(tr.formula(p));
  script.assertions.push_back("(not " + tr.formula(q.conclusion) + ")");
  script.logic = logic_name(tr, !sorts.functions.empty());
  return script;
}

std::string_view outcome_name(SolverOutcome::Kind k) {
  switch (k) {
    case SolverOutcome::Kind::Unsat: return "unsat";
    case SolverOutcome::Kind::Sat: return "sat";
    case SolverOutcome::Kind::Unknown: return "unknown";
    case SolverOutcome::Kind::SolverError: return "solver-error";
  }
  return "unknown";
}

namespace {

struct SExpr {
  std::string atom;
  std::vector<SExpr> list;
  bool is_list = false;

  std::string str() const {
    if (!is_list) return atom;
    std::string s = "(";
    for (std::size_t i = 0; i < list.size(); ++i) s += (i ? " " : "") + list[i].str();
    return s + ")";
  }
};

class SExprReader {
 public:
  explicit SExprReader(const std::string& text) : s_(text) {}

  std::optional<SExpr> next() {
    skip();
    if (i_ >= s_.size()) return std::nullopt;
    return read();
  }

 private:
  void skip() {
    while (i_ < s_.size()) {
      if (std::isspace(static_cast<unsigned char>(s_[i_]))) ++i_;
      else if (s_[i_] == ';') while (i_ < s_.size() && s_[i_] != '\n') ++i_;
      else break;
    }
  }

  SExpr read() {
    skip();
    if (i_ >= s_.size()) throw Error("unexpected end of solver output");
    SExpr e;
    if (s_[i_] == '(') {
      ++i_;
      e.is_list = true;
      for (;;) {
        skip();
        if (i_ >= s_.size()) throw Error("unbalanced solver output");
        if (s_[i_] == ')') {
          ++i_;
          break;
        }
        e.list.push_back(read());
      }
      return e;
    }
    if (s_[i_] == ')') throw Error("unbalanced solver output");
    const std::size_t start = i_;
    if (s_[i_] == '"' || s_[i_] == '|') {
      const char q = s_[i_++];
      while (i_ < s_.size() && s_[i_] != q) i_ += (s_[i_] == '\\' && q == '"') ? 2 : 1;
      ++i_;
    } else {
      while (i_ < s_.size() && !std::isspace(static_cast<unsigned char>(s_[i_])) && s_[i_] != '(' && s_[i_] != ')') ++i_;
    }
    e.atom = s_.substr(start, i_ - start);
    return e;
  }

  const std::string& s_;
  std::size_t i_ = 0;
};

std::optional<Rational> value_of(const SExpr& e) {
  if (!e.is_list) {
    try {
      return parse_rational(e.atom);
    } catch (const Error&) {
      return std::nullopt;
    }
  }
  if (e.list.empty() || e.list[0].is_list) return std::nullopt;
  const std::string& op = e.list[0].atom;
  std::vector<Rational> args;
  for (std::size_t i = 1; i < e.list.size(); ++i) {
    auto v = value_of(e.list[i]);
    if (!v) return std::nullopt;
    args.push_back(*v);
  }
  if (args.empty()) return std::nullopt;
  if (op == "-") {
    if (args.size() == 1) return -args[0];
    Rational r = args[0];
    for (std::size_t i = 1; i < args.size(); ++i) r -= args[i];
    return r;
  }
  if (op == "+" || op == "*") {
    Rational r = op == "+" ? 0 : 1;
    for (const auto& a : args) r = op == "+" ? Rational(r + a) : Rational(r * a);
    return r;
  }
  if (op == "/" && args.size() == 2 && args[1] != 0) return args[0] / args[1];
  if (op == "to_real" && args.size() == 1) return args[0];
  return std::nullopt;
}

std::string unquote(const std::string& s) {
  if (s.size() >= 2 && s.front() == '"' && s.back() == '"') return s.substr(1, s.size() - 2);
  return s;
}

}  // namespace

std::optional<Rational> parse_smt_value(const std::string& text) {
  try {
    SExprReader r(text);
    auto e = r.next();
    if (!e || r.next()) return std::nullopt;
    return value_of(*e);
  } catch (const Error&) {
    return std::nullopt;
  }
}

SolverOutcome parse_solver_output(const std::string& out) {
  SolverOutcome o;
  std::vector<SExpr> items;
  try {
    SExprReader r(out);
    while (auto e = r.next()) items.push_back(std::move(*e));
  } catch (const Error& e) {
    o.kind = SolverOutcome::Kind::SolverError;
    o.reason = e.what();
    return o;
  }
  std::size_t i = 0;
  for (; i < items.size(); ++i) {
    const SExpr& e = items[i];
    if (e.is_list && !e.list.empty() && e.list[0].atom == "error") {
      o.kind = SolverOutcome::Kind::SolverError;
      o.reason = e.list.size() > 1 ? unquote(e.list[1].atom) : "error";
      return o;
    }
    if (!e.is_list && (e.atom == "sat" || e.atom == "unsat" || e.atom == "unknown")) break;
  }
  if (i == items.size()) {
    o.kind = SolverOutcome::Kind::SolverError;
    o.reason = "no check-sat answer in solver output";
    return o;
  }
  const std::string answer = items[i].atom;
  o.kind = answer == "sat" ? SolverOutcome::Kind::Sat
           : answer == "unsat" ? SolverOutcome::Kind::Unsat
                               : SolverOutcome::Kind::Unknown;
  for (++i; i < items.size(); ++i) {
    const SExpr& e = items[i];
    if (!e.is_list || e.list.empty()) continue;
    if (e.list[0].atom == ":reason-unknown" && e.list.size() > 1) {
      if (o.kind == SolverOutcome::Kind::Unknown) o.reason = unquote(e.list[1].atom);
      continue;
    }
    if (o.kind != SolverOutcome::Kind::Sat || e.list[0].atom == "error") continue;
    // (model? (define-fun name () Sort value) ...)
    bool is_model = false;
    for (const auto& d : e.list) {
      if (!d.is_list || d.list.size() != 5 || d.list[0].atom != "define-fun") continue;
      is_model = true;
      if (d.list[2].is_list && d.list[2].list.empty()) o.model[d.list[1].atom] = d.list[4].str();
    }
    if (is_model) o.raw_model = e.str();
  }
  if (o.kind == SolverOutcome::Kind::Unknown && (o.reason.find("timeout") != std::string::npos ||
                                                 o.reason.find("canceled") != std::string::npos))
    o.reason = "timeout";
  if (o.kind == SolverOutcome::Kind::Unknown && o.reason.empty()) o.reason = "solver returned unknown";
  return o;
}

std::string sha256_hex(const std::string& data) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (!EVP_Digest(data.data(), data.size(), digest, &len, EVP_sha256(), nullptr)) throw Error("sha256 failed");
  static constexpr char kHex[] = "0123456789abcdef";
  std::string out;
  for (unsigned i = 0; i < len; ++i) {
    out += kHex[digest[i] >> 4];
    out += kHex[digest[i] & 15];
  }
  return out;
}

std::vector<std::string> SmtBackend::command_line() const {
  std::vector<std::string> cmd{config_.path};
  const std::string base = std::filesystem::path(config_.path).filename().string();
  if (base.find("z3") != std::string::npos) {
    cmd.push_back("-in");
    cmd.push_back("-t:" + std::to_string(config_.timeout_ms));
  } else if (base.find("cvc5") != std::string::npos) {
    cmd.push_back("--lang=smt2");
    cmd.push_back("--tlimit-per=" + std::to_string(config_.timeout_ms));
  }
  cmd.insert(cmd.end(), config_.extra_args.begin(), config_.extra_args.end());
  return cmd;
}

SolverOutcome SmtBackend::run(const SmtScript& script) {
  const std::string text = script.text();
  const auto cmd = command_line();
  std::string key = text;
  for (const auto& a : cmd) key += "\n" + a;
  {
    std::lock_guard lock(mutex_);
    ++queries_;
    if (auto it = cache_.find(key); it != cache_.end()) {
      ++hits_;
      return it->second;
    }
  }
  if (config_.artifact_dir) {
    std::filesystem::create_directories(*config_.artifact_dir);
    const auto target = *config_.artifact_dir / (sha256_hex(text) + ".smt2");
    const auto temp = target.string() + ".tmp" + std::to_string(std::hash<std::string>{}(key) % 100000);
    {
      std::ofstream f(temp, std::ios::binary);
      f << text;
    }
    std::filesystem::rename(temp, target);
  }

  SolverOutcome o;
  try {
    ProcessResult r = run_process(cmd, text, config_.timeout_ms + config_.grace_ms);
    if (r.timed_out) {
      o.kind = SolverOutcome::Kind::Unknown;
      o.reason = "timeout";
    } else {
      o = parse_solver_output(r.out);
      o.exit_code = r.exit_code;
      if (o.kind == SolverOutcome::Kind::SolverError) {
        std::string excerpt = r.err.empty() ? o.reason : r.err.substr(0, 400);
        o.reason = excerpt + " (exit code " + std::to_string(r.exit_code) + ")";
      }
    }
  } catch (const Error& e) {
    o.kind = SolverOutcome::Kind::SolverError;
    o.reason = e.what();
  }
  // Timeouts depend on machine load, so they are not cached.
  if (!(o.kind == SolverOutcome::Kind::Unknown && o.reason == "timeout")) {
    std::lock_guard lock(mutex_);
    cache_.emplace(key, o);
  }
  return o;
}

std::size_t SmtBackend::queries() const {
  std::lock_guard lock(mutex_);
  return queries_;
}

std::size_t SmtBackend::cache_hits() const {
  std::lock_guard lock(mutex_);
  return hits_;
}

Verdict SmtBackend::check(const EntailmentQuery& q) {
  SmtScript script;
  try {
    if (!q.definitions.empty()) {
      const bool quantified_premise =
          std::any_of(q.premises.begin(), q.premises.end(), [](const Formula& p) { return has_quantifier(p); });
      Verdict relaxed = decide(q, run(to_smtlib(q, config_.timeout_ms, true)));
      if (relaxed.kind == VerdictKind::Valid || (relaxed.replayed && !quantified_premise)) return relaxed;
    }
    script = to_smtlib(q, config_.timeout_ms);
  } catch (const UnsupportedFeature& e) {
    return Verdict::unknown("smt", std::string("unsupported: ") + e.what());
  } catch (const SortClash& e) {
    return Verdict::unknown("smt", std::string("sort clash: ") + e.what());
  }
  return decide(q, run(script));
}

Verdict SmtBackend::decide(const EntailmentQuery& q, const SolverOutcome& o) {
  switch (o.kind) {
    case SolverOutcome::Kind::Unsat: return Verdict::valid("smt", "the premises entail the conclusion");
    case SolverOutcome::Kind::Unknown: return Verdict::unknown("smt", o.reason);
    case SolverOutcome::Kind::SolverError: return Verdict::unknown("smt", "solver-error: " + o.reason);
    case SolverOutcome::Kind::Sat: break;
  }
  const SortMap sorts = infer_sorts(q);
  Valuation point;
  bool complete = true;
  for (const auto& [name, s] : sorts.variables) {
    auto it = o.model.find(name);
    std::optional<Rational> v = it == o.model.end() ? std::optional<Rational>(0) : parse_smt_value(it->second);
    if (!v) {
      complete = false;
      continue;
    }
    point.vars[name] = *v;
  }

  Verdict v;
  v.kind = VerdictKind::Invalid;
  v.tool = "smt";
  v.raw_model = o.raw_model;
  if (complete) {
    try {
      Evaluator ev(point, q.definitions);
      for (const auto& p : q.premises) {
        if (has_quantifier(p)) continue;
        if (!ev.holds(p)) return Verdict::unknown("smt", "the solver's model does not satisfy premise " + print_formula(p));
      }
      if (!has_quantifier(q.conclusion)) {
        if (ev.holds(q.conclusion)) return Verdict::unknown("smt", "the solver's model satisfies the conclusion");
        v.replayed = true;
      }
    } catch (const NotEvaluable&) {
    } catch (const EvalError& e) {
      return Verdict::unknown("smt", std::string("the solver's model cannot be replayed: ") + e.what());
    }
  }
  if (v.replayed) {
    v.counterexample = point;
    v.reason = "premises hold but conclusion fails at " + describe_valuation(point);
  } else {
    v.reason = "the solver found a model of the premises that falsifies the conclusion: " + o.raw_model;
  }
  return v;
}

}  // namespace mathcheck
