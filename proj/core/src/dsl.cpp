#include "ordlim/dsl.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <functional>

#include "ordlim/tuple_code.hpp"

namespace ordlim::dsl {

// ---------------------------------------------------------------------------
// Builders

TermExpr TermExpr::constant(Nat v) {
  TermExpr t;
  t.kind = Kind::constant;
  t.value = v;
  return t;
}

TermExpr TermExpr::variable(std::string name) {
  TermExpr t;
  t.kind = Kind::variable;
  t.name = std::move(name);
  return t;
}

namespace {
TermExpr binary(TermExpr::Kind kind, TermExpr a, TermExpr b) {
  TermExpr t;
  t.kind = kind;
  t.args.push_back(std::move(a));
  t.args.push_back(std::move(b));
  return t;
}
}  // namespace

TermExpr TermExpr::add(TermExpr a, TermExpr b) { return binary(Kind::add, std::move(a), std::move(b)); }
TermExpr TermExpr::monus(TermExpr a, TermExpr b) { return binary(Kind::monus, std::move(a), std::move(b)); }
TermExpr TermExpr::mul(TermExpr a, TermExpr b) { return binary(Kind::mul, std::move(a), std::move(b)); }
TermExpr TermExpr::pair(TermExpr a, TermExpr b) { return binary(Kind::pair, std::move(a), std::move(b)); }

TermExpr TermExpr::proj0(TermExpr a) {
  TermExpr t;
  t.kind = Kind::proj0;
  t.args.push_back(std::move(a));
  return t;
}

TermExpr TermExpr::proj1(TermExpr a) {
  TermExpr t;
  t.kind = Kind::proj1;
  t.args.push_back(std::move(a));
  return t;
}

TermExpr TermExpr::tuple(std::uint32_t k, std::vector<TermExpr> parts) {
  if (k == 0 || parts.size() != k)
    throw std::invalid_argument("tuple arity mismatch");
  TermExpr t;
  t.kind = Kind::tuple;
  t.arity = k;
  t.args = std::move(parts);
  return t;
}

TermExpr TermExpr::project(std::uint32_t k, std::uint32_t i, TermExpr a) {
  if (k == 0 || i == 0 || i > k)
    throw std::invalid_argument("projection index out of range");
  TermExpr t;
  t.kind = Kind::proj;
  t.arity = k;
  t.index = i;
  t.args.push_back(std::move(a));
  return t;
}

QFFormula QFFormula::cmp(CmpOp op, TermExpr lhs, TermExpr rhs) {
  QFFormula f;
  f.kind = Kind::cmp;
  f.op = op;
  f.terms.push_back(std::move(lhs));
  f.terms.push_back(std::move(rhs));
  return f;
}

QFFormula QFFormula::neg(QFFormula a) {
  QFFormula f;
  f.kind = Kind::neg;
  f.children.push_back(std::move(a));
  return f;
}

namespace {
QFFormula connective(QFFormula::Kind kind, QFFormula a, QFFormula b) {
  QFFormula f;
  f.kind = kind;
  f.children.push_back(std::move(a));
  f.children.push_back(std::move(b));
  return f;
}
}  // namespace

QFFormula QFFormula::conj(QFFormula a, QFFormula b) { return connective(Kind::conj, std::move(a), std::move(b)); }
QFFormula QFFormula::disj(QFFormula a, QFFormula b) { return connective(Kind::disj, std::move(a), std::move(b)); }
QFFormula QFFormula::impl(QFFormula a, QFFormula b) { return connective(Kind::impl, std::move(a), std::move(b)); }

QFFormula QFFormula::exists(std::string var, TermExpr bound, QFFormula body) {
  QFFormula f;
  f.kind = Kind::exists;
  f.var = std::move(var);
  f.terms.push_back(std::move(bound));
  f.children.push_back(std::move(body));
  return f;
}

QFFormula QFFormula::forall(std::string var, TermExpr bound, QFFormula body) {
  QFFormula f = exists(std::move(var), std::move(bound), std::move(body));
  f.kind = Kind::forall;
  return f;
}

QFFormula QFFormula::truth() {
  return cmp(CmpOp::eq, TermExpr::constant(0), TermExpr::constant(0));
}

QFFormula QFFormula::falsity() {
  return cmp(CmpOp::lt, TermExpr::constant(0), TermExpr::constant(0));
}

// ---------------------------------------------------------------------------
// Environment

Env::Env(std::initializer_list<std::pair<std::string, Nat>> init) {
  for (const auto& [name, value] : init) slots_.emplace_back(name, value);
}

void Env::push(std::string name, Nat value) { slots_.emplace_back(std::move(name), value); }

void Env::pop() { slots_.pop_back(); }

std::optional<Nat> Env::lookup(std::string_view name) const {
  for (auto it = slots_.rbegin(); it != slots_.rend(); ++it)
    if (it->first == name) return it->second;
  return std::nullopt;
}

// ---------------------------------------------------------------------------
// Evaluation

namespace {

Nat checked_add(Nat a, Nat b) {
  Nat r;
  if (__builtin_add_overflow(a, b, &r)) throw eval_error("addition left the 64-bit range");
  return r;
}

Nat checked_mul(Nat a, Nat b) {
  Nat r;
  if (__builtin_mul_overflow(a, b, &r)) throw eval_error("multiplication left the 64-bit range");
  return r;
}

struct Binder {
  Env& env;
  Binder(Env& e, const std::string& name, Nat value) : env(e) { env.push(name, value); }
  ~Binder() { env.pop(); }
};

}  // namespace

Nat eval_term(const TermExpr& t, const Env& env) {
  switch (t.kind) {
    case TermExpr::Kind::constant:
      return t.value;
    case TermExpr::Kind::variable: {
      auto v = env.lookup(t.name);
      if (!v) throw eval_error("unbound variable '" + t.name + "'");
      return *v;
    }
    case TermExpr::Kind::add:
      return checked_add(eval_term(t.args[0], env), eval_term(t.args[1], env));
    case TermExpr::Kind::monus: {
      Nat a = eval_term(t.args[0], env), b = eval_term(t.args[1], env);
      return a >= b ? a - b : 0;
    }
    case TermExpr::Kind::mul:
      return checked_mul(eval_term(t.args[0], env), eval_term(t.args[1], env));
    case TermExpr::Kind::pair:
      return cantor_pair(eval_term(t.args[0], env), eval_term(t.args[1], env));
    case TermExpr::Kind::proj0:
      return cantor_unpair(eval_term(t.args[0], env)).first;
    case TermExpr::Kind::proj1:
      return cantor_unpair(eval_term(t.args[0], env)).second;
    case TermExpr::Kind::tuple: {
      std::vector<Nat> xs;
      xs.reserve(t.args.size());
      for (const TermExpr& a : t.args) xs.push_back(eval_term(a, env));
      return encode_tuple(xs);
    }
    case TermExpr::Kind::proj:
      return decode_tuple(t.arity, eval_term(t.args[0], env))[t.index - 1];
  }
  throw eval_error("corrupt term");
}

bool eval_formula(const QFFormula& f, Env& env) {
  switch (f.kind) {
    case QFFormula::Kind::cmp: {
      Nat a = eval_term(f.terms[0], env), b = eval_term(f.terms[1], env);
      switch (f.op) {
        case QFFormula::CmpOp::eq: return a == b;
        case QFFormula::CmpOp::le: return a <= b;
        case QFFormula::CmpOp::lt: return a < b;
      }
      break;
    }
    case QFFormula::Kind::neg:
      return !eval_formula(f.children[0], env);
    case QFFormula::Kind::conj:
      return eval_formula(f.children[0], env) && eval_formula(f.children[1], env);
    case QFFormula::Kind::disj:
      return eval_formula(f.children[0], env) || eval_formula(f.children[1], env);
    case QFFormula::Kind::impl:
      return !eval_formula(f.children[0], env) || eval_formula(f.children[1], env);
    case QFFormula::Kind::exists: {
      Nat bound = eval_term(f.terms[0], env);
      for (Nat v = 0; v <= bound; ++v) {
        Binder bind(env, f.var, v);
        if (eval_formula(f.children[0], env)) return true;
        if (v == bound) break;  // bound may be the largest Nat
      }
      return false;
    }
    case QFFormula::Kind::forall: {
      Nat bound = eval_term(f.terms[0], env);
      for (Nat v = 0; v <= bound; ++v) {
        Binder bind(env, f.var, v);
        if (!eval_formula(f.children[0], env)) return false;
        if (v == bound) break;
      }
      return true;
    }
  }
  throw eval_error("corrupt formula");
}

bool eval_formula(const QFFormula& f, Env&& env) { return eval_formula(f, env); }

// ---------------------------------------------------------------------------
// Rendering. Term levels: sum 0 < product 1 < atom 2. Formula levels:
// quantifier/implication 0 < disjunction 1 < conjunction 2 < negation 3 <
// comparison 4. Parentheses appear exactly when a node sits in a position
// demanding a tighter level.

namespace {

std::string render_term_at(const TermExpr& t, int min_level);

std::string render_call(const char* name, const TermExpr& arg) {
  return std::string(name) + "(" + render_term_at(arg, 0) + ")";
}

std::string render_term_at(const TermExpr& t, int min_level) {
  int level = 2;
  std::string s;
  switch (t.kind) {
    case TermExpr::Kind::constant:
      s = std::to_string(t.value);
      break;
    case TermExpr::Kind::variable:
      s = t.name;
      break;
    case TermExpr::Kind::add:
      level = 0;
      s = render_term_at(t.args[0], 0) + " + " + render_term_at(t.args[1], 1);
      break;
    case TermExpr::Kind::monus:
      level = 0;
      s = render_term_at(t.args[0], 0) + " - " + render_term_at(t.args[1], 1);
      break;
    case TermExpr::Kind::mul:
      level = 1;
      s = render_term_at(t.args[0], 1) + " * " + render_term_at(t.args[1], 2);
      break;
    case TermExpr::Kind::pair:
      s = "<" + render_term_at(t.args[0], 0) + ", " + render_term_at(t.args[1], 0) + ">";
      break;
    case TermExpr::Kind::proj0:
      s = render_call("p0", t.args[0]);
      break;
    case TermExpr::Kind::proj1:
      s = render_call("p1", t.args[0]);
      break;
    case TermExpr::Kind::tuple: {
      s = "tup_" + std::to_string(t.arity) + "(";
      for (std::size_t i = 0; i < t.args.size(); ++i) {
        if (i) s += ", ";
        s += render_term_at(t.args[i], 0);
      }
      s += ")";
      break;
    }
    case TermExpr::Kind::proj:
      s = render_call(("proj_" + std::to_string(t.arity) + "_" + std::to_string(t.index)).c_str(),
                      t.args[0]);
      break;
  }
  if (level < min_level) return "(" + s + ")";
  return s;
}

int formula_level(const QFFormula& f) {
  switch (f.kind) {
    case QFFormula::Kind::exists:
    case QFFormula::Kind::forall:
    case QFFormula::Kind::impl: return 0;
    case QFFormula::Kind::disj: return 1;
    case QFFormula::Kind::conj: return 2;
    case QFFormula::Kind::neg: return 3;
    case QFFormula::Kind::cmp: return 4;
  }
  return 4;
}

std::string render_formula_at(const QFFormula& f, int min_level) {
  std::string s;
  switch (f.kind) {
    case QFFormula::Kind::cmp: {
      const char* op = f.op == QFFormula::CmpOp::eq ? "=" : f.op == QFFormula::CmpOp::le ? "<=" : "<";
      s = render_term_at(f.terms[0], 0) + " " + op + " " + render_term_at(f.terms[1], 0);
      break;
    }
    case QFFormula::Kind::neg:
      s = "! " + render_formula_at(f.children[0], 4);
      break;
    case QFFormula::Kind::conj:
      s = render_formula_at(f.children[0], 2) + " && " + render_formula_at(f.children[1], 3);
      break;
    case QFFormula::Kind::disj:
      s = render_formula_at(f.children[0], 1) + " || " + render_formula_at(f.children[1], 2);
      break;
    case QFFormula::Kind::impl:
      s = render_formula_at(f.children[0], 1) + " -> " + render_formula_at(f.children[1], 0);
      break;
    case QFFormula::Kind::exists:
    case QFFormula::Kind::forall:
      s = std::string(f.kind == QFFormula::Kind::exists ? "exists " : "forall ") + f.var +
          " <= " + render_term_at(f.terms[0], 0) + " . " + render_formula_at(f.children[0], 0);
      break;
  }
  if (formula_level(f) < min_level) return "(" + s + ")";
  return s;
}

}  // namespace

std::string render_term(const TermExpr& t) { return render_term_at(t, 0); }
std::string render_formula(const QFFormula& f) { return render_formula_at(f, 0); }

// ---------------------------------------------------------------------------
// Structural equality and free variables

bool structurally_equal(const TermExpr& a, const TermExpr& b) {
  if (a.kind != b.kind || a.value != b.value || a.name != b.name || a.arity != b.arity ||
      a.index != b.index || a.args.size() != b.args.size())
    return false;
  for (std::size_t i = 0; i < a.args.size(); ++i)
    if (!structurally_equal(a.args[i], b.args[i])) return false;
  return true;
}

bool structurally_equal(const QFFormula& a, const QFFormula& b) {
  if (a.kind != b.kind || a.var != b.var || a.terms.size() != b.terms.size() ||
      a.children.size() != b.children.size())
    return false;
  if (a.kind == QFFormula::Kind::cmp && a.op != b.op) return false;
  for (std::size_t i = 0; i < a.terms.size(); ++i)
    if (!structurally_equal(a.terms[i], b.terms[i])) return false;
  for (std::size_t i = 0; i < a.children.size(); ++i)
    if (!structurally_equal(a.children[i], b.children[i])) return false;
  return true;
}

namespace {

void collect_free(const TermExpr& t, std::set<std::string>& out) {
  if (t.kind == TermExpr::Kind::variable) {
    out.insert(t.name);
    return;
  }
  for (const TermExpr& a : t.args) collect_free(a, out);
}

void collect_free(const QFFormula& f, std::set<std::string>& out) {
  if (f.kind == QFFormula::Kind::exists || f.kind == QFFormula::Kind::forall) {
    collect_free(f.terms[0], out);
    std::set<std::string> body;
    collect_free(f.children[0], body);
    body.erase(f.var);
    out.insert(body.begin(), body.end());
    return;
  }
  for (const TermExpr& t : f.terms) collect_free(t, out);
  for (const QFFormula& c : f.children) collect_free(c, out);
}

}  // namespace

std::set<std::string> free_variables(const TermExpr& t) {
  std::set<std::string> out;
  collect_free(t, out);
  return out;
}

std::set<std::string> free_variables(const QFFormula& f) {
  std::set<std::string> out;
  collect_free(f, out);
  return out;
}

// ---------------------------------------------------------------------------
// Substitution

TermExpr substitute(const TermExpr& t, const std::map<std::string, TermExpr>& subst) {
  if (t.kind == TermExpr::Kind::variable) {
    auto it = subst.find(t.name);
    return it != subst.end() ? it->second : t;
  }
  TermExpr out = t;
  for (TermExpr& a : out.args) a = substitute(a, subst);
  return out;
}

QFFormula substitute(const QFFormula& f, const std::map<std::string, TermExpr>& subst) {
  if (f.kind == QFFormula::Kind::exists || f.kind == QFFormula::Kind::forall) {
    TermExpr new_bound = substitute(f.terms[0], subst);
    std::map<std::string, TermExpr> inner = subst;
    inner.erase(f.var);

    bool capture = false;
    for (const auto& [from, to] : inner)
      if (free_variables(to).count(f.var)) {
        capture = true;
        break;
      }

    std::string var = f.var;
    QFFormula body = f.children[0];
    if (capture) {
      std::set<std::string> avoid = free_variables(body);
      for (const auto& [from, to] : inner) {
        auto fv = free_variables(to);
        avoid.insert(fv.begin(), fv.end());
      }
      unsigned n = 0;
      do {
        var = f.var + std::to_string(n++);
      } while (avoid.count(var));
      std::map<std::string, TermExpr> rename{{f.var, TermExpr::variable(var)}};
      body = substitute(body, rename);
    }

    QFFormula out = QFFormula::exists(var, std::move(new_bound), substitute(body, inner));
    out.kind = f.kind;
    return out;
  }
  QFFormula out = f;
  for (TermExpr& t : out.terms) t = substitute(t, subst);
  for (QFFormula& c : out.children) c = substitute(c, subst);
  return out;
}

// ---------------------------------------------------------------------------
// Lexer

namespace {

enum class Tok {
  ident, nat, lparen, rparen, comma, semi, dot, assign, arrow, and_and, or_or,
  bang, eq, le, lt, gt, plus, minus, star, lbrace, rbrace, end,
};

struct Token {
  Tok kind;
  std::string text;
  Nat value = 0;
  std::size_t pos = 0;
};

std::vector<Token> lex(std::string_view text) {
  std::vector<Token> out;
  std::size_t i = 0;
  const std::size_t n = text.size();
  auto push = [&](Tok k, std::size_t at, std::string t = {}) {
    out.push_back({k, std::move(t), 0, at});
  };
  while (i < n) {
    const char c = text[i];
    if (std::isspace(static_cast<unsigned char>(c))) {
      ++i;
      continue;
    }
    if (c == '#') {
      while (i < n && text[i] != '\n') ++i;
      continue;
    }
    const std::size_t at = i;
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
      std::size_t j = i;
      while (j < n && (std::isalnum(static_cast<unsigned char>(text[j])) || text[j] == '_')) ++j;
      push(Tok::ident, at, std::string(text.substr(i, j - i)));
      i = j;
      continue;
    }
    if (std::isdigit(static_cast<unsigned char>(c))) {
      std::size_t j = i;
      while (j < n && std::isdigit(static_cast<unsigned char>(text[j]))) ++j;
      Nat value = 0;
      auto res = std::from_chars(text.data() + i, text.data() + j, value);
      if (res.ec != std::errc() || res.ptr != text.data() + j)
        throw parse_error("number does not fit in 64 bits", at);
      Token tok{Tok::nat, std::string(text.substr(i, j - i)), value, at};
      out.push_back(std::move(tok));
      i = j;
      continue;
    }
    auto two = [&](char second) { return i + 1 < n && text[i + 1] == second; };
    switch (c) {
      case ':':
        if (!two('=')) throw parse_error("expected ':='", at);
        push(Tok::assign, at);
        i += 2;
        continue;
      case '-':
        if (two('>')) {
          push(Tok::arrow, at);
          i += 2;
        } else {
          push(Tok::minus, at);
          ++i;
        }
        continue;
      case '&':
        if (!two('&')) throw parse_error("expected '&&'", at);
        push(Tok::and_and, at);
        i += 2;
        continue;
      case '|':
        if (!two('|')) throw parse_error("expected '||'", at);
        push(Tok::or_or, at);
        i += 2;
        continue;
      case '<':
        if (two('=')) {
          push(Tok::le, at);
          i += 2;
        } else {
          push(Tok::lt, at);
          ++i;
        }
        continue;
      case '>': push(Tok::gt, at); ++i; continue;
      case '=': push(Tok::eq, at); ++i; continue;
      case '!': push(Tok::bang, at); ++i; continue;
      case '+': push(Tok::plus, at); ++i; continue;
      case '*': push(Tok::star, at); ++i; continue;
      case '(': push(Tok::lparen, at); ++i; continue;
      case ')': push(Tok::rparen, at); ++i; continue;
      case ',': push(Tok::comma, at); ++i; continue;
      case ';': push(Tok::semi, at); ++i; continue;
      case '.': push(Tok::dot, at); ++i; continue;
      case '{': push(Tok::lbrace, at); ++i; continue;
      case '}': push(Tok::rbrace, at); ++i; continue;
      default:
        throw parse_error(std::string("unexpected character '") + c + "'", at);
    }
  }
  push(Tok::end, n);
  return out;
}

// ---------------------------------------------------------------------------
// Parser

bool is_certificate_var(const std::string& name) {
  if (name == "c") return true;
  if (name.size() < 2 || (name[0] != 'a' && name[0] != 'b')) return false;
  return std::all_of(name.begin() + 1, name.end(),
                     [](char c) { return std::isdigit(static_cast<unsigned char>(c)); });
}

class Parser {
 public:
  explicit Parser(std::string_view text) : toks_(lex(text)) {}

  Document document() {
    Document doc;
    while (!at(Tok::end)) {
      if (!at(Tok::ident)) throw parse_error("expected a declaration", here().pos);
      const std::string& head = here().text;
      if (head == "herbrand" && next_is(Tok::lbrace)) {
        if (doc.herbrand) throw parse_error("duplicate herbrand block", here().pos);
        doc.herbrand = herbrand_block();
        continue;
      }
      if (head == "sigma2" && next_is(Tok::lbrace)) {
        if (doc.sigma2) throw parse_error("duplicate sigma2 block", here().pos);
        doc.sigma2 = sigma2_block();
        continue;
      }
      doc.decls.push_back(declaration(doc));
    }
    return doc;
  }

  TermExpr term_only(const std::vector<std::string>& scope) {
    scope_ = [scope](const std::string& v) {
      return std::find(scope.begin(), scope.end(), v) != scope.end();
    };
    TermExpr t = term();
    expect(Tok::end, "end of input");
    return t;
  }

  QFFormula formula_only(const std::vector<std::string>& scope) {
    scope_ = [scope](const std::string& v) {
      return std::find(scope.begin(), scope.end(), v) != scope.end();
    };
    QFFormula f = formula();
    expect(Tok::end, "end of input");
    return f;
  }

 private:
  const Token& here() const { return toks_[pos_]; }
  bool at(Tok k) const { return here().kind == k; }
  bool next_is(Tok k) const { return pos_ + 1 < toks_.size() && toks_[pos_ + 1].kind == k; }

  bool take(Tok k) {
    if (at(k)) {
      ++pos_;
      return true;
    }
    return false;
  }

  Token expect(Tok k, const char* what) {
    if (!at(k)) throw parse_error(std::string("expected ") + what, here().pos);
    return toks_[pos_++];
  }

  // --- declarations and blocks ---

  Decl declaration(const Document& doc) {
    Token name = expect(Tok::ident, "a declaration name");
    if (doc.find(name.text)) throw parse_error("duplicate declaration '" + name.text + "'", name.pos);
    expect(Tok::lparen, "'('");
    std::vector<std::string> params;
    if (!at(Tok::rparen)) {
      do {
        Token p = expect(Tok::ident, "a parameter name");
        if (std::find(params.begin(), params.end(), p.text) != params.end())
          throw parse_error("duplicate parameter '" + p.text + "'", p.pos);
        params.push_back(p.text);
      } while (take(Tok::comma));
    }
    expect(Tok::rparen, "')'");
    expect(Tok::assign, "':='");

    std::vector<std::string> bound = params;
    scope_ = [bound](const std::string& v) {
      return std::find(bound.begin(), bound.end(), v) != bound.end();
    };
    QFFormula body = formula();
    if (!take(Tok::semi) && !at(Tok::end))
      throw parse_error("expected ';' after declaration", here().pos);
    return {name.text, std::move(params), std::move(body)};
  }

  HerbrandBlock herbrand_block() {
    ++pos_;  // 'herbrand'
    expect(Tok::lbrace, "'{'");
    Token r_name = expect(Tok::ident, "'r'");
    if (r_name.text != "r") throw parse_error("herbrand block must set r first", r_name.pos);
    expect(Tok::eq, "'='");
    Token r_tok = expect(Tok::nat, "a rank");
    if (r_tok.value > 16) throw parse_error("rank too large", r_tok.pos);
    expect(Tok::semi, "';'");

    HerbrandBlock block;
    block.rank = static_cast<std::uint32_t>(r_tok.value);
    std::vector<std::optional<TermExpr>> ts(block.rank + 1), ss(block.rank + 1);
    scope_ = is_certificate_var;
    while (!take(Tok::rbrace)) {
      Token key = expect(Tok::ident, "'tN' or 'sN'");
      const bool is_t = !key.text.empty() && key.text[0] == 't';
      const bool is_s = !key.text.empty() && key.text[0] == 's';
      std::uint64_t idx = 0;
      auto res = std::from_chars(key.text.data() + 1, key.text.data() + key.text.size(), idx);
      if ((!is_t && !is_s) || key.text.size() < 2 || res.ec != std::errc() ||
          res.ptr != key.text.data() + key.text.size())
        throw parse_error("expected 'tN' or 'sN'", key.pos);
      if (idx > block.rank) throw parse_error("certificate index exceeds rank", key.pos);
      auto& slot = (is_t ? ts : ss)[idx];
      if (slot) throw parse_error("duplicate certificate entry", key.pos);
      expect(Tok::eq, "'='");
      slot = term();
      expect(Tok::semi, "';'");
    }
    for (std::uint32_t i = 0; i <= block.rank; ++i) {
      if (!ts[i]) throw parse_error("herbrand block missing t" + std::to_string(i), here().pos);
      if (!ss[i]) throw parse_error("herbrand block missing s" + std::to_string(i), here().pos);
      block.t_terms.push_back(std::move(*ts[i]));
      block.s_terms.push_back(std::move(*ss[i]));
    }
    return block;
  }

  Sigma2Block sigma2_block() {
    ++pos_;  // 'sigma2'
    expect(Tok::lbrace, "'{'");
    std::vector<std::optional<TermExpr>> zs;
    scope_ = [](const std::string& v) { return v == "c"; };
    while (!take(Tok::rbrace)) {
      Token key = expect(Tok::ident, "'zN'");
      std::uint64_t idx = 0;
      auto res = std::from_chars(key.text.data() + 1, key.text.data() + key.text.size(), idx);
      if (key.text.size() < 2 || key.text[0] != 'z' || res.ec != std::errc() ||
          res.ptr != key.text.data() + key.text.size())
        throw parse_error("expected 'zN'", key.pos);
      if (idx > 255) throw parse_error("candidate index too large", key.pos);
      if (zs.size() <= idx) zs.resize(idx + 1);
      if (zs[idx]) throw parse_error("duplicate candidate entry", key.pos);
      expect(Tok::eq, "'='");
      zs[idx] = term();
      expect(Tok::semi, "';'");
    }
    if (zs.empty()) throw parse_error("sigma2 block needs at least z0", here().pos);
    Sigma2Block block;
    for (std::size_t i = 0; i < zs.size(); ++i) {
      if (!zs[i]) throw parse_error("sigma2 block missing z" + std::to_string(i), here().pos);
      block.candidates.push_back(std::move(*zs[i]));
    }
    return block;
  }

  // --- formulas ---

  QFFormula formula() { return implication(); }

  QFFormula implication() {
    QFFormula lhs = disjunction();
    if (take(Tok::arrow)) return QFFormula::impl(std::move(lhs), implication());
    return lhs;
  }

  QFFormula disjunction() {
    QFFormula f = conjunction();
    while (take(Tok::or_or)) f = QFFormula::disj(std::move(f), conjunction());
    return f;
  }

  QFFormula conjunction() {
    QFFormula f = unary();
    while (take(Tok::and_and)) f = QFFormula::conj(std::move(f), unary());
    return f;
  }

  QFFormula unary() {
    if (take(Tok::bang)) return QFFormula::neg(unary());
    if (at(Tok::ident) && (here().text == "exists" || here().text == "forall")) return quantifier();
    return atom();
  }

  QFFormula quantifier() {
    const bool is_exists = here().text == "exists";
    ++pos_;
    Token var = expect(Tok::ident, "a quantified variable");
    if (!at(Tok::le))
      throw parse_error("quantifier must be bounded: expected '<='", here().pos);
    ++pos_;
    TermExpr bound = term();  // parsed before the variable enters scope
    expect(Tok::dot, "'.'");

    auto outer = scope_;
    std::string v = var.text;
    scope_ = [outer, v](const std::string& name) { return name == v || outer(name); };
    QFFormula body = formula();  // body extends maximally to the right
    scope_ = outer;

    return is_exists ? QFFormula::exists(var.text, std::move(bound), std::move(body))
                     : QFFormula::forall(var.text, std::move(bound), std::move(body));
  }

  QFFormula comparison() {
    TermExpr lhs = term();
    QFFormula::CmpOp op;
    if (take(Tok::eq)) op = QFFormula::CmpOp::eq;
    else if (take(Tok::le)) op = QFFormula::CmpOp::le;
    else if (take(Tok::lt)) op = QFFormula::CmpOp::lt;
    else throw parse_error("expected a comparison ('=', '<=' or '<')", here().pos);
    return QFFormula::cmp(op, std::move(lhs), term());
  }

  QFFormula atom() {
    if (at(Tok::lparen)) {
      // Could be a parenthesized term inside a comparison or a parenthesized
      // formula; try the comparison reading first and back off on failure.
      const std::size_t save = pos_;
      try {
        return comparison();
      } catch (const parse_error&) {
        pos_ = save;
      }
      ++pos_;  // '('
      QFFormula f = formula();
      expect(Tok::rparen, "')'");
      return f;
    }
    return comparison();
  }

  // --- terms ---

  TermExpr term() { return sum(); }

  TermExpr sum() {
    TermExpr t = product();
    for (;;) {
      if (take(Tok::plus)) t = TermExpr::add(std::move(t), product());
      else if (take(Tok::minus)) t = TermExpr::monus(std::move(t), product());
      else return t;
    }
  }

  TermExpr product() {
    TermExpr t = primary();
    while (take(Tok::star)) t = TermExpr::mul(std::move(t), primary());
    return t;
  }

  std::vector<TermExpr> call_args() {
    expect(Tok::lparen, "'('");
    std::vector<TermExpr> args;
    do {
      args.push_back(term());
    } while (take(Tok::comma));
    expect(Tok::rparen, "')'");
    return args;
  }

  TermExpr primary() {
    if (at(Tok::nat)) {
      Nat v = here().value;
      ++pos_;
      return TermExpr::constant(v);
    }
    if (take(Tok::lparen)) {
      TermExpr t = term();
      expect(Tok::rparen, "')'");
      return t;
    }
    if (take(Tok::lt)) {
      TermExpr a = term();
      expect(Tok::comma, "','");
      TermExpr b = term();
      expect(Tok::gt, "'>'");
      return TermExpr::pair(std::move(a), std::move(b));
    }
    if (at(Tok::ident)) {
      Token id = toks_[pos_++];
      if (id.text == "p0" || id.text == "p1") {
        std::vector<TermExpr> args = call_args();
        if (args.size() != 1) throw parse_error("projection takes one argument", id.pos);
        return id.text == "p0" ? TermExpr::proj0(std::move(args[0]))
                               : TermExpr::proj1(std::move(args[0]));
      }
      if (id.text.rfind("tup_", 0) == 0) {
        std::uint64_t k = 0;
        auto res = std::from_chars(id.text.data() + 4, id.text.data() + id.text.size(), k);
        if (res.ec != std::errc() || res.ptr != id.text.data() + id.text.size() || k == 0 || k > 16)
          throw parse_error("bad tuple arity in '" + id.text + "'", id.pos);
        std::vector<TermExpr> args = call_args();
        if (args.size() != k)
          throw parse_error("tup_" + std::to_string(k) + " takes " + std::to_string(k) +
                                " arguments",
                            id.pos);
        return TermExpr::tuple(static_cast<std::uint32_t>(k), std::move(args));
      }
      if (id.text.rfind("proj_", 0) == 0) {
        const char* begin = id.text.data() + 5;
        const char* end = id.text.data() + id.text.size();
        std::uint64_t k = 0, i = 0;
        auto r1 = std::from_chars(begin, end, k);
        if (r1.ec != std::errc() || r1.ptr == end || *r1.ptr != '_')
          throw parse_error("bad projection name '" + id.text + "'", id.pos);
        auto r2 = std::from_chars(r1.ptr + 1, end, i);
        if (r2.ec != std::errc() || r2.ptr != end || k == 0 || i == 0 || i > k || k > 16)
          throw parse_error("bad projection name '" + id.text + "'", id.pos);
        std::vector<TermExpr> args = call_args();
        if (args.size() != 1) throw parse_error("projection takes one argument", id.pos);
        return TermExpr::project(static_cast<std::uint32_t>(k), static_cast<std::uint32_t>(i),
                                 std::move(args[0]));
      }
      if (!scope_(id.text))
        throw parse_error("unbound variable '" + id.text + "'", id.pos);
      return TermExpr::variable(id.text);
    }
    throw parse_error("expected a term", here().pos);
  }

  std::vector<Token> toks_;
  std::size_t pos_ = 0;
  std::function<bool(const std::string&)> scope_ = [](const std::string&) { return false; };
};

}  // namespace

const Decl* Document::find(std::string_view name) const {
  for (const Decl& d : decls)
    if (d.name == name) return &d;
  return nullptr;
}

Document parse_document(std::string_view text) { return Parser(text).document(); }

TermExpr parse_term(std::string_view text, const std::vector<std::string>& scope) {
  return Parser(text).term_only(scope);
}

QFFormula parse_formula(std::string_view text, const std::vector<std::string>& scope) {
  return Parser(text).formula_only(scope);
}

// ---------------------------------------------------------------------------
// Specs

Delta2Spec spec_from_document(const Document& doc) {
  const Decl* a = doc.find("A");
  const Decl* b = doc.find("B");
  if (!a) throw parse_error("missing declaration A(x, y, c)", 0);
  if (!b) throw parse_error("missing declaration B(z, u, c)", 0);
  if (a->params != std::vector<std::string>{"x", "y", "c"})
    throw parse_error("A must be declared with parameters (x, y, c)", 0);
  if (b->params != std::vector<std::string>{"z", "u", "c"})
    throw parse_error("B must be declared with parameters (z, u, c)", 0);
  return {a->body, b->body};
}

Delta2Spec parse_spec(std::string_view text) { return spec_from_document(parse_document(text)); }

QFFormula combine_to_p(const Delta2Spec& spec) {
  std::map<std::string, TermExpr> into_a{
      {"x", TermExpr::proj0(TermExpr::variable("x"))},
      {"y", TermExpr::proj0(TermExpr::variable("y"))},
  };
  std::map<std::string, TermExpr> into_b{
      {"z", TermExpr::proj1(TermExpr::variable("x"))},
      {"u", TermExpr::proj1(TermExpr::variable("y"))},
  };
  return QFFormula::impl(substitute(spec.matrix_a, into_a), substitute(spec.matrix_b, into_b));
}

Truth brute_truth(const Delta2Spec& spec, Nat c, Nat window) {
  const Nat check = 2 * window;
  Env env{{"c", c}};

  bool eb = false;
  for (Nat z = 0; z <= window && !eb; ++z) {
    bool all = true;
    Binder bz(env, "z", z);
    for (Nat u = 0; u <= check; ++u) {
      Binder bu(env, "u", u);
      if (!eval_formula(spec.matrix_b, env)) {
        all = false;
        break;
      }
    }
    eb = all;
  }

  bool ea = false;
  for (Nat x = 0; x <= window && !ea; ++x) {
    bool all = true;
    Binder bx(env, "x", x);
    for (Nat y = 0; y <= check; ++y) {
      Binder by(env, "y", y);
      if (eval_formula(spec.matrix_a, env)) {
        all = false;
        break;
      }
    }
    ea = all;
  }

  if (eb && !ea) return Truth::yes;
  if (ea && !eb) return Truth::no;
  return Truth::unknown;
}

const char* truth_name(Truth t) {
  switch (t) {
    case Truth::yes: return "yes";
    case Truth::no: return "no";
    case Truth::unknown: return "unknown";
  }
  return "?";
}

}  // namespace ordlim::dsl
