#include "ordlim/ordinal.hpp"

#include <cctype>
#include <utility>

namespace ordlim {

namespace {

// Depth of a single term: an exponent-zero term adds nothing, otherwise one
// level plus whatever the exponent itself nests.
std::uint32_t term_depth(const Ordinal::Term& t) {
  if (t.exponent.is_zero()) return 0;
  return 1 + t.exponent.nesting_depth();
}

}  // namespace

Ordinal Ordinal::finite(const Coeff& n) {
  Ordinal o;
  if (n > 0) o.terms_.push_back({Ordinal(), n});
  return o;
}

Ordinal Ordinal::omega() {
  Ordinal o;
  o.terms_.push_back({finite(Coeff(1)), Coeff(1)});
  return o;
}

Ordinal Ordinal::from_terms(std::vector<Term> terms, const OrdinalLimits& limits) {
  for (std::size_t i = 0; i < terms.size(); ++i) {
    if (terms[i].coefficient < 1)
      throw std::invalid_argument("term " + std::to_string(i) +
                                  ": coefficient must be a positive natural");
    if (i > 0 && compare(terms[i - 1].exponent, terms[i].exponent) != Cmp::GT)
      throw std::invalid_argument("term " + std::to_string(i) +
                                  ": exponents must strictly decrease");
  }
  Ordinal o;
  o.terms_ = std::move(terms);
  if (o.nesting_depth() > limits.max_exponent_depth)
    throw resource_error("notation exceeds nesting depth limit " +
                         std::to_string(limits.max_exponent_depth));
  return o;
}

bool Ordinal::is_finite() const {
  return terms_.empty() || (terms_.size() == 1 && terms_[0].exponent.is_zero());
}

Coeff Ordinal::finite_part() const {
  if (!terms_.empty() && terms_.back().exponent.is_zero()) return terms_.back().coefficient;
  return Coeff(0);
}

std::uint32_t Ordinal::nesting_depth() const {
  std::uint32_t d = 0;
  for (const Term& t : terms_) d = std::max(d, term_depth(t));
  return d;
}

Cmp compare(const Ordinal& a, const Ordinal& b) {
  const auto& ta = a.terms();
  const auto& tb = b.terms();
  const std::size_t n = std::min(ta.size(), tb.size());
  for (std::size_t i = 0; i < n; ++i) {
    Cmp e = compare(ta[i].exponent, tb[i].exponent);
    if (e != Cmp::EQ) return e;
    if (ta[i].coefficient < tb[i].coefficient) return Cmp::LT;
    if (ta[i].coefficient > tb[i].coefficient) return Cmp::GT;
  }
  // Equal prefix: the longer sum is the larger ordinal.
  if (ta.size() < tb.size()) return Cmp::LT;
  if (ta.size() > tb.size()) return Cmp::GT;
  return Cmp::EQ;
}

bool operator==(const Ordinal& a, const Ordinal& b) { return compare(a, b) == Cmp::EQ; }
bool operator!=(const Ordinal& a, const Ordinal& b) { return compare(a, b) != Cmp::EQ; }
bool operator<(const Ordinal& a, const Ordinal& b) { return compare(a, b) == Cmp::LT; }
bool operator<=(const Ordinal& a, const Ordinal& b) { return compare(a, b) != Cmp::GT; }
bool operator>(const Ordinal& a, const Ordinal& b) { return compare(a, b) == Cmp::GT; }
bool operator>=(const Ordinal& a, const Ordinal& b) { return compare(a, b) != Cmp::LT; }

Ordinal add(const Ordinal& a, const Ordinal& b) {
  if (b.is_zero()) return a;
  if (a.is_zero()) return b;
  const Ordinal& lead = b.terms().front().exponent;
  std::vector<Ordinal::Term> out;
  out.reserve(a.terms().size() + b.terms().size());
  std::size_t i = 0;
  while (i < a.terms().size() && compare(a.terms()[i].exponent, lead) == Cmp::GT)
    out.push_back(a.terms()[i++]);
  if (i < a.terms().size() && compare(a.terms()[i].exponent, lead) == Cmp::EQ) {
    out.push_back({lead, a.terms()[i].coefficient + b.terms().front().coefficient});
    out.insert(out.end(), b.terms().begin() + 1, b.terms().end());
  } else {
    // Everything left in a sits strictly below b's leading term and vanishes.
    out.insert(out.end(), b.terms().begin(), b.terms().end());
  }
  return Ordinal::from_terms(std::move(out));
}

Ordinal scale_finite(const Coeff& n, const Ordinal& a) {
  if (n < 1) throw std::invalid_argument("scale_finite: factor must be a positive natural");
  if (a.is_zero()) return a;
  std::vector<Ordinal::Term> ts = a.terms();
  if (ts.back().exponent.is_zero()) ts.back().coefficient *= n;
  return Ordinal::from_terms(std::move(ts));
}

Ordinal omega_tower(std::uint32_t index, const OrdinalLimits& limits) {
  if (index > limits.max_tower_index)
    throw resource_error("tower index " + std::to_string(index) + " exceeds limit " +
                         std::to_string(limits.max_tower_index));
  Ordinal t = Ordinal::finite(Coeff(1));
  for (std::uint32_t i = 0; i < index; ++i) {
    std::vector<Ordinal::Term> one;
    one.push_back({std::move(t), Coeff(1)});
    t = Ordinal::from_terms(std::move(one), limits);
  }
  return t;
}

namespace {

// Recursive-descent parser over the additive notation language. Violations of
// canonical form are reported at the byte where the offending summand starts.
class OrdinalParser {
 public:
  OrdinalParser(std::string_view text, const OrdinalLimits& limits)
      : text_(text), limits_(limits) {}

  Ordinal parse() {
    Ordinal o = parse_sum();
    skip_ws();
    if (pos_ != text_.size()) throw parse_error("unexpected trailing input", pos_);
    return o;
  }

 private:
  struct RawTerm {
    Ordinal exponent;
    Coeff coefficient;
    std::size_t at;
  };

  void skip_ws() {
    while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_]))) ++pos_;
  }

  char peek() {
    skip_ws();
    return pos_ < text_.size() ? text_[pos_] : '\0';
  }

  bool take(char c) {
    if (peek() == c) {
      ++pos_;
      return true;
    }
    return false;
  }

  Coeff parse_nat() {
    skip_ws();
    const std::size_t start = pos_;
    while (pos_ < text_.size() && std::isdigit(static_cast<unsigned char>(text_[pos_]))) ++pos_;
    if (pos_ == start) throw parse_error("expected a natural number", start);
    if (text_[start] == '0' && pos_ - start > 1)
      throw parse_error("leading zero in natural number", start);
    return Coeff(std::string(text_.substr(start, pos_ - start)));
  }

  RawTerm parse_term() {
    const char c = peek();
    const std::size_t at = pos_;
    if (std::isdigit(static_cast<unsigned char>(c)))
      return {Ordinal(), parse_nat(), at};
    if (c == 'w') {
      ++pos_;
      Ordinal expo = Ordinal::finite(Coeff(1));
      if (take('^')) expo = parse_exponent();
      Coeff coeff(1);
      if (take('*')) coeff = parse_nat();
      return {std::move(expo), std::move(coeff), at};
    }
    throw parse_error("expected a summand ('w' or a natural)", at);
  }

  // Exponent position: a natural, a bare power of w, or a parenthesized sum.
  // Anything additive or with a coefficient needs the parens.
  Ordinal parse_exponent() {
    const char c = peek();
    if (std::isdigit(static_cast<unsigned char>(c))) return Ordinal::finite(parse_nat());
    if (c == 'w') {
      const std::size_t at = pos_;
      ++pos_;
      Ordinal inner = Ordinal::finite(Coeff(1));
      if (take('^')) inner = parse_exponent();
      std::vector<RawTerm> one;
      one.push_back({std::move(inner), Coeff(1), at});
      return build(std::move(one), at);
    }
    if (c == '(') {
      ++pos_;
      Ordinal o = parse_sum();
      if (!take(')')) throw parse_error("expected ')'", pos_);
      return o;
    }
    throw parse_error("expected an exponent", pos_);
  }

  Ordinal parse_sum() {
    std::vector<RawTerm> terms;
    terms.push_back(parse_term());
    while (take('+')) terms.push_back(parse_term());
    const std::size_t at = terms.front().at;
    // A lone "0" is the zero notation; everywhere else a zero coefficient is
    // a structural violation, not a spelling variant.
    if (terms.size() == 1 && terms[0].coefficient == 0 && terms[0].exponent.is_zero())
      return Ordinal();
    return build(std::move(terms), at);
  }

  Ordinal build(std::vector<RawTerm> raw, std::size_t sum_at) {
    for (std::size_t i = 0; i < raw.size(); ++i) {
      if (raw[i].coefficient == 0)
        throw parse_error("zero coefficient is not a summand", raw[i].at);
      if (i > 0 && compare(raw[i - 1].exponent, raw[i].exponent) != Cmp::GT)
        throw parse_error("summand exponents must strictly decrease", raw[i].at);
    }
    std::vector<Ordinal::Term> terms;
    terms.reserve(raw.size());
    for (RawTerm& r : raw)
      terms.push_back({std::move(r.exponent), std::move(r.coefficient)});
    try {
      return Ordinal::from_terms(std::move(terms), limits_);
    } catch (const std::invalid_argument& e) {
      throw parse_error(e.what(), sum_at);  // defensive; checks above mirror from_terms
    }
  }

  std::string_view text_;
  const OrdinalLimits& limits_;
  std::size_t pos_ = 0;
};

}  // namespace

Ordinal parse_ordinal(std::string_view text, const OrdinalLimits& limits) {
  return OrdinalParser(text, limits).parse();
}

std::string render_ordinal(const Ordinal& a) {
  if (a.is_zero()) return "0";
  std::string out;
  bool first = true;
  for (const Ordinal::Term& t : a.terms()) {
    if (!first) out += '+';
    first = false;
    if (t.exponent.is_zero()) {
      out += t.coefficient.str();
      continue;
    }
    if (t.exponent.is_finite() && t.exponent.finite_part() == 1) {
      out += 'w';
    } else {
      const std::string e = render_ordinal(t.exponent);
      const bool needs_parens =
          e.find('+') != std::string::npos || e.find('*') != std::string::npos;
      out += needs_parens ? "w^(" + e + ")" : "w^" + e;
    }
    if (t.coefficient != 1) {
      out += '*';
      out += t.coefficient.str();
    }
  }
  return out;
}

const char* cmp_name(Cmp c) {
  switch (c) {
    case Cmp::LT: return "lt";
    case Cmp::EQ: return "eq";
    case Cmp::GT: return "gt";
  }
  return "?";
}

}  // namespace ordlim
