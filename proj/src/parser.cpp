#include <cctype>
#include <set>

#include "dpl/formula.hpp"

namespace dpl {

ParseError::ParseError(int line_, int col_, const std::string& msg)
    : FormulaError("line " + std::to_string(line_) + ", column " + std::to_string(col_) + ": " + msg),
      line(line_),
      col(col_) {}

namespace {

enum class Tok { Ident, Int, Sym, End };

struct Token {
  Tok kind;
  std::string text;
  int line, col;
};

const std::set<std::string> kReserved = {"O",      "L",        "M",        "I",       "LN",   "And",
                                         "Or",     "AndTail",  "OrTail",   "AndBelow", "OrBelow", "LimL",
                                         "LimM",   "Iter",     "true",     "false"};

std::vector<Token> lex(const std::string& s) {
  std::vector<Token> out;
  int line = 1, col = 1;
  std::size_t i = 0;
  auto advance = [&](std::size_t n) {
    for (std::size_t k = 0; k < n; ++k, ++i) {
      if (s[i] == '\n') {
        ++line;
        col = 1;
      } else {
        ++col;
      }
    }
  };
  static const char* syms[] = {"<->", "->", "<=", "(", ")", "[", "]", "{", "}", ",", ";",
                               "!",   "&",  "|",  "<", "+", "-", "*", "/", "^"};
  while (i < s.size()) {
    char c = s[i];
    if (std::isspace(static_cast<unsigned char>(c))) {
      advance(1);
      continue;
    }
    Token t{Tok::End, "", line, col};
    if (std::isalpha(static_cast<unsigned char>(c))) {
      std::size_t j = i;
      while (j < s.size() && (std::isalnum(static_cast<unsigned char>(s[j])) || s[j] == '_')) ++j;
      t.kind = Tok::Ident;
      t.text = s.substr(i, j - i);
    } else if (std::isdigit(static_cast<unsigned char>(c))) {
      std::size_t j = i;
      while (j < s.size() && std::isdigit(static_cast<unsigned char>(s[j]))) ++j;
      t.kind = Tok::Int;
      t.text = s.substr(i, j - i);
    } else {
      for (const char* sym : syms) {
        std::string_view sv(sym);
        if (s.compare(i, sv.size(), sv) == 0) {
          t.kind = Tok::Sym;
          t.text = sym;
          break;
        }
      }
      if (t.kind == Tok::End) throw ParseError(line, col, std::string("unexpected character '") + c + "'");
    }
    advance(t.text.size());
    out.push_back(t);
  }
  out.push_back({Tok::End, "", line, col});
  return out;
}

class Parser {
 public:
  explicit Parser(const std::string& text) : toks_(lex(text)) {}

  Formula formula() {
    Formula f = iff_level();
    if (peek().kind != Tok::End) fail("unexpected '" + peek().text + "'");
    return f;
  }

  Expr expression() {
    Expr e = sum();
    if (peek().kind != Tok::End) fail("unexpected '" + peek().text + "'");
    return e;
  }

 private:
  std::vector<Token> toks_;
  std::size_t pos_ = 0;

  const Token& peek(std::size_t k = 0) const { return toks_[std::min(pos_ + k, toks_.size() - 1)]; }
  [[noreturn]] void fail(const std::string& msg) const { throw ParseError(peek().line, peek().col, msg); }
  [[noreturn]] void fail_at(const Token& t, const std::string& msg) const { throw ParseError(t.line, t.col, msg); }

  bool is_sym(const char* s, std::size_t k = 0) const { return peek(k).kind == Tok::Sym && peek(k).text == s; }
  bool is_word(const char* s, std::size_t k = 0) const { return peek(k).kind == Tok::Ident && peek(k).text == s; }

  bool accept(const char* s) {
    if (!is_sym(s)) return false;
    ++pos_;
    return true;
  }

  void expect(const char* s) {
    if (!accept(s)) fail(std::string("expected '") + s + "'" + (peek().kind == Tok::End ? " before end of input" : ", found '" + peek().text + "'"));
  }

  unsigned natural() {
    if (peek().kind != Tok::Int) fail("expected a natural number");
    const Token& t = toks_[pos_++];
    if (t.text.size() > 6) fail_at(t, "number too large");
    return static_cast<unsigned>(std::stoul(t.text));
  }

  // threshold expressions
  Expr sum() {
    Expr e = term();
    for (;;) {
      if (accept("+"))
        e = e + term();
      else if (accept("-"))
        e = e - term();
      else
        return e;
    }
  }

  Expr term() {
    Expr e = factor();
    for (;;) {
      if (accept("*")) {
        e = e * factor();
      } else if (is_sym("/")) {
        const Token& at = peek(1);
        ++pos_;
        Expr d = factor();
        if (!d.is_constant()) fail_at(at, "malformed rational: division by a non-constant");
        if (d.constant() == 0) fail_at(at, "malformed rational (zero denominator)");
        e = e * Expr(Rational(1) / d.constant());
      } else {
        return e;
      }
    }
  }

  Expr factor() {
    if (accept("-")) return -factor();
    if (accept("(")) {
      Expr e = sum();
      expect(")");
      return e;
    }
    if (peek().kind == Tok::Int) return Expr(Rational(mpz_class(toks_[pos_++].text)));
    if (peek().kind == Tok::Ident) {
      const Token& t = toks_[pos_++];
      if (kReserved.count(t.text)) fail_at(t, "reserved word '" + t.text + "' in threshold");
      return Expr::var(t.text);
    }
    fail("malformed rational");
  }

  Expr threshold() {
    const Token& at = peek();
    Expr e = sum();
    if (e.is_constant() && !in_unit_interval(e.constant()))
      fail_at(at, "threshold out of range: " + e.str());
    return e;
  }

  Expr bracket_threshold() {
    expect("[");
    Expr e = threshold();
    expect("]");
    return e;
  }

  template <class F>
  Formula guarded(const Token& at, F&& build) {
    try {
      return build();
    } catch (const ParseError&) {
      throw;
    } catch (const FormulaError& e) {
      fail_at(at, e.what());
    }
  }

  Formula iff_level() {
    Formula a = imp_level();
    while (accept("<->")) a = iff(a, imp_level());
    return a;
  }

  Formula imp_level() {
    Formula a = or_level();
    if (accept("->")) return imp(a, imp_level());
    return a;
  }

  Formula or_level() {
    std::vector<Formula> ks{and_level()};
    while (accept("|")) ks.push_back(and_level());
    return ks.size() == 1 ? ks[0] : disj(std::move(ks));
  }

  Formula and_level() {
    std::vector<Formula> ks{unary()};
    while (accept("&")) ks.push_back(unary());
    return ks.size() == 1 ? ks[0] : conj(std::move(ks));
  }

  Formula unary() {
    const Token& at = peek();
    if (accept("!")) return neg(unary());
    if (is_word("O")) {
      ++pos_;
      unsigned times = 1;
      if (accept("^")) times = natural();
      return next(unary(), times);
    }
    if ((is_word("L") || is_word("M") || is_word("I")) && is_sym("[", 1)) {
      std::string op = toks_[pos_++].text;
      Expr r = bracket_threshold();
      Formula body = unary();
      return guarded(at, [&] {
        if (op == "L") return L(r, body);
        if (op == "M") return M(r, body);
        return init_l(r, body);
      });
    }
    if (is_word("LN") && is_sym("[", 1)) {
      pos_ += 2;
      unsigned n = natural();
      expect(",");
      Expr r = threshold();
      expect("]");
      Formula body = unary();
      return guarded(at, [&] { return nstep_l(n, r, body); });
    }
    return primary();
  }

  std::vector<Formula> list_until(const char* stop) {
    std::vector<Formula> out;
    if (is_sym(stop)) return out;
    out.push_back(iff_level());
    while (accept(",")) out.push_back(iff_level());
    return out;
  }

  Formula primary() {
    const Token& at = peek();
    if (accept("(")) {
      Formula f = iff_level();
      expect(")");
      return f;
    }
    if (at.kind != Tok::Ident) fail(at.kind == Tok::End ? "unexpected end of input" : "unexpected '" + at.text + "'");
    const std::string w = at.text;
    ++pos_;
    if (w == "true") return top();
    if (w == "false") return bot();
    if (w == "And" || w == "Or") {
      expect("(");
      auto ms = list_until(")");
      expect(")");
      Family fam = finite_family(std::move(ms));
      return w == "And" ? big_and(std::move(fam)) : big_or(std::move(fam));
    }
    if (w == "AndTail" || w == "OrTail") {
      expect("(");
      auto ms = list_until(";");
      expect(";");
      Formula tail = iff_level();
      expect(")");
      Family fam = nat_family(std::move(ms), tail);
      return w == "AndTail" ? big_and(std::move(fam)) : big_or(std::move(fam));
    }
    if (w == "AndBelow" || w == "OrBelow") {
      expect("[");
      if (peek().kind != Tok::Ident || kReserved.count(peek().text)) fail("expected a threshold variable");
      std::string hole = toks_[pos_++].text;
      bool strict;
      if (accept("<"))
        strict = true;
      else if (accept("<="))
        strict = false;
      else
        fail("expected '<' or '<='");
      Expr bound = threshold();
      expect("]");
      expect("{");
      Formula templ = iff_level();
      expect("}");
      return guarded(at, [&] {
        Family fam = threshold_family(templ, hole, bound, strict);
        return w == "AndBelow" ? big_and(std::move(fam)) : big_or(std::move(fam));
      });
    }
    if (w == "LimL" || w == "LimM") {
      Expr t = bracket_threshold();
      expect("{");
      Formula templ = iff_level();
      expect("}");
      return guarded(at, [&] { return w == "LimL" ? lim_l(t, templ) : lim_m(t, templ); });
    }
    if (w == "Iter") {
      expect("(");
      Formula body = iff_level();
      expect(")");
      return guarded(at, [&] { return iter(body); });
    }
    if (kReserved.count(w)) fail_at(at, "reserved word '" + w + "' used as an atom");
    return atom(w);
  }
};

}  // namespace

Formula parse(const std::string& text) { return Parser(text).formula(); }

Expr parse_expr(const std::string& text) { return Parser(text).expression(); }

}  // namespace dpl
