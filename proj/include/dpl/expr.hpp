#pragma once

#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "dpl/rational.hpp"

namespace dpl {

// Polynomial with rational coefficients over named variables. Used for
// threshold slots: ground thresholds are constants, proof metavariables
// give affine expressions, and the mixing families need the product r*s.
// Kept in canonical form (no zero coefficients, monomials sorted) so that
// structural equality is polynomial identity.
class Expr {
 public:
  using Monomial = std::vector<std::string>;  // sorted, repeats = powers

  Expr() = default;
  Expr(const Rational& c);  // NOLINT(google-explicit-constructor)
  Expr(int c) : Expr(Rational(c)) {}  // NOLINT(google-explicit-constructor)
  static Expr var(const std::string& name);

  bool is_constant() const;
  // Value of a constant expression; throws std::logic_error otherwise.
  const Rational& constant() const;
  Rational constant_term() const;
  int degree() const;
  std::set<std::string> vars() const;
  bool mentions(const std::string& v) const;

  // Coefficient of the degree-one monomial {v}.
  Rational coeff(const std::string& v) const;

  Expr substitute(const std::map<std::string, Expr>& s) const;
  std::optional<Rational> eval(const std::map<std::string, Rational>& env) const;

  std::string str() const;

  const std::map<Monomial, Rational>& terms() const { return terms_; }

  friend Expr operator+(const Expr& a, const Expr& b);
  friend Expr operator-(const Expr& a, const Expr& b);
  friend Expr operator*(const Expr& a, const Expr& b);
  friend Expr operator-(const Expr& a);
  friend bool operator==(const Expr& a, const Expr& b) { return a.terms_ == b.terms_; }
  friend bool operator!=(const Expr& a, const Expr& b) { return !(a == b); }
  friend bool operator<(const Expr& a, const Expr& b) { return a.terms_ < b.terms_; }

 private:
  void normalize();
  std::map<Monomial, Rational> terms_;
  // cached for the common ground case
  Rational const_;
  bool ground_ = true;
};

}  // namespace dpl
