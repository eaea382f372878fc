#pragma once

#include <map>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include "dpl/expr.hpp"

namespace dpl {

enum class Rel { Lt, Le, Eq, Ge, Gt };

// lhs rel rhs with affine sides.
struct Constraint {
  Expr lhs;
  Rel rel = Rel::Le;
  Expr rhs;

  bool holds(const std::map<std::string, Rational>& env) const;
  std::string str() const;
};

class ConstraintError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// "s < r", "r + s <= 1", "s >= 1/2", "r = 1 - s", "r > s", "r != s" is rejected.
Constraint parse_constraint(const std::string& text);

// A conjunction of constraints over metavariables. Every variable listed in
// `bounded` implicitly satisfies 0 <= v <= 1.
struct ConstraintSet {
  std::set<std::string> bounded;
  std::vector<Constraint> items;

  std::set<std::string> vars() const;
};

// Exact Fourier-Motzkin elimination over the rationals, strictness tracked.
bool satisfiable(const ConstraintSet& c);
bool entails(const ConstraintSet& c, const Constraint& goal);

}  // namespace dpl
