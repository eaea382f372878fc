#include "dpl/constraints.hpp"

#include "dpl/formula.hpp"

namespace dpl {

namespace {

// sum_v coeff[v] * v + c  (>0 if strict, >=0 otherwise)
struct Ineq {
  std::map<std::string, Rational> coeff;
  Rational c;
  bool strict = false;
};

Ineq from_expr(const Expr& e, bool strict) {
  if (e.degree() > 1) throw ConstraintError("constraint is not affine: " + e.str());
  Ineq q;
  q.strict = strict;
  for (auto& [mono, k] : e.terms()) {
    if (mono.empty())
      q.c = k;
    else
      q.coeff[mono.front()] = k;
  }
  return q;
}

// Appends the inequalities for lhs rel rhs.
void lower(const Constraint& k, std::vector<Ineq>& out) {
  Expr d = k.lhs - k.rhs;  // rel applied to d against 0
  switch (k.rel) {
    case Rel::Lt:
      out.push_back(from_expr(-d, true));
      break;
    case Rel::Le:
      out.push_back(from_expr(-d, false));
      break;
    case Rel::Gt:
      out.push_back(from_expr(d, true));
      break;
    case Rel::Ge:
      out.push_back(from_expr(d, false));
      break;
    case Rel::Eq:
      out.push_back(from_expr(d, false));
      out.push_back(from_expr(-d, false));
      break;
  }
}

bool feasible(std::vector<Ineq> sys) {
  for (;;) {
    std::string var;
    for (auto& q : sys) {
      for (auto it = q.coeff.begin(); it != q.coeff.end();)
        it = it->second == 0 ? q.coeff.erase(it) : std::next(it);
      if (var.empty() && !q.coeff.empty()) var = q.coeff.begin()->first;
    }
    if (var.empty()) break;
    std::vector<Ineq> pos, negs, rest;
    for (auto& q : sys) {
      auto it = q.coeff.find(var);
      if (it == q.coeff.end())
        rest.push_back(q);
      else if (it->second > 0)
        pos.push_back(q);
      else
        negs.push_back(q);
    }
    for (auto& a : pos)
      for (auto& b : negs) {
        Rational ka = a.coeff.at(var), kb = -b.coeff.at(var);
        Ineq m;
        m.strict = a.strict || b.strict;
        m.c = a.c * kb + b.c * ka;
        for (auto& [v, x] : a.coeff)
          if (v != var) m.coeff[v] += x * kb;
        for (auto& [v, x] : b.coeff)
          if (v != var) m.coeff[v] += x * ka;
        rest.push_back(std::move(m));
      }
    sys = std::move(rest);
  }
  for (auto& q : sys)
    if (q.strict ? !(q.c > 0) : !(q.c >= 0)) return false;
  return true;
}

std::vector<Ineq> lower_set(const ConstraintSet& c) {
  std::vector<Ineq> out;
  for (auto& v : c.bounded) {
    lower({Expr::var(v), Rel::Ge, Expr(0)}, out);
    lower({Expr::var(v), Rel::Le, Expr(1)}, out);
  }
  for (auto& k : c.items) lower(k, out);
  return out;
}

const char* rel_text(Rel r) {
  switch (r) {
    case Rel::Lt:
      return "<";
    case Rel::Le:
      return "<=";
    case Rel::Eq:
      return "=";
    case Rel::Ge:
      return ">=";
    case Rel::Gt:
      return ">";
  }
  return "?";
}

}  // namespace

bool Constraint::holds(const std::map<std::string, Rational>& env) const {
  auto a = lhs.eval(env), b = rhs.eval(env);
  if (!a || !b) throw ConstraintError("unbound variable in " + str());
  switch (rel) {
    case Rel::Lt:
      return *a < *b;
    case Rel::Le:
      return *a <= *b;
    case Rel::Eq:
      return *a == *b;
    case Rel::Ge:
      return *a >= *b;
    case Rel::Gt:
      return *a > *b;
  }
  return false;
}

std::string Constraint::str() const { return lhs.str() + " " + rel_text(rel) + " " + rhs.str(); }

Constraint parse_constraint(const std::string& text) {
  static const std::vector<std::pair<std::string, Rel>> ops = {
      {"<=", Rel::Le}, {">=", Rel::Ge}, {"<", Rel::Lt}, {">", Rel::Gt}, {"=", Rel::Eq}};
  if (text.find("!=") != std::string::npos) throw ConstraintError("disequations are not supported: " + text);
  for (auto& [sym, rel] : ops) {
    auto at = text.find(sym);
    if (at == std::string::npos) continue;
    std::string left = text.substr(0, at), right = text.substr(at + sym.size());
    for (auto& [s2, r2] : ops)
      if (right.find(s2) != std::string::npos) throw ConstraintError("more than one relation in '" + text + "'");
    try {
      Constraint c{parse_expr(left), rel, parse_expr(right)};
      if ((c.lhs - c.rhs).degree() > 1) throw ConstraintError("constraint is not affine: " + text);
      return c;
    } catch (const FormulaError& e) {
      throw ConstraintError("malformed constraint '" + text + "': " + e.what());
    }
  }
  throw ConstraintError("no relation in constraint '" + text + "'");
}

std::set<std::string> ConstraintSet::vars() const {
  std::set<std::string> out = bounded;
  for (auto& k : items) {
    auto a = k.lhs.vars(), b = k.rhs.vars();
    out.insert(a.begin(), a.end());
    out.insert(b.begin(), b.end());
  }
  return out;
}

bool satisfiable(const ConstraintSet& c) { return feasible(lower_set(c)); }

bool entails(const ConstraintSet& c, const Constraint& goal) {
  auto base = lower_set(c);
  // c |= goal iff c & !goal is infeasible; an equation fails on either side
  std::vector<Constraint> negations;
  switch (goal.rel) {
    case Rel::Lt:
      negations.push_back({goal.lhs, Rel::Ge, goal.rhs});
      break;
    case Rel::Le:
      negations.push_back({goal.lhs, Rel::Gt, goal.rhs});
      break;
    case Rel::Gt:
      negations.push_back({goal.lhs, Rel::Le, goal.rhs});
      break;
    case Rel::Ge:
      negations.push_back({goal.lhs, Rel::Lt, goal.rhs});
      break;
    case Rel::Eq:
      negations.push_back({goal.lhs, Rel::Lt, goal.rhs});
      negations.push_back({goal.lhs, Rel::Gt, goal.rhs});
      break;
  }
  for (auto& n : negations) {
    auto sys = base;
    lower(n, sys);
    if (feasible(sys)) return false;
  }
  return true;
}

}  // namespace dpl
