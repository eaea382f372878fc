#pragma once

#include <cstddef>
#include <map>
#include <memory>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include "dpl/expr.hpp"

namespace dpl {

struct Node;
using Formula = std::shared_ptr<const Node>;

enum class Kind { Atom, Neg, And, BigAnd, BigOr, L, Next, InitL, NStepL, LimL, LimM, Iter };
enum class FamilyKind { Finite, Nat, Threshold };

struct Family {
  FamilyKind kind = FamilyKind::Finite;
  std::vector<Formula> members;  // Finite members, or the Nat prefix
  Formula tail;                  // Nat: value of every index >= members.size()
  // Threshold: {templ[hole := s] : s < bound} (s <= bound unless strict)
  Formula templ;
  std::string hole;
  Expr bound;
  bool strict = true;
};

struct Node {
  Kind kind;
  std::string name;           // Atom
  std::vector<Formula> kids;  // Neg/L/Next/InitL/NStepL/Iter: 1; And: n; LimL/LimM: the template
  Expr thr;                   // L, InitL, NStepL, LimL, LimM
  unsigned steps = 0;         // NStepL
  std::shared_ptr<const Family> fam;  // BigAnd, BigOr
  std::size_t hash = 0;

  const Formula& body() const { return kids.front(); }
  bool has_threshold() const {
    return kind == Kind::L || kind == Kind::InitL || kind == Kind::NStepL || kind == Kind::LimL ||
           kind == Kind::LimM;
  }
};

class FormulaError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Core constructors.
Formula atom(const std::string& name);
Formula neg(Formula a);
Formula conj(std::vector<Formula> kids);
Formula conj(Formula a, Formula b);
Formula L(Expr r, Formula a);
Formula next(Formula a, unsigned times = 1);
Formula init_l(Expr r, Formula a);
Formula nstep_l(unsigned n, Expr r, Formula a);
Formula lim_l(Expr t, Formula tmpl);
Formula lim_m(Expr t, Formula tmpl);
Formula iter(Formula a);
Formula big_and(Family f);
Formula big_or(Family f);

Family finite_family(std::vector<Formula> members);
Family nat_family(std::vector<Formula> prefix, Formula tail);
Family threshold_family(Formula templ, std::string hole, Expr bound, bool strict);

// Derived connectives; they desugar to the core.
Formula top();   // empty finite conjunction
Formula bot();   // !top
Formula disj(Formula a, Formula b);
Formula disj(std::vector<Formula> kids);
Formula imp(Formula a, Formula b);
Formula iff(Formula a, Formula b);
Formula M(Expr r, Formula a);  // L[1-r] !a
Formula L_chain(const std::vector<Expr>& rs, Formula a);  // L[r1] ... L[rk] a

// Pattern views of the desugared forms.
bool as_imp(const Formula& f, Formula& a, Formula& b);
bool as_iff(const Formula& f, Formula& a, Formula& b);
bool as_disj(const Formula& f, std::vector<Formula>& kids);
bool is_top(const Formula& f);
bool is_bot(const Formula& f);

int compare(const Formula& a, const Formula& b);
bool equal(const Formula& a, const Formula& b);
struct FormulaLess {
  bool operator()(const Formula& a, const Formula& b) const { return compare(a, b) < 0; }
};
using FormulaSet = std::set<Formula, FormulaLess>;

std::string print(const Formula& f);
Formula parse(const std::string& text);
// Threshold expression without range check, e.g. "1 - r" or "r + s/2".
Expr parse_expr(const std::string& text);

class ParseError : public FormulaError {
 public:
  ParseError(int line, int col, const std::string& msg);
  int line, col;
};

Formula formal_negation(const Formula& f);
Formula instantiate(const Formula& tmpl, unsigned k);
FormulaSet subformulas(const Formula& f);

std::set<std::string> atoms(const Formula& f);
std::set<std::string> threshold_vars(const Formula& f);
bool is_ground(const Formula& f);
Formula substitute_thresholds(const Formula& f, const std::map<std::string, Expr>& s);
Formula substitute_atoms(const Formula& f, const std::map<std::string, Formula>& s);
std::size_t size(const Formula& f);
std::size_t modal_depth(const Formula& f);
// NStepL step counts occurring in f.
std::set<unsigned> nstep_depths(const Formula& f);
bool contains_kind(const Formula& f, Kind k);

}  // namespace dpl
