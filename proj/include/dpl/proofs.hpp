#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "dpl/constraints.hpp"
#include "dpl/formula.hpp"
#include "dpl/process.hpp"

namespace dpl {

enum class System { DPL, M, Pure, ADS };

std::string system_name(System s);  // "H_DPL", "H_M", "H_Pure", "H_ADS"
std::optional<System> system_from_name(const std::string& name);
// Theorems of `inner` are theorems of `outer`.
bool system_includes(System outer, System inner);
std::vector<std::string> axiom_names(System s);

// Decides propositional validity of the boolean skeleton: maximal
// non-boolean subformulas are atoms, identified structurally.
bool tautology(const Formula& f);

struct Substitution {
  std::map<std::string, Formula> formulas;  // phi, psi
  std::map<std::string, Expr> thresholds;   // r, s
};

struct MatchResult {
  bool ok = false;
  std::string reason;
  Substitution subst;
};

MatchResult match_axiom(System sys, const std::string& name, const Formula& candidate, const ConstraintSet& c);

enum class RuleKind { Axiom, Assumption, Theorem, MP, NecL1, NecNext, GArch };
std::string rule_name(RuleKind r);
std::optional<RuleKind> rule_from_name(const std::string& name);

struct Step;

struct GArchPayload {
  std::string param;        // fresh metavariable
  unsigned exponent = 0;    // n in O^n
  std::vector<Expr> chain;  // r_1 .. r_k
  Expr target;              // r
  std::vector<Step> steps;  // sub-derivation, checked under s >= 0, s < r
};

struct Step {
  int id = 0;
  Formula formula;
  RuleKind rule = RuleKind::Axiom;
  std::string axiom;        // Axiom
  int index = 0;            // Assumption, 0-based
  std::string lemma;        // Theorem
  std::vector<int> premises;
  std::shared_ptr<GArchPayload> garch;
};

struct Derivation {
  std::string name;
  System system = System::DPL;
  std::vector<std::string> metavars;
  std::vector<Constraint> constraints;
  std::vector<Formula> assumptions;
  std::vector<Step> steps;

  const Formula& conclusion() const { return steps.back().formula; }
};

struct CheckResult {
  bool ok = true;
  int step = 0;          // failing step id (innermost for GArch)
  std::string rule;
  std::string reason;

  std::string message() const;
};

using Library = std::map<std::string, Derivation>;

CheckResult check_derivation(const Derivation& d, const Library& lib);

// Checks lemmas in order; accepted ones join the library.
struct LibraryReport {
  Library accepted;
  std::vector<std::pair<std::string, CheckResult>> results;
  bool all_ok() const;
};
LibraryReport check_all(const std::vector<Derivation>& lemmas, const Library& base = {});

// Ground values of the metavariables from `grid` satisfying the constraints.
std::vector<std::map<std::string, Rational>> ground_assignments(const Derivation& d, const std::vector<Rational>& grid);

// Random process from the class a system is sound for.
Process random_class_process(System s, std::uint64_t seed, int n, int denom_bound);

struct SoundnessReport {
  int instances = 0;
  int violations = 0;
  std::string first_violation;
};

// Frame validity of every ground instance of the conclusion on random
// processes of the system's class.
SoundnessReport soundness_cross_check(const Derivation& d, int processes, std::uint64_t seed, int max_states,
                                      const std::vector<Rational>& grid);

}  // namespace dpl
