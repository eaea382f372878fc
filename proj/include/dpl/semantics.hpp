#pragma once

#include <functional>
#include <map>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <vector>

#include "dpl/formula.hpp"
#include "dpl/process.hpp"
#include "dpl/stochastic.hpp"

namespace dpl {

using Valuation = std::map<std::string, StateSet>;

struct Model {
  Process process;
  Valuation valuation;
};

class SemanticsError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ResourceError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct TruncationBounds {
  unsigned nat_cap = 8;             // naturals 0..N, and l in 1..N for lim/n-step slack 1/l
  std::vector<Rational> grid;       // thresholds for ThresholdFamily
  unsigned k_cap = 16;              // k in 0..K
};

// How the literal n-step expansion is read.
//  Literal: the nested expansion exactly as written, with the i = 0 conjunct
//  omitted and A_i = [[L_{i/k} phi & !L_{(i+1)/k} phi]].
//  Corrected: outer operator is the one-step L and the i = k term is added,
//  which makes sup_k alpha_k = T^{n+1}(w, A).
enum class NStepVariant { Literal, Corrected };

struct NStepOptions {
  unsigned l_cap = 4;
  unsigned k_cap = 16;   // 0 selects exact mode: a single k that makes every bucket exact, no slack
  NStepVariant variant = NStepVariant::Literal;
  std::vector<Rational> grid;  // values v for r_i = (i/k) v; empty = attained values
};

class Evaluator {
 public:
  explicit Evaluator(const Process& p);

  const Process& process() const { return p_; }
  StateSet all() const { return full_; }

  StateSet extension(const Formula& f, const Valuation& v);
  StateSet truncated(const Formula& f, const Valuation& v, const TruncationBounds& b);

  Rational measure(int w, StateSet s);
  Rational nstep_measure(unsigned n, int w, StateSet s);  // n >= 1
  Rational init_measure(StateSet s) const;

  // Sorted distinct values T(w,E), pi(E) and T^n(w,E) for the requested
  // depths, over all E. Needs n <= 16.
  std::vector<Rational> critical_values(const std::set<unsigned>& depths = {});
  // Critical values with 0, 1 and midpoints of adjacent values.
  std::vector<Rational> critical_thresholds(const std::set<unsigned>& depths = {});

  // Literal (truncated) reading of the n-step operator applied to a set.
  StateSet nstep_literal(unsigned n, const Rational& r, StateSet body, const NStepOptions& o);
  StateSet nstep_closed(unsigned n, const Rational& r, StateSet body);

 private:
  struct Ctx;
  StateSet eval(const Formula& f, Ctx& c);
  StateSet eval_family(const Formula& f, Ctx& c);
  StateSet eval_lim(const Formula& f, Ctx& c);
  std::vector<Rational> family_points(const Family& fam, bool truncated, const TruncationBounds* b);
  const Formula& instance(const std::shared_ptr<const Family>& fam, const Rational& s);
  const std::vector<Rational>& table_row(unsigned depth, int w);

  const Process p_;
  int n_;
  StateSet full_;
  NStepKernel powers_;
  // measure tables indexed by depth then world, filled lazily for n <= 12
  std::map<unsigned, std::vector<std::vector<Rational>>> tables_;
  std::map<std::set<unsigned>, std::vector<Rational>> critical_;
  std::map<std::pair<const Family*, Rational>, Formula> instances_;
  std::vector<std::shared_ptr<const Family>> pinned_;
};

StateSet extension(const Model& m, const Formula& f);
bool satisfies(const Model& m, int w, const Formula& f);
StateSet truncated_eval(const Model& m, const Formula& f, const TruncationBounds& b);

struct Counterexample {
  Valuation valuation;
  int world = 0;
  Formula instance;
};

struct Verdict {
  bool valid = true;
  std::optional<Counterexample> counterexample;
};

constexpr std::uint64_t kDefaultModelCap = std::uint64_t(1) << 24;

// Valuations are visited in lexicographic order: atoms sorted by name, each
// subset read as a binary number; the first failing world is reported.
Verdict frame_valid(const Process& p, const Formula& f, std::uint64_t cap = kDefaultModelCap);
Verdict frame_valid(Evaluator& ev, const Formula& f, std::uint64_t cap = kDefaultModelCap);

// Reading of an implication where the antecedent must hold at every world
// before the consequent is demanded at every world.
Verdict frame_valid_global(Evaluator& ev, const Formula& antecedent, const Formula& consequent,
                           std::uint64_t cap = kDefaultModelCap);

// Visit every valuation of the given atoms; the callback returns false to stop.
void for_each_valuation(int n_states, const std::vector<std::string>& atoms, std::uint64_t cap,
                        const std::function<bool(const Valuation&)>& fn);

// For w outside L_{chain} L_r phi: the midpoint between r and the largest
// attained value of T(., [[phi]]) below r.
Rational archimedean_witness(Evaluator& ev, const Valuation& v, const Formula& phi, const Rational& r);

}  // namespace dpl
