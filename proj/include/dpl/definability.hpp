#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "dpl/semantics.hpp"

namespace dpl {

enum class PropertyId {
  MeasurePreserving,
  Ergodic,
  Mixing,
  Stationary,
  Irreducible,
  Recurrent,
  PurelyProbabilistic,
  Harsanyi
};

std::string property_name(PropertyId id);
std::optional<PropertyId> property_from_name(const std::string& name);
const std::vector<PropertyId>& all_properties();

// Pointwise: the defining formula must hold at every world of every model.
// Global: for implications, the antecedent is required at every world before
// the consequent is demanded at every world.
enum class Reading { Pointwise, Global };

struct DefiningParams {
  std::vector<Rational> thresholds;  // MeasurePreserving, Harsanyi, Stationary
  int n_states = 1;                  // truncation of the n >= 1 disjunctions
  NStepVariant variant = NStepVariant::Literal;
  // Stationary only: caps and value grid of the finite expansion
  unsigned l_cap = 2, k_cap = 3;
  std::vector<Rational> value_grid;
};

std::vector<Formula> defining_formulas(PropertyId id, const DefiningParams& params);

// Literal finite expansion of the n-step operator with l <= l_cap, k <= k_cap
// and r_i = (i/k) v for v in value_grid. Throws ResourceError past size_cap nodes.
Formula expand_nstep_literal(unsigned n, const Rational& r, const Formula& body, unsigned l_cap, unsigned k_cap,
                             const std::vector<Rational>& value_grid, std::size_t size_cap = 200000);
// Dual operator: M_r<n>(phi) = L_{1-r}<n>(!phi).
Formula expand_nstep_literal_m(unsigned n, const Rational& r, const Formula& body, unsigned l_cap, unsigned k_cap,
                               const std::vector<Rational>& value_grid, std::size_t size_cap = 200000);

// Admissible frame class of each property.
bool admissible(PropertyId id, const Process& p);
std::string admissible_class(PropertyId id);
bool oracle(PropertyId id, const Process& p);

struct CorrespondenceOptions {
  NStepVariant variant = NStepVariant::Literal;  // Stationary: literal vs corrected; Ergodic: L_0 vs M_0 reading
  Reading reading = Reading::Pointwise;
  std::uint64_t cap = kDefaultModelCap;
};

struct CorrespondenceReport {
  std::string process_id;
  bool frame_verdict = false;
  bool oracle_verdict = false;
  bool agree = false;
  std::optional<Counterexample> witness;
  std::string detail;  // e.g. the threshold of a failing instance
};

class DefinabilityError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

CorrespondenceReport correspondence_check(PropertyId id, const Process& p, const CorrespondenceOptions& o = {},
                                          const std::string& process_id = "");

struct ExperimentConfig {
  bool exhaustive = true;
  int n_states = 2;        // exhaustive: exact size; random: maximum size
  int min_states = 1;      // random only
  int denom_bound = 2;
  int samples = 100;
  std::uint64_t seed = 1;
  CorrespondenceOptions options;
};

struct ExperimentSummary {
  PropertyId property;
  std::string mode;
  int total = 0, agree = 0, disagree = 0;
  std::vector<CorrespondenceReport> witnesses;  // disagreements only
};

// Every process of the property's class on the given grid (see README).
std::vector<Process> exhaustive_processes(PropertyId id, int n_states, int denom_bound);
Process random_admissible(PropertyId id, std::uint64_t seed, int n_states, int denom_bound);
ExperimentSummary run_experiment(PropertyId id, const ExperimentConfig& config);

// Stationary clause evaluator: for the valuation v(p) = a and threshold r,
// the right-hand side of the defining biconditional.
bool stationary_rhs(Evaluator& ev, StateSet a, const Rational& r, NStepVariant variant);

// Largest integer r <= r_cap with sum_{m=0}^{k} T^m(w, a) >= r for some
// k <= k_cap (T^0 = pi); a truncated smoke test of the recurrence consequent.
unsigned recurrence_partial_level(Evaluator& ev, int w, StateSet a, unsigned r_cap, unsigned k_cap);

}  // namespace dpl
