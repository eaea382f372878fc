#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "dpl/rational.hpp"

namespace dpl {

// Subsets of the state space as bitmasks; processes are limited to 64 states.
using StateSet = std::uint64_t;
constexpr int kMaxStates = 64;

inline StateSet full_set(int n) { return n >= 64 ? ~StateSet(0) : (StateSet(1) << n) - 1; }
inline bool contains(StateSet s, int w) { return (s >> w) & 1u; }
inline StateSet singleton(int w) { return StateSet(1) << w; }
std::string set_string(StateSet s, int n);  // "{0,2}"
std::vector<int> members(StateSet s);

using Row = std::vector<Rational>;
using Matrix = std::vector<Row>;

struct Process {
  int n = 0;
  Matrix kernel;                   // kernel[w][v] = T(w, {v})
  std::vector<int> map;            // f
  std::optional<Row> init;         // pi

  bool operator==(const Process&) const = default;
};

class ProcessError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Empty when valid.
std::vector<std::string> validate(const Process& p);
void require_valid(const Process& p);

Rational mass(const Row& dist, StateSet s);
StateSet preimage(const Process& p, StateSet s);
StateSet preimage_k(const Process& p, StateSet s, unsigned k);

struct Classification {
  bool measure_preserving = false;
  bool purely_probabilistic = false;
  bool dynamic_probability_space = false;
  bool abstract_dynamical_system = false;
  bool harsanyi = false;
};

Classification classify(const Process& p);

// T(w, f^-1(A)) = T(f(w), A). Exhaustive over subsets for n <= 12, by
// singletons above (equivalent by additivity).
bool is_measure_preserving(const Process& p);
bool measure_preserving_exhaustive(const Process& p);
bool measure_preserving_singletons(const Process& p);
bool is_purely_probabilistic(const Process& p);
bool is_dynamic_probability_space(const Process& p);
bool harsanyi_holds(const Process& p);

struct Orbit {
  std::vector<StateSet> prefix;
  std::vector<StateSet> cycle;
  StateSet at(std::size_t k) const {
    return k < prefix.size() ? prefix[k] : cycle[(k - prefix.size()) % cycle.size()];
  }
};

// k -> f^-k(A) as prefix then repeating cycle.
Orbit preimage_orbit(const Process& p, StateSet a);

// Apply a state permutation: state w becomes perm[w].
Process relabel(const Process& p, const std::vector<int>& perm);

// Generators. All deterministic in the seed.
Process random_process(std::uint64_t seed, int n, int denom_bound, bool with_init);
// Measure-preserving processes: a random mix of identity maps, permutation
// maps with conjugation-invariant kernels, and abstract dynamical systems.
Process random_measure_preserving(std::uint64_t seed, int n, int denom_bound, bool with_init = false);
Process random_ads(std::uint64_t seed, int n, int denom_bound);
Process random_dps(std::uint64_t seed, int n, int denom_bound);
Process random_pure(std::uint64_t seed, int n, int denom_bound, bool with_init = false);
Process random_harsanyi(std::uint64_t seed, int n, int denom_bound);

// All probability vectors of length n with entries j/d, 1 <= d <= max_denom.
std::vector<Row> distribution_grid(int n, int max_denom);
// All maps [0,n) -> [0,n).
std::vector<std::vector<int>> all_maps(int n);
Process dps(const Row& mu, std::vector<int> map);

}  // namespace dpl
