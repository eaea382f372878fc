#pragma once

#include <map>
#include <stdexcept>

#include "dpl/process.hpp"

namespace dpl {

class StochasticError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Convention for n = 0: WithInit gives T^0 = pi (one row), Dirac gives the identity.
enum class T0Mode { WithInit, Dirac };

Matrix identity_matrix(int n);
Matrix multiply(const Matrix& a, const Matrix& b);
Matrix n_step(const Process& p, unsigned n, T0Mode mode);

// Memoized powers of one kernel.
class NStepKernel {
 public:
  explicit NStepKernel(const Process& p) : p_(p) {}
  const Matrix& power(unsigned n);  // n >= 1
 private:
  const Process& p_;
  std::map<unsigned, Matrix> cache_;
};

bool is_stationary(const Process& p);
bool is_ergodic(const Process& p);
bool is_mixing(const Process& p);
bool is_irreducible(const Process& p);
bool is_recurrent(const Process& p);

// Literal subset form of irreducibility with horizon n_states; for tests.
bool irreducible_by_subsets(const Process& p);

// reach[w] = states reachable from w in >= 1 steps of positive probability.
std::vector<StateSet> reachability(const Process& p);
// States in closed strongly connected components.
StateSet recurrent_states(const Process& p);
// U(w, A) = sum_n T^n(w, A) diverges.
bool potential_diverges(const Process& p, int w, StateSet a);

}  // namespace dpl
