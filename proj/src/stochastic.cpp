#include "dpl/stochastic.hpp"

#include <functional>

namespace dpl {

namespace {

void need_init(const Process& p, const char* what) {
  if (!p.init) throw StochasticError(std::string(what) + " needs an initial distribution");
}

StateSet support(const Row& r) {
  StateSet s = 0;
  for (std::size_t v = 0; v < r.size(); ++v)
    if (r[v] != 0) s |= singleton(static_cast<int>(v));
  return s;
}

}  // namespace

Matrix identity_matrix(int n) {
  Matrix m(n, Row(n));
  for (int i = 0; i < n; ++i) m[i][i] = 1;
  return m;
}

Matrix multiply(const Matrix& a, const Matrix& b) {
  std::size_t rows = a.size(), inner = b.size(), cols = b.empty() ? 0 : b[0].size();
  Matrix c(rows, Row(cols));
  for (std::size_t i = 0; i < rows; ++i)
    for (std::size_t k = 0; k < inner; ++k) {
      if (a[i][k] == 0) continue;
      for (std::size_t j = 0; j < cols; ++j)
        if (b[k][j] != 0) c[i][j] += a[i][k] * b[k][j];
    }
  return c;
}

Matrix n_step(const Process& p, unsigned n, T0Mode mode) {
  if (n == 0) {
    if (mode == T0Mode::Dirac) return identity_matrix(p.n);
    need_init(p, "T^0 with the initial-distribution convention");
    return Matrix{*p.init};
  }
  Matrix result = p.kernel, base = p.kernel;
  unsigned k = n - 1;
  while (k) {
    if (k & 1u) result = multiply(result, base);
    k >>= 1;
    if (k) base = multiply(base, base);
  }
  return result;
}

const Matrix& NStepKernel::power(unsigned n) {
  if (n == 0) throw StochasticError("NStepKernel::power needs n >= 1");
  auto it = cache_.find(n);
  if (it != cache_.end()) return it->second;
  Matrix m = n == 1 ? p_.kernel : multiply(power(n - 1), p_.kernel);
  return cache_.emplace(n, std::move(m)).first->second;
}

bool is_stationary(const Process& p) {
  need_init(p, "stationarity");
  Matrix pt = multiply(Matrix{*p.init}, p.kernel);
  return pt[0] == *p.init;
}

bool is_ergodic(const Process& p) {
  if (!is_dynamic_probability_space(p)) throw StochasticError("ergodicity needs a dynamic probability space");
  const Row& mu = p.kernel[0];
  if (p.n <= 12) {
    for (StateSet a = 0; a <= full_set(p.n); ++a)
      if (preimage(p, a) == a) {
        Rational m = mass(mu, a);
        if (m != 0 && m != 1) return false;
      }
    return true;
  }
  // invariant sets are unions of weakly connected components of the map's graph
  std::vector<int> comp(p.n);
  for (int w = 0; w < p.n; ++w) comp[w] = w;
  std::function<int(int)> find = [&](int x) { return comp[x] == x ? x : comp[x] = find(comp[x]); };
  for (int w = 0; w < p.n; ++w) comp[find(w)] = find(p.map[w]);
  std::map<int, StateSet> parts;
  for (int w = 0; w < p.n; ++w) parts[find(w)] |= singleton(w);
  for (auto& [root, s] : parts) {
    Rational m = mass(mu, s);
    if (m != 0 && m != 1) return false;
  }
  return true;
}

bool is_mixing(const Process& p) {
  if (!is_dynamic_probability_space(p) || !is_measure_preserving(p))
    throw StochasticError("mixing needs an abstract dynamical system");
  const Row& mu = p.kernel[0];
  if (p.n <= 8) {
    for (StateSet a = 0; a <= full_set(p.n); ++a) {
      Orbit o = preimage_orbit(p, a);
      Rational ma = mass(mu, a);
      for (StateSet b = 0; b <= full_set(p.n); ++b) {
        Rational target = ma * mass(mu, b);
        for (StateSet e : o.cycle)
          if (mass(mu, e & b) != target) return false;
      }
    }
    return true;
  }
  // Taking B = f^-k(A) and B = Omega forces mu(A) in {0,1} for every A, so
  // mu is a point mass; conversely a point mass on an invariant measure mixes.
  int support_size = __builtin_popcountll(support(mu));
  return support_size == 1;
}

std::vector<StateSet> reachability(const Process& p) {
  std::vector<StateSet> step(p.n), reach(p.n);
  for (int w = 0; w < p.n; ++w) step[w] = support(p.kernel[w]);
  for (int w = 0; w < p.n; ++w) {
    StateSet seen = step[w], frontier = step[w];
    while (frontier) {
      StateSet next = 0;
      for (int v : members(frontier)) next |= step[v];
      frontier = next & ~seen;
      seen |= next;
    }
    reach[w] = seen;
  }
  return reach;
}

bool is_irreducible(const Process& p) {
  need_init(p, "irreducibility");
  StateSet target = support(*p.init);
  for (StateSet r : reachability(p))
    if ((r & target) != target) return false;
  return true;
}

bool irreducible_by_subsets(const Process& p) {
  need_init(p, "irreducibility");
  std::vector<Matrix> powers;
  for (int n = 1; n <= p.n; ++n) powers.push_back(n_step(p, n, T0Mode::Dirac));
  for (StateSet a = 1; a <= full_set(p.n); ++a) {
    if (mass(*p.init, a) == 0) continue;
    for (int w = 0; w < p.n; ++w) {
      bool hit = false;
      for (auto& m : powers)
        if (mass(m[w], a) > 0) {
          hit = true;
          break;
        }
      if (!hit) return false;
    }
  }
  return true;
}

StateSet recurrent_states(const Process& p) {
  auto reach = reachability(p);
  StateSet out = 0;
  // w is recurrent iff every state reachable from w leads back to w
  for (int w = 0; w < p.n; ++w) {
    if (!contains(reach[w], w)) continue;
    bool closed = true;
    for (int v : members(reach[w]))
      if (!contains(reach[v], w)) {
        closed = false;
        break;
      }
    if (closed) out |= singleton(w);
  }
  return out;
}

bool potential_diverges(const Process& p, int w, StateSet a) {
  StateSet rec = recurrent_states(p) & a;
  if (!rec) return false;
  // reachable in >= 0 steps
  StateSet reach = reachability(p)[w] | singleton(w);
  return (reach & rec) != 0;
}

bool is_recurrent(const Process& p) {
  if (!is_irreducible(p)) return false;
  auto reach = reachability(p);
  if (p.n > 12) {
    // irreducible finite chains have a unique closed class reached from
    // everywhere; every accessible set meets it, so U diverges on it
    return true;
  }
  StateSet rec = recurrent_states(p);
  for (StateSet a = 1; a <= full_set(p.n); ++a) {
    bool accessible = true;
    for (int w = 0; w < p.n && accessible; ++w) accessible = (reach[w] & a) != 0;
    if (!accessible) continue;
    for (int w : members(a)) {
      StateSet from = reach[w] | singleton(w);
      if (!(from & rec & a)) return false;
    }
  }
  return true;
}

}  // namespace dpl
