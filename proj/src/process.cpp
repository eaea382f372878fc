#include "dpl/process.hpp"

#include <algorithm>
#include <functional>
#include <map>
#include <numeric>
#include <random>
#include <set>

namespace dpl {

std::string set_string(StateSet s, int n) {
  std::string out = "{";
  bool first = true;
  for (int w = 0; w < n; ++w)
    if (contains(s, w)) {
      out += (first ? "" : ",") + std::to_string(w);
      first = false;
    }
  return out + "}";
}

std::vector<int> members(StateSet s) {
  std::vector<int> out;
  for (int w = 0; s; ++w, s >>= 1)
    if (s & 1u) out.push_back(w);
  return out;
}

namespace {

void check_distribution(const Row& row, int n, const std::string& what, std::vector<std::string>& out) {
  if (static_cast<int>(row.size()) != n) {
    out.push_back(what + " has length " + std::to_string(row.size()) + ", expected " + std::to_string(n));
    return;
  }
  Rational sum = 0;
  for (std::size_t v = 0; v < row.size(); ++v) {
    if (!in_unit_interval(row[v]))
      out.push_back(what + " entry " + std::to_string(v) + " = " + to_string(row[v]) + " outside [0,1]");
    sum += row[v];
  }
  if (sum != 1) out.push_back(what + " sums to " + to_string(sum));
}

}  // namespace

std::vector<std::string> validate(const Process& p) {
  std::vector<std::string> out;
  if (p.n < 1) out.push_back("state count must be positive");
  if (p.n > kMaxStates) out.push_back("at most 64 states are supported");
  if (!out.empty()) return out;
  if (static_cast<int>(p.kernel.size()) != p.n)
    out.push_back("kernel has " + std::to_string(p.kernel.size()) + " rows, expected " + std::to_string(p.n));
  for (std::size_t w = 0; w < p.kernel.size(); ++w) check_distribution(p.kernel[w], p.n, "row " + std::to_string(w), out);
  if (static_cast<int>(p.map.size()) != p.n)
    out.push_back("map has length " + std::to_string(p.map.size()) + ", expected " + std::to_string(p.n));
  for (std::size_t w = 0; w < p.map.size(); ++w)
    if (p.map[w] < 0 || p.map[w] >= p.n)
      out.push_back("map out of range: f(" + std::to_string(w) + ") = " + std::to_string(p.map[w]));
  if (p.init) check_distribution(*p.init, p.n, "init", out);
  return out;
}

void require_valid(const Process& p) {
  auto v = validate(p);
  if (!v.empty()) throw ProcessError("invalid process: " + v.front());
}

Rational mass(const Row& dist, StateSet s) {
  Rational m = 0;
  for (int v : members(s)) m += dist[v];
  return m;
}

StateSet preimage(const Process& p, StateSet s) {
  StateSet out = 0;
  for (int w = 0; w < p.n; ++w)
    if (contains(s, p.map[w])) out |= singleton(w);
  return out;
}

StateSet preimage_k(const Process& p, StateSet s, unsigned k) {
  for (unsigned i = 0; i < k; ++i) s = preimage(p, s);
  return s;
}

bool is_purely_probabilistic(const Process& p) {
  for (int w = 0; w < p.n; ++w)
    if (p.map[w] != w) return false;
  return true;
}

bool is_dynamic_probability_space(const Process& p) {
  for (int w = 1; w < p.n; ++w)
    if (p.kernel[w] != p.kernel[0]) return false;
  return true;
}

bool measure_preserving_singletons(const Process& p) {
  for (int w = 0; w < p.n; ++w)
    for (int a = 0; a < p.n; ++a)
      if (mass(p.kernel[w], preimage(p, singleton(a))) != p.kernel[p.map[w]][a]) return false;
  return true;
}

bool measure_preserving_exhaustive(const Process& p) {
  if (p.n > 20) throw ProcessError("exhaustive measure-preservation check needs n <= 20");
  const StateSet count = StateSet(1) << p.n;
  std::vector<StateSet> pre(count, 0);
  for (StateSet a = 1; a < count; ++a) {
    int low = __builtin_ctzll(a);
    pre[a] = pre[a & (a - 1)] | preimage(p, singleton(low));
  }
  std::vector<Rational> table(count);
  for (int w = 0; w < p.n; ++w) {
    const Row& row = p.kernel[w];
    for (StateSet a = 1; a < count; ++a) table[a] = table[a & (a - 1)] + row[__builtin_ctzll(a)];
    const Row& image = p.kernel[p.map[w]];
    for (StateSet a = 1; a < count; ++a)
      if (table[pre[a]] != mass(image, a)) return false;
  }
  return true;
}

bool is_measure_preserving(const Process& p) {
  return p.n <= 12 ? measure_preserving_exhaustive(p) : measure_preserving_singletons(p);
}

bool harsanyi_holds(const Process& p) {
  for (int w = 0; w < p.n; ++w)
    for (int v = 0; v < p.n; ++v)
      if (p.kernel[w][v] != 0 && p.kernel[v] != p.kernel[w]) return false;
  return true;
}

Classification classify(const Process& p) {
  require_valid(p);
  Classification c;
  c.measure_preserving = is_measure_preserving(p);
  c.purely_probabilistic = is_purely_probabilistic(p);
  c.dynamic_probability_space = is_dynamic_probability_space(p);
  c.abstract_dynamical_system = c.dynamic_probability_space && c.measure_preserving;
  c.harsanyi = harsanyi_holds(p);
  return c;
}

Orbit preimage_orbit(const Process& p, StateSet a) {
  std::vector<StateSet> seq;
  std::map<StateSet, std::size_t> seen;
  StateSet cur = a;
  while (!seen.count(cur)) {
    seen[cur] = seq.size();
    seq.push_back(cur);
    cur = preimage(p, cur);
  }
  std::size_t start = seen[cur];
  Orbit o;
  o.prefix.assign(seq.begin(), seq.begin() + static_cast<std::ptrdiff_t>(start));
  o.cycle.assign(seq.begin() + static_cast<std::ptrdiff_t>(start), seq.end());
  return o;
}

Process relabel(const Process& p, const std::vector<int>& perm) {
  Process q;
  q.n = p.n;
  q.kernel.assign(p.n, Row(p.n));
  q.map.assign(p.n, 0);
  for (int w = 0; w < p.n; ++w) {
    for (int v = 0; v < p.n; ++v) q.kernel[perm[w]][perm[v]] = p.kernel[w][v];
    q.map[perm[w]] = perm[p.map[w]];
  }
  if (p.init) {
    Row init(p.n);
    for (int w = 0; w < p.n; ++w) init[perm[w]] = (*p.init)[w];
    q.init = init;
  }
  return q;
}

namespace {

using Rng = std::mt19937_64;

int uniform(Rng& rng, int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng); }

Row random_distribution(Rng& rng, int n, int d) {
  std::vector<int> weights(n);
  int total = 0;
  for (auto& x : weights) total += (x = uniform(rng, 0, d));
  if (total == 0) {
    weights[uniform(rng, 0, n - 1)] = 1;
    total = 1;
  }
  Row row(n);
  for (int v = 0; v < n; ++v) row[v] = Rational(weights[v], total), row[v].canonicalize();
  return row;
}

Row normalized(const std::vector<int>& weights) {
  int total = std::accumulate(weights.begin(), weights.end(), 0);
  Row row(weights.size());
  for (std::size_t v = 0; v < weights.size(); ++v) row[v] = Rational(weights[v], total), row[v].canonicalize();
  return row;
}

std::vector<int> random_map(Rng& rng, int n) {
  std::vector<int> f(n);
  for (auto& x : f) x = uniform(rng, 0, n - 1);
  return f;
}

// States lying on a cycle of f, and a cycle id for each of them (-1 otherwise).
std::vector<int> cycle_ids(const std::vector<int>& f) {
  int n = static_cast<int>(f.size());
  std::vector<int> id(n, -1);
  int next_id = 0;
  for (int w = 0; w < n; ++w) {
    // walk n steps to land on a cycle
    int x = w;
    for (int i = 0; i < n; ++i) x = f[x];
    if (id[x] != -1) continue;
    int y = x;
    do {
      id[y] = next_id;
      y = f[y];
    } while (y != x);
    ++next_id;
  }
  return id;
}

}  // namespace

Process random_process(std::uint64_t seed, int n, int denom_bound, bool with_init) {
  Rng rng(seed);
  Process p;
  p.n = n;
  for (int w = 0; w < n; ++w) p.kernel.push_back(random_distribution(rng, n, denom_bound));
  p.map = random_map(rng, n);
  if (with_init) p.init = random_distribution(rng, n, denom_bound);
  return p;
}

Process random_pure(std::uint64_t seed, int n, int denom_bound, bool with_init) {
  Process p = random_process(seed, n, denom_bound, with_init);
  std::iota(p.map.begin(), p.map.end(), 0);
  return p;
}

Process dps(const Row& mu, std::vector<int> map) {
  Process p;
  p.n = static_cast<int>(mu.size());
  p.kernel.assign(p.n, mu);
  p.map = std::move(map);
  return p;
}

Process random_dps(std::uint64_t seed, int n, int denom_bound) {
  Rng rng(seed);
  Row mu = random_distribution(rng, n, denom_bound);
  return dps(mu, random_map(rng, n));
}

Process random_ads(std::uint64_t seed, int n, int denom_bound) {
  Rng rng(seed);
  std::vector<int> f = random_map(rng, n);
  std::vector<int> id = cycle_ids(f);
  int cycles = *std::max_element(id.begin(), id.end()) + 1;
  std::vector<int> weight(cycles);
  int total = 0;
  for (auto& c : weight) total += (c = uniform(rng, 0, denom_bound));
  if (total == 0) weight[uniform(rng, 0, cycles - 1)] = 1;
  std::vector<int> w(n, 0);
  for (int x = 0; x < n; ++x)
    if (id[x] >= 0) w[x] = weight[id[x]];
  return dps(normalized(w), f);
}

namespace {

Process random_permutation_invariant(Rng& rng, int n, int denom_bound) {
  std::vector<int> sigma(n);
  std::iota(sigma.begin(), sigma.end(), 0);
  std::shuffle(sigma.begin(), sigma.end(), rng);
  // order of sigma
  int order = 1;
  {
    std::vector<int> x = sigma;
    auto is_id = [&](const std::vector<int>& v) {
      for (int i = 0; i < n; ++i)
        if (v[i] != i) return false;
      return true;
    };
    while (!is_id(x)) {
      for (int i = 0; i < n; ++i) x[i] = sigma[x[i]];
      ++order;
    }
  }
  Matrix k0;
  for (int w = 0; w < n; ++w) k0.push_back(random_distribution(rng, n, denom_bound));
  Matrix k(n, Row(n));
  std::vector<int> pw(n);
  std::iota(pw.begin(), pw.end(), 0);  // sigma^j
  for (int j = 0; j < order; ++j) {
    for (int w = 0; w < n; ++w)
      for (int a = 0; a < n; ++a) k[w][a] += k0[pw[w]][pw[a]];
    for (int i = 0; i < n; ++i) pw[i] = sigma[pw[i]];
  }
  for (auto& row : k)
    for (auto& x : row) x /= order;
  Process p;
  p.n = n;
  p.kernel = std::move(k);
  p.map = sigma;
  return p;
}

}  // namespace

Process random_measure_preserving(std::uint64_t seed, int n, int denom_bound, bool with_init) {
  Rng rng(seed);
  int choice = uniform(rng, 0, 2);
  std::uint64_t sub = rng();
  Process p;
  if (choice == 0)
    p = random_pure(sub, n, denom_bound, false);
  else if (choice == 1)
    p = random_permutation_invariant(rng, n, denom_bound);
  else
    p = random_ads(sub, n, denom_bound);
  if (with_init) p.init = random_distribution(rng, n, denom_bound);
  return p;
}

Process random_harsanyi(std::uint64_t seed, int n, int denom_bound) {
  Rng rng(seed);
  std::vector<int> block(n);
  int blocks = uniform(rng, 1, n);
  for (auto& b : block) b = uniform(rng, 0, blocks - 1);
  Process p;
  p.n = n;
  p.kernel.assign(n, Row(n));
  for (int b = 0; b < blocks; ++b) {
    std::vector<int> in;
    for (int w = 0; w < n; ++w)
      if (block[w] == b) in.push_back(w);
    if (in.empty()) continue;
    Row local = random_distribution(rng, static_cast<int>(in.size()), denom_bound);
    Row row(n);
    for (std::size_t i = 0; i < in.size(); ++i) row[in[i]] = local[i];
    for (int w : in) p.kernel[w] = row;
  }
  p.map = random_map(rng, n);
  return p;
}

std::vector<Row> distribution_grid(int n, int max_denom) {
  std::set<Row> seen;
  std::vector<Row> out;
  for (int d = 1; d <= max_denom; ++d) {
    std::vector<int> parts(n, 0);
    // enumerate compositions of d into n parts
    std::function<void(int, int)> rec = [&](int i, int left) {
      if (i == n - 1) {
        parts[i] = left;
        Row row(n);
        for (int v = 0; v < n; ++v) row[v] = Rational(parts[v], d), row[v].canonicalize();
        if (seen.insert(row).second) out.push_back(row);
        return;
      }
      for (int x = 0; x <= left; ++x) {
        parts[i] = x;
        rec(i + 1, left - x);
      }
    };
    rec(0, d);
  }
  return out;
}

std::vector<std::vector<int>> all_maps(int n) {
  std::vector<std::vector<int>> out;
  std::vector<int> f(n, 0);
  for (;;) {
    out.push_back(f);
    int i = 0;
    while (i < n && ++f[i] == n) f[i++] = 0;
    if (i == n) break;
  }
  return out;
}

}  // namespace dpl
