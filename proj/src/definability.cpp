#include "dpl/definability.hpp"

#include <algorithm>
#include <functional>
#include <random>

#include "dpl/stochastic.hpp"

namespace dpl {

namespace {

const std::vector<std::pair<PropertyId, std::string>> kNames = {
    {PropertyId::MeasurePreserving, "measure-preserving"},
    {PropertyId::Ergodic, "ergodic"},
    {PropertyId::Mixing, "mixing"},
    {PropertyId::Stationary, "stationary"},
    {PropertyId::Irreducible, "irreducible"},
    {PropertyId::Recurrent, "recurrent"},
    {PropertyId::PurelyProbabilistic, "purely-probabilistic"},
    {PropertyId::Harsanyi, "harsanyi"},
};

Formula p_atom() { return atom("p"); }
Formula q_atom() { return atom("q"); }

// !M_0<n> p = !L_1<n> !p, i.e. T^n(w, [[p]]) > 0
Formula reaches(unsigned n) { return neg(nstep_l(n, 1, neg(p_atom()))); }

Formula accessible_disjunction(int n_states) {
  unsigned top = static_cast<unsigned>(std::max(1, n_states));
  std::vector<Formula> prefix;
  for (unsigned n = 1; n < top; ++n) prefix.push_back(reaches(n));
  return big_or(nat_family(std::move(prefix), reaches(top)));
}

Formula irr_formula(int n_states) {
  // !M_0<0> p = !I[1] !p
  return imp(neg(init_l(1, neg(p_atom()))), accessible_disjunction(n_states));
}

Formula ergodic_antecedent() { return iff(next(p_atom()), p_atom()); }

Formula ergodic_consequent(NStepVariant v) {
  if (v == NStepVariant::Literal) return disj(L(0, p_atom()), L(1, p_atom()));
  return disj(M(0, p_atom()), L(1, p_atom()));
}

std::vector<Rational> with_zero_desc(std::vector<Rational> g) {
  g.push_back(0);
  std::sort(g.begin(), g.end(), [](const Rational& a, const Rational& b) { return a > b; });
  g.erase(std::unique(g.begin(), g.end()), g.end());
  return g;
}

// Enumerate tuples (v_1..v_m) over grid whose weighted sum sum_i w_i v_i
// reaches `need`; calls fn for each.
void weighted_tuples(const std::vector<Rational>& grid, const std::vector<Rational>& weights, const Rational& need,
                     const std::function<void(const std::vector<Rational>&)>& fn) {
  std::vector<Rational> cur(weights.size());
  // best achievable remainder for pruning
  Rational gmax = grid.empty() ? Rational(0) : *std::max_element(grid.begin(), grid.end());
  std::vector<Rational> rest(weights.size() + 1, Rational(0));
  for (std::size_t i = weights.size(); i-- > 0;) rest[i] = rest[i + 1] + weights[i] * gmax;
  std::function<void(std::size_t, Rational)> rec = [&](std::size_t i, Rational acc) {
    if (acc + rest[i] < need) return;
    if (i == weights.size()) {
      fn(cur);
      return;
    }
    for (auto& v : grid) {
      cur[i] = v;
      rec(i + 1, acc + weights[i] * v);
    }
  };
  rec(0, 0);
}

struct SizeGuard {
  std::size_t cap, used = 0;
  void add(const Formula& f) {
    used += size(f);
    if (used > cap) throw ResourceError("literal expansion exceeds " + std::to_string(cap) + " nodes");
  }
};

Formula expand(unsigned n, const Rational& r, const Formula& body, unsigned l_cap, unsigned k_cap,
               const std::vector<Rational>& grid, SizeGuard& guard) {
  if (n == 0) return init_l(r, body);
  if (n == 1) return L(r, body);
  std::vector<Formula> per_l;
  for (unsigned l = 1; l <= l_cap; ++l) {
    Rational need = monus(r, Rational(1, l));
    std::vector<Formula> per_k;
    for (unsigned k = 1; k <= k_cap; ++k) {
      std::vector<Rational> weights;
      std::vector<Formula> bands;
      for (unsigned i = 1; i < k; ++i) {
        Rational lo(i, k), hi(i + 1, k);
        lo.canonicalize();
        hi.canonicalize();
        weights.push_back(lo);
        bands.push_back(conj(expand(n - 1, lo, body, l_cap, k_cap, grid, guard),
                             neg(expand(n - 1, hi, body, l_cap, k_cap, grid, guard))));
      }
      std::vector<Formula> tuples;
      weighted_tuples(grid, weights, need, [&](const std::vector<Rational>& vs) {
        std::vector<Formula> conjuncts;
        for (std::size_t i = 0; i < vs.size(); ++i)
          conjuncts.push_back(expand(n - 1, vs[i], bands[i], l_cap, k_cap, grid, guard));
        Formula t = big_and(finite_family(std::move(conjuncts)));
        guard.add(t);
        tuples.push_back(t);
      });
      per_k.push_back(big_or(finite_family(std::move(tuples))));
    }
    per_l.push_back(big_or(finite_family(std::move(per_k))));
  }
  return big_and(finite_family(std::move(per_l)));
}

// Finite expansion of the right-hand side of the stationarity biconditional.
Formula stationary_rhs_formula(const Rational& r, const DefiningParams& prm) {
  auto grid = with_zero_desc(prm.value_grid);
  const bool literal = prm.variant == NStepVariant::Literal;
  std::vector<Formula> outer;
  for (unsigned l = 1; l <= prm.l_cap; ++l) {
    Rational need = monus(r, Rational(1, l));
    std::vector<Formula> inner;
    for (unsigned k = 1; k <= prm.k_cap; ++k) {
      std::vector<Rational> weights;
      std::vector<Formula> bands;
      unsigned top = literal ? k - 1 : k;
      for (unsigned i = 1; i <= top; ++i) {
        Rational lo(i, k);
        lo.canonicalize();
        weights.push_back(lo);
        if (i == k) {
          bands.push_back(L(1, p_atom()));
        } else {
          Rational hi(i + 1, k);
          hi.canonicalize();
          bands.push_back(conj(L(lo, p_atom()), neg(L(hi, p_atom()))));
        }
      }
      std::vector<Formula> tuples;
      weighted_tuples(grid, weights, need, [&](const std::vector<Rational>& vs) {
        std::vector<Formula> cs;
        for (std::size_t i = 0; i < vs.size(); ++i) cs.push_back(init_l(vs[i], bands[i]));
        tuples.push_back(big_and(finite_family(std::move(cs))));
      });
      inner.push_back(big_or(finite_family(std::move(tuples))));
    }
    // literal order: Or over l of And over k; corrected: And over l of Or over k
    outer.push_back(literal ? big_and(finite_family(std::move(inner))) : big_or(finite_family(std::move(inner))));
  }
  return literal ? big_or(finite_family(std::move(outer))) : big_and(finite_family(std::move(outer)));
}

// Truncated finite rendering of the recurrence consequent: r in 1..l_cap,
// k <= k_cap, r_m from the value grid.
Formula recurrence_consequent_formula(const DefiningParams& prm) {
  auto grid = with_zero_desc(prm.value_grid);
  std::vector<Formula> per_r;
  for (unsigned r = 1; r <= prm.l_cap; ++r) {
    std::vector<Formula> per_k;
    for (unsigned k = 0; k <= prm.k_cap; ++k) {
      std::vector<Rational> weights(k + 1, Rational(1));
      std::vector<Formula> tuples;
      weighted_tuples(grid, weights, Rational(r), [&](const std::vector<Rational>& vs) {
        std::vector<Formula> cs;
        for (unsigned m = 0; m <= k; ++m) cs.push_back(nstep_l(m, vs[m], p_atom()));
        tuples.push_back(big_and(finite_family(std::move(cs))));
      });
      per_k.push_back(big_or(finite_family(std::move(tuples))));
    }
    per_r.push_back(big_or(finite_family(std::move(per_k))));
  }
  return big_and(finite_family(std::move(per_r)));
}

Formula mixing_g() {
  Expr r = Expr::var("r"), s = Expr::var("s");
  Formula body = imp(conj(L(r, p_atom()), L(s, q_atom())), lim_l(r * s, conj(iter(p_atom()), q_atom())));
  return big_and(threshold_family(big_and(threshold_family(body, "s", 1, false)), "r", 1, false));
}

Formula mixing_l() {
  Expr r = Expr::var("r"), s = Expr::var("s");
  Formula body = imp(conj(M(r, p_atom()), M(s, q_atom())), lim_m(r * s, conj(iter(p_atom()), q_atom())));
  return big_and(threshold_family(big_and(threshold_family(body, "s", 1, false)), "r", 1, false));
}

}  // namespace

std::string property_name(PropertyId id) {
  for (auto& [k, v] : kNames)
    if (k == id) return v;
  return "?";
}

std::optional<PropertyId> property_from_name(const std::string& name) {
  for (auto& [k, v] : kNames)
    if (v == name) return k;
  return std::nullopt;
}

const std::vector<PropertyId>& all_properties() {
  static const std::vector<PropertyId> ids = [] {
    std::vector<PropertyId> out;
    for (auto& [k, v] : kNames) out.push_back(k);
    return out;
  }();
  return ids;
}

Formula expand_nstep_literal(unsigned n, const Rational& r, const Formula& body, unsigned l_cap, unsigned k_cap,
                             const std::vector<Rational>& value_grid, std::size_t size_cap) {
  if (l_cap == 0 || k_cap == 0) throw DefinabilityError("expansion caps must be positive");
  SizeGuard guard{size_cap};
  return expand(n, r, body, l_cap, k_cap, with_zero_desc(value_grid), guard);
}

Formula expand_nstep_literal_m(unsigned n, const Rational& r, const Formula& body, unsigned l_cap, unsigned k_cap,
                               const std::vector<Rational>& value_grid, std::size_t size_cap) {
  return expand_nstep_literal(n, 1 - r, neg(body), l_cap, k_cap, value_grid, size_cap);
}

std::vector<Formula> defining_formulas(PropertyId id, const DefiningParams& prm) {
  auto p = p_atom();
  std::vector<Formula> out;
  switch (id) {
    case PropertyId::MeasurePreserving:
      if (prm.thresholds.empty()) throw DefinabilityError("measure-preserving needs thresholds");
      for (auto& r : prm.thresholds) out.push_back(iff(L(r, next(p)), next(L(r, p))));
      break;
    case PropertyId::Ergodic:
      out.push_back(imp(ergodic_antecedent(), ergodic_consequent(prm.variant)));
      break;
    case PropertyId::Mixing:
      out.push_back(mixing_g());
      out.push_back(mixing_l());
      break;
    case PropertyId::Stationary:
      if (prm.thresholds.empty()) throw DefinabilityError("stationary needs thresholds");
      for (auto& r : prm.thresholds) out.push_back(iff(init_l(r, p), stationary_rhs_formula(r, prm)));
      break;
    case PropertyId::Irreducible:
      out.push_back(irr_formula(prm.n_states));
      break;
    case PropertyId::Recurrent:
      out.push_back(irr_formula(prm.n_states));
      out.push_back(imp(accessible_disjunction(prm.n_states), imp(p, recurrence_consequent_formula(prm))));
      break;
    case PropertyId::PurelyProbabilistic:
      out.push_back(iff(next(p), p));
      break;
    case PropertyId::Harsanyi:
      if (prm.thresholds.empty()) throw DefinabilityError("harsanyi needs thresholds");
      for (auto& r : prm.thresholds) {
        out.push_back(imp(L(r, p), L(1, L(r, p))));
        out.push_back(imp(neg(L(r, p)), L(1, neg(L(r, p)))));
      }
      break;
  }
  return out;
}

bool admissible(PropertyId id, const Process& p) {
  if (!validate(p).empty()) return false;
  switch (id) {
    case PropertyId::Ergodic:
      return is_dynamic_probability_space(p);
    case PropertyId::Mixing:
      return is_dynamic_probability_space(p) && is_measure_preserving(p);
    case PropertyId::Stationary:
    case PropertyId::Irreducible:
    case PropertyId::Recurrent:
      return p.init.has_value();
    default:
      return true;
  }
}

std::string admissible_class(PropertyId id) {
  switch (id) {
    case PropertyId::Ergodic:
      return "dynamic probability spaces";
    case PropertyId::Mixing:
      return "abstract dynamical systems";
    case PropertyId::Stationary:
    case PropertyId::Irreducible:
    case PropertyId::Recurrent:
      return "processes with an initial distribution";
    default:
      return "all processes";
  }
}

bool oracle(PropertyId id, const Process& p) {
  switch (id) {
    case PropertyId::MeasurePreserving:
      return is_measure_preserving(p);
    case PropertyId::Ergodic:
      return is_ergodic(p);
    case PropertyId::Mixing:
      return is_mixing(p);
    case PropertyId::Stationary:
      return is_stationary(p);
    case PropertyId::Irreducible:
      return is_irreducible(p);
    case PropertyId::Recurrent:
      return is_recurrent(p);
    case PropertyId::PurelyProbabilistic:
      return is_purely_probabilistic(p);
    case PropertyId::Harsanyi:
      return harsanyi_holds(p);
  }
  return false;
}

bool stationary_rhs(Evaluator& ev, StateSet a, const Rational& r, NStepVariant variant) {
  const Process& p = ev.process();
  std::vector<Rational> t(p.n);
  for (int y = 0; y < p.n; ++y) t[y] = ev.measure(y, a);
  // alpha_k = sum_i (i/k) pi(A_i), A_i = {y : i/k <= T(y,A) < (i+1)/k}
  auto alpha = [&](const mpz_class& k, bool top_inclusive) {
    Rational sum = 0;
    for (int y = 0; y < p.n; ++y) {
      Rational scaled = t[y] * Rational(k);
      mpz_class i = scaled.get_num() / scaled.get_den();
      if (i == 0 || (i >= k && !top_inclusive)) continue;
      if (i > k) i = k;
      Rational w(i, k);
      w.canonicalize();
      sum += w * (*p.init)[y];
    }
    return sum;
  };
  if (variant == NStepVariant::Literal) {
    // exists l, for all k: alpha_k >= r - 1/l. l = 1 is the weakest demand
    // (slack r - 1 <= 0) and alpha_1 = 0 is the least alpha, so the bounded
    // sweep below already decides the infinite conjunction.
    Rational need = monus(r, 1);
    for (unsigned k = 1; k <= 16; ++k)
      if (alpha(k, false) < need) return false;
    return true;
  }
  // for all l, exists k: sup_k alpha_k >= r; the sup is attained when k
  // clears every denominator of T(., A)
  mpz_class k = 1;
  for (auto& x : t) k = lcm(k, x.get_den());
  return alpha(k, true) >= r;
}

unsigned recurrence_partial_level(Evaluator& ev, int w, StateSet a, unsigned r_cap, unsigned k_cap) {
  Rational sum = ev.process().init ? ev.init_measure(a) : Rational(contains(a, w) ? 1 : 0);
  for (unsigned m = 1; m <= k_cap; ++m) sum += ev.nstep_measure(m, w, a);
  mpz_class level = sum.get_num() / sum.get_den();
  return level > r_cap ? r_cap : static_cast<unsigned>(level.get_ui());
}

namespace {

// Pointwise validity of a list of formulas, valuation-major order.
std::optional<Counterexample> first_failure(Evaluator& ev, const std::vector<Formula>& fs, std::uint64_t cap) {
  std::set<std::string> names;
  for (auto& f : fs) {
    auto a = atoms(f);
    names.insert(a.begin(), a.end());
  }
  std::optional<Counterexample> out;
  const StateSet all = ev.all();
  for_each_valuation(ev.process().n, {names.begin(), names.end()}, cap, [&](const Valuation& v) {
    for (auto& f : fs) {
      StateSet s = ev.extension(f, v);
      if (s != all) {
        out = Counterexample{v, __builtin_ctzll(all & ~s), f};
        return false;
      }
    }
    return true;
  });
  return out;
}

std::optional<Counterexample> check_formulas(Evaluator& ev, const std::vector<Formula>& fs,
                                             const CorrespondenceOptions& o) {
  if (o.reading == Reading::Global && fs.size() == 1) {
    Formula a, b;
    if (as_imp(fs[0], a, b)) {
      Verdict v = frame_valid_global(ev, a, b, o.cap);
      return v.counterexample;
    }
  }
  return first_failure(ev, fs, o.cap);
}

std::vector<Rational> stationary_thresholds(Evaluator& ev) {
  const Process& p = ev.process();
  std::vector<Rational> pts = ev.critical_values();
  // values of pi T on every set
  Row pt = multiply(Matrix{*p.init}, p.kernel)[0];
  for (StateSet a = 0; a <= ev.all(); ++a) pts.push_back(mass(pt, a));
  std::sort(pts.begin(), pts.end());
  pts.erase(std::unique(pts.begin(), pts.end()), pts.end());
  std::vector<Rational> mids;
  for (std::size_t i = 0; i + 1 < pts.size(); ++i) mids.push_back((pts[i] + pts[i + 1]) / 2);
  pts.insert(pts.end(), mids.begin(), mids.end());
  std::sort(pts.begin(), pts.end());
  return pts;
}

}  // namespace

CorrespondenceReport correspondence_check(PropertyId id, const Process& p, const CorrespondenceOptions& o,
                                          const std::string& process_id) {
  if (!admissible(id, p))
    throw DefinabilityError(property_name(id) + " is only defined on " + admissible_class(id));
  CorrespondenceReport rep;
  rep.process_id = process_id;
  Evaluator ev(p);
  DefiningParams prm;
  prm.n_states = p.n;
  prm.variant = o.variant;
  std::optional<Counterexample> cex;
  switch (id) {
    case PropertyId::MeasurePreserving:
    case PropertyId::Harsanyi:
      prm.thresholds = ev.critical_thresholds();
      cex = first_failure(ev, defining_formulas(id, prm), o.cap);
      break;
    case PropertyId::Ergodic:
    case PropertyId::Irreducible:
    case PropertyId::PurelyProbabilistic:
    case PropertyId::Mixing:
      cex = check_formulas(ev, defining_formulas(id, prm), o);
      break;
    case PropertyId::Stationary: {
      auto thresholds = stationary_thresholds(ev);
      for (StateSet a = 0; a <= ev.all() && !cex; ++a) {
        for (auto& r : thresholds) {
          bool lhs = ev.init_measure(a) >= r;
          if (lhs != stationary_rhs(ev, a, r, o.variant)) {
            cex = Counterexample{{{"p", a}}, 0, init_l(r, p_atom())};
            rep.detail = "threshold " + to_string(r) + ": pi(A) = " + to_string(ev.init_measure(a)) +
                         (lhs ? " reaches it but the right-hand side fails" : " is below it but the right-hand side holds");
            break;
          }
        }
      }
      break;
    }
    case PropertyId::Recurrent: {
      cex = check_formulas(ev, {irr_formula(p.n)}, o);
      if (cex) {
        rep.detail = "irreducibility formula fails";
        break;
      }
      Formula acc = accessible_disjunction(p.n);
      Formula shape = imp(acc, imp(p_atom(), atom("U_infinite")));
      for (StateSet a = 0; a <= ev.all() && !cex; ++a) {
        Valuation v{{"p", a}};
        StateSet ante = ev.extension(acc, v);
        if (o.reading == Reading::Global && ante != ev.all()) continue;
        for (int w : members(a)) {
          if (o.reading == Reading::Pointwise && !contains(ante, w)) continue;
          if (!potential_diverges(p, w, a)) {
            cex = Counterexample{v, w, shape};
            rep.detail = "A is reached from w but U(w, A) is finite";
            break;
          }
        }
      }
      break;
    }
  }
  rep.frame_verdict = !cex.has_value();
  rep.witness = cex;
  rep.oracle_verdict = oracle(id, p);
  rep.agree = rep.frame_verdict == rep.oracle_verdict;
  return rep;
}

namespace {

void for_each_kernel(int n, const std::vector<Row>& rows, const std::function<void(const Matrix&)>& fn) {
  Matrix k(n);
  std::function<void(int)> rec = [&](int i) {
    if (i == n) {
      fn(k);
      return;
    }
    for (auto& r : rows) {
      k[i] = r;
      rec(i + 1);
    }
  };
  rec(0);
}

std::vector<int> identity_map(int n) {
  std::vector<int> f(n);
  for (int i = 0; i < n; ++i) f[i] = i;
  return f;
}

Process circulant(std::mt19937_64& rng, int n, int d) {
  std::vector<int> w(n);
  int total = 0;
  for (auto& x : w) total += (x = std::uniform_int_distribution<int>(0, d)(rng));
  if (total == 0) w[0] = total = 1;
  Process p;
  p.n = n;
  p.kernel.assign(n, Row(n));
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      p.kernel[i][(i + j) % n] = Rational(w[j], total);
      p.kernel[i][(i + j) % n].canonicalize();
    }
  p.map = identity_map(n);
  p.init = Row(n, Rational(1, n));
  return p;
}

}  // namespace

std::vector<Process> exhaustive_processes(PropertyId id, int n, int d) {
  std::vector<Process> out;
  auto grid = distribution_grid(n, d);
  switch (id) {
    case PropertyId::MeasurePreserving:
    case PropertyId::Ergodic:
    case PropertyId::Mixing:
      for (auto& mu : grid)
        for (auto& f : all_maps(n)) {
          Process p = dps(mu, f);
          if (id == PropertyId::Mixing && !is_measure_preserving(p)) continue;
          out.push_back(std::move(p));
        }
      break;
    case PropertyId::Stationary:
    case PropertyId::Irreducible:
    case PropertyId::Recurrent:
      for_each_kernel(n, grid, [&](const Matrix& k) {
        for (auto& pi : grid) {
          Process p;
          p.n = n;
          p.kernel = k;
          p.map = identity_map(n);
          p.init = pi;
          out.push_back(std::move(p));
        }
      });
      break;
    case PropertyId::PurelyProbabilistic:
      for_each_kernel(n, grid, [&](const Matrix& k) {
        for (auto& f : all_maps(n)) out.push_back(Process{n, k, f, std::nullopt});
      });
      break;
    case PropertyId::Harsanyi:
      for_each_kernel(n, grid, [&](const Matrix& k) { out.push_back(Process{n, k, identity_map(n), std::nullopt}); });
      break;
  }
  return out;
}

Process random_admissible(PropertyId id, std::uint64_t seed, int n, int d) {
  std::mt19937_64 rng(seed);
  int choice = static_cast<int>(rng() % 3);
  std::uint64_t sub = rng();
  switch (id) {
    case PropertyId::MeasurePreserving:
      if (choice == 0) return random_dps(sub, n, d);
      if (choice == 1) return random_ads(sub, n, d);
      return random_measure_preserving(sub, n, d);
    case PropertyId::Ergodic:
      return choice == 0 ? random_dps(sub, n, d) : random_ads(sub, n, d);
    case PropertyId::Mixing:
      return random_ads(sub, n, d);
    case PropertyId::Stationary: {
      if (choice == 0) return random_process(sub, n, d, true);
      if (choice == 1) {
        Process p = random_dps(sub, n, d);
        p.init = p.kernel[0];
        return p;
      }
      return circulant(rng, n, d);
    }
    case PropertyId::Irreducible:
    case PropertyId::Recurrent:
      return random_process(sub, n, d, true);
    case PropertyId::PurelyProbabilistic:
      return choice == 0 ? random_pure(sub, n, d) : random_process(sub, n, d, false);
    case PropertyId::Harsanyi:
      return choice == 0 ? random_process(sub, n, d, false) : random_harsanyi(sub, n, d);
  }
  return random_process(sub, n, d, false);
}

ExperimentSummary run_experiment(PropertyId id, const ExperimentConfig& cfg) {
  ExperimentSummary sum;
  sum.property = id;
  sum.mode = cfg.exhaustive ? "exhaustive" : "random";
  auto record = [&](const Process& p, const std::string& pid) {
    auto rep = correspondence_check(id, p, cfg.options, pid);
    ++sum.total;
    if (rep.agree) {
      ++sum.agree;
    } else {
      ++sum.disagree;
      sum.witnesses.push_back(rep);
    }
  };
  if (cfg.exhaustive) {
    auto ps = exhaustive_processes(id, cfg.n_states, cfg.denom_bound);
    for (std::size_t i = 0; i < ps.size(); ++i) record(ps[i], "exhaustive#" + std::to_string(i));
  } else {
    std::mt19937_64 rng(cfg.seed);
    int lo = std::max(1, cfg.min_states), hi = std::max(lo, cfg.n_states);
    for (int i = 0; i < cfg.samples; ++i) {
      int n = lo + static_cast<int>(rng() % static_cast<std::uint64_t>(hi - lo + 1));
      std::uint64_t s = rng();
      record(random_admissible(id, s, n, cfg.denom_bound), "seed " + std::to_string(cfg.seed) + " #" + std::to_string(i));
    }
  }
  return sum;
}

}  // namespace dpl
