#include "dpl/semantics.hpp"

#include <algorithm>
#include <functional>

namespace dpl {

struct Evaluator::Ctx {
  const Valuation& v;
  bool truncated = false;
  const TruncationBounds* b = nullptr;
  std::map<const Node*, StateSet> overrides;  // Iter markers inside a lim template
  std::unordered_map<const Node*, StateSet> memo;
  // per lim template: liminf and limsup of T(w, E_k) for every world
  std::unordered_map<const Node*, std::pair<std::vector<Rational>, std::vector<Rational>>> lim_cache;
};

namespace {

const Rational& ground(const Expr& e) {
  if (!e.is_constant()) throw SemanticsError("threshold '" + e.str() + "' is not ground");
  return e.constant();
}

void collect_iters(const Formula& f, std::vector<Formula>& out) {
  if (f->kind == Kind::Iter) {
    for (auto& g : out)
      if (g.get() == f.get()) return;
    out.push_back(f);
    return;
  }
  if (f->kind == Kind::LimL || f->kind == Kind::LimM) return;
  for (auto& k : f->kids) collect_iters(k, out);
  if (f->fam) {
    for (auto& m : f->fam->members) collect_iters(m, out);
    if (f->fam->tail) collect_iters(f->fam->tail, out);
    if (f->fam->templ) collect_iters(f->fam->templ, out);
  }
}

void collect_threshold_exprs(const Formula& f, std::vector<Expr>& out) {
  if (f->has_threshold()) out.push_back(f->thr);
  for (auto& k : f->kids) collect_threshold_exprs(k, out);
  if (f->fam) {
    for (auto& m : f->fam->members) collect_threshold_exprs(m, out);
    if (f->fam->tail) collect_threshold_exprs(f->fam->tail, out);
    if (f->fam->templ) {
      out.push_back(f->fam->bound);
      collect_threshold_exprs(f->fam->templ, out);
    }
  }
}

void add_midpoints(std::vector<Rational>& pts) {
  std::sort(pts.begin(), pts.end());
  pts.erase(std::unique(pts.begin(), pts.end()), pts.end());
  std::vector<Rational> mids;
  for (std::size_t i = 0; i + 1 < pts.size(); ++i) mids.push_back((pts[i] + pts[i + 1]) / 2);
  pts.insert(pts.end(), mids.begin(), mids.end());
  std::sort(pts.begin(), pts.end());
}

}  // namespace

Evaluator::Evaluator(const Process& p) : p_(p), n_(p.n), full_(full_set(p.n)), powers_(p_) { require_valid(p_); }

const std::vector<Rational>& Evaluator::table_row(unsigned depth, int w) {
  auto& per_world = tables_[depth];
  if (per_world.empty()) per_world.resize(depth == 0 ? 1 : n_);
  auto& t = per_world[depth == 0 ? 0 : w];
  if (t.empty()) {
    const Row& row = depth == 0 ? *p_.init : powers_.power(depth)[w];
    const StateSet count = StateSet(1) << n_;
    t.resize(count);
    for (StateSet s = 1; s < count; ++s) t[s] = t[s & (s - 1)] + row[__builtin_ctzll(s)];
  }
  return t;
}

Rational Evaluator::measure(int w, StateSet s) {
  if (n_ <= 12) return table_row(1, w)[s];
  return mass(p_.kernel[w], s);
}

Rational Evaluator::nstep_measure(unsigned n, int w, StateSet s) {
  if (n == 0) throw SemanticsError("nstep_measure needs n >= 1");
  if (n_ <= 12) return table_row(n, w)[s];
  return mass(powers_.power(n)[w], s);
}

Rational Evaluator::init_measure(StateSet s) const {
  if (!p_.init) throw SemanticsError("initial-distribution operator on a process without init");
  return mass(*p_.init, s);
}

std::vector<Rational> Evaluator::critical_values(const std::set<unsigned>& depths) {
  auto it = critical_.find(depths);
  if (it != critical_.end()) return it->second;
  if (n_ > 16) throw ResourceError("critical value sets need at most 16 states");
  std::set<Rational> vals{0, 1};
  std::set<unsigned> ds = depths;
  ds.erase(0);
  ds.insert(1);
  const StateSet count = StateSet(1) << n_;
  std::vector<Rational> t(count);
  auto sweep = [&](const Row& row) {
    for (StateSet s = 1; s < count; ++s) {
      t[s] = t[s & (s - 1)] + row[__builtin_ctzll(s)];
      vals.insert(t[s]);
    }
  };
  for (unsigned d : ds)
    for (int w = 0; w < n_; ++w) sweep(powers_.power(d)[w]);
  if (p_.init) sweep(*p_.init);
  std::vector<Rational> out(vals.begin(), vals.end());
  critical_[depths] = out;
  return out;
}

std::vector<Rational> Evaluator::critical_thresholds(const std::set<unsigned>& depths) {
  std::vector<Rational> pts = critical_values(depths);
  add_midpoints(pts);
  return pts;
}

StateSet Evaluator::extension(const Formula& f, const Valuation& v) {
  Ctx c{v};
  return eval(f, c);
}

StateSet Evaluator::truncated(const Formula& f, const Valuation& v, const TruncationBounds& b) {
  Ctx c{v, true, &b};
  return eval(f, c);
}

StateSet Evaluator::nstep_closed(unsigned n, const Rational& r, StateSet body) {
  if (n == 0) return init_measure(body) >= r ? full_ : 0;
  StateSet out = 0;
  for (int w = 0; w < n_; ++w)
    if (nstep_measure(n, w, body) >= r) out |= singleton(w);
  return out;
}

StateSet Evaluator::eval(const Formula& f, Ctx& c) {
  auto hit = c.memo.find(f.get());
  if (hit != c.memo.end()) return hit->second;
  StateSet out = 0;
  switch (f->kind) {
    case Kind::Atom: {
      auto it = c.v.find(f->name);
      if (it == c.v.end()) throw SemanticsError("no valuation for atom '" + f->name + "'");
      if (it->second & ~full_) throw SemanticsError("valuation of '" + f->name + "' exceeds the state space");
      out = it->second;
      break;
    }
    case Kind::Neg:
      out = full_ & ~eval(f->body(), c);
      break;
    case Kind::And:
      out = full_;
      for (auto& k : f->kids) out &= eval(k, c);
      break;
    case Kind::BigAnd:
    case Kind::BigOr:
      out = eval_family(f, c);
      break;
    case Kind::L: {
      const Rational& r = ground(f->thr);
      StateSet s = eval(f->body(), c);
      for (int w = 0; w < n_; ++w)
        if (measure(w, s) >= r) out |= singleton(w);
      break;
    }
    case Kind::Next:
      out = preimage(p_, eval(f->body(), c));
      break;
    case Kind::InitL:
      out = init_measure(eval(f->body(), c)) >= ground(f->thr) ? full_ : 0;
      break;
    case Kind::NStepL: {
      const Rational& r = ground(f->thr);
      StateSet s = eval(f->body(), c);
      if (c.truncated) {
        NStepOptions o;
        o.l_cap = c.b->nat_cap;
        o.k_cap = c.b->k_cap;
        out = nstep_literal(f->steps, r, s, o);
      } else {
        out = nstep_closed(f->steps, r, s);
      }
      break;
    }
    case Kind::LimL:
    case Kind::LimM:
      out = eval_lim(f, c);
      break;
    case Kind::Iter: {
      auto it = c.overrides.find(f.get());
      if (it == c.overrides.end()) throw SemanticsError("Iter marker outside a lim template");
      out = it->second;
      break;
    }
  }
  c.memo.emplace(f.get(), out);
  return out;
}

std::vector<Rational> Evaluator::family_points(const Family& fam, bool truncated, const TruncationBounds* b) {
  const Rational& bound = ground(fam.bound);
  auto keep = [&](const Rational& s) { return s >= 0 && (fam.strict ? s < bound : s <= bound); };
  std::vector<Rational> pts;
  if (truncated) {
    for (auto& s : b->grid)
      if (keep(s)) pts.push_back(s);
    return pts;
  }
  std::vector<Expr> exprs;
  collect_threshold_exprs(fam.templ, exprs);
  std::vector<Rational> vals;
  bool have_vals = false;
  std::vector<Rational> cand{0, bound};
  for (auto& e : exprs) {
    if (!e.mentions(fam.hole)) continue;
    // thresholds that also depend on an enclosing family's variable are
    // resolved when that family is instantiated
    if (e.vars().size() != 1) continue;
    if (!have_vals) {
      vals = critical_values(nstep_depths(fam.templ));
      have_vals = true;
    }
    if (e.degree() == 1) {
      Rational a = e.coeff(fam.hole), b0 = e.constant_term();
      for (auto& v : vals) cand.push_back((v - b0) / a);
    } else {
      cand.insert(cand.end(), vals.begin(), vals.end());
    }
  }
  std::vector<Rational> inside;
  for (auto& s : cand)
    if (s >= 0 && s <= bound) inside.push_back(s);
  add_midpoints(inside);
  for (auto& s : inside)
    if (keep(s)) pts.push_back(s);
  return pts;
}

const Formula& Evaluator::instance(const std::shared_ptr<const Family>& fam, const Rational& s) {
  auto key = std::make_pair(fam.get(), s);
  auto it = instances_.find(key);
  if (it != instances_.end()) return it->second;
  if (pinned_.empty() || pinned_.back() != fam) pinned_.push_back(fam);
  Formula inst;
  try {
    inst = substitute_thresholds(fam->templ, {{fam->hole, Expr(s)}});
  } catch (const FormulaError& e) {
    throw SemanticsError(std::string("instantiating a threshold family: ") + e.what());
  }
  return instances_.emplace(key, inst).first->second;
}

StateSet Evaluator::eval_family(const Formula& f, Ctx& c) {
  const bool is_and = f->kind == Kind::BigAnd;
  const Family& fam = *f->fam;
  StateSet acc = is_and ? full_ : 0;
  auto fold = [&](StateSet s) { acc = is_and ? (acc & s) : (acc | s); };
  switch (fam.kind) {
    case FamilyKind::Finite:
      for (auto& m : fam.members) fold(eval(m, c));
      break;
    case FamilyKind::Nat: {
      std::size_t limit = c.truncated ? std::min<std::size_t>(fam.members.size(), c.b->nat_cap + 1) : fam.members.size();
      for (std::size_t i = 0; i < limit; ++i) fold(eval(fam.members[i], c));
      if (!c.truncated || c.b->nat_cap >= fam.members.size()) fold(eval(fam.tail, c));
      break;
    }
    case FamilyKind::Threshold:
      for (auto& s : family_points(fam, c.truncated, c.b)) fold(eval(instance(f->fam, s), c));
      break;
  }
  return acc;
}

StateSet Evaluator::eval_lim(const Formula& f, Ctx& c) {
  const bool lower = f->kind == Kind::LimL;
  const Rational& t = ground(f->thr);
  const Formula& templ = f->body();
  std::vector<Formula> iters;
  collect_iters(templ, iters);
  std::vector<StateSet> cur;
  for (auto& it : iters) cur.push_back(eval(it->body(), c));
  // the tuple (f^-k S_j)_j is eventually periodic
  std::vector<std::vector<StateSet>> seq;
  std::map<std::vector<StateSet>, std::size_t> seen;
  while (!seen.count(cur)) {
    seen[cur] = seq.size();
    seq.push_back(cur);
    for (auto& s : cur) s = preimage(p_, s);
  }
  const std::size_t start = seen[cur], period = seq.size() - start;
  auto extension_at = [&](std::size_t idx) {
    Ctx sub{c.v, c.truncated, c.b};
    sub.overrides = c.overrides;
    for (std::size_t j = 0; j < iters.size(); ++j) sub.overrides[iters[j].get()] = seq[idx][j];
    return eval(templ, sub);
  };
  StateSet out = 0;
  if (!c.truncated) {
    auto cached = c.lim_cache.find(templ.get());
    if (cached == c.lim_cache.end()) {
      std::vector<StateSet> ext;
      for (std::size_t k = start; k < seq.size(); ++k) ext.push_back(extension_at(k));
      std::vector<Rational> lo(n_), hi(n_);
      for (int w = 0; w < n_; ++w) {
        lo[w] = hi[w] = measure(w, ext[0]);
        for (std::size_t i = 1; i < ext.size(); ++i) {
          Rational m = measure(w, ext[i]);
          if (m < lo[w]) lo[w] = m;
          if (m > hi[w]) hi[w] = m;
        }
      }
      cached = c.lim_cache.emplace(templ.get(), std::make_pair(std::move(lo), std::move(hi))).first;
    }
    for (int w = 0; w < n_; ++w)
      if (lower ? cached->second.first[w] >= t : cached->second.second[w] <= t) out |= singleton(w);
    return out;
  }
  // literal truncation: for n <= N there is m <= K with every k in [m, K] within 1/n
  const unsigned K = c.b->k_cap, N = c.b->nat_cap;
  std::map<std::size_t, StateSet> by_index;
  std::vector<StateSet> ext(K + 1);
  for (unsigned k = 0; k <= K; ++k) {
    std::size_t idx = k < seq.size() ? k : start + (k - start) % period;
    auto it = by_index.find(idx);
    if (it == by_index.end()) it = by_index.emplace(idx, extension_at(idx)).first;
    ext[k] = it->second;
  }
  for (int w = 0; w < n_; ++w) {
    std::vector<Rational> suffix(K + 1);
    for (int k = static_cast<int>(K); k >= 0; --k) {
      Rational m = measure(w, ext[k]);
      suffix[k] = (k == static_cast<int>(K)) ? m : (lower ? std::min(m, suffix[k + 1]) : std::max(m, suffix[k + 1]));
    }
    bool ok = true;
    for (unsigned n = 1; n <= N && ok; ++n) {
      Rational th = lower ? monus(t, Rational(1, n)) : t + Rational(1, n);
      bool some = false;
      for (unsigned m = 0; m <= K && !some; ++m) some = lower ? suffix[m] >= th : suffix[m] <= th;
      ok = some;
    }
    if (ok) out |= singleton(w);
  }
  return out;
}

// ---------------------------------------------------------------- n-step literal reading

namespace {

struct NStepRun {
  Evaluator& ev;
  const NStepOptions& o;
  int n;
  bool exact;
  Rational slack;               // 1/l_cap, or 0 in exact mode
  std::vector<Rational> grid;   // descending, ends with 0
  std::map<std::pair<unsigned, StateSet>, std::vector<Rational>> memo;

  Rational slack_at(unsigned m) const { return m >= 2 ? slack : Rational(0); }

  // y is in Lit(m, x, s) iff values(m, s)[y] >= x - slack_at(m)
  const std::vector<Rational>& values(unsigned m, StateSet s) {
    auto key = std::make_pair(m, s);
    auto it = memo.find(key);
    if (it != memo.end()) return it->second;
    std::vector<Rational> out(n);
    if (m == 1) {
      for (int y = 0; y < n; ++y) out[y] = ev.measure(y, s);
    } else {
      out = score(m, s);
    }
    return memo.emplace(key, std::move(out)).first->second;
  }

  Rational best(const std::vector<Rational>& vals, int w, const Rational& sl) const {
    for (auto& v : grid)
      if (vals[w] >= monus(v, sl)) return v;
    return 0;
  }

  std::vector<Rational> score(unsigned m, StateSet b) {
    const std::vector<Rational> inner = values(m - 1, b);
    const Rational inner_slack = slack_at(m - 1);
    std::vector<mpz_class> ks;
    if (exact) {
      mpz_class l = 1;
      for (auto& x : inner) l = lcm(l, x.get_den());
      ks.push_back(l);
    } else {
      for (unsigned k = 1; k <= o.k_cap; ++k) ks.push_back(k);
    }
    std::vector<Rational> result(n, Rational(0));
    for (auto& k : ks) {
      // bucket index of y: largest j <= k with y in Lit(m-1, j/k)
      std::map<mpz_class, StateSet> buckets;
      for (int y = 0; y < n; ++y) {
        Rational scaled = (inner[y] + inner_slack) * Rational(k);
        mpz_class j = scaled.get_num() / scaled.get_den();
        if (j > k) j = k;
        buckets[j] |= singleton(y);
      }
      std::vector<Rational> sum(n, Rational(0));
      for (auto& [i, a] : buckets) {
        if (i == 0) continue;
        if (i == k && o.variant == NStepVariant::Literal) continue;
        Rational weight(i, k);
        weight.canonicalize();
        const bool corrected = o.variant == NStepVariant::Corrected;
        const std::vector<Rational>& outer = corrected ? values(1, a) : values(m - 1, a);
        Rational sl = corrected ? Rational(0) : slack_at(m - 1);
        for (int w = 0; w < n; ++w) sum[w] += weight * best(outer, w, sl);
      }
      // empty buckets still contribute under truncation slack
      if (o.variant == NStepVariant::Literal && m - 1 >= 2 && slack > 0) {
        mpz_class top = k - 1;
        const std::vector<Rational>& outer = values(m - 1, 0);
        for (mpz_class i = 1; i <= top; ++i) {
          if (buckets.count(i)) continue;
          Rational weight(i, k);
          weight.canonicalize();
          for (int w = 0; w < n; ++w) sum[w] += weight * best(outer, w, slack);
        }
      }
      for (int w = 0; w < n; ++w) result[w] = std::max(result[w], sum[w]);
    }
    return result;
  }
};

}  // namespace

StateSet Evaluator::nstep_literal(unsigned n, const Rational& r, StateSet body, const NStepOptions& o) {
  if (n <= 1) return nstep_closed(n, r, body);
  if (o.k_cap != 0 && o.l_cap == 0) throw SemanticsError("n-step expansion caps must be positive");
  NStepRun run{*this, o, n_, o.k_cap == 0, o.k_cap == 0 ? Rational(0) : Rational(1, o.l_cap), {}, {}};
  std::vector<Rational> g = o.grid;
  if (g.empty()) {
    std::set<unsigned> depths;
    for (unsigned d = 1; d <= n; ++d) depths.insert(d);
    g = critical_values(depths);
  }
  g.push_back(0);
  std::sort(g.begin(), g.end(), [](const Rational& a, const Rational& b) { return a > b; });
  g.erase(std::unique(g.begin(), g.end()), g.end());
  run.grid = std::move(g);
  const std::vector<Rational>& sc = run.values(n, body);
  StateSet out = 0;
  Rational th = monus(r, run.slack);
  for (int w = 0; w < n_; ++w)
    if (sc[w] >= th) out |= singleton(w);
  return out;
}

// ---------------------------------------------------------------- free functions

StateSet extension(const Model& m, const Formula& f) {
  Evaluator ev(m.process);
  return ev.extension(f, m.valuation);
}

bool satisfies(const Model& m, int w, const Formula& f) {
  if (w < 0 || w >= m.process.n) throw SemanticsError("world out of range");
  return contains(extension(m, f), w);
}

StateSet truncated_eval(const Model& m, const Formula& f, const TruncationBounds& b) {
  Evaluator ev(m.process);
  return ev.truncated(f, m.valuation, b);
}

void for_each_valuation(int n_states, const std::vector<std::string>& atoms, std::uint64_t cap,
                        const std::function<bool(const Valuation&)>& fn) {
  const std::size_t k = atoms.size();
  if (static_cast<std::uint64_t>(n_states) * k >= 64 ||
      (k > 0 && (std::uint64_t(1) << (n_states * k)) > cap))
    throw ResourceError("(2^" + std::to_string(n_states) + ")^" + std::to_string(k) +
                        " valuations exceed the model cap of " + std::to_string(cap));
  const StateSet top = full_set(n_states);
  Valuation v;
  for (auto& a : atoms) v[a] = 0;
  for (;;) {
    if (!fn(v)) return;
    // increment with the last atom least significant
    std::size_t i = k;
    while (i > 0) {
      StateSet& s = v[atoms[i - 1]];
      if (s < top) {
        ++s;
        break;
      }
      s = 0;
      --i;
    }
    if (i == 0) return;
  }
}

namespace {

std::vector<std::string> sorted_atoms(const Formula& f) {
  auto s = atoms(f);
  return {s.begin(), s.end()};
}

}  // namespace

Verdict frame_valid(Evaluator& ev, const Formula& f, std::uint64_t cap) {
  Verdict out;
  const StateSet all = ev.all();
  for_each_valuation(ev.process().n, sorted_atoms(f), cap, [&](const Valuation& v) {
    StateSet s = ev.extension(f, v);
    if (s == all) return true;
    out.valid = false;
    out.counterexample = Counterexample{v, __builtin_ctzll(all & ~s), f};
    return false;
  });
  return out;
}

Verdict frame_valid(const Process& p, const Formula& f, std::uint64_t cap) {
  Evaluator ev(p);
  return frame_valid(ev, f, cap);
}

Verdict frame_valid_global(Evaluator& ev, const Formula& antecedent, const Formula& consequent, std::uint64_t cap) {
  Verdict out;
  const StateSet all = ev.all();
  auto as = atoms(antecedent), cs = atoms(consequent);
  as.insert(cs.begin(), cs.end());
  std::vector<std::string> names(as.begin(), as.end());
  for_each_valuation(ev.process().n, names, cap, [&](const Valuation& v) {
    if (ev.extension(antecedent, v) != all) return true;
    StateSet s = ev.extension(consequent, v);
    if (s == all) return true;
    out.valid = false;
    out.counterexample = Counterexample{v, __builtin_ctzll(all & ~s), imp(antecedent, consequent)};
    return false;
  });
  return out;
}

Rational archimedean_witness(Evaluator& ev, const Valuation& v, const Formula& phi, const Rational& r) {
  if (r <= 0) throw SemanticsError("no threshold below 0");
  StateSet e = ev.extension(phi, v);
  Rational below = 0;
  for (int w = 0; w < ev.process().n; ++w) {
    Rational m = ev.measure(w, e);
    if (m < r && m > below) below = m;
  }
  return (below + r) / 2;
}

}  // namespace dpl
