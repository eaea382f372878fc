#include "dpl/proofs.hpp"

#include <functional>
#include <random>

#include "dpl/semantics.hpp"

namespace dpl {

namespace {

const std::vector<std::pair<System, std::string>> kSystems = {
    {System::DPL, "H_DPL"}, {System::M, "H_M"}, {System::Pure, "H_Pure"}, {System::ADS, "H_ADS"}};

const std::vector<std::pair<RuleKind, std::string>> kRules = {
    {RuleKind::Axiom, "Axiom"}, {RuleKind::Assumption, "Assumption"}, {RuleKind::Theorem, "Theorem"},
    {RuleKind::MP, "MP"},       {RuleKind::NecL1, "Nec_L1"},         {RuleKind::NecNext, "Nec_Next"},
    {RuleKind::GArch, "GArch"}};

struct AxiomScheme {
  Formula pattern;
  std::optional<Constraint> side;
};

const std::map<std::string, AxiomScheme>& schemes() {
  static const std::map<std::string, AxiomScheme> s = [] {
    auto c = [](const char* t) { return std::optional<Constraint>(parse_constraint(t)); };
    std::map<std::string, AxiomScheme> m;
    m["FA1"] = {parse("L[0] false"), std::nullopt};
    m["FA2"] = {parse("L[r] !phi -> !L[s] phi"), c("r + s > 1")};
    m["FA3"] = {parse("L[r] (phi & psi) & L[s] (phi & !psi) -> L[r + s] phi"), c("r + s <= 1")};
    m["FA4"] = {parse("!L[r] (phi & psi) & !L[s] (phi & !psi) -> !L[r + s] phi"), c("r + s <= 1")};
    m["Mono"] = {parse("L[1] (phi -> psi) -> (L[r] phi -> L[r] psi)"), std::nullopt};
    m["FuncO"] = {parse("O !phi <-> !O phi"), std::nullopt};
    m["ConjO"] = {parse("O (phi & psi) <-> O phi & O psi"), std::nullopt};
    m["M"] = {parse("L[r] O phi <-> O L[r] phi"), std::nullopt};
    m["Id"] = {parse("O phi <-> phi"), std::nullopt};
    m["H1"] = {parse("L[r] phi -> L[1] L[r] phi"), std::nullopt};
    m["H2"] = {parse("!L[r] phi -> L[1] !L[r] phi"), std::nullopt};
    return m;
  }();
  return s;
}

// ---------------------------------------------------------------- matching

struct Unifier {
  std::set<std::string> formula_vars, threshold_vars;
  const ConstraintSet& cs;
  Substitution sub;
  std::vector<std::pair<Expr, Expr>> pending;
  std::string reason;

  bool fail(const std::string& r) {
    if (reason.empty()) reason = r;
    return false;
  }

  bool thr(const Expr& pat, const Expr& cand) {
    if (pat.degree() == 1 && pat.terms().size() == 1 && pat.vars().size() == 1) {
      const std::string v = *pat.vars().begin();
      if (threshold_vars.count(v) && pat.coeff(v) == 1 && !sub.thresholds.count(v)) {
        sub.thresholds[v] = cand;
        return true;
      }
    }
    pending.emplace_back(pat, cand);
    return true;
  }

  bool go(const Formula& p, const Formula& c) {
    if (p->kind == Kind::Atom && formula_vars.count(p->name)) {
      auto it = sub.formulas.find(p->name);
      if (it == sub.formulas.end()) {
        sub.formulas[p->name] = c;
        return true;
      }
      return equal(it->second, c) || fail(p->name + " is bound to two different formulas");
    }
    if (p->kind != c->kind) return fail("shape mismatch: expected " + print(p) + ", found " + print(c));
    switch (p->kind) {
      case Kind::Atom:
        return p->name == c->name || fail("atom " + c->name + " where " + p->name + " was expected");
      case Kind::NStepL:
        if (p->steps != c->steps) return fail("step count mismatch");
        [[fallthrough]];
      case Kind::L:
      case Kind::InitL:
      case Kind::LimL:
      case Kind::LimM:
        if (!thr(p->thr, c->thr)) return false;
        break;
      case Kind::BigAnd:
      case Kind::BigOr:
        if (p->fam->kind != FamilyKind::Finite || c->fam->kind != FamilyKind::Finite)
          return equal(p, c) || fail("family mismatch");
        if (p->fam->members.size() != c->fam->members.size()) return fail("family size mismatch");
        for (std::size_t i = 0; i < p->fam->members.size(); ++i)
          if (!go(p->fam->members[i], c->fam->members[i])) return false;
        return true;
      default:
        break;
    }
    if (p->kids.size() != c->kids.size()) return fail("arity mismatch: expected " + print(p) + ", found " + print(c));
    for (std::size_t i = 0; i < p->kids.size(); ++i)
      if (!go(p->kids[i], c->kids[i])) return false;
    return true;
  }

  bool finish() {
    for (auto& v : threshold_vars)
      if (!sub.thresholds.count(v)) {
        bool used = false;
        for (auto& [pat, cand] : pending) used = used || pat.mentions(v);
        if (used) return fail("threshold variable " + v + " cannot be determined");
      }
    for (auto& [pat, cand] : pending) {
      Expr inst = pat.substitute(sub.thresholds);
      if (inst == cand) continue;
      if (inst.degree() <= 1 && cand.degree() <= 1 && entails(cs, {inst, Rel::Eq, cand})) continue;
      return fail("threshold " + cand.str() + " does not match " + inst.str());
    }
    return true;
  }
};

MatchResult unify(const Formula& pattern, const Formula& cand, const std::set<std::string>& fvars,
                  const std::set<std::string>& tvars, const ConstraintSet& cs) {
  Unifier u{fvars, tvars, cs, {}, {}, {}};
  MatchResult r;
  r.ok = u.go(pattern, cand) && u.finish();
  r.reason = u.reason;
  r.subst = u.sub;
  return r;
}

Constraint substitute(const Constraint& k, const std::map<std::string, Expr>& s) {
  return {k.lhs.substitute(s), k.rel, k.rhs.substitute(s)};
}

// ----------------------------------------------------------------- checking

struct Ctx {
  System sys;
  std::set<std::string> metavars;
  ConstraintSet cs;
  const std::vector<Formula>* assumptions;
  const Library* lib;
};

struct Failure {
  int step;
  std::string rule, reason;
};

std::optional<std::string> well_formed(const Formula& f, const Ctx& c) {
  std::optional<std::string> bad;
  std::function<void(const Formula&)> walk = [&](const Formula& g) {
    if (bad) return;
    switch (g->kind) {
      case Kind::InitL:
      case Kind::NStepL:
      case Kind::LimL:
      case Kind::LimM:
      case Kind::Iter:
        bad = "operator outside the finitary language in " + print(g);
        return;
      case Kind::BigAnd:
      case Kind::BigOr:
        if (g->fam->kind != FamilyKind::Finite) {
          bad = "infinitary family in " + print(g);
          return;
        }
        for (auto& m : g->fam->members) walk(m);
        return;
      case Kind::L: {
        const Expr& t = g->thr;
        if (t.degree() > 1) {
          bad = "threshold " + t.str() + " is not affine";
          return;
        }
        for (auto& v : t.vars())
          if (!c.metavars.count(v)) {
            bad = "undeclared metavariable " + v;
            return;
          }
        if (!t.is_constant() && (!entails(c.cs, {t, Rel::Ge, Expr(0)}) || !entails(c.cs, {t, Rel::Le, Expr(1)}))) {
          bad = "threshold " + t.str() + " may leave [0,1]";
          return;
        }
        break;
      }
      default:
        break;
    }
    for (auto& k : g->kids) walk(k);
  };
  walk(f);
  return bad;
}

std::optional<Failure> check_steps(const std::vector<Step>& steps, const Ctx& c);

std::optional<std::string> check_axiom(const Step& s, const Ctx& c) {
  auto names = axiom_names(c.sys);
  if (std::find(names.begin(), names.end(), s.axiom) == names.end())
    return "axiom " + s.axiom + " is not part of " + system_name(c.sys);
  auto m = match_axiom(c.sys, s.axiom, s.formula, c.cs);
  if (!m.ok) return m.reason;
  return std::nullopt;
}

std::optional<std::string> check_theorem(const Step& s, const Ctx& c) {
  auto it = c.lib->find(s.lemma);
  if (it == c.lib->end()) return "unknown or unchecked lemma " + s.lemma;
  const Derivation& lem = it->second;
  if (!lem.assumptions.empty()) return "lemma " + s.lemma + " has assumptions and cannot be cited";
  if (!system_includes(c.sys, lem.system))
    return "lemma " + s.lemma + " belongs to " + system_name(lem.system) + ", not available in " + system_name(c.sys);
  auto fv = atoms(lem.conclusion());
  std::set<std::string> tv(lem.metavars.begin(), lem.metavars.end());
  auto m = unify(lem.conclusion(), s.formula, fv, tv, c.cs);
  if (!m.ok) return "not an instance of " + s.lemma + ": " + m.reason;
  for (auto& v : lem.metavars) {
    auto b = m.subst.thresholds.find(v);
    if (b == m.subst.thresholds.end()) return "metavariable " + v + " of " + s.lemma + " is not determined";
    if (!entails(c.cs, {b->second, Rel::Ge, Expr(0)}) || !entails(c.cs, {b->second, Rel::Le, Expr(1)}))
      return "instance " + v + " := " + b->second.str() + " may leave [0,1]";
  }
  for (auto& k : lem.constraints) {
    Constraint inst = substitute(k, m.subst.thresholds);
    if (!entails(c.cs, inst)) return "constraint " + inst.str() + " of " + s.lemma + " is not entailed";
  }
  return std::nullopt;
}

std::optional<Failure> check_garch(const Step& s, const Ctx& c) {
  auto fail = [&](const std::string& r) { return std::optional<Failure>(Failure{s.id, "GArch", r}); };
  if (!s.garch) return fail("missing GArch payload");
  const GArchPayload& g = *s.garch;
  if (c.sys != System::DPL && g.exponent != 0)
    return fail("GArch_r of " + system_name(c.sys) + " allows only exponent 0");
  if (g.param.empty() || c.metavars.count(g.param)) return fail("parameter " + g.param + " is not fresh");
  for (const Expr& e : g.chain)
    for (auto& v : e.vars())
      if (!c.metavars.count(v)) return fail("undeclared metavariable " + v + " in chain");
  for (auto& v : g.target.vars())
    if (!c.metavars.count(v)) return fail("undeclared metavariable " + v + " in target");

  Formula psi, rhs;
  if (!as_imp(s.formula, psi, rhs)) return fail("conclusion is not an implication");
  Formula cur = rhs;
  for (unsigned i = 0; i < g.exponent; ++i) {
    if (cur->kind != Kind::Next) return fail("conclusion lacks O^" + std::to_string(g.exponent));
    cur = cur->body();
  }
  for (const Expr& r : g.chain) {
    if (cur->kind != Kind::L || cur->thr != r) return fail("conclusion does not carry the chain");
    cur = cur->body();
  }
  if (cur->kind != Kind::L || cur->thr != g.target) return fail("conclusion threshold is not the target " + g.target.str());
  Formula phi = cur->body();

  Ctx sub = c;
  sub.metavars.insert(g.param);
  sub.cs.bounded.insert(g.param);
  sub.cs.items.push_back({Expr::var(g.param), Rel::Lt, g.target});
  if (g.steps.empty()) return fail("empty sub-derivation");
  if (auto f = check_steps(g.steps, sub)) return f;
  std::vector<Expr> chain = g.chain;
  chain.push_back(Expr::var(g.param));
  Formula expected = imp(psi, next(L_chain(chain, phi), g.exponent));
  if (!equal(g.steps.back().formula, expected))
    return fail("sub-derivation proves " + print(g.steps.back().formula) + ", expected " + print(expected));
  return std::nullopt;
}

std::optional<Failure> check_steps(const std::vector<Step>& steps, const Ctx& c) {
  std::map<int, Formula> seen;
  const bool scoped = !c.assumptions->empty();
  for (const Step& s : steps) {
    const std::string rn = rule_name(s.rule);
    auto fail = [&](const std::string& r) { return std::optional<Failure>(Failure{s.id, rn, r}); };
    if (!s.formula) return fail("missing formula");
    if (seen.count(s.id)) return fail("duplicate step id");
    if (auto bad = well_formed(s.formula, c)) return fail(*bad);
    std::vector<Formula> prem;
    for (int id : s.premises) {
      auto it = seen.find(id);
      if (it == seen.end()) return fail("premise " + std::to_string(id) + " does not refer to an earlier step");
      prem.push_back(it->second);
    }
    auto arity = [&](std::size_t n) { return s.premises.size() == n; };
    std::optional<std::string> err;
    switch (s.rule) {
      case RuleKind::Axiom:
        if (!arity(0)) err = "axioms take no premises";
        else if (s.axiom == "Taut") {
          if (!tautology(s.formula)) err = "not a propositional tautology";
        } else {
          err = check_axiom(s, c);
        }
        break;
      case RuleKind::Assumption:
        if (s.index < 0 || s.index >= static_cast<int>(c.assumptions->size()))
          err = "assumption index out of range";
        else if (!equal((*c.assumptions)[s.index], s.formula))
          err = "formula differs from assumption " + std::to_string(s.index);
        break;
      case RuleKind::Theorem:
        err = arity(0) ? check_theorem(s, c) : "theorem citations take no premises";
        break;
      case RuleKind::MP: {
        Formula a, b;
        if (!arity(2))
          err = "MP needs two premises";
        else if (!as_imp(prem[0], a, b))
          err = "first premise is not an implication";
        else if (!equal(a, prem[1]))
          err = "second premise does not match the antecedent";
        else if (!equal(b, s.formula))
          err = "conclusion does not match the consequent";
        break;
      }
      case RuleKind::NecL1:
      case RuleKind::NecNext:
        if (scoped)
          err = "necessitation under assumptions";
        else if (!arity(1))
          err = "necessitation needs one premise";
        else if (!equal(s.formula, s.rule == RuleKind::NecL1 ? L(1, prem[0]) : next(prem[0])))
          err = "conclusion is not the necessitation of the premise";
        break;
      case RuleKind::GArch:
        if (!arity(0)) {
          err = "GArch premises are given by the sub-derivation";
          break;
        }
        if (auto f = check_garch(s, c)) return f;
        break;
    }
    if (err) return fail(*err);
    seen[s.id] = s.formula;
  }
  return std::nullopt;
}

// -------------------------------------------------------------- tautology

enum class TV { F, T, U };

struct Skeleton {
  FormulaSet atoms;
  std::map<Formula, int, FormulaLess> index;

  static bool boolean(const Formula& f) {
    return f->kind == Kind::Neg || f->kind == Kind::And ||
           ((f->kind == Kind::BigAnd || f->kind == Kind::BigOr) && f->fam->kind == FamilyKind::Finite);
  }

  void collect(const Formula& f) {
    if (!boolean(f)) {
      if (!index.count(f)) index.emplace(f, static_cast<int>(index.size()));
      return;
    }
    if (f->kind == Kind::BigAnd || f->kind == Kind::BigOr)
      for (auto& m : f->fam->members) collect(m);
    else
      for (auto& k : f->kids) collect(k);
  }

  TV eval(const Formula& f, const std::vector<TV>& a) const {
    if (!boolean(f)) return a[index.at(f)];
    if (f->kind == Kind::Neg) {
      TV v = eval(f->body(), a);
      return v == TV::U ? TV::U : (v == TV::T ? TV::F : TV::T);
    }
    const bool is_or = f->kind == Kind::BigOr;
    const auto& xs = f->kind == Kind::And ? f->kids : f->fam->members;
    TV acc = is_or ? TV::F : TV::T;
    for (auto& x : xs) {
      TV v = eval(x, a);
      if (v == (is_or ? TV::T : TV::F)) return v;
      if (v == TV::U) acc = TV::U;
    }
    return acc;
  }
};

bool split(const Skeleton& sk, const Formula& f, std::vector<TV>& a, std::size_t next_var) {
  TV v = sk.eval(f, a);
  if (v != TV::U) return v == TV::T;
  while (next_var < a.size() && a[next_var] != TV::U) ++next_var;
  for (TV choice : {TV::F, TV::T}) {
    a[next_var] = choice;
    bool ok = split(sk, f, a, next_var + 1);
    a[next_var] = TV::U;
    if (!ok) return false;
  }
  return true;
}

}  // namespace

std::string system_name(System s) {
  for (auto& [k, v] : kSystems)
    if (k == s) return v;
  return "?";
}

std::optional<System> system_from_name(const std::string& name) {
  for (auto& [k, v] : kSystems)
    if (v == name) return k;
  return std::nullopt;
}

bool system_includes(System outer, System inner) {
  if (outer == inner || inner == System::DPL) return true;
  return inner == System::M && (outer == System::Pure || outer == System::ADS);
}

std::vector<std::string> axiom_names(System s) {
  std::vector<std::string> out = {"Taut", "FA1", "FA2", "FA3", "FA4", "Mono", "FuncO", "ConjO"};
  if (s != System::DPL) out.push_back("M");
  if (s == System::Pure) out.push_back("Id");
  if (s == System::ADS) {
    out.push_back("H1");
    out.push_back("H2");
  }
  return out;
}

std::string rule_name(RuleKind r) {
  for (auto& [k, v] : kRules)
    if (k == r) return v;
  return "?";
}

std::optional<RuleKind> rule_from_name(const std::string& name) {
  for (auto& [k, v] : kRules)
    if (v == name) return k;
  return std::nullopt;
}

bool tautology(const Formula& f) {
  Skeleton sk;
  sk.collect(f);
  const std::size_t n = sk.index.size();
  std::vector<TV> a(n, TV::U);
  if (n > 20) return split(sk, f, a, 0);
  for (std::uint64_t bits = 0; bits < (std::uint64_t(1) << n); ++bits) {
    for (std::size_t i = 0; i < n; ++i) a[i] = (bits >> i) & 1u ? TV::T : TV::F;
    if (sk.eval(f, a) != TV::T) return false;
  }
  return true;
}

MatchResult match_axiom(System sys, const std::string& name, const Formula& candidate, const ConstraintSet& c) {
  MatchResult r;
  auto names = axiom_names(sys);
  if (std::find(names.begin(), names.end(), name) == names.end()) {
    r.reason = "axiom " + name + " is not part of " + system_name(sys);
    return r;
  }
  if (name == "Taut") {
    r.ok = tautology(candidate);
    if (!r.ok) r.reason = "not a propositional tautology";
    return r;
  }
  const AxiomScheme& sc = schemes().at(name);
  r = unify(sc.pattern, candidate, {"phi", "psi"}, {"r", "s"}, c);
  if (!r.ok) {
    r.reason = "not an instance of " + name + ": " + r.reason;
    return r;
  }
  if (sc.side) {
    Constraint inst = substitute(*sc.side, r.subst.thresholds);
    if (!entails(c, inst)) {
      r.ok = false;
      r.reason = "side condition " + inst.str() + " is not entailed";
    }
  }
  return r;
}

std::string CheckResult::message() const {
  if (ok) return "ok";
  return "step " + std::to_string(step) + " (" + rule + "): " + reason;
}

CheckResult check_derivation(const Derivation& d, const Library& lib) {
  CheckResult res;
  auto fail = [&](int step, const std::string& rule, const std::string& reason) {
    res.ok = false;
    res.step = step;
    res.rule = rule;
    res.reason = reason;
    return res;
  };
  if (d.steps.empty()) return fail(0, "-", "no steps");
  Ctx c{d.system, {d.metavars.begin(), d.metavars.end()}, {}, &d.assumptions, &lib};
  c.cs.bounded = c.metavars;
  c.cs.items = d.constraints;
  for (auto& k : d.constraints)
    for (auto& v : (k.lhs - k.rhs).vars())
      if (!c.metavars.count(v)) return fail(0, "-", "constraint mentions undeclared metavariable " + v);
  if (!satisfiable(c.cs)) return fail(0, "-", "constraints are unsatisfiable");
  for (std::size_t i = 0; i < d.assumptions.size(); ++i)
    if (auto bad = well_formed(d.assumptions[i], c)) return fail(0, "-", "assumption " + std::to_string(i) + ": " + *bad);
  if (auto f = check_steps(d.steps, c)) return fail(f->step, f->rule, f->reason);
  return res;
}

bool LibraryReport::all_ok() const {
  for (auto& [n, r] : results)
    if (!r.ok) return false;
  return true;
}

LibraryReport check_all(const std::vector<Derivation>& lemmas, const Library& base) {
  LibraryReport rep;
  rep.accepted = base;
  for (auto& d : lemmas) {
    CheckResult r;
    if (rep.accepted.count(d.name)) {
      r.ok = false;
      r.rule = "-";
      r.reason = "duplicate lemma name";
    } else {
      r = check_derivation(d, rep.accepted);
    }
    if (r.ok) rep.accepted.emplace(d.name, d);
    rep.results.emplace_back(d.name, r);
  }
  return rep;
}

std::vector<std::map<std::string, Rational>> ground_assignments(const Derivation& d, const std::vector<Rational>& grid) {
  std::vector<std::map<std::string, Rational>> out;
  std::map<std::string, Rational> env;
  std::function<void(std::size_t)> rec = [&](std::size_t i) {
    if (i == d.metavars.size()) {
      for (auto& k : d.constraints)
        if (!k.holds(env)) return;
      out.push_back(env);
      return;
    }
    for (auto& v : grid) {
      env[d.metavars[i]] = v;
      rec(i + 1);
    }
  };
  rec(0);
  return out;
}

Process random_class_process(System s, std::uint64_t seed, int n, int d) {
  switch (s) {
    case System::DPL:
      return random_process(seed, n, d, false);
    case System::M:
      return random_measure_preserving(seed, n, d);
    case System::Pure:
      return random_pure(seed, n, d);
    case System::ADS:
      return random_ads(seed, n, d);
  }
  return random_process(seed, n, d, false);
}

SoundnessReport soundness_cross_check(const Derivation& d, int processes, std::uint64_t seed, int max_states,
                                      const std::vector<Rational>& grid) {
  SoundnessReport rep;
  auto envs = ground_assignments(d, grid);
  std::mt19937_64 rng(seed);
  for (int i = 0; i < processes && rep.violations == 0; ++i) {
    int n = 1 + static_cast<int>(rng() % static_cast<std::uint64_t>(max_states));
    Process p = random_class_process(d.system, rng(), n, 4);
    Evaluator ev(p);
    for (auto& env : envs) {
      std::map<std::string, Expr> s;
      for (auto& [k, v] : env) s[k] = Expr(v);
      Formula concl = substitute_thresholds(d.conclusion(), s);
      std::vector<Formula> gamma;
      std::set<std::string> names = atoms(concl);
      for (auto& a : d.assumptions) {
        gamma.push_back(substitute_thresholds(a, s));
        auto more = atoms(gamma.back());
        names.insert(more.begin(), more.end());
      }
      ++rep.instances;
      for_each_valuation(n, {names.begin(), names.end()}, kDefaultModelCap, [&](const Valuation& v) {
        StateSet holds = ev.all();
        for (auto& g : gamma) holds &= ev.extension(g, v);
        StateSet bad = holds & ~ev.extension(concl, v);
        if (bad) {
          ++rep.violations;
          std::string val;
          for (auto& [a, set] : v) val += " " + a + "=" + set_string(set, n);
          rep.first_violation = print(concl) + " fails at world " + std::to_string(__builtin_ctzll(bad)) + " with" + val;
          return false;
        }
        return true;
      });
      if (rep.violations) break;
    }
  }
  return rep;
}

}  // namespace dpl
