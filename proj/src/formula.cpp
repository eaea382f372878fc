#include "dpl/formula.hpp"

#include <algorithm>
#include <functional>

namespace dpl {

namespace {

std::size_t mix(std::size_t h, std::size_t v) {
  return h ^ (v + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2));
}

std::size_t hash_expr(const Expr& e) {
  std::size_t h = 0x51ed27;
  for (auto& [m, c] : e.terms()) {
    for (auto& v : m) h = mix(h, std::hash<std::string>{}(v));
    h = mix(h, std::hash<std::string>{}(c.get_str()));
  }
  return h;
}

std::size_t hash_family(const Family& f) {
  std::size_t h = static_cast<std::size_t>(f.kind) + 17;
  for (auto& m : f.members) h = mix(h, m->hash);
  if (f.tail) h = mix(h, f.tail->hash);
  if (f.templ) {
    h = mix(h, f.templ->hash);
    h = mix(h, std::hash<std::string>{}(f.hole));
    h = mix(h, hash_expr(f.bound));
    h = mix(h, f.strict);
  }
  return h;
}

Formula finish(Node n) {
  std::size_t h = static_cast<std::size_t>(n.kind) * 1315423911u;
  h = mix(h, std::hash<std::string>{}(n.name));
  for (auto& k : n.kids) h = mix(h, k->hash);
  if (n.has_threshold()) h = mix(h, hash_expr(n.thr));
  h = mix(h, n.steps);
  if (n.fam) h = mix(h, hash_family(*n.fam));
  n.hash = h;
  return std::make_shared<const Node>(std::move(n));
}

void check_threshold(const Expr& r) {
  if (r.is_constant() && !in_unit_interval(r.constant()))
    throw FormulaError("threshold out of range: " + r.str());
}

Formula unary(Kind k, Formula a) {
  Node n{k};
  n.kids.push_back(std::move(a));
  return finish(std::move(n));
}

Formula thresholded(Kind k, Expr r, Formula a) {
  check_threshold(r);
  Node n{k};
  n.thr = std::move(r);
  n.kids.push_back(std::move(a));
  return finish(std::move(n));
}

bool has_iter(const Formula& f) {
  if (f->kind == Kind::Iter) return true;
  if (f->kind == Kind::LimL || f->kind == Kind::LimM) return false;
  for (auto& k : f->kids)
    if (has_iter(k)) return true;
  if (f->fam) {
    for (auto& m : f->fam->members)
      if (has_iter(m)) return true;
    if (f->fam->tail && has_iter(f->fam->tail)) return true;
    if (f->fam->templ && has_iter(f->fam->templ)) return true;
  }
  return false;
}

Formula lim(Kind k, Expr t, Formula tmpl) {
  if (!has_iter(tmpl)) throw FormulaError("lim template needs an Iter marker");
  return thresholded(k, std::move(t), std::move(tmpl));
}

}  // namespace

Formula atom(const std::string& name) {
  Node n{Kind::Atom};
  n.name = name;
  return finish(std::move(n));
}

Formula neg(Formula a) { return unary(Kind::Neg, std::move(a)); }

Formula conj(std::vector<Formula> kids) {
  if (kids.empty()) return top();
  if (kids.size() == 1) return kids.front();
  Node n{Kind::And};
  n.kids = std::move(kids);
  return finish(std::move(n));
}

Formula conj(Formula a, Formula b) { return conj(std::vector<Formula>{std::move(a), std::move(b)}); }

Formula L(Expr r, Formula a) { return thresholded(Kind::L, std::move(r), std::move(a)); }

Formula next(Formula a, unsigned times) {
  for (unsigned i = 0; i < times; ++i) a = unary(Kind::Next, std::move(a));
  return a;
}

Formula init_l(Expr r, Formula a) { return thresholded(Kind::InitL, std::move(r), std::move(a)); }

Formula nstep_l(unsigned steps, Expr r, Formula a) {
  check_threshold(r);
  Node n{Kind::NStepL};
  n.thr = std::move(r);
  n.steps = steps;
  n.kids.push_back(std::move(a));
  return finish(std::move(n));
}

Formula lim_l(Expr t, Formula tmpl) { return lim(Kind::LimL, std::move(t), std::move(tmpl)); }
Formula lim_m(Expr t, Formula tmpl) { return lim(Kind::LimM, std::move(t), std::move(tmpl)); }

Formula iter(Formula a) {
  if (has_iter(a)) throw FormulaError("Iter markers cannot nest");
  return unary(Kind::Iter, std::move(a));
}

Formula big_and(Family f) {
  Node n{Kind::BigAnd};
  n.fam = std::make_shared<const Family>(std::move(f));
  return finish(std::move(n));
}

Formula big_or(Family f) {
  Node n{Kind::BigOr};
  n.fam = std::make_shared<const Family>(std::move(f));
  return finish(std::move(n));
}

Family finite_family(std::vector<Formula> members) {
  Family f;
  f.kind = FamilyKind::Finite;
  f.members = std::move(members);
  return f;
}

Family nat_family(std::vector<Formula> prefix, Formula tail) {
  Family f;
  f.kind = FamilyKind::Nat;
  f.members = std::move(prefix);
  f.tail = std::move(tail);
  return f;
}

Family threshold_family(Formula templ, std::string hole, Expr bound, bool strict) {
  check_threshold(bound);
  Family f;
  f.kind = FamilyKind::Threshold;
  f.templ = std::move(templ);
  f.hole = std::move(hole);
  f.bound = std::move(bound);
  f.strict = strict;
  return f;
}

Formula top() { return big_and(finite_family({})); }
Formula bot() { return neg(top()); }

Formula disj(std::vector<Formula> kids) {
  if (kids.empty()) return bot();
  if (kids.size() == 1) return kids.front();
  for (auto& k : kids) k = neg(k);
  return neg(conj(std::move(kids)));
}

Formula disj(Formula a, Formula b) { return disj(std::vector<Formula>{std::move(a), std::move(b)}); }
Formula imp(Formula a, Formula b) { return neg(conj(std::move(a), neg(std::move(b)))); }
Formula iff(Formula a, Formula b) { return conj(imp(a, b), imp(b, a)); }
Formula M(Expr r, Formula a) { return L(Expr(1) - r, neg(std::move(a))); }

Formula L_chain(const std::vector<Expr>& rs, Formula a) {
  for (auto it = rs.rbegin(); it != rs.rend(); ++it) a = L(*it, a);
  return a;
}

bool is_top(const Formula& f) {
  return f->kind == Kind::BigAnd && f->fam->kind == FamilyKind::Finite && f->fam->members.empty();
}

bool is_bot(const Formula& f) { return f->kind == Kind::Neg && is_top(f->body()); }

bool as_imp(const Formula& f, Formula& a, Formula& b) {
  if (f->kind != Kind::Neg) return false;
  auto& c = f->body();
  if (c->kind != Kind::And || c->kids.size() != 2 || c->kids[1]->kind != Kind::Neg) return false;
  a = c->kids[0];
  b = c->kids[1]->body();
  return true;
}

bool as_iff(const Formula& f, Formula& a, Formula& b) {
  if (f->kind != Kind::And || f->kids.size() != 2) return false;
  Formula a1, b1, a2, b2;
  if (!as_imp(f->kids[0], a1, b1) || !as_imp(f->kids[1], a2, b2)) return false;
  if (!equal(a1, b2) || !equal(b1, a2)) return false;
  a = a1;
  b = b1;
  return true;
}

bool as_disj(const Formula& f, std::vector<Formula>& kids) {
  if (f->kind != Kind::Neg || f->body()->kind != Kind::And) return false;
  auto& c = f->body();
  for (auto& k : c->kids)
    if (k->kind != Kind::Neg) return false;
  kids.clear();
  for (auto& k : c->kids) kids.push_back(k->body());
  return true;
}

namespace {

int cmp_expr(const Expr& a, const Expr& b) {
  if (a == b) return 0;
  return a < b ? -1 : 1;
}

int cmp_family(const Family& a, const Family& b);

int cmp_list(const std::vector<Formula>& a, const std::vector<Formula>& b) {
  if (a.size() != b.size()) return a.size() < b.size() ? -1 : 1;
  for (std::size_t i = 0; i < a.size(); ++i)
    if (int c = compare(a[i], b[i])) return c;
  return 0;
}

int cmp_family(const Family& a, const Family& b) {
  if (a.kind != b.kind) return a.kind < b.kind ? -1 : 1;
  if (int c = cmp_list(a.members, b.members)) return c;
  if (a.kind == FamilyKind::Nat) return compare(a.tail, b.tail);
  if (a.kind == FamilyKind::Threshold) {
    if (int c = compare(a.templ, b.templ)) return c;
    if (a.hole != b.hole) return a.hole < b.hole ? -1 : 1;
    if (int c = cmp_expr(a.bound, b.bound)) return c;
    if (a.strict != b.strict) return a.strict ? -1 : 1;
  }
  return 0;
}

}  // namespace

int compare(const Formula& a, const Formula& b) {
  if (a.get() == b.get()) return 0;
  if (a->kind != b->kind) return a->kind < b->kind ? -1 : 1;
  if (a->hash != b->hash) return a->hash < b->hash ? -1 : 1;
  if (a->name != b->name) return a->name < b->name ? -1 : 1;
  if (a->steps != b->steps) return a->steps < b->steps ? -1 : 1;
  if (a->has_threshold())
    if (int c = cmp_expr(a->thr, b->thr)) return c;
  if (int c = cmp_list(a->kids, b->kids)) return c;
  if (a->fam) return cmp_family(*a->fam, *b->fam);
  return 0;
}

bool equal(const Formula& a, const Formula& b) { return compare(a, b) == 0; }

// ---------------------------------------------------------------- printing

namespace {

enum Level { kIff = 0, kImp = 1, kOr = 2, kAnd = 3, kUnary = 4 };

struct Printed {
  std::string text;
  int level;
};

Printed pr(const Formula& f);

std::string wrap(const Formula& f, int min_level) {
  Printed p = pr(f);
  if (p.level < min_level) return "(" + p.text + ")";
  return p.text;
}

std::string list(const std::vector<Formula>& xs) {
  std::string out;
  for (std::size_t i = 0; i < xs.size(); ++i) out += (i ? ", " : "") + pr(xs[i]).text;
  return out;
}

std::string family_text(const Family& fam, bool conj_kind) {
  switch (fam.kind) {
    case FamilyKind::Finite:
      return std::string(conj_kind ? "And(" : "Or(") + list(fam.members) + ")";
    case FamilyKind::Nat:
      return std::string(conj_kind ? "AndTail(" : "OrTail(") + list(fam.members) +
             (fam.members.empty() ? "; " : " ; ") + pr(fam.tail).text + ")";
    case FamilyKind::Threshold:
      return std::string(conj_kind ? "AndBelow[" : "OrBelow[") + fam.hole + (fam.strict ? " < " : " <= ") +
             fam.bound.str() + "]{" + pr(fam.templ).text + "}";
  }
  return "";
}

Printed pr(const Formula& f) {
  switch (f->kind) {
    case Kind::Atom:
      return {f->name, kUnary};
    case Kind::Neg: {
      if (is_bot(f)) return {"false", kUnary};
      std::vector<Formula> ds;
      if (as_disj(f, ds)) {
        std::string out;
        for (std::size_t i = 0; i < ds.size(); ++i) out += (i ? " | " : "") + wrap(ds[i], kOr + 1);
        return {out, kOr};
      }
      Formula a, b;
      if (as_imp(f, a, b)) return {wrap(a, kImp + 1) + " -> " + wrap(b, kImp + 1), kImp};
      return {"!" + wrap(f->body(), kUnary), kUnary};
    }
    case Kind::And: {
      Formula a, b;
      if (as_iff(f, a, b)) return {wrap(a, kIff + 1) + " <-> " + wrap(b, kIff + 1), kIff};
      std::string out;
      for (std::size_t i = 0; i < f->kids.size(); ++i) out += (i ? " & " : "") + wrap(f->kids[i], kAnd + 1);
      return {out, kAnd};
    }
    case Kind::BigAnd:
      if (is_top(f)) return {"true", kUnary};
      return {family_text(*f->fam, true), kUnary};
    case Kind::BigOr:
      return {family_text(*f->fam, false), kUnary};
    case Kind::L:
      return {"L[" + f->thr.str() + "] " + wrap(f->body(), kUnary), kUnary};
    case Kind::Next:
      return {"O " + wrap(f->body(), kUnary), kUnary};
    case Kind::InitL:
      return {"I[" + f->thr.str() + "] " + wrap(f->body(), kUnary), kUnary};
    case Kind::NStepL:
      return {"LN[" + std::to_string(f->steps) + "," + f->thr.str() + "] " + wrap(f->body(), kUnary), kUnary};
    case Kind::LimL:
      return {"LimL[" + f->thr.str() + "]{" + pr(f->body()).text + "}", kUnary};
    case Kind::LimM:
      return {"LimM[" + f->thr.str() + "]{" + pr(f->body()).text + "}", kUnary};
    case Kind::Iter:
      return {"Iter(" + pr(f->body()).text + ")", kUnary};
  }
  return {"?", kUnary};
}

}  // namespace

std::string print(const Formula& f) { return pr(f).text; }

// ---------------------------------------------------------------- transforms

namespace {

Family map_family(const Family& fam, const std::function<Formula(const Formula&)>& g) {
  Family out = fam;
  for (auto& m : out.members) m = g(m);
  if (out.tail) out.tail = g(out.tail);
  if (out.templ) out.templ = g(out.templ);
  return out;
}

Formula rebuild(const Formula& f, std::vector<Formula> kids) {
  Node n = *f;
  n.kids = std::move(kids);
  return finish(std::move(n));
}

}  // namespace

Formula formal_negation(const Formula& f) {
  switch (f->kind) {
    case Kind::Atom:
      return neg(f);
    case Kind::Neg:
      return f->body();
    case Kind::And: {
      std::vector<Formula> ms;
      for (auto& k : f->kids) ms.push_back(formal_negation(k));
      return big_or(finite_family(std::move(ms)));
    }
    case Kind::BigAnd:
      return big_or(map_family(*f->fam, formal_negation));
    case Kind::BigOr:
      return big_and(map_family(*f->fam, formal_negation));
    case Kind::L:
      // ~L_r g = !M_{1-r} ~g
      return neg(M(Expr(1) - f->thr, formal_negation(f->body())));
    case Kind::Next:
      return next(formal_negation(f->body()));
    default:
      throw FormulaError("formal negation undefined for " + print(f));
  }
}

Formula instantiate(const Formula& tmpl, unsigned k) {
  switch (tmpl->kind) {
    case Kind::Iter:
      return next(tmpl->body(), k);
    case Kind::Atom:
    case Kind::LimL:
    case Kind::LimM:
      return tmpl;
    case Kind::BigAnd:
    case Kind::BigOr: {
      Node n = *tmpl;
      n.fam = std::make_shared<const Family>(
          map_family(*tmpl->fam, [k](const Formula& g) { return instantiate(g, k); }));
      return finish(std::move(n));
    }
    default: {
      std::vector<Formula> kids;
      for (auto& c : tmpl->kids) kids.push_back(instantiate(c, k));
      return rebuild(tmpl, std::move(kids));
    }
  }
}

namespace {

void collect_sub(const Formula& f, FormulaSet& out) {
  if (!out.insert(f).second) return;
  for (auto& k : f->kids) collect_sub(k, out);
  if (f->fam) {
    for (auto& m : f->fam->members) collect_sub(m, out);
    if (f->fam->tail) collect_sub(f->fam->tail, out);
    if (f->fam->templ) collect_sub(f->fam->templ, out);
  }
}

template <class Fn>
void walk(const Formula& f, Fn&& fn) {
  fn(f);
  for (auto& k : f->kids) walk(k, fn);
  if (f->fam) {
    for (auto& m : f->fam->members) walk(m, fn);
    if (f->fam->tail) walk(f->fam->tail, fn);
    if (f->fam->templ) walk(f->fam->templ, fn);
  }
}

}  // namespace

FormulaSet subformulas(const Formula& f) {
  FormulaSet out;
  collect_sub(f, out);
  return out;
}

std::set<std::string> atoms(const Formula& f) {
  std::set<std::string> out;
  walk(f, [&](const Formula& g) {
    if (g->kind == Kind::Atom) out.insert(g->name);
  });
  return out;
}

std::set<std::string> threshold_vars(const Formula& f) {
  // free variables: family holes are bound inside their template
  std::set<std::string> out;
  std::function<void(const Formula&, std::set<std::string>&)> go = [&](const Formula& g,
                                                                         std::set<std::string>& bound) {
    if (g->has_threshold())
      for (auto& v : g->thr.vars())
        if (!bound.count(v)) out.insert(v);
    for (auto& k : g->kids) go(k, bound);
    if (g->fam) {
      for (auto& m : g->fam->members) go(m, bound);
      if (g->fam->tail) go(g->fam->tail, bound);
      if (g->fam->templ) {
        for (auto& v : g->fam->bound.vars())
          if (!bound.count(v)) out.insert(v);
        bool fresh = bound.insert(g->fam->hole).second;
        go(g->fam->templ, bound);
        if (fresh) bound.erase(g->fam->hole);
      }
    }
  };
  std::set<std::string> bound;
  go(f, bound);
  return out;
}

bool is_ground(const Formula& f) { return threshold_vars(f).empty(); }

Formula substitute_thresholds(const Formula& f, const std::map<std::string, Expr>& s) {
  if (s.empty()) return f;
  Node n = *f;
  bool changed = false;
  if (n.has_threshold()) {
    Expr t = n.thr.substitute(s);
    if (t != n.thr) {
      check_threshold(t);
      n.thr = t;
      changed = true;
    }
  }
  for (auto& k : n.kids) {
    Formula k2 = substitute_thresholds(k, s);
    if (k2.get() != k.get()) changed = true;
    k = k2;
  }
  if (n.fam) {
    Family fam = *n.fam;
    auto sub = [&](Formula& g, const std::map<std::string, Expr>& m) {
      Formula g2 = substitute_thresholds(g, m);
      if (g2.get() != g.get()) changed = true;
      g = g2;
    };
    for (auto& m : fam.members) sub(m, s);
    if (fam.tail) sub(fam.tail, s);
    if (fam.templ) {
      Expr b = fam.bound.substitute(s);
      if (b != fam.bound) {
        check_threshold(b);
        fam.bound = b;
        changed = true;
      }
      auto inner = s;
      inner.erase(fam.hole);
      sub(fam.templ, inner);
    }
    n.fam = std::make_shared<const Family>(std::move(fam));
  }
  if (!changed) return f;
  return finish(std::move(n));
}

Formula substitute_atoms(const Formula& f, const std::map<std::string, Formula>& s) {
  if (f->kind == Kind::Atom) {
    auto it = s.find(f->name);
    return it == s.end() ? f : it->second;
  }
  Node n = *f;
  for (auto& k : n.kids) k = substitute_atoms(k, s);
  if (n.fam) n.fam = std::make_shared<const Family>(map_family(*n.fam, [&](const Formula& g) {
                       return substitute_atoms(g, s);
                     }));
  return finish(std::move(n));
}

std::size_t size(const Formula& f) {
  std::size_t n = 0;
  walk(f, [&](const Formula&) { ++n; });
  return n;
}

std::size_t modal_depth(const Formula& f) {
  std::size_t d = 0;
  for (auto& k : f->kids) d = std::max(d, modal_depth(k));
  if (f->fam) {
    for (auto& m : f->fam->members) d = std::max(d, modal_depth(m));
    if (f->fam->tail) d = std::max(d, modal_depth(f->fam->tail));
    if (f->fam->templ) d = std::max(d, modal_depth(f->fam->templ));
  }
  bool modal = f->kind == Kind::L || f->kind == Kind::Next || f->kind == Kind::InitL ||
               f->kind == Kind::NStepL || f->kind == Kind::LimL || f->kind == Kind::LimM;
  return d + (modal ? 1 : 0);
}

std::set<unsigned> nstep_depths(const Formula& f) {
  std::set<unsigned> out;
  walk(f, [&](const Formula& g) {
    if (g->kind == Kind::NStepL) out.insert(g->steps);
  });
  return out;
}

bool contains_kind(const Formula& f, Kind k) {
  bool found = false;
  walk(f, [&](const Formula& g) { found = found || g->kind == k; });
  return found;
}

}  // namespace dpl
