#include <chrono>
#include <cstdio>
#include <functional>
#include <iostream>
#include <sstream>

#include "../support/generators.hpp"
#include "dpl/definability.hpp"
#include "dpl/io.hpp"
#include "dpl/proofs.hpp"

using namespace dpl;
using testing::pick;
using testing::Rng;

namespace {

const std::string kData = DPL_DATA_DIR;

struct Outcome {
  bool pass = true;
  std::vector<std::string> notes;

  void note(const std::string& s) { notes.push_back(s); }
  void require(bool ok, const std::string& s) {
    pass = pass && ok;
    note(std::string(ok ? "ok   " : "FAIL ") + s);
  }
};

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::string fmt(double secs) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2fs", secs);
  return buf;
}

std::string summary_line(const ExperimentSummary& s) {
  std::ostringstream o;
  o << s.agree << "/" << s.total << " agree";
  if (s.disagree) {
    o << ", first disagreement " << s.witnesses.front().process_id << " (frame "
      << (s.witnesses.front().frame_verdict ? "valid" : "invalid") << ", oracle "
      << (s.witnesses.front().oracle_verdict ? "true" : "false") << ")";
  }
  return o.str();
}

ExperimentSummary exhaustive(PropertyId id, int n, int denom, CorrespondenceOptions o = {}) {
  ExperimentConfig c;
  c.exhaustive = true;
  c.n_states = n;
  c.denom_bound = denom;
  c.options = o;
  return run_experiment(id, c);
}

ExperimentSummary random_run(PropertyId id, int min_states, int max_states, int denom, int samples,
                             std::uint64_t seed, CorrespondenceOptions o = {}) {
  ExperimentConfig c;
  c.exhaustive = false;
  c.min_states = min_states;
  c.n_states = max_states;
  c.denom_bound = denom;
  c.samples = samples;
  c.seed = seed;
  c.options = o;
  return run_experiment(id, c);
}

// ---------------------------------------------------------------- 1

struct AxiomCase {
  std::string name;
  std::vector<std::string> patterns;  // Taut uses several skeletons
  std::function<bool(const Rational&, const Rational&)> side;
  std::function<Process(std::uint64_t, int)> process;
  System system;
};

Outcome axiom_sweep() {
  Outcome out;
  auto any = [](const Rational&, const Rational&) { return true; };
  auto all_processes = [](std::uint64_t s, int n) { return random_process(s, n, 6, false); };
  std::vector<AxiomCase> cases = {
      {"Taut", {"phi -> phi", "phi & psi -> phi", "phi | !phi", "(phi -> psi) & phi -> psi", "!(phi & !phi)"},
       any, all_processes, System::DPL},
      {"FA1", {"L[0] false"}, any, all_processes, System::DPL},
      {"FA2", {"L[r] !phi -> !L[s] phi"}, [](auto& r, auto& s) { return r + s > 1; }, all_processes, System::DPL},
      {"FA3", {"L[r] (phi & psi) & L[s] (phi & !psi) -> L[r + s] phi"},
       [](auto& r, auto& s) { return r + s <= 1; }, all_processes, System::DPL},
      {"FA4", {"!L[r] (phi & psi) & !L[s] (phi & !psi) -> !L[r + s] phi"},
       [](auto& r, auto& s) { return r + s <= 1; }, all_processes, System::DPL},
      {"Mono", {"L[1] (phi -> psi) -> (L[r] phi -> L[r] psi)"}, any, all_processes, System::DPL},
      {"FuncO", {"O !phi <-> !O phi"}, any, all_processes, System::DPL},
      {"ConjO", {"O (phi & psi) <-> O phi & O psi"}, any, all_processes, System::DPL},
      {"M", {"L[r] O phi <-> O L[r] phi"}, any,
       [](std::uint64_t s, int n) { return random_measure_preserving(s, n, 6); }, System::M},
      {"Id", {"O phi <-> phi"}, any, [](std::uint64_t s, int n) { return random_pure(s, n, 6); }, System::Pure},
      {"H1", {"L[r] phi -> L[1] L[r] phi"}, any, [](std::uint64_t s, int n) { return random_harsanyi(s, n, 6); },
       System::ADS},
      {"H2", {"!L[r] phi -> L[1] !L[r] phi"}, any,
       [](std::uint64_t s, int n) { return random_harsanyi(s, n, 6); }, System::ADS},
  };
  const auto grid = testing::unit_grid(8);
  const std::vector<std::string> atoms = {"p", "q"};
  auto t0 = Clock::now();
  int total_violations = 0, total_unmatched = 0;
  std::uint64_t salt = 0;
  for (auto& ax : cases) {
    Rng rng(1000 + salt++);
    struct Sample {
      std::unique_ptr<Evaluator> ev;
      Valuation v;
    };
    std::vector<Sample> models;
    for (int i = 0; i < 100; ++i) {
      Process p = ax.process(rng(), pick(rng, 1, 5));
      if (ax.name == "H1" || ax.name == "H2") {
        if (!harsanyi_holds(p)) throw std::logic_error("generator produced a non-Harsanyi process");
      }
      models.push_back({std::make_unique<Evaluator>(p), testing::random_valuation(rng, p.n, atoms)});
    }
    int violations = 0, unmatched = 0;
    std::string first;
    for (int i = 0; i < 500; ++i) {
      Formula pat = parse(ax.patterns[std::size_t(i) % ax.patterns.size()]);
      Formula inst = substitute_atoms(pat, {{"phi", testing::random_formula(rng, 3, atoms, grid)},
                                            {"psi", testing::random_formula(rng, 3, atoms, grid)}});
      Rational r, s;
      do {
        r = grid[pick(rng, 0, int(grid.size()) - 1)];
        s = grid[pick(rng, 0, int(grid.size()) - 1)];
      } while (!ax.side(r, s));
      inst = substitute_thresholds(inst, {{"r", Expr(r)}, {"s", Expr(s)}});
      if (!match_axiom(ax.system, ax.name, inst, {}).ok) ++unmatched;
      for (auto& m : models) {
        if (m.ev->extension(inst, m.v) != m.ev->all()) {
          if (first.empty()) first = print(inst);
          ++violations;
        }
      }
    }
    total_violations += violations;
    total_unmatched += unmatched;
    out.note(ax.name + ": 500 instances x 100 models, " + std::to_string(violations) + " violations" +
             (unmatched ? ", " + std::to_string(unmatched) + " not recognised by the checker" : "") +
             (first.empty() ? "" : ", first " + first));
  }
  double secs = seconds_since(t0);
  out.require(total_violations == 0, "zero violations across all axioms");
  out.require(total_unmatched == 0, "every generated instance is recognised by match_axiom");
  out.require(secs < 60, "runtime " + fmt(secs) + " < 60s");
  return out;
}

// ---------------------------------------------------------------- 2, 3, 4, 6

Outcome correspondence(PropertyId id, bool with_random, int random_min, int random_max,
                       const std::vector<std::pair<int, int>>& sizes, double budget) {
  Outcome out;
  auto t0 = Clock::now();
  for (auto [n, d] : sizes) {
    auto s = exhaustive(id, n, d);
    out.require(s.disagree == 0,
                "exhaustive n=" + std::to_string(n) + " denom<=" + std::to_string(d) + " " + summary_line(s));
  }
  if (with_random) {
    auto s = random_run(id, random_min, random_max, 4, 200, 20240601);
    out.require(s.disagree == 0, "random " + std::to_string(random_min) + "-" + std::to_string(random_max) +
                                     " states, 200 samples " + summary_line(s));
  }
  double secs = seconds_since(t0);
  out.require(secs < budget, "runtime " + fmt(secs) + " < " + fmt(budget));
  return out;
}

void diagnostic_variants(Outcome& out, PropertyId id, const std::vector<std::pair<int, int>>& sizes, int random_min,
                         int random_max, CorrespondenceOptions o, const std::string& label) {
  int total = 0, agree = 0;
  for (auto [n, d] : sizes) {
    auto s = exhaustive(id, n, d, o);
    total += s.total;
    agree += s.agree;
  }
  auto r = random_run(id, random_min, random_max, 4, 200, 20240601, o);
  out.note("diagnostic, " + label + ": exhaustive " + std::to_string(agree) + "/" + std::to_string(total) +
           ", random " + std::to_string(r.agree) + "/" + std::to_string(r.total));
}

// ---------------------------------------------------------------- 5

Outcome nstep_coherence() {
  Outcome out;
  auto t0 = Clock::now();
  Rng rng(55);
  int closed_bad = 0;
  std::map<unsigned, std::pair<int, int>> literal, corrected;  // n -> (checked, mismatches)
  int exact_bad = 0;
  std::string first;
  for (unsigned n = 0; n <= 3; ++n) {
    for (int i = 0; i < 100; ++i) {
      Process p = random_process(rng(), pick(rng, 1, 4), 4, true);
      Evaluator ev(p);
      StateSet a = std::uniform_int_distribution<StateSet>(0, full_set(p.n))(rng);
      Matrix t = n_step(p, n, T0Mode::WithInit);
      std::set<unsigned> depths;
      for (unsigned d = 1; d <= std::max(1u, n); ++d) depths.insert(d);
      NStepOptions lo;
      lo.l_cap = 4;
      lo.k_cap = 16;
      NStepOptions co = lo;
      co.variant = NStepVariant::Corrected;
      NStepOptions exact;
      exact.k_cap = 0;
      exact.variant = NStepVariant::Corrected;
      for (auto& r : ev.critical_values(depths)) {
        StateSet closed = ev.nstep_closed(n, r, a);
        StateSet direct = 0;
        for (int w = 0; w < p.n; ++w)
          if (mass(t[n == 0 ? 0 : w], a) >= r) direct |= singleton(w);
        closed_bad += closed != direct;
        StateSet lit = ev.nstep_literal(n, r, a, lo);
        ++literal[n].first;
        if (lit != closed) {
          ++literal[n].second;
          if (first.empty())
            first = "n=" + std::to_string(n) + " r=" + to_string(r) + " A=" + set_string(a, p.n) + " closed " +
                    set_string(closed, p.n) + " literal " + set_string(lit, p.n);
        }
        ++corrected[n].first;
        corrected[n].second += ev.nstep_literal(n, r, a, co) != closed;
        exact_bad += ev.nstep_literal(n, r, a, exact) != closed;
      }
    }
  }
  double secs = seconds_since(t0);
  out.require(closed_bad == 0, "closed form equals the T^n threshold on every instance");
  int lit_bad = 0;
  for (auto& [n, c] : literal) {
    lit_bad += c.second;
    out.note("n=" + std::to_string(n) + ": literal expansion (4,16) disagrees on " + std::to_string(c.second) + "/" +
             std::to_string(c.first) + " thresholds; corrected variant on " + std::to_string(corrected[n].second) +
             "/" + std::to_string(corrected[n].first));
  }
  if (!first.empty()) out.note("first literal mismatch: " + first);
  out.note("diagnostic, corrected variant without truncation (exact k): " + std::to_string(exact_bad) + " mismatches");
  out.require(lit_bad == 0, "literal truncated expansion equals the closed form");
  out.require(secs < 120, "runtime " + fmt(secs) + " < 120s");
  return out;
}

// ---------------------------------------------------------------- 7

Outcome archimedean() {
  Outcome out;
  Rng rng(77);
  const auto grid = testing::unit_grid(6);
  int exceptions = 0, nontrivial = 0;
  for (int i = 0; i < 500; ++i) {
    Process p = random_process(rng(), pick(rng, 1, 5), 5, false);
    Evaluator ev(p);
    Valuation v = testing::random_valuation(rng, p.n, {"p", "q"});
    Formula phi = testing::random_formula(rng, 3, {"p", "q"}, grid);
    std::vector<Expr> chain;
    for (int k = pick(rng, 0, 3); k > 0; --k) chain.push_back(grid[pick(rng, 0, int(grid.size()) - 1)]);
    Rational r = grid[pick(rng, 1, int(grid.size()) - 1)];
    auto ext = [&](const Rational& s) {
      auto c = chain;
      c.push_back(s);
      return ev.extension(L_chain(c, phi), v);
    };
    StateSet at_r = ext(r);
    Rational s = archimedean_witness(ev, v, phi, r);
    bool ok = s < r && (ext(s) & ~at_r) == 0;
    nontrivial += at_r != ev.all();
    for (int k = 0; k < 4 && ok; ++k) {
      Rational t = r * Rational(pick(rng, 0, 99), 100);
      ok = (at_r & ~ext(t)) == 0;
    }
    exceptions += !ok;
  }
  out.note(std::to_string(nontrivial) + " of 500 tuples have worlds outside the threshold-r extension");
  out.require(exceptions == 0, std::to_string(exceptions) + " exceptions in 500 tuples");
  return out;
}

// ---------------------------------------------------------------- 8

std::vector<std::string> threshold_choices(const Derivation& d) {
  std::vector<std::string> out = {"0", "1/4", "1/3", "1/2", "2/3", "3/4", "1"};
  for (auto& m : d.metavars) {
    out.push_back(m);
    out.push_back("1 - " + m);
    out.push_back(m + "/2");
  }
  return out;
}

// Replace the threshold inside the k-th "[...]" of the printed formula.
std::optional<Formula> perturb_threshold(Rng& rng, const Formula& f, const std::vector<std::string>& choices) {
  std::string text = print(f);
  std::vector<std::pair<std::size_t, std::size_t>> slots;
  for (std::size_t i = 0; i + 1 < text.size(); ++i)
    if ((text[i] == 'L' || text[i] == 'M' || text[i] == 'I') && text[i + 1] == '[') {
      std::size_t close = text.find(']', i);
      slots.emplace_back(i + 2, close);
    }
  if (slots.empty()) return std::nullopt;
  auto [b, e] = slots[std::size_t(pick(rng, 0, int(slots.size()) - 1))];
  text = text.substr(0, b) + choices[std::size_t(pick(rng, 0, int(choices.size()) - 1))] + text.substr(e);
  try {
    return parse(text);
  } catch (const FormulaError&) {
    return std::nullopt;
  }
}

std::vector<Step>* random_step_list(Rng& rng, Derivation& d, std::size_t& idx) {
  std::vector<std::vector<Step>*> lists = {&d.steps};
  for (auto& s : d.steps)
    if (s.garch) lists.push_back(&s.garch->steps);
  auto* l = lists[std::size_t(pick(rng, 0, int(lists.size()) - 1))];
  idx = std::size_t(pick(rng, 0, int(l->size()) - 1));
  return l;
}

Derivation deep_copy(const Derivation& d) {
  Derivation c = d;
  for (auto& s : c.steps)
    if (s.garch) s.garch = std::make_shared<GArchPayload>(*s.garch);
  return c;
}

std::optional<Derivation> mutate(Rng& rng, const Derivation& orig) {
  Derivation d = deep_copy(orig);
  std::size_t i;
  auto* steps = random_step_list(rng, d, i);
  Step& s = (*steps)[i];
  switch (pick(rng, 0, 2)) {
    case 0: {  // rule or axiom name
      if (s.rule == RuleKind::Axiom && pick(rng, 0, 1)) {
        auto names = axiom_names(System::ADS);
        std::string a = names[std::size_t(pick(rng, 0, int(names.size()) - 1))];
        if (a == s.axiom) return std::nullopt;
        s.axiom = a;
      } else {
        RuleKind r = RuleKind(pick(rng, 0, 6));
        if (r == s.rule) return std::nullopt;
        s.rule = r;
        if (r == RuleKind::Axiom && s.axiom.empty()) s.axiom = "Taut";
      }
      break;
    }
    case 1: {  // premises
      if (s.premises.size() >= 2) {
        std::swap(s.premises[0], s.premises[1]);
      } else if (i > 0) {
        int id = (*steps)[std::size_t(pick(rng, 0, int(i) - 1))].id;
        if (s.premises.empty()) s.premises.push_back(id);
        else if (s.premises[0] == id) return std::nullopt;
        else s.premises[0] = id;
      } else {
        return std::nullopt;
      }
      break;
    }
    default: {  // threshold
      auto f = perturb_threshold(rng, s.formula, threshold_choices(d));
      if (!f || equal(*f, s.formula)) return std::nullopt;
      s.formula = *f;
      break;
    }
  }
  return d;
}

Outcome proof_corpus() {
  Outcome out;
  auto t0 = Clock::now();
  auto lemmas = proofs_from_json(read_json_file(kData + "/corpus.json"));
  LibraryReport rep = check_all(lemmas);
  int green = 0;
  for (auto& [name, r] : rep.results) {
    green += r.ok;
    if (!r.ok) out.note("lemma " + name + " rejected: " + r.message());
  }
  out.require(green == int(lemmas.size()) && green >= 8,
              std::to_string(green) + "/" + std::to_string(lemmas.size()) + " corpus lemmas accepted");
  auto has = [&](const char* name) { return rep.accepted.count(name) > 0; };
  out.require(has("dist2") && has("part3") && has("part2"), "derived-theorem instances (parts 1, 2 and 3) present");
  out.require(has("fa2_symbolic") && has("fa3_symbolic"), "symbolic FA2/FA3 side-condition lemmas present");
  out.require(has("garch_demo") && has("threshold_mono_le"), "GArch lemmas with parametric sub-derivations present");
  out.require(has("assumption_mono") && has("assumption_mp"), "assumption-scoped lemmas present");

  const auto grid = testing::unit_grid(4);
  int unsound_corpus = 0;
  for (auto& [name, d] : rep.accepted) {
    SoundnessReport s = soundness_cross_check(d, 50, 8, 4, grid);
    if (s.violations) {
      ++unsound_corpus;
      out.note("corpus lemma " + name + " fails the cross-check: " + s.first_violation);
    }
  }
  out.require(unsound_corpus == 0, "every accepted corpus lemma is frame valid on 50 processes of its class");

  Rng rng(88);
  int mutants = 0, accepted = 0, bad = 0;
  for (auto& d : lemmas) {
    Library lib = rep.accepted;
    lib.erase(d.name);
    for (int k = 0; k < 200; ++k) {
      std::optional<Derivation> m;
      while (!(m = mutate(rng, d))) {
      }
      ++mutants;
      CheckResult r = check_derivation(*m, lib);
      if (!r.ok) continue;
      ++accepted;
      SoundnessReport s = soundness_cross_check(*m, 50, 1000 + std::uint64_t(k), 4, grid);
      if (s.violations) {
        ++bad;
        if (bad == 1) out.note("accepted invalid mutant of " + d.name + ": " + s.first_violation);
      }
    }
  }
  out.note(std::to_string(mutants) + " mutants, " + std::to_string(accepted) + " accepted by the checker");
  out.require(bad == 0, std::to_string(bad) + " accepted-and-frame-invalid mutants");
  out.note("runtime " + fmt(seconds_since(t0)));
  return out;
}

// ---------------------------------------------------------------- 9

Outcome entailment_fixture() {
  Outcome out;
  json fx = read_json_file(kData + "/entailment.json");
  int right = 0, total = 0;
  for (auto& c : fx["cases"]) {
    ConstraintSet cs;
    for (auto& b : c.value("bounded", std::vector<std::string>{})) cs.bounded.insert(b);
    std::string premises;
    for (auto& t : c["constraints"]) {
      cs.items.push_back(parse_constraint(t.get<std::string>()));
      premises += (premises.empty() ? "" : ", ") + t.get<std::string>();
    }
    bool expected = c["expected"].get<bool>();
    bool got = entails(cs, parse_constraint(c["goal"].get<std::string>()));
    ++total;
    right += got == expected;
    if (got != expected)
      out.note("wrong answer for {" + premises + "} |= " + c["goal"].get<std::string>());
  }
  out.require(total == 30 && right == total, std::to_string(right) + "/" + std::to_string(total) + " correct");
  ConstraintSet a{{}, {parse_constraint("s < r")}};
  out.require(!entails(a, parse_constraint("s < r/2")), "{s < r} does not entail s < r/2");
  ConstraintSet b{{}, {parse_constraint("r + s <= 1"), parse_constraint("s >= 0")}};
  out.require(entails(b, parse_constraint("r <= 1")), "{r + s <= 1, s >= 0} entails r <= 1");
  return out;
}

// ---------------------------------------------------------------- 10

Outcome performance() {
  Outcome out;
  Process p = random_process(1234, 8, 5, false);
  Formula f = parse("L[1/3] O (p & q) & (q | L[1/2] p) -> L[1/3] O p & (q | L[1/2] p)");
  auto t0 = Clock::now();
  Verdict v = frame_valid(p, f);
  double secs = seconds_since(t0);
  out.require(v.valid, "formula valid over all 65536 valuations of an 8-state process");
  out.require(secs < 10, "runtime " + fmt(secs) + " < 10s");
  return out;
}

}  // namespace

int main() {
  std::cout.setf(std::ios::unitbuf);
  const std::vector<std::pair<int, int>> dps_sizes = {{2, 4}, {3, 4}};
  const std::vector<std::pair<int, int>> kernel_sizes = {{2, 3}, {3, 2}};
  CorrespondenceOptions corrected_global;
  corrected_global.variant = NStepVariant::Corrected;
  corrected_global.reading = Reading::Global;
  CorrespondenceOptions corrected;
  corrected.variant = NStepVariant::Corrected;
  CorrespondenceOptions global;
  global.reading = Reading::Global;

  std::vector<std::pair<std::string, std::function<Outcome()>>> criteria = {
      {"axiom soundness sweep", axiom_sweep},
      {"measure-preserving correspondence",
       [&] { return correspondence(PropertyId::MeasurePreserving, true, 4, 5, dps_sizes, 300); }},
      {"ergodicity correspondence",
       [&] {
         Outcome o = correspondence(PropertyId::Ergodic, true, 4, 5, dps_sizes, 300);
         diagnostic_variants(o, PropertyId::Ergodic, dps_sizes, 4, 5, corrected_global,
                             "global reading with the dual operator M_0");
         return o;
       }},
      {"mixing correspondence", [&] { return correspondence(PropertyId::Mixing, false, 0, 0, dps_sizes, 300); }},
      {"n-step lemma coherence", nstep_coherence},
      {"stationary / irreducible / recurrent correspondences",
       [&] {
         Outcome o;
         for (auto id : {PropertyId::Stationary, PropertyId::Irreducible, PropertyId::Recurrent}) {
           Outcome part = correspondence(id, true, 1, 5, kernel_sizes, 300);
           o.pass = o.pass && part.pass;
           for (auto& n : part.notes) o.note(property_name(id) + ": " + n);
         }
         diagnostic_variants(o, PropertyId::Stationary, kernel_sizes, 1, 5, corrected,
                             "stationary with the corrected n-step expansion");
         diagnostic_variants(o, PropertyId::Recurrent, kernel_sizes, 1, 5, global,
                             "recurrent under the global reading");
         return o;
       }},
      {"Archimedean step-function invariant", archimedean},
      {"proof corpus and mutation robustness", proof_corpus},
      {"entailment fixture", entailment_fixture},
      {"performance guard", performance},
  };

  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    auto t0 = Clock::now();
    Outcome o;
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o.pass = false;
      o.note(std::string("exception: ") + e.what());
    }
    failed += !o.pass;
    std::cout << (o.pass ? "PASS" : "FAIL") << " criterion " << i + 1 << ": " << criteria[i].first << " ("
              << fmt(seconds_since(t0)) << ")\n";
    for (auto& n : o.notes) std::cout << "    " << n << "\n";
  }
  std::cout << criteria.size() - std::size_t(failed) << "/" << criteria.size() << " criteria passed\n";
  return failed ? 1 : 0;
}
