#include <CLI11.hpp>
#include <iostream>
#include <sstream>

#include "dpl/definability.hpp"
#include "dpl/io.hpp"
#include "dpl/proofs.hpp"
#include "dpl/semantics.hpp"
#include "dpl/stochastic.hpp"

using namespace dpl;

namespace {

constexpr int kVerdictFailure = 1;
constexpr int kInputError = 2;
constexpr int kResourceCap = 3;

const char* kind_name(Kind k) {
  switch (k) {
    case Kind::Atom: return "Atom";
    case Kind::Neg: return "Neg";
    case Kind::And: return "And";
    case Kind::BigAnd: return "BigAnd";
    case Kind::BigOr: return "BigOr";
    case Kind::L: return "L";
    case Kind::Next: return "Next";
    case Kind::InitL: return "InitL";
    case Kind::NStepL: return "NStepL";
    case Kind::LimL: return "LimL";
    case Kind::LimM: return "LimM";
    case Kind::Iter: return "Iter";
  }
  return "?";
}

json ast_json(const Formula& f) {
  json j = {{"kind", kind_name(f->kind)}};
  if (f->kind == Kind::Atom) j["name"] = f->name;
  if (f->has_threshold()) j["threshold"] = f->thr.str();
  if (f->kind == Kind::NStepL) j["steps"] = f->steps;
  if (f->fam) {
    const Family& fam = *f->fam;
    json members = json::array();
    for (auto& m : fam.members) members.push_back(ast_json(m));
    switch (fam.kind) {
      case FamilyKind::Finite:
        j["family"] = {{"kind", "Finite"}, {"members", members}};
        break;
      case FamilyKind::Nat:
        j["family"] = {{"kind", "Nat"}, {"prefix", members}, {"tail", ast_json(fam.tail)}};
        break;
      case FamilyKind::Threshold:
        j["family"] = {{"kind", "Threshold"},
                       {"hole", fam.hole},
                       {"bound", fam.bound.str()},
                       {"strict", fam.strict},
                       {"template", ast_json(fam.templ)}};
        break;
    }
  }
  if (!f->kids.empty()) {
    json kids = json::array();
    for (auto& k : f->kids) kids.push_back(ast_json(k));
    j["children"] = kids;
  }
  return j;
}

void ast_text(const Formula& f, int depth, std::ostream& out) {
  std::string pad(2 * depth, ' ');
  out << pad << kind_name(f->kind);
  if (f->kind == Kind::Atom) out << " " << f->name;
  if (f->kind == Kind::NStepL) out << " steps=" << f->steps;
  if (f->has_threshold()) out << " [" << f->thr.str() << "]";
  if (f->fam) {
    const Family& fam = *f->fam;
    switch (fam.kind) {
      case FamilyKind::Finite:
        out << " finite(" << fam.members.size() << ")\n";
        for (auto& m : fam.members) ast_text(m, depth + 1, out);
        return;
      case FamilyKind::Nat:
        out << " nat(prefix " << fam.members.size() << ")\n";
        for (auto& m : fam.members) ast_text(m, depth + 1, out);
        out << pad << "  tail:\n";
        ast_text(fam.tail, depth + 2, out);
        return;
      case FamilyKind::Threshold:
        out << " " << fam.hole << (fam.strict ? " < " : " <= ") << fam.bound.str() << "\n";
        ast_text(fam.templ, depth + 1, out);
        return;
    }
  }
  out << "\n";
  for (auto& k : f->kids) ast_text(k, depth + 1, out);
}

std::string valuation_text(const Valuation& v, int n) {
  std::string s;
  for (auto& [k, set] : v) s += (s.empty() ? "" : " ") + k + "=" + set_string(set, n);
  return s.empty() ? "(no atoms)" : s;
}

struct Options {
  bool json_out = false;
  std::string path, formula, property, variant = "literal", reading = "pointwise", valuation;
  int world = -1;
  std::uint64_t cap = kDefaultModelCap;
  bool exhaustive = false, random = false;
  int n_states = 2, min_states = 1, denom = 2, samples = 100;
  std::uint64_t seed = 1;
};

int run_check(const Options& o) {
  Model m = model_from_json(read_json_file(o.path));
  if (!o.valuation.empty()) {
    json v;
    try {
      v = json::parse(o.valuation);
    } catch (const json::exception& e) {
      throw IoError(std::string("--valuation: ") + e.what());
    }
    for (auto& [k, s] : valuation_from_json(v, m.process.n)) m.valuation[k] = s;
  }
  Formula f = parse(o.formula);
  if (o.world >= m.process.n) throw IoError("world " + std::to_string(o.world) + " out of range");
  StateSet ext = extension(m, f);
  bool sat = o.world >= 0 && contains(ext, o.world);
  if (o.json_out) {
    json j = {{"formula", print(f)}, {"extension", set_to_json(ext)}};
    if (o.world >= 0) {
      j["world"] = o.world;
      j["satisfied"] = sat;
    }
    std::cout << j.dump() << "\n";
  } else {
    std::cout << "extension " << set_string(ext, m.process.n) << "\n";
    if (o.world >= 0) std::cout << "world " << o.world << " " << (sat ? "satisfies" : "does not satisfy") << " " << print(f) << "\n";
  }
  return o.world >= 0 && !sat ? kVerdictFailure : 0;
}

int run_frame_valid(const Options& o) {
  Process p = process_from_json(read_json_file(o.path));
  Formula f = parse(o.formula);
  Verdict v = frame_valid(p, f, o.cap);
  if (o.json_out) {
    json j = {{"formula", print(f)}, {"valid", v.valid}};
    if (v.counterexample) j["counterexample"] = counterexample_to_json(*v.counterexample);
    std::cout << j.dump() << "\n";
  } else if (v.valid) {
    std::cout << "valid " << print(f) << "\n";
  } else {
    const auto& c = *v.counterexample;
    std::cout << "counterexample " << valuation_text(c.valuation, p.n) << " world " << c.world << "\n";
  }
  return v.valid ? 0 : kVerdictFailure;
}

int run_classify(const Options& o) {
  Process p = process_from_json(read_json_file(o.path));
  Classification c = classify(p);
  json j = classification_to_json(c);
  if (p.init) {
    j["stationary"] = is_stationary(p);
    j["irreducible"] = is_irreducible(p);
    j["recurrent"] = is_recurrent(p);
  }
  if (c.dynamic_probability_space) j["ergodic"] = is_ergodic(p);
  if (c.abstract_dynamical_system) j["mixing"] = is_mixing(p);
  if (o.json_out) {
    std::cout << j.dump() << "\n";
  } else {
    for (auto& [k, v] : j.items()) std::cout << k << " " << (v.get<bool>() ? "true" : "false") << "\n";
  }
  return 0;
}

int run_correspond(const Options& o) {
  auto id = property_from_name(o.property);
  if (!id) {
    std::string known;
    for (auto p : all_properties()) known += " " + property_name(p);
    throw IoError("unknown property " + o.property + "; expected one of" + known);
  }
  if (o.exhaustive == o.random) throw IoError("choose exactly one of --exhaustive and --random");
  ExperimentConfig cfg;
  cfg.exhaustive = o.exhaustive;
  cfg.n_states = o.n_states;
  cfg.min_states = o.min_states;
  cfg.denom_bound = o.denom;
  cfg.samples = o.samples;
  cfg.seed = o.seed;
  cfg.options.variant = o.variant == "corrected" ? NStepVariant::Corrected : NStepVariant::Literal;
  cfg.options.reading = o.reading == "global" ? Reading::Global : Reading::Pointwise;
  cfg.options.cap = o.cap;
  if (cfg.n_states < 1 || cfg.denom_bound < 1 || cfg.samples < 0) throw IoError("sizes must be positive");
  ExperimentSummary s = run_experiment(*id, cfg);
  if (o.json_out) {
    std::cout << summary_to_json(s).dump() << "\n";
  } else {
    std::cout << property_name(s.property) << " " << s.mode << " total " << s.total << " agree " << s.agree
              << " disagree " << s.disagree << "\n";
    for (auto& w : s.witnesses) {
      std::cout << "disagreement " << w.process_id << " frame " << (w.frame_verdict ? "valid" : "invalid")
                << " oracle " << (w.oracle_verdict ? "true" : "false");
      if (!w.detail.empty()) std::cout << " (" << w.detail << ")";
      std::cout << "\n";
    }
  }
  return s.disagree ? kVerdictFailure : 0;
}

int run_prove(const Options& o) {
  auto lemmas = proofs_from_json(read_json_file(o.path));
  LibraryReport rep = check_all(lemmas);
  if (o.json_out) {
    json arr = json::array();
    for (auto& [name, r] : rep.results) {
      json j = {{"lemma", name}, {"ok", r.ok}};
      if (!r.ok) j.update({{"step", r.step}, {"rule", r.rule}, {"reason", r.reason}});
      arr.push_back(j);
    }
    std::cout << json{{"results", arr}, {"ok", rep.all_ok()}}.dump() << "\n";
  } else {
    for (auto& [name, r] : rep.results) std::cout << name << " " << r.message() << "\n";
  }
  return rep.all_ok() ? 0 : kVerdictFailure;
}

int run_parse(const Options& o) {
  Formula f = parse(o.formula);
  if (o.json_out) {
    std::cout << json{{"formula", print(f)}, {"ast", ast_json(f)}}.dump() << "\n";
  } else {
    std::cout << print(f) << "\n";
    ast_text(f, 0, std::cout);
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Model checker, correspondence harness and proof checker for dynamic probability logic"};
  app.require_subcommand(1);
  app.fallthrough();
  Options o;
  app.add_flag("--json", o.json_out, "Machine-readable output");

  auto* check = app.add_subcommand("check", "Evaluate a formula on a model");
  check->add_option("model", o.path, "Model JSON (process with valuation)")->required();
  check->add_option("-f,--formula", o.formula)->required();
  check->add_option("-w,--world", o.world, "World to test");
  check->add_option("--valuation", o.valuation, "JSON object overriding valuation entries");

  auto* fv = app.add_subcommand("frame-valid", "Validity over all valuations of a process");
  fv->add_option("process", o.path)->required();
  fv->add_option("-f,--formula", o.formula)->required();
  fv->add_option("--cap", o.cap, "Maximum number of valuations");

  auto* cl = app.add_subcommand("classify", "Process classes and stochastic properties");
  cl->add_option("process", o.path)->required();

  auto* co = app.add_subcommand("correspond", "Frame validity of defining formulas versus the oracle");
  co->add_option("property", o.property)->required();
  co->add_flag("--exhaustive", o.exhaustive);
  co->add_flag("--random", o.random);
  co->add_option("-n,--states", o.n_states, "State count (exhaustive) or maximum (random)");
  co->add_option("--min-states", o.min_states, "Minimum state count (random)");
  co->add_option("--denom", o.denom, "Denominator bound");
  co->add_option("-N,--samples", o.samples, "Number of random samples");
  co->add_option("--seed", o.seed);
  co->add_option("--variant", o.variant, "literal or corrected")->check(CLI::IsMember({"literal", "corrected"}));
  co->add_option("--reading", o.reading, "pointwise or global")->check(CLI::IsMember({"pointwise", "global"}));
  co->add_option("--cap", o.cap, "Maximum number of valuations");

  auto* pr = app.add_subcommand("prove", "Check derivations");
  pr->add_option("proofs", o.path)->required();

  auto* pa = app.add_subcommand("parse", "Parse a formula and dump its syntax tree");
  pa->add_option("-f,--formula", o.formula)->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : kInputError;
  }

  try {
    if (*check) return run_check(o);
    if (*fv) return run_frame_valid(o);
    if (*cl) return run_classify(o);
    if (*co) return run_correspond(o);
    if (*pr) return run_prove(o);
    if (*pa) return run_parse(o);
  } catch (const ResourceError& e) {
    std::cerr << "resource cap: " << e.what() << "\n";
    return kResourceCap;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kInputError;
  }
  return kInputError;
}
