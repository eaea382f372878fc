#include "dpl/io.hpp"

#include <fstream>

namespace dpl {

namespace {

template <class F>
auto wrap(const std::string& where, F&& f) -> decltype(f()) {
  try {
    return f();
  } catch (const IoError&) {
    throw;
  } catch (const std::exception& e) {
    throw IoError(where + ": " + e.what());
  }
}

Formula formula_from(const json& j, const std::string& where) {
  if (!j.is_string()) throw IoError(where + ": formula must be a string");
  try {
    return parse(j.get<std::string>());
  } catch (const FormulaError& e) {
    throw IoError(where + ": " + e.what());
  }
}

Expr expr_from(const json& j) {
  if (j.is_number_integer()) return Expr(Rational(j.get<long>()));
  return parse_expr(j.get<std::string>());
}

std::vector<Step> steps_from(const json& arr, const std::string& where);

Step step_from(const json& j, const std::string& where) {
  Step s;
  s.id = j.at("id").get<int>();
  const std::string at = where + ", step " + std::to_string(s.id);
  s.formula = formula_from(j.at("formula"), at);
  auto rule = rule_from_name(j.at("rule").get<std::string>());
  if (!rule) throw IoError(at + ": unknown rule " + j.at("rule").get<std::string>());
  s.rule = *rule;
  if (j.contains("axiom")) s.axiom = j["axiom"].get<std::string>();
  if (j.contains("index")) s.index = j["index"].get<int>();
  if (j.contains("lemma")) s.lemma = j["lemma"].get<std::string>();
  if (j.contains("premises")) s.premises = j["premises"].get<std::vector<int>>();
  if (s.rule == RuleKind::GArch) {
    if (!j.contains("garch")) throw IoError(at + ": GArch step without payload");
    const json& g = j["garch"];
    auto p = std::make_shared<GArchPayload>();
    p->param = g.at("param").get<std::string>();
    p->exponent = g.value("exponent", 0u);
    for (auto& c : g.value("chain", json::array())) p->chain.push_back(expr_from(c));
    p->target = expr_from(g.at("target"));
    p->steps = steps_from(g.at("steps"), at + " (sub-derivation)");
    s.garch = p;
  }
  return s;
}

std::vector<Step> steps_from(const json& arr, const std::string& where) {
  std::vector<Step> out;
  for (auto& j : arr) out.push_back(wrap(where, [&] { return step_from(j, where); }));
  return out;
}

json step_to(const Step& s) {
  json j = {{"id", s.id}, {"formula", print(s.formula)}, {"rule", rule_name(s.rule)}};
  if (s.rule == RuleKind::Axiom) j["axiom"] = s.axiom;
  if (s.rule == RuleKind::Assumption) j["index"] = s.index;
  if (s.rule == RuleKind::Theorem) j["lemma"] = s.lemma;
  if (!s.premises.empty()) j["premises"] = s.premises;
  if (s.garch) {
    json chain = json::array();
    for (auto& e : s.garch->chain) chain.push_back(e.str());
    json sub = json::array();
    for (auto& t : s.garch->steps) sub.push_back(step_to(t));
    j["garch"] = {{"param", s.garch->param},
                  {"exponent", s.garch->exponent},
                  {"chain", chain},
                  {"target", s.garch->target.str()},
                  {"steps", sub}};
  }
  return j;
}

}  // namespace

json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path);
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    throw IoError(path + ": " + e.what());
  }
}

Rational rational_from_json(const json& j) {
  if (j.is_number_integer()) return Rational(j.get<long>());
  if (!j.is_string()) throw IoError("rational must be a string \"num/den\" or an integer");
  try {
    return parse_rational(j.get<std::string>());
  } catch (const std::invalid_argument& e) {
    throw IoError(e.what());
  }
}

json set_to_json(StateSet s) { return members(s); }

StateSet set_from_json(const json& j, int n) {
  if (!j.is_array()) throw IoError("state set must be an array of indices");
  StateSet s = 0;
  for (auto& x : j) {
    int w = x.get<int>();
    if (w < 0 || w >= n) throw IoError("state " + std::to_string(w) + " out of range");
    s |= singleton(w);
  }
  return s;
}

Process process_from_json(const json& j) {
  return wrap("process", [&] {
    Process p;
    p.n = j.at("states").get<int>();
    if (p.n < 1 || p.n > kMaxStates) throw IoError("states must be in 1.." + std::to_string(kMaxStates));
    for (auto& row : j.at("kernel")) {
      Row r;
      for (auto& x : row) r.push_back(rational_from_json(x));
      p.kernel.push_back(std::move(r));
    }
    p.map = j.at("map").get<std::vector<int>>();
    if (j.contains("init") && !j["init"].is_null()) {
      Row r;
      for (auto& x : j["init"]) r.push_back(rational_from_json(x));
      p.init = std::move(r);
    }
    auto problems = validate(p);
    if (!problems.empty()) {
      std::string msg = "invalid process:";
      for (auto& m : problems) msg += " " + m + ";";
      msg.pop_back();
      throw IoError(msg);
    }
    return p;
  });
}

json process_to_json(const Process& p) {
  json kernel = json::array();
  for (auto& row : p.kernel) {
    json r = json::array();
    for (auto& x : row) r.push_back(to_string(x));
    kernel.push_back(r);
  }
  json j = {{"states", p.n}, {"kernel", kernel}, {"map", p.map}};
  if (p.init) {
    json r = json::array();
    for (auto& x : *p.init) r.push_back(to_string(x));
    j["init"] = r;
  }
  return j;
}

Valuation valuation_from_json(const json& j, int n) {
  Valuation v;
  for (auto& [k, val] : j.items()) v[k] = wrap("valuation of " + k, [&] { return set_from_json(val, n); });
  return v;
}

json valuation_to_json(const Valuation& v) {
  json j = json::object();
  for (auto& [k, s] : v) j[k] = set_to_json(s);
  return j;
}

Model model_from_json(const json& j) {
  Model m;
  m.process = process_from_json(j);
  if (j.contains("valuation")) m.valuation = valuation_from_json(j["valuation"], m.process.n);
  return m;
}

json model_to_json(const Model& m) {
  json j = process_to_json(m.process);
  j["valuation"] = valuation_to_json(m.valuation);
  return j;
}

json classification_to_json(const Classification& c) {
  return {{"measure_preserving", c.measure_preserving},
          {"purely_probabilistic", c.purely_probabilistic},
          {"dps", c.dynamic_probability_space},
          {"ads", c.abstract_dynamical_system},
          {"harsanyi", c.harsanyi}};
}

json counterexample_to_json(const Counterexample& c) {
  return {{"valuation", valuation_to_json(c.valuation)}, {"world", c.world}, {"instance", print(c.instance)}};
}

json report_to_json(const CorrespondenceReport& r) {
  json j = {{"process_id", r.process_id},
            {"frame_verdict", r.frame_verdict},
            {"oracle_verdict", r.oracle_verdict},
            {"agree", r.agree}};
  if (r.witness) j["witness"] = counterexample_to_json(*r.witness);
  if (!r.detail.empty()) j["detail"] = r.detail;
  return j;
}

json summary_to_json(const ExperimentSummary& s) {
  json w = json::array();
  for (auto& r : s.witnesses) w.push_back(report_to_json(r));
  return {{"property", property_name(s.property)},
          {"mode", s.mode},
          {"total", s.total},
          {"agree", s.agree},
          {"disagree", s.disagree},
          {"witnesses", w}};
}

ExperimentSummary summary_from_json(const json& j) {
  return wrap("experiment summary", [&] {
    ExperimentSummary s;
    auto id = property_from_name(j.at("property").get<std::string>());
    if (!id) throw IoError("unknown property " + j.at("property").get<std::string>());
    s.property = *id;
    s.mode = j.at("mode").get<std::string>();
    s.total = j.at("total").get<int>();
    s.agree = j.at("agree").get<int>();
    s.disagree = j.at("disagree").get<int>();
    for (auto& w : j.at("witnesses")) {
      CorrespondenceReport r;
      r.process_id = w.at("process_id").get<std::string>();
      r.frame_verdict = w.at("frame_verdict").get<bool>();
      r.oracle_verdict = w.at("oracle_verdict").get<bool>();
      r.agree = w.at("agree").get<bool>();
      r.detail = w.value("detail", "");
      if (w.contains("witness")) {
        Counterexample c;
        for (auto& [k, val] : w["witness"].at("valuation").items()) {
          StateSet set = 0;
          for (auto& x : val) set |= singleton(x.get<int>());
          c.valuation[k] = set;
        }
        c.world = w["witness"].at("world").get<int>();
        c.instance = parse(w["witness"].at("instance").get<std::string>());
        r.witness = c;
      }
      s.witnesses.push_back(std::move(r));
    }
    return s;
  });
}

std::vector<Derivation> proofs_from_json(const json& j) {
  std::vector<Derivation> out;
  if (!j.contains("lemmas") || !j["lemmas"].is_array()) throw IoError("proof file needs a \"lemmas\" array");
  for (auto& l : j["lemmas"]) {
    const std::string name = l.value("name", "");
    if (name.empty()) throw IoError("lemma without a name");
    const std::string where = "lemma " + name;
    out.push_back(wrap(where, [&] {
      Derivation d;
      d.name = name;
      auto sys = system_from_name(l.value("system", "H_DPL"));
      if (!sys) throw IoError("unknown system " + l.value("system", ""));
      d.system = *sys;
      d.metavars = l.value("metavars", std::vector<std::string>{});
      for (auto& c : l.value("constraints", std::vector<std::string>{})) d.constraints.push_back(parse_constraint(c));
      for (auto& a : l.value("assumptions", json::array())) d.assumptions.push_back(formula_from(a, where));
      d.steps = steps_from(l.at("steps"), where);
      if (d.steps.empty()) throw IoError("no steps");
      return d;
    }));
  }
  return out;
}

json proofs_to_json(const std::vector<Derivation>& ds) {
  json lemmas = json::array();
  for (auto& d : ds) {
    json cons = json::array(), as = json::array(), steps = json::array();
    for (auto& c : d.constraints) cons.push_back(c.str());
    for (auto& a : d.assumptions) as.push_back(print(a));
    for (auto& s : d.steps) steps.push_back(step_to(s));
    lemmas.push_back({{"name", d.name},
                      {"system", system_name(d.system)},
                      {"metavars", d.metavars},
                      {"constraints", cons},
                      {"assumptions", as},
                      {"steps", steps}});
  }
  return {{"lemmas", lemmas}};
}

}  // namespace dpl
