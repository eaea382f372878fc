#include <doctest.h>

#include "../support/generators.hpp"
#include "dpl/io.hpp"
#include "dpl/proofs.hpp"

using namespace dpl;

namespace {

Rational q(long a, long b = 1) { return Rational(a, b); }

const std::string kData = DPL_DATA_DIR;

Derivation lemma(const std::string& text) {
  auto ds = proofs_from_json(json::parse(R"({"lemmas":[)" + text + "]}"));
  return ds.at(0);
}

ConstraintSet constraints_of(const json& c) {
  ConstraintSet cs;
  for (auto& b : c.value("bounded", std::vector<std::string>{})) cs.bounded.insert(b);
  for (auto& t : c.at("constraints")) cs.items.push_back(parse_constraint(t.get<std::string>()));
  return cs;
}

Library corpus_library() { return check_all(proofs_from_json(read_json_file(kData + "/corpus.json"))).accepted; }

}  // namespace

TEST_CASE("systems and rules") {
  for (auto s : {System::DPL, System::M, System::Pure, System::ADS}) {
    CHECK(system_from_name(system_name(s)) == s);
    CHECK(system_includes(s, System::DPL));
  }
  CHECK_FALSE(system_includes(System::DPL, System::M));
  CHECK(system_includes(System::ADS, System::M));
  CHECK_FALSE(system_includes(System::Pure, System::ADS));
  auto dpl = axiom_names(System::DPL);
  CHECK(std::find(dpl.begin(), dpl.end(), "FA3") != dpl.end());
  CHECK(std::find(dpl.begin(), dpl.end(), "M") == dpl.end());
  auto ads = axiom_names(System::ADS);
  CHECK(std::find(ads.begin(), ads.end(), "H2") != ads.end());
  for (auto r : {RuleKind::Axiom, RuleKind::Assumption, RuleKind::Theorem, RuleKind::MP, RuleKind::NecL1,
                 RuleKind::NecNext, RuleKind::GArch})
    CHECK(rule_from_name(rule_name(r)) == r);
}

TEST_CASE("tautology") {
  CHECK(tautology(parse("a -> a")));
  CHECK_FALSE(tautology(parse("a -> b")));
  CHECK(tautology(parse("((a -> b) & a) -> b")));
  CHECK(tautology(parse("L[r] p -> L[r] p")));
  CHECK_FALSE(tautology(parse("L[r] p -> L[s] p")));
  CHECK(tautology(parse("O (p & q) | !O (p & q)")));
  CHECK_FALSE(tautology(parse("O p -> p")));
  // beyond the truth-table limit
  std::string big = "a0";
  for (int i = 1; i < 24; ++i) big = "(" + big + " & a" + std::to_string(i) + ")";
  CHECK(tautology(parse(big + " -> a7")));
  CHECK_FALSE(tautology(parse(big + " -> b")));
}

TEST_CASE("axiom matching") {
  ConstraintSet none;
  CHECK(match_axiom(System::DPL, "FA2", parse("L[3/5] !p -> !L[3/5] p"), none).ok);
  CHECK_FALSE(match_axiom(System::DPL, "FA2", parse("L[2/5] !p -> !L[2/5] p"), none).ok);
  CHECK(match_axiom(System::DPL, "Taut", parse("L[r] p -> L[r] p"), none).ok);
  CHECK(match_axiom(System::DPL, "FA1", parse("L[0] false"), none).ok);
  CHECK(match_axiom(System::DPL, "FA3", parse("L[1/4] (p & q) & L[1/2] (p & !q) -> L[3/4] p"), none).ok);
  CHECK_FALSE(match_axiom(System::DPL, "FA3", parse("L[1/4] (p & q) & L[1/2] (p & !q) -> L[1/2] p"), none).ok);
  CHECK(match_axiom(System::DPL, "Mono", parse("L[1] (p -> O q) -> (L[1/3] p -> L[1/3] O q)"), none).ok);
  CHECK(match_axiom(System::DPL, "FuncO", parse("O !L[1] p <-> !O L[1] p"), none).ok);
  CHECK_FALSE(match_axiom(System::DPL, "M", parse("L[1/2] O p <-> O L[1/2] p"), none).ok);
  CHECK(match_axiom(System::M, "M", parse("L[1/2] O p <-> O L[1/2] p"), none).ok);
  CHECK(match_axiom(System::Pure, "Id", parse("O (p & q) <-> p & q"), none).ok);
  CHECK(match_axiom(System::ADS, "H2", parse("!L[1/2] p -> L[1] !L[1/2] p"), none).ok);

  ConstraintSet sym;
  sym.bounded = {"r", "s"};
  sym.items = {parse_constraint("r + s > 1")};
  CHECK(match_axiom(System::DPL, "FA2", parse("L[r] !p -> !L[s] p"), sym).ok);
  CHECK_FALSE(match_axiom(System::DPL, "FA2", parse("L[r] !p -> !L[s] p"), ConstraintSet{{"r", "s"}, {}}).ok);
}

TEST_CASE("constraint parsing") {
  CHECK(parse_constraint("s < r").rel == Rel::Lt);
  CHECK(parse_constraint("r + s <= 1").rel == Rel::Le);
  CHECK(parse_constraint("r = 1 - s").rel == Rel::Eq);
  CHECK_THROWS_AS(parse_constraint("r != s"), ConstraintError);
  CHECK_THROWS_AS(parse_constraint("r * s <= 1"), ConstraintError);
  CHECK_THROWS_AS(parse_constraint("r < s < 1"), ConstraintError);
  CHECK_THROWS_AS(parse_constraint("r + s"), ConstraintError);
  CHECK(parse_constraint("s >= 1/2").holds({{"s", q(1, 2)}}));
  CHECK_FALSE(parse_constraint("s > 1/2").holds({{"s", q(1, 2)}}));
}

TEST_CASE("entailment examples") {
  ConstraintSet a{{}, {parse_constraint("s < r"), parse_constraint("r <= 1")}};
  CHECK(entails(a, parse_constraint("s < 1")));
  ConstraintSet b{{}, {parse_constraint("r + s <= 1")}};
  CHECK_FALSE(entails(b, parse_constraint("r + s > 1")));
  ConstraintSet c{{}, {parse_constraint("s >= 1/2"), parse_constraint("r >= 3/5")}};
  CHECK(entails(c, parse_constraint("r + s > 1")));
  CHECK(satisfiable(a));
  CHECK_FALSE(satisfiable(ConstraintSet{{}, {parse_constraint("r < 0"), parse_constraint("r > 0")}}));
  CHECK_FALSE(satisfiable(ConstraintSet{{"r"}, {parse_constraint("r > 1")}}));
}

TEST_CASE("entailment fixture") {
  json fx = read_json_file(kData + "/entailment.json");
  REQUIRE(fx["cases"].size() == 30);
  for (auto& c : fx["cases"]) {
    ConstraintSet cs = constraints_of(c);
    Constraint goal = parse_constraint(c["goal"].get<std::string>());
    INFO(c.dump());
    CHECK(entails(cs, goal) == c["expected"].get<bool>());
  }
}

TEST_CASE("entailment fixture: negative answers have grid countermodels") {
  // independent check of the fixture: search a rational grid for a model of
  // the premises that violates the goal
  std::vector<Rational> grid;
  for (int num = -24; num <= 24; ++num) grid.push_back(Rational(num, 12));
  json fx = read_json_file(kData + "/entailment.json");
  for (auto& c : fx["cases"]) {
    if (c["expected"].get<bool>()) continue;
    ConstraintSet cs = constraints_of(c);
    Constraint goal = parse_constraint(c["goal"].get<std::string>());
    std::set<std::string> vs = cs.vars();
    for (auto& v : goal.lhs.vars()) vs.insert(v);
    for (auto& v : goal.rhs.vars()) vs.insert(v);
    std::vector<std::string> names(vs.begin(), vs.end());
    bool found = false;
    std::map<std::string, Rational> env;
    std::function<void(std::size_t)> search = [&](std::size_t i) {
      if (found) return;
      if (i == names.size()) {
        for (auto& b : cs.bounded)
          if (!in_unit_interval(env[b])) return;
        for (auto& k : cs.items)
          if (!k.holds(env)) return;
        found = !goal.holds(env);
        return;
      }
      for (auto& g : grid) {
        env[names[i]] = g;
        search(i + 1);
      }
    };
    search(0);
    INFO(c.dump());
    CHECK(found);
  }
}

TEST_CASE("derivation examples") {
  Library none;
  CHECK(check_derivation(
            lemma(R"({"name":"t","steps":[{"id":1,"formula":"p -> p","rule":"Axiom","axiom":"Taut"}]})"), none)
            .ok);
  auto nec = check_derivation(lemma(R"({"name":"n","assumptions":["p"],"steps":[
      {"id":1,"formula":"p","rule":"Assumption","index":0},
      {"id":2,"formula":"L[1] p","rule":"Nec_L1","premises":[1]}]})"),
                              none);
  CHECK_FALSE(nec.ok);
  CHECK(nec.step == 2);
  CHECK(nec.reason.find("necessitation under assumptions") != std::string::npos);
  CHECK(nec.message().rfind("step 2 (Nec_L1): ", 0) == 0);
}

TEST_CASE("proof corpus is accepted") {
  auto lemmas = proofs_from_json(read_json_file(kData + "/corpus.json"));
  CHECK(lemmas.size() >= 8);
  LibraryReport rep = check_all(lemmas);
  for (auto& [name, r] : rep.results) {
    INFO(name, ": ", r.message());
    CHECK(r.ok);
  }
  CHECK(rep.all_ok());
  bool has_garch = false, has_assumptions = false;
  for (auto& d : lemmas) {
    has_assumptions = has_assumptions || !d.assumptions.empty();
    for (auto& s : d.steps) has_garch = has_garch || s.rule == RuleKind::GArch;
  }
  CHECK(has_garch);
  CHECK(has_assumptions);
  CHECK(equal(rep.accepted.at("garch_demo").conclusion(), parse("L[1] p -> L[1] p")));
}

TEST_CASE("negative fixtures fail with the expected reason") {
  Library lib = corpus_library();
  json neg = read_json_file(kData + "/negative.json");
  REQUIRE(neg["cases"].size() >= 15);
  for (auto& c : neg["cases"]) {
    Derivation d = proofs_from_json(json{{"lemmas", json::array({c["lemma"]})}}).at(0);
    CheckResult r = check_derivation(d, lib);
    INFO(d.name, ": ", r.message());
    CHECK_FALSE(r.ok);
    CHECK(r.message().find(c["expect"].get<std::string>()) != std::string::npos);
  }
}

TEST_CASE("accepted lemmas are frame valid on their class") {
  auto grid = testing::unit_grid(4);
  for (auto& [name, d] : corpus_library()) {
    SoundnessReport s = soundness_cross_check(d, 12, 17, 3, grid);
    INFO(name, " ", s.first_violation);
    CHECK(s.instances > 0);
    CHECK(s.violations == 0);
  }
}

TEST_CASE("soundness cross check detects invalid conclusions") {
  Derivation bogus = lemma(R"({"name":"b","steps":[{"id":1,"formula":"L[1/2] p -> p","rule":"Axiom","axiom":"Taut"}]})");
  SoundnessReport s = soundness_cross_check(bogus, 10, 1, 3, testing::unit_grid(2));
  CHECK(s.violations > 0);
  CHECK_FALSE(s.first_violation.empty());
}

TEST_CASE("ground assignments respect constraints") {
  Derivation d = lemma(R"({"name":"g","metavars":["r","s"],"constraints":["s < r"],
      "steps":[{"id":1,"formula":"L[r] p -> L[r] p","rule":"Axiom","axiom":"Taut"}]})");
  auto as = ground_assignments(d, testing::unit_grid(2));
  CHECK(as.size() == 3);  // (1/2,0), (1,0), (1,1/2)
  for (auto& a : as) CHECK(a.at("s") < a.at("r"));
}

TEST_CASE("proof files round trip") {
  auto lemmas = proofs_from_json(read_json_file(kData + "/corpus.json"));
  json again = proofs_to_json(lemmas);
  auto back = proofs_from_json(again);
  REQUIRE(back.size() == lemmas.size());
  CHECK(proofs_to_json(back) == again);
  CHECK(check_all(back).all_ok());
}

TEST_CASE("proof file errors") {
  CHECK_THROWS_AS(proofs_from_json(json::parse(R"({"x":1})")), IoError);
  CHECK_THROWS_AS(lemma(R"({"name":"x","steps":[{"id":1,"formula":"p -","rule":"Axiom","axiom":"Taut"}]})"), IoError);
  CHECK_THROWS_AS(lemma(R"({"name":"x","steps":[{"id":1,"formula":"p","rule":"Magic"}]})"), IoError);
  CHECK_THROWS_AS(lemma(R"({"name":"x","constraints":["r != s"],"steps":[{"id":1,"formula":"p","rule":"MP"}]})"),
                  IoError);
}
