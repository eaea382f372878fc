#pragma once

#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "dpl/definability.hpp"
#include "dpl/proofs.hpp"
#include "dpl/semantics.hpp"

namespace dpl {

using json = nlohmann::json;

class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

json read_json_file(const std::string& path);

Rational rational_from_json(const json& j);
json set_to_json(StateSet s);
StateSet set_from_json(const json& j, int n);

// {"states", "kernel", "map", "init"?, "valuation"?}; validated.
Process process_from_json(const json& j);
json process_to_json(const Process& p);
Model model_from_json(const json& j);
json model_to_json(const Model& m);
Valuation valuation_from_json(const json& j, int n);
json valuation_to_json(const Valuation& v);

json classification_to_json(const Classification& c);
json counterexample_to_json(const Counterexample& c);

json report_to_json(const CorrespondenceReport& r);
json summary_to_json(const ExperimentSummary& s);
ExperimentSummary summary_from_json(const json& j);

// {"lemmas": [...]}
std::vector<Derivation> proofs_from_json(const json& j);
json proofs_to_json(const std::vector<Derivation>& ds);

}  // namespace dpl
