#pragma once

#include <optional>
#include <string>
#include <string_view>

#include <Eigen/Dense>
#include <nlohmann/json.hpp>

#include "proxident/bridge.hpp"
#include "proxident/config.hpp"
#include "proxident/harness.hpp"
#include "proxident/latent.hpp"
#include "proxident/models.hpp"
#include "proxident/oracle.hpp"
#include "proxident/prob.hpp"
#include "proxident/sem.hpp"
#include "proxident/tensor.hpp"

/// JSON and CSV encodings of every library type. Non-finite numbers are
/// written as null. Readers throw DomainError naming the offending field.
namespace proxident::io {

using json = nlohmann::json;

/// Parse JSON text; syntax errors report line and column of `source`.
json parse(std::string_view text, std::string_view source = "<input>");
json read_file(const std::string& path);
std::string read_text(const std::string& path);
void write_text(const std::string& path, std::string_view text);
/// Two-space indented, newline-terminated.
std::string dump(const json& value);

json number(double value);

json to_json(const Eigen::MatrixXd& m);
json to_json(const Eigen::VectorXd& v);
/// Accepts a bare array of rows or {"matrix": [[...]]}.
Eigen::MatrixXd matrix_from_json(const json& j);

json to_json(const CategoricalDomain& d);
CategoricalDomain domain_from_json(const json& j, std::string_view where = "domain");

json to_json(const FullLaw& law);
FullLaw law_from_json(const json& j);

/// Structure named in the model document, else inferred from its variables
/// and edges. Throws DomainError when neither works.
Structure model_structure(const json& model, const FullLaw& law);

json to_json(const ModelSpec& spec);
ModelSpec spec_from_json(const json& j);

json to_json(const CounterfactualLaw& cf);
CounterfactualLaw counterfactual_from_json(const json& j);

json to_json(const GaussianSem& sem);
GaussianSem sem_from_json(const json& j);

json to_json(const ThreeWayArray& t);
ThreeWayArray tensor_from_json(const json& j);

json to_json(const Tolerances& tol);
json to_json(const CondMatrix& m);
json to_json(const CompletenessReport& r);
json to_json(const BridgeSolution& s);
json to_json(const KruskalCheck& k);
json to_json(const CpFactors& f);
json to_json(const CpResult& r);
json to_json(const LatentRecovery& r);
json to_json(const AssumptionReport& r);
json to_json(const MethodOutcome& m);
json to_json(const ComparisonReport& r);
json to_json(const Witness& w);
Witness witness_from_json(const json& j);
json to_json(const SearchResult& r);
json to_json(const SemComparison& c);

/// One row per identifier plus an oracle row, one column per assumption verdict.
std::string comparison_csv(const ComparisonReport& r);
/// One row per witness.
std::string search_csv(const SearchResult& r);

}  // namespace proxident::io
