#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "proxident/config.hpp"
#include "proxident/latent.hpp"
#include "proxident/models.hpp"
#include "proxident/oracle.hpp"
#include "proxident/sem.hpp"
#include "proxident/tensor.hpp"

namespace proxident {

/// A pass/fail decision together with the number it was decided on.
struct Verdict {
  bool pass = false;
  double margin = 0.0;
  std::string detail;
};

/// Completeness of P_{U|Z,a} and solvability of P_{Y|Z,a} = H_a P_{W|Z,a}.
struct BridgeSetReport {
  bool applicable = false;
  bool pass = false;
  std::vector<std::size_t> completeness_rank;
  std::vector<double> completeness_ratio;  ///< sigma_min / sigma_max of P_{U|Z,a}
  std::vector<double> residual;
};

/// Square invertible P_{Z|U,a}, P_{W|U}; some row of P_{Y|U,a} with distinct entries.
struct InvertibilitySetReport {
  bool applicable = false;
  bool pass = false;
  bool invertible = false;  ///< both proxy matrices square with full rank
  bool distinct = false;    ///< distinct-entry row exists at every level
  double w_condition = 0.0;
  std::vector<double> z_condition;
  std::vector<double> distinct_margin;  ///< max over rows of the min pairwise gap
};

/// 2R + 2 <= kA + kB + kC per treatment level.
struct KruskalSetReport {
  bool applicable = false;
  bool pass = false;
  std::vector<KruskalCheck> per_treatment;
};

struct AssumptionReport {
  Structure structure = Structure::Fig3ProxyPair;
  std::string latent;
  std::size_t latent_cardinality = 0;
  std::map<std::string, Verdict> markov;
  bool markov_bridge = false;  ///< independences the bridge approach needs
  bool markov_array = false;   ///< independences the array approach needs
  Verdict positivity;
  BridgeSetReport bridge;
  InvertibilitySetReport invertibility;
  KruskalSetReport kruskal;
};

/// Audit every named assumption on a latent-visible law.
AssumptionReport audit(const FullLaw& law, Structure structure, const Tolerances& tol = {});

enum class NestingCell { Both, BridgeOnly, KruskalOnly, Neither };

std::string_view to_string(NestingCell cell) noexcept;
NestingCell parse_cell(std::string_view text);

bool bridge_conditions_hold(const AssumptionReport& report);
bool kruskal_conditions_hold(const AssumptionReport& report);
bool invertibility_conditions_hold(const AssumptionReport& report);

NestingCell classify(const AssumptionReport& report);

/// Values each variable may take during the witness search.
struct CardinalityGrid {
  Structure structure = Structure::Fig3ProxyPair;
  std::map<std::string, std::vector<std::size_t>> choices;
  double collinear_probability = 0.3;

  static CardinalityGrid defaults();
};

struct Witness {
  ModelSpec spec;
  NestingCell cell = NestingCell::Neither;
  AssumptionReport report;
};

struct SearchResult {
  std::uint64_t seed = 0;
  std::size_t budget = 0;
  std::size_t evaluated = 0;
  std::size_t generation_failures = 0;
  std::map<NestingCell, std::vector<Witness>> witnesses;
  std::vector<NestingCell> empty_cells;
};

/// Spec of the i-th search candidate; regenerates the same model anywhere.
ModelSpec search_candidate(std::uint64_t seed, std::size_t index, const CardinalityGrid& grid);

/// Random search until every assumption cell has a witness or the budget is
/// spent. Results do not depend on `jobs`.
SearchResult search_nonnested(std::size_t budget, std::uint64_t seed,
                              const CardinalityGrid& grid = CardinalityGrid::defaults(),
                              const Tolerances& tol = {}, std::size_t jobs = 1,
                              std::size_t max_per_cell = 1);

/// Regenerate a witness from its spec and re-audit it.
NestingCell reverify(const Witness& witness, const Tolerances& tol = {});

struct MethodOutcome {
  std::string method;
  bool succeeded = false;
  std::string error;
  double max_deviation = 0.0;  ///< vs the oracle counterfactual
  std::optional<double> latent_error;
  std::optional<CounterfactualLaw> counterfactual;
};

struct ComparisonReport {
  AssumptionReport audit;
  NestingCell cell = NestingCell::Neither;
  std::optional<CounterfactualLaw> oracle;
  std::vector<MethodOutcome> methods;
};

/// Audit, then run every identifier whose assumptions hold and compare it
/// with the oracle. Identifier failures are recorded, not thrown.
ComparisonReport run_comparison(const FullLaw& law, Structure structure,
                                const Tolerances& tol = {}, const CpOptions& cp = {});

struct SemLevelCheck {
  double level = 0.0;
  double closed_form = 0.0;
  MonteCarloMean monte_carlo;
  double z_score = 0.0;
  bool within_three_se = false;
};

struct SemComparison {
  GaussianSem sem;
  std::vector<SemLevelCheck> levels;
  double ace_closed_form = 0.0;  ///< E[Y(1)] - E[Y(0)]
};

/// Closed-form E[Y(a)] against interventional Monte Carlo per level.
SemComparison compare_sem(const GaussianSem& sem, const std::vector<double>& levels,
                          std::size_t draws, std::uint64_t seed);

}  // namespace proxident
