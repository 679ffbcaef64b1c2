#include "proxident/harness.hpp"

#include <algorithm>
#include <atomic>
#include <cctype>
#include <cmath>
#include <limits>
#include <sstream>
#include <thread>

#include "proxident/bridge.hpp"
#include "proxident/errors.hpp"
#include "proxident/linalg.hpp"
#include "proxident/rng.hpp"

namespace proxident {
namespace {

using Eigen::Index;
using Eigen::MatrixXd;
using Eigen::VectorXd;

Index idx(std::size_t i) { return static_cast<Index>(i); }

std::string join(const std::vector<std::string>& names) {
  std::string out;
  for (std::size_t i = 0; i < names.size(); ++i) out += (i ? "," : "") + names[i];
  return out;
}

Verdict ci_verdict(const FullLaw& law, const std::vector<std::string>& x,
                   const std::vector<std::string>& y, const std::vector<std::string>& given,
                   double tol) {
  const double dev = ci_deviation(law, x, y, given);
  return {dev <= tol, dev, "max deviation " + std::to_string(dev)};
}

Verdict mutual_verdict(const FullLaw& law, const std::vector<std::string>& vars,
                       const std::vector<std::string>& given, double tol) {
  std::vector<std::vector<std::string>> groups;
  for (const auto& v : vars) groups.push_back({v});
  const double dev = mutual_independence_deviation(law, groups, given);
  return {dev <= tol, dev, "max deviation " + std::to_string(dev)};
}

void add_ci(AssumptionReport& r, const FullLaw& law, const std::vector<std::string>& x,
            const std::vector<std::string>& y, const std::vector<std::string>& given, double tol) {
  r.markov[join(x) + " _||_ " + join(y) + " | " + join(given)] = ci_verdict(law, x, y, given, tol);
}

void add_mutual(AssumptionReport& r, const FullLaw& law, const std::vector<std::string>& vars,
                const std::vector<std::string>& given, double tol) {
  r.markov[join(vars) + " mutual | " + join(given)] = mutual_verdict(law, vars, given, tol);
}

bool passes(const AssumptionReport& r, std::initializer_list<std::string> keys) {
  for (const auto& k : keys) {
    const auto it = r.markov.find(k);
    if (it == r.markov.end() || !it->second.pass) return false;
  }
  return true;
}

// Minimum of f(pair) over every joint state of the given variables.
double min_joint_mass(const FullLaw& law, const std::vector<std::string>& vars) {
  const FullLaw m = marginalize(law, vars);
  double lo = std::numeric_limits<double>::infinity();
  for (double p : m.probabilities()) lo = std::min(lo, p);
  return lo;
}

VectorXd latent_given(const FullLaw& law, const std::string& latent, const Assignment& context) {
  const FullLaw c = condition(law, {latent}, context);
  VectorXd f(idx(c.size()));
  for (std::size_t i = 0; i < c.size(); ++i) f(idx(i)) = c.probabilities()[i];
  return f;
}

double best_distinct_row_gap(const MatrixXd& p_y_given_u) {
  if (p_y_given_u.cols() < 2) return std::numeric_limits<double>::infinity();
  double best = 0.0;
  for (Index y = 0; y < p_y_given_u.rows(); ++y) {
    double gap = std::numeric_limits<double>::infinity();
    for (Index i = 0; i < p_y_given_u.cols(); ++i) {
      for (Index j = i + 1; j < p_y_given_u.cols(); ++j) {
        gap = std::min(gap, std::abs(p_y_given_u(y, i) - p_y_given_u(y, j)));
      }
    }
    best = std::max(best, gap);
  }
  return best;
}

void audit_bridge(AssumptionReport& r, const FullLaw& law, const Tolerances& tol) {
  r.bridge.applicable = true;
  const ProxyRoles roles;
  const FullLaw observed = marginalize(law, roles.observed());
  bool ok = r.positivity.pass && r.markov_bridge;
  if (!r.positivity.pass) {
    r.bridge.pass = false;
    return;
  }
  const std::size_t na = law.cardinality(roles.treatment);
  for (std::size_t a = 0; a < na; ++a) {
    const CompletenessReport c = check_completeness_discrete(law, a, r.latent, roles, tol);
    r.bridge.completeness_rank.push_back(c.rank);
    r.bridge.completeness_ratio.push_back(c.sigma_ratio);
    const BridgeSolve s = solve_bridge(observed, a, tol.bridge_audit, roles, tol);
    r.bridge.residual.push_back(s.residual);
    ok = ok && c.complete && s.solvable;
  }
  r.bridge.pass = ok;
}

void audit_invertibility(AssumptionReport& r, const FullLaw& law, const Tolerances& tol) {
  r.invertibility.applicable = true;
  if (!r.positivity.pass) return;
  const ProxyRoles roles;
  const std::size_t nu = r.latent_cardinality;
  const MatrixXd p_wu = cond_matrix(law, roles.w, r.latent).entries;
  r.invertibility.w_condition = linalg::condition_number(p_wu);
  bool invertible = law.cardinality(roles.w) == nu && law.cardinality(roles.z) == nu &&
                    linalg::numerical_rank(p_wu, tol.rank) == nu;
  bool distinct = true;
  for (std::size_t a = 0; a < law.cardinality(roles.treatment); ++a) {
    const Assignment context{{roles.treatment, a}};
    const MatrixXd p_zu = cond_matrix(law, roles.z, r.latent, context).entries;
    r.invertibility.z_condition.push_back(linalg::condition_number(p_zu));
    invertible = invertible && linalg::numerical_rank(p_zu, tol.rank) == nu;
    const MatrixXd p_yu = cond_matrix(law, roles.outcome, r.latent, context).entries;
    const double gap = best_distinct_row_gap(p_yu);
    r.invertibility.distinct_margin.push_back(gap);
    distinct = distinct && gap >= tol.eigen_gap;
  }
  r.invertibility.invertible = invertible;
  r.invertibility.distinct = distinct;
  r.invertibility.pass = invertible && distinct && r.markov_array;
}

KruskalCheck kruskal_at(const FullLaw& law, const std::string& latent, const Assignment& context,
                        const Tolerances& tol) {
  const ProxyRoles roles;
  CpFactors f;
  f.a = cond_matrix(law, roles.w, latent).entries;
  f.b = cond_matrix(law, roles.z, latent, context).entries *
        latent_given(law, latent, context).asDiagonal();
  f.c = cond_matrix(law, roles.outcome, latent, context).entries;
  return check_kruskal(f, tol.rank);
}

void audit_kruskal(AssumptionReport& r, const FullLaw& law, bool has_treatment,
                   const Tolerances& tol) {
  r.kruskal.applicable = true;
  if (!r.positivity.pass) return;
  bool ok = r.markov_array;
  if (has_treatment) {
    for (std::size_t a = 0; a < law.cardinality("A"); ++a) {
      r.kruskal.per_treatment.push_back(kruskal_at(law, r.latent, {{"A", a}}, tol));
    }
  } else {
    r.kruskal.per_treatment.push_back(kruskal_at(law, r.latent, {}, tol));
  }
  for (const auto& k : r.kruskal.per_treatment) ok = ok && k.holds;
  r.kruskal.pass = ok;
}

}  // namespace

AssumptionReport audit(const FullLaw& law, Structure structure, const Tolerances& tol) {
  AssumptionReport r;
  r.structure = structure;
  r.latent = proxied_latent(structure);
  r.latent_cardinality = law.cardinality(r.latent);
  const double ci = tol.ci;
  const std::string& u = r.latent;

  std::vector<std::vector<std::string>> positive_sets;
  switch (structure) {
    case Structure::Fig2ConfounderProxies:
    case Structure::Fig3ProxyPair:
    case Structure::FigA3MediatorProxies:
      add_ci(r, law, {"W"}, {"Z", "A"}, {u}, ci);
      add_ci(r, law, {"Z"}, {"Y"}, {u, "A"}, ci);
      add_ci(r, law, {"W"}, {"A"}, {u}, ci);
      add_mutual(r, law, {"W", "Z", "Y"}, {u, "A"}, ci);
      r.markov_bridge = passes(r, {"W _||_ Z,A | " + u, "Z _||_ Y | " + u + ",A"});
      r.markov_array = passes(r, {"W,Z,Y mutual | " + u + ",A", "W _||_ A | " + u});
      positive_sets = {{"A", u}, {"A", "Z"}};
      if (structure == Structure::FigA3MediatorProxies) {
        add_ci(r, law, {"M"}, {"U"}, {"A"}, ci);
        add_ci(r, law, {"Y"}, {"A"}, {"M", "U"}, ci);
        r.markov_array = r.markov_array && passes(r, {"M _||_ U | A", "Y _||_ A | M,U"});
        r.markov_bridge = false;
        positive_sets.push_back({"A", "U"});
      }
      break;
    case Structure::Fig4TripleProxy:
      add_mutual(r, law, {"W", "Z", "Y"}, {u}, ci);
      r.markov_array = passes(r, {"W,Z,Y mutual | " + u});
      positive_sets = {{u}};
      break;
    case Structure::FigA1Frontdoor:
      add_ci(r, law, {"M"}, {"U"}, {"A"}, ci);
      add_ci(r, law, {"Y"}, {"A"}, {"M", "U"}, ci);
      positive_sets = {{"A", "U"}, {"A", "M"}};
      break;
  }

  double lo = std::numeric_limits<double>::infinity();
  std::string worst;
  for (const auto& vars : positive_sets) {
    const double m = min_joint_mass(law, vars);
    if (m < lo) {
      lo = m;
      worst = join(vars);
    }
  }
  r.positivity = {lo > 0.0, lo, "min joint mass over (" + worst + ")"};

  switch (structure) {
    case Structure::Fig2ConfounderProxies:
    case Structure::Fig3ProxyPair:
      audit_bridge(r, law, tol);
      audit_invertibility(r, law, tol);
      audit_kruskal(r, law, true, tol);
      break;
    case Structure::FigA3MediatorProxies:
      audit_invertibility(r, law, tol);
      break;
    case Structure::Fig4TripleProxy:
      audit_kruskal(r, law, false, tol);
      break;
    case Structure::FigA1Frontdoor:
      break;
  }
  return r;
}

std::string_view to_string(NestingCell cell) noexcept {
  switch (cell) {
    case NestingCell::Both: return "BOTH";
    case NestingCell::BridgeOnly: return "BRIDGE_ONLY";
    case NestingCell::KruskalOnly: return "KRUSKAL_ONLY";
    case NestingCell::Neither: return "NEITHER";
  }
  return "NEITHER";
}

NestingCell parse_cell(std::string_view text) {
  std::string up(text);
  for (auto& ch : up) ch = static_cast<char>(std::toupper(static_cast<unsigned char>(ch)));
  for (auto c : {NestingCell::Both, NestingCell::BridgeOnly, NestingCell::KruskalOnly,
                 NestingCell::Neither}) {
    if (up == to_string(c)) return c;
  }
  throw DomainError("unknown cell '" + std::string(text) + "'");
}

bool bridge_conditions_hold(const AssumptionReport& r) {
  return r.bridge.applicable && r.bridge.pass && r.positivity.pass;
}

bool kruskal_conditions_hold(const AssumptionReport& r) {
  return r.kruskal.applicable && r.kruskal.pass && r.positivity.pass;
}

bool invertibility_conditions_hold(const AssumptionReport& r) {
  return r.invertibility.applicable && r.invertibility.pass && r.positivity.pass;
}

NestingCell classify(const AssumptionReport& r) {
  const bool bridge = bridge_conditions_hold(r);
  const bool kruskal = kruskal_conditions_hold(r);
  if (bridge && kruskal) return NestingCell::Both;
  if (bridge) return NestingCell::BridgeOnly;
  if (kruskal) return NestingCell::KruskalOnly;
  return NestingCell::Neither;
}

CardinalityGrid CardinalityGrid::defaults() {
  CardinalityGrid g;
  g.structure = Structure::Fig3ProxyPair;
  g.choices = {{"U", {2, 3}}, {"Z", {1, 2, 3, 4}}, {"W", {1, 2, 3, 4}},
               {"Y", {2, 3, 4, 5, 6}}, {"A", {2}}};
  return g;
}

ModelSpec search_candidate(std::uint64_t seed, std::size_t index, const CardinalityGrid& grid) {
  CounterRng rng(CounterRng::derive(seed, index));
  ModelSpec spec;
  spec.structure = grid.structure;
  for (const auto& name : structure_variables(grid.structure)) {
    const auto it = grid.choices.find(name);
    if (it == grid.choices.end() || it->second.empty()) {
      throw DomainError("cardinality grid has no choices for '" + name + "'");
    }
    spec.cardinalities[name] = it->second[rng.below(it->second.size())];
  }
  spec.constraints.collinear_outcome = rng.uniform() < grid.collinear_probability;
  spec.seed = rng();
  spec.max_retries = 1;
  return spec;
}

namespace {

struct Evaluated {
  ModelSpec spec;
  bool generated = false;
  NestingCell cell = NestingCell::Neither;
  AssumptionReport report;
};

Evaluated evaluate_candidate(std::uint64_t seed, std::size_t index, const CardinalityGrid& grid,
                             const Tolerances& tol) {
  Evaluated e;
  e.spec = search_candidate(seed, index, grid);
  try {
    const FullLaw law = generate(e.spec, tol);
    e.report = audit(law, e.spec.structure, tol);
    e.cell = classify(e.report);
    e.generated = true;
  } catch (const GenerationError&) {
  } catch (const ConditioningError&) {
  }
  return e;
}

}  // namespace

SearchResult search_nonnested(std::size_t budget, std::uint64_t seed, const CardinalityGrid& grid,
                              const Tolerances& tol, std::size_t jobs, std::size_t max_per_cell) {
  if (budget == 0) throw DomainError("search budget must be at least 1");
  if (max_per_cell == 0) throw DomainError("max_per_cell must be at least 1");
  jobs = std::max<std::size_t>(1, jobs);
  constexpr std::size_t kChunk = 64;
  const std::vector<NestingCell> cells{NestingCell::Both, NestingCell::BridgeOnly,
                                      NestingCell::KruskalOnly, NestingCell::Neither};
  SearchResult result;
  result.seed = seed;
  result.budget = budget;
  for (auto c : cells) result.witnesses[c];

  auto complete = [&] {
    return std::all_of(cells.begin(), cells.end(),
                       [&](NestingCell c) { return result.witnesses[c].size() >= max_per_cell; });
  };

  for (std::size_t start = 0; start < budget && !complete(); start += kChunk) {
    const std::size_t count = std::min(kChunk, budget - start);
    std::vector<Evaluated> batch(count);
    if (jobs == 1) {
      for (std::size_t i = 0; i < count; ++i) batch[i] = evaluate_candidate(seed, start + i, grid, tol);
    } else {
      std::atomic<std::size_t> next{0};
      std::vector<std::thread> workers;
      for (std::size_t w = 0; w < std::min(jobs, count); ++w) {
        workers.emplace_back([&] {
          for (std::size_t i = next++; i < count; i = next++) {
            batch[i] = evaluate_candidate(seed, start + i, grid, tol);
          }
        });
      }
      for (auto& t : workers) t.join();
    }
    for (std::size_t i = 0; i < count && !complete(); ++i) {
      ++result.evaluated;
      Evaluated& e = batch[i];
      if (!e.generated) {
        ++result.generation_failures;
        continue;
      }
      auto& list = result.witnesses[e.cell];
      if (list.size() < max_per_cell) list.push_back({std::move(e.spec), e.cell, std::move(e.report)});
    }
  }
  for (auto c : cells) {
    if (result.witnesses[c].empty()) result.empty_cells.push_back(c);
  }
  return result;
}

NestingCell reverify(const Witness& witness, const Tolerances& tol) {
  const FullLaw law = generate(witness.spec, tol);
  return classify(audit(law, witness.spec.structure, tol));
}

namespace {

template <typename Fn>
MethodOutcome attempt(const std::string& name, const std::optional<CounterfactualLaw>& oracle,
                      Fn&& run) {
  MethodOutcome out;
  out.method = name;
  try {
    run(out);
    out.succeeded = true;
    if (out.counterfactual && oracle) {
      out.max_deviation = max_abs_difference(*out.counterfactual, *oracle);
    }
  } catch (const Error& e) {
    out.succeeded = false;
    out.error = e.what();
  }
  return out;
}

// Latent factors of a treatment-free triple-proxy law from a rank-|L| CP fit.
double triple_proxy_latent_error(const FullLaw& law, const std::string& latent,
                                 const CpOptions& cp, const Tolerances& tol) {
  const FullLaw observed = marginalize(law, {"W", "Z", "Y"});
  const ThreeWayArray t = build_array(observed, {"W", "Z", "Y"});
  const std::size_t r = law.cardinality(latent);
  const CpResult fit = recover_cp(t, r, cp);
  if (fit.fit > tol.cp_fit) throw RecoveryError("CP fit error " + std::to_string(fit.fit), fit.fit);
  MatrixXd a = fit.factors.a, b = fit.factors.b, c = fit.factors.c;
  for (Index k = 0; k < a.cols(); ++k) {
    const double sa = a.col(k).sum();
    const double sc = c.col(k).sum();
    a.col(k) /= sa;
    c.col(k) /= sc;
    b.col(k) *= sa * sc;
  }
  const VectorXd f_l = b.colwise().sum().transpose();
  const MatrixXd true_w = cond_matrix(law, "W", latent).entries;
  const MatrixXd true_y = cond_matrix(law, "Y", latent).entries;
  const VectorXd true_f = marginal_vector(law, latent);
  const auto perm = linalg::min_cost_assignment(linalg::column_tv_cost(true_w, a));
  double err = (true_w - linalg::permute_columns(a, perm)).cwiseAbs().maxCoeff();
  err = std::max(err, (true_y - linalg::permute_columns(c, perm)).cwiseAbs().maxCoeff());
  err = std::max(err, (true_f - linalg::permute(f_l, perm)).cwiseAbs().maxCoeff());
  return err;
}

}  // namespace

ComparisonReport run_comparison(const FullLaw& law, Structure structure, const Tolerances& tol,
                                const CpOptions& cp) {
  ComparisonReport out;
  out.audit = audit(law, structure, tol);
  out.cell = classify(out.audit);
  const ProxyRoles roles;

  if (structure != Structure::Fig4TripleProxy) {
    try {
      out.oracle = adjust(law, {"U"}, roles);
    } catch (const ConditioningError&) {
    }
  }

  switch (structure) {
    case Structure::Fig2ConfounderProxies:
    case Structure::Fig3ProxyPair: {
      const FullLaw observed = marginalize(law, roles.observed());
      const LatentRecovery truth = true_latent_factors(law, "U", roles);
      if (bridge_conditions_hold(out.audit)) {
        out.methods.push_back(attempt("bridge", out.oracle, [&](MethodOutcome& m) {
          m.counterfactual = identify_bridge(observed, tol, roles).counterfactual;
        }));
      }
      if (invertibility_conditions_hold(out.audit)) {
        out.methods.push_back(attempt("eigen", out.oracle, [&](MethodOutcome& m) {
          const ArrayIdentification id = identify_array(observed, ArrayMode::Eigen, tol, roles);
          m.counterfactual = id.counterfactual;
          m.latent_error = compare_latent(id.latent, truth).max_error;
        }));
      } else if (kruskal_conditions_hold(out.audit)) {
        out.methods.push_back(attempt("cp", out.oracle, [&](MethodOutcome& m) {
          const ArrayIdentification id = identify_array(observed, ArrayMode::Cp, tol, roles,
                                                        out.audit.latent_cardinality, cp);
          m.counterfactual = id.counterfactual;
          m.latent_error = compare_latent(id.latent, truth).max_error;
        }));
      }
      break;
    }
    case Structure::Fig4TripleProxy:
      if (kruskal_conditions_hold(out.audit)) {
        out.methods.push_back(attempt("cp", out.oracle, [&](MethodOutcome& m) {
          m.latent_error = triple_proxy_latent_error(law, out.audit.latent, cp, tol);
        }));
      }
      break;
    case Structure::FigA1Frontdoor:
      if (out.audit.positivity.pass) {
        out.methods.push_back(attempt("frontdoor", out.oracle, [&](MethodOutcome& m) {
          m.counterfactual = frontdoor(marginalize(law, {"A", "M", "Y"}), "M", roles);
        }));
      }
      break;
    case Structure::FigA3MediatorProxies:
      if (invertibility_conditions_hold(out.audit)) {
        out.methods.push_back(attempt("mediator_eigen", out.oracle, [&](MethodOutcome& m) {
          m.counterfactual = identify_mediator_array(marginalize(law, roles.observed()), tol, roles);
        }));
      }
      break;
  }
  return out;
}

SemComparison compare_sem(const GaussianSem& sem, const std::vector<double>& levels,
                          std::size_t draws, std::uint64_t seed) {
  sem.validate();
  SemComparison out;
  out.sem = sem;
  out.ace_closed_form = sem_ace(sem, 1.0, 0.0);
  for (std::size_t i = 0; i < levels.size(); ++i) {
    SemLevelCheck check;
    check.level = levels[i];
    check.closed_form = sem_counterfactual_mean(sem, levels[i]);
    check.monte_carlo = sem_interventional_mean(sem, levels[i], draws, CounterRng::derive(seed, i));
    const double se = check.monte_carlo.standard_error;
    const double diff = check.monte_carlo.mean - check.closed_form;
    check.z_score = se > 0.0 ? diff / se : (diff == 0.0 ? 0.0 : std::numeric_limits<double>::infinity());
    check.within_three_se = std::abs(check.z_score) <= 3.0;
    out.levels.push_back(check);
  }
  return out;
}

}  // namespace proxident
