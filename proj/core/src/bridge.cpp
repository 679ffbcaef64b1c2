#include "proxident/bridge.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <sstream>

#include "proxident/errors.hpp"
#include "proxident/linalg.hpp"

namespace proxident {

void require_observed_only(const FullLaw& law, const ProxyRoles& roles) {
  const auto wanted = roles.observed();
  const std::set<std::string> expected(wanted.begin(), wanted.end());
  const auto names = law.names();
  const std::set<std::string> actual(names.begin(), names.end());
  if (expected != actual || names.size() != wanted.size()) {
    std::ostringstream msg;
    msg << "identifier expects exactly the observed variables {";
    for (std::size_t i = 0; i < wanted.size(); ++i) msg << (i ? "," : "") << wanted[i];
    msg << "}, got {";
    for (std::size_t i = 0; i < names.size(); ++i) msg << (i ? "," : "") << names[i];
    msg << "}";
    throw DomainError(msg.str());
  }
}

CompletenessReport check_completeness_discrete(const FullLaw& law, std::size_t treatment_level,
                                               const std::string& latent, const ProxyRoles& roles,
                                               const Tolerances& tol) {
  const CondMatrix p_u_given_z =
      cond_matrix(law, latent, roles.z, {{roles.treatment, treatment_level}});
  CompletenessReport report;
  report.latent_cardinality = p_u_given_z.row.cardinality();
  report.singular_values = linalg::singular_values(p_u_given_z.entries);
  report.rank = linalg::numerical_rank(p_u_given_z.entries, tol.rank);
  report.complete = report.rank == report.latent_cardinality;
  const auto nu = static_cast<Eigen::Index>(report.latent_cardinality);
  if (report.singular_values.size() >= nu && report.singular_values(0) > 0.0) {
    report.sigma_ratio = report.singular_values(nu - 1) / report.singular_values(0);
  }
  return report;
}

BridgeSolve solve_bridge(const FullLaw& observed, std::size_t treatment_level, double residual_tol,
                         const ProxyRoles& roles, const Tolerances& tol) {
  require_observed_only(observed, roles);
  const Assignment context{{roles.treatment, treatment_level}};
  const CondMatrix p_y = cond_matrix(observed, roles.outcome, roles.z, context);
  const CondMatrix p_w = cond_matrix(observed, roles.w, roles.z, context);
  BridgeSolve out;
  out.h = linalg::right_solve(p_y.entries, p_w.entries, tol.rank);
  out.residual = (p_y.entries - out.h * p_w.entries).norm();
  out.solvable = out.residual <= residual_tol;
  out.rank = linalg::numerical_rank(p_w.entries, tol.rank);
  return out;
}

BridgeSolution identify_bridge(const FullLaw& observed, const Tolerances& tol,
                               const ProxyRoles& roles) {
  require_observed_only(observed, roles);
  const auto& treatment = observed.domain(roles.treatment);
  const auto& outcome = observed.domain(roles.outcome);
  const Eigen::VectorXd f_w = marginal_vector(observed, roles.w);

  BridgeSolution sol;
  sol.counterfactual.treatment = treatment;
  sol.counterfactual.outcome = outcome;
  sol.counterfactual.table.resize(static_cast<Eigen::Index>(outcome.cardinality()),
                                  static_cast<Eigen::Index>(treatment.cardinality()));
  for (std::size_t a = 0; a < treatment.cardinality(); ++a) {
    BridgeSolve solve = solve_bridge(observed, a, tol.bridge_residual, roles, tol);
    if (!solve.solvable) {
      std::ostringstream msg;
      msg.precision(3);
      msg << "bridge equation has no solution at " << roles.treatment << "=" << treatment.labels[a]
          << " (residual " << solve.residual << " > " << tol.bridge_residual << ")";
      throw IdentificationError(msg.str(), solve.residual);
    }
    Eigen::VectorXd column = solve.h * f_w;
    sol.drift.push_back(std::abs(column.sum() - 1.0));
    double clipped = 0.0;
    for (Eigen::Index y = 0; y < column.size(); ++y) {
      if (column(y) < -tol.negative_clip) {
        std::ostringstream msg;
        msg << "bridge counterfactual has negative mass " << column(y) << " at "
            << roles.outcome << "=" << outcome.labels[static_cast<std::size_t>(y)];
        throw RecoveryError(msg.str(), solve.residual);
      }
      if (column(y) < 0.0) {
        clipped -= column(y);
        column(y) = 0.0;
      }
    }
    sol.clipped_mass.push_back(clipped);
    if (std::abs(column.sum() - 1.0) > tol.drift) column /= column.sum();
    sol.counterfactual.table.col(static_cast<Eigen::Index>(a)) = column;
    sol.per_treatment.push_back(std::move(solve.h));
    sol.residual.push_back(solve.residual);
  }
  return sol;
}

}  // namespace proxident
