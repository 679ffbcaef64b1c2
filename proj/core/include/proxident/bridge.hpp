#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "proxident/config.hpp"
#include "proxident/oracle.hpp"
#include "proxident/prob.hpp"

namespace proxident {

/// Discrete completeness: P_{U|Z,a} has full row rank |U|.
struct CompletenessReport {
  bool complete = false;
  std::size_t rank = 0;
  std::size_t latent_cardinality = 0;
  Eigen::VectorXd singular_values;
  /// sigma_min / sigma_max over the first |U| singular values (0 if |Z| < |U|).
  double sigma_ratio = 0.0;
};

/// Audit-only: reads the latent variable from the full law.
CompletenessReport check_completeness_discrete(const FullLaw& law, std::size_t treatment_level,
                                               const std::string& latent = "U",
                                               const ProxyRoles& roles = {},
                                               const Tolerances& tol = {});

struct BridgeSolve {
  Eigen::MatrixXd h;  ///< H_a, rows indexed by y, columns by w
  double residual = 0.0;  ///< ||P_{Y|Z,a} - H_a P_{W|Z,a}||_F
  bool solvable = false;
  std::size_t rank = 0;  ///< numerical rank of P_{W|Z,a}
};

/// H_a = P_{Y|Z,a} pinv(P_{W|Z,a}) with singular values below
/// tol.rank * sigma_max truncated; solvable iff residual <= residual_tol.
BridgeSolve solve_bridge(const FullLaw& observed, std::size_t treatment_level,
                         double residual_tol, const ProxyRoles& roles = {},
                         const Tolerances& tol = {});

struct BridgeSolution {
  std::vector<Eigen::MatrixXd> per_treatment;
  std::vector<double> residual;
  std::vector<double> drift;         ///< |column sum - 1| before any renormalization
  std::vector<double> clipped_mass;  ///< total negative mass zeroed per column
  CounterfactualLaw counterfactual;
};

/// Bridge identifier: f_{Y(a)} = H_a f_W from the observed law only.
/// `observed` must contain exactly the four observed roles.
/// Throws IdentificationError carrying the residual when a bridge equation
/// has no solution within tol.bridge_residual.
BridgeSolution identify_bridge(const FullLaw& observed, const Tolerances& tol = {},
                               const ProxyRoles& roles = {});

/// Require that a law holds exactly the observed roles (the identifiers'
/// firewall against latent variables).
void require_observed_only(const FullLaw& law, const ProxyRoles& roles);

}  // namespace proxident
