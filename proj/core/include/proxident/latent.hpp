#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "proxident/config.hpp"
#include "proxident/oracle.hpp"
#include "proxident/prob.hpp"
#include "proxident/tensor.hpp"

namespace proxident {

struct RecoveryDiagnostics {
  std::vector<double> eigen_gap;          ///< per treatment level
  std::vector<long> chosen_slice;         ///< outcome index, or -1 for a random combination
  std::vector<double> condition_number;   ///< of P_{W|Z,a}
  std::vector<double> alignment_cost;     ///< total variation to the reference level
  std::vector<double> clipped_mass;       ///< negative mass zeroed per level
  std::vector<double> fit;                ///< CP relative error per level (cp mode)
  double max_imaginary = 0.0;
};

/// Latent factors recovered up to a relabeling of the latent states.
/// Columns of every matrix are indexed by latent state; all levels share
/// one latent ordering after alignment.
struct LatentRecovery {
  CategoricalDomain latent;
  CategoricalDomain treatment;
  CondMatrix p_w_given_u;
  std::vector<CondMatrix> p_z_given_ua;
  std::vector<CondMatrix> p_y_given_ua;
  std::vector<Eigen::VectorXd> f_u_given_a;
  Eigen::VectorXd f_u;
  /// Recovered index -> ordinal label index, once labels are recovered.
  std::optional<std::vector<std::size_t>> label_permutation;
  RecoveryDiagnostics diagnostics;
};

struct EigenOptions {
  std::string latent_name = "U";
  std::uint64_t seed = 0;  ///< drives the random slice combinations
  std::size_t combination_retries = 5;
};

/// Eigendecomposition recovery for square proxies (|W| = |Z|):
/// P_{y,W|Z,a} P_{W|Z,a}^{-1} = P_{W|U} diag(P_{y|U,a}) P_{W|U}^{-1}.
/// Latent states are aligned across treatment levels through P_{W|U}.
///
/// Throws NonIdentifiableError when no slice (or random combination)
/// separates the eigenvalues, NumericalError on complex eigenvalues,
/// RecoveryError on negative recovered probabilities.
LatentRecovery recover_eigen(const FullLaw& observed, const Tolerances& tol = {},
                             const ProxyRoles& roles = {}, const EigenOptions& options = {});

/// Recovery from a rank-R CP decomposition of each level's array.
LatentRecovery recover_latent_cp(const FullLaw& observed, std::size_t rank,
                                 const Tolerances& tol = {}, const ProxyRoles& roles = {},
                                 const CpOptions& cp = {}, const std::string& latent_name = "U");

enum class ArrayMode { Eigen, Cp };

struct ArrayIdentification {
  LatentRecovery latent;
  CounterfactualLaw counterfactual;
};

/// f_{Y(a)}(y) = sum_i f(y | u_i, a) f_U(u_i) from recovered factors.
CounterfactualLaw adjust_recovered(const LatentRecovery& rec, const CategoricalDomain& outcome);

/// Array identifier. `rank` is required in cp mode.
ArrayIdentification identify_array(const FullLaw& observed, ArrayMode mode,
                                   const Tolerances& tol = {}, const ProxyRoles& roles = {},
                                   std::optional<std::size_t> rank = std::nullopt,
                                   const CpOptions& cp = {});

/// Hidden-mediator pipeline: eigen recovery with the mediator in the latent
/// role, then the front-door formula over the recovered mediator.
CounterfactualLaw identify_mediator_array(const FullLaw& observed, const Tolerances& tol = {},
                                          const ProxyRoles& roles = {});

/// Ground-truth factors read from a full law (latent visible).
LatentRecovery true_latent_factors(const FullLaw& law, const std::string& latent,
                                   const ProxyRoles& roles = {});

struct LatentComparison {
  double max_error = 0.0;  ///< elementwise over P_{W|U}, P_{Y|U,a}, f_U
  std::vector<std::size_t> permutation;  ///< truth index i matches recovered perm[i]
};

/// Best single latent permutation matching `recovered` to `truth`.
LatentComparison compare_latent(const LatentRecovery& recovered, const LatentRecovery& truth);

}  // namespace proxident
