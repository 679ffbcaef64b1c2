#pragma once

#include <string>
#include <string_view>

namespace proxident {

/// Every numeric threshold used by the library, in one place.
///
/// Ratios named `*_rank` are relative to the largest singular value of the
/// matrix under test. The defaults can be overridden through the
/// PROXIDENT_TOL environment variable (see `Tolerances::from_env`).
struct Tolerances {
  double normalization = 1e-12;   ///< |sum - 1| allowed for a probability table
  double ci = 1e-10;              ///< conditional-independence deviation
  double rank = 1e-9;             ///< singular-value cutoff (pinv, rank, k-rank)
  double bridge_residual = 1e-8;  ///< bridge solvability for the identifier
  double bridge_audit = 1e-10;    ///< bridge solvability for the auditor
  double drift = 1e-9;            ///< renormalize a counterfactual column above this
  double negative_clip = 1e-9;    ///< negative entries down to -clip are zeroed
  double eigen_gap = 1e-6;        ///< minimum eigenvalue separation
  double imaginary = 1e-8;        ///< |Im lambda| allowed, relative to spectral radius
  double negative_recovery = 1e-7;///< recovered probabilities below -this fail
  double label = 1e-6;            ///< label-recovery tie / mismatch threshold
  double cp_fit = 1e-6;           ///< relative CP reconstruction error accepted for identification

  /// Defaults with PROXIDENT_TOL applied when set.
  static Tolerances from_env();

  /// Apply overrides of the form "key=value,key=value". A bare number sets
  /// `bridge_residual`. Throws DomainError on unknown keys or bad numbers.
  Tolerances with_overrides(std::string_view spec) const;
};

inline constexpr const char* kToleranceEnvVar = "PROXIDENT_TOL";

}  // namespace proxident
