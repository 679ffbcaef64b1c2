#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "proxident/latent.hpp"

namespace proxident {

enum class ProxyAxis { W, Z, Y };
enum class CentralFunctional { Mean, Median };
enum class LabelMode { Unbiasedness, Monotonicity };

struct LabelRequest {
  ProxyAxis proxy = ProxyAxis::W;
  std::size_t treatment_level = 0;  ///< for Z and Y, whose conditionals depend on a
  CentralFunctional functional = CentralFunctional::Mean;
  LabelMode mode = LabelMode::Monotonicity;
  std::vector<double> proxy_values;   ///< real value of each proxy state; default 0..n-1
  std::vector<double> latent_values;  ///< value of each ordinal latent label; default 0..R-1
  bool descending = false;            ///< monotonicity direction
  double tol = 1e-6;
};

struct LabelMap {
  std::vector<std::size_t> ordinal;       ///< recovered state i -> ordinal label index
  std::vector<double> functional_values;  ///< M[f_{V | latent = i}]
  bool descending = false;
  LabelMode mode = LabelMode::Monotonicity;
};

/// Mean or median of a distribution over ordered real values.
double central_value(std::span<const double> probabilities, std::span<const double> values,
                     CentralFunctional functional);

/// Labels from functional values alone.
/// Throws LabelAmbiguityError on ties within tol, and (unbiasedness) when a
/// functional value is farther than tol from every latent value.
LabelMap assign_labels(std::span<const double> functional_values, LabelMode mode,
                       std::span<const double> latent_values, bool descending, double tol);

/// Label recovered latent states from a proxy's conditional central tendency.
LabelMap recover_labels(const LatentRecovery& rec, const LabelRequest& request);

/// Copy of `rec` with latent states reordered by label; sets label_permutation.
LatentRecovery apply_labels(const LatentRecovery& rec, const LabelMap& labels);

}  // namespace proxident
