#pragma once

#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "proxident/prob.hpp"

namespace proxident {

/// Counterfactual outcome distributions: table(y, a) = f_{Y(a)}(y).
struct CounterfactualLaw {
  CategoricalDomain treatment;
  CategoricalDomain outcome;
  Eigen::MatrixXd table;

  /// Throws DomainError unless each column is a probability vector.
  void validate(double tol = 1e-12) const;
};

/// Adjustment formula: f_{Y(a)}(y) = sum_c f(y | a, c) f(c).
/// Throws PositivityError naming the first stratum with f(a, c) = 0.
CounterfactualLaw adjust(const FullLaw& law, const std::vector<std::string>& confounders,
                         const ProxyRoles& roles = {});

/// E[Y(1)] - E[Y(0)] with outcome states mapped to reals.
/// Throws DomainError unless the treatment is binary.
double ace(const CounterfactualLaw& cf, std::span<const double> outcome_values);

/// Front-door formula through an observed mediator:
/// f_{Y(a)}(y) = sum_{a', m} f(y | a', m) f(m | a) f(a').
CounterfactualLaw frontdoor(const FullLaw& law, const std::string& mediator,
                            const ProxyRoles& roles = {});

/// Elementwise max |lhs - rhs|; throws DomainError on shape mismatch.
double max_abs_difference(const CounterfactualLaw& lhs, const CounterfactualLaw& rhs);

}  // namespace proxident
