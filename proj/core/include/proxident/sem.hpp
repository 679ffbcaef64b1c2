#pragma once

#include <cstdint>
#include <optional>

#include <Eigen/Dense>

namespace proxident {

/// Linear Gaussian structural equation model over (U, Z, A, W, Y):
///
///   U = muU + eU
///   Z = beta0Z + alphaUZ U + eZ
///   A = beta0A + alphaUA U + alphaZA Z + eA
///   W = beta0W + alphaUW U + eW
///   Y = beta0Y + alphaAY A + alphaUY U + eY
///
/// with independent mean-zero Gaussian disturbances.
struct GaussianSem {
  double mu_u = 0.0;
  double beta0_z = 0.0, alpha_uz = 0.0;
  double beta0_a = 0.0, alpha_ua = 0.0, alpha_za = 0.0;
  double beta0_w = 0.0, alpha_uw = 0.0;
  double beta0_y = 0.0, alpha_ay = 0.0, alpha_uy = 0.0;
  double var_u = 1.0, var_z = 1.0, var_a = 1.0, var_w = 1.0, var_y = 1.0;

  /// Throws DomainError unless every variance is positive and finite.
  void validate() const;

  /// Coefficients uniform on [-2, 2], variances uniform on [0.5, 2].
  static GaussianSem random(std::uint64_t seed);
};

/// Column order of `sem_simulate` samples.
enum SemColumn : Eigen::Index { kSemU = 0, kSemZ = 1, kSemA = 2, kSemW = 3, kSemY = 4 };

/// E[Y(a)] = beta0Y + alphaAY a + alphaUY muU.
double sem_counterfactual_mean(const GaussianSem& sem, double a);

/// E[Y(a1)] - E[Y(a0)] in closed form: alphaAY (a1 - a0).
double sem_ace(const GaussianSem& sem, double a1, double a0);

/// n ancestral draws of (U, Z, A, W, Y). With an intervention, A is set to
/// the constant before Y is generated.
Eigen::MatrixXd sem_simulate(const GaussianSem& sem, std::size_t n, std::uint64_t seed,
                             std::optional<double> intervention = std::nullopt);

struct MonteCarloMean {
  double mean = 0.0;
  double standard_error = 0.0;
  std::size_t draws = 0;
};

/// Mean of Y under do(A = a) from n draws, streamed (no sample matrix).
MonteCarloMean sem_interventional_mean(const GaussianSem& sem, double a, std::size_t n,
                                       std::uint64_t seed);

}  // namespace proxident
