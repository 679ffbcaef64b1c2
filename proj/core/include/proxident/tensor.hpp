#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "proxident/prob.hpp"

namespace proxident {

/// Nonnegative M x N x J array; slice j is the M x N matrix T(:, :, j).
class ThreeWayArray {
 public:
  ThreeWayArray(std::size_t m, std::size_t n, std::size_t j,
                std::array<std::string, 3> axis_roles = {"W", "Z", "Y"});
  ThreeWayArray(std::size_t m, std::size_t n, std::size_t j, std::vector<double> entries,
                std::array<std::string, 3> axis_roles = {"W", "Z", "Y"});

  std::array<std::size_t, 3> dims() const noexcept { return {m_, n_, j_}; }
  const std::array<std::string, 3>& axis_roles() const noexcept { return roles_; }
  /// Entries with k (third index) fastest.
  const std::vector<double>& entries() const noexcept { return data_; }

  double& operator()(std::size_t i, std::size_t j, std::size_t k) { return data_[(i * n_ + j) * j_ + k]; }
  double operator()(std::size_t i, std::size_t j, std::size_t k) const {
    return data_[(i * n_ + j) * j_ + k];
  }

  Eigen::MatrixXd slice(std::size_t k) const;
  double total() const;
  double frobenius_norm() const;

 private:
  std::size_t m_, n_, j_;
  std::vector<double> data_;
  std::array<std::string, 3> roles_;
};

/// CP factors: T(:, :, j) = A diag(C(j, :)) B^T.
struct CpFactors {
  Eigen::MatrixXd a;
  Eigen::MatrixXd b;
  Eigen::MatrixXd c;

  std::size_t rank() const noexcept { return static_cast<std::size_t>(a.cols()); }
  Eigen::MatrixXd slice(std::size_t j) const;
  ThreeWayArray reconstruct() const;
};

/// Largest k such that every k-column subset is linearly independent.
/// Columns are scaled to unit norm; a subset counts as independent when
/// its smallest singular value exceeds tol times its largest. Exhaustive.
std::size_t k_rank(const Eigen::MatrixXd& m, double tol);

struct KruskalCheck {
  std::size_t rank = 0;
  std::size_t k_a = 0, k_b = 0, k_c = 0;
  long margin = 0;  ///< k_a + k_b + k_c - (2R + 2)
  bool holds = false;
  std::size_t categories = 0;  ///< rows(A) + rows(B) + rows(C)
  bool category_condition = false;  ///< categories >= 2R + 2 (necessary)
};

/// Kruskal's sufficient condition for essential uniqueness, 2R+2 <= kA+kB+kC.
KruskalCheck check_kruskal(const CpFactors& factors, double tol);
KruskalCheck check_kruskal(std::size_t rank, std::size_t k_a, std::size_t k_b, std::size_t k_c,
                           std::size_t categories = 0);

/// Entry (w, z, j) = f(Y = y_j, W = w, Z = z | A = a).
ThreeWayArray build_slices(const FullLaw& observed, std::size_t treatment_level,
                           const ProxyRoles& roles = {});

/// Entry (i, j, k) = f(first = i, second = j, third = k | context).
ThreeWayArray build_array(const FullLaw& law, const std::array<std::string, 3>& axes,
                          const Assignment& context = {});

struct CpOptions {
  std::size_t max_iterations = 2000;
  double tolerance = 1e-10;  ///< stop when |fit change| falls below this
  std::size_t restarts = 10;
  std::uint64_t seed = 0;
  /// Add one start from a generalized eigendecomposition of two random slice
  /// mixtures (used when two modes have at least `rank` categories).
  bool algebraic_start = true;
};

struct CpResult {
  CpFactors factors;
  double fit = 0.0;  ///< ||T - T_hat||_F / ||T||_F
  std::size_t iterations = 0;
  std::size_t best_restart = 0;  ///< index into restart_fits; the algebraic start is last
  std::size_t converged_restarts = 0;
  std::vector<double> restart_fits;
};

/// Alternating least squares with exact line search, followed by damped
/// Gauss-Newton refinement, from `restarts` random nonnegative starts plus
/// the optional algebraic start. The best fit wins (ties go to the lower
/// restart index). A and B columns are returned with unit 2-norm and
/// nonnegative sums, scale absorbed into C.
/// Throws ConvergenceError when no restart meets the stopping rule.
CpResult recover_cp(const ThreeWayArray& tensor, std::size_t rank, const CpOptions& options = {});

}  // namespace proxident
