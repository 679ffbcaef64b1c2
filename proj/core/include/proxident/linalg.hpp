#pragma once

#include <cstddef>
#include <vector>

#include <Eigen/Dense>

namespace proxident::linalg {

/// Singular values in decreasing order.
Eigen::VectorXd singular_values(const Eigen::MatrixXd& m);

/// Number of singular values above rel_tol * sigma_max.
std::size_t numerical_rank(const Eigen::MatrixXd& m, double rel_tol);

/// sigma_max / sigma_min over min(rows, cols) values; +inf when singular.
double condition_number(const Eigen::MatrixXd& m);

/// Moore-Penrose pseudoinverse; singular values below rel_tol * sigma_max
/// are treated as zero.
Eigen::MatrixXd pseudo_inverse(const Eigen::MatrixXd& m, double rel_tol);

/// Minimum-norm X with X m = rhs in the least-squares sense, i.e.
/// rhs * pseudo_inverse(m, rel_tol), computed without forming the inverse.
Eigen::MatrixXd right_solve(const Eigen::MatrixXd& rhs, const Eigen::MatrixXd& m, double rel_tol);

/// Assignment minimizing sum_i cost(i, perm[i]). Exhaustive search up to
/// 8x8, Hungarian algorithm above.
std::vector<std::size_t> min_cost_assignment(const Eigen::MatrixXd& cost);

/// Total-variation distance between columns, as a cost matrix.
Eigen::MatrixXd column_tv_cost(const Eigen::MatrixXd& reference, const Eigen::MatrixXd& other);

/// Reorder columns: out.col(i) = m.col(perm[i]).
Eigen::MatrixXd permute_columns(const Eigen::MatrixXd& m, const std::vector<std::size_t>& perm);
Eigen::VectorXd permute(const Eigen::VectorXd& v, const std::vector<std::size_t>& perm);

}  // namespace proxident::linalg
