#include "proxident/linalg.hpp"

#include <algorithm>
#include <limits>
#include <numeric>

#include "proxident/errors.hpp"

namespace proxident::linalg {

Eigen::VectorXd singular_values(const Eigen::MatrixXd& m) {
  if (m.size() == 0) return Eigen::VectorXd();
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(m);
  return svd.singularValues();
}

std::size_t numerical_rank(const Eigen::MatrixXd& m, double rel_tol) {
  const Eigen::VectorXd s = singular_values(m);
  if (s.size() == 0 || !(s(0) > 0.0)) return 0;
  std::size_t r = 0;
  for (Eigen::Index i = 0; i < s.size(); ++i) {
    if (s(i) > rel_tol * s(0)) ++r;
  }
  return r;
}

double condition_number(const Eigen::MatrixXd& m) {
  const Eigen::VectorXd s = singular_values(m);
  if (s.size() == 0) return std::numeric_limits<double>::infinity();
  const double lo = s(s.size() - 1);
  if (!(lo > 0.0)) return std::numeric_limits<double>::infinity();
  return s(0) / lo;
}

Eigen::MatrixXd pseudo_inverse(const Eigen::MatrixXd& m, double rel_tol) {
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(m, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const Eigen::VectorXd& s = svd.singularValues();
  Eigen::VectorXd inv = Eigen::VectorXd::Zero(s.size());
  const double cutoff = s.size() > 0 ? rel_tol * s(0) : 0.0;
  for (Eigen::Index i = 0; i < s.size(); ++i) {
    if (s(i) > cutoff && s(i) > 0.0) inv(i) = 1.0 / s(i);
  }
  return svd.matrixV() * inv.asDiagonal() * svd.matrixU().transpose();
}

Eigen::MatrixXd right_solve(const Eigen::MatrixXd& rhs, const Eigen::MatrixXd& m, double rel_tol) {
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(m.transpose(), Eigen::ComputeThinU | Eigen::ComputeThinV);
  svd.setThreshold(rel_tol);
  return svd.solve(rhs.transpose()).transpose();
}

namespace {

std::vector<std::size_t> exhaustive_assignment(const Eigen::MatrixXd& cost) {
  const auto n = static_cast<std::size_t>(cost.rows());
  std::vector<std::size_t> perm(n);
  std::iota(perm.begin(), perm.end(), 0);
  std::vector<std::size_t> best = perm;
  double best_cost = std::numeric_limits<double>::infinity();
  do {
    double c = 0.0;
    for (std::size_t i = 0; i < n && c < best_cost; ++i) {
      c += cost(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(perm[i]));
    }
    if (c < best_cost) {
      best_cost = c;
      best = perm;
    }
  } while (std::next_permutation(perm.begin(), perm.end()));
  return best;
}

// Shortest augmenting path Hungarian algorithm (potentials u, v), O(n^3).
std::vector<std::size_t> hungarian(const Eigen::MatrixXd& cost) {
  const auto n = static_cast<std::size_t>(cost.rows());
  const double inf = std::numeric_limits<double>::infinity();
  std::vector<double> u(n + 1, 0.0), v(n + 1, 0.0);
  std::vector<std::size_t> p(n + 1, 0), way(n + 1, 0);
  for (std::size_t i = 1; i <= n; ++i) {
    p[0] = i;
    std::size_t j0 = 0;
    std::vector<double> minv(n + 1, inf);
    std::vector<char> used(n + 1, 0);
    do {
      used[j0] = 1;
      const std::size_t i0 = p[j0];
      double delta = inf;
      std::size_t j1 = 0;
      for (std::size_t j = 1; j <= n; ++j) {
        if (used[j]) continue;
        const double cur = cost(static_cast<Eigen::Index>(i0 - 1), static_cast<Eigen::Index>(j - 1)) -
                           u[i0] - v[j];
        if (cur < minv[j]) {
          minv[j] = cur;
          way[j] = j0;
        }
        if (minv[j] < delta) {
          delta = minv[j];
          j1 = j;
        }
      }
      for (std::size_t j = 0; j <= n; ++j) {
        if (used[j]) {
          u[p[j]] += delta;
          v[j] -= delta;
        } else {
          minv[j] -= delta;
        }
      }
      j0 = j1;
    } while (p[j0] != 0);
    do {
      const std::size_t j1 = way[j0];
      p[j0] = p[j1];
      j0 = j1;
    } while (j0 != 0);
  }
  std::vector<std::size_t> perm(n);
  for (std::size_t j = 1; j <= n; ++j) perm[p[j] - 1] = j - 1;
  return perm;
}

}  // namespace

std::vector<std::size_t> min_cost_assignment(const Eigen::MatrixXd& cost) {
  if (cost.rows() != cost.cols()) throw DomainError("assignment cost matrix must be square");
  if (cost.rows() == 0) return {};
  return cost.rows() <= 8 ? exhaustive_assignment(cost) : hungarian(cost);
}

Eigen::MatrixXd column_tv_cost(const Eigen::MatrixXd& reference, const Eigen::MatrixXd& other) {
  Eigen::MatrixXd cost(reference.cols(), other.cols());
  for (Eigen::Index i = 0; i < reference.cols(); ++i) {
    for (Eigen::Index j = 0; j < other.cols(); ++j) {
      cost(i, j) = 0.5 * (reference.col(i) - other.col(j)).cwiseAbs().sum();
    }
  }
  return cost;
}

Eigen::MatrixXd permute_columns(const Eigen::MatrixXd& m, const std::vector<std::size_t>& perm) {
  Eigen::MatrixXd out(m.rows(), static_cast<Eigen::Index>(perm.size()));
  for (std::size_t i = 0; i < perm.size(); ++i) {
    out.col(static_cast<Eigen::Index>(i)) = m.col(static_cast<Eigen::Index>(perm[i]));
  }
  return out;
}

Eigen::VectorXd permute(const Eigen::VectorXd& v, const std::vector<std::size_t>& perm) {
  Eigen::VectorXd out(static_cast<Eigen::Index>(perm.size()));
  for (std::size_t i = 0; i < perm.size(); ++i) {
    out(static_cast<Eigen::Index>(i)) = v(static_cast<Eigen::Index>(perm[i]));
  }
  return out;
}

}  // namespace proxident::linalg
