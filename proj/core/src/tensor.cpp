#include "proxident/tensor.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "proxident/bridge.hpp"
#include "proxident/errors.hpp"
#include "proxident/linalg.hpp"

namespace proxident {

ThreeWayArray::ThreeWayArray(std::size_t m, std::size_t n, std::size_t j,
                             std::array<std::string, 3> axis_roles)
    : ThreeWayArray(m, n, j, std::vector<double>(m * n * j, 0.0), std::move(axis_roles)) {}

ThreeWayArray::ThreeWayArray(std::size_t m, std::size_t n, std::size_t j, std::vector<double> entries,
                             std::array<std::string, 3> axis_roles)
    : m_(m), n_(n), j_(j), data_(std::move(entries)), roles_(std::move(axis_roles)) {
  if (m == 0 || n == 0 || j == 0) throw DomainError("three-way array dimensions must be positive");
  if (data_.size() != m * n * j) {
    throw DomainError("three-way array has " + std::to_string(data_.size()) + " entries, expected " +
                      std::to_string(m * n * j));
  }
  for (double x : data_) {
    if (!std::isfinite(x)) throw DomainError("three-way array has a non-finite entry");
  }
}

Eigen::MatrixXd ThreeWayArray::slice(std::size_t k) const {
  if (k >= j_) throw DomainError("slice index out of range");
  Eigen::MatrixXd s(static_cast<Eigen::Index>(m_), static_cast<Eigen::Index>(n_));
  for (std::size_t i = 0; i < m_; ++i) {
    for (std::size_t j = 0; j < n_; ++j) {
      s(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = (*this)(i, j, k);
    }
  }
  return s;
}

double ThreeWayArray::total() const { return std::accumulate(data_.begin(), data_.end(), 0.0); }

double ThreeWayArray::frobenius_norm() const {
  double s = 0.0;
  for (double x : data_) s += x * x;
  return std::sqrt(s);
}

Eigen::MatrixXd CpFactors::slice(std::size_t j) const {
  return a * c.row(static_cast<Eigen::Index>(j)).asDiagonal() * b.transpose();
}

ThreeWayArray CpFactors::reconstruct() const {
  const auto m = static_cast<std::size_t>(a.rows());
  const auto n = static_cast<std::size_t>(b.rows());
  const auto jn = static_cast<std::size_t>(c.rows());
  ThreeWayArray t(m, n, jn);
  for (std::size_t k = 0; k < jn; ++k) {
    const Eigen::MatrixXd s = slice(k);
    for (std::size_t i = 0; i < m; ++i) {
      for (std::size_t j = 0; j < n; ++j) {
        t(i, j, k) = s(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
      }
    }
  }
  return t;
}

namespace {

bool subset_independent(const Eigen::MatrixXd& unit_columns, const std::vector<std::size_t>& subset,
                        double tol) {
  Eigen::MatrixXd sub(unit_columns.rows(), static_cast<Eigen::Index>(subset.size()));
  for (std::size_t i = 0; i < subset.size(); ++i) {
    sub.col(static_cast<Eigen::Index>(i)) = unit_columns.col(static_cast<Eigen::Index>(subset[i]));
  }
  const Eigen::VectorXd s = linalg::singular_values(sub);
  if (s.size() < static_cast<Eigen::Index>(subset.size())) return false;
  return s(s.size() - 1) > tol * s(0);
}

// Visit all k-subsets of {0..n-1} until the predicate fails.
template <typename Pred>
bool all_subsets(std::size_t n, std::size_t k, Pred pred) {
  std::vector<std::size_t> idx(k);
  std::iota(idx.begin(), idx.end(), 0);
  while (true) {
    if (!pred(idx)) return false;
    std::size_t i = k;
    while (i-- > 0) {
      if (idx[i] != i + n - k) break;
      if (i == 0) return true;
    }
    if (k == 0) return true;
    ++idx[i];
    for (std::size_t j = i + 1; j < k; ++j) idx[j] = idx[j - 1] + 1;
  }
}

}  // namespace

std::size_t k_rank(const Eigen::MatrixXd& m, double tol) {
  const auto cols = static_cast<std::size_t>(m.cols());
  if (cols == 0 || m.rows() == 0) return 0;
  const Eigen::VectorXd norms = m.colwise().norm();
  const double largest = norms.maxCoeff();
  if (!(largest > 0.0)) return 0;
  Eigen::MatrixXd unit = m;
  for (Eigen::Index c = 0; c < m.cols(); ++c) {
    if (!(norms(c) > tol * largest)) return 0;
    unit.col(c) /= norms(c);
  }
  const std::size_t limit = std::min(cols, static_cast<std::size_t>(m.rows()));
  std::size_t k = 0;
  for (std::size_t size = 1; size <= limit; ++size) {
    const bool ok = all_subsets(cols, size, [&](const std::vector<std::size_t>& subset) {
      return subset_independent(unit, subset, tol);
    });
    if (!ok) break;
    k = size;
  }
  return k;
}

KruskalCheck check_kruskal(std::size_t rank, std::size_t k_a, std::size_t k_b, std::size_t k_c,
                           std::size_t categories) {
  KruskalCheck out;
  out.rank = rank;
  out.k_a = k_a;
  out.k_b = k_b;
  out.k_c = k_c;
  out.margin = static_cast<long>(k_a + k_b + k_c) - static_cast<long>(2 * rank + 2);
  out.holds = out.margin >= 0;
  out.categories = categories;
  out.category_condition = categories >= 2 * rank + 2;
  return out;
}

KruskalCheck check_kruskal(const CpFactors& f, double tol) {
  if (f.b.cols() != f.a.cols() || f.c.cols() != f.a.cols()) {
    throw DomainError("CP factors must share the same number of columns");
  }
  return check_kruskal(f.rank(), k_rank(f.a, tol), k_rank(f.b, tol), k_rank(f.c, tol),
                       static_cast<std::size_t>(f.a.rows() + f.b.rows() + f.c.rows()));
}

ThreeWayArray build_array(const FullLaw& law, const std::array<std::string, 3>& axes,
                          const Assignment& context) {
  const std::size_t i0 = law.axis(axes[0]);
  const std::size_t i1 = law.axis(axes[1]);
  const std::size_t i2 = law.axis(axes[2]);
  if (i0 == i1 || i0 == i2 || i1 == i2) throw DomainError("array axes must be distinct variables");
  std::vector<std::pair<std::size_t, std::size_t>> fixed;
  for (const auto& [name, state] : context) {
    const std::size_t ax = law.axis(name);
    if (ax == i0 || ax == i1 || ax == i2) throw DomainError("context overlaps an array axis");
    if (state >= law.domains()[ax].cardinality()) {
      throw DomainError("state out of range for '" + name + "'");
    }
    fixed.emplace_back(ax, state);
  }
  ThreeWayArray t(law.domains()[i0].cardinality(), law.domains()[i1].cardinality(),
                  law.domains()[i2].cardinality(), axes);
  double total = 0.0;
  law.for_each([&](std::span<const std::size_t> idx, double p) {
    for (const auto& [ax, state] : fixed) {
      if (idx[ax] != state) return;
    }
    t(idx[i0], idx[i1], idx[i2]) += p;
    total += p;
  });
  if (!(total > 0.0)) {
    throw ConditioningError(describe(context),
                            "conditioning event {" + describe(context) + "} has zero probability");
  }
  std::vector<double> scaled = t.entries();
  for (auto& x : scaled) x /= total;
  return ThreeWayArray(t.dims()[0], t.dims()[1], t.dims()[2], std::move(scaled), axes);
}

ThreeWayArray build_slices(const FullLaw& observed, std::size_t treatment_level,
                           const ProxyRoles& roles) {
  require_observed_only(observed, roles);
  return build_array(observed, {roles.w, roles.z, roles.outcome},
                     {{roles.treatment, treatment_level}});
}

}  // namespace proxident
