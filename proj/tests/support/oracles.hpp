#pragma once

// Reference computations for the tests. Nothing here calls into the library
// beyond FullLaw storage, so each check has a second, independent route.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <map>
#include <numeric>
#include <random>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <boost/multiprecision/cpp_int.hpp>

#include "proxident/prob.hpp"

namespace oracle {

using Rational = boost::multiprecision::cpp_rational;
using RationalMatrix = std::vector<std::vector<Rational>>;

inline std::size_t exact_rank(RationalMatrix m) {
  const std::size_t rows = m.size();
  const std::size_t cols = rows ? m[0].size() : 0;
  std::size_t rank = 0;
  for (std::size_t c = 0; c < cols && rank < rows; ++c) {
    std::size_t pivot = rank;
    while (pivot < rows && m[pivot][c] == 0) ++pivot;
    if (pivot == rows) continue;
    std::swap(m[pivot], m[rank]);
    for (std::size_t r = rank + 1; r < rows; ++r) {
      if (m[r][c] == 0) continue;
      const Rational f = m[r][c] / m[rank][c];
      for (std::size_t k = c; k < cols; ++k) m[r][k] -= f * m[rank][k];
    }
    ++rank;
  }
  return rank;
}

inline RationalMatrix columns(const RationalMatrix& m, const std::vector<std::size_t>& keep) {
  RationalMatrix out(m.size(), std::vector<Rational>(keep.size()));
  for (std::size_t r = 0; r < m.size(); ++r) {
    for (std::size_t k = 0; k < keep.size(); ++k) out[r][k] = m[r][keep[k]];
  }
  return out;
}

// Largest k such that every k-subset of columns has full exact rank.
inline std::size_t exact_k_rank(const RationalMatrix& m) {
  const std::size_t cols = m.empty() ? 0 : m[0].size();
  std::size_t best = 0;
  for (std::size_t k = 1; k <= cols; ++k) {
    std::vector<bool> mask(cols, false);
    std::fill(mask.begin(), mask.begin() + static_cast<long>(k), true);
    bool all = true;
    do {
      std::vector<std::size_t> keep;
      for (std::size_t i = 0; i < cols; ++i) {
        if (mask[i]) keep.push_back(i);
      }
      if (exact_rank(columns(m, keep)) < k) {
        all = false;
        break;
      }
    } while (std::prev_permutation(mask.begin(), mask.end()));
    if (!all) break;
    best = k;
  }
  return best;
}

inline Eigen::MatrixXd to_double(const RationalMatrix& m) {
  Eigen::MatrixXd out(static_cast<Eigen::Index>(m.size()),
                      static_cast<Eigen::Index>(m.empty() ? 0 : m[0].size()));
  for (std::size_t r = 0; r < m.size(); ++r) {
    for (std::size_t c = 0; c < m[r].size(); ++c) {
      out(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = m[r][c].convert_to<double>();
    }
  }
  return out;
}

// Sum of all cells whose named coordinates match `event`.
inline double mass(const proxident::FullLaw& law, const std::map<std::string, std::size_t>& event) {
  std::vector<std::pair<std::size_t, std::size_t>> fixed;
  const auto& domains = law.domains();
  for (const auto& [name, state] : event) {
    for (std::size_t i = 0; i < domains.size(); ++i) {
      if (domains[i].name == name) fixed.emplace_back(i, state);
    }
  }
  std::vector<std::size_t> idx(domains.size(), 0);
  double total = 0.0;
  const auto probs = law.probabilities();
  for (std::size_t cell = 0; cell < probs.size(); ++cell) {
    std::size_t rest = cell;
    for (std::size_t i = domains.size(); i-- > 0;) {
      idx[i] = rest % domains[i].cardinality();
      rest /= domains[i].cardinality();
    }
    bool match = true;
    for (const auto& [axis, state] : fixed) match = match && idx[axis] == state;
    if (match) total += probs[cell];
  }
  return total;
}

// f_{Y(a)}(y) = sum_c f(y | a, c) f(c), by enumerating every confounder stratum.
inline Eigen::MatrixXd adjustment(const proxident::FullLaw& law, const std::vector<std::string>& conf,
                                  const std::string& treatment = "A", const std::string& outcome = "Y") {
  const std::size_t na = law.cardinality(treatment), ny = law.cardinality(outcome);
  std::vector<std::size_t> cards;
  std::size_t strata = 1;
  for (const auto& c : conf) {
    cards.push_back(law.cardinality(c));
    strata *= cards.back();
  }
  Eigen::MatrixXd out = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(ny), static_cast<Eigen::Index>(na));
  for (std::size_t s = 0; s < strata; ++s) {
    std::map<std::string, std::size_t> stratum;
    std::size_t rest = s;
    for (std::size_t i = conf.size(); i-- > 0;) {
      stratum[conf[i]] = rest % cards[i];
      rest /= cards[i];
    }
    const double fc = mass(law, stratum);
    for (std::size_t a = 0; a < na; ++a) {
      auto ac = stratum;
      ac[treatment] = a;
      const double fac = mass(law, ac);
      for (std::size_t y = 0; y < ny; ++y) {
        auto yac = ac;
        yac[outcome] = y;
        out(static_cast<Eigen::Index>(y), static_cast<Eigen::Index>(a)) += mass(law, yac) / fac * fc;
      }
    }
  }
  return out;
}

inline Eigen::VectorXd random_simplex(std::mt19937_64& rng, std::size_t n) {
  std::exponential_distribution<double> e(1.0);
  Eigen::VectorXd v(static_cast<Eigen::Index>(n));
  for (auto& x : v) x = e(rng);
  return v / v.sum();
}

inline Eigen::MatrixXd random_stochastic(std::mt19937_64& rng, std::size_t rows, std::size_t cols) {
  Eigen::MatrixXd m(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
  for (Eigen::Index c = 0; c < m.cols(); ++c) m.col(c) = random_simplex(rng, rows);
  return m;
}

// Explicit factors of the Fig. 3 factorization f(u) f(z|u) f(a|u,z) f(w|u) f(y|u,a).
struct Fig3Factors {
  Eigen::VectorXd f_u;
  Eigen::MatrixXd z_u;               // |Z| x |U|
  std::vector<Eigen::MatrixXd> a_uz; // per u: |A| x |Z|
  Eigen::MatrixXd w_u;               // |W| x |U|
  std::vector<Eigen::MatrixXd> y_ua; // per a: |Y| x |U|
};

inline Fig3Factors random_fig3(std::mt19937_64& rng, std::size_t u, std::size_t z, std::size_t w,
                               std::size_t y, std::size_t a) {
  Fig3Factors f;
  f.f_u = random_simplex(rng, u);
  f.z_u = random_stochastic(rng, z, u);
  for (std::size_t i = 0; i < u; ++i) f.a_uz.push_back(random_stochastic(rng, a, z));
  f.w_u = random_stochastic(rng, w, u);
  for (std::size_t i = 0; i < a; ++i) f.y_ua.push_back(random_stochastic(rng, y, u));
  return f;
}

// Domain order U, Z, A, W, Y (Y fastest).
inline proxident::FullLaw build_fig3(const Fig3Factors& f) {
  using proxident::CategoricalDomain;
  const auto nu = static_cast<std::size_t>(f.f_u.size()), nz = static_cast<std::size_t>(f.z_u.rows()),
             na = f.y_ua.size(), nw = static_cast<std::size_t>(f.w_u.rows()),
             ny = static_cast<std::size_t>(f.y_ua[0].rows());
  std::vector<double> p;
  p.reserve(nu * nz * na * nw * ny);
  for (std::size_t u = 0; u < nu; ++u)
    for (std::size_t z = 0; z < nz; ++z)
      for (std::size_t a = 0; a < na; ++a)
        for (std::size_t w = 0; w < nw; ++w)
          for (std::size_t y = 0; y < ny; ++y) {
            const auto U = static_cast<Eigen::Index>(u), Z = static_cast<Eigen::Index>(z),
                       A = static_cast<Eigen::Index>(a), W = static_cast<Eigen::Index>(w),
                       Y = static_cast<Eigen::Index>(y);
            p.push_back(f.f_u(U) * f.z_u(Z, U) * f.a_uz[u](A, Z) * f.w_u(W, U) * f.y_ua[a](Y, U));
          }
  return proxident::FullLaw({CategoricalDomain::indexed("U", nu), CategoricalDomain::indexed("Z", nz),
                             CategoricalDomain::indexed("A", na), CategoricalDomain::indexed("W", nw),
                             CategoricalDomain::indexed("Y", ny)},
                            std::move(p),
                            {{"U", "Z"}, {"U", "A"}, {"Z", "A"}, {"U", "W"}, {"U", "Y"}, {"A", "Y"}}, 1e-9);
}

// Columns rescaled to unit 2-norm with a nonnegative sum.
inline Eigen::MatrixXd unit_columns(Eigen::MatrixXd m) {
  for (Eigen::Index c = 0; c < m.cols(); ++c) {
    const double n = m.col(c).norm();
    if (n > 0) m.col(c) /= n;
    if (m.col(c).sum() < 0) m.col(c) *= -1.0;
  }
  return m;
}

// min over column permutations of max |got(:, perm) - want|, all matrices
// sharing the same permutation.
inline double permuted_error(const std::vector<Eigen::MatrixXd>& got, const std::vector<Eigen::MatrixXd>& want) {
  const auto r = static_cast<std::size_t>(want.at(0).cols());
  std::vector<std::size_t> perm(r);
  std::iota(perm.begin(), perm.end(), 0);
  double best = INFINITY;
  do {
    double worst = 0.0;
    for (std::size_t k = 0; k < want.size(); ++k) {
      for (std::size_t c = 0; c < r; ++c) {
        const double d = (got[k].col(static_cast<Eigen::Index>(perm[c])) - want[k].col(static_cast<Eigen::Index>(c)))
                             .cwiseAbs()
                             .maxCoeff();
        worst = std::max(worst, d);
      }
    }
    best = std::min(best, worst);
  } while (std::next_permutation(perm.begin(), perm.end()));
  return best;
}

inline double max_abs(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
  return (a - b).cwiseAbs().maxCoeff();
}

}  // namespace oracle
