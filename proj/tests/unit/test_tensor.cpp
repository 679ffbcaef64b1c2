#include <gtest/gtest.h>

#include <random>

#include "generators.hpp"
#include "oracles.hpp"
#include "proxident/errors.hpp"
#include "proxident/linalg.hpp"
#include "proxident/models.hpp"
#include "proxident/tensor.hpp"

using namespace proxident;

namespace {

Eigen::MatrixXd positive(std::mt19937_64& rng, std::size_t rows, std::size_t cols) {
  std::uniform_real_distribution<double> u(0.05, 1.0);
  Eigen::MatrixXd m(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
  for (auto& x : m.reshaped()) x = u(rng);
  return m;
}

double factor_error(const CpFactors& got, const CpFactors& want) {
  return oracle::permuted_error(
      {oracle::unit_columns(got.a), oracle::unit_columns(got.b), oracle::unit_columns(got.c)},
      {oracle::unit_columns(want.a), oracle::unit_columns(want.b), oracle::unit_columns(want.c)});
}

FullLaw fig3(const std::string& cards, std::uint64_t seed) {
  ModelSpec s;
  s.cardinalities = parse_cardinalities(cards);
  s.seed = seed;
  return generate(s);
}

}  // namespace

TEST(KRank, ReferenceExamples) {
  EXPECT_EQ(k_rank(Eigen::MatrixXd::Identity(3, 3), 1e-9), 3u);
  Eigen::MatrixXd dup(3, 3);
  dup << 1, 1, 0, 2, 2, 1, 3, 3, 0;
  EXPECT_EQ(k_rank(dup, 1e-9), 1u);
  Eigen::MatrixXd plane(3, 3);
  plane << 1, 0, 1, 0, 1, 1, 0, 0, 0;
  EXPECT_EQ(k_rank(plane, 1e-9), 2u);
  Eigen::MatrixXd zero_col = Eigen::MatrixXd::Identity(3, 3);
  zero_col.col(1).setZero();
  EXPECT_EQ(k_rank(zero_col, 1e-9), 0u);
}

TEST(KRank, MatchesExactSubsetOracle) {
  std::mt19937_64 rng(1);
  for (int trial = 0; trial < 300; ++trial) {
    const auto m = gen::integer_matrix(rng, gen::pick(rng, 1, 6), gen::pick(rng, 1, 6));
    EXPECT_EQ(k_rank(oracle::to_double(m), 1e-9), oracle::exact_k_rank(m)) << "trial " << trial;
  }
}

TEST(KRank, BoundedByRankAndInvariantToScalingAndPermutation) {
  std::mt19937_64 rng(2);
  for (int trial = 0; trial < 200; ++trial) {
    const Eigen::MatrixXd m = oracle::to_double(gen::integer_matrix(rng, gen::pick(rng, 1, 5), gen::pick(rng, 1, 5)));
    const std::size_t k = k_rank(m, 1e-9);
    EXPECT_LE(k, linalg::numerical_rank(m, 1e-9));
    EXPECT_LE(k, static_cast<std::size_t>(std::min(m.rows(), m.cols())));
    Eigen::MatrixXd moved = m;
    for (Eigen::Index c = 0; c < moved.cols(); ++c) moved.col(c) *= (c % 2 ? -3.5 : 0.25);
    std::vector<std::size_t> perm(static_cast<std::size_t>(m.cols()));
    std::iota(perm.begin(), perm.end(), 0);
    std::shuffle(perm.begin(), perm.end(), rng);
    EXPECT_EQ(k_rank(linalg::permute_columns(moved, perm), 1e-9), k);
    Eigen::MatrixXd with_copy(m.rows(), m.cols() + 1);
    with_copy << m, m.col(0);
    EXPECT_LE(k_rank(with_copy, 1e-9), 1u);
  }
}

TEST(CheckKruskal, Arithmetic) {
  const KruskalCheck even = check_kruskal(2, 2, 2, 2);
  EXPECT_TRUE(even.holds);
  EXPECT_EQ(even.margin, 0);
  const KruskalCheck short_c = check_kruskal(3, 3, 3, 1);
  EXPECT_FALSE(short_c.holds);
  EXPECT_EQ(short_c.margin, -1);
  const KruskalCheck cats = check_kruskal(3, 2, 2, 4, 7);
  EXPECT_TRUE(cats.holds);
  EXPECT_FALSE(cats.category_condition);
  // Invertibility regime: kA = kB = R, kC >= 2.
  for (std::size_t r = 1; r <= 6; ++r) EXPECT_TRUE(check_kruskal(r, r, r, 2).holds);
}

TEST(CheckKruskal, InvariantToJointPermutationAndScaling) {
  std::mt19937_64 rng(3);
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t r = gen::pick(rng, 1, 4);
    CpFactors f{positive(rng, gen::pick(rng, 1, 5), r), positive(rng, gen::pick(rng, 1, 5), r),
                positive(rng, gen::pick(rng, 1, 5), r)};
    if (trial % 3 == 0) f.c.col(0) = f.c.col(r - 1);
    const KruskalCheck base = check_kruskal(f, 1e-9);
    EXPECT_EQ(base.margin, static_cast<long>(base.k_a + base.k_b + base.k_c) - static_cast<long>(2 * r + 2));
    std::vector<std::size_t> perm(r);
    std::iota(perm.begin(), perm.end(), 0);
    std::shuffle(perm.begin(), perm.end(), rng);
    CpFactors moved{linalg::permute_columns(f.a, perm), linalg::permute_columns(f.b, perm) * 7.0,
                    linalg::permute_columns(f.c, perm) * -0.1};
    const KruskalCheck after = check_kruskal(moved, 1e-9);
    EXPECT_EQ(after.margin, base.margin);
    EXPECT_EQ(after.holds, base.holds);
  }
}

TEST(ThreeWayArray, ValidatesInput) {
  EXPECT_THROW(ThreeWayArray(0, 2, 2), DomainError);
  EXPECT_THROW(ThreeWayArray(2, 2, 2, std::vector<double>(7, 0.1)), DomainError);
  const ThreeWayArray t(2, 1, 3, {1, 2, 3, 4, 5, 6});
  EXPECT_EQ(t(1, 0, 2), 6.0);
  EXPECT_EQ(t.slice(1)(1, 0), 5.0);
  EXPECT_DOUBLE_EQ(t.total(), 21.0);
}

TEST(BuildSlices, SumsToOneAndMatchesFactorContraction) {
  std::mt19937_64 rng(4);
  for (int trial = 0; trial < 40; ++trial) {
    oracle::Fig3Factors f = oracle::random_fig3(rng, gen::pick(rng, 1, 3), gen::pick(rng, 1, 4), gen::pick(rng, 1, 4),
                                                gen::pick(rng, 1, 4), 2);
    const FullLaw law = oracle::build_fig3(f);
    const FullLaw obs = marginalize(law, {"A", "Y", "W", "Z"});
    for (std::size_t a = 0; a < 2; ++a) {
      const ThreeWayArray t = build_slices(obs, a);
      EXPECT_NEAR(t.total(), 1.0, 1e-13);
      for (std::size_t j = 0; j < t.dims()[2]; ++j) {
        // Z enters through f(z | u, a), which reweights by f(a | u, z).
        Eigen::MatrixXd direct = Eigen::MatrixXd::Zero(f.w_u.rows(), f.z_u.rows());
        double fa = 0.0;
        for (Eigen::Index u = 0; u < f.f_u.size(); ++u)
          for (Eigen::Index z = 0; z < f.z_u.rows(); ++z)
            fa += f.f_u(u) * f.z_u(z, u) * f.a_uz[static_cast<std::size_t>(u)](static_cast<Eigen::Index>(a), z);
        for (Eigen::Index u = 0; u < f.f_u.size(); ++u)
          for (Eigen::Index z = 0; z < f.z_u.rows(); ++z)
            for (Eigen::Index w = 0; w < f.w_u.rows(); ++w)
              direct(w, z) += f.f_u(u) * f.z_u(z, u) * f.a_uz[static_cast<std::size_t>(u)](static_cast<Eigen::Index>(a), z) *
                              f.w_u(w, u) * f.y_ua[a](static_cast<Eigen::Index>(j), u) / fa;
        EXPECT_LT(oracle::max_abs(t.slice(j), direct), 1e-14);
      }
    }
  }
}

TEST(BuildSlices, SingleLatentStateGivesRankOneSlices) {
  const FullLaw obs = marginalize(fig3("U=1,Z=3,W=3,Y=3,A=2", 5), {"A", "Y", "W", "Z"});
  const ThreeWayArray t = build_slices(obs, 1);
  for (std::size_t j = 0; j < 3; ++j) EXPECT_LE(linalg::numerical_rank(t.slice(j), 1e-9), 1u);
}

TEST(BuildSlices, ZeroMassTreatmentLevelFails) {
  std::vector<double> p(16, 0.0);
  // Domains A, Y, W, Z; only A = 0 has mass.
  for (std::size_t i = 0; i < 8; ++i) p[i] = 0.125;
  const FullLaw obs({CategoricalDomain::indexed("A", 2), CategoricalDomain::indexed("Y", 2),
                     CategoricalDomain::indexed("W", 2), CategoricalDomain::indexed("Z", 2)},
                    p);
  EXPECT_NO_THROW(build_slices(obs, 0));
  EXPECT_THROW(build_slices(obs, 1), ConditioningError);
}

TEST(RecoverCp, RankOneOuterProduct) {
  const CpFactors f{(Eigen::MatrixXd(3, 1) << 1, 2, 3).finished(), (Eigen::MatrixXd(2, 1) << 0.5, 1).finished(),
                    (Eigen::MatrixXd(4, 1) << 1, 0.2, 0.3, 0.4).finished()};
  const CpResult r = recover_cp(f.reconstruct(), 1, {.seed = 1});
  EXPECT_LE(r.fit, 1e-10);
  EXPECT_LT(factor_error(r.factors, f), 1e-9);
}

TEST(RecoverCp, KnownRankTwoFactors) {
  std::mt19937_64 rng(6);
  for (int trial = 0; trial < 10; ++trial) {
    const CpFactors f{positive(rng, 3, 2), positive(rng, 3, 2), positive(rng, 4, 2)};
    ASSERT_TRUE(check_kruskal(f, 1e-9).holds);
    const CpResult r = recover_cp(f.reconstruct(), 2, {.seed = rng()});
    EXPECT_LE(r.fit, 1e-6);
    EXPECT_LE(factor_error(r.factors, f), 1e-6);
    for (Eigen::Index c = 0; c < 2; ++c) {
      EXPECT_NEAR(r.factors.a.col(c).norm(), 1.0, 1e-12);
      EXPECT_NEAR(r.factors.b.col(c).norm(), 1.0, 1e-12);
      EXPECT_GE(r.factors.a.col(c).sum(), 0.0);
    }
  }
}

TEST(RecoverCp, OverstatedRankFitsButIsNotCertified) {
  std::mt19937_64 rng(7);
  const CpFactors f{positive(rng, 3, 2), positive(rng, 3, 2), positive(rng, 3, 2)};
  const CpResult r = recover_cp(f.reconstruct(), 3, {.seed = 2});
  EXPECT_LE(r.fit, 1e-6);
  EXPECT_LT(check_kruskal(r.factors, 1e-9).margin, 0);
}

TEST(RecoverCp, IndependentSeedsAgree) {
  std::mt19937_64 rng(8);
  for (int trial = 0; trial < 6; ++trial) {
    const std::size_t r = gen::pick(rng, 2, 4);
    const CpFactors f{positive(rng, r + 1, r), positive(rng, r, r), positive(rng, gen::pick(rng, 2, 6), r)};
    if (!check_kruskal(f, 1e-9).holds) continue;
    const ThreeWayArray t = f.reconstruct();
    const CpResult one = recover_cp(t, r, {.seed = 100});
    const CpResult two = recover_cp(t, r, {.seed = 200});
    EXPECT_LE(factor_error(one.factors, two.factors), 1e-5);
  }
}

TEST(RecoverCp, DeterministicAndValidated) {
  std::mt19937_64 rng(9);
  const CpFactors f{positive(rng, 3, 2), positive(rng, 3, 2), positive(rng, 3, 2)};
  const ThreeWayArray t = f.reconstruct();
  const CpResult a = recover_cp(t, 2, {.seed = 5}), b = recover_cp(t, 2, {.seed = 5});
  EXPECT_EQ(a.fit, b.fit);
  EXPECT_TRUE(a.factors.a == b.factors.a);
  EXPECT_EQ(a.restart_fits.size(), 11u);
  EXPECT_THROW(recover_cp(t, 0), DomainError);
  EXPECT_THROW(recover_cp(t, 2, {.restarts = 0}), DomainError);
}

TEST(RecoverCp, ExhaustedBudgetIsConvergenceError) {
  std::mt19937_64 rng(10);
  const CpFactors f{positive(rng, 4, 3), positive(rng, 4, 3), positive(rng, 4, 3)};
  CpOptions o;
  o.max_iterations = 1;
  o.restarts = 2;
  o.algebraic_start = false;
  try {
    recover_cp(f.reconstruct(), 3, o);
    FAIL() << "expected ConvergenceError";
  } catch (const ConvergenceError& e) {
    EXPECT_GT(e.best_fit(), 0.0);
  }
}
