#include <gtest/gtest.h>

#include <random>

#include "oracles.hpp"
#include "generators.hpp"
#include "proxident/errors.hpp"
#include "proxident/prob.hpp"

using namespace proxident;

namespace {

// U, A, Y binary; hand-picked masses.
FullLaw fixture() {
  return FullLaw({CategoricalDomain::indexed("U", 2), CategoricalDomain::indexed("A", 2),
                  CategoricalDomain::indexed("Y", 2)},
                 {0.10, 0.05, 0.15, 0.20, 0.08, 0.12, 0.06, 0.24});
}

std::vector<std::string> shuffled_names(const FullLaw& law, std::mt19937_64& rng) {
  auto names = law.names();
  std::shuffle(names.begin(), names.end(), rng);
  return names;
}

}  // namespace

TEST(CategoricalDomain, RejectsEmptyAndDuplicateLabels) {
  EXPECT_THROW(CategoricalDomain("X", {}), DomainError);
  EXPECT_THROW(CategoricalDomain("X", {"a", "a"}), DomainError);
  EXPECT_EQ(CategoricalDomain::indexed("U", 3).labels, (std::vector<std::string>{"u0", "u1", "u2"}));
}

TEST(FullLaw, RejectsUnnormalizedAndNegativeTables) {
  const std::vector<CategoricalDomain> d{CategoricalDomain::indexed("X", 2)};
  EXPECT_THROW(FullLaw(d, {0.5, 0.6}), DomainError);
  EXPECT_THROW(FullLaw(d, {1.2, -0.2}), DomainError);
  EXPECT_THROW(FullLaw(d, {1.0}), DomainError);
  EXPECT_NO_THROW(FullLaw(d, {0.25, 0.75}));
}

TEST(FullLaw, LastDomainVariesFastest) {
  const FullLaw law = fixture();
  const std::size_t idx[] = {1, 0, 1};
  EXPECT_DOUBLE_EQ(law.at(idx), 0.12);
  EXPECT_DOUBLE_EQ(law.mass({{"U", 0}, {"Y", 1}}), 0.05 + 0.20);
}

TEST(Marginalize, KeepingEverythingIsIdentity) {
  const FullLaw law = fixture();
  const FullLaw same = marginalize(law, law.names());
  ASSERT_EQ(same.size(), law.size());
  for (std::size_t i = 0; i < law.size(); ++i) EXPECT_EQ(same.probabilities()[i], law.probabilities()[i]);
}

TEST(Marginalize, ProductLawGivesFactor) {
  const std::vector<double> fx{0.2, 0.5, 0.3}, fy{0.6, 0.4};
  std::vector<double> p;
  for (double x : fx)
    for (double y : fy) p.push_back(x * y);
  const FullLaw law({CategoricalDomain::indexed("X", 3), CategoricalDomain::indexed("Y", 2)}, p);
  const FullLaw m = marginalize(law, {"X"});
  for (std::size_t i = 0; i < 3; ++i) EXPECT_NEAR(m.probabilities()[i], fx[i], 1e-15);
}

TEST(Marginalize, FixtureMatchesBruteForceSum) {
  const FullLaw law = fixture();
  const FullLaw ay = marginalize(law, {"A", "Y"});
  for (std::size_t a = 0; a < 2; ++a)
    for (std::size_t y = 0; y < 2; ++y)
      EXPECT_NEAR(ay.mass({{"A", a}, {"Y", y}}), oracle::mass(law, {{"A", a}, {"Y", y}}), 1e-15);
}

TEST(Marginalize, UnknownVariableIsDomainError) {
  EXPECT_THROW(marginalize(fixture(), {"Q"}), DomainError);
}

TEST(Condition, FullAssignmentOfOthersIsNormalizedSlice) {
  const FullLaw law = fixture();
  const FullLaw y = condition(law, {"Y"}, {{"U", 1}, {"A", 0}});
  EXPECT_NEAR(y.probabilities()[0], 0.08 / 0.20, 1e-15);
  EXPECT_NEAR(y.probabilities()[1], 0.12 / 0.20, 1e-15);
}

TEST(Condition, FixtureMatchesHandSummation) {
  const FullLaw law = fixture();
  const FullLaw y = condition(law, {"Y"}, {{"A", 1}, {"U", 0}});
  const double denom = oracle::mass(law, {{"A", 1}, {"U", 0}});
  for (std::size_t k = 0; k < 2; ++k) {
    EXPECT_NEAR(y.probabilities()[k], oracle::mass(law, {{"A", 1}, {"U", 0}, {"Y", k}}) / denom, 1e-15);
  }
}

TEST(Condition, IndependentVariablesIgnoreConditioning) {
  std::vector<double> p;
  for (double x : {0.3, 0.7})
    for (double y : {0.1, 0.4, 0.5}) p.push_back(x * y);
  const FullLaw law({CategoricalDomain::indexed("X", 2), CategoricalDomain::indexed("Y", 3)}, p);
  for (std::size_t y = 0; y < 3; ++y) {
    const FullLaw c = condition(law, {"X"}, {{"Y", y}});
    EXPECT_NEAR(c.probabilities()[0], 0.3, 1e-15);
  }
}

TEST(Condition, ZeroMassEventNamesTheEvent) {
  const FullLaw law({CategoricalDomain::indexed("X", 2), CategoricalDomain::indexed("Y", 2)},
                    {0.5, 0.5, 0.0, 0.0});
  try {
    condition(law, {"Y"}, {{"X", 1}});
    FAIL() << "expected ConditioningError";
  } catch (const ConditioningError& e) {
    EXPECT_NE(e.event().find("X=1"), std::string::npos);
  }
}

TEST(CondMatrix, RowEqualsColumnIsIdentity) {
  const CondMatrix m = cond_matrix(fixture(), "U", "U");
  EXPECT_TRUE(m.entries.isApprox(Eigen::MatrixXd::Identity(2, 2)));
}

TEST(CondMatrix, EchoesConstructedProxyMatrix) {
  oracle::Fig3Factors f;
  f.f_u = Eigen::Vector2d(0.4, 0.6);
  f.z_u = (Eigen::Matrix2d() << 0.7, 0.3, 0.3, 0.7).finished();
  f.a_uz = {(Eigen::Matrix2d() << 0.5, 0.2, 0.5, 0.8).finished(), (Eigen::Matrix2d() << 0.6, 0.3, 0.4, 0.7).finished()};
  f.w_u = (Eigen::Matrix2d() << 0.9, 0.2, 0.1, 0.8).finished();
  f.y_ua = {(Eigen::Matrix2d() << 0.8, 0.3, 0.2, 0.7).finished(), (Eigen::Matrix2d() << 0.4, 0.1, 0.6, 0.9).finished()};
  const FullLaw law = oracle::build_fig3(f);
  EXPECT_LT(oracle::max_abs(cond_matrix(law, "W", "U").entries, f.w_u), 1e-14);
  EXPECT_LT(oracle::max_abs(cond_matrix(law, "Y", "U", {{"A", 1}}).entries, f.y_ua[1]), 1e-14);
  // W does not depend on A given U.
  EXPECT_LT(oracle::max_abs(cond_matrix(law, "W", "U", {{"A", 0}}).entries,
                            cond_matrix(law, "W", "U", {{"A", 1}}).entries),
            1e-14);
}

TEST(CondMatrix, ZeroMassColumnIsConditioningError) {
  const FullLaw law({CategoricalDomain::indexed("X", 2), CategoricalDomain::indexed("Y", 2)},
                    {0.5, 0.5, 0.0, 0.0});
  EXPECT_THROW(cond_matrix(law, "Y", "X"), ConditioningError);
}

TEST(CheckCi, FactorizedCopyAndGenerated) {
  std::vector<double> p;
  for (double x : {0.3, 0.7})
    for (double y : {0.2, 0.8})
      for (double z : {0.5, 0.5}) p.push_back(x * y * z);
  const FullLaw prod({CategoricalDomain::indexed("X", 2), CategoricalDomain::indexed("Y", 2),
                      CategoricalDomain::indexed("Z", 2)},
                     p);
  EXPECT_TRUE(check_ci(prod, {"X"}, {"Y"}, {}, 1e-12));
  EXPECT_TRUE(check_ci(prod, {"X"}, {"Y", "Z"}, {}, 1e-12));
  EXPECT_TRUE(check_ci(prod, {"X"}, {"Z"}, {"Y"}, 1e-12));

  const FullLaw copy({CategoricalDomain::indexed("X", 2), CategoricalDomain::indexed("Y", 2)},
                     {0.4, 0.0, 0.0, 0.6});
  EXPECT_FALSE(check_ci(copy, {"X"}, {"Y"}, {}, 1e-10));
  EXPECT_NEAR(ci_deviation(copy, {"X"}, {"Y"}, {}), 0.24, 1e-15);
}

TEST(CheckCi, DegenerateStrataAreSkipped) {
  // X=1 never happens; within X=0, Y and Z are independent.
  const FullLaw law({CategoricalDomain::indexed("X", 2), CategoricalDomain::indexed("Y", 2),
                     CategoricalDomain::indexed("Z", 2)},
                    {0.25, 0.25, 0.25, 0.25, 0, 0, 0, 0});
  EXPECT_TRUE(check_ci(law, {"Y"}, {"Z"}, {"X"}, 1e-12));
}

TEST(ProbProperties, ConditionTimesMarginalRebuildsJoint) {
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 200; ++trial) {
    const FullLaw law = gen::random_law(rng, gen::pick(rng, 2, 4), 3, trial % 3 == 0);
    const auto names = law.names();
    const std::string target = names[gen::pick(rng, 0, names.size() - 1)];
    std::vector<std::string> rest;
    for (const auto& n : names)
      if (n != target) rest.push_back(n);
    law.for_each([&](std::span<const std::size_t> idx, double p) {
      Assignment given;
      for (std::size_t i = 0; i < names.size(); ++i)
        if (names[i] != target) given[names[i]] = idx[i];
      const double fg = law.mass(given);
      if (fg == 0.0) return;
      const FullLaw c = condition(law, {target}, given);
      EXPECT_NEAR(c.probabilities()[idx[law.axis(target)]] * fg, p, 1e-12);
    });
  }
}

TEST(ProbProperties, CondMatrixColumnsAreDistributions) {
  std::mt19937_64 rng(12);
  for (int trial = 0; trial < 200; ++trial) {
    const FullLaw law = gen::random_law(rng, 3, 4);
    const CondMatrix m = cond_matrix(law, "X0", "X1", {{"X2", 0}});
    for (Eigen::Index c = 0; c < m.entries.cols(); ++c) {
      EXPECT_NEAR(m.entries.col(c).sum(), 1.0, 1e-12);
      EXPECT_GE(m.entries.col(c).minCoeff(), 0.0);
    }
  }
}

TEST(ProbProperties, CiDeviationIsSymmetric) {
  std::mt19937_64 rng(13);
  for (int trial = 0; trial < 200; ++trial) {
    const FullLaw law = gen::random_law(rng, 4, 3, trial % 2 == 0);
    EXPECT_EQ(ci_deviation(law, {"X0"}, {"X1", "X3"}, {"X2"}), ci_deviation(law, {"X1", "X3"}, {"X0"}, {"X2"}));
    EXPECT_EQ(check_ci(law, {"X0"}, {"X1"}, {}, 1e-10), check_ci(law, {"X1"}, {"X0"}, {}, 1e-10));
  }
}

TEST(ProbProperties, MarginalizationOrderDoesNotMatter) {
  std::mt19937_64 rng(14);
  for (int trial = 0; trial < 200; ++trial) {
    const FullLaw law = gen::random_law(rng, 4, 3);
    const auto order = shuffled_names(law, rng);
    // Drop the first two variables of `order` in two different sequences.
    auto keep_without = [](std::vector<std::string> names, const std::string& drop) {
      names.erase(std::find(names.begin(), names.end(), drop));
      return names;
    };
    const FullLaw one = marginalize(marginalize(law, keep_without(law.names(), order[0])),
                                    keep_without(keep_without(law.names(), order[0]), order[1]));
    const FullLaw two = marginalize(marginalize(law, keep_without(law.names(), order[1])),
                                    keep_without(keep_without(law.names(), order[1]), order[0]));
    const FullLaw direct = marginalize(law, keep_without(keep_without(law.names(), order[0]), order[1]));
    ASSERT_EQ(one.size(), two.size());
    for (std::size_t i = 0; i < one.size(); ++i) {
      EXPECT_NEAR(one.probabilities()[i], two.probabilities()[i], 1e-15);
      EXPECT_NEAR(one.probabilities()[i], direct.probabilities()[i], 1e-15);
    }
  }
}
