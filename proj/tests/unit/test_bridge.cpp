#include <gtest/gtest.h>

#include <random>

#include "generators.hpp"
#include "oracles.hpp"
#include "proxident/bridge.hpp"
#include "proxident/errors.hpp"
#include "proxident/harness.hpp"
#include "proxident/models.hpp"
#include "proxident/oracle.hpp"

using namespace proxident;

namespace {

FullLaw observed(const FullLaw& law) { return marginalize(law, {"A", "Y", "W", "Z"}); }

FullLaw make(const std::string& cards, std::uint64_t seed, bool perfect = false, bool kp = false) {
  ModelSpec s;
  s.cardinalities = parse_cardinalities(cards);
  s.seed = seed;
  s.constraints.perfect_proxies = perfect;
  s.constraints.force_invertible = kp;
  s.constraints.force_distinct_rows = kp;
  return generate(s);
}

oracle::RationalMatrix exact(const Eigen::MatrixXd& m) {
  oracle::RationalMatrix out(static_cast<std::size_t>(m.rows()), std::vector<oracle::Rational>(static_cast<std::size_t>(m.cols())));
  for (Eigen::Index r = 0; r < m.rows(); ++r)
    for (Eigen::Index c = 0; c < m.cols(); ++c) out[static_cast<std::size_t>(r)][static_cast<std::size_t>(c)] = oracle::Rational(m(r, c));
  return out;
}

}  // namespace

TEST(Completeness, PerfectProxyIsComplete) {
  const FullLaw law = make("U=3,Z=3,W=3,Y=2,A=2", 1, true);
  const CompletenessReport r = check_completeness_discrete(law, 0);
  EXPECT_TRUE(r.complete);
  EXPECT_EQ(r.rank, 3u);
  EXPECT_NEAR(r.sigma_ratio, 1.0, 1e-12);
}

TEST(Completeness, FewerProxyStatesThanLatentIsIncomplete) {
  const CompletenessReport r = check_completeness_discrete(make("U=3,Z=2,W=3,Y=2,A=2", 2), 1);
  EXPECT_FALSE(r.complete);
  EXPECT_LE(r.rank, 2u);
  EXPECT_EQ(r.sigma_ratio, 0.0);
}

TEST(Completeness, RankAgreesWithExactRationalRank) {
  std::mt19937_64 rng(3);
  for (int trial = 0; trial < 60; ++trial) {
    const FullLaw law = make("U=3,Z=3,W=3,Y=2,A=2", rng());
    const CompletenessReport r = check_completeness_discrete(law, 0);
    const Eigen::MatrixXd p = cond_matrix(law, "U", "Z", {{"A", 0}}).entries;
    EXPECT_EQ(r.rank, oracle::exact_rank(exact(p)));
    EXPECT_TRUE(r.complete);
  }
  // A rank-deficient case: P_{Z|U} with two identical columns makes P_{U|Z,a} rank 2.
  oracle::Fig3Factors f;
  std::mt19937_64 r2(4);
  f = oracle::random_fig3(r2, 3, 3, 3, 2, 2);
  f.z_u.col(2) = f.z_u.col(1);
  for (auto& m : f.a_uz) m = Eigen::MatrixXd::Constant(2, 3, 0.5);
  const FullLaw law = oracle::build_fig3(f);
  const CompletenessReport r = check_completeness_discrete(law, 0);
  EXPECT_FALSE(r.complete);
  EXPECT_EQ(r.rank, 2u);
}

TEST(SolveBridge, PerfectProxiesGiveConditionalDirectly) {
  const FullLaw obs = observed(make("U=2,Z=2,W=2,Y=3,A=2", 5, true));
  for (std::size_t a = 0; a < 2; ++a) {
    const BridgeSolve s = solve_bridge(obs, a, 1e-8);
    EXPECT_TRUE(s.solvable);
    EXPECT_LT(s.residual, 1e-14);
    EXPECT_LT(oracle::max_abs(s.h, cond_matrix(obs, "Y", "Z", {{"A", a}}).entries), 1e-14);
  }
}

TEST(SolveBridge, BinaryFixtureMatchesDirectInverse) {
  std::mt19937_64 rng(6);
  for (int trial = 0; trial < 30; ++trial) {
    const FullLaw obs = observed(make("U=2,Z=2,W=2,Y=2,A=2", rng(), false, true));
    for (std::size_t a = 0; a < 2; ++a) {
      const Eigen::MatrixXd p = cond_matrix(obs, "W", "Z", {{"A", a}}).entries;
      const double det = p(0, 0) * p(1, 1) - p(0, 1) * p(1, 0);
      Eigen::Matrix2d inv;
      inv << p(1, 1) / det, -p(0, 1) / det, -p(1, 0) / det, p(0, 0) / det;
      const Eigen::MatrixXd direct = cond_matrix(obs, "Y", "Z", {{"A", a}}).entries * inv;
      const BridgeSolve s = solve_bridge(obs, a, 1e-8);
      EXPECT_LE(s.residual, 1e-10);
      EXPECT_LT(oracle::max_abs(s.h, direct), 1e-9 * std::max(1.0, direct.cwiseAbs().maxCoeff()));
    }
  }
}

TEST(SolveBridge, ObservedOnlyFirewall) {
  const FullLaw law = make("U=2,Z=2,W=2,Y=2,A=2", 7);
  EXPECT_THROW(solve_bridge(law, 0, 1e-8), DomainError);
  EXPECT_THROW(identify_bridge(law), DomainError);
}

TEST(IdentifyBridge, PerfectProxyEqualsAdjustment) {
  const FullLaw law = make("U=3,Z=3,W=3,Y=4,A=2", 8, true);
  const BridgeSolution sol = identify_bridge(observed(law));
  EXPECT_LT(oracle::max_abs(sol.counterfactual.table, oracle::adjustment(law, {"U"})), 1e-13);
}

TEST(IdentifyBridge, SingleLatentStateGivesConditional) {
  const FullLaw law = make("U=1,Z=2,W=3,Y=3,A=2", 9);
  const BridgeSolution sol = identify_bridge(observed(law));
  EXPECT_LT(oracle::max_abs(sol.counterfactual.table, oracle::adjustment(law, {})), 1e-12);
  for (double r : sol.residual) EXPECT_LT(r, 1e-12);
}

TEST(IdentifyBridge, AuditedModelsMatchBruteForceAdjustment) {
  std::mt19937_64 rng(10);
  int checked = 0;
  for (int trial = 0; checked < 50 && trial < 2000; ++trial) {
    const FullLaw law = generate(gen::fig3_spec(rng, 2, 4));
    if (!audit(law, Structure::Fig3ProxyPair).bridge.pass) continue;
    ++checked;
    const BridgeSolution sol = identify_bridge(observed(law));
    EXPECT_LE(oracle::max_abs(sol.counterfactual.table, oracle::adjustment(law, {"U"})), 1e-8);
    for (std::size_t a = 0; a < sol.drift.size(); ++a) EXPECT_GE(sol.drift[a], 0.0);
  }
  EXPECT_EQ(checked, 50);
}

TEST(IdentifyBridge, UnsolvableBridgeCarriesResidual) {
  // |W| < |Z| with a three-state latent: P_{Y|Z,a} is not in the row space of P_{W|Z,a}.
  const FullLaw law = make("U=3,Z=3,W=1,Y=3,A=2", 11);
  try {
    identify_bridge(observed(law));
    FAIL() << "expected IdentificationError";
  } catch (const IdentificationError& e) {
    EXPECT_GT(e.residual(), 1e-8);
  }
}

TEST(IdentifyBridge, ToleranceIsHonoured) {
  const FullLaw obs = observed(make("U=3,Z=3,W=2,Y=3,A=2", 12));
  const BridgeSolve s = solve_bridge(obs, 0, 1e-8);
  EXPECT_FALSE(s.solvable);
  EXPECT_TRUE(solve_bridge(obs, 0, s.residual * 2).solvable);
}

TEST(BridgeProperties, InvertibilitySetImpliesBridgeSolvable) {
  std::mt19937_64 rng(13);
  for (int trial = 0; trial < 100; ++trial) {
    const FullLaw law = generate(gen::invertible_spec(rng, 2, 4));
    const AssumptionReport r = audit(law, Structure::Fig3ProxyPair);
    if (!r.invertibility.pass) continue;
    for (std::size_t a = 0; a < law.cardinality("A"); ++a) {
      EXPECT_LE(solve_bridge(observed(law), a, 1e-10).residual, 1e-10);
    }
  }
}
