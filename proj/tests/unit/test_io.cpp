#include <gtest/gtest.h>

#include <cstring>

#include "proxident/errors.hpp"
#include "proxident/harness.hpp"
#include "proxident/io.hpp"
#include "proxident/models.hpp"

using namespace proxident;
using io::json;

namespace {

FullLaw sample(Structure s, const std::string& cards, std::uint64_t seed) {
  ModelSpec m;
  m.structure = s;
  m.cardinalities = parse_cardinalities(cards);
  m.seed = seed;
  return generate(m);
}

bool same_bits(double a, double b) { return std::memcmp(&a, &b, sizeof a) == 0; }

}  // namespace

TEST(Io, MalformedJsonReportsLineAndColumn) {
  try {
    io::parse("{\n  \"a\": [1,\n  2,,\n]}", "m.json");
    FAIL();
  } catch (const DomainError& e) {
    EXPECT_NE(std::string(e.what()).find("m.json:3:"), std::string::npos) << e.what();
  }
}

TEST(Io, LawRoundTripIsBitExact) {
  const FullLaw law = sample(Structure::Fig3ProxyPair, "U=2,Z=3,W=2,Y=3,A=2", 1);
  const FullLaw back = io::law_from_json(io::parse(io::dump(io::to_json(law))));
  ASSERT_EQ(back.size(), law.size());
  for (std::size_t i = 0; i < law.size(); ++i) EXPECT_TRUE(same_bits(back.probabilities()[i], law.probabilities()[i]));
  EXPECT_EQ(back.dag(), law.dag());
  EXPECT_EQ(back.names(), law.names());
}

TEST(Io, FlatteningPutsLastDomainFastest) {
  const FullLaw law = io::law_from_json(io::parse(R"({
    "domains": [{"name": "X", "labels": ["a", "b"]}, {"name": "Y", "labels": ["p", "q", "r"]}],
    "probabilities": [0.1, 0.2, 0.3, 0.15, 0.15, 0.1]})"));
  EXPECT_DOUBLE_EQ(law.mass({{"X", 0}, {"Y", 2}}), 0.3);
  EXPECT_DOUBLE_EQ(law.mass({{"X", 1}, {"Y", 0}}), 0.15);
}

TEST(Io, MissingFieldNamesThePath) {
  try {
    io::law_from_json(io::parse(R"({"domains": [{"name": "X"}], "probabilities": [1]})"));
    FAIL();
  } catch (const DomainError& e) {
    EXPECT_NE(std::string(e.what()).find("labels"), std::string::npos) << e.what();
  }
  EXPECT_THROW(io::law_from_json(io::parse(R"({"domains": [], "probabilities": "x"})")), DomainError);
}

TEST(Io, StructureInference) {
  for (auto [s, cards] : {std::pair{Structure::Fig2ConfounderProxies, "U=2,Z=2,W=2,Y=2,A=2"},
                          std::pair{Structure::Fig3ProxyPair, "U=2,Z=2,W=2,Y=2,A=2"},
                          std::pair{Structure::Fig4TripleProxy, "L=2,W=2,Z=2,Y=2"},
                          std::pair{Structure::FigA1Frontdoor, "U=2,M=2,Y=2,A=2"},
                          std::pair{Structure::FigA3MediatorProxies, "U=2,M=2,Z=2,W=2,Y=2,A=2"}}) {
    const FullLaw law = sample(s, cards, 2);
    json j = io::to_json(law);
    EXPECT_EQ(io::model_structure(j, law), s);
    j["structure"] = "fig4";
    EXPECT_EQ(io::model_structure(j, law), Structure::Fig4TripleProxy);
  }
}

TEST(Io, SpecSemTensorWitnessRoundTrip) {
  ModelSpec spec;
  spec.structure = Structure::FigA3MediatorProxies;
  spec.cardinalities = parse_cardinalities("U=2,M=3,Z=3,W=3,Y=2,A=2");
  spec.seed = 18446744073709551615ull;
  spec.constraints.force_kruskal = true;
  spec.optional_edges = false;
  EXPECT_EQ(io::spec_from_json(io::parse(io::dump(io::to_json(spec)))), spec);

  const GaussianSem sem = GaussianSem::random(3);
  const GaussianSem back = io::sem_from_json(io::parse(io::dump(io::to_json(sem))));
  EXPECT_TRUE(same_bits(back.alpha_ay, sem.alpha_ay));
  EXPECT_TRUE(same_bits(back.var_y, sem.var_y));

  const ThreeWayArray t(2, 3, 2, {0.1, 0.2, 0.3, 0.05, 0.05, 0.1, 0.02, 0.08, 0.04, 0.01, 0.03, 0.02});
  const ThreeWayArray tb = io::tensor_from_json(io::parse(io::dump(io::to_json(t))));
  EXPECT_EQ(tb.dims(), t.dims());
  EXPECT_EQ(tb.entries(), t.entries());

  const SearchResult r = search_nonnested(50, 4);
  for (const auto& [cell, list] : r.witnesses) {
    const Witness w = io::witness_from_json(io::parse(io::dump(io::to_json(list[0]))));
    EXPECT_EQ(w.cell, cell);
    EXPECT_EQ(w.spec, list[0].spec);
  }
}

TEST(Io, MatrixFormsAndNonFinite) {
  const Eigen::MatrixXd a = io::matrix_from_json(io::parse("[[1, 2], [3, 4], [5, 6]]"));
  EXPECT_EQ(a.rows(), 3);
  EXPECT_EQ(a(2, 1), 6.0);
  const Eigen::MatrixXd b = io::matrix_from_json(io::parse(R"({"matrix": [[1, 2, 3]]})"));
  EXPECT_EQ(b.cols(), 3);
  EXPECT_THROW(io::matrix_from_json(io::parse("[[1, 2], [3]]")), DomainError);
  EXPECT_TRUE(io::number(std::nan("")).is_null());
  EXPECT_TRUE(io::number(INFINITY).is_null());
}

TEST(Io, ShortestRoundTripDigits) {
  const double x = 0.1 + 0.2;
  EXPECT_TRUE(same_bits(io::parse(io::dump(io::number(x))).get<double>(), x));
  EXPECT_TRUE(same_bits(io::parse(io::dump(io::number(1.0 / 3.0))).get<double>(), 1.0 / 3.0));
}

TEST(Io, ComparisonCsvHasOneRowPerMethod) {
  ModelSpec s;
  s.cardinalities = parse_cardinalities("U=2,Z=2,W=2,Y=2,A=2");
  s.constraints.perfect_proxies = true;
  const ComparisonReport rep = run_comparison(generate(s), Structure::Fig3ProxyPair);
  const std::string csv = io::comparison_csv(rep);
  EXPECT_EQ(csv.rfind("structure,cell,method,", 0), 0u);
  EXPECT_EQ(static_cast<std::size_t>(std::count(csv.begin(), csv.end(), '\n')), rep.methods.size() + 2);
  EXPECT_NE(csv.find("FIG3_KP,BOTH,bridge"), std::string::npos);
}
