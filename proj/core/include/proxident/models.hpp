#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "proxident/config.hpp"
#include "proxident/prob.hpp"

namespace proxident {

/// The causal DAGs the generator can realize.
enum class Structure {
  Fig2ConfounderProxies,  ///< U->{Z,W,Y,A}, A->Y, optional Z->A and W->Y
  Fig3ProxyPair,        ///< U->{Z,W,Y,A}, Z->A, A->Y
  Fig4TripleProxy,        ///< L->{W,Z,Y}
  FigA1Frontdoor,         ///< U->{A,Y}, A->M->Y
  FigA3MediatorProxies,   ///< U->{A,Y}, A->M->Y, M->{W,Z}, optional A->Z
};

std::string_view to_string(Structure s) noexcept;
/// Short name used on the command line ("fig2", "fig3", ...).
std::string_view short_name(Structure s) noexcept;
/// Accepts both the short and the enumerator-style names.
Structure parse_structure(std::string_view text);

/// Variables of a structure in generation (topological) order.
std::vector<std::string> structure_variables(Structure s);
/// The hidden variables of a structure.
std::vector<std::string> latent_variables(Structure s);
/// The hidden variable the proxies W, Z stand in for (U, L or M).
std::string proxied_latent(Structure s);

/// Rejection constraints and construction options for `generate`.
struct Constraints {
  bool force_invertible = false;       ///< square invertible proxy matrices
  bool force_distinct_rows = false;    ///< some row of P_{Y|latent,a} has distinct entries
  bool force_bridge_solvable = false;  ///< completeness + bridge residual within audit tol
  bool force_kruskal = false;          ///< 2R+2 <= kA+kB+kC for every treatment level
  bool collinear_outcome = false;      ///< Y independent of the proxied latent given its other parents
  bool monotone_w_means = false;       ///< E[W | latent = i] strictly increasing in i
  bool perfect_proxies = false;        ///< W = Z = latent (identity conditionals)

  friend bool operator==(const Constraints&, const Constraints&) = default;
};

struct ModelSpec {
  Structure structure = Structure::Fig3ProxyPair;
  std::map<std::string, std::size_t> cardinalities;
  std::uint64_t seed = 0;
  Constraints constraints;
  bool optional_edges = true;
  std::size_t max_retries = 10000;

  friend bool operator==(const ModelSpec&, const ModelSpec&) = default;
};

/// Sample a full law Markov to the structure: every conditional factor of
/// the DAG factorization is drawn uniformly from its simplex. Constraint
/// flags are enforced by rejection. Deterministic in (spec, seed).
///
/// Throws GenerationError when `max_retries` draws all fail, naming the
/// constraint that failed most often.
FullLaw generate(const ModelSpec& spec, const Tolerances& tol = {});

/// Cardinality map parsed from "U=2,Z=3,...".
std::map<std::string, std::size_t> parse_cardinalities(std::string_view text);

}  // namespace proxident
