#include "proxident/models.hpp"

#include <algorithm>
#include <cctype>
#include <numeric>
#include <string>

#include "proxident/errors.hpp"
#include "proxident/harness.hpp"
#include "proxident/rng.hpp"

namespace proxident {

std::string_view to_string(Structure s) noexcept {
  switch (s) {
    case Structure::Fig2ConfounderProxies: return "FIG2_CONFOUNDER_PROXIES";
    case Structure::Fig3ProxyPair: return "FIG3_KP";
    case Structure::Fig4TripleProxy: return "FIG4_TRIPLE_PROXY";
    case Structure::FigA1Frontdoor: return "FIGA1_FRONTDOOR";
    case Structure::FigA3MediatorProxies: return "FIGA3_MEDIATOR_PROXIES";
  }
  return "UNKNOWN";
}

std::string_view short_name(Structure s) noexcept {
  switch (s) {
    case Structure::Fig2ConfounderProxies: return "fig2";
    case Structure::Fig3ProxyPair: return "fig3";
    case Structure::Fig4TripleProxy: return "fig4";
    case Structure::FigA1Frontdoor: return "figA1";
    case Structure::FigA3MediatorProxies: return "figA3";
  }
  return "unknown";
}

Structure parse_structure(std::string_view text) {
  std::string lower;
  for (char c : text) lower.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
  for (auto s : {Structure::Fig2ConfounderProxies, Structure::Fig3ProxyPair,
                 Structure::Fig4TripleProxy, Structure::FigA1Frontdoor,
                 Structure::FigA3MediatorProxies}) {
    std::string full;
    for (char c : to_string(s)) full.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
    std::string shortn;
    for (char c : short_name(s)) shortn.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
    if (lower == full || lower == shortn) return s;
  }
  throw DomainError("unknown structure '" + std::string(text) + "'");
}

namespace {

struct Node {
  std::string name;
  std::vector<std::string> parents;
};

std::vector<Node> structure_nodes(Structure s, bool optional_edges) {
  switch (s) {
    case Structure::Fig2ConfounderProxies: {
      std::vector<std::string> a_parents{"U"};
      std::vector<std::string> y_parents{"U", "A"};
      if (optional_edges) {
        a_parents.push_back("Z");
        y_parents.push_back("W");
      }
      return {{"U", {}}, {"Z", {"U"}}, {"A", a_parents}, {"W", {"U"}}, {"Y", y_parents}};
    }
    case Structure::Fig3ProxyPair:
      return {{"U", {}}, {"Z", {"U"}}, {"A", {"U", "Z"}}, {"W", {"U"}}, {"Y", {"U", "A"}}};
    case Structure::Fig4TripleProxy:
      return {{"L", {}}, {"W", {"L"}}, {"Z", {"L"}}, {"Y", {"L"}}};
    case Structure::FigA1Frontdoor:
      return {{"U", {}}, {"A", {"U"}}, {"M", {"A"}}, {"Y", {"M", "U"}}};
    case Structure::FigA3MediatorProxies: {
      std::vector<std::string> z_parents{"M"};
      if (optional_edges) z_parents.push_back("A");
      return {{"U", {}}, {"A", {"U"}}, {"M", {"A"}}, {"Z", z_parents}, {"W", {"M"}}, {"Y", {"M", "U"}}};
    }
  }
  throw DomainError("unknown structure");
}

// Conditional probability table: row per parent configuration (row-major
// over parents in listed order), column per child state.
struct Cpt {
  std::vector<std::size_t> parent_cards;
  std::size_t child_card = 0;
  std::vector<std::vector<double>> rows;

  std::size_t configs() const {
    return std::accumulate(parent_cards.begin(), parent_cards.end(), std::size_t{1},
                           std::multiplies<>());
  }
  // Index of parent `k` within configuration `row`.
  std::size_t parent_state(std::size_t row, std::size_t k) const {
    std::size_t stride = 1;
    for (std::size_t i = parent_cards.size(); i-- > k + 1;) stride *= parent_cards[i];
    return (row / stride) % parent_cards[k];
  }
};

bool strictly_separated(std::vector<double> v, double gap) {
  std::sort(v.begin(), v.end());
  for (std::size_t i = 1; i < v.size(); ++i) {
    if (v[i] - v[i - 1] <= gap) return false;
  }
  return true;
}

struct Draw {
  std::vector<Cpt> cpts;
  bool monotone_ok = true;
};

Draw draw_cpts(const std::vector<Node>& nodes, const std::map<std::string, std::size_t>& cards,
               const std::string& latent, const Constraints& c, CounterRng& rng) {
  Draw out;
  for (const auto& node : nodes) {
    Cpt cpt;
    cpt.child_card = cards.at(node.name);
    for (const auto& p : node.parents) cpt.parent_cards.push_back(cards.at(p));
    const auto latent_pos = std::find(node.parents.begin(), node.parents.end(), latent);
    const bool has_latent = latent_pos != node.parents.end();
    const std::size_t latent_k = static_cast<std::size_t>(latent_pos - node.parents.begin());
    const bool is_proxy = node.name == "W" || node.name == "Z";

    cpt.rows.resize(cpt.configs());
    if (c.perfect_proxies && is_proxy && has_latent) {
      for (std::size_t r = 0; r < cpt.rows.size(); ++r) {
        cpt.rows[r].assign(cpt.child_card, 0.0);
        cpt.rows[r][cpt.parent_state(r, latent_k)] = 1.0;
      }
    } else if (c.collinear_outcome && node.name == "Y" && has_latent) {
      // One draw per configuration of the other parents, shared across latent states.
      std::map<std::vector<std::size_t>, std::vector<double>> shared;
      for (std::size_t r = 0; r < cpt.rows.size(); ++r) {
        std::vector<std::size_t> key;
        for (std::size_t k = 0; k < cpt.parent_cards.size(); ++k) {
          if (k != latent_k) key.push_back(cpt.parent_state(r, k));
        }
        auto it = shared.find(key);
        if (it == shared.end()) it = shared.emplace(key, rng.simplex(cpt.child_card)).first;
        cpt.rows[r] = it->second;
      }
    } else {
      for (auto& row : cpt.rows) row = rng.simplex(cpt.child_card);
    }

    if (c.monotone_w_means && node.name == "W" && has_latent && node.parents.size() == 1) {
      auto mean = [](const std::vector<double>& p) {
        double m = 0.0;
        for (std::size_t i = 0; i < p.size(); ++i) m += static_cast<double>(i) * p[i];
        return m;
      };
      std::sort(cpt.rows.begin(), cpt.rows.end(),
                [&](const auto& x, const auto& y) { return mean(x) < mean(y); });
      std::vector<double> means;
      for (const auto& row : cpt.rows) means.push_back(mean(row));
      out.monotone_ok = strictly_separated(means, 1e-6);
    }
    out.cpts.push_back(std::move(cpt));
  }
  return out;
}

FullLaw assemble(const std::vector<Node>& nodes, const std::vector<Cpt>& cpts,
                 const std::map<std::string, std::size_t>& cards) {
  std::vector<CategoricalDomain> domains;
  std::vector<Edge> dag;
  std::map<std::string, std::size_t> position;
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    domains.push_back(CategoricalDomain::indexed(nodes[i].name, cards.at(nodes[i].name)));
    position[nodes[i].name] = i;
    for (const auto& p : nodes[i].parents) dag.emplace_back(p, nodes[i].name);
  }
  std::size_t total = 1;
  for (const auto& d : domains) total *= d.cardinality();
  std::vector<double> probs(total);
  std::vector<std::size_t> idx(nodes.size(), 0);
  for (std::size_t off = 0; off < total; ++off) {
    double p = 1.0;
    for (std::size_t i = 0; i < nodes.size(); ++i) {
      std::size_t row = 0;
      for (std::size_t k = 0; k < nodes[i].parents.size(); ++k) {
        row = row * cpts[i].parent_cards[k] + idx[position.at(nodes[i].parents[k])];
      }
      p *= cpts[i].rows[row][idx[i]];
    }
    probs[off] = p;
    for (std::size_t i = nodes.size(); i-- > 0;) {
      if (++idx[i] < domains[i].cardinality()) break;
      idx[i] = 0;
    }
  }
  return FullLaw(std::move(domains), std::move(probs), std::move(dag), 1e-9);
}

std::vector<std::string> failed_constraints(const FullLaw& law, const ModelSpec& spec,
                                            const Tolerances& tol) {
  const Constraints& c = spec.constraints;
  std::vector<std::string> failed;
  if (!(c.force_invertible || c.force_distinct_rows || c.force_bridge_solvable || c.force_kruskal)) {
    return failed;
  }
  const AssumptionReport report = audit(law, spec.structure, tol);
  if (!report.positivity.pass) {
    failed.emplace_back("positivity");
    return failed;
  }
  if (c.force_invertible && !report.invertibility.invertible) failed.emplace_back("force_invertible");
  if (c.force_distinct_rows && !report.invertibility.distinct) failed.emplace_back("force_distinct_rows");
  if (c.force_bridge_solvable && !bridge_conditions_hold(report)) {
    failed.emplace_back("force_bridge_solvable");
  }
  if (c.force_kruskal && !kruskal_conditions_hold(report)) failed.emplace_back("force_kruskal");
  return failed;
}

void validate_spec(const ModelSpec& spec) {
  const auto vars = structure_variables(spec.structure);
  for (const auto& v : vars) {
    const auto it = spec.cardinalities.find(v);
    if (it == spec.cardinalities.end()) {
      throw DomainError("cardinality missing for variable '" + v + "' of " +
                        std::string(short_name(spec.structure)));
    }
    if (it->second < 1) throw DomainError("cardinality of '" + v + "' must be >= 1");
  }
  for (const auto& [name, card] : spec.cardinalities) {
    if (std::find(vars.begin(), vars.end(), name) == vars.end()) {
      throw DomainError("variable '" + name + "' is not part of " +
                        std::string(short_name(spec.structure)));
    }
  }
  const std::string latent = proxied_latent(spec.structure);
  if (spec.constraints.perfect_proxies) {
    for (const char* proxy : {"W", "Z"}) {
      const auto it = spec.cardinalities.find(proxy);
      if (it != spec.cardinalities.end() && it->second != spec.cardinalities.at(latent)) {
        throw DomainError(std::string("perfect proxies need |") + proxy + "| = |" + latent + "|");
      }
    }
  }
  if (spec.max_retries == 0) throw DomainError("max_retries must be >= 1");
}

}  // namespace

std::vector<std::string> structure_variables(Structure s) {
  std::vector<std::string> out;
  for (const auto& n : structure_nodes(s, true)) out.push_back(n.name);
  return out;
}

std::vector<std::string> latent_variables(Structure s) {
  switch (s) {
    case Structure::Fig4TripleProxy: return {"L"};
    case Structure::FigA3MediatorProxies: return {"U", "M"};
    default: return {"U"};
  }
}

std::string proxied_latent(Structure s) {
  switch (s) {
    case Structure::Fig4TripleProxy: return "L";
    case Structure::FigA3MediatorProxies: return "M";
    default: return "U";
  }
}

FullLaw generate(const ModelSpec& spec, const Tolerances& tol) {
  validate_spec(spec);
  const auto nodes = structure_nodes(spec.structure, spec.optional_edges);
  const std::string latent = proxied_latent(spec.structure);
  CounterRng rng(spec.seed);
  std::map<std::string, std::size_t> failures;
  for (std::size_t attempt = 0; attempt < spec.max_retries; ++attempt) {
    Draw draw = draw_cpts(nodes, spec.cardinalities, latent, spec.constraints, rng);
    if (!draw.monotone_ok) {
      ++failures["monotone_w_means"];
      continue;
    }
    FullLaw law = assemble(nodes, draw.cpts, spec.cardinalities);
    const auto failed = failed_constraints(law, spec, tol);
    if (failed.empty()) return law;
    for (const auto& f : failed) ++failures[f];
  }
  std::string worst = "unknown";
  std::size_t worst_count = 0;
  for (const auto& [name, count] : failures) {
    if (count > worst_count) {
      worst = name;
      worst_count = count;
    }
  }
  throw GenerationError(worst, "model generation exceeded " + std::to_string(spec.max_retries) +
                                   " retries; most frequent failure: " + worst + " (" +
                                   std::to_string(worst_count) + " times)");
}

std::map<std::string, std::size_t> parse_cardinalities(std::string_view text) {
  std::map<std::string, std::size_t> out;
  while (!text.empty()) {
    const auto comma = text.find(',');
    const std::string_view item = text.substr(0, comma);
    text = comma == std::string_view::npos ? std::string_view{} : text.substr(comma + 1);
    if (item.empty()) continue;
    const auto eq = item.find('=');
    if (eq == std::string_view::npos || eq == 0) {
      throw DomainError("cardinality entry '" + std::string(item) + "' is not NAME=N");
    }
    const std::string name(item.substr(0, eq));
    const std::string value(item.substr(eq + 1));
    std::size_t pos = 0;
    unsigned long n = 0;
    if (value.empty() || !std::isdigit(static_cast<unsigned char>(value.front()))) {
      throw DomainError("cardinality of '" + name + "' must be a positive integer");
    }
    try {
      n = std::stoul(value, &pos);
    } catch (const std::exception&) {
      pos = 0;
    }
    if (pos != value.size() || value.empty() || n < 1) {
      throw DomainError("cardinality of '" + name + "' must be a positive integer");
    }
    out[name] = n;
  }
  return out;
}

}  // namespace proxident
