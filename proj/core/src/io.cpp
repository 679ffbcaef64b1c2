#include "proxident/io.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>

#include "proxident/errors.hpp"

namespace proxident::io {
namespace {

using Eigen::Index;

std::string where_in(std::string_view ctx, std::string_view key) {
  return std::string(ctx) + "." + std::string(key);
}

const json& need(const json& j, std::string_view key, std::string_view ctx) {
  if (!j.is_object()) throw DomainError(std::string(ctx) + ": expected a JSON object");
  const auto it = j.find(std::string(key));
  if (it == j.end()) throw DomainError(where_in(ctx, key) + ": missing field");
  return *it;
}

template <typename T>
T as(const json& j, std::string_view ctx) {
  try {
    return j.get<T>();
  } catch (const json::exception& e) {
    throw DomainError(std::string(ctx) + ": " + e.what());
  }
}

template <typename T>
T field(const json& j, std::string_view key, std::string_view ctx) {
  return as<T>(need(j, key, ctx), where_in(ctx, key));
}

template <typename T>
T field_or(const json& j, std::string_view key, T fallback, std::string_view ctx) {
  if (!j.is_object() || !j.contains(std::string(key))) return fallback;
  return field<T>(j, key, ctx);
}

std::string csv_number(double x) {
  if (!std::isfinite(x)) return x > 0 ? "inf" : (x < 0 ? "-inf" : "nan");
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

json numbers(const std::vector<double>& v) {
  json out = json::array();
  for (double x : v) out.push_back(number(x));
  return out;
}

}  // namespace

json parse(std::string_view text, std::string_view source) {
  try {
    return json::parse(text.begin(), text.end());
  } catch (const json::parse_error& e) {
    std::size_t line = 1, column = 1;
    const std::size_t limit = std::min<std::size_t>(e.byte == 0 ? 0 : e.byte - 1, text.size());
    for (std::size_t i = 0; i < limit; ++i) {
      if (text[i] == '\n') {
        ++line;
        column = 1;
      } else {
        ++column;
      }
    }
    std::ostringstream msg;
    msg << source << ":" << line << ":" << column << ": malformed JSON";
    const std::string what = e.what();
    const auto colon = what.rfind(": ");
    if (colon != std::string::npos) msg << " (" << what.substr(colon + 2) << ")";
    throw DomainError(msg.str());
  }
}

std::string read_text(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DomainError("cannot open '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

json read_file(const std::string& path) { return parse(read_text(path), path); }

void write_text(const std::string& path, std::string_view text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw DomainError("cannot write '" + path + "'");
  out << text;
  if (!out) throw DomainError("failed writing '" + path + "'");
}

std::string dump(const json& value) { return value.dump(2) + "\n"; }

json number(double value) { return std::isfinite(value) ? json(value) : json(nullptr); }

json to_json(const Eigen::MatrixXd& m) {
  json rows = json::array();
  for (Index r = 0; r < m.rows(); ++r) {
    json row = json::array();
    for (Index c = 0; c < m.cols(); ++c) row.push_back(number(m(r, c)));
    rows.push_back(std::move(row));
  }
  return rows;
}

json to_json(const Eigen::VectorXd& v) {
  json out = json::array();
  for (Index i = 0; i < v.size(); ++i) out.push_back(number(v(i)));
  return out;
}

Eigen::MatrixXd matrix_from_json(const json& j) {
  const json& rows = j.is_object() ? need(j, "matrix", "matrix document") : j;
  if (!rows.is_array() || rows.empty()) throw DomainError("matrix: expected a non-empty array of rows");
  const auto nr = rows.size();
  if (!rows[0].is_array() || rows[0].empty()) throw DomainError("matrix[0]: expected a non-empty row");
  const auto nc = rows[0].size();
  Eigen::MatrixXd m(static_cast<Index>(nr), static_cast<Index>(nc));
  for (std::size_t r = 0; r < nr; ++r) {
    const std::string ctx = "matrix[" + std::to_string(r) + "]";
    if (!rows[r].is_array() || rows[r].size() != nc) {
      throw DomainError(ctx + ": every row needs " + std::to_string(nc) + " entries");
    }
    for (std::size_t c = 0; c < nc; ++c) {
      const auto x = as<double>(rows[r][c], ctx + "[" + std::to_string(c) + "]");
      if (!std::isfinite(x)) throw DomainError(ctx + ": non-finite entry");
      m(static_cast<Index>(r), static_cast<Index>(c)) = x;
    }
  }
  return m;
}

json to_json(const CategoricalDomain& d) { return {{"name", d.name}, {"labels", d.labels}}; }

CategoricalDomain domain_from_json(const json& j, std::string_view where) {
  auto name = field<std::string>(j, "name", where);
  auto labels = field<std::vector<std::string>>(j, "labels", where);
  try {
    return CategoricalDomain(std::move(name), std::move(labels));
  } catch (const DomainError& e) {
    throw DomainError(std::string(where) + ": " + e.what());
  }
}

json to_json(const FullLaw& law) {
  json domains = json::array();
  for (const auto& d : law.domains()) domains.push_back(to_json(d));
  json probs = json::array();
  for (double p : law.probabilities()) probs.push_back(number(p));
  json dag = json::array();
  for (const auto& [from, to] : law.dag()) dag.push_back({from, to});
  return {{"domains", domains}, {"probabilities", probs}, {"dag", dag}};
}

FullLaw law_from_json(const json& j) {
  const json& doms = need(j, "domains", "model");
  if (!doms.is_array()) throw DomainError("model.domains: expected an array");
  std::vector<CategoricalDomain> domains;
  for (std::size_t i = 0; i < doms.size(); ++i) {
    domains.push_back(domain_from_json(doms[i], "model.domains[" + std::to_string(i) + "]"));
  }
  const json& probs = need(j, "probabilities", "model");
  if (!probs.is_array()) throw DomainError("model.probabilities: expected an array");
  std::vector<double> p;
  for (std::size_t i = 0; i < probs.size(); ++i) {
    p.push_back(as<double>(probs[i], "model.probabilities[" + std::to_string(i) + "]"));
  }
  std::vector<Edge> dag;
  if (j.contains("dag")) {
    const json& edges = j["dag"];
    if (!edges.is_array()) throw DomainError("model.dag: expected an array of [from, to] pairs");
    for (std::size_t i = 0; i < edges.size(); ++i) {
      const auto e = as<std::vector<std::string>>(edges[i], "model.dag[" + std::to_string(i) + "]");
      if (e.size() != 2) throw DomainError("model.dag[" + std::to_string(i) + "]: expected [from, to]");
      dag.emplace_back(e[0], e[1]);
    }
  }
  try {
    return FullLaw(std::move(domains), std::move(p), std::move(dag));
  } catch (const DomainError& e) {
    throw DomainError(std::string("model: ") + e.what());
  }
}

Structure model_structure(const json& model, const FullLaw& law) {
  if (model.is_object() && model.contains("structure")) {
    return parse_structure(field<std::string>(model, "structure", "model"));
  }
  const auto names = law.names();
  const std::set<std::string> vars(names.begin(), names.end());
  using S = std::set<std::string>;
  if (vars == S{"L", "W", "Z", "Y"}) return Structure::Fig4TripleProxy;
  if (vars == S{"U", "A", "M", "Y"}) return Structure::FigA1Frontdoor;
  if (vars == S{"U", "A", "M", "Z", "W", "Y"}) return Structure::FigA3MediatorProxies;
  if (vars == S{"U", "Z", "A", "W", "Y"}) {
    for (const auto& e : law.dag()) {
      if (e == Edge{"W", "Y"}) return Structure::Fig2ConfounderProxies;
    }
    return Structure::Fig3ProxyPair;
  }
  throw DomainError("model: cannot infer the structure from its variables; add a \"structure\" field");
}

json to_json(const ModelSpec& spec) {
  const Constraints& c = spec.constraints;
  json cards = json::object();
  for (const auto& [k, v] : spec.cardinalities) cards[k] = v;
  return {{"structure", std::string(to_string(spec.structure))},
          {"cardinalities", cards},
          {"seed", spec.seed},
          {"optional_edges", spec.optional_edges},
          {"max_retries", spec.max_retries},
          {"constraints",
           {{"force_invertible", c.force_invertible},
            {"force_distinct_rows", c.force_distinct_rows},
            {"force_bridge_solvable", c.force_bridge_solvable},
            {"force_kruskal", c.force_kruskal},
            {"collinear_outcome", c.collinear_outcome},
            {"monotone_w_means", c.monotone_w_means},
            {"perfect_proxies", c.perfect_proxies}}}};
}

ModelSpec spec_from_json(const json& j) {
  ModelSpec spec;
  spec.structure = parse_structure(field<std::string>(j, "structure", "spec"));
  const json& cards = need(j, "cardinalities", "spec");
  if (!cards.is_object()) throw DomainError("spec.cardinalities: expected an object");
  for (const auto& [k, v] : cards.items()) {
    const auto n = as<long long>(v, "spec.cardinalities." + k);
    if (n < 1) throw DomainError("spec.cardinalities." + k + ": must be >= 1");
    spec.cardinalities[k] = static_cast<std::size_t>(n);
  }
  spec.seed = field_or<std::uint64_t>(j, "seed", 0, "spec");
  spec.optional_edges = field_or<bool>(j, "optional_edges", true, "spec");
  spec.max_retries = field_or<std::size_t>(j, "max_retries", 10000, "spec");
  if (j.contains("constraints")) {
    const json& c = j["constraints"];
    const std::string ctx = "spec.constraints";
    if (!c.is_object()) throw DomainError(ctx + ": expected an object");
    static const std::set<std::string> known{"force_invertible", "force_distinct_rows",
                                             "force_bridge_solvable", "force_kruskal",
                                             "collinear_outcome", "monotone_w_means",
                                             "perfect_proxies"};
    for (const auto& [k, v] : c.items()) {
      if (!known.count(k)) throw DomainError(ctx + "." + k + ": unknown constraint");
    }
    Constraints& out = spec.constraints;
    out.force_invertible = field_or<bool>(c, "force_invertible", false, ctx);
    out.force_distinct_rows = field_or<bool>(c, "force_distinct_rows", false, ctx);
    out.force_bridge_solvable = field_or<bool>(c, "force_bridge_solvable", false, ctx);
    out.force_kruskal = field_or<bool>(c, "force_kruskal", false, ctx);
    out.collinear_outcome = field_or<bool>(c, "collinear_outcome", false, ctx);
    out.monotone_w_means = field_or<bool>(c, "monotone_w_means", false, ctx);
    out.perfect_proxies = field_or<bool>(c, "perfect_proxies", false, ctx);
  }
  return spec;
}

json to_json(const CounterfactualLaw& cf) {
  json columns = json::array();
  for (Index a = 0; a < cf.table.cols(); ++a) {
    json col = json::array();
    for (Index y = 0; y < cf.table.rows(); ++y) col.push_back(number(cf.table(y, a)));
    columns.push_back(std::move(col));
  }
  return {{"treatment", to_json(cf.treatment)}, {"outcome", to_json(cf.outcome)}, {"columns", columns}};
}

CounterfactualLaw counterfactual_from_json(const json& j) {
  CounterfactualLaw cf;
  cf.treatment = domain_from_json(need(j, "treatment", "counterfactual"), "counterfactual.treatment");
  cf.outcome = domain_from_json(need(j, "outcome", "counterfactual"), "counterfactual.outcome");
  const auto cols = field<std::vector<std::vector<double>>>(j, "columns", "counterfactual");
  if (cols.size() != cf.treatment.cardinality()) {
    throw DomainError("counterfactual.columns: expected one column per treatment state");
  }
  cf.table.resize(static_cast<Index>(cf.outcome.cardinality()), static_cast<Index>(cols.size()));
  for (std::size_t a = 0; a < cols.size(); ++a) {
    if (cols[a].size() != cf.outcome.cardinality()) {
      throw DomainError("counterfactual.columns[" + std::to_string(a) + "]: wrong length");
    }
    for (std::size_t y = 0; y < cols[a].size(); ++y) {
      cf.table(static_cast<Index>(y), static_cast<Index>(a)) = cols[a][y];
    }
  }
  return cf;
}

namespace {

struct SemField {
  const char* key;
  double GaussianSem::*member;
};

constexpr SemField kSemFields[] = {
    {"muU", &GaussianSem::mu_u},         {"beta0Z", &GaussianSem::beta0_z},
    {"alphaUZ", &GaussianSem::alpha_uz}, {"beta0A", &GaussianSem::beta0_a},
    {"alphaUA", &GaussianSem::alpha_ua}, {"alphaZA", &GaussianSem::alpha_za},
    {"beta0W", &GaussianSem::beta0_w},   {"alphaUW", &GaussianSem::alpha_uw},
    {"beta0Y", &GaussianSem::beta0_y},   {"alphaAY", &GaussianSem::alpha_ay},
    {"alphaUY", &GaussianSem::alpha_uy}, {"varU", &GaussianSem::var_u},
    {"varZ", &GaussianSem::var_z},       {"varA", &GaussianSem::var_a},
    {"varW", &GaussianSem::var_w},       {"varY", &GaussianSem::var_y},
};

}  // namespace

json to_json(const GaussianSem& sem) {
  json out = json::object();
  for (const auto& f : kSemFields) out[f.key] = number(sem.*(f.member));
  return out;
}

GaussianSem sem_from_json(const json& j) {
  if (!j.is_object()) throw DomainError("sem: expected a flat object of coefficients");
  GaussianSem sem;
  std::set<std::string> known;
  for (const auto& f : kSemFields) {
    known.insert(f.key);
    if (j.contains(f.key)) sem.*(f.member) = field<double>(j, f.key, "sem");
  }
  for (const auto& [k, v] : j.items()) {
    if (!known.count(k)) throw DomainError("sem." + k + ": unknown coefficient");
  }
  sem.validate();
  return sem;
}

json to_json(const ThreeWayArray& t) {
  const auto d = t.dims();
  const auto& roles = t.axis_roles();
  return {{"dims", {d[0], d[1], d[2]}},
          {"axes", {roles[0], roles[1], roles[2]}},
          {"entries", numbers(t.entries())}};
}

ThreeWayArray tensor_from_json(const json& j) {
  const auto dims = field<std::vector<long long>>(j, "dims", "tensor");
  if (dims.size() != 3) throw DomainError("tensor.dims: expected three dimensions");
  for (auto d : dims) {
    if (d < 1) throw DomainError("tensor.dims: dimensions must be positive");
  }
  const auto entries = field<std::vector<double>>(j, "entries", "tensor");
  std::array<std::string, 3> axes{"W", "Z", "Y"};
  if (j.contains("axes")) {
    const auto names = field<std::vector<std::string>>(j, "axes", "tensor");
    if (names.size() != 3) throw DomainError("tensor.axes: expected three names");
    axes = {names[0], names[1], names[2]};
  }
  try {
    return ThreeWayArray(static_cast<std::size_t>(dims[0]), static_cast<std::size_t>(dims[1]),
                         static_cast<std::size_t>(dims[2]), entries, axes);
  } catch (const DomainError& e) {
    throw DomainError(std::string("tensor: ") + e.what());
  }
}

json to_json(const Tolerances& t) {
  return {{"normalization", t.normalization}, {"ci", t.ci},
          {"rank", t.rank},                   {"bridge_residual", t.bridge_residual},
          {"bridge_audit", t.bridge_audit},   {"drift", t.drift},
          {"negative_clip", t.negative_clip}, {"eigen_gap", t.eigen_gap},
          {"imaginary", t.imaginary},         {"negative_recovery", t.negative_recovery},
          {"label", t.label},                 {"cp_fit", t.cp_fit}};
}

json to_json(const CondMatrix& m) {
  json context = json::object();
  for (const auto& [k, v] : m.context) context[k] = v;
  return {{"row", to_json(m.row)}, {"col", to_json(m.col)}, {"entries", to_json(m.entries)},
          {"context", context}};
}

json to_json(const CompletenessReport& r) {
  return {{"complete", r.complete}, {"rank", r.rank}, {"latent_cardinality", r.latent_cardinality},
          {"singular_values", to_json(r.singular_values)}, {"sigma_ratio", number(r.sigma_ratio)}};
}

json to_json(const BridgeSolution& s) {
  json h = json::array();
  for (const auto& m : s.per_treatment) h.push_back(to_json(m));
  return {{"per_treatment", h},
          {"residual", numbers(s.residual)},
          {"drift", numbers(s.drift)},
          {"clipped_mass", numbers(s.clipped_mass)},
          {"counterfactual", to_json(s.counterfactual)}};
}

json to_json(const KruskalCheck& k) {
  return {{"rank", k.rank},     {"k_a", k.k_a},       {"k_b", k.k_b},
          {"k_c", k.k_c},       {"margin", k.margin}, {"holds", k.holds},
          {"categories", k.categories}, {"category_condition", k.category_condition}};
}

json to_json(const CpFactors& f) {
  return {{"a", to_json(f.a)}, {"b", to_json(f.b)}, {"c", to_json(f.c)}};
}

json to_json(const CpResult& r) {
  return {{"factors", to_json(r.factors)},
          {"fit", number(r.fit)},
          {"iterations", r.iterations},
          {"best_restart", r.best_restart},
          {"converged_restarts", r.converged_restarts},
          {"restart_fits", numbers(r.restart_fits)}};
}

json to_json(const LatentRecovery& r) {
  json z = json::array(), y = json::array(), fa = json::array();
  for (const auto& m : r.p_z_given_ua) z.push_back(to_json(m));
  for (const auto& m : r.p_y_given_ua) y.push_back(to_json(m));
  for (const auto& v : r.f_u_given_a) fa.push_back(to_json(v));
  const RecoveryDiagnostics& d = r.diagnostics;
  json diag = {{"eigen_gap", numbers(d.eigen_gap)},
               {"chosen_slice", d.chosen_slice},
               {"condition_number", numbers(d.condition_number)},
               {"alignment_cost", numbers(d.alignment_cost)},
               {"clipped_mass", numbers(d.clipped_mass)},
               {"fit", numbers(d.fit)},
               {"max_imaginary", number(d.max_imaginary)}};
  json out = {{"latent", to_json(r.latent)},
              {"treatment", to_json(r.treatment)},
              {"p_w_given_u", to_json(r.p_w_given_u)},
              {"p_z_given_ua", z},
              {"p_y_given_ua", y},
              {"f_u_given_a", fa},
              {"f_u", to_json(r.f_u)},
              {"diagnostics", diag}};
  out["label_permutation"] = r.label_permutation ? json(*r.label_permutation) : json(nullptr);
  return out;
}

namespace {

json verdict_json(const Verdict& v) {
  return {{"pass", v.pass}, {"margin", number(v.margin)}, {"detail", v.detail}};
}

}  // namespace

json to_json(const AssumptionReport& r) {
  json markov = json::object();
  for (const auto& [k, v] : r.markov) markov[k] = verdict_json(v);
  json completeness_rank = r.bridge.completeness_rank;
  json kruskal = json::array();
  for (const auto& k : r.kruskal.per_treatment) kruskal.push_back(to_json(k));
  return {{"structure", std::string(to_string(r.structure))},
          {"latent", r.latent},
          {"latent_cardinality", r.latent_cardinality},
          {"markov", markov},
          {"markov_bridge", r.markov_bridge},
          {"markov_array", r.markov_array},
          {"positivity", verdict_json(r.positivity)},
          {"bridge_set",
           {{"applicable", r.bridge.applicable},
            {"pass", r.bridge.pass},
            {"completeness_rank", completeness_rank},
            {"completeness_ratio", numbers(r.bridge.completeness_ratio)},
            {"residual", numbers(r.bridge.residual)}}},
          {"invertibility_set",
           {{"applicable", r.invertibility.applicable},
            {"pass", r.invertibility.pass},
            {"invertible", r.invertibility.invertible},
            {"distinct", r.invertibility.distinct},
            {"w_condition", number(r.invertibility.w_condition)},
            {"z_condition", numbers(r.invertibility.z_condition)},
            {"distinct_margin", numbers(r.invertibility.distinct_margin)}}},
          {"kruskal_set",
           {{"applicable", r.kruskal.applicable},
            {"pass", r.kruskal.pass},
            {"per_treatment", kruskal}}},
          {"cell", std::string(to_string(classify(r)))}};
}

json to_json(const MethodOutcome& m) {
  json out = {{"method", m.method}, {"succeeded", m.succeeded}};
  out["error"] = m.error.empty() ? json(nullptr) : json(m.error);
  out["max_deviation"] = m.counterfactual ? number(m.max_deviation) : json(nullptr);
  out["latent_error"] = m.latent_error ? number(*m.latent_error) : json(nullptr);
  out["counterfactual"] = m.counterfactual ? to_json(*m.counterfactual) : json(nullptr);
  return out;
}

json to_json(const ComparisonReport& r) {
  json methods = json::array();
  for (const auto& m : r.methods) methods.push_back(to_json(m));
  json out = {{"audit", to_json(r.audit)},
              {"cell", std::string(to_string(r.cell))},
              {"methods", methods}};
  out["oracle"] = r.oracle ? to_json(*r.oracle) : json(nullptr);
  return out;
}

json to_json(const Witness& w) {
  return {{"spec", to_json(w.spec)}, {"cell", std::string(to_string(w.cell))},
          {"report", to_json(w.report)}};
}

Witness witness_from_json(const json& j) {
  Witness w;
  w.spec = spec_from_json(need(j, "spec", "witness"));
  w.cell = parse_cell(field<std::string>(j, "cell", "witness"));
  return w;
}

json to_json(const SearchResult& r) {
  json cells = json::object();
  for (const auto& [cell, list] : r.witnesses) {
    json arr = json::array();
    for (const auto& w : list) arr.push_back(to_json(w));
    cells[std::string(to_string(cell))] = arr;
  }
  json empty = json::array();
  for (auto c : r.empty_cells) empty.push_back(std::string(to_string(c)));
  return {{"seed", r.seed},
          {"budget", r.budget},
          {"evaluated", r.evaluated},
          {"generation_failures", r.generation_failures},
          {"witnesses", cells},
          {"empty_cells", empty}};
}

json to_json(const SemComparison& c) {
  json levels = json::array();
  for (const auto& l : c.levels) {
    levels.push_back({{"level", number(l.level)},
                      {"closed_form", number(l.closed_form)},
                      {"monte_carlo_mean", number(l.monte_carlo.mean)},
                      {"standard_error", number(l.monte_carlo.standard_error)},
                      {"draws", l.monte_carlo.draws},
                      {"z_score", number(l.z_score)},
                      {"within_three_se", l.within_three_se}});
  }
  return {{"sem", to_json(c.sem)}, {"levels", levels}, {"ace_closed_form", number(c.ace_closed_form)}};
}

std::string comparison_csv(const ComparisonReport& r) {
  std::ostringstream out;
  out << "structure,cell,method,ran,succeeded,max_deviation,latent_error,error\n";
  const std::string head = std::string(to_string(r.audit.structure)) + "," + std::string(to_string(r.cell));
  out << head << ",oracle," << (r.oracle ? "true" : "false") << "," << (r.oracle ? "true" : "false")
      << ",,,\n";
  for (const auto& m : r.methods) {
    std::string err = m.error;
    for (auto& ch : err) {
      if (ch == '"') ch = '\'';
    }
    out << head << "," << m.method << ",true," << (m.succeeded ? "true" : "false") << ","
        << (m.counterfactual ? csv_number(m.max_deviation) : "") << ","
        << (m.latent_error ? csv_number(*m.latent_error) : "") << ",\"" << err << "\"\n";
  }
  return out.str();
}

std::string search_csv(const SearchResult& r) {
  std::ostringstream out;
  out << "cell,structure,seed,cardinalities,collinear_outcome,bridge_pass,kruskal_pass,"
         "min_kruskal_margin,max_bridge_residual\n";
  for (const auto& [cell, list] : r.witnesses) {
    for (const auto& w : list) {
      std::string cards;
      for (const auto& [k, v] : w.spec.cardinalities) {
        cards += (cards.empty() ? "" : ";") + k + "=" + std::to_string(v);
      }
      long margin = 0;
      bool first = true;
      for (const auto& k : w.report.kruskal.per_treatment) {
        margin = first ? k.margin : std::min(margin, k.margin);
        first = false;
      }
      double residual = 0.0;
      for (double x : w.report.bridge.residual) residual = std::max(residual, x);
      out << to_string(cell) << "," << to_string(w.spec.structure) << "," << w.spec.seed << ","
          << cards << "," << (w.spec.constraints.collinear_outcome ? "true" : "false") << ","
          << (bridge_conditions_hold(w.report) ? "true" : "false") << ","
          << (kruskal_conditions_hold(w.report) ? "true" : "false") << ","
          << (first ? "" : std::to_string(margin)) << "," << csv_number(residual) << "\n";
    }
  }
  return out.str();
}

}  // namespace proxident::io
