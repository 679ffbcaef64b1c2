#include "cli.hpp"

#include <CLI11.hpp>

#include <filesystem>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "proxident/bridge.hpp"
#include "proxident/errors.hpp"
#include "proxident/harness.hpp"
#include "proxident/io.hpp"
#include "proxident/latent.hpp"
#include "proxident/linalg.hpp"
#include "proxident/models.hpp"
#include "proxident/oracle.hpp"
#include "proxident/sem.hpp"
#include "proxident/tensor.hpp"

#ifndef PROXIDENT_VERSION
#define PROXIDENT_VERSION "0.0.0"
#endif

namespace proxident::cli {
namespace {

using io::json;
namespace fs = std::filesystem;

struct Common {
  std::string out;
  std::string format = "json";
  std::uint64_t seed = 0;
};

void add_common(CLI::App* sub, Common& c, bool csv) {
  sub->add_option("--out", c.out, "Write the report here instead of stdout");
  sub->add_option("--seed", c.seed, "Seed for every random choice")->capture_default_str();
  if (csv) {
    sub->add_option("--format", c.format, "Report format")
        ->check(CLI::IsMember({"json", "csv"}))
        ->capture_default_str();
  }
}

json header(const std::string& command, const Common& c, const Tolerances& tol) {
  return {{"command", command}, {"seed", c.seed}, {"version", PROXIDENT_VERSION},
          {"tolerances", io::to_json(tol)}};
}

void emit(const Common& c, std::ostream& out, const std::string& text) {
  if (c.out.empty()) {
    out << text;
  } else {
    io::write_text(c.out, text);
  }
}

std::vector<double> parse_list(const std::string& text, const std::string& what) {
  std::vector<double> values;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      std::size_t used = 0;
      values.push_back(std::stod(item, &used));
      if (used != item.size()) throw std::invalid_argument(item);
    } catch (const std::exception&) {
      throw DomainError(what + ": '" + item + "' is not a number");
    }
  }
  if (values.empty()) throw DomainError(what + ": empty list");
  return values;
}

std::map<std::string, std::vector<std::size_t>> parse_grid(const std::string& text) {
  std::map<std::string, std::vector<std::size_t>> grid;
  std::stringstream ss(text);
  std::string entry;
  while (std::getline(ss, entry, ';')) {
    const auto eq = entry.find('=');
    if (eq == std::string::npos || eq == 0) throw DomainError("grid entry '" + entry + "' is not NAME=n,n,...");
    std::vector<std::size_t> choices;
    for (double v : parse_list(entry.substr(eq + 1), "grid " + entry.substr(0, eq))) {
      if (v < 1 || v != static_cast<double>(static_cast<std::size_t>(v))) {
        throw DomainError("grid cardinalities must be positive integers");
      }
      choices.push_back(static_cast<std::size_t>(v));
    }
    grid[entry.substr(0, eq)] = choices;
  }
  return grid;
}

struct LoadedModel {
  json document;
  FullLaw law;
  Structure structure;
};

LoadedModel load_model(const std::string& path, const std::string& structure_flag) {
  json doc = io::read_file(path);
  FullLaw law = io::law_from_json(doc);
  const Structure s = structure_flag.empty() ? io::model_structure(doc, law)
                                             : parse_structure(structure_flag);
  return {std::move(doc), std::move(law), s};
}

FullLaw observed_margin(const FullLaw& law) {
  const ProxyRoles roles;
  for (const auto& v : roles.observed()) {
    if (!law.has(v)) throw DomainError("model has no variable '" + v + "'");
  }
  return marginalize(law, roles.observed());
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Proxy-variable causal identification on discrete latent-variable models"};
  app.name("proxident");
  app.require_subcommand(1);
  app.set_version_flag("--version", PROXIDENT_VERSION);

  // generate
  Common gen_c;
  std::string gen_structure, gen_cards, gen_spec;
  Constraints gen_k;
  bool gen_no_optional = false;
  std::size_t gen_retries = 10000;
  auto* gen = app.add_subcommand("generate", "Sample a random full law for a structure");
  add_common(gen, gen_c, false);
  gen->add_option("--structure", gen_structure, "fig2, fig3, fig4, figA1 or figA3");
  gen->add_option("--cards", gen_cards, "Cardinalities, e.g. U=2,Z=2,W=2,Y=2,A=2");
  gen->add_option("--spec", gen_spec, "Model spec JSON (replaces --structure/--cards/flags)");
  gen->add_flag("--force-invertible", gen_k.force_invertible);
  gen->add_flag("--force-distinct-rows", gen_k.force_distinct_rows);
  gen->add_flag("--force-bridge-solvable", gen_k.force_bridge_solvable);
  gen->add_flag("--force-kruskal", gen_k.force_kruskal);
  gen->add_flag("--collinear-outcome", gen_k.collinear_outcome);
  gen->add_flag("--monotone-w-means", gen_k.monotone_w_means);
  gen->add_flag("--perfect-proxies", gen_k.perfect_proxies);
  gen->add_flag("--no-optional-edges", gen_no_optional);
  gen->add_option("--max-retries", gen_retries)->capture_default_str();

  // oracle
  Common ora_c;
  std::string ora_model, ora_structure, ora_confounders, ora_frontdoor, ora_values;
  auto* ora = app.add_subcommand("oracle", "Counterfactual law from the full (latent-visible) law");
  add_common(ora, ora_c, false);
  ora->add_option("--model", ora_model)->required();
  ora->add_option("--structure", ora_structure);
  ora->add_option("--confounders", ora_confounders, "Comma-separated adjustment set (default U)");
  ora->add_option("--frontdoor", ora_frontdoor, "Use the front-door formula through this mediator");
  ora->add_option("--outcome-values", ora_values, "Real value of each outcome state for the ACE");

  // identify
  Common id_c;
  std::string id_method, id_model;
  std::optional<double> id_tol;
  std::optional<std::size_t> id_rank;
  CpOptions id_cp;
  auto* ident = app.add_subcommand("identify", "Identify f_{Y(a)} from the observed margin");
  add_common(ident, id_c, false);
  ident->add_option("--method", id_method)
      ->required()
      ->check(CLI::IsMember({"bridge", "eigen", "cp", "mediator"}));
  ident->add_option("--model", id_model)->required();
  ident->add_option("--tol", id_tol, "Bridge solvability tolerance");
  ident->add_option("--rank", id_rank, "Latent cardinality (cp method)");
  ident->add_option("--restarts", id_cp.restarts)->capture_default_str();
  ident->add_option("--max-iterations", id_cp.max_iterations)->capture_default_str();

  // audit
  Common au_c;
  std::string au_model, au_structure;
  auto* aud = app.add_subcommand("audit", "Check every identifying assumption on a full law");
  add_common(aud, au_c, false);
  aud->add_option("--model", au_model)->required();
  aud->add_option("--structure", au_structure);

  // krank
  Common kr_c;
  std::string kr_matrix;
  std::optional<double> kr_tol;
  auto* kr = app.add_subcommand("krank", "Kruskal rank of a matrix");
  add_common(kr, kr_c, false);
  kr->add_option("--matrix", kr_matrix)->required();
  kr->add_option("--tol", kr_tol, "Relative singular-value threshold");

  // cp
  Common cp_c;
  std::string cp_tensor;
  std::size_t cp_rank = 0;
  CpOptions cp_opts;
  bool cp_no_algebraic = false;
  auto* cpc = app.add_subcommand("cp", "CP decomposition of a three-way array");
  add_common(cpc, cp_c, false);
  cpc->add_option("--tensor", cp_tensor)->required();
  cpc->add_option("--rank", cp_rank)->required()->check(CLI::PositiveNumber);
  cpc->add_option("--restarts", cp_opts.restarts)->capture_default_str();
  cpc->add_option("--max-iterations", cp_opts.max_iterations)->capture_default_str();
  cpc->add_option("--tolerance", cp_opts.tolerance)->capture_default_str();
  cpc->add_flag("--no-algebraic-start", cp_no_algebraic);

  // compare
  Common cmp_c;
  std::string cmp_model, cmp_structure;
  CpOptions cmp_cp;
  auto* cmp = app.add_subcommand("compare", "Audit, classify and run every applicable identifier");
  add_common(cmp, cmp_c, true);
  cmp->add_option("--model", cmp_model)->required();
  cmp->add_option("--structure", cmp_structure);
  cmp->add_option("--restarts", cmp_cp.restarts)->capture_default_str();

  // search
  Common se_c;
  std::size_t se_budget = 10000, se_jobs = 1, se_per_cell = 1;
  std::string se_grid, se_structure;
  double se_collinear = 0.3;
  auto* se = app.add_subcommand("search", "Random search for witnesses of every assumption cell");
  add_common(se, se_c, true);
  se->add_option("--budget", se_budget)->capture_default_str()->check(CLI::PositiveNumber);
  se->add_option("--jobs", se_jobs)->capture_default_str()->check(CLI::PositiveNumber);
  se->add_option("--per-cell", se_per_cell, "Witnesses kept per cell")
      ->capture_default_str()
      ->check(CLI::PositiveNumber);
  se->add_option("--grid", se_grid, "Cardinality choices, e.g. U=2,3;Z=1,2;W=2;Y=2,4;A=2");
  se->add_option("--structure", se_structure);
  se->add_option("--collinear-probability", se_collinear)->capture_default_str();

  // verify
  Common ve_c;
  std::string ve_witness;
  auto* ve = app.add_subcommand("verify", "Regenerate a search witness and re-audit it");
  add_common(ve, ve_c, false);
  ve->add_option("--witness", ve_witness)->required();

  // sem
  Common sem_c;
  std::string sem_file, sem_levels = "0,1";
  std::optional<std::uint64_t> sem_random;
  std::size_t sem_draws = 1000000;
  auto* semc = app.add_subcommand("sem", "Gaussian SEM: closed-form E[Y(a)] against Monte Carlo");
  add_common(semc, sem_c, false);
  semc->add_option("--sem", sem_file, "Flat JSON coefficient map");
  semc->add_option("--random", sem_random, "Draw coefficients from this seed instead");
  semc->add_option("--levels", sem_levels)->capture_default_str();
  semc->add_option("--draws", sem_draws)->capture_default_str()->check(CLI::PositiveNumber);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitInput;
  }

  try {
    const Tolerances tol = Tolerances::from_env();

    if (gen->parsed()) {
      ModelSpec spec;
      if (!gen_spec.empty()) {
        spec = io::spec_from_json(io::read_file(gen_spec));
        if (gen->count("--seed") > 0) spec.seed = gen_c.seed;
      } else {
        if (gen_structure.empty() || gen_cards.empty()) {
          throw DomainError("generate needs --structure and --cards (or --spec)");
        }
        spec.structure = parse_structure(gen_structure);
        spec.cardinalities = parse_cardinalities(gen_cards);
        spec.seed = gen_c.seed;
        spec.constraints = gen_k;
        spec.optional_edges = !gen_no_optional;
        spec.max_retries = gen_retries;
      }
      gen_c.seed = spec.seed;
      const FullLaw law = generate(spec, tol);
      json doc = io::to_json(law);
      doc["structure"] = std::string(to_string(spec.structure));
      doc["spec"] = io::to_json(spec);
      doc["run"] = header("generate", gen_c, tol);
      emit(gen_c, out, io::dump(doc));
      return kExitOk;
    }

    if (ora->parsed()) {
      const LoadedModel m = load_model(ora_model, ora_structure);
      json doc;
      CounterfactualLaw cf;
      if (!ora_frontdoor.empty()) {
        cf = frontdoor(m.law, ora_frontdoor);
        doc["method"] = "frontdoor";
        doc["mediator"] = ora_frontdoor;
      } else {
        std::vector<std::string> conf;
        if (ora_confounders.empty()) {
          conf = {"U"};
        } else {
          std::stringstream ss(ora_confounders);
          for (std::string v; std::getline(ss, v, ',');) conf.push_back(v);
        }
        cf = adjust(m.law, conf);
        doc["method"] = "adjust";
        doc["confounders"] = conf;
      }
      doc["counterfactual"] = io::to_json(cf);
      if (cf.treatment.cardinality() == 2) {
        std::vector<double> values;
        if (ora_values.empty()) {
          for (std::size_t y = 0; y < cf.outcome.cardinality(); ++y) values.push_back(static_cast<double>(y));
        } else {
          values = parse_list(ora_values, "--outcome-values");
        }
        if (values.size() != cf.outcome.cardinality()) {
          throw DomainError("--outcome-values needs one value per outcome state");
        }
        doc["ace"] = io::number(ace(cf, values));
        doc["outcome_values"] = values;
      } else {
        doc["ace"] = nullptr;
      }
      doc["run"] = header("oracle", ora_c, tol);
      emit(ora_c, out, io::dump(doc));
      return kExitOk;
    }

    if (ident->parsed()) {
      Tolerances t = tol;
      if (id_tol) t.bridge_residual = *id_tol;
      const LoadedModel m = load_model(id_model, "");
      const FullLaw observed = observed_margin(m.law);
      json doc;
      doc["method"] = id_method;
      if (id_method == "bridge") {
        const BridgeSolution sol = identify_bridge(observed, t);
        doc["counterfactual"] = io::to_json(sol.counterfactual);
        doc["bridge"] = io::to_json(sol);
        doc["bridge"].erase("counterfactual");
      } else if (id_method == "eigen") {
        EigenOptions opts;
        opts.seed = id_c.seed;
        const LatentRecovery rec = recover_eigen(observed, t, {}, opts);
        doc["counterfactual"] = io::to_json(adjust_recovered(rec, observed.domain("Y")));
        doc["latent"] = io::to_json(rec);
      } else if (id_method == "cp") {
        if (!id_rank) throw DomainError("identify --method cp needs --rank");
        id_cp.seed = id_c.seed;
        const ArrayIdentification res = identify_array(observed, ArrayMode::Cp, t, {}, id_rank, id_cp);
        doc["counterfactual"] = io::to_json(res.counterfactual);
        doc["latent"] = io::to_json(res.latent);
      } else {
        doc["counterfactual"] = io::to_json(identify_mediator_array(observed, t));
      }
      doc["run"] = header("identify", id_c, t);
      emit(id_c, out, io::dump(doc));
      return kExitOk;
    }

    if (aud->parsed()) {
      const LoadedModel m = load_model(au_model, au_structure);
      json doc;
      doc["report"] = io::to_json(audit(m.law, m.structure, tol));
      doc["run"] = header("audit", au_c, tol);
      emit(au_c, out, io::dump(doc));
      return kExitOk;
    }

    if (kr->parsed()) {
      const Eigen::MatrixXd mat = io::matrix_from_json(io::read_file(kr_matrix));
      const double t = kr_tol.value_or(tol.rank);
      json doc = {{"k_rank", k_rank(mat, t)},
                  {"rank", linalg::numerical_rank(mat, t)},
                  {"rows", mat.rows()},
                  {"cols", mat.cols()},
                  {"tol", t}};
      doc["run"] = header("krank", kr_c, tol);
      emit(kr_c, out, io::dump(doc));
      return kExitOk;
    }

    if (cpc->parsed()) {
      const ThreeWayArray t = io::tensor_from_json(io::read_file(cp_tensor));
      cp_opts.seed = cp_c.seed;
      cp_opts.algebraic_start = !cp_no_algebraic;
      const CpResult res = recover_cp(t, cp_rank, cp_opts);
      json doc = {{"result", io::to_json(res)},
                  {"kruskal", io::to_json(check_kruskal(res.factors, tol.rank))}};
      doc["run"] = header("cp", cp_c, tol);
      emit(cp_c, out, io::dump(doc));
      return kExitOk;
    }

    if (cmp->parsed()) {
      const LoadedModel m = load_model(cmp_model, cmp_structure);
      cmp_cp.seed = cmp_c.seed;
      const ComparisonReport rep = run_comparison(m.law, m.structure, tol, cmp_cp);
      if (cmp_c.format == "csv") {
        emit(cmp_c, out, io::comparison_csv(rep));
      } else {
        json doc;
        doc["report"] = io::to_json(rep);
        doc["run"] = header("compare", cmp_c, tol);
        emit(cmp_c, out, io::dump(doc));
      }
      return kExitOk;
    }

    if (se->parsed()) {
      CardinalityGrid grid = CardinalityGrid::defaults();
      if (!se_structure.empty()) grid.structure = parse_structure(se_structure);
      if (!se_grid.empty()) grid.choices = parse_grid(se_grid);
      if (!(se_collinear >= 0.0 && se_collinear <= 1.0)) {
        throw DomainError("--collinear-probability must lie in [0, 1]");
      }
      grid.collinear_probability = se_collinear;
      const SearchResult res = search_nonnested(se_budget, se_c.seed, grid, tol, se_jobs, se_per_cell);
      for (auto c : res.empty_cells) {
        err << "warning: no witness found for " << to_string(c) << " within budget " << se_budget << "\n";
      }
      const bool to_dir = !se_c.out.empty() && (se_c.out.back() == '/' || fs::is_directory(se_c.out));
      std::string body;
      if (se_c.format == "csv") {
        body = io::search_csv(res);
      } else {
        json doc;
        doc["result"] = io::to_json(res);
        doc["run"] = header("search", se_c, tol);
        body = io::dump(doc);
      }
      if (to_dir) {
        fs::create_directories(se_c.out);
        const fs::path dir(se_c.out);
        io::write_text((dir / (se_c.format == "csv" ? "search.csv" : "search.json")).string(), body);
        for (const auto& [cell, list] : res.witnesses) {
          for (std::size_t i = 0; i < list.size(); ++i) {
            json w = io::to_json(list[i]);
            w["run"] = header("search", se_c, tol);
            io::write_text((dir / (std::string(to_string(cell)) + "_" + std::to_string(i) + ".json")).string(),
                           io::dump(w));
          }
        }
      } else {
        emit(se_c, out, body);
      }
      return kExitOk;
    }

    if (ve->parsed()) {
      const Witness w = io::witness_from_json(io::read_file(ve_witness));
      const NestingCell got = reverify(w, tol);
      ve_c.seed = w.spec.seed;
      json doc = {{"expected", std::string(to_string(w.cell))},
                  {"observed", std::string(to_string(got))},
                  {"match", got == w.cell},
                  {"spec", io::to_json(w.spec)}};
      doc["run"] = header("verify", ve_c, tol);
      emit(ve_c, out, io::dump(doc));
      if (got != w.cell) {
        err << "error: witness re-audits to " << to_string(got) << ", expected " << to_string(w.cell) << "\n";
        return kExitIdentification;
      }
      return kExitOk;
    }

    if (semc->parsed()) {
      if (sem_file.empty() == !sem_random.has_value()) {
        throw DomainError("sem needs exactly one of --sem or --random");
      }
      const GaussianSem sem =
          sem_random ? GaussianSem::random(*sem_random) : io::sem_from_json(io::read_file(sem_file));
      const SemComparison res = compare_sem(sem, parse_list(sem_levels, "--levels"), sem_draws, sem_c.seed);
      json doc = io::to_json(res);
      doc["run"] = header("sem", sem_c, tol);
      emit(sem_c, out, io::dump(doc));
      return kExitOk;
    }
  } catch (const IdentificationError& e) {
    err << "error: " << e.what() << "\n";
    return kExitIdentification;
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return kExitInput;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitInput;
  }
  return kExitInput;
}

}  // namespace proxident::cli
