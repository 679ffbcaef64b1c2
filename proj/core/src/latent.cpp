#include "proxident/latent.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <numeric>
#include <sstream>

#include <Eigen/Eigenvalues>

#include "proxident/bridge.hpp"
#include "proxident/errors.hpp"
#include "proxident/linalg.hpp"
#include "proxident/rng.hpp"

namespace proxident {
namespace {

using Eigen::Index;
using Eigen::MatrixXd;
using Eigen::VectorXd;

Index idx(std::size_t i) { return static_cast<Index>(i); }

double min_pairwise_gap(const VectorXd& values) {
  double gap = std::numeric_limits<double>::infinity();
  for (Index i = 0; i < values.size(); ++i) {
    for (Index j = i + 1; j < values.size(); ++j) gap = std::min(gap, std::abs(values(i) - values(j)));
  }
  return gap;
}

struct Spectrum {
  VectorXd values;
  Eigen::MatrixXcd vectors;
  double gap = 0.0;
  double imaginary = 0.0;  ///< max |Im lambda| relative to the spectral radius
};

Spectrum spectrum(const MatrixXd& m) {
  Eigen::EigenSolver<MatrixXd> solver(m, true);
  if (solver.info() != Eigen::Success) throw NumericalError("eigendecomposition failed");
  Spectrum s;
  const Eigen::VectorXcd lambda = solver.eigenvalues();
  s.values = lambda.real();
  s.vectors = solver.eigenvectors();
  const double radius = lambda.cwiseAbs().maxCoeff();
  const double imag = lambda.imag().cwiseAbs().maxCoeff();
  s.imaginary = radius > 0.0 ? imag / radius : imag;
  s.gap = s.values.size() > 1 ? min_pairwise_gap(s.values) : std::numeric_limits<double>::infinity();
  return s;
}

// Zero entries in [-limit, 0); fail below -limit. Returns the mass zeroed.
double clip_negative(MatrixXd& m, double limit, const std::string& what) {
  double clipped = 0.0;
  for (Index c = 0; c < m.cols(); ++c) {
    for (Index r = 0; r < m.rows(); ++r) {
      if (m(r, c) < -limit) {
        std::ostringstream msg;
        msg << "recovered " << what << " has negative entry " << m(r, c);
        throw RecoveryError(msg.str());
      }
      if (m(r, c) < 0.0) {
        clipped -= m(r, c);
        m(r, c) = 0.0;
      }
    }
  }
  return clipped;
}

void normalize_columns(MatrixXd& m, const std::string& what) {
  for (Index c = 0; c < m.cols(); ++c) {
    const double s = m.col(c).sum();
    if (!(s > 0.0)) throw RecoveryError("recovered " + what + " has a column with no mass");
    m.col(c) /= s;
  }
}

// Joint f(row, col | context) as a matrix.
MatrixXd joint_matrix(const FullLaw& law, const std::string& row, const std::string& col,
                      const Assignment& context) {
  const FullLaw c = condition(law, {row, col}, context);
  const std::size_t ir = c.axis(row);
  const std::size_t ic = c.axis(col);
  MatrixXd out = MatrixXd::Zero(idx(c.domains()[ir].cardinality()), idx(c.domains()[ic].cardinality()));
  c.for_each([&](std::span<const std::size_t> i, double p) { out(idx(i[ir]), idx(i[ic])) += p; });
  return out;
}

// Factors of one treatment level before cross-level alignment.
struct LevelFactors {
  MatrixXd p_w_given_u;
  MatrixXd p_z_given_u;
  MatrixXd p_y_given_u;
  VectorXd f_u_given_a;
  double clipped = 0.0;
};

// Given P_{W|U} at level a, solve for the remaining factors.
LevelFactors complete_level(const FullLaw& observed, std::size_t a, MatrixXd p_w_given_u,
                            const Tolerances& tol, const ProxyRoles& roles) {
  const Assignment context{{roles.treatment, a}};
  LevelFactors out;
  out.clipped += clip_negative(p_w_given_u, tol.negative_recovery, "P(W|latent)");
  normalize_columns(p_w_given_u, "P(W|latent)");
  const Eigen::FullPivLU<MatrixXd> lu(p_w_given_u);
  if (!lu.isInvertible()) throw NonIdentifiableError("recovered P(W|latent) is singular");

  // f(u, y | a) = P_{W|U}^{-1} f(w, y | a)
  MatrixXd f_uy = lu.solve(joint_matrix(observed, roles.w, roles.outcome, context));
  out.clipped += clip_negative(f_uy, tol.negative_recovery, "f(latent, Y | A)");
  out.f_u_given_a = f_uy.rowwise().sum();
  if ((out.f_u_given_a.array() <= 0.0).any()) {
    throw RecoveryError("a recovered latent state has zero mass at " + roles.treatment + "=" +
                        std::to_string(a));
  }
  out.f_u_given_a /= out.f_u_given_a.sum();
  out.p_y_given_u = f_uy.transpose();
  normalize_columns(out.p_y_given_u, "P(Y|latent,A)");

  // f(u, z | a) = P_{W|U}^{-1} f(w, z | a)
  MatrixXd f_uz = lu.solve(joint_matrix(observed, roles.w, roles.z, context));
  out.clipped += clip_negative(f_uz, tol.negative_recovery, "f(latent, Z | A)");
  out.p_z_given_u = f_uz.transpose();
  normalize_columns(out.p_z_given_u, "P(Z|latent,A)");
  out.p_w_given_u = std::move(p_w_given_u);
  return out;
}

// Align each level to level 0 through P_{W|U}, then assemble the recovery.
LatentRecovery assemble(const FullLaw& observed, std::vector<LevelFactors> levels,
                        const std::string& latent_name, const ProxyRoles& roles,
                        RecoveryDiagnostics diagnostics) {
  const auto& treatment = observed.domain(roles.treatment);
  const auto r = static_cast<std::size_t>(levels.front().p_w_given_u.cols());
  LatentRecovery rec;
  rec.latent = CategoricalDomain::indexed(latent_name, r);
  rec.treatment = treatment;
  const VectorXd f_a = marginal_vector(observed, roles.treatment);
  rec.f_u = VectorXd::Zero(idx(r));
  diagnostics.alignment_cost.assign(levels.size(), 0.0);
  for (std::size_t a = 0; a < levels.size(); ++a) {
    LevelFactors& lv = levels[a];
    if (a > 0) {
      const MatrixXd cost = linalg::column_tv_cost(levels[0].p_w_given_u, lv.p_w_given_u);
      const auto perm = linalg::min_cost_assignment(cost);
      double total = 0.0;
      for (std::size_t i = 0; i < perm.size(); ++i) total += cost(idx(i), idx(perm[i]));
      diagnostics.alignment_cost[a] = total;
      lv.p_w_given_u = linalg::permute_columns(lv.p_w_given_u, perm);
      lv.p_z_given_u = linalg::permute_columns(lv.p_z_given_u, perm);
      lv.p_y_given_u = linalg::permute_columns(lv.p_y_given_u, perm);
      lv.f_u_given_a = linalg::permute(lv.f_u_given_a, perm);
    }
    const Assignment context{{roles.treatment, a}};
    rec.p_z_given_ua.push_back({observed.domain(roles.z), rec.latent, lv.p_z_given_u, context});
    rec.p_y_given_ua.push_back({observed.domain(roles.outcome), rec.latent, lv.p_y_given_u, context});
    rec.f_u_given_a.push_back(lv.f_u_given_a);
    rec.f_u += f_a(idx(a)) * lv.f_u_given_a;
  }
  rec.f_u /= rec.f_u.sum();
  rec.p_w_given_u = {observed.domain(roles.w), rec.latent, levels[0].p_w_given_u, {}};
  rec.diagnostics = std::move(diagnostics);
  return rec;
}

void require_positive_levels(const FullLaw& observed, const ProxyRoles& roles) {
  const VectorXd f_a = marginal_vector(observed, roles.treatment);
  for (Index a = 0; a < f_a.size(); ++a) {
    if (!(f_a(a) > 0.0)) {
      const Assignment event{{roles.treatment, static_cast<std::size_t>(a)}};
      throw ConditioningError(describe(event), "treatment level {" + describe(event) +
                                                   "} has zero probability");
    }
  }
}

}  // namespace

LatentRecovery recover_eigen(const FullLaw& observed, const Tolerances& tol,
                             const ProxyRoles& roles, const EigenOptions& options) {
  require_observed_only(observed, roles);
  require_positive_levels(observed, roles);
  const std::size_t nw = observed.cardinality(roles.w);
  const std::size_t nz = observed.cardinality(roles.z);
  if (nw != nz) {
    throw DomainError("eigen recovery needs |" + roles.w + "| = |" + roles.z + "| (got " +
                      std::to_string(nw) + " and " + std::to_string(nz) +
                      "); use the cp method for rectangular proxies");
  }
  const std::size_t na = observed.cardinality(roles.treatment);
  const std::size_t ny = observed.cardinality(roles.outcome);

  RecoveryDiagnostics diag;
  std::vector<LevelFactors> levels;
  for (std::size_t a = 0; a < na; ++a) {
    const Assignment context{{roles.treatment, a}};
    const MatrixXd p_wz = cond_matrix(observed, roles.w, roles.z, context).entries;
    const double cond = linalg::condition_number(p_wz);
    diag.condition_number.push_back(cond);
    if (linalg::numerical_rank(p_wz, tol.rank) < nw) {
      throw NonIdentifiableError("P(" + roles.w + "|" + roles.z + "," + roles.treatment + "=" +
                                 observed.domain(roles.treatment).labels[a] + ") is singular");
    }
    const Eigen::PartialPivLU<MatrixXd> lu_t(p_wz.transpose());
    const MatrixXd f_wz = joint_matrix(observed, roles.w, roles.z, context);
    const VectorXd f_z = f_wz.colwise().sum().transpose();

    // M_y = P_{y,W|Z,a} P_{W|Z,a}^{-1}
    std::vector<MatrixXd> slices;
    for (std::size_t y = 0; y < ny; ++y) {
      Assignment cy = context;
      cy[roles.outcome] = y;
      MatrixXd p_ywz = MatrixXd::Zero(idx(nw), idx(nz));
      if (observed.mass(cy) > 0.0) {
        const MatrixXd f_ywz = joint_matrix(observed, roles.w, roles.z, cy) *
                               (observed.mass(cy) / observed.mass(context));
        for (Index z = 0; z < p_ywz.cols(); ++z) p_ywz.col(z) = f_ywz.col(z) / f_z(z);
      }
      slices.push_back(lu_t.solve(p_ywz.transpose()).transpose());
    }

    long chosen = -1;
    Spectrum best;
    best.gap = -1.0;
    for (std::size_t y = 0; y < ny; ++y) {
      Spectrum s = spectrum(slices[y]);
      if (s.gap > best.gap) {
        best = std::move(s);
        chosen = static_cast<long>(y);
      }
    }
    if (best.gap < tol.eigen_gap) {
      CounterRng rng(CounterRng::derive(options.seed, a));
      chosen = -1;
      for (std::size_t attempt = 0; attempt < options.combination_retries; ++attempt) {
        MatrixXd mix = MatrixXd::Zero(idx(nw), idx(nw));
        for (const auto& m : slices) mix += rng.uniform(0.0, 1.0) * m;
        Spectrum s = spectrum(mix);
        if (s.gap >= tol.eigen_gap) {
          best = std::move(s);
          break;
        }
      }
      if (best.gap < tol.eigen_gap) {
        std::ostringstream msg;
        msg << "eigenvalues not separated at " << roles.treatment << "="
            << observed.domain(roles.treatment).labels[a] << " (best gap " << best.gap
            << "): no outcome row of P(Y|latent,A) has distinct entries";
        throw NonIdentifiableError(msg.str(), best.gap);
      }
    }
    if (best.imaginary > tol.imaginary) {
      std::ostringstream msg;
      msg << "complex eigenvalues (relative imaginary part " << best.imaginary << ")";
      throw NumericalError(msg.str(), best.imaginary);
    }
    diag.max_imaginary = std::max(diag.max_imaginary, best.imaginary);
    diag.eigen_gap.push_back(best.gap);
    diag.chosen_slice.push_back(chosen);

    MatrixXd p_wu(idx(nw), idx(nw));
    for (Index c = 0; c < best.vectors.cols(); ++c) {
      const std::complex<double> s = best.vectors.col(c).sum();
      if (std::abs(s) < 1e-9) {
        throw NumericalError("eigenvector with near-zero entry sum cannot be normalized");
      }
      p_wu.col(c) = (best.vectors.col(c) / s).real();
    }
    LevelFactors lv = complete_level(observed, a, std::move(p_wu), tol, roles);
    diag.clipped_mass.push_back(lv.clipped);
    levels.push_back(std::move(lv));
  }
  return assemble(observed, std::move(levels), options.latent_name, roles, std::move(diag));
}

LatentRecovery recover_latent_cp(const FullLaw& observed, std::size_t rank, const Tolerances& tol,
                                 const ProxyRoles& roles, const CpOptions& cp,
                                 const std::string& latent_name) {
  require_observed_only(observed, roles);
  require_positive_levels(observed, roles);
  if (rank == 0) throw DomainError("CP rank must be at least 1");
  const std::size_t na = observed.cardinality(roles.treatment);
  RecoveryDiagnostics diag;
  std::vector<LevelFactors> levels;
  for (std::size_t a = 0; a < na; ++a) {
    const ThreeWayArray t = build_slices(observed, a, roles);
    CpOptions opts = cp;
    opts.seed = CounterRng::derive(cp.seed, a);
    const CpResult fit = recover_cp(t, rank, opts);
    diag.fit.push_back(fit.fit);
    if (fit.fit > tol.cp_fit) {
      std::ostringstream msg;
      msg << "rank-" << rank << " CP fit at " << roles.treatment << "="
          << observed.domain(roles.treatment).labels[a] << " has relative error " << fit.fit;
      throw RecoveryError(msg.str(), fit.fit);
    }
    // Columns of A and C become distributions; B carries f(z, u | a).
    MatrixXd fa = fit.factors.a;
    MatrixXd fb = fit.factors.b;
    MatrixXd fc = fit.factors.c;
    for (Index r = 0; r < fa.cols(); ++r) {
      const double sa = fa.col(r).sum();
      const double sc = fc.col(r).sum();
      if (std::abs(sa) < 1e-12 || std::abs(sc) < 1e-12) {
        throw RecoveryError("CP component with zero column sum cannot be normalized");
      }
      fa.col(r) /= sa;
      fc.col(r) /= sc;
      fb.col(r) *= sa * sc;
    }
    LevelFactors lv;
    lv.clipped += clip_negative(fa, tol.negative_recovery, "P(W|latent)");
    lv.clipped += clip_negative(fb, tol.negative_recovery, "f(Z, latent | A)");
    lv.clipped += clip_negative(fc, tol.negative_recovery, "P(Y|latent,A)");
    normalize_columns(fa, "P(W|latent)");
    normalize_columns(fc, "P(Y|latent,A)");
    lv.f_u_given_a = fb.colwise().sum().transpose();
    if ((lv.f_u_given_a.array() <= 0.0).any()) {
      throw RecoveryError("a recovered latent state has zero mass");
    }
    lv.f_u_given_a /= lv.f_u_given_a.sum();
    normalize_columns(fb, "P(Z|latent,A)");
    lv.p_w_given_u = std::move(fa);
    lv.p_z_given_u = std::move(fb);
    lv.p_y_given_u = std::move(fc);
    diag.clipped_mass.push_back(lv.clipped);
    levels.push_back(std::move(lv));
  }
  return assemble(observed, std::move(levels), latent_name, roles, std::move(diag));
}

CounterfactualLaw adjust_recovered(const LatentRecovery& rec, const CategoricalDomain& outcome) {
  CounterfactualLaw cf;
  cf.treatment = rec.treatment;
  cf.outcome = outcome;
  cf.table.resize(idx(outcome.cardinality()), idx(rec.treatment.cardinality()));
  for (std::size_t a = 0; a < rec.p_y_given_ua.size(); ++a) {
    VectorXd col = rec.p_y_given_ua[a].entries * rec.f_u;
    col /= col.sum();
    cf.table.col(idx(a)) = col;
  }
  return cf;
}

ArrayIdentification identify_array(const FullLaw& observed, ArrayMode mode, const Tolerances& tol,
                                   const ProxyRoles& roles, std::optional<std::size_t> rank,
                                   const CpOptions& cp) {
  ArrayIdentification out;
  if (mode == ArrayMode::Eigen) {
    out.latent = recover_eigen(observed, tol, roles);
  } else {
    if (!rank) throw DomainError("cp mode needs the latent rank");
    out.latent = recover_latent_cp(observed, *rank, tol, roles, cp);
  }
  out.counterfactual = adjust_recovered(out.latent, observed.domain(roles.outcome));
  return out;
}

CounterfactualLaw identify_mediator_array(const FullLaw& observed, const Tolerances& tol,
                                          const ProxyRoles& roles) {
  EigenOptions options;
  options.latent_name = "M";
  const LatentRecovery rec = recover_eigen(observed, tol, roles, options);
  const VectorXd f_a = marginal_vector(observed, roles.treatment);
  const auto na = static_cast<std::size_t>(f_a.size());
  CounterfactualLaw cf;
  cf.treatment = rec.treatment;
  cf.outcome = observed.domain(roles.outcome);
  cf.table = MatrixXd::Zero(idx(cf.outcome.cardinality()), idx(na));
  // f_{Y(a)}(y) = sum_{a', i} f(y | m_i, a') f(m_i | a) f(a')
  for (std::size_t a = 0; a < na; ++a) {
    for (std::size_t ap = 0; ap < na; ++ap) {
      cf.table.col(idx(a)) += f_a(idx(ap)) * (rec.p_y_given_ua[ap].entries * rec.f_u_given_a[a]);
    }
    cf.table.col(idx(a)) /= cf.table.col(idx(a)).sum();
  }
  return cf;
}

LatentRecovery true_latent_factors(const FullLaw& law, const std::string& latent,
                                   const ProxyRoles& roles) {
  LatentRecovery rec;
  rec.latent = law.domain(latent);
  rec.treatment = law.domain(roles.treatment);
  rec.p_w_given_u = cond_matrix(law, roles.w, latent);
  rec.f_u = marginal_vector(law, latent);
  for (std::size_t a = 0; a < rec.treatment.cardinality(); ++a) {
    const Assignment context{{roles.treatment, a}};
    rec.p_z_given_ua.push_back(cond_matrix(law, roles.z, latent, context));
    rec.p_y_given_ua.push_back(cond_matrix(law, roles.outcome, latent, context));
    const FullLaw c = condition(law, {latent}, context);
    VectorXd f(idx(rec.latent.cardinality()));
    for (std::size_t u = 0; u < rec.latent.cardinality(); ++u) f(idx(u)) = c.probabilities()[u];
    rec.f_u_given_a.push_back(f);
  }
  return rec;
}

namespace {

double max_error_under(const LatentRecovery& rec, const LatentRecovery& truth,
                       const std::vector<std::size_t>& perm) {
  double err = (truth.p_w_given_u.entries - linalg::permute_columns(rec.p_w_given_u.entries, perm))
                   .cwiseAbs()
                   .maxCoeff();
  err = std::max(err, (truth.f_u - linalg::permute(rec.f_u, perm)).cwiseAbs().maxCoeff());
  for (std::size_t a = 0; a < truth.p_y_given_ua.size(); ++a) {
    err = std::max(err, (truth.p_y_given_ua[a].entries -
                         linalg::permute_columns(rec.p_y_given_ua[a].entries, perm))
                            .cwiseAbs()
                            .maxCoeff());
  }
  return err;
}

}  // namespace

LatentComparison compare_latent(const LatentRecovery& recovered, const LatentRecovery& truth) {
  const std::size_t r = truth.latent.cardinality();
  if (recovered.latent.cardinality() != r ||
      recovered.p_w_given_u.entries.rows() != truth.p_w_given_u.entries.rows() ||
      recovered.p_y_given_ua.size() != truth.p_y_given_ua.size()) {
    throw DomainError("latent recoveries have different shapes");
  }
  LatentComparison out;
  if (r <= 8) {
    std::vector<std::size_t> perm(r);
    std::iota(perm.begin(), perm.end(), 0);
    out.max_error = std::numeric_limits<double>::infinity();
    do {
      const double err = max_error_under(recovered, truth, perm);
      if (err < out.max_error) {
        out.max_error = err;
        out.permutation = perm;
      }
    } while (std::next_permutation(perm.begin(), perm.end()));
  } else {
    out.permutation = linalg::min_cost_assignment(
        linalg::column_tv_cost(truth.p_w_given_u.entries, recovered.p_w_given_u.entries));
    out.max_error = max_error_under(recovered, truth, out.permutation);
  }
  return out;
}

}  // namespace proxident
