#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <optional>
#include <sstream>

#include <Eigen/Eigenvalues>

#include "proxident/errors.hpp"
#include "proxident/rng.hpp"
#include "proxident/tensor.hpp"

namespace proxident {
namespace {

using Eigen::Index;
using Eigen::MatrixXd;

struct Dims {
  Index m, n, j;
};

// Matricized-tensor times Khatri-Rao product for each of the three modes.
MatrixXd mttkrp(const ThreeWayArray& t, const Dims& d, const MatrixXd& f1, const MatrixXd& f2,
                int mode) {
  const Index r = f1.cols();
  MatrixXd out = MatrixXd::Zero(mode == 0 ? d.m : mode == 1 ? d.n : d.j, r);
  for (Index i = 0; i < d.m; ++i) {
    for (Index j = 0; j < d.n; ++j) {
      for (Index k = 0; k < d.j; ++k) {
        const double x = t(static_cast<std::size_t>(i), static_cast<std::size_t>(j),
                           static_cast<std::size_t>(k));
        if (x == 0.0) continue;
        switch (mode) {
          case 0: out.row(i) += x * f1.row(j).cwiseProduct(f2.row(k)); break;
          case 1: out.row(j) += x * f1.row(i).cwiseProduct(f2.row(k)); break;
          default: out.row(k) += x * f1.row(i).cwiseProduct(f2.row(j)); break;
        }
      }
    }
  }
  return out;
}

MatrixXd solve_gram(const MatrixXd& rhs, const MatrixXd& gram) {
  const Eigen::CompleteOrthogonalDecomposition<MatrixXd> cod(gram);
  return cod.solve(rhs.transpose()).transpose();
}

double relative_error(const ThreeWayArray& t, const Dims& d, const CpFactors& f, double norm) {
  double s = 0.0;
  for (Index i = 0; i < d.m; ++i) {
    for (Index j = 0; j < d.n; ++j) {
      const Eigen::RowVectorXd ab = f.a.row(i).cwiseProduct(f.b.row(j));
      for (Index k = 0; k < d.j; ++k) {
        const double diff = t(static_cast<std::size_t>(i), static_cast<std::size_t>(j),
                              static_cast<std::size_t>(k)) -
                            ab.dot(f.c.row(k));
        s += diff * diff;
      }
    }
  }
  return norm > 0.0 ? std::sqrt(s) / norm : std::sqrt(s);
}

// Unit 2-norm columns with nonnegative sums for A and B, scale and sign
// moved into C.
void normalize(CpFactors& f) {
  for (Index r = 0; r < f.a.cols(); ++r) {
    double na = f.a.col(r).norm();
    double nb = f.b.col(r).norm();
    if (f.a.col(r).sum() < 0.0) na = -na;
    if (f.b.col(r).sum() < 0.0) nb = -nb;
    if (na != 0.0) f.a.col(r) /= na;
    if (nb != 0.0) f.b.col(r) /= nb;
    f.c.col(r) *= na * nb;
  }
}

// Fill out(i, j, k) += sum_r x(i, r) y(j, r) z(k, r).
void add_model(Eigen::VectorXd& out, const Dims& d, const MatrixXd& x, const MatrixXd& y,
               const MatrixXd& z, double sign) {
  Index p = 0;
  for (Index i = 0; i < d.m; ++i) {
    for (Index j = 0; j < d.n; ++j) {
      const Eigen::RowVectorXd xy = x.row(i).cwiseProduct(y.row(j));
      for (Index k = 0; k < d.j; ++k) out(p++) += sign * xy.dot(z.row(k));
    }
  }
}

// Exact line search along current + s (current - previous): the squared
// residual is a degree-6 polynomial in s; return its global minimizer.
double best_step(const ThreeWayArray& t, const Dims& d, const CpFactors& previous,
                 const CpFactors& current) {
  const MatrixXd da = current.a - previous.a;
  const MatrixXd db = current.b - previous.b;
  const MatrixXd dc = current.c - previous.c;
  const Index size = d.m * d.n * d.j;
  std::array<Eigen::VectorXd, 4> g;
  for (auto& v : g) v = Eigen::VectorXd::Zero(size);
  for (Index p = 0; p < size; ++p) g[0](p) = t.entries()[static_cast<std::size_t>(p)];
  const MatrixXd& a = current.a;
  const MatrixXd& b = current.b;
  const MatrixXd& c = current.c;
  add_model(g[0], d, a, b, c, -1.0);
  add_model(g[1], d, da, b, c, -1.0);
  add_model(g[1], d, a, db, c, -1.0);
  add_model(g[1], d, a, b, dc, -1.0);
  add_model(g[2], d, da, db, c, -1.0);
  add_model(g[2], d, da, b, dc, -1.0);
  add_model(g[2], d, a, db, dc, -1.0);
  add_model(g[3], d, da, db, dc, -1.0);
  std::array<double, 7> poly{};
  for (int k = 0; k < 4; ++k) {
    for (int l = 0; l < 4; ++l) poly[static_cast<std::size_t>(k + l)] += g[k].dot(g[l]);
  }
  auto value = [&](double s) {
    double v = 0.0;
    for (std::size_t p = poly.size(); p-- > 0;) v = v * s + poly[p];
    return v;
  };
  // Real roots of the derivative via its companion matrix.
  std::array<double, 6> deriv{};
  for (std::size_t p = 1; p < poly.size(); ++p) deriv[p - 1] = static_cast<double>(p) * poly[p];
  double best_s = 0.0;
  double best_v = value(0.0);
  if (std::abs(deriv[5]) > 0.0) {
    MatrixXd companion = MatrixXd::Zero(5, 5);
    for (Index i = 1; i < 5; ++i) companion(i, i - 1) = 1.0;
    for (Index i = 0; i < 5; ++i) companion(i, 4) = -deriv[static_cast<std::size_t>(i)] / deriv[5];
    const Eigen::VectorXcd roots = companion.eigenvalues();
    for (Index i = 0; i < roots.size(); ++i) {
      if (std::abs(roots(i).imag()) > 1e-8 * std::max(1.0, std::abs(roots(i)))) continue;
      const double s = roots(i).real();
      if (const double v = value(s); std::isfinite(v) && v < best_v) {
        best_v = v;
        best_s = s;
      }
    }
  }
  return best_s;
}

CpFactors step_along(const CpFactors& previous, const CpFactors& current, double s) {
  CpFactors out;
  out.a = current.a + s * (current.a - previous.a);
  out.b = current.b + s * (current.b - previous.b);
  out.c = current.c + s * (current.c - previous.c);
  normalize(out);
  return out;
}

// Damped Gauss-Newton (Levenberg-Marquardt) on all factors jointly; ALS
// converges linearly near degenerate solutions, this converges quadratically.
// Returns the number of iterations used; sets `converged` on a fit change
// below `tol`.
std::size_t refine(const ThreeWayArray& t, const Dims& d, CpFactors& f, double norm,
                   std::size_t budget, double tol, double& fit, bool& converged) {
  const Index r = f.a.cols();
  const Index np = r * (d.m + d.n + d.j);
  const Index size = d.m * d.n * d.j;
  auto residual = [&](const CpFactors& g) {
    Eigen::VectorXd res(size);
    for (Index p = 0; p < size; ++p) res(p) = t.entries()[static_cast<std::size_t>(p)];
    add_model(res, d, g.a, g.b, g.c, -1.0);
    return res;
  };
  Eigen::VectorXd res = residual(f);
  double cost = res.squaredNorm();
  double lambda = 1e-3;
  converged = false;
  std::size_t used = 0;
  for (; used < budget && !converged; ++used) {
    MatrixXd jac = MatrixXd::Zero(size, np);
    Index p = 0;
    for (Index i = 0; i < d.m; ++i) {
      for (Index j = 0; j < d.n; ++j) {
        for (Index k = 0; k < d.j; ++k, ++p) {
          for (Index c = 0; c < r; ++c) {
            jac(p, c * d.m + i) = f.b(j, c) * f.c(k, c);
            jac(p, r * d.m + c * d.n + j) = f.a(i, c) * f.c(k, c);
            jac(p, r * (d.m + d.n) + c * d.j + k) = f.a(i, c) * f.b(j, c);
          }
        }
      }
    }
    const MatrixXd jtj = jac.transpose() * jac;
    const Eigen::VectorXd jtr = jac.transpose() * res;
    const double scale = std::max(jtj.diagonal().maxCoeff(), 1e-300);
    bool improved = false;
    for (int tries = 0; tries < 30 && !improved; ++tries) {
      MatrixXd damped = jtj;
      damped.diagonal().array() += lambda * scale;
      const Eigen::VectorXd step = damped.ldlt().solve(jtr);
      CpFactors trial = f;
      trial.a += Eigen::Map<const MatrixXd>(step.data(), d.m, r);
      trial.b += Eigen::Map<const MatrixXd>(step.data() + r * d.m, d.n, r);
      trial.c += Eigen::Map<const MatrixXd>(step.data() + r * (d.m + d.n), d.j, r);
      normalize(trial);
      Eigen::VectorXd trial_res = residual(trial);
      const double trial_cost = trial_res.squaredNorm();
      if (std::isfinite(trial_cost) && trial_cost < cost) {
        const double new_fit = norm > 0.0 ? std::sqrt(trial_cost) / norm : std::sqrt(trial_cost);
        converged = std::abs(fit - new_fit) < tol;
        f = std::move(trial);
        res = std::move(trial_res);
        cost = trial_cost;
        fit = new_fit;
        lambda = std::max(lambda / 3.0, 1e-15);
        improved = true;
      } else {
        lambda *= 4.0;
      }
    }
    // No descent direction left: the fit is stationary.
    if (!improved) converged = true;
  }
  return used;
}

MatrixXd random_nonnegative(CounterRng& rng, Index rows, Index cols) {
  MatrixXd m(rows, cols);
  for (Index c = 0; c < cols; ++c) {
    for (Index r = 0; r < rows; ++r) m(r, c) = rng.uniform();
  }
  return m;
}

struct RestartOutcome {
  CpFactors factors;
  double fit = std::numeric_limits<double>::infinity();
  std::size_t iterations = 0;
  bool converged = false;
};

CpFactors random_start(const Dims& d, std::size_t rank, std::uint64_t key) {
  CounterRng rng(key);
  const auto r = static_cast<Index>(rank);
  CpFactors f;
  f.a = random_nonnegative(rng, d.m, r);
  f.b = random_nonnegative(rng, d.n, r);
  f.c = random_nonnegative(rng, d.j, r);
  return f;
}

// Entry of t with its modes listed in the order `perm`.
double permuted(const ThreeWayArray& t, const std::array<int, 3>& perm, Index x, Index y, Index z) {
  std::array<std::size_t, 3> i{};
  i[static_cast<std::size_t>(perm[0])] = static_cast<std::size_t>(x);
  i[static_cast<std::size_t>(perm[1])] = static_cast<std::size_t>(y);
  i[static_cast<std::size_t>(perm[2])] = static_cast<std::size_t>(z);
  return t(i[0], i[1], i[2]);
}

// Algebraic start from a generalized eigendecomposition of two random
// mixtures of slices. Needs two modes with at least `rank` categories.
std::optional<CpFactors> algebraic_start(const ThreeWayArray& t, const Dims& d, std::size_t rank,
                                         std::uint64_t key) {
  const auto r = static_cast<Index>(rank);
  const std::array<Index, 3> dims{d.m, d.n, d.j};
  std::array<int, 3> perm{};
  bool found = false;
  for (int p = 0; p < 3 && !found; ++p) {
    for (int q = p + 1; q < 3 && !found; ++q) {
      if (dims[static_cast<std::size_t>(p)] >= r && dims[static_cast<std::size_t>(q)] >= r) {
        perm = {p, q, 3 - p - q};
        found = true;
      }
    }
  }
  if (!found) return std::nullopt;
  const Index dp = dims[static_cast<std::size_t>(perm[0])];
  const Index dq = dims[static_cast<std::size_t>(perm[1])];
  const Index ds = dims[static_cast<std::size_t>(perm[2])];

  MatrixXd unfold_p(dp, dq * ds), unfold_q(dq, dp * ds);
  for (Index x = 0; x < dp; ++x) {
    for (Index y = 0; y < dq; ++y) {
      for (Index z = 0; z < ds; ++z) {
        const double v = permuted(t, perm, x, y, z);
        unfold_p(x, y * ds + z) = v;
        unfold_q(y, x * ds + z) = v;
      }
    }
  }
  const Eigen::JacobiSVD<MatrixXd> svd_p(unfold_p, Eigen::ComputeThinU);
  const Eigen::JacobiSVD<MatrixXd> svd_q(unfold_q, Eigen::ComputeThinU);
  const MatrixXd u = svd_p.matrixU().leftCols(r);
  const MatrixXd v = svd_q.matrixU().leftCols(r);

  CounterRng rng(key);
  MatrixXd s1 = MatrixXd::Zero(dp, dq), s2 = MatrixXd::Zero(dp, dq);
  for (Index z = 0; z < ds; ++z) {
    const double w1 = rng.normal();
    const double w2 = rng.normal();
    for (Index x = 0; x < dp; ++x) {
      for (Index y = 0; y < dq; ++y) {
        const double val = permuted(t, perm, x, y, z);
        s1(x, y) += w1 * val;
        s2(x, y) += w2 * val;
      }
    }
  }
  const MatrixXd c1 = u.transpose() * s1 * v;
  const MatrixXd c2 = u.transpose() * s2 * v;
  const Eigen::FullPivLU<MatrixXd> lu2(c2);
  if (!lu2.isInvertible()) return std::nullopt;
  Eigen::EigenSolver<MatrixXd> eig(c1 * lu2.inverse(), true);
  if (eig.info() != Eigen::Success) return std::nullopt;
  const MatrixXd e = eig.eigenvectors().real();
  const Eigen::FullPivLU<MatrixXd> lue(e);
  if (!lue.isInvertible()) return std::nullopt;

  std::array<MatrixXd, 3> factors;
  factors[static_cast<std::size_t>(perm[0])] = u * e;
  factors[static_cast<std::size_t>(perm[1])] = v * lue.solve(c1).transpose();
  CpFactors f;
  f.a = factors[0];
  f.b = factors[1];
  f.c = factors[2];
  // The remaining mode by one least-squares update.
  switch (perm[2]) {
    case 0:
      f.a = solve_gram(mttkrp(t, d, f.b, f.c, 0),
                       (f.b.transpose() * f.b).cwiseProduct(f.c.transpose() * f.c));
      break;
    case 1:
      f.b = solve_gram(mttkrp(t, d, f.a, f.c, 1),
                       (f.a.transpose() * f.a).cwiseProduct(f.c.transpose() * f.c));
      break;
    default:
      f.c = solve_gram(mttkrp(t, d, f.a, f.b, 2),
                       (f.a.transpose() * f.a).cwiseProduct(f.b.transpose() * f.b));
      break;
  }
  normalize(f);
  if (!f.a.allFinite() || !f.b.allFinite() || !f.c.allFinite()) return std::nullopt;
  return f;
}

RestartOutcome run_restart(const ThreeWayArray& t, const Dims& d, const CpOptions& options,
                           CpFactors start, double norm) {
  RestartOutcome out;
  CpFactors& f = out.factors;
  f = std::move(start);
  double previous = std::numeric_limits<double>::infinity();
  CpFactors last;
  // ALS gets at most half the iteration budget; refinement takes the rest.
  const std::size_t als_budget = std::max<std::size_t>(1, options.max_iterations / 2);
  for (std::size_t it = 1; it <= als_budget; ++it) {
    last = f;
    f.a = solve_gram(mttkrp(t, d, f.b, f.c, 0),
                     (f.b.transpose() * f.b).cwiseProduct(f.c.transpose() * f.c));
    f.b = solve_gram(mttkrp(t, d, f.a, f.c, 1),
                     (f.a.transpose() * f.a).cwiseProduct(f.c.transpose() * f.c));
    f.c = solve_gram(mttkrp(t, d, f.a, f.b, 2),
                     (f.a.transpose() * f.a).cwiseProduct(f.b.transpose() * f.b));
    normalize(f);
    out.fit = relative_error(t, d, f, norm);
    out.iterations = it;
    // Exact line search along the last update, kept only if it fits better.
    if (it > 1) {
      CpFactors trial = step_along(last, f, best_step(t, d, last, f));
      const double trial_fit = relative_error(t, d, trial, norm);
      if (trial_fit < out.fit) {
        f = std::move(trial);
        out.fit = trial_fit;
      }
    }
    if (!std::isfinite(out.fit)) break;
    if (std::abs(previous - out.fit) < options.tolerance) {
      out.converged = true;
      break;
    }
    previous = out.fit;
  }
  if (std::isfinite(out.fit) && out.iterations < options.max_iterations) {
    bool converged = false;
    out.iterations += refine(t, d, f, norm, options.max_iterations - out.iterations,
                             options.tolerance, out.fit, converged);
    out.converged = out.converged || converged;
  }
  return out;
}

}  // namespace

CpResult recover_cp(const ThreeWayArray& tensor, std::size_t rank, const CpOptions& options) {
  if (rank == 0) throw DomainError("CP rank must be at least 1");
  if (options.restarts == 0) throw DomainError("CP needs at least one restart");
  if (options.max_iterations == 0) throw DomainError("CP needs at least one iteration");
  const auto dims = tensor.dims();
  const Dims d{static_cast<Index>(dims[0]), static_cast<Index>(dims[1]),
               static_cast<Index>(dims[2])};
  const double norm = tensor.frobenius_norm();

  CpResult result;
  double best = std::numeric_limits<double>::infinity();
  bool have_best = false;
  double best_any = std::numeric_limits<double>::infinity();
  std::vector<CpFactors> starts;
  for (std::size_t restart = 0; restart < options.restarts; ++restart) {
    starts.push_back(random_start(d, rank, CounterRng::derive(options.seed, restart)));
  }
  if (options.algebraic_start) {
    if (auto f = algebraic_start(tensor, d, rank, CounterRng::derive(options.seed, options.restarts))) {
      starts.push_back(std::move(*f));
    }
  }
  for (std::size_t restart = 0; restart < starts.size(); ++restart) {
    RestartOutcome run = run_restart(tensor, d, options, std::move(starts[restart]), norm);
    result.restart_fits.push_back(run.fit);
    best_any = std::min(best_any, run.fit);
    if (!run.converged) continue;
    ++result.converged_restarts;
    if (!have_best || run.fit < best) {
      have_best = true;
      best = run.fit;
      result.factors = std::move(run.factors);
      result.fit = run.fit;
      result.iterations = run.iterations;
      result.best_restart = restart;
    }
  }
  if (!have_best) {
    std::ostringstream msg;
    msg << "alternating least squares did not converge in " << options.max_iterations
        << " iterations from any of " << options.restarts << " starts (best fit " << best_any
        << ")";
    throw ConvergenceError(msg.str(), best_any);
  }
  return result;
}

}  // namespace proxident
