#include "proxident/sem.hpp"

#include <cmath>
#include <string>

#include "proxident/errors.hpp"
#include "proxident/rng.hpp"

namespace proxident {

void GaussianSem::validate() const {
  const double vars[] = {var_u, var_z, var_a, var_w, var_y};
  const char* names[] = {"var_u", "var_z", "var_a", "var_w", "var_y"};
  for (int i = 0; i < 5; ++i) {
    if (!(vars[i] > 0.0) || !std::isfinite(vars[i])) {
      throw DomainError(std::string("SEM variance ") + names[i] + " must be positive");
    }
  }
}

GaussianSem GaussianSem::random(std::uint64_t seed) {
  CounterRng rng(seed);
  auto coef = [&] { return rng.uniform(-2.0, 2.0); };
  auto var = [&] { return rng.uniform(0.5, 2.0); };
  GaussianSem s;
  s.mu_u = coef();
  s.beta0_z = coef();
  s.alpha_uz = coef();
  s.beta0_a = coef();
  s.alpha_ua = coef();
  s.alpha_za = coef();
  s.beta0_w = coef();
  s.alpha_uw = coef();
  s.beta0_y = coef();
  s.alpha_ay = coef();
  s.alpha_uy = coef();
  s.var_u = var();
  s.var_z = var();
  s.var_a = var();
  s.var_w = var();
  s.var_y = var();
  return s;
}

double sem_counterfactual_mean(const GaussianSem& sem, double a) {
  return (sem.beta0_y + sem.alpha_uy * sem.mu_u) + sem.alpha_ay * a;
}

double sem_ace(const GaussianSem& sem, double a1, double a0) { return sem.alpha_ay * (a1 - a0); }

namespace {

struct Draw {
  double u, z, a, w, y;
};

Draw draw(const GaussianSem& s, CounterRng& rng, std::optional<double> intervention) {
  Draw d{};
  d.u = s.mu_u + std::sqrt(s.var_u) * rng.normal();
  d.z = s.beta0_z + s.alpha_uz * d.u + std::sqrt(s.var_z) * rng.normal();
  const double noise_a = std::sqrt(s.var_a) * rng.normal();
  d.a = intervention ? *intervention : s.beta0_a + s.alpha_ua * d.u + s.alpha_za * d.z + noise_a;
  d.w = s.beta0_w + s.alpha_uw * d.u + std::sqrt(s.var_w) * rng.normal();
  d.y = s.beta0_y + s.alpha_ay * d.a + s.alpha_uy * d.u + std::sqrt(s.var_y) * rng.normal();
  return d;
}

}  // namespace

Eigen::MatrixXd sem_simulate(const GaussianSem& sem, std::size_t n, std::uint64_t seed,
                             std::optional<double> intervention) {
  sem.validate();
  if (n == 0) throw DomainError("sem_simulate needs n >= 1");
  CounterRng rng(seed);
  Eigen::MatrixXd out(static_cast<Eigen::Index>(n), 5);
  for (Eigen::Index i = 0; i < out.rows(); ++i) {
    const Draw d = draw(sem, rng, intervention);
    out.row(i) << d.u, d.z, d.a, d.w, d.y;
  }
  return out;
}

MonteCarloMean sem_interventional_mean(const GaussianSem& sem, double a, std::size_t n,
                                       std::uint64_t seed) {
  sem.validate();
  if (n < 2) throw DomainError("Monte Carlo mean needs n >= 2");
  CounterRng rng(seed);
  // Welford accumulation.
  double mean = 0.0, m2 = 0.0;
  for (std::size_t i = 1; i <= n; ++i) {
    const double y = draw(sem, rng, a).y;
    const double delta = y - mean;
    mean += delta / static_cast<double>(i);
    m2 += delta * (y - mean);
  }
  const double var = m2 / static_cast<double>(n - 1);
  return {mean, std::sqrt(var / static_cast<double>(n)), n};
}

}  // namespace proxident
