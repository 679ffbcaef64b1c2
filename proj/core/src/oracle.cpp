#include "proxident/oracle.hpp"

#include <cmath>
#include <sstream>

#include "proxident/errors.hpp"

namespace proxident {

void CounterfactualLaw::validate(double tol) const {
  if (table.rows() != static_cast<Eigen::Index>(outcome.cardinality()) ||
      table.cols() != static_cast<Eigen::Index>(treatment.cardinality())) {
    throw DomainError("counterfactual table shape does not match its domains");
  }
  for (Eigen::Index a = 0; a < table.cols(); ++a) {
    if ((table.col(a).array() < 0.0).any()) {
      throw DomainError("counterfactual column " + treatment.labels[static_cast<std::size_t>(a)] +
                        " has negative entries");
    }
    if (std::abs(table.col(a).sum() - 1.0) > tol) {
      throw DomainError("counterfactual column " + treatment.labels[static_cast<std::size_t>(a)] +
                        " does not sum to 1");
    }
  }
}

CounterfactualLaw adjust(const FullLaw& law, const std::vector<std::string>& confounders,
                         const ProxyRoles& roles) {
  std::vector<std::string> keep{roles.treatment, roles.outcome};
  keep.insert(keep.end(), confounders.begin(), confounders.end());
  const FullLaw m = marginalize(law, keep);

  const std::size_t ia = m.axis(roles.treatment);
  const std::size_t iy = m.axis(roles.outcome);
  std::vector<std::size_t> ic;
  for (const auto& c : confounders) ic.push_back(m.axis(c));
  const std::size_t na = m.domains()[ia].cardinality();
  const std::size_t ny = m.domains()[iy].cardinality();
  std::size_t nc = 1;
  for (auto ax : ic) nc *= m.domains()[ax].cardinality();

  auto c_index = [&](std::span<const std::size_t> idx) {
    std::size_t k = 0;
    for (auto ax : ic) k = k * m.domains()[ax].cardinality() + idx[ax];
    return k;
  };
  std::vector<double> pc(nc, 0.0), pac(na * nc, 0.0), pyac(ny * na * nc, 0.0);
  m.for_each([&](std::span<const std::size_t> idx, double p) {
    const std::size_t c = c_index(idx);
    const std::size_t a = idx[ia];
    const std::size_t y = idx[iy];
    pc[c] += p;
    pac[a * nc + c] += p;
    pyac[(y * na + a) * nc + c] += p;
  });

  Eigen::MatrixXd table = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(ny),
                                                static_cast<Eigen::Index>(na));
  for (std::size_t c = 0; c < nc; ++c) {
    if (!(pc[c] > 0.0)) continue;
    for (std::size_t a = 0; a < na; ++a) {
      if (!(pac[a * nc + c] > 0.0)) {
        Assignment event{{roles.treatment, a}};
        std::size_t rest = c;
        for (std::size_t k = ic.size(); k-- > 0;) {
          const std::size_t card = m.domains()[ic[k]].cardinality();
          event[confounders[k]] = rest % card;
          rest /= card;
        }
        throw PositivityError(describe(event), "positivity fails: f(" + describe(event) + ") = 0");
      }
      for (std::size_t y = 0; y < ny; ++y) {
        table(static_cast<Eigen::Index>(y), static_cast<Eigen::Index>(a)) +=
            pyac[(y * na + a) * nc + c] / pac[a * nc + c] * pc[c];
      }
    }
  }
  return {m.domains()[ia], m.domains()[iy], std::move(table)};
}

double ace(const CounterfactualLaw& cf, std::span<const double> outcome_values) {
  if (cf.treatment.cardinality() != 2) {
    throw DomainError("average causal effect needs a binary treatment, '" + cf.treatment.name +
                      "' has " + std::to_string(cf.treatment.cardinality()) + " states");
  }
  if (outcome_values.size() != cf.outcome.cardinality()) {
    throw DomainError("outcome value map has " + std::to_string(outcome_values.size()) +
                      " entries, expected " + std::to_string(cf.outcome.cardinality()));
  }
  double effect = 0.0;
  for (std::size_t y = 0; y < outcome_values.size(); ++y) {
    const auto r = static_cast<Eigen::Index>(y);
    effect += outcome_values[y] * (cf.table(r, 1) - cf.table(r, 0));
  }
  return effect;
}

CounterfactualLaw frontdoor(const FullLaw& law, const std::string& mediator,
                            const ProxyRoles& roles) {
  const FullLaw m = marginalize(law, {roles.treatment, mediator, roles.outcome});
  const std::size_t ia = m.axis(roles.treatment);
  const std::size_t im = m.axis(mediator);
  const std::size_t iy = m.axis(roles.outcome);
  const std::size_t na = m.domains()[ia].cardinality();
  const std::size_t nm = m.domains()[im].cardinality();
  const std::size_t ny = m.domains()[iy].cardinality();

  std::vector<double> pa(na, 0.0), pam(na * nm, 0.0), pyam(ny * na * nm, 0.0);
  m.for_each([&](std::span<const std::size_t> idx, double p) {
    pa[idx[ia]] += p;
    pam[idx[ia] * nm + idx[im]] += p;
    pyam[(idx[iy] * na + idx[ia]) * nm + idx[im]] += p;
  });
  for (std::size_t a = 0; a < na; ++a) {
    if (!(pa[a] > 0.0)) {
      const Assignment event{{roles.treatment, a}};
      throw PositivityError(describe(event), "positivity fails: f(" + describe(event) + ") = 0");
    }
    for (std::size_t k = 0; k < nm; ++k) {
      if (!(pam[a * nm + k] > 0.0)) {
        const Assignment event{{roles.treatment, a}, {mediator, k}};
        throw PositivityError(describe(event),
                              "positivity fails: f(" + mediator + " | " + roles.treatment +
                                  ") = 0 at " + describe(event));
      }
    }
  }

  Eigen::MatrixXd table = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(ny),
                                                static_cast<Eigen::Index>(na));
  for (std::size_t a = 0; a < na; ++a) {
    for (std::size_t k = 0; k < nm; ++k) {
      const double m_given_a = pam[a * nm + k] / pa[a];
      for (std::size_t ap = 0; ap < na; ++ap) {
        const double weight = m_given_a * pa[ap];
        for (std::size_t y = 0; y < ny; ++y) {
          const double y_given = pyam[(y * na + ap) * nm + k] / pam[ap * nm + k];
          table(static_cast<Eigen::Index>(y), static_cast<Eigen::Index>(a)) += y_given * weight;
        }
      }
    }
  }
  return {m.domains()[ia], m.domains()[iy], std::move(table)};
}

double max_abs_difference(const CounterfactualLaw& lhs, const CounterfactualLaw& rhs) {
  if (lhs.table.rows() != rhs.table.rows() || lhs.table.cols() != rhs.table.cols()) {
    throw DomainError("counterfactual tables differ in shape");
  }
  if (lhs.table.size() == 0) return 0.0;
  return (lhs.table - rhs.table).cwiseAbs().maxCoeff();
}

}  // namespace proxident
