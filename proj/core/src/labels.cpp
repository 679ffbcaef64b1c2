#include "proxident/labels.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include "proxident/errors.hpp"
#include "proxident/linalg.hpp"

namespace proxident {

double central_value(std::span<const double> probabilities, std::span<const double> values,
                     CentralFunctional functional) {
  if (probabilities.size() != values.size() || values.empty()) {
    throw DomainError("central value needs one value per probability");
  }
  if (functional == CentralFunctional::Mean) {
    double m = 0.0;
    for (std::size_t i = 0; i < values.size(); ++i) m += probabilities[i] * values[i];
    return m;
  }
  std::vector<std::size_t> order(values.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t l, std::size_t r) { return values[l] < values[r]; });
  const double total = std::accumulate(probabilities.begin(), probabilities.end(), 0.0);
  double cumulative = 0.0;
  for (std::size_t i : order) {
    cumulative += probabilities[i];
    if (cumulative >= 0.5 * total - 1e-12) return values[i];
  }
  return values[order.back()];
}

LabelMap assign_labels(std::span<const double> functional_values, LabelMode mode,
                       std::span<const double> latent_values, bool descending, double tol) {
  const std::size_t r = functional_values.size();
  for (std::size_t i = 0; i < r; ++i) {
    for (std::size_t j = i + 1; j < r; ++j) {
      if (std::abs(functional_values[i] - functional_values[j]) <= tol) {
        std::ostringstream msg;
        msg << "latent states " << i << " and " << j << " have indistinguishable proxy values ("
            << functional_values[i] << ", " << functional_values[j] << ")";
        throw LabelAmbiguityError(msg.str(), std::abs(functional_values[i] - functional_values[j]));
      }
    }
  }
  LabelMap out;
  out.functional_values.assign(functional_values.begin(), functional_values.end());
  out.descending = descending;
  out.mode = mode;
  out.ordinal.assign(r, 0);
  if (mode == LabelMode::Monotonicity) {
    std::vector<std::size_t> order(r);
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](std::size_t l, std::size_t rr) {
      return descending ? functional_values[l] > functional_values[rr]
                        : functional_values[l] < functional_values[rr];
    });
    for (std::size_t rank = 0; rank < r; ++rank) out.ordinal[order[rank]] = rank;
    return out;
  }
  if (latent_values.size() != r) {
    throw DomainError("unbiasedness needs one latent value per recovered state");
  }
  std::vector<bool> used(r, false);
  for (std::size_t i = 0; i < r; ++i) {
    std::size_t nearest = 0;
    for (std::size_t l = 1; l < r; ++l) {
      if (std::abs(functional_values[i] - latent_values[l]) <
          std::abs(functional_values[i] - latent_values[nearest])) {
        nearest = l;
      }
    }
    const double mismatch = std::abs(functional_values[i] - latent_values[nearest]);
    if (mismatch > tol) {
      std::ostringstream msg;
      msg << "proxy value " << functional_values[i] << " of latent state " << i
          << " is " << mismatch << " from the nearest latent value " << latent_values[nearest];
      throw IdentificationError(msg.str(), mismatch);
    }
    if (used[nearest]) {
      throw LabelAmbiguityError("two latent states map to latent value " +
                                std::to_string(latent_values[nearest]));
    }
    used[nearest] = true;
    out.ordinal[i] = nearest;
  }
  return out;
}

LabelMap recover_labels(const LatentRecovery& rec, const LabelRequest& request) {
  const CondMatrix* m = nullptr;
  switch (request.proxy) {
    case ProxyAxis::W: m = &rec.p_w_given_u; break;
    case ProxyAxis::Z:
    case ProxyAxis::Y: {
      const auto& list = request.proxy == ProxyAxis::Z ? rec.p_z_given_ua : rec.p_y_given_ua;
      if (request.treatment_level >= list.size()) throw DomainError("treatment level out of range");
      m = &list[request.treatment_level];
      break;
    }
  }
  const auto rows = static_cast<std::size_t>(m->entries.rows());
  const auto r = static_cast<std::size_t>(m->entries.cols());
  std::vector<double> proxy_values = request.proxy_values;
  if (proxy_values.empty()) {
    proxy_values.resize(rows);
    std::iota(proxy_values.begin(), proxy_values.end(), 0.0);
  }
  if (proxy_values.size() != rows) {
    throw DomainError("proxy values: expected " + std::to_string(rows) + ", got " +
                      std::to_string(proxy_values.size()));
  }
  std::vector<double> latent_values = request.latent_values;
  if (latent_values.empty()) {
    latent_values.resize(r);
    std::iota(latent_values.begin(), latent_values.end(), 0.0);
  }
  std::vector<double> functional(r);
  for (std::size_t i = 0; i < r; ++i) {
    const Eigen::VectorXd col = m->entries.col(static_cast<Eigen::Index>(i));
    functional[i] = central_value(std::span<const double>(col.data(), rows), proxy_values,
                                  request.functional);
  }
  return assign_labels(functional, request.mode, latent_values, request.descending, request.tol);
}

LatentRecovery apply_labels(const LatentRecovery& rec, const LabelMap& labels) {
  const std::size_t r = rec.latent.cardinality();
  if (labels.ordinal.size() != r) throw DomainError("label map size does not match the latent");
  // perm[k] = recovered state carrying ordinal label k
  std::vector<std::size_t> perm(r, r);
  for (std::size_t i = 0; i < r; ++i) {
    if (labels.ordinal[i] >= r || perm[labels.ordinal[i]] != r) {
      throw DomainError("label map is not a permutation");
    }
    perm[labels.ordinal[i]] = i;
  }
  LatentRecovery out = rec;
  out.p_w_given_u.entries = linalg::permute_columns(rec.p_w_given_u.entries, perm);
  for (auto& m : out.p_z_given_ua) m.entries = linalg::permute_columns(m.entries, perm);
  for (auto& m : out.p_y_given_ua) m.entries = linalg::permute_columns(m.entries, perm);
  for (auto& v : out.f_u_given_a) v = linalg::permute(v, perm);
  out.f_u = linalg::permute(rec.f_u, perm);
  out.label_permutation = labels.ordinal;
  return out;
}

}  // namespace proxident
