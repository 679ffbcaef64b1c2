#include "proxident/prob.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <numeric>
#include <set>
#include <sstream>

#include "proxident/errors.hpp"

namespace proxident {

CategoricalDomain::CategoricalDomain(std::string name_, std::vector<std::string> labels_)
    : name(std::move(name_)), labels(std::move(labels_)) {
  if (name.empty()) throw DomainError("variable name must be non-empty");
  if (labels.empty()) throw DomainError("variable '" + name + "' needs at least one state");
  std::set<std::string_view> seen;
  for (const auto& l : labels) {
    if (!seen.insert(l).second) {
      throw DomainError("variable '" + name + "' has duplicate label '" + l + "'");
    }
  }
}

CategoricalDomain CategoricalDomain::indexed(std::string name, std::size_t n) {
  std::string prefix;
  for (char c : name) prefix.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
  std::vector<std::string> labels;
  labels.reserve(n);
  for (std::size_t i = 0; i < n; ++i) labels.push_back(prefix + std::to_string(i));
  return CategoricalDomain(std::move(name), std::move(labels));
}

std::size_t CategoricalDomain::index_of(std::string_view label) const {
  const auto it = std::find(labels.begin(), labels.end(), label);
  if (it == labels.end()) {
    throw DomainError("variable '" + name + "' has no state '" + std::string(label) + "'");
  }
  return static_cast<std::size_t>(it - labels.begin());
}

std::string describe(const Assignment& assignment) {
  std::ostringstream out;
  bool first = true;
  for (const auto& [name, state] : assignment) {
    if (!first) out << ", ";
    out << name << "=" << state;
    first = false;
  }
  return first ? std::string("(empty event)") : out.str();
}

FullLaw::FullLaw(std::vector<CategoricalDomain> domains, std::vector<double> probabilities,
                 std::vector<Edge> dag, double normalization_tol)
    : domains_(std::move(domains)), probabilities_(std::move(probabilities)), dag_(std::move(dag)) {
  std::set<std::string_view> names;
  for (const auto& d : domains_) {
    if (d.labels.empty()) throw DomainError("variable '" + d.name + "' has no states");
    if (!names.insert(d.name).second) {
      throw DomainError("duplicate variable '" + d.name + "'");
    }
  }
  strides_.assign(domains_.size(), 1);
  std::size_t total = 1;
  for (std::size_t i = domains_.size(); i-- > 0;) {
    strides_[i] = total;
    total *= domains_[i].cardinality();
  }
  if (probabilities_.size() != total) {
    throw DomainError("probability table has " + std::to_string(probabilities_.size()) +
                      " entries, expected " + std::to_string(total));
  }
  double sum = 0.0;
  for (double p : probabilities_) {
    if (!(p >= 0.0) || p > 1.0 + normalization_tol) {
      throw DomainError("probability entry out of [0,1]: " + std::to_string(p));
    }
    sum += p;
  }
  if (std::abs(sum - 1.0) > normalization_tol) {
    std::ostringstream msg;
    msg.precision(17);
    msg << "probabilities sum to " << sum << ", not 1";
    throw DomainError(msg.str());
  }
  for (const auto& [from, to] : dag_) {
    if (!names.contains(from) || !names.contains(to)) {
      // Edges into variables marginalized away are dropped by marginalize();
      // a constructed law must reference only its own variables.
      throw DomainError("dag edge " + from + "->" + to + " references an unknown variable");
    }
  }
}

std::vector<std::string> FullLaw::names() const {
  std::vector<std::string> out;
  out.reserve(domains_.size());
  for (const auto& d : domains_) out.push_back(d.name);
  return out;
}

bool FullLaw::has(std::string_view name) const noexcept {
  return std::any_of(domains_.begin(), domains_.end(),
                     [&](const CategoricalDomain& d) { return d.name == name; });
}

std::size_t FullLaw::axis(std::string_view name) const {
  for (std::size_t i = 0; i < domains_.size(); ++i) {
    if (domains_[i].name == name) return i;
  }
  throw DomainError("unknown variable '" + std::string(name) + "'");
}

std::size_t FullLaw::offset(std::span<const std::size_t> index) const {
  std::size_t off = 0;
  for (std::size_t i = 0; i < index.size(); ++i) off += index[i] * strides_[i];
  return off;
}

double FullLaw::mass(const Assignment& event) const {
  std::vector<std::pair<std::size_t, std::size_t>> fixed;
  for (const auto& [name, state] : event) {
    const std::size_t ax = axis(name);
    if (state >= domains_[ax].cardinality()) {
      throw DomainError("state " + std::to_string(state) + " out of range for '" + name + "'");
    }
    fixed.emplace_back(ax, state);
  }
  double total = 0.0;
  for_each([&](std::span<const std::size_t> idx, double p) {
    for (const auto& [ax, state] : fixed) {
      if (idx[ax] != state) return;
    }
    total += p;
  });
  return total;
}

void FullLaw::for_each(
    const std::function<void(std::span<const std::size_t>, double)>& visit) const {
  std::vector<std::size_t> idx(domains_.size(), 0);
  for (std::size_t off = 0; off < probabilities_.size(); ++off) {
    visit(idx, probabilities_[off]);
    for (std::size_t i = domains_.size(); i-- > 0;) {
      if (++idx[i] < domains_[i].cardinality()) break;
      idx[i] = 0;
    }
  }
}

namespace {

// Maps a source cell to its offset in a table over a subset of the axes.
struct Projection {
  std::vector<std::size_t> stride;  // per source axis; 0 for dropped axes
  std::size_t size = 1;

  Projection(const FullLaw& law, const std::vector<std::size_t>& axes) {
    stride.assign(law.variable_count(), 0);
    for (std::size_t k = axes.size(); k-- > 0;) {
      stride[axes[k]] = size;
      size *= law.domains()[axes[k]].cardinality();
    }
  }

  std::size_t operator()(std::span<const std::size_t> idx) const {
    std::size_t off = 0;
    for (std::size_t i = 0; i < idx.size(); ++i) off += idx[i] * stride[i];
    return off;
  }
};

std::vector<std::size_t> axes_of(const FullLaw& law, const std::vector<std::string>& names) {
  std::vector<std::size_t> axes;
  axes.reserve(names.size());
  for (const auto& n : names) {
    const std::size_t ax = law.axis(n);
    if (std::find(axes.begin(), axes.end(), ax) != axes.end()) {
      throw DomainError("variable '" + n + "' listed twice");
    }
    axes.push_back(ax);
  }
  return axes;
}

std::vector<double> project(const FullLaw& law, const std::vector<std::size_t>& axes) {
  const Projection proj(law, axes);
  std::vector<double> out(proj.size, 0.0);
  law.for_each([&](std::span<const std::size_t> idx, double p) { out[proj(idx)] += p; });
  return out;
}

void require_disjoint(const std::vector<std::size_t>& a, const std::vector<std::size_t>& b,
                      const char* what) {
  for (auto x : a) {
    if (std::find(b.begin(), b.end(), x) != b.end()) {
      throw DomainError(std::string("variable sets overlap in ") + what);
    }
  }
}

}  // namespace

FullLaw marginalize(const FullLaw& law, const std::vector<std::string>& keep) {
  std::vector<std::size_t> axes = axes_of(law, keep);
  std::sort(axes.begin(), axes.end());
  std::vector<CategoricalDomain> domains;
  for (auto ax : axes) domains.push_back(law.domains()[ax]);
  std::vector<Edge> dag;
  for (const auto& e : law.dag()) {
    const bool from = std::find(keep.begin(), keep.end(), e.first) != keep.end();
    const bool to = std::find(keep.begin(), keep.end(), e.second) != keep.end();
    if (from && to) dag.push_back(e);
  }
  auto probs = project(law, axes);
  // Summation error is far below the constructor's normalization check.
  return FullLaw(std::move(domains), std::move(probs), std::move(dag), 1e-9);
}

FullLaw condition(const FullLaw& law, const std::vector<std::string>& target,
                  const Assignment& given) {
  std::vector<std::size_t> target_axes = axes_of(law, target);
  std::vector<std::size_t> given_axes;
  for (const auto& [name, state] : given) {
    const std::size_t ax = law.axis(name);
    if (state >= law.domains()[ax].cardinality()) {
      throw DomainError("state " + std::to_string(state) + " out of range for '" + name + "'");
    }
    given_axes.push_back(ax);
  }
  require_disjoint(target_axes, given_axes, "condition()");
  std::sort(target_axes.begin(), target_axes.end());

  const Projection proj(law, target_axes);
  std::vector<double> out(proj.size, 0.0);
  double total = 0.0;
  law.for_each([&](std::span<const std::size_t> idx, double p) {
    for (const auto& [name, state] : given) {
      if (idx[law.axis(name)] != state) return;
    }
    out[proj(idx)] += p;
    total += p;
  });
  if (!(total > 0.0)) {
    throw ConditioningError(describe(given),
                            "conditioning event {" + describe(given) + "} has zero probability");
  }
  for (auto& x : out) x /= total;
  std::vector<CategoricalDomain> domains;
  for (auto ax : target_axes) domains.push_back(law.domains()[ax]);
  return FullLaw(std::move(domains), std::move(out), {}, 1e-9);
}

CondMatrix cond_matrix(const FullLaw& law, const std::string& row, const std::string& col,
                       const Assignment& context) {
  const std::size_t row_ax = law.axis(row);
  const std::size_t col_ax = law.axis(col);
  for (const auto& [name, state] : context) {
    const std::size_t ax = law.axis(name);
    if (ax == row_ax || ax == col_ax) {
      throw DomainError("context variable '" + name + "' coincides with row/column");
    }
    if (state >= law.domains()[ax].cardinality()) {
      throw DomainError("state " + std::to_string(state) + " out of range for '" + name + "'");
    }
  }
  const auto& rd = law.domains()[row_ax];
  const auto& cd = law.domains()[col_ax];
  Eigen::MatrixXd m = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(rd.cardinality()),
                                            static_cast<Eigen::Index>(cd.cardinality()));
  Eigen::VectorXd col_mass = Eigen::VectorXd::Zero(m.cols());
  std::vector<std::pair<std::size_t, std::size_t>> fixed;
  for (const auto& [name, state] : context) fixed.emplace_back(law.axis(name), state);
  law.for_each([&](std::span<const std::size_t> idx, double p) {
    for (const auto& [ax, state] : fixed) {
      if (idx[ax] != state) return;
    }
    const auto c = static_cast<Eigen::Index>(idx[col_ax]);
    m(static_cast<Eigen::Index>(idx[row_ax]), c) += p;
    col_mass(c) += p;
  });
  for (Eigen::Index c = 0; c < m.cols(); ++c) {
    if (!(col_mass(c) > 0.0)) {
      Assignment event = context;
      event[col] = static_cast<std::size_t>(c);
      throw ConditioningError(describe(event), "conditioning event {" + describe(event) +
                                                   "} has zero probability");
    }
  }
  if (row_ax == col_ax) {
    m = Eigen::MatrixXd::Identity(m.rows(), m.cols());
  } else {
    for (Eigen::Index c = 0; c < m.cols(); ++c) m.col(c) /= col_mass(c);
  }
  return CondMatrix{rd, cd, std::move(m), context};
}

double mutual_independence_deviation(const FullLaw& law,
                                     const std::vector<std::vector<std::string>>& groups,
                                     const std::vector<std::string>& given) {
  if (groups.size() < 2) return 0.0;
  const std::vector<std::size_t> given_axes = axes_of(law, given);
  std::vector<std::vector<std::size_t>> group_axes;
  std::vector<std::size_t> all_axes = given_axes;
  for (const auto& g : groups) {
    group_axes.push_back(axes_of(law, g));
    require_disjoint(group_axes.back(), all_axes, "independence query");
    all_axes.insert(all_axes.end(), group_axes.back().begin(), group_axes.back().end());
  }

  // Tables over (group_i, given) and over given alone, indexed from full cells.
  const Projection given_proj(law, given_axes);
  const std::vector<double> p_given = project(law, given_axes);
  std::vector<Projection> group_proj;
  std::vector<std::vector<double>> p_group;
  for (const auto& ga : group_axes) {
    std::vector<std::size_t> axes = ga;
    axes.insert(axes.end(), given_axes.begin(), given_axes.end());
    group_proj.emplace_back(law, axes);
    p_group.push_back(project(law, axes));
  }
  const Projection joint_proj(law, all_axes);
  const std::vector<double> p_joint = project(law, all_axes);

  // Visit each joint cell once via a representative full cell.
  std::vector<char> seen(joint_proj.size, 0);
  double worst = 0.0;
  law.for_each([&](std::span<const std::size_t> idx, double) {
    const std::size_t j = joint_proj(idx);
    if (seen[j]) return;
    seen[j] = 1;
    const double pg = p_given[given_proj(idx)];
    if (!(pg > 0.0)) return;
    double product = 1.0;
    for (std::size_t k = 0; k < group_proj.size(); ++k) product *= p_group[k][group_proj[k](idx)] / pg;
    worst = std::max(worst, std::abs(p_joint[j] / pg - product));
  });
  return worst;
}

double ci_deviation(const FullLaw& law, const std::vector<std::string>& x,
                    const std::vector<std::string>& y, const std::vector<std::string>& given) {
  return mutual_independence_deviation(law, {x, y}, given);
}

bool check_ci(const FullLaw& law, const std::vector<std::string>& x,
              const std::vector<std::string>& y, const std::vector<std::string>& given,
              double tol) {
  return ci_deviation(law, x, y, given) <= tol;
}

bool check_mutual_independence(const FullLaw& law,
                               const std::vector<std::vector<std::string>>& groups,
                               const std::vector<std::string>& given, double tol) {
  return mutual_independence_deviation(law, groups, given) <= tol;
}

Eigen::VectorXd marginal_vector(const FullLaw& law, const std::string& name) {
  const auto probs = project(law, {law.axis(name)});
  return Eigen::Map<const Eigen::VectorXd>(probs.data(), static_cast<Eigen::Index>(probs.size()));
}

}  // namespace proxident
