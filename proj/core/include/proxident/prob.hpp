#pragma once

#include <cstddef>
#include <functional>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <Eigen/Dense>

namespace proxident {

/// A categorical variable: its name and the ordered labels of its states.
/// Label order is the ordinal order used by label recovery.
struct CategoricalDomain {
  std::string name;
  std::vector<std::string> labels;

  CategoricalDomain() = default;
  CategoricalDomain(std::string name, std::vector<std::string> labels);

  /// Labels "<lowercase name><i>" for i in [0, n).
  static CategoricalDomain indexed(std::string name, std::size_t n);

  std::size_t cardinality() const noexcept { return labels.size(); }
  std::size_t index_of(std::string_view label) const;

  friend bool operator==(const CategoricalDomain&, const CategoricalDomain&) = default;
};

/// Names of the observed variables in the proxy models.
struct ProxyRoles {
  std::string treatment = "A";
  std::string outcome = "Y";
  std::string w = "W";  ///< proxy independent of treatment given the latent
  std::string z = "Z";  ///< proxy that may affect treatment

  std::vector<std::string> observed() const { return {treatment, outcome, w, z}; }
};

/// Partial or full assignment of states (by index) to named variables.
using Assignment = std::map<std::string, std::size_t, std::less<>>;
using Edge = std::pair<std::string, std::string>;

std::string describe(const Assignment& assignment);

/// Dense joint probability table over named categorical variables.
///
/// Cells are stored row-major in domain order: the last-listed domain
/// varies fastest. Public operations address variables by name.
class FullLaw {
 public:
  FullLaw(std::vector<CategoricalDomain> domains, std::vector<double> probabilities,
          std::vector<Edge> dag = {}, double normalization_tol = 1e-12);

  const std::vector<CategoricalDomain>& domains() const noexcept { return domains_; }
  std::span<const double> probabilities() const noexcept { return probabilities_; }
  const std::vector<Edge>& dag() const noexcept { return dag_; }

  std::size_t size() const noexcept { return probabilities_.size(); }
  std::size_t variable_count() const noexcept { return domains_.size(); }
  std::vector<std::string> names() const;

  bool has(std::string_view name) const noexcept;
  /// Position of a variable; throws DomainError if absent.
  std::size_t axis(std::string_view name) const;
  const CategoricalDomain& domain(std::string_view name) const { return domains_[axis(name)]; }
  std::size_t cardinality(std::string_view name) const { return domain(name).cardinality(); }

  /// Probability of one cell given a full positional index.
  double at(std::span<const std::size_t> index) const { return probabilities_[offset(index)]; }
  std::size_t offset(std::span<const std::size_t> index) const;

  /// Total mass of the cells consistent with a (possibly partial) assignment.
  double mass(const Assignment& event) const;

  /// Visit every cell as (positional index, probability).
  void for_each(const std::function<void(std::span<const std::size_t>, double)>& visit) const;

 private:
  std::vector<CategoricalDomain> domains_;
  std::vector<double> probabilities_;
  std::vector<Edge> dag_;
  std::vector<std::size_t> strides_;
};

/// Column-stochastic matrix P_{row | col, context}: column c is the law of
/// `row` given `col = c` and the fixed context.
struct CondMatrix {
  CategoricalDomain row;
  CategoricalDomain col;
  Eigen::MatrixXd entries;
  Assignment context;
};

/// Sum out every variable not in `keep`. Kept variables retain their order.
FullLaw marginalize(const FullLaw& law, const std::vector<std::string>& keep);

/// f(target | given) as a normalized table over `target`.
FullLaw condition(const FullLaw& law, const std::vector<std::string>& target,
                  const Assignment& given);

/// P_{row | col, context}. row == col yields the identity.
CondMatrix cond_matrix(const FullLaw& law, const std::string& row, const std::string& col,
                       const Assignment& context = {});

/// max |f(x,y|g) - f(x|g) f(y|g)| over strata g with positive mass.
double ci_deviation(const FullLaw& law, const std::vector<std::string>& x,
                    const std::vector<std::string>& y, const std::vector<std::string>& given);

bool check_ci(const FullLaw& law, const std::vector<std::string>& x,
              const std::vector<std::string>& y, const std::vector<std::string>& given,
              double tol);

/// max |f(g1,...,gk | c) - prod_i f(gi | c)| over strata c with positive mass.
double mutual_independence_deviation(const FullLaw& law,
                                     const std::vector<std::vector<std::string>>& groups,
                                     const std::vector<std::string>& given);

bool check_mutual_independence(const FullLaw& law,
                               const std::vector<std::vector<std::string>>& groups,
                               const std::vector<std::string>& given, double tol);

/// Marginal distribution of a single variable.
Eigen::VectorXd marginal_vector(const FullLaw& law, const std::string& name);

}  // namespace proxident
