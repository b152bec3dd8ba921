#pragma once

// Exact and statistical independence tests, and the oracle interface the
// learner queries.

#include <boost/math/distributions/chi_squared.hpp>
#include <boost/math/distributions/normal.hpp>

#include <algorithm>
#include <cmath>
#include <functional>
#include <map>
#include <mutex>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "dsbn/error.hpp"
#include "dsbn/evidence.hpp"
#include "dsbn/frame.hpp"
#include "dsbn/graphs.hpp"

namespace dsbn {

/// I(J, K | L) over variable names; sets are kept sorted.
struct IndependenceQuery {
  std::vector<std::string> j, k, l;

  static IndependenceQuery make(std::vector<std::string> j, std::vector<std::string> k, std::vector<std::string> l = {}) {
    for (auto* s : {&j, &k, &l}) {
      std::sort(s->begin(), s->end());
      if (std::adjacent_find(s->begin(), s->end()) != s->end()) throw InputError("repeated variable in query");
    }
    if (j.empty() || k.empty()) throw InputError("independence query needs nonempty J and K");
    auto overlaps = [](const auto& a, const auto& b) {
      return std::any_of(a.begin(), a.end(), [&](const auto& x) { return std::binary_search(b.begin(), b.end(), x); });
    };
    if (overlaps(j, k) || overlaps(j, l) || overlaps(k, l)) throw InputError("independence query sets must be disjoint");
    return {std::move(j), std::move(k), std::move(l)};
  }

  std::string to_string() const {
    auto join = [](const std::vector<std::string>& v) {
      std::string s;
      for (std::size_t i = 0; i < v.size(); ++i) s += (i ? "," : "") + v[i];
      return s;
    };
    return "I(" + join(j) + "; " + join(k) + " | " + join(l) + ")";
  }

  friend auto operator<=>(const IndependenceQuery&, const IndependenceQuery&) = default;
};

enum class TestReason { below_critical, above_critical, negative_mass_rejection, support_mismatch_rejection, exact };

inline const char* to_string(TestReason r) {
  switch (r) {
    case TestReason::below_critical: return "below-critical";
    case TestReason::above_critical: return "above-critical";
    case TestReason::negative_mass_rejection: return "negative-mass-rejection";
    case TestReason::support_mismatch_rejection: return "support-mismatch-rejection";
    case TestReason::exact: return "exact";
  }
  return "?";
}

struct TestOutcome {
  bool independent = false;
  double statistic = 0;
  std::size_t df = 0;
  double alpha = 0;
  TestReason reason = TestReason::exact;
};

inline void check_alpha(double alpha) {
  if (!(alpha > 0 && alpha < 1)) throw InputError("significance level must lie in (0, 1)");
}

/// Upper-tail chi-square critical value at level alpha.
inline double chi2_critical(std::size_t df, double alpha) {
  check_alpha(alpha);
  if (df == 0) throw DegenerateTestError("chi-square test with zero degrees of freedom");
  boost::math::chi_squared_distribution<double> dist(static_cast<double>(df));
  return boost::math::quantile(boost::math::complement(dist, alpha));
}

/// Two-sided standard normal quantile z_{1 - alpha/2}.
inline double normal_critical(double alpha) {
  check_alpha(alpha);
  return boost::math::quantile(boost::math::complement(boost::math::normal_distribution<double>(), alpha / 2));
}

namespace detail {

inline void check_disjoint_within(const Scope& whole, std::initializer_list<const Scope*> parts) {
  std::vector<const Scope*> ps(parts);
  for (std::size_t i = 0; i < ps.size(); ++i) {
    if (!whole.contains(*ps[i])) throw ScopeError("test variables " + ps[i]->to_string() + " not in " + whole.to_string());
    for (std::size_t j = 0; j < i; ++j)
      if (ps[i]->intersect(*ps[j]).arity() > 0) throw ScopeError("test variable sets must be disjoint");
  }
}

template <Scalar T>
double max_abs(const T& v) {
  return std::abs(Arith<T>::to_double(v));
}

}  // namespace detail

/// Joint mass of each (projection onto X1, projection onto X2) cell.
template <Scalar T>
std::map<std::pair<ConfigSet, ConfigSet>, T> projection_cells(const MassAssignment<T>& m, const Scope& x1, const Scope& x2) {
  std::map<std::pair<ConfigSet, ConfigSet>, T> cells;
  for (const auto& [c, v] : m.focal()) cells[{project_set(c, x1), project_set(c, x2)}] += v;
  return cells;
}

/// Cell-sum product condition: every (A, B) cell equals m1(A) m2(B).
template <Scalar T>
TestOutcome exact_marginal_test(const MassAssignment<T>& m, const Scope& x1, const Scope& x2) {
  require_valid(m, "exact_marginal_test");
  detail::check_disjoint_within(m.scope(), {&x1, &x2});
  if (x1.empty() || x2.empty()) throw ScopeError("marginal test needs two nonempty variable sets");
  const auto m12 = marginalize(m, x1.unite(x2));
  const auto m1 = marginalize(m12, x1);
  const auto m2 = marginalize(m12, x2);
  auto cells = projection_cells(m12, x1, x2);
  for (const auto& [a, p] : m1.focal())
    for (const auto& [b, q] : m2.focal()) cells.try_emplace({a, b}, T(0));
  double worst = 0;
  bool independent = true;
  for (const auto& [ab, v] : cells) {
    T diff = v - m1.mass(ab.first) * m2.mass(ab.second);
    if (!Arith<T>::near(diff, T(0))) independent = false;
    worst = std::max(worst, detail::max_abs(diff));
  }
  return {independent, worst, 0, 0, TestReason::exact};
}

/// Q_{JKL}(A) Q_L(A_L) = Q_{JL}(A_{JL}) Q_{KL}(A_{KL}) on the intersection lattice of all four
/// focal families (cylinder-extended), which is where both sides can change value.
template <Scalar T>
TestOutcome exact_conditional_test(const MassAssignment<T>& m, const Scope& j, const Scope& k, const Scope& l) {
  require_valid(m, "exact_conditional_test");
  detail::check_disjoint_within(m.scope(), {&j, &k, &l});
  if (j.empty() || k.empty()) throw ScopeError("conditional test needs nonempty J and K");
  const Scope jl = j.unite(l), kl = k.unite(l), all = jl.unite(k);
  const auto m_all = marginalize(m, all);
  const auto m_jl = marginalize(m_all, jl);
  const auto m_kl = marginalize(m_all, kl);
  const auto m_l = marginalize(m_all, l);
  std::vector<ConfigSet> gens = m_all.focal_sets();
  for (const auto* part : {&m_jl, &m_kl, &m_l})
    for (const auto& [c, v] : part->focal()) gens.push_back(empty_extend_set(c, all));
  gens.push_back(ConfigSet::full(all));
  double worst = 0;
  bool independent = true;
  for (const auto& a : intersection_closure(std::move(gens))) {
    T lhs = commonality(m_all, a) * commonality(m_l, project_set(a, l));
    T rhs = commonality(m_jl, project_set(a, jl)) * commonality(m_kl, project_set(a, kl));
    if (!Arith<T>::near(lhs, rhs)) independent = false;
    worst = std::max(worst, detail::max_abs(T(lhs - rhs)));
  }
  return {independent, worst, 0, 0, TestReason::exact};
}

namespace detail {
template <Scalar T>
std::size_t positive_focal_count(const MassAssignment<T>& m) {
  return static_cast<std::size_t>(
      std::count_if(m.focal().begin(), m.focal().end(), [](const auto& kv) { return Arith<T>::positive(kv.second); }));
}

inline TestOutcome threshold(double stat, std::size_t df, double alpha) {
  bool independent = stat <= chi2_critical(df, alpha);
  return {independent, stat, df, alpha, independent ? TestReason::below_critical : TestReason::above_critical};
}
}  // namespace detail

/// Pearson statistic over the grid of positive marginal focal sets, scaled by n.
template <Scalar T>
TestOutcome chi2_marginal(const MassAssignment<T>& m_hat, std::size_t n, const Scope& x1, const Scope& x2, double alpha) {
  require_valid(m_hat, "chi2_marginal");
  check_alpha(alpha);
  detail::check_disjoint_within(m_hat.scope(), {&x1, &x2});
  const auto m12 = marginalize(m_hat, x1.unite(x2));
  const auto m1 = marginalize(m12, x1);
  const auto m2 = marginalize(m12, x2);
  const std::size_t df = (detail::positive_focal_count(m1) - 1) * (detail::positive_focal_count(m2) - 1);
  if (df == 0) throw DegenerateTestError("marginal chi-square: a marginal has a single focal set");
  const auto cells = projection_cells(m12, x1, x2);
  T sum(0);
  for (const auto& [a, p] : m1.focal()) {
    if (!Arith<T>::positive(p)) continue;
    for (const auto& [b, q] : m2.focal()) {
      if (!Arith<T>::positive(q)) continue;
      auto it = cells.find({a, b});
      const T expected = p * q;
      const T diff = (it == cells.end() ? T(0) : it->second) - expected;
      sum += diff * diff / expected;
    }
  }
  return detail::threshold(static_cast<double>(n) * Arith<T>::to_double(sum), df, alpha);
}

/// Discrepancy 1 - m(Ξi) of the Xi-marginal; compressible when the lower normal-approximation
/// binomial bound at alpha does not exceed `negligible`.
template <Scalar T>
TestOutcome compressibility_index(const MassAssignment<T>& m_hat, const Scope& xi, std::size_t n, double alpha,
                                  double negligible = 0.01) {
  require_valid(m_hat, "compressibility_index");
  check_alpha(alpha);
  if (!m_hat.scope().contains(xi)) throw ScopeError(xi.to_string() + " not in " + m_hat.scope().to_string());
  if (n == 0) throw InputError("compressibility test needs at least one record");
  const auto mi = marginalize(m_hat, xi);
  const double index = 1.0 - Arith<T>::to_double(mi.mass(ConfigSet::full(xi)));
  const double p = std::clamp(index, 0.0, 1.0);
  const double lower = p - normal_critical(alpha) * std::sqrt(p * (1 - p) / static_cast<double>(n));
  const bool compressible = lower <= negligible;
  return {compressible, index, 0, alpha, compressible ? TestReason::below_critical : TestReason::above_critical};
}

/// Expected (pseudo-)mass under X1 ⊥ X3 | X2: Q_t = c Q_{23} Q_{12} / Q_2, normalized to total one.
template <Scalar T>
FocalMap<T> conditional_expectation(const MassAssignment<T>& m, const Scope& x1, const Scope& x2, const Scope& x3) {
  const Scope all = x1.unite(x2).unite(x3);
  const Scope s12 = x1.unite(x2), s23 = x2.unite(x3);
  const auto m12 = marginalize(m, s12);
  const auto m23 = marginalize(m, s23);
  const auto m2 = marginalize(m, x2);
  std::vector<ConfigSet> gens;
  for (const auto* part : {&m12, &m23, &m2})
    for (const auto& [c, v] : part->focal()) gens.push_back(empty_extend_set(c, all));
  gens.push_back(ConfigSet::full(all));
  FocalMap<T> qt;
  for (const auto& a : intersection_closure(std::move(gens))) {
    T num = commonality(m23, project_set(a, s23)) * commonality(m12, project_set(a, s12));
    T den = commonality(m2, project_set(a, x2));
    if (Arith<T>::positive(den)) qt.emplace(a, num / den);
    else if (Arith<T>::is_zero(num)) qt.emplace(a, T(0));
    else throw TestUndefinedError("conditional chi-square: Q of the conditioning marginal vanishes where needed");
  }
  FocalMap<T> mt = detail::moebius_supersets(qt);
  std::erase_if(mt, [](const auto& kv) { return Arith<T>::is_zero(kv.second); });
  T total(0);
  for (const auto& [a, v] : mt) total += v;
  if (!Arith<T>::positive(total)) throw TestUndefinedError("conditional chi-square: expected mass has no positive total");
  for (auto& [a, v] : mt) v /= total;
  return mt;
}

/// Conditional test of X1 ⊥ X3 | X2 against the Q-product expectation, statistic scaled by n.
template <Scalar T>
TestOutcome chi2_conditional(const MassAssignment<T>& m_hat, std::size_t n, const Scope& x1, const Scope& x2,
                             const Scope& x3, double alpha) {
  require_valid(m_hat, "chi2_conditional");
  check_alpha(alpha);
  detail::check_disjoint_within(m_hat.scope(), {&x1, &x2, &x3});
  if (x1.empty() || x3.empty()) throw ScopeError("conditional test needs nonempty tested variable sets");
  const Scope all = x1.unite(x2).unite(x3);
  const auto m = marginalize(m_hat, all);
  const std::size_t df = (detail::positive_focal_count(marginalize(m, x1.unite(x2))) - 1) *
                         (detail::positive_focal_count(marginalize(m, x2.unite(x3))) - 1);
  const auto mt = conditional_expectation(m, x1, x2, x3);
  for (const auto& [a, v] : mt)
    if (Arith<T>::negative(v)) return {false, 0, df, alpha, TestReason::negative_mass_rejection};
  for (const auto& [a, v] : m.focal())
    if (Arith<T>::positive(v) && !mt.count(a)) return {false, 0, df, alpha, TestReason::support_mismatch_rejection};
  T sum(0);
  for (const auto& [a, v] : mt) {
    const T diff = m.mass(a) - v;
    sum += diff * diff / Arith<T>::abs(v);
  }
  if (df == 0) throw DegenerateTestError("conditional chi-square: a projection has a single focal set");
  return detail::threshold(static_cast<double>(n) * Arith<T>::to_double(sum), df, alpha);
}

// ---------------------------------------------------------------------------
// Oracles

struct AuditEntry {
  IndependenceQuery query;
  TestOutcome outcome;
};

/// Answers independence queries; results are memoized behind a mutex and logged in first-asked order.
class IndependenceOracle {
 public:
  virtual ~IndependenceOracle() = default;

  /// True for oracles that answer the exact relation (enables the literal collider check).
  virtual bool exact() const = 0;
  virtual std::string kind() const = 0;
  virtual std::vector<std::string> variables() const = 0;

  TestOutcome test(const IndependenceQuery& q) {
    {
      std::lock_guard lock(mu_);
      if (auto it = cache_.find(q); it != cache_.end()) return it->second;
    }
    TestOutcome out = compute(q);
    std::lock_guard lock(mu_);
    if (cache_.emplace(q, out).second) audit_.push_back({q, out});
    return out;
  }
  bool independent(const IndependenceQuery& q) { return test(q).independent; }

  std::vector<AuditEntry> audit() const {
    std::lock_guard lock(mu_);
    return audit_;
  }

 protected:
  virtual TestOutcome compute(const IndependenceQuery& q) = 0;

 private:
  mutable std::mutex mu_;
  std::map<IndependenceQuery, TestOutcome> cache_;
  std::vector<AuditEntry> audit_;
};

/// d-separation in a fixed dag.
class DsepOracle : public IndependenceOracle {
 public:
  explicit DsepOracle(Dag dag) : dag_(std::move(dag)) {}
  bool exact() const override { return true; }
  std::string kind() const override { return "dsep"; }
  std::vector<std::string> variables() const override { return dag_.nodes(); }
  const Dag& dag() const { return dag_; }

 protected:
  TestOutcome compute(const IndependenceQuery& q) override {
    const auto& t = dag_.table();
    bool sep = d_separated(dag_, make_query(t, q.j, q.k, q.l));
    return {sep, 0, 0, 0, TestReason::exact};
  }

 private:
  Dag dag_;
};

/// The exact relation of a joint mass (Q-product identity).
template <Scalar T>
class ExactOracle : public IndependenceOracle {
 public:
  explicit ExactOracle(MassAssignment<T> joint) : joint_(std::move(joint)) { require_valid(joint_, "ExactOracle"); }
  bool exact() const override { return true; }
  std::string kind() const override { return "exact"; }
  std::vector<std::string> variables() const override { return joint_.scope().names(); }

 protected:
  TestOutcome compute(const IndependenceQuery& q) override {
    const Scope& s = joint_.scope();
    return exact_conditional_test(joint_, s.select(q.j), s.select(q.k), s.select(q.l));
  }

 private:
  MassAssignment<T> joint_;
};

/// Chi-square tests on an empirical mass. A test with zero degrees of freedom (a variable
/// never observed with more than one label) cannot show dependence and answers independent.
class StatOracle : public IndependenceOracle {
 public:
  StatOracle(MassAssignment<double> m_hat, std::size_t n, double alpha) : m_hat_(std::move(m_hat)), n_(n), alpha_(alpha) {
    require_valid(m_hat_, "StatOracle");
    check_alpha(alpha);
    if (n == 0) throw InputError("statistical oracle needs at least one record");
  }
  bool exact() const override { return false; }
  std::string kind() const override { return "stat"; }
  std::vector<std::string> variables() const override { return m_hat_.scope().names(); }
  double alpha() const { return alpha_; }

 protected:
  TestOutcome compute(const IndependenceQuery& q) override {
    const Scope& s = m_hat_.scope();
    try {
      if (q.l.empty()) return chi2_marginal(m_hat_, n_, s.select(q.j), s.select(q.k), alpha_);
      return chi2_conditional(m_hat_, n_, s.select(q.j), s.select(q.l), s.select(q.k), alpha_);
    } catch (const DegenerateTestError&) {
      return {true, 0, 0, alpha_, TestReason::below_critical};
    }
  }

 private:
  MassAssignment<double> m_hat_;
  std::size_t n_;
  double alpha_;
};

/// Oracle over an arbitrary relation given as a predicate.
class RelationOracle : public IndependenceOracle {
 public:
  RelationOracle(std::vector<std::string> vars, std::function<bool(const IndependenceQuery&)> rel, bool exact = true)
      : vars_(std::move(vars)), rel_(std::move(rel)), exact_(exact) {}
  bool exact() const override { return exact_; }
  std::string kind() const override { return "relation"; }
  std::vector<std::string> variables() const override { return vars_; }

 protected:
  TestOutcome compute(const IndependenceQuery& q) override { return {rel_(q), 0, 0, 0, TestReason::exact}; }

 private:
  std::vector<std::string> vars_;
  std::function<bool(const IndependenceQuery&)> rel_;
  bool exact_;
};

}  // namespace dsbn
