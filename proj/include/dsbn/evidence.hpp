#pragma once

// Dempster-Shafer evidence calculus over ConfigSets.
//
// Focal lists are sparse. Bel/Pl/Q views are tabulated on the closure lattice
// of the focal sets (intersection closure for Q, union closure for Bel and its
// complement family for Pl), which is all that is needed to evaluate them on
// any set and to Moebius-invert them exactly.

#include <algorithm>
#include <cstddef>
#include <map>
#include <optional>
#include <string>
#include <unordered_set>
#include <utility>
#include <vector>

#include "dsbn/error.hpp"
#include "dsbn/frame.hpp"
#include "dsbn/numeric.hpp"

namespace dsbn {

enum class MassKind { proper, pseudo, invalid };
enum class View { bel, pl, q };

inline const char* to_string(MassKind k) {
  switch (k) {
    case MassKind::proper: return "proper";
    case MassKind::pseudo: return "pseudo";
    case MassKind::invalid: return "invalid";
  }
  return "?";
}
inline const char* to_string(View v) {
  switch (v) {
    case View::bel: return "bel";
    case View::pl: return "pl";
    case View::q: return "q";
  }
  return "?";
}

template <Scalar T>
using FocalMap = std::map<ConfigSet, T>;

// ---------------------------------------------------------------------------
// Set-family closures

namespace detail {

template <class Op>
std::vector<ConfigSet> close_under(std::vector<ConfigSet> gens, Op op) {
  std::unordered_set<ConfigSet, ConfigSetHash> seen(gens.begin(), gens.end());
  std::vector<ConfigSet> all(seen.begin(), seen.end());
  std::sort(all.begin(), all.end());
  for (std::size_t i = 0; i < all.size(); ++i) {
    for (std::size_t j = 0; j < i; ++j) {
      ConfigSet z = op(all[i], all[j]);
      if (seen.insert(z).second) all.push_back(std::move(z));
    }
  }
  std::sort(all.begin(), all.end());
  return all;
}

}  // namespace detail

/// Smallest family containing `gens` and closed under pairwise intersection.
/// The empty set is dropped unless `keep_empty`.
inline std::vector<ConfigSet> intersection_closure(std::vector<ConfigSet> gens, bool keep_empty = false) {
  auto all = detail::close_under(std::move(gens), [](const ConfigSet& a, const ConfigSet& b) { return a & b; });
  if (!keep_empty) std::erase_if(all, [](const ConfigSet& c) { return c.is_empty(); });
  return all;
}

inline std::vector<ConfigSet> union_closure(std::vector<ConfigSet> gens) {
  return detail::close_under(std::move(gens), [](const ConfigSet& a, const ConfigSet& b) { return a | b; });
}

// ---------------------------------------------------------------------------
// Mass assignments

template <Scalar T>
class MassAssignment {
 public:
  MassAssignment() = default;

  const Scope& scope() const { return scope_; }
  const FocalMap<T>& focal() const { return focal_; }
  MassKind kind() const { return kind_; }
  bool valid() const { return kind_ != MassKind::invalid; }
  std::size_t size() const { return focal_.size(); }

  T mass(const ConfigSet& a) const {
    auto it = focal_.find(a);
    return it == focal_.end() ? T(0) : it->second;
  }
  T total() const {
    T s(0);
    for (const auto& [a, v] : focal_) s += v;
    return s;
  }
  T total_abs() const {
    T s(0);
    for (const auto& [a, v] : focal_) s += Arith<T>::abs(v);
    return s;
  }
  std::vector<ConfigSet> focal_sets() const {
    std::vector<ConfigSet> out;
    for (const auto& [a, v] : focal_) out.push_back(a);
    return out;
  }

  template <Scalar U>
  friend MassAssignment<U> validate(const Scope& scope, FocalMap<U> raw);

 private:
  Scope scope_;
  FocalMap<T> focal_;
  MassKind kind_ = MassKind::invalid;
};

template <Scalar T>
MassAssignment<T> validate(const Scope& scope, FocalMap<T> raw);

// Pointwise function values straight from the focal list.

/// Q(A) = sum of m(B) over focal B containing A.
template <Scalar T>
T commonality(const MassAssignment<T>& m, const ConfigSet& a) {
  T s(0);
  for (const auto& [b, v] : m.focal())
    if (a.is_subset_of(b)) s += v;
  return s;
}

/// Bel(A) = sum of m(B) over nonempty focal B inside A.
template <Scalar T>
T belief(const MassAssignment<T>& m, const ConfigSet& a) {
  T s(0);
  for (const auto& [b, v] : m.focal())
    if (!b.is_empty() && b.is_subset_of(a)) s += v;
  return s;
}

/// Pl(A) = sum of m(B) over focal B meeting A; equals 1 - Bel(complement A) when the masses sum to one.
template <Scalar T>
T plausibility(const MassAssignment<T>& m, const ConfigSet& a) {
  T s(0);
  for (const auto& [b, v] : m.focal())
    if (b.intersects(a)) s += v;
  return s;
}

template <Scalar T>
MassAssignment<T> validate(const Scope& scope, FocalMap<T> raw) {
  MassAssignment<T> m;
  m.scope_ = scope;
  bool empty_mass = false;
  for (auto it = raw.begin(); it != raw.end();) {
    if (!(it->first.scope() == scope))
      throw ScopeError("focal set over " + it->first.scope().to_string() + " in a mass over " + scope.to_string());
    if (Arith<T>::is_zero(it->second)) {
      it = raw.erase(it);
      continue;
    }
    if (it->first.is_empty()) empty_mass = true;
    ++it;
  }
  m.focal_ = std::move(raw);
  if (empty_mass || m.focal_.empty()) {
    m.kind_ = MassKind::invalid;
    return m;
  }
  const T one(1);
  const T sum = m.total();
  const bool all_positive =
      std::all_of(m.focal_.begin(), m.focal_.end(), [](const auto& kv) { return Arith<T>::positive(kv.second); });
  if (all_positive && Arith<T>::near(sum, one)) {
    m.kind_ = MassKind::proper;
    return m;
  }
  // Signed normalization (sum of |m| is one) or Dempster-normalized (sum is one).
  if (!Arith<T>::near(m.total_abs(), one) && !Arith<T>::near(sum, one)) {
    m.kind_ = MassKind::invalid;
    return m;
  }
  // Q at any set equals Q at its closure in the focal intersection lattice (or is 0).
  for (const auto& c : intersection_closure(m.focal_sets())) {
    if (Arith<T>::negative(commonality(m, c))) {
      m.kind_ = MassKind::invalid;
      return m;
    }
  }
  if (Arith<T>::negative(sum)) {
    m.kind_ = MassKind::invalid;
    return m;
  }
  m.kind_ = MassKind::pseudo;
  return m;
}

template <Scalar T>
void require_valid(const MassAssignment<T>& m, const char* op) {
  if (!m.valid()) throw InvalidMassError(std::string(op) + ": invalid mass assignment");
}

template <Scalar T>
MassAssignment<T> vacuous(const Scope& scope) {
  return validate<T>(scope, {{ConfigSet::full(scope), T(1)}});
}

/// m(B) = p, m(frame) = 1 - p.
template <Scalar T>
MassAssignment<T> simple_support(const ConfigSet& b, const T& p) {
  if (b.is_empty()) throw InvalidMassError("simple support on the empty set");
  if (Arith<T>::negative(p) || Arith<T>::negative(T(1) - p)) throw InvalidMassError("simple support weight outside [0,1]");
  FocalMap<T> f;
  f[b] += p;
  f[ConfigSet::full(b.scope())] += T(1) - p;
  return validate<T>(b.scope(), std::move(f));
}

/// Positive rescaling to sum |m| = 1 (kind recomputed).
template <Scalar T>
MassAssignment<T> normalize_abs(const MassAssignment<T>& m) {
  T s = m.total_abs();
  if (!Arith<T>::positive(s)) throw InvalidMassError("cannot normalize a zero mass assignment");
  FocalMap<T> f;
  for (const auto& [a, v] : m.focal()) f.emplace(a, v / s);
  return validate<T>(m.scope(), std::move(f));
}

/// Masses agree exactly (rational) or within tolerance (float) on every set.
template <Scalar T>
bool same_masses(const MassAssignment<T>& a, const MassAssignment<T>& b) {
  if (!(a.scope() == b.scope())) return false;
  for (const auto& [s, v] : a.focal())
    if (!Arith<T>::near(v, b.mass(s))) return false;
  for (const auto& [s, v] : b.focal())
    if (!Arith<T>::near(v, a.mass(s))) return false;
  return true;
}

/// Equality after rescaling both to the same positive total.
template <Scalar T>
bool same_up_to_scale(const MassAssignment<T>& a, const MassAssignment<T>& b) {
  if (!(a.scope() == b.scope())) return false;
  T sa = a.total(), sb = b.total();
  if (!Arith<T>::positive(sa) || !Arith<T>::positive(sb)) {
    sa = a.total_abs();
    sb = b.total_abs();
  }
  for (const auto& [s, v] : a.focal())
    if (!Arith<T>::near(v / sa, b.mass(s) / sb)) return false;
  for (const auto& [s, v] : b.focal())
    if (!Arith<T>::near(v / sb, a.mass(s) / sa)) return false;
  return true;
}

template <Scalar To, Scalar From>
MassAssignment<To> convert(const MassAssignment<From>& m) {
  FocalMap<To> f;
  for (const auto& [a, v] : m.focal()) {
    if constexpr (std::is_same_v<To, From>) f.emplace(a, v);
    else if constexpr (Arith<To>::exact) f.emplace(a, Arith<To>::from_double(Arith<From>::to_double(v)));
    else f.emplace(a, Arith<From>::to_double(v));
  }
  return validate<To>(m.scope(), std::move(f));
}

// ---------------------------------------------------------------------------
// Function views

template <Scalar T>
class FunctionView {
 public:
  FunctionView(Scope scope, View view, FocalMap<T> table)
      : scope_(std::move(scope)), view_(view), table_(std::move(table)) {}

  const Scope& scope() const { return scope_; }
  View view() const { return view_; }
  const FocalMap<T>& table() const { return table_; }

  /// Value on any set: Q and Pl read the smallest tabulated superset, Bel the largest tabulated subset.
  T operator()(const ConfigSet& a) const {
    if (auto it = table_.find(a); it != table_.end()) return it->second;
    if (a.is_empty()) return T(0);
    const ConfigSet* best = nullptr;
    for (const auto& [k, v] : table_) {
      if (view_ == View::bel) {
        if (k.is_subset_of(a) && (!best || k.size() > best->size())) best = &k;
      } else {
        if (a.is_subset_of(k) && (!best || k.size() < best->size())) best = &k;
      }
    }
    return best ? table_.at(*best) : T(0);
  }

 private:
  Scope scope_;
  View view_;
  FocalMap<T> table_;
};

enum class Materialize { lattice, full };

inline constexpr std::size_t kMaxTabulatedConfigurations = 20;

template <Scalar T>
T evaluate(const MassAssignment<T>& m, View view, const ConfigSet& a) {
  switch (view) {
    case View::bel: return belief(m, a);
    case View::pl: return plausibility(m, a);
    case View::q: return commonality(m, a);
  }
  return T(0);
}

template <Scalar T>
FunctionView<T> derive(const MassAssignment<T>& m, View view, Materialize how = Materialize::lattice) {
  require_valid(m, "derive");
  const Scope& s = m.scope();
  FocalMap<T> table;
  if (how == Materialize::full) {
    if (s.config_count() > kMaxTabulatedConfigurations)
      throw ScopeError("full tabulation limited to 2^20 subsets");
    const std::size_t n = s.config_count();
    for (std::uint64_t mask = 1; mask < (std::uint64_t{1} << n); ++mask) {
      ConfigSet::Bits bits(n, mask);
      ConfigSet a(s, std::move(bits));
      table.emplace(a, evaluate(m, view, a));
    }
    return FunctionView<T>(s, view, std::move(table));
  }
  const ConfigSet frame = ConfigSet::full(s);
  switch (view) {
    case View::q:
      for (const auto& c : intersection_closure(m.focal_sets())) table.emplace(c, commonality(m, c));
      break;
    case View::bel:
      for (const auto& c : union_closure(m.focal_sets())) table.emplace(c, belief(m, c));
      break;
    case View::pl:
      table.emplace(frame, plausibility(m, frame));
      for (const auto& u : union_closure(m.focal_sets())) {
        ConfigSet k = frame - u;
        if (!k.is_empty()) table.emplace(k, plausibility(m, k));
      }
      break;
  }
  return FunctionView<T>(s, view, std::move(table));
}

namespace detail {

template <Scalar T, class Op>
bool family_closed(const FocalMap<T>& table, Op op) {
  for (auto i = table.begin(); i != table.end(); ++i)
    for (auto j = std::next(i); j != table.end(); ++j) {
      ConfigSet z = op(i->first, j->first);
      if (!z.is_empty() && !table.count(z)) return false;
    }
  return true;
}

/// f(A) = sum over tabulated B ⊇ A of m(B), solved top-down.
template <Scalar T>
FocalMap<T> moebius_supersets(const FocalMap<T>& f) {
  std::vector<std::pair<ConfigSet, T>> keys(f.begin(), f.end());
  std::stable_sort(keys.begin(), keys.end(), [](const auto& a, const auto& b) { return a.first.size() > b.first.size(); });
  FocalMap<T> m;
  for (std::size_t i = 0; i < keys.size(); ++i) {
    T v = keys[i].second;
    for (std::size_t j = 0; j < i; ++j)
      if (keys[j].first.size() > keys[i].first.size() && keys[i].first.is_subset_of(keys[j].first)) v -= m.at(keys[j].first);
    m.emplace(keys[i].first, v);
  }
  return m;
}

/// f(A) = sum over tabulated B ⊆ A of m(B), solved bottom-up.
template <Scalar T>
FocalMap<T> moebius_subsets(const FocalMap<T>& f) {
  std::vector<std::pair<ConfigSet, T>> keys(f.begin(), f.end());
  std::stable_sort(keys.begin(), keys.end(), [](const auto& a, const auto& b) { return a.first.size() < b.first.size(); });
  FocalMap<T> m;
  for (std::size_t i = 0; i < keys.size(); ++i) {
    T v = keys[i].second;
    for (std::size_t j = 0; j < i; ++j)
      if (keys[j].first.size() < keys[i].first.size() && keys[j].first.is_subset_of(keys[i].first)) v -= m.at(keys[j].first);
    m.emplace(keys[i].first, v);
  }
  return m;
}

template <Scalar T>
MassAssignment<T> finish_inversion(const Scope& s, FocalMap<T> m) {
  if (auto it = m.find(ConfigSet::empty(s)); it != m.end()) {
    if (!Arith<T>::is_zero(it->second)) throw InversionError("view implies nonzero mass on the empty set");
    m.erase(it);
  }
  auto out = validate<T>(s, std::move(m));
  if (!out.valid()) throw InversionError("view does not invert to a proper or pseudo mass assignment");
  return out;
}

}  // namespace detail

/// Moebius inversion of a tabulated view back to its mass assignment.
template <Scalar T>
MassAssignment<T> invert(const FunctionView<T>& v) {
  const Scope& s = v.scope();
  const ConfigSet frame = ConfigSet::full(s);
  switch (v.view()) {
    case View::q: {
      if (!detail::family_closed(v.table(), [](const ConfigSet& a, const ConfigSet& b) { return a & b; }))
        throw InversionError("Q table is not closed under intersection");
      return detail::finish_inversion(s, detail::moebius_supersets(v.table()));
    }
    case View::bel: {
      if (!detail::family_closed(v.table(), [](const ConfigSet& a, const ConfigSet& b) { return a | b; }))
        throw InversionError("Bel table is not closed under union");
      return detail::finish_inversion(s, detail::moebius_subsets(v.table()));
    }
    case View::pl: {
      auto top = v.table().find(frame);
      if (top == v.table().end()) throw InversionError("Pl table lacks the frame");
      if (!detail::family_closed(v.table(), [](const ConfigSet& a, const ConfigSet& b) { return a & b; }))
        throw InversionError("Pl table is not closed under intersection");
      const T total = top->second;
      FocalMap<T> bel;
      for (const auto& [k, val] : v.table()) {
        ConfigSet u = frame - k;
        if (!u.is_empty()) bel.emplace(u, total - val);
      }
      bel[frame] = total;
      return detail::finish_inversion(s, detail::moebius_subsets(bel));
    }
  }
  throw InversionError("unknown view");
}

// ---------------------------------------------------------------------------
// Marginalization and extension

/// m'(B) = sum of m(A) over A projecting onto B. Pseudo results normalized under
/// neither convention are rescaled to sum |m| = 1.
template <Scalar T>
MassAssignment<T> marginalize(const MassAssignment<T>& m, const Scope& sub) {
  if (!m.scope().contains(sub)) throw ScopeError("cannot marginalize " + m.scope().to_string() + " onto " + sub.to_string());
  if (m.scope() == sub) return m;
  FocalMap<T> f;
  for (const auto& [a, v] : m.focal()) f[project_set(a, sub)] += v;
  auto out = validate<T>(sub, std::move(f));
  if (!out.valid() && m.valid() && out.size() > 0) {
    auto rescaled = normalize_abs(out);
    if (rescaled.valid()) return rescaled;
  }
  return out;
}

template <Scalar T>
MassAssignment<T> empty_extend(const MassAssignment<T>& m, const Scope& super) {
  if (!super.contains(m.scope())) throw ScopeError("cannot extend " + m.scope().to_string() + " to " + super.to_string());
  if (m.scope() == super) return m;
  FocalMap<T> f;
  for (const auto& [a, v] : m.focal()) f.emplace(empty_extend_set(a, super), v);
  return validate<T>(super, std::move(f));
}

// ---------------------------------------------------------------------------
// Dempster's rule

template <Scalar T>
MassAssignment<T> combine(const MassAssignment<T>& m1, const MassAssignment<T>& m2) {
  require_valid(m1, "combine");
  require_valid(m2, "combine");
  const Scope u = m1.scope().unite(m2.scope());
  const auto e1 = empty_extend(m1, u);
  const auto e2 = empty_extend(m2, u);
  FocalMap<T> acc;
  for (const auto& [b, x] : e1.focal()) {
    for (const auto& [c, y] : e2.focal()) {
      ConfigSet i = b & c;
      if (!i.is_empty()) acc[std::move(i)] += x * y;
    }
  }
  T norm(0);
  for (const auto& [a, v] : acc) norm += v;
  if constexpr (Arith<T>::exact) {
    if (norm <= 0) throw CombinationError("total conflict: normalizer is not positive");
  } else {
    if (norm <= Arith<T>::conflict_eps) throw CombinationError("total conflict: normalizer below 1e-12");
  }
  for (auto& [a, v] : acc) v /= norm;
  return validate<T>(u, std::move(acc));
}

template <Scalar T>
MassAssignment<T> combine_all(const std::vector<MassAssignment<T>>& ms) {
  if (ms.empty()) throw InvalidMassError("nothing to combine");
  MassAssignment<T> acc = ms.front();
  for (std::size_t i = 1; i < ms.size(); ++i) acc = combine(acc, ms[i]);
  return acc;
}

// ---------------------------------------------------------------------------
// Conditioning

namespace detail {
inline ConfigSet lift(const ConfigSet& a, const Scope& s) {
  if (a.scope() == s) return a;
  return empty_extend_set(a, s);
}
}  // namespace detail

/// Dempster conditioning: combination with the deterministic support of B.
template <Scalar T>
MassAssignment<T> condition_dempster(const MassAssignment<T>& m, const ConfigSet& b) {
  require_valid(m, "condition_dempster");
  ConfigSet lb = detail::lift(b, m.scope());
  if (!Arith<T>::positive(plausibility(m, lb))) throw ConditioningError("Pl(B) = 0: Dempster conditioning undefined");
  return combine(m, simple_support(lb, T(1)));
}

template <Scalar T>
struct BeliefInterval {
  T bel;
  T pl;
};

/// Lower/upper envelope conditioning, closed forms valid for Bel(B) > 0.
template <Scalar T>
BeliefInterval<T> condition_hf(const MassAssignment<T>& m, const ConfigSet& a, const ConfigSet& b) {
  require_valid(m, "condition_hf");
  ConfigSet la = detail::lift(a, m.scope());
  ConfigSet lb = detail::lift(b, m.scope());
  if (!Arith<T>::positive(belief(m, lb))) throw ConditioningError("Bel(B) = 0: envelope conditioning undefined");
  ConfigSet ab = la & lb;
  ConfigSet acb = la.complement() & lb;
  T bel_ab = belief(m, ab), pl_ab = plausibility(m, ab);
  T bel_acb = belief(m, acb), pl_acb = plausibility(m, acb);
  return {bel_ab / (bel_ab + pl_acb), pl_ab / (pl_ab + bel_acb)};
}

/// Jeffrey-style update: combination with the simple support of B at weight p.
template <Scalar T>
MassAssignment<T> condition_jeffrey(const MassAssignment<T>& m, const ConfigSet& b, const T& p) {
  require_valid(m, "condition_jeffrey");
  return combine(m, simple_support(detail::lift(b, m.scope()), p));
}

/// Q-ratio conditional m|h with combine(marginalize(m, h), m|h) = m.
///
/// Q_*(A) = Q(A) / Q^{h}(A^{h}) wherever the denominator is positive, and 0
/// where Q(A) = 0. The ratio is tabulated on the intersection closure of the
/// focal sets of m and the cylinders of the marginal's focal sets, inverted,
/// and rescaled to sum |m| = 1.
template <Scalar T>
MassAssignment<T> q_conditional(const MassAssignment<T>& m, const Scope& h) {
  require_valid(m, "q_conditional");
  if (!m.scope().contains(h)) throw ScopeError("conditioning scope " + h.to_string() + " not in " + m.scope().to_string());
  const Scope& s = m.scope();
  const auto mh = marginalize(m, h);
  std::vector<ConfigSet> gens = m.focal_sets();
  for (const auto& [c, v] : mh.focal()) gens.push_back(empty_extend_set(c, s));
  gens.push_back(ConfigSet::full(s));
  FocalMap<T> ratio;
  for (const auto& k : intersection_closure(std::move(gens))) {
    T q = commonality(m, k);
    T d = commonality(mh, project_set(k, h));
    if (Arith<T>::positive(d)) {
      ratio.emplace(k, q / d);
    } else if (Arith<T>::is_zero(q)) {
      ratio.emplace(k, T(0));
    } else {
      throw ConditioningError("no conditional exists: Q > 0 where the marginal commonality vanishes");
    }
  }
  FocalMap<T> raw = detail::moebius_supersets(ratio);
  std::erase_if(raw, [](const auto& kv) { return Arith<T>::is_zero(kv.second); });
  auto cond = normalize_abs(validate<T>(s, std::move(raw)));
  if (!cond.valid()) throw Error("internal: Q-ratio conditional failed validation");
  if (!same_up_to_scale(combine(mh, cond), m)) throw Error("internal: Q-ratio conditional does not reconstruct the joint");
  return cond;
}

}  // namespace dsbn
