#pragma once

// Belief networks over a dag: joint construction, terminal-node removal,
// sampling of set-valued records and relative-frequency estimation.

#include <cstdint>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "dsbn/error.hpp"
#include "dsbn/evidence.hpp"
#include "dsbn/frame.hpp"
#include "dsbn/graphs.hpp"

namespace dsbn {

/// A dag whose node i stores a (pseudo-)mass over {X_i} plus its parents.
template <Scalar T>
class DsNetwork {
 public:
  DsNetwork(Universe universe, Dag dag, std::vector<MassAssignment<T>> conditionals)
      : universe_(std::move(universe)), dag_(std::move(dag)), conditionals_(std::move(conditionals)) {
    if (conditionals_.size() != dag_.size()) throw NetworkError("one conditional per node required");
    for (std::size_t i = 0; i < dag_.size(); ++i) {
      std::vector<std::string> names{dag_.name(i)};
      for (std::size_t p : members(dag_.parents(i))) names.push_back(dag_.name(p));
      Scope expected = universe_.scope(names);
      if (!(conditionals_[i].scope() == expected))
        throw NetworkError("conditional of " + dag_.name(i) + " is over " + conditionals_[i].scope().to_string() +
                           ", expected " + expected.to_string());
      if (!conditionals_[i].valid()) throw NetworkError("conditional of " + dag_.name(i) + " is not a valid mass");
    }
    joint_ = fold();
  }

  const Universe& universe() const { return universe_; }
  const Dag& dag() const { return dag_; }
  const std::vector<MassAssignment<T>>& conditionals() const { return conditionals_; }
  const MassAssignment<T>& conditional(std::size_t i) const { return conditionals_.at(i); }
  Scope scope() const { return universe_.scope(dag_.nodes()); }
  const MassAssignment<T>& joint() const { return joint_; }

 private:
  // Dempster combination of the conditionals in topological order; must come out proper.
  MassAssignment<T> fold() const {
    if (dag_.size() == 0) throw NetworkError("empty network");
    MassAssignment<T> acc;
    bool first = true;
    try {
      for (std::size_t i : dag_.topological_order()) {
        acc = first ? conditionals_[i] : combine(acc, conditionals_[i]);
        first = false;
      }
    } catch (const CombinationError& e) {
      throw NetworkError(std::string("network conditionals conflict: ") + e.what());
    } catch (const InvalidMassError& e) {
      throw NetworkError(std::string("network fold left the valid masses: ") + e.what());
    }
    acc = empty_extend(acc, scope());
    if (acc.kind() != MassKind::proper) throw NetworkError("network joint is not a proper mass assignment");
    return acc;
  }

  Universe universe_;
  Dag dag_;
  std::vector<MassAssignment<T>> conditionals_;
  MassAssignment<T> joint_;
};

/// The joint computed when the network was built.
template <Scalar T>
const MassAssignment<T>& joint_mass(const DsNetwork<T>& net) {
  return net.joint();
}

/// Network without terminal node j.
template <Scalar T>
DsNetwork<T> drop_terminal(const DsNetwork<T>& net, const std::string& name) {
  const Dag& d = net.dag();
  const std::size_t j = d.index(name);
  if (d.children(j)) throw NetworkError("node " + name + " has outgoing edges");
  std::vector<std::string> names;
  for (std::size_t i = 0; i < d.size(); ++i)
    if (i != j) names.push_back(d.name(i));
  Dag out(names);
  for (auto [a, b] : d.edges())
    if (b != j) out.add_edge(d.name(a), d.name(b));
  std::vector<MassAssignment<T>> conds;
  for (std::size_t i = 0; i < d.size(); ++i)
    if (i != j) conds.push_back(net.conditional(i));
  return DsNetwork<T>(net.universe(), std::move(out), std::move(conds));
}

/// Set-valued records: one nonempty label per variable of `scope`, in scope order.
struct Dataset {
  Scope scope;
  std::vector<std::vector<ConfigSet>> records;

  std::size_t size() const { return records.size(); }

  void add(std::vector<ConfigSet> labels) {
    if (labels.size() != scope.arity()) throw InputError("record arity does not match the dataset");
    for (std::size_t i = 0; i < labels.size(); ++i) {
      if (!(labels[i].scope() == Scope({scope.vars()[i]}))) throw InputError("label over the wrong variable");
      if (labels[i].is_empty()) throw InputError("empty label for " + scope.vars()[i].name());
    }
    records.push_back(std::move(labels));
  }
};

namespace detail {
inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

/// Uniform draw in [0, 1) that depends only on (seed, index).
inline double record_uniform(std::uint64_t seed, std::uint64_t index) {
  return static_cast<double>(splitmix64(splitmix64(seed) ^ index) >> 11) * 0x1.0p-53;
}
}  // namespace detail

/// Draws n records from the network joint; record i depends only on (seed, i).
template <Scalar T>
Dataset sample(const DsNetwork<T>& net, std::size_t n, std::uint64_t seed) {
  const auto joint = joint_mass(net);
  std::vector<std::pair<std::vector<ConfigSet>, double>> cells;
  for (const auto& [a, v] : joint.focal()) {
    auto f = factorize_set(a);
    if (!f) throw SamplingError("focal set " + a.to_string() + " is not a product of per-variable labels");
    cells.emplace_back(std::move(*f), Arith<T>::to_double(v));
  }
  double total = 0;
  for (const auto& c : cells) total += c.second;
  Dataset ds{joint.scope(), {}};
  ds.records.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    double u = detail::record_uniform(seed, i) * total, acc = 0;
    std::size_t pick = cells.size() - 1;
    for (std::size_t c = 0; c < cells.size(); ++c) {
      acc += cells[c].second;
      if (u < acc) {
        pick = c;
        break;
      }
    }
    ds.records.push_back(cells[pick].first);
  }
  return ds;
}

/// Relative frequency of each record's label product.
template <Scalar T = double>
MassAssignment<T> estimate(const Dataset& ds) {
  if (ds.size() == 0) throw InputError("cannot estimate from an empty dataset");
  std::map<std::vector<ConfigSet>, std::size_t> counts;
  for (const auto& r : ds.records) ++counts[r];
  FocalMap<T> f;
  for (const auto& [labels, c] : counts) f[product_set(ds.scope, labels)] += T(c) / T(ds.size());
  return validate<T>(ds.scope, std::move(f));
}

enum class FixtureShape { chain, fork, collider };

/// Three binary variables X1, X2, X3 over {v1, v2}. Roots carry {v1: p, v2: 1-p}; a single-parent
/// link has focal points (child = parent = v1) and (child = parent = v2) at 1/2 each; the collider
/// child X2 has one focal point per parent configuration, taking v1 exactly when both parents do.
template <Scalar T>
DsNetwork<T> copy_link_fixture(FixtureShape shape, const T& p) {
  if (!(p > T(0) && p < T(1))) throw InputError("fixture parameter must lie in (0, 1)");
  Universe u;
  for (const char* name : {"X1", "X2", "X3"}) u.add(name, {"v1", "v2"});
  Dag d({"X1", "X2", "X3"});
  switch (shape) {
    case FixtureShape::chain:
      d.add_edge("X1", "X2");
      d.add_edge("X2", "X3");
      break;
    case FixtureShape::fork:
      d.add_edge("X2", "X1");
      d.add_edge("X2", "X3");
      break;
    case FixtureShape::collider:
      d.add_edge("X1", "X2");
      d.add_edge("X3", "X2");
      break;
  }
  const T half = T(1) / T(2), quarter = T(1) / T(4);
  std::vector<MassAssignment<T>> conds;
  for (std::size_t i = 0; i < 3; ++i) {
    std::vector<std::string> names{d.name(i)};
    for (std::size_t q : members(d.parents(i))) names.push_back(d.name(q));
    Scope s = u.scope(names);
    FocalMap<T> f;
    auto point = [&](std::map<std::string, std::string> values) {
      std::vector<std::string> cfg;
      for (const auto& v : s.vars()) cfg.push_back(values.at(v.name()));
      return ConfigSet::from_values(s, {cfg});
    };
    const std::string self = d.name(i);
    const auto parents = members(d.parents(i));
    if (parents.empty()) {
      f[point({{self, "v1"}})] = p;
      f[point({{self, "v2"}})] = T(1) - p;
    } else if (parents.size() == 1) {
      const std::string par = d.name(parents[0]);
      f[point({{self, "v1"}, {par, "v1"}})] = half;
      f[point({{self, "v2"}, {par, "v2"}})] = half;
    } else {
      const std::string a = d.name(parents[0]), b = d.name(parents[1]);
      for (const char* va : {"v1", "v2"})
        for (const char* vb : {"v1", "v2"}) {
          const bool both = std::string(va) == "v1" && std::string(vb) == "v1";
          f[point({{self, both ? "v1" : "v2"}, {a, va}, {b, vb}})] = quarter;
        }
    }
    conds.push_back(validate<T>(s, std::move(f)));
  }
  return DsNetwork<T>(std::move(u), std::move(d), std::move(conds));
}

}  // namespace dsbn
