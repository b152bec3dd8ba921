#pragma once

// Shared fixtures, random generators and brute-force reference computations.
// Nothing here calls the lattice machinery it is used to check.

#include <algorithm>
#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "dsbn/evidence.hpp"
#include "dsbn/frame.hpp"
#include "dsbn/graphs.hpp"
#include "dsbn/independence.hpp"

namespace dsbn::testing {

inline Universe binary_universe(std::size_t n, const std::string& prefix = "X") {
  Universe u;
  for (std::size_t i = 1; i <= n; ++i) u.add(prefix + std::to_string(i), {"v1", "v2"});
  return u;
}

/// Random universe of `vars` variables with domains of size 2..max_domain.
inline Universe random_universe(std::mt19937_64& rng, std::size_t vars, std::size_t max_domain) {
  Universe u;
  std::uniform_int_distribution<std::size_t> dom(2, max_domain);
  for (std::size_t i = 0; i < vars; ++i) {
    std::vector<std::string> vals;
    std::size_t k = dom(rng);
    for (std::size_t j = 0; j < k; ++j) vals.push_back("d" + std::to_string(j));
    u.add("X" + std::to_string(i + 1), vals);
  }
  return u;
}

inline ConfigSet random_nonempty_set(std::mt19937_64& rng, const Scope& s, double density = 0.5) {
  std::bernoulli_distribution coin(density);
  ConfigSet::Bits bits(s.config_count());
  for (std::size_t i = 0; i < bits.size(); ++i)
    if (coin(rng)) bits.set(i);
  if (bits.none()) bits.set(std::uniform_int_distribution<std::size_t>(0, bits.size() - 1)(rng));
  return ConfigSet(s, std::move(bits));
}

/// Random product set (one nonempty label per variable).
inline ConfigSet random_product_set(std::mt19937_64& rng, const Scope& s) {
  std::vector<ConfigSet> factors;
  for (const auto& v : s.vars()) factors.push_back(random_nonempty_set(rng, Scope({v})));
  return product_set(s, factors);
}

/// Random proper mass with integer weights in 1..9, normalized exactly.
inline MassAssignment<Rational> random_proper(std::mt19937_64& rng, const Scope& s, std::size_t max_focal = 5,
                                              bool products_only = false) {
  std::uniform_int_distribution<std::size_t> nf(1, max_focal);
  std::uniform_int_distribution<int> w(1, 9);
  FocalMap<Rational> f;
  std::size_t k = nf(rng);
  for (std::size_t i = 0; i < k; ++i) {
    ConfigSet a = products_only ? random_product_set(rng, s) : random_nonempty_set(rng, s, 0.4);
    f[a] += w(rng);
  }
  Rational total = 0;
  for (auto& [a, v] : f) total += v;
  for (auto& [a, v] : f) v /= total;
  return validate<Rational>(s, std::move(f));
}

inline std::vector<ConfigSet> all_nonempty_subsets(const Scope& s) {
  std::vector<ConfigSet> out;
  const std::size_t n = s.config_count();
  for (std::uint64_t mask = 1; mask < (std::uint64_t{1} << n); ++mask) out.emplace_back(s, ConfigSet::Bits(n, mask));
  return out;
}

/// Projection by decoding value names, one member at a time.
inline ConfigSet brute_project(const ConfigSet& a, const Scope& sub) {
  std::vector<std::vector<std::string>> configs;
  for (std::size_t idx : a.indices()) {
    std::vector<std::string> cfg;
    for (const auto& v : sub.vars()) {
      std::size_t pos = *a.scope().position(v.name());
      cfg.push_back(v.domain().values[a.scope().digit(idx, pos)]);
    }
    configs.push_back(cfg);
  }
  return ConfigSet::from_values(sub, configs);
}

/// Dempster's rule on explicitly enumerated masses over one frame, in doubles.
inline std::map<ConfigSet, double> brute_combine(const std::map<ConfigSet, double>& a,
                                                 const std::map<ConfigSet, double>& b) {
  std::map<ConfigSet, double> raw;
  double conflict = 0;
  for (const auto& [x, p] : a)
    for (const auto& [y, q] : b) {
      ConfigSet z = x & y;
      if (z.is_empty()) conflict += p * q;
      else raw[z] += p * q;
    }
  for (auto& [z, v] : raw) v /= (1.0 - conflict);
  return raw;
}

/// Signed superset Moebius sum m(A) = sum_{B ⊇ A} (-1)^{|B - A|} Q(B) over the whole powerset.
template <class F>
double brute_moebius_q(const Scope& s, const ConfigSet& a, F q) {
  double acc = 0;
  for (const auto& b : all_nonempty_subsets(s)) {
    if (!a.is_subset_of(b)) continue;
    acc += ((b.size() - a.size()) % 2 ? -1.0 : 1.0) * q(b);
  }
  return acc;
}

template <Scalar T>
MassAssignment<T> mass_of(const Scope& s, std::initializer_list<std::pair<ConfigSet, T>> entries) {
  FocalMap<T> f;
  for (const auto& [a, v] : entries) f[a] += v;
  return validate<T>(s, std::move(f));
}


inline std::vector<std::string> node_names(std::size_t n, const std::string& prefix = "N") {
  std::vector<std::string> out;
  for (std::size_t i = 0; i < n; ++i) out.push_back(prefix + std::to_string(i));
  return out;
}

/// Random dag: edges follow a random permutation, each present with probability `density`.
inline Dag random_dag(std::mt19937_64& rng, std::size_t n, double density = 0.4) {
  Dag d(node_names(n));
  std::vector<std::size_t> order(n);
  for (std::size_t i = 0; i < n; ++i) order[i] = i;
  std::shuffle(order.begin(), order.end(), rng);
  std::bernoulli_distribution coin(density);
  for (std::size_t a = 0; a < n; ++a)
    for (std::size_t b = a + 1; b < n; ++b)
      if (coin(rng)) d.add_edge(order[a], order[b]);
  return d;
}

/// Every simple undirected path from j to k, tested link by link against the blocking rules.
inline bool brute_d_separated(const Dag& d, std::size_t j, std::size_t k, NodeSet l) {
  const std::size_t n = d.size();
  auto is_desc_or_self_in_l = [&](std::size_t v) {
    std::vector<std::size_t> stack{v};
    std::vector<bool> seen(n, false);
    while (!stack.empty()) {
      std::size_t x = stack.back();
      stack.pop_back();
      if (seen[x]) continue;
      seen[x] = true;
      if (in_set(l, x)) return true;
      for (std::size_t c = 0; c < n; ++c)
        if (d.has_edge(x, c)) stack.push_back(c);
    }
    return false;
  };
  std::vector<std::size_t> path{j};
  std::vector<bool> on(n, false);
  on[j] = true;
  std::function<bool()> extend = [&]() -> bool {
    const std::size_t cur = path.back();
    if (cur == k) {
      for (std::size_t i = 1; i + 1 < path.size(); ++i) {
        const std::size_t a = path[i - 1], v = path[i], b = path[i + 1];
        const bool head_to_head = d.has_edge(a, v) && d.has_edge(b, v);
        if (head_to_head ? !is_desc_or_self_in_l(v) : in_set(l, v)) return false;
      }
      return true;
    }
    for (std::size_t nx = 0; nx < n; ++nx) {
      if (on[nx] || !d.adjacent(cur, nx)) continue;
      on[nx] = true;
      path.push_back(nx);
      const bool active = extend();
      path.pop_back();
      on[nx] = false;
      if (active) return true;
    }
    return false;
  };
  return !extend();
}

inline Rational q(long num, long den = 1) { return Rational(num) / Rational(den); }

// Q-ratio conditional of a random joint on its first variable, retried until it has a negative entry.
inline std::optional<MassAssignment<Rational>> random_pseudo(std::mt19937_64& rng, const Universe& u) {
  Scope s = u.all();
  for (int attempt = 0; attempt < 500; ++attempt) {
    auto joint = random_proper(rng, s, 4);
    auto c = q_conditional(joint, u.scope({s.vars()[0].name()}));
    if (c.kind() == MassKind::pseudo) return c;
  }
  return std::nullopt;
}

inline bool has(const std::vector<std::string>& s, const std::string& x) { return std::find(s.begin(), s.end(), x) != s.end(); }

inline bool is_pair(const IndependenceQuery& q, const std::string& a, const std::string& b) {
  return q.j.size() == 1 && q.k.size() == 1 &&
         ((q.j[0] == a && q.k[0] == b) || (q.j[0] == b && q.k[0] == a));
}

// Adjacent pairs are always dependent; `gated` pairs are independent iff the gate is outside S;
// every other nonadjacent pair is always independent.
struct Gate {
  std::string a, b, gate;
};
inline std::unique_ptr<RelationOracle> gated_oracle(std::vector<std::string> vars,
                                                    std::vector<std::pair<std::string, std::string>> edges,
                                                    std::vector<Gate> gates) {
  return std::make_unique<RelationOracle>(std::move(vars), [edges, gates](const IndependenceQuery& q) {
    for (const auto& [a, b] : edges)
      if (is_pair(q, a, b)) return false;
    for (const auto& g : gates)
      if (is_pair(q, g.a, g.b)) return !has(q.l, g.gate);
    return true;
  });
}

}  // namespace dsbn::testing
