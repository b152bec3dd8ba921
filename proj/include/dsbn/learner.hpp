#pragma once

// Constraint-based structure learning: skeleton from an independence oracle,
// head-to-head orientation of unbridged pairs, propagation to a fixpoint,
// failure detection and enumeration of the compatible dags.

#include <algorithm>
#include <functional>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "dsbn/error.hpp"
#include "dsbn/graphs.hpp"
#include "dsbn/independence.hpp"

namespace dsbn {

struct SkeletonOptions {
  /// Largest conditioning set tried; unset means every subset.
  std::optional<std::size_t> max_cond;
  /// Draw conditioning sets only from current neighbours (PC-style); not faithful to the full search.
  bool neighbourhood = false;
};

struct Skeleton {
  Pog pog;
  /// First separating set found, keyed by (smaller index, larger index).
  std::map<std::pair<std::size_t, std::size_t>, NodeSet> sepsets;
};

namespace detail {

/// Subsets of `pool` with size in [lo, hi], by size, then by mask value.
inline std::vector<NodeSet> subsets_by_size(NodeSet pool, std::size_t lo, std::size_t hi) {
  const auto items = members(pool);
  hi = std::min(hi, items.size());
  std::vector<NodeSet> out;
  for (std::size_t d = lo; d <= hi; ++d) {
    std::vector<NodeSet> level;
    // Gosper's hack over positions in `items`.
    if (d == 0) {
      level.push_back(0);
    } else {
      std::uint64_t v = (std::uint64_t{1} << d) - 1;
      while (v < (std::uint64_t{1} << items.size())) {
        NodeSet s = 0;
        for (std::size_t i : members(v)) s |= node_bit(items[i]);
        level.push_back(s);
        std::uint64_t c = v & (~v + 1), r = v + c;
        v = (((r ^ v) >> 2) / c) | r;
      }
    }
    std::sort(level.begin(), level.end());
    out.insert(out.end(), level.begin(), level.end());
  }
  return out;
}

inline IndependenceQuery pair_query(const NodeTable& t, std::size_t x, std::size_t y, NodeSet s) {
  return IndependenceQuery::make({t.name(x)}, {t.name(y)}, t.names_of(s));
}

}  // namespace detail

/// Edge {X, Y} stays unless some conditioning set S (excluding X, Y) makes them independent.
inline Skeleton build_skeleton(IndependenceOracle& oracle, const std::vector<std::string>& vars,
                               const SkeletonOptions& opt = {}) {
  if (vars.size() < 2) throw InputError("structure learning needs at least two variables");
  Skeleton sk{Pog(vars), {}};
  const NodeTable& t = sk.pog.table();
  const std::size_t n = vars.size();
  const NodeSet all = t.all();
  const std::size_t hi = opt.max_cond.value_or(n);
  for (std::size_t x = 0; x < n; ++x)
    for (std::size_t y = x + 1; y < n; ++y) sk.pog.add_edge(x, y);

  if (!opt.neighbourhood) {
    for (std::size_t x = 0; x < n; ++x)
      for (std::size_t y = x + 1; y < n; ++y)
        for (NodeSet s : detail::subsets_by_size(all & ~node_bit(x) & ~node_bit(y), 0, hi)) {
          if (oracle.independent(detail::pair_query(t, x, y, s))) {
            sk.pog.remove_edge(x, y);
            sk.sepsets[{x, y}] = s;
            break;
          }
        }
    return sk;
  }

  for (std::size_t d = 0; d <= std::min(hi, n - 2); ++d) {
    for (std::size_t x = 0; x < n; ++x)
      for (std::size_t y = x + 1; y < n; ++y) {
        if (!sk.pog.adjacent(x, y)) continue;
        bool removed = false;
        for (std::size_t side : {x, y}) {
          NodeSet pool = sk.pog.neighbours(side) & ~node_bit(x) & ~node_bit(y);
          for (NodeSet s : detail::subsets_by_size(pool, d, d)) {
            if (oracle.independent(detail::pair_query(t, x, y, s))) {
              sk.pog.remove_edge(x, y);
              sk.sepsets[{x, y}] = s;
              removed = true;
              break;
            }
          }
          if (removed) break;
        }
      }
  }
  return sk;
}

/// An unbridged triple i - j - k examined for a head-to-head meeting at j (i < k).
struct ColliderRecord {
  std::size_t i, j, k;
  bool collider;
};

enum class ColliderCheck { automatic, literal, sepset };

/// Orients i -> j <- k for unbridged pairs where every tested set containing j leaves i, k dependent
/// (literal check), or where j is outside the recorded separating set (sepset shortcut).
inline Pog orient_colliders(const Skeleton& sk, IndependenceOracle& oracle, std::vector<ColliderRecord>& log,
                            ColliderCheck mode = ColliderCheck::automatic, std::optional<std::size_t> max_cond = {}) {
  if (mode == ColliderCheck::automatic) mode = oracle.exact() ? ColliderCheck::literal : ColliderCheck::sepset;
  Pog pog = sk.pog;
  const NodeTable& t = pog.table();
  const NodeSet all = t.all();
  const std::size_t hi = max_cond.value_or(pog.size());
  log.clear();
  for (std::size_t j = 0; j < pog.size(); ++j) {
    const auto nb = members(sk.pog.neighbours(j));
    for (std::size_t a = 0; a < nb.size(); ++a)
      for (std::size_t b = a + 1; b < nb.size(); ++b) {
        const std::size_t i = nb[a], k = nb[b];
        if (sk.pog.adjacent(i, k)) continue;
        bool collider = true;
        if (mode == ColliderCheck::sepset) {
          auto it = sk.sepsets.find({i, k});
          collider = it == sk.sepsets.end() || !in_set(it->second, j);
        } else {
          NodeSet rest = all & ~node_bit(i) & ~node_bit(k) & ~node_bit(j);
          const auto tested = hi == 0 ? std::vector<NodeSet>{} : detail::subsets_by_size(rest, 0, hi - 1);
          for (NodeSet s : tested) {
            if (oracle.independent(detail::pair_query(t, i, k, s | node_bit(j)))) {
              collider = false;
              break;
            }
          }
        }
        log.push_back({i, j, k, collider});
        if (collider) {
          pog.orient(i, j);
          pog.orient(k, j);
        }
      }
  }
  return pog;
}

enum class Rule { tail_to_neighbour, descendant, collider_neighbour };

inline const char* to_string(Rule r) {
  switch (r) {
    case Rule::tail_to_neighbour: return "tail-to-neighbour";
    case Rule::descendant: return "descendant";
    case Rule::collider_neighbour: return "collider-neighbour";
  }
  return "?";
}

/// Which nodes X_l qualify for the collider-neighbour rule around a collider X_i -> X_j <- X_k.
/// linked_to_both: X_l is adjacent to X_i and X_k, and the listed edge subsets are unoriented.
/// literal: only the listed edge subsets are checked; with X_l adjacent to a single parent this can
/// orient against the generating dag when the rule runs before tail-to-neighbour propagation.
enum class NeighbourPremise { linked_to_both, literal };

namespace detail {

inline bool apply_tail_to_neighbour(Pog& g) {
  bool any = false;
  for (bool changed = true; changed;) {
    changed = false;
    for (std::size_t j = 0; j < g.size(); ++j) {
      const NodeSet nb = g.neighbours(j);
      for (std::size_t i : members(nb)) {
        if (!g.oriented(i, j)) continue;
        for (std::size_t k : members(nb)) {
          if (k == i || g.adjacent(i, k) || !g.unoriented(k, j)) continue;
          g.orient(j, k);
          changed = any = true;
        }
      }
    }
  }
  return any;
}

/// Descendants of a along oriented links only.
inline NodeSet oriented_descendants(const Pog& g, std::size_t a) {
  NodeSet seen = 0, frontier = g.heads_from(a);
  while (frontier) {
    std::size_t v = static_cast<std::size_t>(std::countr_zero(frontier));
    frontier &= frontier - 1;
    if (in_set(seen, v)) continue;
    seen |= node_bit(v);
    frontier |= g.heads_from(v) & ~seen;
  }
  return seen;
}

inline bool apply_descendant_rule(Pog& g) {
  bool any = false;
  for (bool changed = true; changed;) {
    changed = false;
    for (auto [a, b] : g.edges()) {
      if (!g.unoriented(a, b)) continue;
      if (in_set(oriented_descendants(g, a), b)) g.orient(a, b);
      else if (in_set(oriented_descendants(g, b), a)) g.orient(b, a);
      else continue;
      changed = any = true;
    }
  }
  return any;
}

inline bool apply_collider_neighbour_rule(Pog& g, const std::vector<ColliderRecord>& log, NeighbourPremise premise) {
  bool any = false;
  for (bool changed = true; changed;) {
    changed = false;
    for (const auto& r : log) {
      if (!r.collider) continue;
      for (std::size_t l = 0; l < g.size(); ++l) {
        if (l == r.i || l == r.j || l == r.k) continue;
        if (!g.unoriented(r.j, l)) continue;
        if (premise == NeighbourPremise::linked_to_both && !(g.adjacent(r.i, l) && g.adjacent(r.k, l))) continue;
        if (!g.unoriented(r.i, l) && !g.unoriented(r.k, l)) continue;
        g.orient(l, r.j);
        changed = any = true;
      }
    }
  }
  return any;
}

}  // namespace detail

/// Applies one rule repeatedly until it stops changing the graph; returns whether anything changed.
inline bool propagate(Pog& g, Rule rule, const std::vector<ColliderRecord>& log = {},
                      NeighbourPremise premise = NeighbourPremise::linked_to_both) {
  switch (rule) {
    case Rule::tail_to_neighbour: return detail::apply_tail_to_neighbour(g);
    case Rule::descendant: return detail::apply_descendant_rule(g);
    case Rule::collider_neighbour: return detail::apply_collider_neighbour_rule(g, log, premise);
  }
  return false;
}

/// Fixpoint of the rules in the given order, restarting from the first rule after any later rule fires.
inline Pog close_orientations(Pog g, const std::vector<ColliderRecord>& log,
                              const std::vector<Rule>& order = {Rule::tail_to_neighbour, Rule::descendant, Rule::collider_neighbour},
                              NeighbourPremise premise = NeighbourPremise::linked_to_both) {
  for (bool again = true; again;) {
    again = false;
    for (std::size_t r = 0; r < order.size(); ++r) {
      if (propagate(g, order[r], log, premise) && r > 0) {
        again = true;
        break;
      }
    }
  }
  return g;
}

enum class FailureKind { double_orientation, oriented_cycle, forbidden_collider };

inline const char* to_string(FailureKind k) {
  switch (k) {
    case FailureKind::double_orientation: return "double-orientation";
    case FailureKind::oriented_cycle: return "oriented-cycle";
    case FailureKind::forbidden_collider: return "forbidden-collider";
  }
  return "?";
}

struct Failure {
  FailureKind kind;
  std::vector<std::string> witness;
};

inline std::optional<Failure> detect_failure(const Pog& g, const std::vector<ColliderRecord>& log) {
  for (auto [a, b] : g.edges())
    if (g.doubly_oriented(a, b)) return Failure{FailureKind::double_orientation, {g.name(a), g.name(b)}};
  if (auto cyc = oriented_cycle(g)) {
    Failure f{FailureKind::oriented_cycle, {}};
    for (std::size_t v : *cyc) f.witness.push_back(g.name(v));
    return f;
  }
  for (const auto& r : log)
    if (!r.collider && g.oriented(r.i, r.j) && g.oriented(r.k, r.j))
      return Failure{FailureKind::forbidden_collider, {g.name(r.i), g.name(r.j), g.name(r.k)}};
  return std::nullopt;
}

/// All dags reachable by repeatedly removing a legitimately removable node and orienting its
/// remaining edges towards it. Output is sorted and duplicate-free.
inline std::vector<Dag> enumerate_dags(const Pog& g) {
  for (auto [a, b] : g.edges())
    if (g.doubly_oriented(a, b)) throw GraphError("cannot enumerate dags of a doubly oriented pog");
  if (oriented_cycle(g)) throw GraphError("cannot enumerate dags of a pog with an oriented cycle");
  const std::size_t n = g.size();
  std::set<std::vector<NodeSet>> seen;
  std::set<Dag> found;
  // parents[v] collects the marks made so far; slot n holds the remaining-node mask.
  std::vector<NodeSet> state(n + 1, 0);
  state[n] = g.table().all();

  auto removable = [&](std::size_t v, NodeSet remaining) {
    const NodeSet nb = g.neighbours(v) & remaining;
    for (std::size_t u : members(nb))
      if (g.oriented(v, u)) return false;
    for (std::size_t u : members(nb))
      for (std::size_t w : members(nb)) {
        if (w <= u) continue;
        if ((g.unoriented(u, v) || g.unoriented(w, v)) && !g.adjacent(u, w)) return false;
      }
    return true;
  };

  std::function<void()> search = [&]() {
    if (!seen.insert(state).second) return;
    const NodeSet remaining = state[n];
    if (!remaining) {
      Dag d(g.nodes());
      for (std::size_t v = 0; v < n; ++v)
        for (std::size_t u : members(state[v])) d.add_edge(u, v);
      found.insert(std::move(d));
      return;
    }
    for (std::size_t v : members(remaining)) {
      if (!removable(v, remaining)) continue;
      const NodeSet saved = state[v];
      state[v] |= g.neighbours(v) & remaining;
      state[n] = remaining & ~node_bit(v);
      search();
      state[n] = remaining;
      state[v] = saved;
    }
  };
  search();
  return {found.begin(), found.end()};
}

struct LearnOptions {
  SkeletonOptions skeleton;
  ColliderCheck colliders = ColliderCheck::automatic;
  NeighbourPremise premise = NeighbourPremise::linked_to_both;
  bool enumerate = true;
};

struct LearnResult {
  Pog pog;
  std::vector<Dag> dags;
  std::optional<Failure> failure;
  std::map<std::pair<std::size_t, std::size_t>, NodeSet> sepsets;
  std::vector<ColliderRecord> colliders;
  std::vector<AuditEntry> audit;
};

inline LearnResult learn(IndependenceOracle& oracle, const LearnOptions& opt = {}) {
  LearnResult res;
  Skeleton sk = build_skeleton(oracle, oracle.variables(), opt.skeleton);
  res.sepsets = sk.sepsets;
  Pog oriented = orient_colliders(sk, oracle, res.colliders, opt.colliders, opt.skeleton.max_cond);
  res.pog = close_orientations(std::move(oriented), res.colliders, {Rule::tail_to_neighbour, Rule::descendant, Rule::collider_neighbour}, opt.premise);
  res.failure = detect_failure(res.pog, res.colliders);
  if (!res.failure && opt.enumerate) res.dags = enumerate_dags(res.pog);
  res.audit = oracle.audit();
  return res;
}

}  // namespace dsbn
