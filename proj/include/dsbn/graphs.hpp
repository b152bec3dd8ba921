#pragma once

// Dags, partially oriented graphs (pogs), d-separation and p-d-separation.
//
// Nodes are addressed by index (insertion order) and by name. Node sets are
// 64-bit masks, so a graph holds at most 64 nodes.

#include <algorithm>
#include <bit>
#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "dsbn/error.hpp"

namespace dsbn {

using NodeSet = std::uint64_t;
inline constexpr std::size_t kMaxNodes = 64;

inline constexpr NodeSet node_bit(std::size_t i) { return NodeSet{1} << i; }
inline constexpr bool in_set(NodeSet s, std::size_t i) { return (s >> i) & 1u; }
inline std::size_t set_size(NodeSet s) { return static_cast<std::size_t>(std::popcount(s)); }

inline std::vector<std::size_t> members(NodeSet s) {
  std::vector<std::size_t> out;
  while (s) {
    out.push_back(static_cast<std::size_t>(std::countr_zero(s)));
    s &= s - 1;
  }
  return out;
}

/// Name <-> index table shared by Dag and Pog.
class NodeTable {
 public:
  NodeTable() = default;
  explicit NodeTable(const std::vector<std::string>& names) {
    for (const auto& n : names) add(n);
  }

  std::size_t add(const std::string& name) {
    if (name.empty()) throw GraphError("empty node name");
    if (index_.count(name)) throw GraphError("duplicate node '" + name + "'");
    if (names_.size() == kMaxNodes) throw GraphError("graphs are limited to 64 nodes");
    index_.emplace(name, names_.size());
    names_.push_back(name);
    return names_.size() - 1;
  }
  std::size_t size() const { return names_.size(); }
  const std::vector<std::string>& names() const { return names_; }
  const std::string& name(std::size_t i) const { return names_.at(i); }
  bool has(std::string_view name) const { return index_.find(name) != index_.end(); }
  std::size_t index(std::string_view name) const {
    auto it = index_.find(name);
    if (it == index_.end()) throw GraphError("unknown node '" + std::string(name) + "'");
    return it->second;
  }
  NodeSet set_of(const std::vector<std::string>& names) const {
    NodeSet s = 0;
    for (const auto& n : names) s |= node_bit(index(n));
    return s;
  }
  std::vector<std::string> names_of(NodeSet s) const {
    std::vector<std::string> out;
    for (std::size_t i : members(s)) out.push_back(names_[i]);
    return out;
  }
  NodeSet all() const { return names_.size() == 64 ? ~NodeSet{0} : node_bit(names_.size()) - 1; }

  friend bool operator==(const NodeTable& a, const NodeTable& b) { return a.names_ == b.names_; }

 private:
  std::vector<std::string> names_;
  std::map<std::string, std::size_t, std::less<>> index_;
};

// ---------------------------------------------------------------------------
// Pog

class Pog {
 public:
  Pog() = default;
  explicit Pog(std::vector<std::string> names) : nodes_(names), adj_(names.size(), 0), out_(names.size(), 0) {}

  const NodeTable& table() const { return nodes_; }
  std::size_t size() const { return nodes_.size(); }
  const std::vector<std::string>& nodes() const { return nodes_.names(); }
  const std::string& name(std::size_t i) const { return nodes_.name(i); }
  std::size_t index(std::string_view n) const { return nodes_.index(n); }

  void add_edge(std::size_t a, std::size_t b) {
    check_pair(a, b);
    adj_[a] |= node_bit(b);
    adj_[b] |= node_bit(a);
  }
  void remove_edge(std::size_t a, std::size_t b) {
    check_pair(a, b);
    adj_[a] &= ~node_bit(b);
    adj_[b] &= ~node_bit(a);
    out_[a] &= ~node_bit(b);
    out_[b] &= ~node_bit(a);
  }
  /// Adds (a, b) to the orientation of edge {a, b}.
  void orient(std::size_t a, std::size_t b) {
    if (!adjacent(a, b)) throw GraphError("cannot orient missing edge " + name(a) + "-" + name(b));
    out_[a] |= node_bit(b);
  }
  void clear_orientation(std::size_t a, std::size_t b) {
    out_[a] &= ~node_bit(b);
    out_[b] &= ~node_bit(a);
  }

  bool adjacent(std::size_t a, std::size_t b) const { return in_set(adj_[a], b); }
  NodeSet neighbours(std::size_t a) const { return adj_[a]; }
  /// (a, b) is in the orientation of {a, b}.
  bool oriented(std::size_t a, std::size_t b) const { return in_set(out_[a], b); }
  bool unoriented(std::size_t a, std::size_t b) const { return adjacent(a, b) && !oriented(a, b) && !oriented(b, a); }
  bool doubly_oriented(std::size_t a, std::size_t b) const { return oriented(a, b) && oriented(b, a); }
  NodeSet heads_from(std::size_t a) const { return out_[a]; }

  std::vector<std::pair<std::size_t, std::size_t>> edges() const {
    std::vector<std::pair<std::size_t, std::size_t>> out;
    for (std::size_t a = 0; a < size(); ++a)
      for (std::size_t b : members(adj_[a]))
        if (a < b) out.emplace_back(a, b);
    return out;
  }
  std::size_t edge_count() const {
    std::size_t c = 0;
    for (NodeSet s : adj_) c += set_size(s);
    return c / 2;
  }
  std::size_t orientation_count() const {
    std::size_t c = 0;
    for (NodeSet s : out_) c += set_size(s);
    return c;
  }
  bool same_skeleton(const Pog& o) const { return nodes_ == o.nodes_ && adj_ == o.adj_; }

  friend bool operator==(const Pog& a, const Pog& b) {
    return a.nodes_ == b.nodes_ && a.adj_ == b.adj_ && a.out_ == b.out_;
  }

 private:
  void check_pair(std::size_t a, std::size_t b) const {
    if (a >= size() || b >= size()) throw GraphError("node index out of range");
    if (a == b) throw GraphError("self-loop on " + name(a));
  }

  NodeTable nodes_;
  std::vector<NodeSet> adj_;
  std::vector<NodeSet> out_;
};

// ---------------------------------------------------------------------------
// Dag

class Dag {
 public:
  Dag() = default;
  explicit Dag(std::vector<std::string> names) : nodes_(names), parents_(names.size(), 0), children_(names.size(), 0) {}

  const NodeTable& table() const { return nodes_; }
  std::size_t size() const { return nodes_.size(); }
  const std::vector<std::string>& nodes() const { return nodes_.names(); }
  const std::string& name(std::size_t i) const { return nodes_.name(i); }
  std::size_t index(std::string_view n) const { return nodes_.index(n); }

  /// Adds a -> b; rejects self-loops, a second edge on the pair and cycles.
  void add_edge(std::size_t a, std::size_t b) {
    if (a >= size() || b >= size()) throw GraphError("node index out of range");
    if (a == b) throw GraphError("self-loop on " + name(a));
    if (adjacent(a, b)) throw GraphError("duplicate edge between " + name(a) + " and " + name(b));
    if (in_set(descendants(b), a)) throw GraphError("edge " + name(a) + "->" + name(b) + " closes a cycle");
    children_[a] |= node_bit(b);
    parents_[b] |= node_bit(a);
  }
  void add_edge(std::string_view a, std::string_view b) { add_edge(index(a), index(b)); }

  bool has_edge(std::size_t a, std::size_t b) const { return in_set(children_[a], b); }
  bool adjacent(std::size_t a, std::size_t b) const { return has_edge(a, b) || has_edge(b, a); }
  NodeSet parents(std::size_t i) const { return parents_[i]; }
  NodeSet children(std::size_t i) const { return children_[i]; }

  /// Proper descendants.
  NodeSet descendants(std::size_t i) const {
    NodeSet seen = 0, frontier = children_[i];
    while (frontier) {
      std::size_t v = static_cast<std::size_t>(std::countr_zero(frontier));
      frontier &= frontier - 1;
      if (in_set(seen, v)) continue;
      seen |= node_bit(v);
      frontier |= children_[v] & ~seen;
    }
    return seen;
  }
  /// The set itself plus all its ancestors.
  NodeSet ancestral_closure(NodeSet s) const {
    NodeSet seen = 0, frontier = s;
    while (frontier) {
      std::size_t v = static_cast<std::size_t>(std::countr_zero(frontier));
      frontier &= frontier - 1;
      if (in_set(seen, v)) continue;
      seen |= node_bit(v);
      frontier |= parents_[v] & ~seen;
    }
    return seen;
  }

  std::vector<std::size_t> topological_order() const {
    std::vector<std::size_t> order;
    NodeSet placed = 0;
    while (order.size() < size()) {
      for (std::size_t v = 0; v < size(); ++v) {
        if (in_set(placed, v) || (parents_[v] & ~placed)) continue;
        order.push_back(v);
        placed |= node_bit(v);
        break;
      }
    }
    return order;
  }

  std::vector<std::pair<std::size_t, std::size_t>> edges() const {
    std::vector<std::pair<std::size_t, std::size_t>> out;
    for (std::size_t a = 0; a < size(); ++a)
      for (std::size_t b : members(children_[a])) out.emplace_back(a, b);
    return out;
  }
  std::size_t edge_count() const {
    std::size_t c = 0;
    for (NodeSet s : children_) c += set_size(s);
    return c;
  }

  Pog to_pog() const {
    Pog p(nodes());
    for (auto [a, b] : edges()) {
      p.add_edge(a, b);
      p.orient(a, b);
    }
    return p;
  }

  friend bool operator==(const Dag& a, const Dag& b) { return a.nodes_ == b.nodes_ && a.children_ == b.children_; }
  friend bool operator<(const Dag& a, const Dag& b) { return a.children_ < b.children_; }

 private:
  NodeTable nodes_;
  std::vector<NodeSet> parents_;
  std::vector<NodeSet> children_;
};

/// Copy of `dag` without the edges leaving n.
inline Dag remove_outgoing(const Dag& dag, std::size_t n) {
  Dag out(dag.nodes());
  for (auto [a, b] : dag.edges())
    if (a != n) out.add_edge(a, b);
  return out;
}

// ---------------------------------------------------------------------------
// Separation queries

struct SeparationQuery {
  NodeSet j = 0, k = 0, l = 0;
};

inline void check_query(const SeparationQuery& q, std::size_t nodes) {
  NodeSet all = nodes == 64 ? ~NodeSet{0} : node_bit(nodes) - 1;
  if (!q.j || !q.k) throw GraphError("separation query needs nonempty J and K");
  if ((q.j & q.k) || (q.j & q.l) || (q.k & q.l)) throw GraphError("separation query sets must be disjoint");
  if ((q.j | q.k | q.l) & ~all) throw GraphError("separation query names a node outside the graph");
}

inline SeparationQuery make_query(const NodeTable& t, const std::vector<std::string>& j, const std::vector<std::string>& k,
                                  const std::vector<std::string>& l) {
  SeparationQuery q{t.set_of(j), t.set_of(k), t.set_of(l)};
  check_query(q, t.size());
  return q;
}

enum class DsepMethod { search, enumeration };

namespace detail {

/// Reachability over (node, direction) states; the descendant clause uses the ancestral closure of L.
inline NodeSet dsep_reachable(const Dag& dag, std::size_t source, NodeSet l) {
  const NodeSet anc_l = dag.ancestral_closure(l);
  // State bit 2*v: arrived at v from a child (travelling up); 2*v+1: from a parent (travelling down).
  std::vector<char> seen(2 * dag.size(), 0);
  std::vector<std::pair<std::size_t, bool>> stack{{source, true}};
  NodeSet reached = 0;
  while (!stack.empty()) {
    auto [v, up] = stack.back();
    stack.pop_back();
    char& s = seen[2 * v + (up ? 0 : 1)];
    if (s) continue;
    s = 1;
    if (!in_set(l, v)) reached |= node_bit(v);
    if (up) {
      if (in_set(l, v)) continue;
      for (std::size_t p : members(dag.parents(v))) stack.emplace_back(p, true);
      for (std::size_t c : members(dag.children(v))) stack.emplace_back(c, false);
    } else {
      if (!in_set(l, v))
        for (std::size_t c : members(dag.children(v))) stack.emplace_back(c, false);
      if (in_set(anc_l, v))
        for (std::size_t p : members(dag.parents(v))) stack.emplace_back(p, true);
    }
  }
  return reached;
}

/// Depth-first search over node-simple trails, checking each inner node as the trail grows.
/// `inner_ok(prev, cur, next)` decides whether cur may sit between prev and next; `step_ok` filters links.
template <class InnerOk, class StepOk>
std::optional<std::vector<std::size_t>> find_trail(const std::function<NodeSet(std::size_t)>& nbrs,
                                                   std::size_t from, NodeSet targets, InnerOk inner_ok, StepOk step_ok) {
  std::vector<std::size_t> path{from};
  std::optional<std::vector<std::size_t>> found;
  std::function<bool(NodeSet)> dfs = [&](NodeSet visited) -> bool {
    std::size_t cur = path.back();
    for (std::size_t next : members(nbrs(cur) & ~visited)) {
      if (!step_ok(path, next)) continue;
      if (path.size() >= 2 && !inner_ok(path[path.size() - 2], cur, next)) continue;
      path.push_back(next);
      if (in_set(targets, next)) {
        found = path;
        return true;
      }
      if (dfs(visited | node_bit(next))) return true;
      path.pop_back();
    }
    return false;
  };
  dfs(node_bit(from));
  return found;
}

}  // namespace detail

/// An active simple trail from a node of J to a node of K given L, if one exists (literal trail check).
inline std::optional<std::vector<std::size_t>> active_trail(const Dag& dag, const SeparationQuery& q) {
  check_query(q, dag.size());
  std::vector<NodeSet> desc_or_self(dag.size());
  for (std::size_t v = 0; v < dag.size(); ++v) desc_or_self[v] = dag.descendants(v) | node_bit(v);
  auto nbrs = [&](std::size_t v) { return dag.parents(v) | dag.children(v); };
  auto inner_ok = [&](std::size_t prev, std::size_t cur, std::size_t next) {
    bool collider = dag.has_edge(prev, cur) && dag.has_edge(next, cur);
    return collider ? (desc_or_self[cur] & q.l) != 0 : !in_set(q.l, cur);
  };
  auto step_ok = [](const std::vector<std::size_t>&, std::size_t) { return true; };
  for (std::size_t a : members(q.j)) {
    auto t = detail::find_trail(nbrs, a, q.k, inner_ok, step_ok);
    if (t) return t;
  }
  return std::nullopt;
}

inline bool d_separated(const Dag& dag, const SeparationQuery& q, DsepMethod method = DsepMethod::search) {
  check_query(q, dag.size());
  if (method == DsepMethod::enumeration) return !active_trail(dag, q).has_value();
  for (std::size_t a : members(q.j))
    if (detail::dsep_reachable(dag, a, q.l) & q.k) return false;
  return true;
}

// ---------------------------------------------------------------------------
// Pog structure

struct AdjacentEdges {
  std::size_t shared;
  bool bridged;
  bool first_head_to_neighbour;
  bool first_tail_to_neighbour;
  bool second_head_to_neighbour;
  bool second_tail_to_neighbour;
};

/// Relation of two edges sharing exactly one node; each edge is given by its endpoints.
inline AdjacentEdges classify_adjacent_edges(const Pog& g, std::pair<std::size_t, std::size_t> e1,
                                             std::pair<std::size_t, std::size_t> e2) {
  if (!g.adjacent(e1.first, e1.second) || !g.adjacent(e2.first, e2.second)) throw GraphError("edge not in graph");
  std::size_t shared, o1, o2;
  auto shares = [](auto e, std::size_t v) { return e.first == v || e.second == v; };
  auto other = [](auto e, std::size_t v) { return e.first == v ? e.second : e.first; };
  if (shares(e2, e1.first) && !shares(e2, e1.second)) shared = e1.first;
  else if (shares(e2, e1.second) && !shares(e2, e1.first)) shared = e1.second;
  else throw GraphError("edges are not neighbouring");
  o1 = other(e1, shared);
  o2 = other(e2, shared);
  return {shared,         g.adjacent(o1, o2),         g.oriented(o1, shared),
          g.oriented(shared, o1), g.oriented(o2, shared), g.oriented(shared, o2)};
}

/// Which bridged pairs of consecutive links disqualify a p-trail. `literal` rejects every bridged
/// pair; `unoriented` only pairs with an unoriented member. The literal reading disagrees with
/// d-separation on fully oriented graphs (N0->N2<-N4, N4->N1, N2->N1, L = {N2}: the only active
/// trail N0 N2 N4 N1 has a bridged pair at N4).
enum class Minimality { unoriented, literal };

inline bool breaks_minimality(const Pog& g, std::size_t a, std::size_t b, std::size_t c, Minimality rule) {
  if (!g.adjacent(a, c)) return false;
  return rule == Minimality::literal || g.unoriented(a, b) || g.unoriented(b, c);
}

/// Nodes reachable from n by a minimal p-trail whose oriented links all contain the forward
/// orientation, excluding nodes m with (m, n) oriented.
inline NodeSet p_descendants(const Pog& g, std::size_t n, Minimality rule = Minimality::unoriented) {
  NodeSet reached = 0;
  std::vector<std::size_t> path{n};
  std::function<void(NodeSet)> dfs = [&](NodeSet visited) {
    std::size_t cur = path.back();
    for (std::size_t next : members(g.neighbours(cur) & ~visited)) {
      if (!g.unoriented(cur, next) && !g.oriented(cur, next)) continue;
      if (path.size() >= 2 && breaks_minimality(g, path[path.size() - 2], cur, next, rule)) continue;
      reached |= node_bit(next);
      path.push_back(next);
      dfs(visited | node_bit(next));
      path.pop_back();
    }
  };
  dfs(node_bit(n));
  for (std::size_t m : members(reached))
    if (g.oriented(m, n)) reached &= ~node_bit(m);
  return reached;
}

/// p-d-separation with p-descendant sets computed once per graph.
class PSeparation {
 public:
  explicit PSeparation(Pog g, Minimality rule = Minimality::unoriented)
      : g_(std::move(g)), rule_(rule), desc_or_self_(g_.size()) {
    for (std::size_t v = 0; v < g_.size(); ++v) desc_or_self_[v] = p_descendants(g_, v, rule_) | node_bit(v);
  }

  std::optional<std::vector<std::size_t>> active_trail(const SeparationQuery& q) const {
    check_query(q, g_.size());
    auto nbrs = [&](std::size_t v) { return g_.neighbours(v); };
    auto inner_ok = [&](std::size_t prev, std::size_t cur, std::size_t next) {
      bool collider = g_.oriented(prev, cur) && g_.oriented(next, cur);
      return collider ? (desc_or_self_[cur] & q.l) != 0 : !in_set(q.l, cur);
    };
    auto step_ok = [&](const std::vector<std::size_t>& path, std::size_t next) {
      return path.size() < 2 || !breaks_minimality(g_, path[path.size() - 2], path.back(), next, rule_);
    };
    for (std::size_t a : members(q.j)) {
      auto t = detail::find_trail(nbrs, a, q.k, inner_ok, step_ok);
      if (t) return t;
    }
    return std::nullopt;
  }
  bool separated(const SeparationQuery& q) const { return !active_trail(q).has_value(); }

 private:
  Pog g_;
  Minimality rule_;
  std::vector<NodeSet> desc_or_self_;
};

inline bool p_d_separated(const Pog& g, const SeparationQuery& q, Minimality rule = Minimality::unoriented) {
  return PSeparation(g, rule).separated(q);
}

/// Cycle among oriented links (doubly oriented links count both ways), as a node sequence.
inline std::optional<std::vector<std::size_t>> oriented_cycle(const Pog& g) {
  const std::size_t n = g.size();
  std::vector<int> colour(n, 0);
  std::vector<std::size_t> stack;
  std::optional<std::vector<std::size_t>> found;
  std::function<bool(std::size_t, std::optional<std::size_t>)> visit = [&](std::size_t v,
                                                                        std::optional<std::size_t> via) -> bool {
    colour[v] = 1;
    stack.push_back(v);
    for (std::size_t w : members(g.heads_from(v))) {
      // A doubly oriented link is not by itself a cycle; that failure is reported separately.
      if (via && *via == w && g.doubly_oriented(v, w)) continue;
      if (colour[w] == 1) {
        auto it = std::find(stack.begin(), stack.end(), w);
        found = std::vector<std::size_t>(it, stack.end());
        return true;
      }
      if (colour[w] == 0 && visit(w, v)) return true;
    }
    stack.pop_back();
    colour[v] = 2;
    return false;
  };
  for (std::size_t v = 0; v < n; ++v)
    if (colour[v] == 0 && visit(v, std::nullopt)) return found;
  return std::nullopt;
}

// ---------------------------------------------------------------------------
// DOT

inline std::string to_dot(const Pog& g, const std::string& name = "G") {
  std::ostringstream os;
  os << "digraph " << name << " {\n";
  for (const auto& n : g.nodes()) os << "  \"" << n << "\";\n";
  for (auto [a, b] : g.edges()) {
    os << "  \"" << g.name(a) << "\" -> \"" << g.name(b) << "\"";
    if (g.doubly_oriented(a, b)) os << " [dir=both]";
    else if (g.oriented(b, a)) os << " [dir=back]";
    else if (!g.oriented(a, b)) os << " [dir=none]";
    os << ";\n";
  }
  os << "}\n";
  return os.str();
}

inline std::string to_dot(const Dag& d, const std::string& name = "G") { return to_dot(d.to_pog(), name); }

}  // namespace dsbn
