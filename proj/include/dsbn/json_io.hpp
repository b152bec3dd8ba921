#pragma once

// JSON and CSV readers/writers for sets, masses, networks, graphs and learn results.

#include <json.hpp>

#include <algorithm>
#include <istream>
#include <map>
#include <memory>
#include <optional>
#include <ostream>
#include <sstream>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "dsbn/error.hpp"
#include "dsbn/evidence.hpp"
#include "dsbn/frame.hpp"
#include "dsbn/graphs.hpp"
#include "dsbn/independence.hpp"
#include "dsbn/learner.hpp"
#include "dsbn/netio.hpp"

namespace dsbn {

using json = nlohmann::ordered_json;

namespace detail {
inline const json& field(const json& j, const char* key) {
  if (!j.is_object() || !j.contains(key)) throw InputError(std::string("missing field '") + key + "'");
  return j.at(key);
}
inline std::string as_string(const json& j, const char* what) {
  if (!j.is_string()) throw InputError(std::string(what) + " must be a string");
  return j.get<std::string>();
}
inline std::vector<std::string> as_strings(const json& j, const char* what) {
  if (!j.is_array()) throw InputError(std::string(what) + " must be a list of strings");
  std::vector<std::string> out;
  for (const auto& e : j) out.push_back(as_string(e, what));
  return out;
}
}  // namespace detail

inline json to_json(const Variable& v) { return {{"name", v.name()}, {"domain", v.domain().values}}; }

// ---------------------------------------------------------------------------
// ConfigSet: product form {var: [values]} or extensional form [{var: value}, ...]

inline json to_json(const ConfigSet& a) {
  const Scope& s = a.scope();
  if (auto f = factorize_set(a)) {
    json out = json::object();
    for (std::size_t i = 0; i < s.arity(); ++i) {
      json vals = json::array();
      for (std::size_t idx : (*f)[i].indices()) vals.push_back(s.vars()[i].domain().values[idx]);
      out[s.vars()[i].name()] = vals;
    }
    return out;
  }
  json out = json::array();
  for (std::size_t idx : a.indices()) {
    json cfg = json::object();
    auto digits = s.decode(idx);
    for (std::size_t i = 0; i < s.arity(); ++i) cfg[s.vars()[i].name()] = s.vars()[i].domain().values[digits[i]];
    out.push_back(cfg);
  }
  return out;
}

/// Product form may omit a variable (meaning its full domain) or give "*".
inline ConfigSet config_set_from_json(const json& j, const Scope& s) {
  if (j.is_object()) {
    for (const auto& [name, _] : j.items())
      if (!s.position(name)) throw InputError("set names variable '" + name + "' outside its scope");
    std::vector<ConfigSet> factors;
    for (const auto& v : s.vars()) {
      Scope one({v});
      if (!j.contains(v.name()) || j.at(v.name()) == "*") {
        factors.push_back(ConfigSet::full(one));
        continue;
      }
      std::vector<std::vector<std::string>> cfgs;
      for (const auto& val : detail::as_strings(j.at(v.name()), "product-form values")) cfgs.push_back({val});
      factors.push_back(ConfigSet::from_values(one, cfgs));
    }
    return product_set(s, factors);
  }
  if (j.is_array()) {
    std::vector<std::vector<std::string>> cfgs;
    for (const auto& c : j) {
      if (!c.is_object() || c.size() != s.arity()) throw InputError("configuration must name every scope variable once");
      std::vector<std::string> cfg;
      for (const auto& v : s.vars()) cfg.push_back(detail::as_string(detail::field(c, v.name().c_str()), "value"));
      cfgs.push_back(std::move(cfg));
    }
    return ConfigSet::from_values(s, cfgs);
  }
  throw InputError("set must be a product-form object or a list of configurations");
}

// ---------------------------------------------------------------------------
// Masses

template <Scalar T>
json scalar_to_json(const T& v) {
  if constexpr (Arith<T>::exact) return Arith<T>::to_string(v);
  else return v;
}

template <Scalar T>
T scalar_from_json(const json& j) {
  if (j.is_string()) return parse_scalar<T>(j.get<std::string>());
  if (j.is_number()) return parse_scalar<T>(j.dump());
  throw InputError("mass must be a number or a \"p/q\" string");
}

template <Scalar T>
json to_json(const MassAssignment<T>& m) {
  json scope = json::array();
  for (const auto& v : m.scope().vars()) scope.push_back(to_json(v));
  json focal = json::array();
  for (const auto& [a, v] : m.focal()) focal.push_back({{"set", to_json(a)}, {"mass", scalar_to_json(v)}});
  return {{"scope", scope}, {"focal", focal}, {"kind", to_string(m.kind())}};
}

/// Scope entries are {name, domain} (declared into `u`) or bare names already in `u`.
inline Scope scope_from_json(const json& j, Universe& u) {
  if (!j.is_array()) throw InputError("scope must be a list");
  std::vector<std::string> names;
  for (const auto& e : j) {
    if (e.is_string()) {
      names.push_back(e.get<std::string>());
      u.at(names.back());
    } else {
      names.push_back(detail::as_string(detail::field(e, "name"), "variable name"));
      u.add(names.back(), detail::as_strings(detail::field(e, "domain"), "domain"));
    }
  }
  return u.scope(names);
}

/// Reads a mass and checks it is proper or pseudo; a stated "kind" must agree.
template <Scalar T>
MassAssignment<T> mass_from_json(const json& j, Universe& u) {
  const Scope s = scope_from_json(detail::field(j, "scope"), u);
  const json& focal = detail::field(j, "focal");
  if (!focal.is_array()) throw InputError("focal must be a list");
  FocalMap<T> f;
  for (const auto& e : focal) f[config_set_from_json(detail::field(e, "set"), s)] += scalar_from_json<T>(detail::field(e, "mass"));
  auto m = validate<T>(s, std::move(f));
  if (!m.valid()) throw InputError("mass assignment is neither proper nor pseudo");
  if (j.contains("kind") && detail::as_string(j.at("kind"), "kind") != to_string(m.kind()))
    throw InputError("declared kind '" + j.at("kind").get<std::string>() + "' but the masses are " + to_string(m.kind()));
  return m;
}

// ---------------------------------------------------------------------------
// Graphs: {"nodes": [...], "edges": [{"a", "b", "orient": [] | ["ab"] | ["ba"] | ["ab", "ba"]}]}

inline json to_json(const Pog& g) {
  json edges = json::array();
  for (auto [a, b] : g.edges()) {
    json orient = json::array();
    if (g.oriented(a, b)) orient.push_back("ab");
    if (g.oriented(b, a)) orient.push_back("ba");
    edges.push_back({{"a", g.name(a)}, {"b", g.name(b)}, {"orient", orient}});
  }
  return {{"nodes", g.nodes()}, {"edges", edges}};
}

inline json to_json(const Dag& d) {
  json edges = json::array();
  for (auto [a, b] : d.edges()) edges.push_back({{"a", d.name(a)}, {"b", d.name(b)}, {"orient", {"ab"}}});
  return {{"nodes", d.nodes()}, {"edges", edges}};
}

inline Pog pog_from_json(const json& j) {
  Pog g(detail::as_strings(detail::field(j, "nodes"), "nodes"));
  const json& edges = detail::field(j, "edges");
  if (!edges.is_array()) throw InputError("edges must be a list");
  for (const auto& e : edges) {
    const std::size_t a = g.index(detail::as_string(detail::field(e, "a"), "edge end"));
    const std::size_t b = g.index(detail::as_string(detail::field(e, "b"), "edge end"));
    if (g.adjacent(a, b)) throw InputError("edge " + g.name(a) + "-" + g.name(b) + " listed twice");
    g.add_edge(a, b);
    if (!e.contains("orient")) continue;
    for (const auto& o : detail::as_strings(e.at("orient"), "orient")) {
      if (o == "ab") g.orient(a, b);
      else if (o == "ba") g.orient(b, a);
      else throw InputError("orientation must be \"ab\" or \"ba\", got '" + o + "'");
    }
  }
  return g;
}

/// Every edge must carry exactly one orientation (a missing "orient" means a -> b).
inline Dag dag_from_json(const json& j) {
  Dag d(detail::as_strings(detail::field(j, "nodes"), "nodes"));
  const json& edges = detail::field(j, "edges");
  if (!edges.is_array()) throw InputError("edges must be a list");
  for (const auto& e : edges) {
    std::string a = detail::as_string(detail::field(e, "a"), "edge end");
    std::string b = detail::as_string(detail::field(e, "b"), "edge end");
    if (e.contains("orient")) {
      auto o = detail::as_strings(e.at("orient"), "orient");
      if (o.size() != 1 || (o[0] != "ab" && o[0] != "ba")) throw InputError("dag edges need exactly one orientation");
      if (o[0] == "ba") std::swap(a, b);
    }
    d.add_edge(a, b);
  }
  return d;
}

// ---------------------------------------------------------------------------
// Networks: {"variables": [{name, domain}], "nodes": [{"var", "parents", "conditional"}]}

template <Scalar T>
json to_json(const DsNetwork<T>& net) {
  json vars = json::array();
  for (const auto& name : net.dag().nodes()) vars.push_back(to_json(net.universe().at(name)));
  json nodes = json::array();
  for (std::size_t i = 0; i < net.dag().size(); ++i)
    nodes.push_back({{"var", net.dag().name(i)},
                     {"parents", net.dag().table().names_of(net.dag().parents(i))},
                     {"conditional", to_json(net.conditional(i))}});
  return {{"variables", vars}, {"nodes", nodes}};
}

template <Scalar T>
DsNetwork<T> network_from_json(const json& j) {
  Universe u;
  const json& vars = detail::field(j, "variables");
  if (!vars.is_array()) throw InputError("variables must be a list");
  for (const auto& v : vars)
    u.add(detail::as_string(detail::field(v, "name"), "variable name"), detail::as_strings(detail::field(v, "domain"), "domain"));
  const json& nodes = detail::field(j, "nodes");
  if (!nodes.is_array()) throw InputError("nodes must be a list");
  std::vector<std::string> names;
  for (const auto& n : nodes) {
    names.push_back(detail::as_string(detail::field(n, "var"), "node variable"));
    u.at(names.back());
  }
  Dag d(names);
  std::vector<MassAssignment<T>> conds;
  for (const auto& n : nodes) {
    const std::string child = n.at("var").get<std::string>();
    if (n.contains("parents"))
      for (const auto& p : detail::as_strings(n.at("parents"), "parents")) d.add_edge(p, child);
    conds.push_back(mass_from_json<T>(detail::field(n, "conditional"), u));
  }
  return DsNetwork<T>(std::move(u), std::move(d), std::move(conds));
}

// ---------------------------------------------------------------------------
// Test outcomes and learn results

inline json to_json(const TestOutcome& t) {
  return {{"statistic", t.statistic},
          {"df", t.df},
          {"alpha", t.alpha},
          {"decision", t.independent ? "independent" : "dependent"},
          {"reason", to_string(t.reason)}};
}

inline json to_json(const IndependenceQuery& q) { return {{"j", q.j}, {"k", q.k}, {"l", q.l}}; }

inline json to_json(const LearnResult& r) {
  const NodeTable& t = r.pog.table();
  json dags = json::array();
  for (const auto& d : r.dags) dags.push_back(to_json(d));
  json failure = nullptr;
  if (r.failure) failure = {{"kind", to_string(r.failure->kind)}, {"witness", r.failure->witness}};
  json sepsets = json::array();
  for (const auto& [pair, s] : r.sepsets)
    sepsets.push_back({{"pair", {t.name(pair.first), t.name(pair.second)}}, {"set", t.names_of(s)}});
  json colliders = json::array();
  for (const auto& c : r.colliders)
    colliders.push_back({{"triple", {t.name(c.i), t.name(c.j), t.name(c.k)}}, {"collider", c.collider}});
  json audit = json::array();
  for (const auto& a : r.audit) audit.push_back({{"query", to_json(a.query)}, {"outcome", to_json(a.outcome)}});
  return {{"pog", to_json(r.pog)},
          {"dags", dags},
          {"failure", failure},
          {"sepsets", sepsets},
          {"colliders", colliders},
          {"audit", audit}};
}

/// {"variables": [...], "independent": [{"j", "k", "l"}]}: the listed statements hold, with J and K
/// interchangeable, and every other statement fails.
inline std::unique_ptr<RelationOracle> relation_from_json(const json& j) {
  auto vars = detail::as_strings(detail::field(j, "variables"), "variables");
  const json& list = detail::field(j, "independent");
  if (!list.is_array()) throw InputError("independent must be a list");
  std::set<IndependenceQuery> holds;
  for (const auto& e : list) {
    std::vector<std::string> l;
    if (e.contains("l")) l = detail::as_strings(e.at("l"), "l");
    auto q = IndependenceQuery::make(detail::as_strings(detail::field(e, "j"), "j"), detail::as_strings(detail::field(e, "k"), "k"), l);
    for (const auto* part : {&q.j, &q.k, &q.l})
      for (const auto& name : *part)
        if (std::find(vars.begin(), vars.end(), name) == vars.end()) throw InputError("statement names unknown variable '" + name + "'");
    holds.insert(q);
    holds.insert(IndependenceQuery{q.k, q.j, q.l});
  }
  return std::make_unique<RelationOracle>(std::move(vars), [holds](const IndependenceQuery& q) { return holds.count(q) > 0; });
}

// ---------------------------------------------------------------------------
// Dataset CSV: header of variable names, cells "v1|v2" or "*"

namespace detail {
inline std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  return s.substr(b, s.find_last_not_of(" \t\r") - b + 1);
}
inline std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string cur;
  std::istringstream in(s);
  while (std::getline(in, cur, sep)) out.push_back(trim(cur));
  if (!s.empty() && s.back() == sep) out.push_back("");
  return out;
}
}  // namespace detail

struct CsvData {
  Universe universe;
  Dataset dataset;
};

/// Domains come from `declared` when given, otherwise from the order values first appear.
inline CsvData read_csv(std::istream& in, const std::optional<Universe>& declared = std::nullopt) {
  std::string line;
  if (!std::getline(in, line)) throw InputError("empty CSV input");
  const auto header = detail::split(line, ',');
  for (const auto& h : header)
    if (h.empty()) throw InputError("empty column name in CSV header");
  std::vector<std::vector<std::vector<std::string>>> rows;
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (detail::trim(line).empty()) continue;
    const auto cells = detail::split(line, ',');
    if (cells.size() != header.size())
      throw InputError("CSV line " + std::to_string(lineno) + " has " + std::to_string(cells.size()) + " cells, expected " +
                       std::to_string(header.size()));
    std::vector<std::vector<std::string>> row;
    for (const auto& c : cells) {
      if (c.empty()) throw InputError("empty cell on CSV line " + std::to_string(lineno));
      if (c == "*") {
        row.push_back({});
        continue;
      }
      auto vals = detail::split(c, '|');
      for (const auto& v : vals)
        if (v.empty() || v == "*") throw InputError("malformed label '" + c + "' on CSV line " + std::to_string(lineno));
      row.push_back(std::move(vals));
    }
    rows.push_back(std::move(row));
  }

  CsvData out;
  if (declared) {
    out.universe = *declared;
    for (const auto& h : header) out.universe.at(h);
  } else {
    for (std::size_t c = 0; c < header.size(); ++c) {
      std::vector<std::string> domain;
      for (const auto& r : rows)
        for (const auto& v : r[c])
          if (std::find(domain.begin(), domain.end(), v) == domain.end()) domain.push_back(v);
      if (domain.empty()) throw InputError("column '" + header[c] + "' never names a value");
      out.universe.add(header[c], domain);
    }
  }
  const Scope s = out.universe.scope(header);
  out.dataset.scope = s;
  for (const auto& r : rows) {
    std::vector<ConfigSet> labels;
    for (const auto& v : s.vars()) {
      const std::size_t c = static_cast<std::size_t>(std::find(header.begin(), header.end(), v.name()) - header.begin());
      Scope one({v});
      if (r[c].empty()) {
        labels.push_back(ConfigSet::full(one));
        continue;
      }
      std::vector<std::vector<std::string>> cfgs;
      for (const auto& val : r[c]) cfgs.push_back({val});
      labels.push_back(ConfigSet::from_values(one, cfgs));
    }
    out.dataset.add(std::move(labels));
  }
  return out;
}

inline void write_csv(std::ostream& os, const Dataset& ds) {
  const auto& vars = ds.scope.vars();
  for (std::size_t i = 0; i < vars.size(); ++i) os << (i ? "," : "") << vars[i].name();
  os << '\n';
  for (const auto& r : ds.records) {
    for (std::size_t i = 0; i < r.size(); ++i) {
      if (i) os << ',';
      if (r[i].is_full()) {
        os << '*';
        continue;
      }
      bool first = true;
      for (std::size_t idx : r[i].indices()) {
        os << (first ? "" : "|") << vars[i].domain().values[idx];
        first = false;
      }
    }
    os << '\n';
  }
}

}  // namespace dsbn
