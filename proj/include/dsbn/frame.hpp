#pragma once

// Variables, scopes and sets of configurations.
//
// A scope is an ordered set of variables; the order is the global ordinal of
// each variable, so every scope over the same variables enumerates its
// configuration space identically. Configurations are mixed-radix indices with
// the first variable most significant. A ConfigSet is a bitset over that
// enumeration.

#include <boost/dynamic_bitset.hpp>
#include <boost/functional/hash.hpp>

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "dsbn/error.hpp"

namespace dsbn {

inline constexpr std::size_t kMaxConfigurations = std::size_t{1} << 24;

struct Domain {
  std::string name;
  std::vector<std::string> values;

  std::size_t size() const { return values.size(); }
  std::optional<std::size_t> index_of(std::string_view v) const {
    auto it = std::find(values.begin(), values.end(), v);
    if (it == values.end()) return std::nullopt;
    return static_cast<std::size_t>(it - values.begin());
  }
  friend bool operator==(const Domain&, const Domain&) = default;
};

/// A named variable with a fixed position in the global variable ordering.
class Variable {
 public:
  Variable(std::size_t ordinal, std::string name, std::vector<std::string> values) {
    if (values.empty()) throw InputError("variable '" + name + "' has an empty domain");
    auto sorted = values;
    std::sort(sorted.begin(), sorted.end());
    if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end())
      throw InputError("variable '" + name + "' has repeated domain values");
    data_ = std::make_shared<const Data>(Data{ordinal, name, Domain{std::move(name), std::move(values)}});
  }

  std::size_t ordinal() const { return data_->ordinal; }
  const std::string& name() const { return data_->name; }
  const Domain& domain() const { return data_->domain; }
  std::size_t size() const { return data_->domain.size(); }

  std::size_t value_index(std::string_view v) const {
    auto i = data_->domain.index_of(v);
    if (!i) throw InputError("value '" + std::string(v) + "' not in domain of " + name());
    return *i;
  }

  friend bool operator==(const Variable& a, const Variable& b) {
    return a.data_ == b.data_ || (a.ordinal() == b.ordinal() && a.name() == b.name());
  }
  friend bool operator<(const Variable& a, const Variable& b) { return a.ordinal() < b.ordinal(); }

 private:
  struct Data {
    std::size_t ordinal;
    std::string name;
    Domain domain;
  };
  std::shared_ptr<const Data> data_;
};

/// Canonically ordered variable list with its mixed-radix layout.
class Scope {
 public:
  Scope() : Scope(std::vector<Variable>{}) {}

  explicit Scope(std::vector<Variable> vars) {
    std::sort(vars.begin(), vars.end());
    for (std::size_t i = 1; i < vars.size(); ++i) {
      if (vars[i - 1].ordinal() == vars[i].ordinal()) {
        if (vars[i - 1].name() != vars[i].name())
          throw ScopeError("variables '" + vars[i - 1].name() + "' and '" + vars[i].name() +
                           "' share an ordinal");
        throw ScopeError("variable '" + vars[i].name() + "' repeated in scope");
      }
    }
    auto impl = std::make_shared<Impl>();
    impl->strides.assign(vars.size(), 1);
    std::size_t count = 1;
    for (std::size_t i = vars.size(); i-- > 0;) {
      impl->strides[i] = count;
      count *= vars[i].size();
      if (count > kMaxConfigurations)
        throw ScopeError("scope exceeds the supported configuration-space size (2^24)");
    }
    impl->count = count;
    impl->vars = std::move(vars);
    impl_ = std::move(impl);
  }

  const std::vector<Variable>& vars() const { return impl_->vars; }
  std::size_t arity() const { return impl_->vars.size(); }
  bool empty() const { return impl_->vars.empty(); }
  std::size_t config_count() const { return impl_->count; }
  std::size_t stride(std::size_t pos) const { return impl_->strides[pos]; }

  std::optional<std::size_t> position(const Variable& v) const {
    auto it = std::lower_bound(vars().begin(), vars().end(), v);
    if (it == vars().end() || !(*it == v)) return std::nullopt;
    return static_cast<std::size_t>(it - vars().begin());
  }
  std::optional<std::size_t> position(std::string_view name) const {
    for (std::size_t i = 0; i < arity(); ++i)
      if (vars()[i].name() == name) return i;
    return std::nullopt;
  }
  const Variable& at(std::string_view name) const {
    auto p = position(name);
    if (!p) throw ScopeError("variable '" + std::string(name) + "' not in scope " + to_string());
    return vars()[*p];
  }

  bool contains(const Variable& v) const { return position(v).has_value(); }
  bool contains(const Scope& sub) const {
    return std::all_of(sub.vars().begin(), sub.vars().end(), [&](const Variable& v) { return contains(v); });
  }

  Scope unite(const Scope& other) const {
    std::vector<Variable> vs = vars();
    for (const auto& v : other.vars()) {
      auto same_ordinal = std::find_if(vs.begin(), vs.end(), [&](const Variable& w) { return w.ordinal() == v.ordinal(); });
      if (same_ordinal == vs.end()) vs.push_back(v);
      else if (!(*same_ordinal == v)) throw ScopeError("conflicting variables at ordinal " + std::to_string(v.ordinal()));
    }
    return Scope(std::move(vs));
  }
  Scope intersect(const Scope& other) const {
    std::vector<Variable> vs;
    for (const auto& v : vars())
      if (other.contains(v)) vs.push_back(v);
    return Scope(std::move(vs));
  }
  Scope minus(const Scope& other) const {
    std::vector<Variable> vs;
    for (const auto& v : vars())
      if (!other.contains(v)) vs.push_back(v);
    return Scope(std::move(vs));
  }
  /// Sub-scope selected by variable names.
  Scope select(const std::vector<std::string>& names) const {
    std::vector<Variable> vs;
    for (const auto& n : names) vs.push_back(at(n));
    return Scope(std::move(vs));
  }
  std::vector<std::string> names() const {
    std::vector<std::string> out;
    for (const auto& v : vars()) out.push_back(v.name());
    return out;
  }

  std::size_t digit(std::size_t index, std::size_t pos) const {
    return (index / stride(pos)) % vars()[pos].size();
  }
  std::vector<std::size_t> decode(std::size_t index) const {
    std::vector<std::size_t> d(arity());
    for (std::size_t i = 0; i < arity(); ++i) d[i] = digit(index, i);
    return d;
  }
  std::size_t encode(std::span<const std::size_t> digits) const {
    if (digits.size() != arity()) throw ScopeError("configuration arity mismatch");
    std::size_t idx = 0;
    for (std::size_t i = 0; i < arity(); ++i) {
      if (digits[i] >= vars()[i].size()) throw ScopeError("value index out of domain for " + vars()[i].name());
      idx += digits[i] * stride(i);
    }
    return idx;
  }

  std::string to_string() const {
    std::string s = "(";
    for (std::size_t i = 0; i < arity(); ++i) s += (i ? "," : "") + vars()[i].name();
    return s + ")";
  }

  friend bool operator==(const Scope& a, const Scope& b) {
    return a.impl_ == b.impl_ || a.vars() == b.vars();
  }
  /// Orders scopes by their ordinal sequences.
  friend bool operator<(const Scope& a, const Scope& b) {
    return std::lexicographical_compare(a.vars().begin(), a.vars().end(), b.vars().begin(), b.vars().end());
  }

 private:
  struct Impl {
    std::vector<Variable> vars;
    std::vector<std::size_t> strides;
    std::size_t count = 1;
  };
  std::shared_ptr<const Impl> impl_;
};

/// Registry assigning ordinals in order of first declaration.
class Universe {
 public:
  const Variable& add(const std::string& name, std::vector<std::string> values) {
    if (auto it = by_name_.find(name); it != by_name_.end()) {
      const Variable& v = vars_[it->second];
      if (v.domain().values != values) throw InputError("variable '" + name + "' redeclared with a different domain");
      return v;
    }
    vars_.emplace_back(vars_.size(), name, std::move(values));
    by_name_.emplace(name, vars_.size() - 1);
    return vars_.back();
  }
  bool has(std::string_view name) const { return by_name_.count(std::string(name)) > 0; }
  const Variable& at(std::string_view name) const {
    auto it = by_name_.find(std::string(name));
    if (it == by_name_.end()) throw InputError("unknown variable '" + std::string(name) + "'");
    return vars_[it->second];
  }
  Scope scope(const std::vector<std::string>& names) const {
    std::vector<Variable> vs;
    for (const auto& n : names) vs.push_back(at(n));
    return Scope(std::move(vs));
  }
  Scope all() const { return Scope(vars_); }
  const std::vector<Variable>& vars() const { return vars_; }

 private:
  std::vector<Variable> vars_;
  std::map<std::string, std::size_t> by_name_;
};

/// Maps configuration indices of a scope onto a sub-scope.
class Projector {
 public:
  Projector(const Scope& from, const Scope& to) {
    if (!from.contains(to)) throw ScopeError("scope " + to.to_string() + " is not contained in " + from.to_string());
    for (std::size_t i = 0; i < from.arity(); ++i) {
      if (auto j = to.position(from.vars()[i])) terms_.push_back({from.stride(i), from.vars()[i].size(), to.stride(*j)});
    }
  }
  std::size_t operator()(std::size_t index) const {
    std::size_t out = 0;
    for (const auto& t : terms_) out += ((index / t.from_stride) % t.radix) * t.to_stride;
    return out;
  }

 private:
  struct Term {
    std::size_t from_stride, radix, to_stride;
  };
  std::vector<Term> terms_;
};

class ConfigSet {
 public:
  using Bits = boost::dynamic_bitset<std::uint64_t>;

  ConfigSet() : ConfigSet(Scope{}) {}
  explicit ConfigSet(Scope scope) : scope_(std::move(scope)), bits_(scope_.config_count()) {}
  ConfigSet(Scope scope, Bits bits) : scope_(std::move(scope)), bits_(std::move(bits)) {
    if (bits_.size() != scope_.config_count()) throw ScopeError("bitset size does not match scope");
  }

  static ConfigSet empty(const Scope& s) { return ConfigSet(s); }
  static ConfigSet full(const Scope& s) {
    ConfigSet c(s);
    c.bits_.set();
    return c;
  }
  static ConfigSet from_indices(const Scope& s, std::span<const std::size_t> indices) {
    ConfigSet c(s);
    for (auto i : indices) {
      if (i >= s.config_count()) throw ScopeError("configuration index out of range");
      c.bits_.set(i);
    }
    return c;
  }
  /// Each configuration is a list of value indices in scope order.
  static ConfigSet from_configs(const Scope& s, const std::vector<std::vector<std::size_t>>& configs) {
    ConfigSet c(s);
    for (const auto& cfg : configs) c.bits_.set(s.encode(cfg));
    return c;
  }
  /// Each configuration is a list of value names in scope order.
  static ConfigSet from_values(const Scope& s, const std::vector<std::vector<std::string>>& configs) {
    ConfigSet c(s);
    for (const auto& cfg : configs) {
      if (cfg.size() != s.arity()) throw ScopeError("configuration arity mismatch");
      std::vector<std::size_t> d(cfg.size());
      for (std::size_t i = 0; i < cfg.size(); ++i) d[i] = s.vars()[i].value_index(cfg[i]);
      c.bits_.set(s.encode(d));
    }
    return c;
  }

  const Scope& scope() const { return scope_; }
  const Bits& bits() const { return bits_; }

  std::size_t size() const { return bits_.count(); }
  bool is_empty() const { return bits_.none(); }
  bool is_full() const { return bits_.all(); }
  bool contains(std::size_t index) const { return index < bits_.size() && bits_.test(index); }

  bool is_subset_of(const ConfigSet& o) const {
    check_same(o);
    return bits_.is_subset_of(o.bits_);
  }
  bool intersects(const ConfigSet& o) const {
    check_same(o);
    return bits_.intersects(o.bits_);
  }

  std::vector<std::size_t> indices() const {
    std::vector<std::size_t> out;
    out.reserve(size());
    for (auto i = bits_.find_first(); i != Bits::npos; i = bits_.find_next(i)) out.push_back(i);
    return out;
  }
  template <class F>
  void for_each(F&& f) const {
    for (auto i = bits_.find_first(); i != Bits::npos; i = bits_.find_next(i)) f(i);
  }

  ConfigSet complement() const { return ConfigSet(scope_, ~bits_); }
  friend ConfigSet operator&(const ConfigSet& a, const ConfigSet& b) {
    a.check_same(b);
    return ConfigSet(a.scope_, a.bits_ & b.bits_);
  }
  friend ConfigSet operator|(const ConfigSet& a, const ConfigSet& b) {
    a.check_same(b);
    return ConfigSet(a.scope_, a.bits_ | b.bits_);
  }
  friend ConfigSet operator-(const ConfigSet& a, const ConfigSet& b) {
    a.check_same(b);
    return ConfigSet(a.scope_, a.bits_ - b.bits_);
  }

  friend bool operator==(const ConfigSet& a, const ConfigSet& b) {
    return a.scope_ == b.scope_ && a.bits_ == b.bits_;
  }
  friend bool operator<(const ConfigSet& a, const ConfigSet& b) {
    if (!(a.scope_ == b.scope_)) return a.scope_ < b.scope_;
    return a.bits_ < b.bits_;
  }

  std::size_t hash() const {
    std::size_t h = 0;
    for (const auto& v : scope_.vars()) boost::hash_combine(h, v.ordinal());
    std::vector<std::uint64_t> blocks(bits_.num_blocks());
    boost::to_block_range(bits_, blocks.begin());
    boost::hash_range(h, blocks.begin(), blocks.end());
    return h;
  }

  /// "{(a,x),(b,y)}" with members in index order.
  std::string to_string() const {
    std::string s = "{";
    bool first = true;
    for_each([&](std::size_t idx) {
      s += first ? "" : ",";
      first = false;
      s += "(";
      for (std::size_t p = 0; p < scope_.arity(); ++p)
        s += (p ? "," : "") + scope_.vars()[p].domain().values[scope_.digit(idx, p)];
      s += ")";
    });
    return s + "}";
  }

 private:
  void check_same(const ConfigSet& o) const {
    if (!(scope_ == o.scope_)) throw ScopeError("set operation across scopes " + scope_.to_string() + " and " + o.scope_.to_string());
  }

  Scope scope_;
  Bits bits_;
};

struct ConfigSetHash {
  std::size_t operator()(const ConfigSet& c) const { return c.hash(); }
};

/// Restriction of every member of `a` to the variables of `sub`.
inline ConfigSet project_set(const ConfigSet& a, const Scope& sub) {
  if (a.scope() == sub) return a;
  Projector proj(a.scope(), sub);
  ConfigSet::Bits bits(sub.config_count());
  a.for_each([&](std::size_t i) { bits.set(proj(i)); });
  return ConfigSet(sub, std::move(bits));
}

/// Cylinder B x (product of the domains added by `super`).
inline ConfigSet empty_extend_set(const ConfigSet& b, const Scope& super) {
  if (b.scope() == super) return b;
  if (!super.contains(b.scope()))
    throw ScopeError("scope " + b.scope().to_string() + " is not contained in " + super.to_string());
  const Scope& sub = b.scope();
  std::vector<std::size_t> sub_to_super(sub.arity());
  for (std::size_t j = 0; j < sub.arity(); ++j) sub_to_super[j] = super.stride(*super.position(sub.vars()[j]));
  std::vector<std::size_t> free_strides, free_radix;
  for (std::size_t i = 0; i < super.arity(); ++i) {
    if (!sub.contains(super.vars()[i])) {
      free_strides.push_back(super.stride(i));
      free_radix.push_back(super.vars()[i].size());
    }
  }
  ConfigSet::Bits bits(super.config_count());
  std::vector<std::size_t> odo(free_radix.size());
  b.for_each([&](std::size_t idx) {
    std::size_t base = 0;
    for (std::size_t j = 0; j < sub.arity(); ++j) base += sub.digit(idx, j) * sub_to_super[j];
    std::fill(odo.begin(), odo.end(), 0);
    while (true) {
      std::size_t off = base;
      for (std::size_t k = 0; k < odo.size(); ++k) off += odo[k] * free_strides[k];
      bits.set(off);
      std::size_t k = odo.size();
      while (k > 0 && ++odo[k - 1] == free_radix[k - 1]) odo[--k] = 0;
      if (k == 0) break;
    }
  });
  return ConfigSet(super, std::move(bits));
}

/// Product of single-variable factors, one per scope variable, in scope order.
inline ConfigSet product_set(const Scope& scope, const std::vector<ConfigSet>& factors) {
  if (factors.size() != scope.arity()) throw ScopeError("one factor per variable required");
  ConfigSet acc = ConfigSet::full(scope);
  for (std::size_t i = 0; i < factors.size(); ++i) {
    if (factors[i].scope().arity() != 1 || !(factors[i].scope().vars()[0] == scope.vars()[i]))
      throw ScopeError("factor " + std::to_string(i) + " is not over " + scope.vars()[i].name());
    acc = acc & empty_extend_set(factors[i], scope);
  }
  return acc;
}

/// Per-variable factors F_i with a = F_1 x ... x F_k, or nullopt when a is not a product set.
inline std::optional<std::vector<ConfigSet>> factorize_set(const ConfigSet& a) {
  if (a.is_empty()) return std::nullopt;
  const Scope& s = a.scope();
  std::vector<ConfigSet> factors;
  std::size_t product = 1;
  for (const auto& v : s.vars()) {
    factors.push_back(project_set(a, Scope({v})));
    product *= factors.back().size();
  }
  if (product != a.size()) return std::nullopt;
  return factors;
}

}  // namespace dsbn

template <>
struct std::hash<dsbn::ConfigSet> {
  std::size_t operator()(const dsbn::ConfigSet& c) const { return c.hash(); }
};
