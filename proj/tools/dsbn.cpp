// Command-line front end: learn, dsep, pdsep, sample, joint, test, combine.
// Exit status: 0 success, 1 structural failure reported by learn, 2 input error.

#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <memory>
#include <sstream>

#include "dsbn/json_io.hpp"
#include "dsbn/learner.hpp"
#include "dsbn/netio.hpp"

using namespace dsbn;

namespace {

constexpr int kOk = 0, kStructural = 1, kInput = 2;

json read_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open " + path);
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    throw InputError(path + ": " + e.what());
  }
}

CsvData read_csv_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open " + path);
  return read_csv(in);
}

void emit(const std::string& path, const std::string& text) {
  if (path.empty() || path == "-") {
    std::cout << text;
    return;
  }
  std::ofstream out(path);
  if (!out) throw InputError("cannot write " + path);
  out << text;
}

std::vector<std::string> split_names(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  for (std::string item; std::getline(ss, item, ',');)
    if (!item.empty()) out.push_back(item);
  return out;
}

struct LearnArgs {
  std::string oracle = "stat", data, net, mass, graph, relation, out, dot;
  double alpha = 0.05;
  int max_cond = -1;
  bool enumerate = true, neighbourhood = false, literal_premise = false;
};

int run_learn(const LearnArgs& a) {
  std::unique_ptr<IndependenceOracle> oracle;
  if (a.oracle == "stat") {
    if (a.data.empty()) throw InputError("--oracle stat needs --data");
    auto csv = read_csv_file(a.data);
    oracle = std::make_unique<StatOracle>(estimate(csv.dataset), csv.dataset.size(), a.alpha);
  } else if (a.oracle == "exact") {
    if (!a.net.empty()) {
      oracle = std::make_unique<ExactOracle<Rational>>(network_from_json<Rational>(read_json(a.net)).joint());
    } else if (!a.mass.empty()) {
      Universe u;
      oracle = std::make_unique<ExactOracle<Rational>>(mass_from_json<Rational>(read_json(a.mass), u));
    } else {
      throw InputError("--oracle exact needs --net or --mass");
    }
  } else if (a.oracle == "dsep") {
    if (a.graph.empty()) throw InputError("--oracle dsep needs --graph");
    oracle = std::make_unique<DsepOracle>(dag_from_json(read_json(a.graph)));
  } else if (a.oracle == "relation") {
    if (a.relation.empty()) throw InputError("--oracle relation needs --relation");
    oracle = relation_from_json(read_json(a.relation));
  } else {
    throw InputError("unknown oracle '" + a.oracle + "'");
  }

  LearnOptions opt;
  if (a.max_cond >= 0) opt.skeleton.max_cond = static_cast<std::size_t>(a.max_cond);
  opt.skeleton.neighbourhood = a.neighbourhood;
  opt.enumerate = a.enumerate;
  if (a.literal_premise) opt.premise = NeighbourPremise::literal;
  const LearnResult r = learn(*oracle, opt);

  emit(a.out, to_json(r).dump(2) + "\n");
  if (!a.dot.empty()) emit(a.dot, to_dot(r.pog, "learned"));
  if (r.failure) {
    std::cerr << "structural failure: " << to_string(r.failure->kind);
    for (const auto& w : r.failure->witness) std::cerr << ' ' << w;
    std::cerr << '\n';
    return kStructural;
  }
  return kOk;
}

struct SepArgs {
  std::string graph, j, k, l;
  bool literal = false;
};

int run_sep(const SepArgs& a, bool pog) {
  const json g = read_json(a.graph);
  json out;
  if (pog) {
    Pog p = pog_from_json(g);
    auto q = make_query(p.table(), split_names(a.j), split_names(a.k), split_names(a.l));
    out["separated"] = p_d_separated(p, q, a.literal ? Minimality::literal : Minimality::unoriented);
  } else {
    Dag d = dag_from_json(g);
    auto q = make_query(d.table(), split_names(a.j), split_names(a.k), split_names(a.l));
    auto trail = active_trail(d, q);
    out["separated"] = !trail.has_value();
    if (trail) {
      json names = json::array();
      for (std::size_t v : *trail) names.push_back(d.name(v));
      out["active_trail"] = names;
    }
  }
  std::cout << out.dump() << '\n';
  return kOk;
}

int run_sample(const std::string& net, std::size_t n, std::uint64_t seed, const std::string& out) {
  auto network = network_from_json<Rational>(read_json(net));
  std::ostringstream os;
  write_csv(os, sample(network, n, seed));
  emit(out, os.str());
  return kOk;
}

int run_joint(const std::string& net, const std::string& out, bool real) {
  const json j = read_json(net);
  emit(out, (real ? to_json(network_from_json<double>(j).joint()) : to_json(network_from_json<Rational>(j).joint())).dump(2) + "\n");
  return kOk;
}

struct TestArgs {
  std::string data, kind = "marginal";
  std::vector<std::string> vars;
  double alpha = 0.05, negligible = 0.01;
};

int run_test(const TestArgs& a) {
  auto csv = read_csv_file(a.data);
  const auto m = estimate(csv.dataset);
  const std::size_t n = csv.dataset.size();
  std::vector<std::vector<std::string>> groups;
  for (const auto& g : a.vars) groups.push_back(split_names(g));
  const Scope& s = m.scope();
  TestOutcome t;
  if (a.kind == "marginal") {
    if (groups.size() != 2) throw InputError("--kind marginal takes --vars J K");
    IndependenceQuery::make(groups[0], groups[1]);
    t = chi2_marginal(m, n, s.select(groups[0]), s.select(groups[1]), a.alpha);
  } else if (a.kind == "conditional") {
    if (groups.size() != 3) throw InputError("--kind conditional takes --vars J K L (J independent of K given L)");
    IndependenceQuery::make(groups[0], groups[1], groups[2]);
    t = chi2_conditional(m, n, s.select(groups[0]), s.select(groups[2]), s.select(groups[1]), a.alpha);
  } else if (a.kind == "compress") {
    if (groups.size() != 1) throw InputError("--kind compress takes --vars X");
    t = compressibility_index(m, s.select(groups[0]), n, a.alpha, a.negligible);
  } else {
    throw InputError("unknown test kind '" + a.kind + "'");
  }
  json out = to_json(t);
  out["n"] = n;
  std::cout << out.dump(2) << '\n';
  return kOk;
}

template <Scalar T>
std::string combined(const std::string& a, const std::string& b) {
  Universe u;
  auto m1 = mass_from_json<T>(read_json(a), u);
  auto m2 = mass_from_json<T>(read_json(b), u);
  return to_json(combine(m1, m2)).dump(2) + "\n";
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Belief-function networks: structure learning, separation queries, sampling and tests"};
  app.require_subcommand(1);

  LearnArgs la;
  auto* learn_cmd = app.add_subcommand("learn", "Learn a partially oriented graph and its dags from an independence oracle");
  learn_cmd->add_option("--oracle", la.oracle, "stat | exact | dsep | relation")
      ->check(CLI::IsMember({"stat", "exact", "dsep", "relation"}));
  learn_cmd->add_option("--data", la.data, "CSV dataset (stat oracle)");
  learn_cmd->add_option("--net", la.net, "network JSON (exact oracle on its joint)");
  learn_cmd->add_option("--mass", la.mass, "joint mass JSON (exact oracle)");
  learn_cmd->add_option("--graph", la.graph, "dag JSON (dsep oracle)");
  learn_cmd->add_option("--relation", la.relation, "listed independence statements (relation oracle)");
  learn_cmd->add_option("--alpha", la.alpha, "significance level");
  learn_cmd->add_option("--max-cond", la.max_cond, "largest conditioning set size");
  learn_cmd->add_flag("--neighbourhood", la.neighbourhood, "draw conditioning sets from current neighbours only");
  learn_cmd->add_flag("--literal-premise", la.literal_premise, "collider-neighbour rule without the two-parent adjacency check");
  learn_cmd->add_flag("--enumerate,!--no-enumerate", la.enumerate, "enumerate compatible dags (default on)");
  learn_cmd->add_option("--out", la.out, "result JSON (default stdout)");
  learn_cmd->add_option("--dot", la.dot, "write the learned graph as DOT");

  SepArgs sa;
  auto* dsep_cmd = app.add_subcommand("dsep", "d-separation query on a dag");
  auto* pdsep_cmd = app.add_subcommand("pdsep", "p-d-separation query on a partially oriented graph");
  for (auto* c : {dsep_cmd, pdsep_cmd}) {
    c->add_option("--graph", sa.graph, "graph JSON")->required();
    c->add_option("--j", sa.j, "comma-separated nodes")->required();
    c->add_option("--k", sa.k, "comma-separated nodes")->required();
    c->add_option("--l", sa.l, "comma-separated conditioning nodes");
  }
  pdsep_cmd->add_flag("--literal-minimality", sa.literal, "any bridged pair of links breaks trail minimality");

  std::string net, out;
  std::size_t n = 1000;
  std::uint64_t seed = 0;
  bool real = false;
  auto* sample_cmd = app.add_subcommand("sample", "Draw set-valued records from a network joint");
  sample_cmd->add_option("--net", net, "network JSON")->required();
  sample_cmd->add_option("-n", n, "record count");
  sample_cmd->add_option("--seed", seed, "random seed");
  sample_cmd->add_option("--out", out, "CSV output (default stdout)");

  auto* joint_cmd = app.add_subcommand("joint", "Combine the network conditionals into the joint mass");
  joint_cmd->add_option("--net", net, "network JSON")->required();
  joint_cmd->add_option("--out", out, "mass JSON output (default stdout)");
  joint_cmd->add_flag("--float", real, "floating-point arithmetic instead of exact rationals");

  TestArgs ta;
  auto* test_cmd = app.add_subcommand("test", "Independence or compressibility test on a dataset");
  test_cmd->add_option("--data", ta.data, "CSV dataset")->required();
  test_cmd->add_option("--kind", ta.kind, "marginal | conditional | compress")
      ->check(CLI::IsMember({"marginal", "conditional", "compress"}));
  test_cmd->add_option("--vars", ta.vars, "one argument per group, names joined by ','")->required();
  test_cmd->add_option("--alpha", ta.alpha, "significance level");
  test_cmd->add_option("--negligible", ta.negligible, "compressibility threshold");

  std::vector<std::string> masses;
  auto* combine_cmd = app.add_subcommand("combine", "Dempster combination of two mass files");
  combine_cmd->add_option("masses", masses, "two mass JSON files")->required()->expected(2);
  combine_cmd->add_option("--out", out, "mass JSON output (default stdout)");
  combine_cmd->add_flag("--float", real, "floating-point arithmetic instead of exact rationals");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kInput;
  }

  try {
    if (*learn_cmd) return run_learn(la);
    if (*dsep_cmd) return run_sep(sa, false);
    if (*pdsep_cmd) return run_sep(sa, true);
    if (*sample_cmd) return run_sample(net, n, seed, out);
    if (*joint_cmd) return run_joint(net, out, real);
    if (*test_cmd) return run_test(ta);
    if (*combine_cmd) {
      emit(out, real ? combined<double>(masses[0], masses[1]) : combined<Rational>(masses[0], masses[1]));
      return kOk;
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kInput;
  }
  return kOk;
}
