// Command-line front end: graph generation, relation checks, theta solves,
// Lasserre feasibility, iso-matrix certification and Kraus factors.

#include <CLI11.hpp>

#include <filesystem>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "coniso/algebra.hpp"
#include "coniso/conic.hpp"
#include "coniso/graph.hpp"
#include "coniso/isomaps.hpp"
#include "coniso/matrix_io.hpp"
#include "coniso/spectral.hpp"
#include "coniso/verdict.hpp"

using namespace coniso;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitUndecided = 2;
constexpr int kExitInconsistent = 3;

class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct Globals {
  bool json_output = false;
  double tol = 1e-6;
  int max_iters = 100000;
};

SolverOptions solver_options(const Globals& g) {
  SolverOptions o;
  o.tol = g.tol;
  o.max_iters = g.max_iters;
  return o;
}

// A graph argument is a file when one exists at that path, otherwise a
// generator spec such as "cycle(5)".
Graph load_graph(const std::string& arg) {
  if (std::filesystem::exists(arg)) return read_graph_file(arg);
  try {
    return named_graph(arg);
  } catch (const GraphError& e) {
    throw UsageError("'" + arg + "' is neither a graph file nor a generator spec (" + e.what() + ")");
  }
}

void emit(const std::string& text, const std::string& path) {
  if (path.empty() || path == "-") {
    std::cout << text;
  } else {
    write_text_file(path, text);
  }
}

std::string render_value(const json& v) {
  if (v.is_string()) return v.get<std::string>();
  return v.dump();
}

void print_verdict(const Verdict& v, const Globals& g) {
  if (g.json_output) {
    std::cout << v.to_json().dump(2) << "\n";
    return;
  }
  std::cout << v.relation << ": " << to_string(v.status) << "\n";
  for (const auto& [key, value] : v.certificate.items())
    std::cout << "  " << key << ": " << render_value(value) << "\n";
}

void print_json_or_text(const json& j, const Globals& g) {
  if (g.json_output) {
    std::cout << j.dump(2) << "\n";
    return;
  }
  for (const auto& [key, value] : j.items()) std::cout << key << ": " << render_value(value) << "\n";
}

void print_report(const std::string& title, const Report& r) {
  std::cout << title << ": " << (r.passed() ? "pass" : "FAIL") << "\n";
  for (const auto& c : r.checks) {
    std::ostringstream line;
    line << "  " << (c.passed ? "ok   " : "FAIL ") << c.name << "  residual=" << c.residual;
    if (c.exact) line << " (exact)";
    else line << " threshold=" << c.threshold;
    std::cout << line.str() << "\n";
  }
}

// --------------------------------------------------------------------------

int cmd_gen(const std::string& name, const std::vector<std::string>& params, const std::string& out) {
  std::string spec = name;
  if (!params.empty()) {
    spec += "(";
    for (std::size_t i = 0; i < params.size(); ++i) spec += (i ? "," : "") + params[i];
    spec += ")";
  }
  Graph graph;
  try {
    graph = named_graph(spec);
  } catch (const GraphError& e) {
    throw UsageError(std::string(e.what()) + "\nknown generators: " + named_graph_help());
  }
  emit(serialize_graph(graph), out);
  return kExitOk;
}

// Writes an iso matrix backing a "holds" verdict: the solver matrix when an
// SDP ran, otherwise an exact construction.
void write_witness(const std::string& path, Relation relation, const Graph& g, const Graph& h,
                   const std::string& g_arg, const std::string& h_arg,
                   const std::optional<KIsoResult>& sdp) {
  IsoMatrix m;
  if (sdp && sdp->iso_matrix) {
    m = make_iso_matrix(*sdp->iso_matrix, g.order(), h.order(), std::string(to_string(relation)));
  } else if (relation == Relation::exact) {
    const std::vector<Permutation> fs = {*exact_isomorphism(g, h)};
    const std::vector<Rational> w = {Rational(1)};
    m = build_cp_from_isomorphisms(g, h, fs, w);
  } else if (relation == Relation::dnn) {
    m = build_dnn_choi_from_wl(g, h, wl_equivalent(g, h));
    m.cone = "dnn";
  } else {
    std::cerr << "note: no iso matrix available for this verdict; nothing written\n";
    return;
  }
  m.g_label = g_arg;
  m.h_label = h_arg;
  write_iso_matrix(path, m);
}

int cmd_check(const Globals& glob, const std::string& relation_name, const std::string& route,
              const std::string& g_arg, const std::string& h_arg, const std::string& matrix_out) {
  const Relation relation = parse_relation(relation_name);
  const bool conic = relation == Relation::psd || relation == Relation::dnn;
  if (route != "algebraic" && !conic)
    throw UsageError("--route " + route + " needs --relation psd or dnn");
  if (!matrix_out.empty() && (relation == Relation::fractional ||
                              (relation == Relation::psd && route == "algebraic")))
    throw UsageError("--matrix-out needs --relation exact or dnn, or an SDP route");
  const Graph g = load_graph(g_arg), h = load_graph(h_arg);
  const Cone cone = relation == Relation::psd ? Cone::psd : Cone::dnn;

  std::optional<KIsoResult> sdp;
  Verdict v;
  if (route == "sdp") {
    sdp = k_isomorphic_sdp(g, h, cone, solver_options(glob));
    v = sdp->verdict;
  } else {
    v = decide_relation(g, h, relation);
    if (route == "both") {
      sdp = k_isomorphic_sdp(g, h, cone, solver_options(glob));
      v.certificate["sdp_cross_check"] = sdp->verdict.to_json();
      if (!sdp->verdict.undecided() && sdp->verdict.holds() != v.holds())
        throw std::logic_error("algebraic route says " + std::string(to_string(v.status)) +
                               " but the SDP route says " + std::string(to_string(sdp->verdict.status)));
    }
  }
  print_verdict(v, glob);
  if (!matrix_out.empty() && v.holds()) write_witness(matrix_out, relation, g, h, g_arg, h_arg, sdp);
  return exit_code(v);
}

int cmd_theta(const Globals& glob, const std::string& cone_name, const std::string& g_arg,
              const std::string& out) {
  const Cone cone = parse_cone(cone_name);
  const Graph g = load_graph(g_arg);
  const SDPSolution s = solve_theta(g, cone, solver_options(glob));
  json j;
  j["schema"] = 1;
  j["cone"] = std::string(to_string(cone));
  j["order"] = g.order();
  j["value"] = s.value;
  j["dual_bound"] = s.dual_bound;
  j["primal_residual"] = s.primal_residual;
  j["dual_residual"] = s.dual_residual;
  j["min_eigenvalue"] = s.min_eigenvalue;
  j["min_entry"] = s.min_entry;
  j["iterations"] = s.iterations;
  j["reduced_dimension"] = s.reduced_dimension;
  j["converged"] = s.converged;
  print_json_or_text(j, glob);
  if (!out.empty()) {
    write_text_file(out, "# theta cone=" + std::string(to_string(cone)) + " graph=" + g_arg + "\n" +
                             format_matrix(s.x));
  }
  return s.converged ? kExitOk : kExitUndecided;
}

int cmd_product(const std::string& g_arg, const std::string& h_arg, const std::string& out) {
  emit(serialize_graph(isomorphism_product(load_graph(g_arg), load_graph(h_arg))), out);
  return kExitOk;
}

int cmd_lasserre(const Globals& glob, const std::string& g_arg, const std::string& h_arg, bool nonneg) {
  const auto r = lasserre1_feasible(load_graph(g_arg), load_graph(h_arg), nonneg, solver_options(glob));
  print_verdict(r.verdict, glob);
  return exit_code(r.verdict);
}

int cmd_certify(const Globals& glob, const std::string& cone_name, const std::string& m_arg,
                const std::string& g_arg, const std::string& h_arg, bool deep, double verify_tol) {
  const Cone cone = parse_cone(cone_name);
  const Graph g = load_graph(g_arg), h = load_graph(h_arg);
  const IsoMatrix m = read_iso_matrix(m_arg, g.order(), h.order());
  if (m.ng != g.order() || m.nh != h.order())
    throw UsageError("matrix header says " + std::to_string(m.ng) + "x" + std::to_string(m.nh) +
                     " but the graphs have orders " + std::to_string(g.order()) + " and " +
                     std::to_string(h.order()));
  VerifyOptions vo;
  vo.tol = verify_tol;
  const Report basic = verify_iso_matrix(m, g, h, cone, vo);
  std::optional<Report> map_report;
  if (deep) map_report = verify_map_properties(m, g, h);
  if (glob.json_output) {
    json j;
    j["schema"] = 1;
    j["cone"] = std::string(to_string(cone));
    j["iso_matrix"] = basic.to_json();
    if (map_report) j["map_properties"] = map_report->to_json();
    std::cout << j.dump(2) << "\n";
  } else {
    print_report("iso matrix (" + std::string(to_string(cone)) + ")", basic);
    if (map_report) print_report("map properties", *map_report);
  }
  return kExitOk;
}

int cmd_kraus(const std::string& m_arg, std::optional<int> ng, std::optional<int> nh,
              const std::string& out) {
  const IsoMatrix m = read_iso_matrix(m_arg, ng, nh);
  KrausSet ks;
  try {
    ks = kraus_decompose(m);
  } catch (const NotPositiveError& e) {
    throw UsageError(e.what());
  }
  emit(format_kraus(ks), out);
  return kExitOk;
}

struct PairRow {
  std::string label;
  Graph g, h;
};

int cmd_separations(const Globals& glob) {
  std::vector<PairRow> rows = {
      {"q4 / hoffman", named_graph("q4"), named_graph("hoffman")},
      {"rook4 / shrikhande", named_graph("rook4"), named_graph("shrikhande")},
      {"C6 / C3+C3", named_graph("cycle(6)"), named_graph("union(cycle(3),cycle(3))")},
  };
  const Relation relations[] = {Relation::exact, Relation::dnn, Relation::psd, Relation::fractional};
  json table = json::array();
  for (const auto& row : rows) {
    json entry;
    entry["pair"] = row.label;
    for (Relation r : relations) {
      const Verdict v = decide_relation(row.g, row.h, r);
      entry[std::string(to_string(r))] = v.undecided() ? json(nullptr) : json(v.holds());
    }
    const bool kg = contains_clique(row.g, 4), kh = contains_clique(row.h, 4);
    entry["K4_in_G"] = kg;
    entry["K4_in_H"] = kh;
    entry["quantum"] = kg != kh ? "refuted by planar (K4) homomorphism count" : "not refuted";
    table.push_back(entry);
  }
  if (glob.json_output) {
    json j;
    j["schema"] = 1;
    j["separations"] = table;
    std::cout << j.dump(2) << "\n";
    return kExitOk;
  }
  auto mark = [](const json& v) -> std::string {
    if (v.is_null()) return "?";
    return v.get<bool>() ? "✓" : "✗";
  };
  std::cout << "pair                 exact  dnn  psd  fractional  K4(G)  K4(H)  quantum\n";
  for (const auto& e : table) {
    std::string label = e["pair"].get<std::string>();
    label.resize(20, ' ');
    std::cout << label << " " << mark(e["exact"]) << "      " << mark(e["dnn"]) << "    "
              << mark(e["psd"]) << "    " << mark(e["fractional"]) << "           "
              << mark(e["K4_in_G"]) << "      " << mark(e["K4_in_H"]) << "      "
              << e["quantum"].get<std::string>() << "\n";
  }
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Conic graph-isomorphism relations: exact, doubly nonnegative, "
               "semidefinite and fractional"};
  app.require_subcommand(1);
  app.fallthrough();
  Globals glob;
  app.add_flag("--json", glob.json_output, "Machine-readable JSON output");
  app.add_option("--tol", glob.tol, "Solver tolerance")->check(CLI::PositiveNumber);
  app.add_option("--max-iters", glob.max_iters, "Solver iteration cap")->check(CLI::PositiveNumber);

  std::string out;
  std::string gen_name;
  std::vector<std::string> gen_params;
  auto* gen = app.add_subcommand("gen", "Write a generated graph (" + named_graph_help() + ")");
  gen->add_option("name", gen_name, "Generator name or full spec")->required();
  gen->add_option("params", gen_params, "Generator parameters");
  gen->add_option("-o,--out", out, "Output file (default stdout)");

  std::string relation = "exact", route = "algebraic", g_arg, h_arg;
  auto* check = app.add_subcommand("check", "Decide a relation between two graphs");
  check->add_option("--relation", relation, "exact, dnn, psd or fractional")
      ->required()
      ->check(CLI::IsMember({"exact", "dnn", "psd", "fractional"}));
  check->add_option("--route", route, "algebraic, sdp or both")
      ->check(CLI::IsMember({"algebraic", "sdp", "both"}));
  check->add_option("G", g_arg, "First graph (file or spec)")->required();
  check->add_option("H", h_arg, "Second graph (file or spec)")->required();
  std::string matrix_out;
  check->add_option("--matrix-out", matrix_out, "Write an iso matrix when the relation holds");

  std::string cone = "psd";
  auto* theta = app.add_subcommand("theta", "Solve the theta problem of a graph");
  theta->add_option("--cone", cone, "psd or dnn")->required()->check(CLI::IsMember({"psd", "dnn"}));
  theta->add_option("G", g_arg, "Graph (file or spec)")->required();
  theta->add_option("-o,--out", out, "Write the solution matrix here");

  auto* product = app.add_subcommand("product", "Write the isomorphism product of two graphs");
  product->add_option("G", g_arg, "First graph")->required();
  product->add_option("H", h_arg, "Second graph")->required();
  product->add_option("-o,--out", out, "Output file (default stdout)");

  bool nonneg = false;
  auto* lasserre = app.add_subcommand("lasserre", "First-level Lasserre feasibility");
  lasserre->add_option("G", g_arg, "First graph")->required();
  lasserre->add_option("H", h_arg, "Second graph")->required();
  lasserre->add_flag("--nonneg", nonneg, "Also require nonnegative moments");

  std::string m_arg;
  bool deep = false;
  double verify_tol = 1e-8;
  auto* certify = app.add_subcommand("certify", "Verify an iso matrix file");
  certify->add_option("--cone", cone, "psd or dnn")->required()->check(CLI::IsMember({"psd", "dnn"}));
  certify->add_option("M", m_arg, "Iso matrix file")->required();
  certify->add_option("G", g_arg, "First graph")->required();
  certify->add_option("H", h_arg, "Second graph")->required();
  certify->add_flag("--deep", deep, "Also check map properties");
  certify->add_option("--verify-tol", verify_tol, "Relative tolerance for inexact matrices")
      ->check(CLI::PositiveNumber);

  std::optional<int> ng, nh;
  auto* kraus = app.add_subcommand("kraus", "Write Kraus factors of an iso matrix");
  kraus->add_option("M", m_arg, "Iso matrix file")->required();
  kraus->add_option("--ng", ng, "|V_G| when the file header lacks it");
  kraus->add_option("--nh", nh, "|V_H| when the file header lacks it");
  kraus->add_option("-o,--out", out, "Output file (default stdout)");

  auto* separations = app.add_subcommand("separations", "Relations on the three canonical pairs");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (*gen) return cmd_gen(gen_name, gen_params, out);
    if (*check) return cmd_check(glob, relation, route, g_arg, h_arg, matrix_out);
    if (*theta) return cmd_theta(glob, cone, g_arg, out);
    if (*product) return cmd_product(g_arg, h_arg, out);
    if (*lasserre) return cmd_lasserre(glob, g_arg, h_arg, nonneg);
    if (*certify) return cmd_certify(glob, cone, m_arg, g_arg, h_arg, deep, verify_tol);
    if (*kraus) return cmd_kraus(m_arg, ng, nh, out);
    if (*separations) return cmd_separations(glob);
  } catch (const UsageError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const GraphError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const MatrixFormatError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const ClosureBudgetError& e) {
    std::cerr << "undecided: " << e.what() << "\n";
    return kExitUndecided;
  } catch (const std::logic_error& e) {
    std::cerr << "inconsistency: " << e.what() << "\n";
    return kExitInconsistent;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  }
  return kExitUsage;
}
