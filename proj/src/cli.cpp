// Command-line front end. One subcommand per library entry point, flags
// parsed with CLI11, results printed to stdout as a single JSON document
// with sorted keys and canonical "p/q" rationals, so identical invocations
// produce byte-identical reports.

#include "qs/cli.hpp"

#include <algorithm>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "qs/axioms.hpp"
#include "qs/mesh.hpp"
#include "qs/qm.hpp"
#include "qs/rational.hpp"
#include "qs/reeb.hpp"
#include "qs/topmeasure.hpp"
#include "qs/toric.hpp"

namespace qs {
namespace {

using nlohmann::json;

// Everything a run depends on. Each subcommand reads only the fields its
// flags filled in; together with the input files this determines the output.
struct RunConfig {
  std::string subcommand;
  std::string mesh_path, fn_path, set_path, out_path, dot_path, report_path;
  std::string kind, measure, format = "json";
  std::string polytope, suite, model, check, word, subset;
  int resolution = 0;
  int grid = 0;
  unsigned long long seed = 0;
  int cases = 25;
  double tol = 1e-9;
  int maxlen = 4;
  int kmax = 64;
};

struct RunResult {
  json report;
  int exit_code = 0;
};

std::string read_file(const std::string& path, const std::string& what) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot open " + what + " file: " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InputError("cannot open output file for writing: " + path);
  out << text;
  out.flush();
  if (!out) throw InputError("write failed: " + path);
}

// Loaders wrap parser errors with the offending path so the message points
// at a location even when several files are in play.
TriMesh load_mesh(const std::string& path) {
  const std::string text = read_file(path, "mesh");
  try {
    return mesh_from_json(text);
  } catch (const InputError& e) {
    throw InputError(path + ": " + e.what());
  }
}

PLFunction load_function(const TriMesh& m, const std::string& path) {
  const std::string text = read_file(path, "function");
  try {
    return function_from_csv(m, text);
  } catch (const InputError& e) {
    throw InputError(path + ": " + e.what());
  }
}

Subcomplex load_subcomplex(const TriMesh& m, const std::string& path) {
  const std::string text = read_file(path, "subcomplex");
  try {
    return subcomplex_from_json(m, text);
  } catch (const InputError& e) {
    throw InputError(path + ": " + e.what());
  }
}

MomentPolytope load_polytope(const std::string& spec) {
  for (const char* name : {"cp1", "cp2", "cp3", "blowup-cp2"})
    if (spec == name) return builtin_polytope(spec);
  const std::string text = read_file(spec, "polytope");
  try {
    return polytope_from_json(text);
  } catch (const InputError& e) {
    throw InputError(spec + ": " + e.what());
  }
}

SpectralModel load_model(const std::string& spec) {
  for (const char* name : {"abelian", "noisy-linear", "free-toy"})
    if (spec == name) return builtin_model(spec);
  const std::string text = read_file(spec, "model");
  try {
    return model_from_json(text);
  } catch (const InputError& e) {
    throw InputError(spec + ": " + e.what());
  }
}

json point_json(const RPoint& x) {
  json p = json::array();
  for (const Rational& c : x) p.push_back(format_rational(c));
  return p;
}

// The evaluators are sequential; the variable is still validated so a stale
// setting fails loudly instead of silently steering nothing.
void check_thread_env() {
  const char* v = std::getenv("QUASISTATE_THREADS");
  if (v == nullptr) return;
  char* end = nullptr;
  const long n = std::strtol(v, &end, 10);
  if (end == v || *end != '\0' || n <= 0)
    throw InputError("QUASISTATE_THREADS must be a positive integer, got \"" +
                     std::string(v) + "\"");
}

RunResult run_gen_mesh(const RunConfig& cfg) {
  const MeshKind kind =
      cfg.kind == "sphere" ? MeshKind::Sphere : MeshKind::Torus;
  const TriMesh m = build_mesh(kind, cfg.resolution);
  write_file(cfg.out_path, mesh_to_json(m));
  json out;
  out["kind"] = cfg.kind;
  out["out"] = cfg.out_path;
  out["resolution"] = cfg.resolution;
  out["triangles"] = m.nt();
  out["vertices"] = m.nv();
  return {out, 0};
}

RunResult run_zeta(const RunConfig& cfg) {
  const TriMesh m = load_mesh(cfg.mesh_path);
  const PLFunction f = load_function(m, cfg.fn_path);
  const MedianResult med = median_component(m, f);
  json areas = json::array();
  for (const Rational& a : med.complement_areas)
    areas.push_back(format_rational(a));
  json out;
  out["complementAreas"] = areas;
  out["gammaValue"] = med.value;
  out["zeta"] = zeta_median(m, f);
  return {out, 0};
}

RunResult run_tau(const RunConfig& cfg) {
  const TriMesh m = load_mesh(cfg.mesh_path);
  const Subcomplex a = load_subcomplex(m, cfg.set_path);
  json out;
  if (cfg.measure == "sphere-simple") {
    if (m.kind != MeshKind::Sphere)
      throw InputError("measure sphere-simple needs a sphere mesh, got a torus: " +
                       cfg.mesh_path);
    const SphereTau t = tau_closed_sphere_detail(m, a);
    if (t.winner >= 0)
      out["certificateComponent"] = t.winner;
    else
      out["certificateComponent"] = nullptr;
    out["value"] = format_rational(Rational(t.value));
  } else {
    if (m.kind != MeshKind::Torus)
      throw InputError("measure torus-grubb needs a torus mesh, got a sphere: " +
                       cfg.mesh_path);
    const TorusTau t = grubb_tau_torus_detail(m, a);
    json per = json::array();
    for (const Rational& v : t.per_component) per.push_back(format_rational(v));
    out["certificateComponent"] = per;
    out["value"] = format_rational(t.total);
  }
  return {out, 0};
}

RunResult run_reeb(const RunConfig& cfg) {
  const TriMesh m = load_mesh(cfg.mesh_path);
  const PLFunction f = load_function(m, cfg.fn_path);
  const ReebGraph g = build_reeb(m, f);
  if (!cfg.dot_path.empty()) write_file(cfg.dot_path, reeb_to_dot(g));
  json nodes = json::array();
  for (const auto& n : g.nodes) {
    json jn;
    jn["plateauArea"] = format_rational(n.plateau_area);
    jn["type"] = n.type;
    jn["value"] = n.value;
    nodes.push_back(jn);
  }
  json arcs = json::array();
  for (const auto& a : g.arcs) {
    json ja;
    ja["hi"] = a.hi;
    ja["hiValue"] = a.hi_value;
    ja["lo"] = a.lo;
    ja["loValue"] = a.lo_value;
    ja["weight"] = format_rational(a.weight);
    arcs.push_back(ja);
  }
  json out;
  out["arcs"] = arcs;
  out["isTree"] = g.is_tree;
  out["nodes"] = nodes;
  out["totalArea"] = format_rational(g.total_area);
  return {out, 0};
}

RunResult run_toric_stem(const RunConfig& cfg) {
  const MomentPolytope p = load_polytope(cfg.polytope);
  const StemReport rep = stem_search(p, cfg.grid);

  // one row per interior grid point, sorted by coordinates
  std::vector<std::pair<RPoint, std::string>> rows;
  rows.reserve(rep.certified.size() + rep.uncertified.size());
  for (const auto& [pt, cert] : rep.certified)
    rows.emplace_back(pt, certificate_kind_name(cert.kind));
  for (const auto& pt : rep.uncertified) rows.emplace_back(pt, "UNCERTIFIED");
  std::sort(rows.begin(), rows.end(), [](const auto& a, const auto& b) {
    return std::lexicographical_compare(a.first.begin(), a.first.end(),
                                        b.first.begin(), b.first.end());
  });

  json counts = json::object();
  for (const auto& [name, count] : rep.kind_counts) counts[name] = count;
  json pts = json::array();
  for (const auto& [pt, kind] : rows) {
    json row;
    row["certificate"] = kind;
    row["point"] = point_json(pt);
    pts.push_back(row);
  }
  json unc = json::array();
  for (const auto& pt : rep.uncertified) unc.push_back(point_json(pt));
  json stem = json::object();
  for (const auto& [name, within] : rep.stem_within_cell) stem[name] = within;

  json out;
  out["certificateCounts"] = counts;
  out["gridDenominator"] = rep.grid_denominator;
  out["note"] = rep.note;
  out["points"] = pts;
  out["pointsChecked"] = rep.points_checked;
  out["stemWithinCell"] = stem;
  out["uncertified"] = unc;
  return {out, 0};
}

RunResult run_axioms(const RunConfig& cfg) {
  const TriMesh m = build_mesh(MeshKind::Sphere, 4);
  const AxiomSuiteReport rep =
      run_suite(m, cfg.suite, cfg.seed, cfg.cases, cfg.tol);
  json fails = json::array();
  for (const auto& f : rep.failures) {
    json jf;
    jf["expected"] = f.expected;
    jf["gap"] = f.gap;
    jf["input"] = f.input_digest;
    jf["observed"] = f.observed;
    fails.push_back(jf);
  }
  json out;
  out["casesRun"] = rep.cases_run;
  out["failures"] = fails;
  out["maxGap"] = rep.max_gap;
  out["suite"] = rep.suite_name;
  out["tolerance"] = rep.tolerance;
  return {out, rep.failures.empty() ? 0 : 1};
}

std::vector<std::string> split_commas(const std::string& text) {
  std::vector<std::string> parts;
  std::string cur;
  for (char c : text) {
    if (c == ',') {
      parts.push_back(cur);
      cur.clear();
    } else {
      cur.push_back(c);
    }
  }
  parts.push_back(cur);
  return parts;
}

RunResult run_qm(const RunConfig& cfg) {
  const SpectralModel model = load_model(cfg.model);
  json out;
  out["check"] = cfg.check;
  out["model"] = model.name;
  int code = 0;
  if (cfg.check == "homogenize") {
    const Word phi =
        cfg.word.empty() ? model.f : parse_word(model.rw, cfg.word);
    const HomogenizationResult h = homogenize(model, phi, cfg.kmax);
    out["errorBound"] = format_rational(h.error_bound);
    out["kUsed"] = h.k_used;
    out["mu"] = format_rational(h.mu);
    out["word"] = format_word(model.rw, phi);
  } else if (cfg.check == "cqa") {
    const CqaReport r =
        check_controlled_quasi_additivity(model, cfg.maxlen, cfg.kmax);
    json viols = json::array();
    for (const auto& v : r.violations) {
      json jv;
      jv["allowed"] = format_rational(v.allowed);
      jv["gap"] = format_rational(v.gap);
      jv["phi"] = v.phi;
      jv["psi"] = v.psi;
      viols.push_back(jv);
    }
    out["aaPowerSamples"] = r.aa_power_samples;
    out["aaProductSamples"] = r.aa_product_samples;
    out["aaViolations"] = r.aa_violations;
    out["kMax"] = r.k_max;
    out["maxGap"] = format_rational(r.max_gap);
    out["maxRatio"] = r.max_ratio;
    out["maxWordLength"] = r.max_word_length;
    out["pairsChecked"] = r.pairs_checked;
    out["violations"] = viols;
    if (!r.violations.empty() || !r.aa_violations.empty()) code = 1;
  } else {
    const std::vector<std::string> subset =
        cfg.subset.empty() ? model.rw.generators : split_commas(cfg.subset);
    const AbelianReport r =
        check_abelian_restriction(model, subset, cfg.maxlen, cfg.kmax);
    out["commuting"] = r.commuting;
    out["maxGap"] = format_rational(r.max_gap);
    out["maxTolerance"] = format_rational(r.max_tolerance);
    out["pairsChecked"] = r.pairs_checked;
    out["subset"] = subset;
    out["violations"] = r.violations;
    out["witnessU"] = r.witness_u;
    out["witnessV"] = r.witness_v;
    if (!r.violations.empty()) code = 1;
  }
  return {out, code};
}

int dispatch(const RunConfig& cfg) {
  check_thread_env();
  RunResult r;
  if (cfg.subcommand == "gen-mesh")
    r = run_gen_mesh(cfg);
  else if (cfg.subcommand == "zeta")
    r = run_zeta(cfg);
  else if (cfg.subcommand == "tau")
    r = run_tau(cfg);
  else if (cfg.subcommand == "reeb")
    r = run_reeb(cfg);
  else if (cfg.subcommand == "toric-stem")
    r = run_toric_stem(cfg);
  else if (cfg.subcommand == "axioms")
    r = run_axioms(cfg);
  else
    r = run_qm(cfg);
  const std::string text = r.report.dump(2) + "\n";
  if (!cfg.report_path.empty()) write_file(cfg.report_path, text);
  std::cout << text;
  return r.exit_code;
}

}  // namespace

int run_cli(std::vector<std::string> args) {
  CLI::App app{"quasi-states and quasi-measures on triangulated surfaces"};
  app.require_subcommand(1);
  RunConfig cfg;

  CLI::App* gen = app.add_subcommand(
      "gen-mesh", "build a triangulated sphere or torus and write it to a file");
  gen->add_option("--kind", cfg.kind, "mesh kind")
      ->required()
      ->check(CLI::IsMember({"sphere", "torus"}));
  gen->add_option("--resolution", cfg.resolution,
                  "subdivision level (sphere >= 1, torus >= 3)")
      ->required();
  gen->add_option("--out", cfg.out_path, "mesh file to write")->required();

  CLI::App* zeta = app.add_subcommand(
      "zeta", "evaluate the median quasi-state on a vertex function");
  zeta->add_option("--mesh", cfg.mesh_path, "mesh file")->required();
  zeta->add_option("--fn", cfg.fn_path, "vertex_id,value CSV file")->required();

  CLI::App* tau = app.add_subcommand("tau", "measure a closed subcomplex");
  tau->add_option("--mesh", cfg.mesh_path, "mesh file")->required();
  tau->add_option("--set", cfg.set_path, "subcomplex JSON file")->required();
  tau->add_option("--measure", cfg.measure, "which measure to apply")
      ->required()
      ->check(CLI::IsMember({"sphere-simple", "torus-grubb"}));
  tau->add_option("--format", cfg.format, "report format")
      ->check(CLI::IsMember({"json"}));

  CLI::App* reeb = app.add_subcommand(
      "reeb", "contract level sets to the Reeb graph of a function");
  reeb->add_option("--mesh", cfg.mesh_path, "mesh file")->required();
  reeb->add_option("--fn", cfg.fn_path, "vertex_id,value CSV file")->required();
  reeb->add_option("--dot", cfg.dot_path,
                   "also write the graph in DOT format to this file");

  CLI::App* stem = app.add_subcommand(
      "toric-stem", "certify displaceable fibers over a moment polytope grid");
  stem->add_option("--polytope", cfg.polytope,
                   "builtin name (cp1, cp2, cp3, blowup-cp2) or a JSON file")
      ->required();
  stem->add_option("--grid", cfg.grid, "grid denominator")->required();
  stem->add_option("--report", cfg.report_path,
                   "also write the JSON report to this file");

  CLI::App* axioms =
      app.add_subcommand("axioms", "run one axiom suite over a seeded corpus");
  axioms->add_option("--suite", cfg.suite, "suite name")->required();
  axioms->add_option("--seed", cfg.seed, "corpus seed (default 0)");
  axioms->add_option("--cases", cfg.cases, "number of cases (default 25)");
  axioms->add_option("--tol", cfg.tol,
                     "tolerance for real-valued checks (default 1e-9)");
  axioms->add_option("--report", cfg.report_path,
                     "also write the JSON report to this file");

  CLI::App* qm = app.add_subcommand(
      "qm", "homogenize and check a quasi-morphism model");
  qm->add_option("--model", cfg.model,
                 "builtin name (abelian, noisy-linear, free-toy) or a JSON file")
      ->required();
  qm->add_option("--check", cfg.check, "which check to run")
      ->required()
      ->check(CLI::IsMember({"cqa", "abelian", "homogenize"}));
  qm->add_option("--maxlen", cfg.maxlen,
                 "word length horizon for pairwise checks (default 4)");
  qm->add_option("--kmax", cfg.kmax,
                 "power horizon for homogenization (default 64)");
  qm->add_option("--word", cfg.word,
                 "word to homogenize (default: the model's displacing element)");
  qm->add_option("--subset", cfg.subset,
                 "comma-separated generators for the abelian check "
                 "(default: all generators)");

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }
  cfg.subcommand = app.get_subcommands().front()->get_name();

  try {
    return dispatch(cfg);
  } catch (const InputError& e) {
    std::cerr << "input error: " << e.what() << "\n";
    return 2;
  } catch (const InvariantError& e) {
    std::cerr << "invariant violation: " << e.what() << "\n";
    return 1;
  }
}

}  // namespace qs
