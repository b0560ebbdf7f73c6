// End-to-end command tests: run_cli is driven in process with captured
// streams, inputs staged as real files, outputs parsed back as JSON.

#include <doctest.h>

#include <json.hpp>

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <numeric>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "qs/cli.hpp"
#include "qs/mesh.hpp"
#include "qs/qm.hpp"
#include "qs/rational.hpp"

using namespace qs;
using nlohmann::json;

namespace {

struct CliRun {
  int code = 0;
  std::string out;
  std::string err;
  json report() const { return json::parse(out); }
};

CliRun cli(std::vector<std::string> args) {
  std::ostringstream out, err;
  auto* old_out = std::cout.rdbuf(out.rdbuf());
  auto* old_err = std::cerr.rdbuf(err.rdbuf());
  int code = -1;
  try {
    code = run_cli(std::move(args));
  } catch (...) {
    std::cout.rdbuf(old_out);
    std::cerr.rdbuf(old_err);
    throw;
  }
  std::cout.rdbuf(old_out);
  std::cerr.rdbuf(old_err);
  return {code, out.str(), err.str()};
}

std::string stage(const std::string& name) { return "/tmp/qs_cli_" + name; }

void write_text(const std::string& path, const std::string& text) {
  std::ofstream f(path, std::ios::binary);
  f << text;
}

std::string read_text(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  std::ostringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

// height function csv for a staged sphere mesh
std::string stage_height_csv(const TriMesh& m, const std::string& name) {
  PLFunction f;
  for (int v = 0; v < m.nv(); ++v) f.vals.push_back(m.verts[v][2]);
  auto path = stage(name);
  write_text(path, function_to_csv(f));
  return path;
}

std::string stage_mesh(const TriMesh& m, const std::string& name) {
  auto path = stage(name);
  write_text(path, mesh_to_json(m));
  return path;
}

std::string stage_set(const TriMesh& m, const std::vector<int>& tris,
                      const std::string& name) {
  auto path = stage(name);
  write_text(path, subcomplex_to_json(m, make_subcomplex(m, tris)));
  return path;
}

const char* kTableModel = R"({
  "generators": ["a", "b"],
  "relations": ["ba=ab", "bA=Ab", "Ba=aB", "BA=AB"],
  "c": {
    "1": "0",
    "a": "3/4", "A": "-1/4", "b": "7/12", "B": "-1/12",
    "aa": "5/4", "AA": "-3/4", "bb": "11/12", "BB": "-5/12",
    "ab": "13/12", "aB": "5/12", "Ab": "1/12", "AB": "-7/12"
  },
  "norm": {
    "a": 1, "A": 1, "b": 1, "B": 1,
    "aa": 2, "AA": 2, "bb": 2, "BB": 2,
    "ab": 1, "aB": 1, "Ab": 1, "AB": 1
  },
  "f": "a",
  "vol": "1"
})";

}  // namespace

TEST_CASE("mesh generation writes a loadable file and a summary") {
  auto out = stage("gen_sphere.json");
  auto r = cli({"gen-mesh", "--kind", "sphere", "--resolution", "3", "--out", out});
  REQUIRE(r.code == 0);
  auto j = r.report();
  CHECK(j["kind"] == "sphere");
  CHECK(j["resolution"] == 3);
  CHECK(j["triangles"] == 128);
  CHECK(j["vertices"] == 66);
  auto m = mesh_from_json(read_text(out));
  CHECK(m.nt() == 128);
  CHECK(m.kind == MeshKind::Sphere);

  auto tout = stage("gen_torus.json");
  auto rt = cli({"gen-mesh", "--kind", "torus", "--resolution", "3", "--out", tout});
  REQUIRE(rt.code == 0);
  CHECK(rt.report()["triangles"] == 18);
  auto mt = mesh_from_json(read_text(tout));
  CHECK(mt.torus_n == 3);

  // resolution below the simplicial floor is an input error
  auto bad = cli({"gen-mesh", "--kind", "torus", "--resolution", "2", "--out", out});
  CHECK(bad.code == 2);
  CHECK(bad.err.find("resolution") != std::string::npos);
}

TEST_CASE("median state report repeats byte for byte") {
  auto m = build_mesh(MeshKind::Sphere, 4);
  auto mesh = stage_mesh(m, "zeta_mesh.json");
  auto fn = stage_height_csv(m, "zeta_fn.csv");

  auto r = cli({"zeta", "--mesh", mesh, "--fn", fn});
  REQUIRE(r.code == 0);
  auto j = r.report();
  REQUIRE(j.size() == 3);
  CHECK(j["complementAreas"] == json::array({"1/2", "1/2"}));
  CHECK(j["gammaValue"] == 0.0);
  CHECK(j["zeta"] == 0.0);
  CHECK(j["zeta"] == j["gammaValue"]);

  auto again = cli({"zeta", "--mesh", mesh, "--fn", fn});
  CHECK(again.code == 0);
  CHECK(again.out == r.out);
}

TEST_CASE("measure subcommand certifies sphere and torus sets") {
  auto m = build_mesh(MeshKind::Sphere, 3);
  auto mesh = stage_mesh(m, "tau_sphere.json");
  std::vector<int> all(m.nt());
  std::iota(all.begin(), all.end(), 0);
  auto whole = stage_set(m, all, "tau_whole.json");
  auto r = cli({"tau", "--mesh", mesh, "--set", whole, "--measure", "sphere-simple"});
  REQUIRE(r.code == 0);
  CHECK(r.report()["value"] == "1/1");
  CHECK(r.report()["certificateComponent"] == 0);

  // a point carries no weight and earns no certificate
  auto pt = stage("tau_point.json");
  write_text(pt, R"({"triangles": [], "edges": [], "vertices": [0]})");
  auto rp = cli({"tau", "--mesh", mesh, "--set", pt, "--measure", "sphere-simple"});
  REQUIRE(rp.code == 0);
  CHECK(rp.report()["value"] == "0/1");
  CHECK(rp.report()["certificateComponent"].is_null());

  auto t = build_mesh(MeshKind::Torus, 3);
  auto tmesh = stage_mesh(t, "tau_torus.json");
  auto tri = stage_set(t, {0}, "tau_tri.json");
  auto rt = cli({"tau", "--mesh", tmesh, "--set", tri, "--measure", "torus-grubb"});
  REQUIRE(rt.code == 0);
  CHECK(rt.report()["value"] == "0/1");
  CHECK(rt.report()["certificateComponent"] == json::array({"0/1"}));

  // one full grid row is a non-contractible annulus of area 1/3
  auto row = stage_set(t, {0, 1, 2, 3, 4, 5}, "tau_row.json");
  auto rr = cli({"tau", "--mesh", tmesh, "--set", row, "--measure", "torus-grubb"});
  REQUIRE(rr.code == 0);
  CHECK(rr.report()["value"] == "1/3");
  CHECK(rr.report()["certificateComponent"] == json::array({"1/3"}));

  // measure and mesh kind must agree
  auto bad = cli({"tau", "--mesh", mesh, "--set", whole, "--measure", "torus-grubb"});
  CHECK(bad.code == 2);
  CHECK(bad.err.find("torus") != std::string::npos);
}

TEST_CASE("level graph export names node types and arc weights") {
  auto m = build_mesh(MeshKind::Sphere, 2);
  auto mesh = stage_mesh(m, "reeb_mesh.json");
  auto fn = stage_height_csv(m, "reeb_fn.csv");
  auto dot = stage("reeb.dot");

  auto r = cli({"reeb", "--mesh", mesh, "--fn", fn, "--dot", dot});
  REQUIRE(r.code == 0);
  auto j = r.report();
  CHECK(j["isTree"] == true);
  CHECK(j["totalArea"] == "1/1");
  REQUIRE(j["nodes"].size() == 2);
  CHECK(j["nodes"][0]["type"] == "min");
  CHECK(j["nodes"][1]["type"] == "max");
  REQUIRE(j["arcs"].size() == 1);
  CHECK(j["arcs"][0]["weight"] == "1/1");

  auto text = read_text(dot);
  CHECK(text.rfind("graph reeb {", 0) == 0);
  CHECK(text.find("min") != std::string::npos);
  CHECK(text.find("--") != std::string::npos);

  auto nowrite = cli({"reeb", "--mesh", mesh, "--fn", fn, "--dot",
                      "/nonexistent-dir/out.dot"});
  CHECK(nowrite.code == 2);
}

TEST_CASE("stem report lists every grid point with its certificate") {
  auto report_file = stage("stem_report.json");
  auto r = cli({"toric-stem", "--polytope", "blowup-cp2", "--grid", "60",
                "--report", report_file});
  REQUIRE(r.code == 0);
  auto j = r.report();
  CHECK(j["gridDenominator"] == 60);
  CHECK(j["pointsChecked"] == 1681);
  CHECK(j["points"].size() == 1681);
  CHECK(j["uncertified"] == json::array({json::array({"1/3", "1/3"})}));
  CHECK(j["stemWithinCell"]["Q"] == true);

  int uncertified_rows = 0;
  long long counted = 0;
  for (const auto& row : j["points"])
    if (row["certificate"] == "UNCERTIFIED") {
      ++uncertified_rows;
      CHECK(row["point"] == json::array({"1/3", "1/3"}));
    }
  for (const auto& [name, count] : j["certificateCounts"].items())
    counted += count.get<long long>();
  CHECK(uncertified_rows == 1);
  CHECK(counted == 1680);

  // the report file carries the same bytes as stdout, and reruns repeat them
  CHECK(read_text(report_file) == r.out);
  auto again = cli({"toric-stem", "--polytope", "blowup-cp2", "--grid", "60"});
  CHECK(again.out == r.out);

  // file polytopes work through the same flag
  auto square = stage("square.json");
  write_text(square, R"({
    "vertices": [["0", "0"], ["1", "0"], ["1", "1"], ["0", "1"]],
    "landmarks": {"center": ["1/2", "1/2"]}
  })");
  auto rs = cli({"toric-stem", "--polytope", square, "--grid", "4"});
  REQUIRE(rs.code == 0);
  CHECK(rs.report()["pointsChecked"] == 25);
  CHECK(rs.report()["uncertified"] == json::array({json::array({"1/2", "1/2"})}));

  auto bad = cli({"toric-stem", "--polytope", "cp9", "--grid", "4"});
  CHECK(bad.code == 2);
  CHECK(bad.err.find("cp9") != std::string::npos);
}

TEST_CASE("axiom suites run from the command line") {
  auto report_file = stage("axioms_report.json");
  auto r = cli({"axioms", "--suite", "strong_quasi_additivity", "--seed", "7",
                "--cases", "50", "--report", report_file});
  REQUIRE(r.code == 0);
  auto j = r.report();
  CHECK(j["suite"] == "strong_quasi_additivity");
  CHECK(j["casesRun"] == 50);
  CHECK(j["failures"].empty());
  CHECK(j["maxGap"].get<double>() <= 1e-9);
  CHECK(j["tolerance"] == 1e-9);
  CHECK(read_text(report_file) == r.out);

  auto rn = cli({"axioms", "--suite", "normalization", "--cases", "1"});
  CHECK(rn.code == 0);
  CHECK(rn.report()["casesRun"] == 1);

  auto bad = cli({"axioms", "--suite", "no_such_suite"});
  CHECK(bad.code == 2);
  CHECK(bad.err.find("no_such_suite") != std::string::npos);
}

TEST_CASE("quasi-morphism checks run from the command line") {
  auto r = cli({"qm", "--model", "noisy-linear", "--check", "homogenize",
                "--kmax", "256"});
  REQUIRE(r.code == 0);
  auto j = r.report();
  CHECK(j["word"] == "a");
  CHECK(j["mu"] == "-3/7");
  CHECK(j["errorBound"] == "1/768");
  CHECK(j["kUsed"] == 256);

  // an explicit word matches the library evaluation
  auto model = builtin_model("noisy-linear");
  auto want = homogenize(model, parse_word(model.rw, "ab"), 64);
  auto rw = cli({"qm", "--model", "noisy-linear", "--check", "homogenize",
                 "--word", "ab", "--kmax", "64"});
  REQUIRE(rw.code == 0);
  CHECK(rw.report()["mu"] == format_rational(want.mu));
  CHECK(rw.report()["errorBound"] == format_rational(want.error_bound));

  auto rc = cli({"qm", "--model", "abelian", "--check", "cqa", "--maxlen", "3",
                 "--kmax", "32"});
  REQUIRE(rc.code == 0);
  CHECK(rc.report()["maxGap"] == "0/1");
  CHECK(rc.report()["violations"].empty());
  CHECK(rc.report()["aaViolations"].empty());
  CHECK(rc.report()["pairsChecked"].get<long long>() > 0);

  auto ra = cli({"qm", "--model", "free-toy", "--check", "abelian",
                 "--maxlen", "2", "--kmax", "32"});
  REQUIRE(ra.code == 0);
  CHECK(ra.report()["commuting"] == false);
  CHECK(ra.report()["witnessU"] == "ab");
  CHECK(ra.report()["witnessV"] == "ba");
  CHECK(ra.report()["pairsChecked"] == 0);

  auto rs = cli({"qm", "--model", "noisy-linear", "--check", "abelian",
                 "--subset", "a", "--maxlen", "4", "--kmax", "32"});
  REQUIRE(rs.code == 0);
  CHECK(rs.report()["commuting"] == true);
  CHECK(rs.report()["subset"] == json::array({"a"}));
  CHECK(rs.report()["violations"].empty());

  // table models load from disk through the same flag
  auto table = stage("table_model.json");
  write_text(table, kTableModel);
  auto rt = cli({"qm", "--model", table, "--check", "homogenize", "--word", "a",
                 "--kmax", "2"});
  REQUIRE(rt.code == 0);
  CHECK(rt.report()["mu"] == "-1/2");
  CHECK(rt.report()["errorBound"] == "1/8");
  CHECK(rt.report()["model"] == "file");

  auto badfile = stage("bad_model.json");
  write_text(badfile, R"({"generators": ["a"], "relations": [],
                          "c": {"a": 1}, "norm": {"a": 1}, "f": "a", "vol": "1"})");
  auto rb = cli({"qm", "--model", badfile, "--check", "homogenize"});
  CHECK(rb.code == 2);
  CHECK(rb.err.find(badfile) != std::string::npos);
}

TEST_CASE("flag grammar and environment validation") {
  CHECK(cli({}).code == 2);
  CHECK(cli({"bogus"}).code == 2);

  auto missing = cli({"zeta", "--mesh", stage("zeta_mesh.json")});
  CHECK(missing.code == 2);
  CHECK(missing.err.find("--fn") != std::string::npos);

  auto help = cli({"--help"});
  CHECK(help.code == 0);
  CHECK(help.out.find("gen-mesh") != std::string::npos);
  CHECK(help.out.find("toric-stem") != std::string::npos);

  auto sub_help = cli({"zeta", "--help"});
  CHECK(sub_help.code == 0);
  CHECK(sub_help.out.find("--mesh") != std::string::npos);

  auto bad_fmt = cli({"tau", "--mesh", "x", "--set", "y", "--measure",
                      "sphere-simple", "--format", "csv"});
  CHECK(bad_fmt.code == 2);

  // an absent input file is named in the diagnostic
  auto gone = cli({"zeta", "--mesh", "/no/such/mesh.json", "--fn", "/no/fn.csv"});
  CHECK(gone.code == 2);
  CHECK(gone.err.find("/no/such/mesh.json") != std::string::npos);

  auto mangled = stage("mangled.json");
  write_text(mangled, "{]");
  auto rm = cli({"zeta", "--mesh", mangled, "--fn", "/no/fn.csv"});
  CHECK(rm.code == 2);
  CHECK(rm.err.find("parse error") != std::string::npos);

  // the only environment knob is validated up front
  setenv("QUASISTATE_THREADS", "zero", 1);
  auto bad_env = cli({"qm", "--model", "abelian", "--check", "homogenize",
                      "--kmax", "4"});
  CHECK(bad_env.code == 2);
  CHECK(bad_env.err.find("QUASISTATE_THREADS") != std::string::npos);
  setenv("QUASISTATE_THREADS", "4", 1);
  auto good_env = cli({"qm", "--model", "abelian", "--check", "homogenize",
                       "--kmax", "4"});
  CHECK(good_env.code == 0);
  unsetenv("QUASISTATE_THREADS");
}
