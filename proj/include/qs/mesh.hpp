#pragma once

// Triangulated closed surfaces (sphere and flat torus) with exact rational
// triangle areas, plus the subcomplex machinery the quasi-measure code needs:
// closures, connectivity, open complement components, Euler characteristics
// of open regions, and level-set extraction for PL vertex functions.

#include "qs/rational.hpp"

#include <array>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace qs {

// Thrown for malformed or out-of-contract inputs; the CLI maps it to exit 2.
struct InputError : std::runtime_error {
  explicit InputError(const std::string& what) : std::runtime_error(what) {}
};

// Thrown when a documented internal invariant fails; the CLI maps it to exit 1.
struct InvariantError : std::logic_error {
  explicit InvariantError(const std::string& what) : std::logic_error(what) {}
};

enum class MeshKind { Sphere, Torus };

struct TriMesh {
  MeshKind kind = MeshKind::Sphere;
  std::vector<std::array<double, 3>> verts;       // torus verts live in [0,1)^2, z = 0
  std::vector<std::array<int, 3>> tris;

  // exact areas: tri t has area area_num[t] / area_den, summing to exactly 1
  std::vector<long long> area_num;
  long long area_den = 1;

  // torus only: integer grid coordinates and grid size, for exact homology classes
  int torus_n = 0;
  std::vector<std::array<int, 2>> torus_coord;

  // derived connectivity, filled by finalize()
  std::vector<std::array<int, 2>> edge_verts;     // each sorted (a < b)
  std::vector<std::array<int, 2>> edge_tris;      // the two incident triangles
  std::vector<std::array<int, 3>> tri_edges;      // edge i joins tri verts i and (i+1)%3
  std::vector<std::vector<int>> vert_tris;
  std::vector<std::vector<int>> vert_edges;
  std::vector<std::vector<int>> vert_nbrs;

  int nv() const { return static_cast<int>(verts.size()); }
  int ne() const { return static_cast<int>(edge_verts.size()); }
  int nt() const { return static_cast<int>(tris.size()); }

  Rational tri_area(int t) const { return Rational(area_num[t], area_den); }
  int edge_between(int a, int b) const;           // -1 if absent

  // builds connectivity and checks the closed-surface contract:
  // every edge bounds exactly two triangles, Euler characteristic matches kind,
  // areas positive and summing to exactly 1
  void finalize();

 private:
  std::map<std::pair<int, int>, int> edge_index_;
};

// Octahedron-based sphere (8 * 4^(r-1) triangles, uniform exact areas) or
// n x n grid torus (2 n^2 triangles). Throws InputError for resolution < 1,
// or a torus resolution < 3 (smaller grids identify edges and are not
// simplicial complexes).
TriMesh build_mesh(MeshKind kind, int resolution);

// A downward-closed cell set: every triangle's edges and vertices are present,
// every edge's vertices are present. Lists are sorted and deduplicated.
struct Subcomplex {
  std::vector<int> verts;
  std::vector<int> edges;
  std::vector<int> tris;

  bool empty() const { return verts.empty() && edges.empty() && tris.empty(); }
};

// closure of an arbitrary cell selection
Subcomplex make_subcomplex(const TriMesh& m,
                           const std::vector<int>& tris,
                           const std::vector<int>& extra_edges = {},
                           const std::vector<int>& extra_verts = {});

// throws InputError if lists are out of range or not downward closed
void validate_subcomplex(const TriMesh& m, const Subcomplex& a);

// connected components of the subcomplex itself (cells glued along incidence),
// each returned as a subcomplex; ordered by smallest vertex id
std::vector<Subcomplex> subcomplex_components(const TriMesh& m, const Subcomplex& a);

// One connected component of the open complement of a subcomplex.
// Triangles are the open triangles whose interior lies in the component; the
// area is their exact total (the skeleton has measure zero).
struct OpenComponent {
  std::vector<int> tris;
  Rational area;
};

// Components of M minus A. Triangles outside A are glued across shared edges
// not in A, and across every vertex not in A (the open star of such a vertex
// is connected, which is what makes a bare skeleton vertex a non-separating
// pinch point). Deterministic order: by smallest triangle id.
std::vector<OpenComponent> complement_components(const TriMesh& m, const Subcomplex& a);

// Euler characteristic of the open region formed by a set of open triangles
// together with the open edges interior to it and the vertices whose entire
// star lies in it.
long long open_region_euler(const TriMesh& m, const std::vector<int>& tris);

// connected open region with chi = 1; on genus 0 and 1 surfaces that is an open disc
bool open_region_is_disc(const TriMesh& m, const std::vector<int>& tris);

// closed A with both A and its complement connected (sphere only)
bool is_solid(const TriMesh& m, const Subcomplex& a);

// PL function given by vertex values
struct PLFunction {
  std::vector<double> vals;
};

void validate_function(const TriMesh& m, const PLFunction& f);

// One connected component of a level set {F = c}.
// Regular components are closed polylines through crossed edges (cycle_edges
// ordered around the curve). Components meeting vertices carry the vertex
// cells instead; `plateau` marks those.
struct LevelComponent {
  double value = 0.0;
  bool plateau = false;
  std::vector<int> cycle_edges;   // regular case, cyclic order
  Subcomplex cells;               // plateau case: vertices + flat edges/tris
  std::vector<int> crossed;       // strictly crossed edges in the component
};

std::vector<LevelComponent> level_components(const TriMesh& m, const PLFunction& f, double c);

// component of {F = c} meeting the given seed triangle; InputError when the
// level set misses the seed or c is outside the function range
LevelComponent level_component(const TriMesh& m, const PLFunction& f, double c, int seed_tri);

// Greedy edge-connected disc growth from a seed vertex: adds triangles in BFS
// order, skipping any whose addition would break the open-disc property,
// until the area would exceed max_area. The result is connected with chi = 1.
std::vector<int> grow_disc(const TriMesh& m, int seed_vert, const Rational& max_area);

// ---- file formats ----

// mesh JSON: {"kind": "sphere"|"torus", "vertices": [[x,y,z],...],
//             "triangles": [[i,j,k],...], "areas": ["p/q",...]}
std::string mesh_to_json(const TriMesh& m);
TriMesh mesh_from_json(const std::string& text);

// function CSV with header "vertex_id,value", one row per vertex
std::string function_to_csv(const PLFunction& f);
PLFunction function_from_csv(const TriMesh& m, const std::string& text);

// subcomplex JSON: {"triangles": [...], "edges": [[i,j],...], "vertices": [...]}
std::string subcomplex_to_json(const TriMesh& m, const Subcomplex& a);
Subcomplex subcomplex_from_json(const TriMesh& m, const std::string& text);

}  // namespace qs
