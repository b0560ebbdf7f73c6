#pragma once

// Contour trees of PL functions and the area-median machinery built on them.
//
// Two structures live here. FineTree is the internal workhorse: one node per
// level-set component that contains a vertex, every regular vertex included,
// with each triangle's area distributed along the path its level segments
// sweep through the tree. ReebGraph is the public quotient: regular nodes
// smoothed away, arcs weighted by exact swept area.

#include "qs/mesh.hpp"

#include <string>
#include <utility>

namespace qs {

struct FineTree {
  const TriMesh* mesh = nullptr;
  std::vector<double> fvals;

  struct Node {
    double value = 0;
    std::vector<int> verts;        // sorted; verts[0] breaks ties between equal values
    long long atom_num = 0;        // area numerator of flat triangles sitting at this node
    std::vector<int> flat_tris;
    std::vector<int> arcs;
  };
  std::vector<Node> nodes;         // sorted by (value, verts[0]); ids follow that order
  std::vector<int> vert_node;

  // Crossing entry: a non-flat triangle whose swept path covers the arc,
  // tagged with which quadratic branch of its area profile applies there
  // (false: below the middle vertex, true: above).
  struct Arc {
    int lo = -1, hi = -1;          // node ids; value(lo) < value(hi)
    std::vector<std::pair<int, bool>> crossings;
    double segmass = 0;            // swept area in doubles; exact sums on demand
  };
  std::vector<Arc> arcs;

  // rooted at node 0 for side tests
  std::vector<int> parent, parent_arc, depth;
  std::vector<int> tin, tout;
  std::vector<long long> sub_atom;  // subtree atom numerators
  std::vector<double> sub_mass;     // subtree atoms + segmass, doubles

  std::vector<std::array<int, 3>> tri_nodes;  // per triangle, node ids sorted ascending
  std::vector<char> tri_flat;

  bool in_subtree(int anc, int x) const { return tin[anc] <= tin[x] && tout[x] <= tout[anc]; }

  // total area on the far side of `arc` seen from node n (one of its ends), exact
  Rational exact_branch(int n, int arc) const;
  // same in doubles, using the precomputed subtree sums
  double branch_mass(int n, int arc) const;
};

// Builds the fine contour tree. Requires a sphere mesh (the construction
// relies on join/split sweeps, which assume a simply connected surface).
FineTree build_fine_tree(const TriMesh& m, const PLFunction& f);

struct MedianResult {
  bool at_node = false;
  int node = -1;                   // fine-tree node id when at_node
  int arc = -1;                    // fine-tree arc id otherwise
  double value = 0;                // level value of the median contour
  std::vector<Rational> complement_areas;  // exact, descending
  LevelComponent gamma;            // representative contour at that level
};

// The unique point of the contour tree all of whose complement branches have
// area <= 1/2. Lands on a node (possibly a plateau) or inside an arc; in the
// arc case the two complement areas are exactly 1/2 each and the value is the
// root of the swept-area equation, solved in doubles.
MedianResult median_component(const TriMesh& m, const PLFunction& f);

double zeta_median(const TriMesh& m, const PLFunction& f);

struct ReebGraph {
  struct Node {
    double value = 0;
    std::string type;              // "min" | "max" | "saddle" | "plateau"
    Rational plateau_area;         // zero unless type == "plateau"
    std::vector<int> verts;        // vertices of the critical component
  };
  struct Arc {
    int lo = -1, hi = -1;          // node ids
    double lo_value = 0, hi_value = 0;
    Rational weight;               // exact area swept between the endpoints
  };
  std::vector<Node> nodes;
  std::vector<Arc> arcs;
  Rational total_area;
  bool is_tree = false;
};

// Slab sweep between consecutive vertex values; works on spheres and tori.
// Arc weights are exact and, together with plateau areas, sum to the total
// surface area.
ReebGraph build_reeb(const TriMesh& m, const PLFunction& f);

std::string reeb_to_dot(const ReebGraph& g);

// exact area fraction of triangle t lying below level u, given the exact
// level and the triangle's corner values
Rational tri_below_fraction(double k1, double k2, double k3, const Rational& u);

}  // namespace qs
