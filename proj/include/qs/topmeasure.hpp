#pragma once

// Quasi-measures: {0,1}-valued set functions on sphere subcomplexes, the
// Grubb measure on torus subsurfaces, and the two sweep constructions that
// pass between quasi-measures and quasi-states.

#include <array>
#include <functional>
#include <utility>
#include <vector>

#include "qs/mesh.hpp"

namespace qs {

// evaluators passed into the duality constructions
using StateEvaluator = std::function<double(const TriMesh&, const PLFunction&)>;
using MeasureEvaluator =
    std::function<Rational(const TriMesh&, const Subcomplex&)>;

// Measure of a solid set: 1 when its area reaches 1/2, else 0. Requires
// is_solid(a); other closed sets go through tau_closed_sphere.
int tau_solid_sphere(const TriMesh& m, const Subcomplex& a);

// Measure of an arbitrary closed set A: a connected component of A wins when
// every component of its open complement has area at most 1/2. At most one
// component can win (two winners would force two disjoint heavy regions),
// and that is asserted. Returns the winner count with the winning component's
// index in subcomplex_components order, or -1.
struct SphereTau {
  int value = 0;
  int winner = -1;
};
SphereTau tau_closed_sphere_detail(const TriMesh& m, const Subcomplex& a);
int tau_closed_sphere(const TriMesh& m, const Subcomplex& a);

// Measure of the open set M minus A, via complementarity: 1 - tau(A).
int tau_open_sphere(const TriMesh& m, const Subcomplex& a);

// True when every complement component of the graph is an open disc of area
// at most 1/2; such a subcomplex carries the whole measure concentrated on it.
bool in_skeleton_class(const TriMesh& m, const Subcomplex& g);

// the closed superlevel subcomplex {F >= a}: full cells whose closure stays
// in the superlevel set
Subcomplex superlevel_subcomplex(const TriMesh& m, const PLFunction& f,
                                 double a);

// Upper bounds for the measure of A obtained by evaluating the state on a
// family of cutoff functions: F_r is 1 on A and decays linearly to 0 over r
// rings of the vertex neighborhood graph. sequence[i] is the value at decay
// radius i+1; widening the collar can only increase the function, so the
// sequence is nondecreasing and the infimum over the family sits at radius 1.
struct CutoffReport {
  double value = 0.0;
  std::vector<double> sequence;
};
CutoffReport tau_from_state(const TriMesh& m, const StateEvaluator& state,
                            const Subcomplex& a, int family_depth);

// finitely supported measure on the real line, atoms sorted by position
struct DiscreteMeasure {
  std::vector<std::pair<double, Rational>> atoms;
};

// Distribution of F under a measure: sweep the superlevel subcomplexes over
// the distinct vertex values and put the measure drop between consecutive
// thresholds at the lower threshold. Requires the evaluator to be monotone,
// so each drop is nonnegative.
DiscreteMeasure superlevel_distribution(const TriMesh& m,
                                        const MeasureEvaluator& tau,
                                        const PLFunction& f);

// The state recovered from a measure: the integral of the identity against
// superlevel_distribution.
double state_from_tau(const TriMesh& m, const MeasureEvaluator& tau,
                      const PLFunction& f);

// Distribution of F under the measure tau_closed_sphere. That measure is
// monotone and {0,1}-valued, so the result is a single unit atom; the
// asserted shape makes the dispersion-free character of the median state
// visible directly.
DiscreteMeasure pushforward_distribution(const TriMesh& m,
                                         const PLFunction& f);

// ---- torus ----

// A compact connected subsurface of the torus given by its triangles.
// Boundary curves are the cycles of edges with exactly one incident
// subsurface triangle; each carries its homology class in the integer grid
// basis. `contractible` records whether every cycle in the subsurface is
// null-homologous in the torus.
struct TorusSubsurface {
  std::vector<int> tris;
  Rational area;
  bool contractible = false;
  struct BoundaryCurve {
    std::vector<int> edges;             // cyclic order around the curve
    std::array<long long, 2> h1{0, 0};  // winding numbers of the curve
  };
  std::vector<BoundaryCurve> curves;
};

// Validates the manifold-with-boundary conditions (one or two subsurface
// triangles per edge, a single triangle fan at every vertex) and computes
// boundary curves and homology data. Throws InputError otherwise.
TorusSubsurface analyze_torus_subsurface(const TriMesh& m,
                                         const std::vector<int>& tris);

// whether the subsurface maps to zero in the torus homology
bool contractible_in_torus(const TriMesh& m, const std::vector<int>& tris);

// Torus measure of a closed set, evaluated per connected component:
//  - a contractible subsurface measures 0;
//  - a non-contractible subsurface measures its area plus the areas of the
//    discs its null-homologous boundary curves cut off;
//  - a bare non-separating circle measures 0;
//  - isolated vertices measure 0.
// Bare separating circles, dangling edges and pinched configurations are
// outside the supported class and throw InputError. Component values are
// summed, with a final check that the total stays at most 1.
struct TorusTau {
  Rational total;
  std::vector<Rational> per_component;
};
TorusTau grubb_tau_torus_detail(const TriMesh& m, const Subcomplex& a);
Rational grubb_tau_torus(const TriMesh& m, const Subcomplex& a);

}  // namespace qs
