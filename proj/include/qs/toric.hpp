#pragma once

// Exact-rational moment polytopes with displaceability certificates for
// torus-action fibers, and the grid search that isolates the stem point.
// Everything here is rational arithmetic; no floating point.

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "qs/mesh.hpp"  // InputError, InvariantError
#include "qs/rational.hpp"

namespace qs {

using RPoint = std::vector<Rational>;

struct MomentPolytope {
  int dim = 0;
  std::vector<RPoint> vertices;
  // inner-normal facet: points y of the polytope satisfy <normal, y> >= offset,
  // with equality on the facet; normals are primitive integer vectors
  struct Facet {
    std::vector<long long> normal;
    Rational offset;
  };
  std::vector<Facet> facets;
  std::map<std::string, RPoint> landmarks;
  // set for polytopes known to be moment images of compact toric manifolds;
  // gates the boundary-fiber certificate
  bool from_toric = false;
  // non-empty exactly when built as a direct product
  std::vector<MomentPolytope> factors;
};

// Checks facet/vertex consistency and the smoothness condition: every vertex
// lies on exactly dim facets whose normals form a lattice basis. Throws
// InputError otherwise.
void validate_polytope(const MomentPolytope& p);

// slack of facet f at x: <normal, x> - offset, nonnegative inside
Rational facet_slack(const MomentPolytope& p, int f, const RPoint& x);
bool contains_point(const MomentPolytope& p, const RPoint& x);

MomentPolytope cp_n(int n);
MomentPolytope blowup_cp2();
MomentPolytope product_polytope(const std::vector<MomentPolytope>& factors);

// "cp1", "cp2", "cp3", or "blowup-cp2"; anything else is an error
MomentPolytope builtin_polytope(const std::string& name);

// 2D polytope from JSON {"vertices": [["p/q","r/s"],...],
// "landmarks": {"name": ["p/q","r/s"], ...}}; the convex hull of the listed
// points is taken and validated
MomentPolytope polytope_from_json(const std::string& text);

struct Certificate {
  enum class Kind {
    ReflectionSymmetry,
    VertexChartInvolution,
    PolydiscProjection,
    LowDimensionalFiber,
    ProductFactor,
    SubsetOfDisplaceable,  // reserved for externally supplied regions
  };
  Kind kind = Kind::ReflectionSymmetry;

  // ReflectionSymmetry: x -> matrix x + shift maps the polytope onto itself
  // and moves x to image
  std::vector<std::vector<long long>> matrix;
  RPoint shift;
  RPoint image;

  // VertexChartInvolution / PolydiscProjection: the chart vertex and the
  // two swapped chart axes, or the projected axis with its area ratio
  int vertex = -1;
  int axis_i = -1;
  int axis_j = -1;
  Rational ratio;

  // LowDimensionalFiber: the boundary facet carrying x
  int facet = -1;

  // ProductFactor: which factor displaces, with the inner certificate
  int factor = -1;
  std::vector<Certificate> inner;
};

std::string certificate_kind_name(Certificate::Kind k);

// Re-derives every claim a certificate makes against the polytope and the
// point; throws InvariantError when a witness does not check out. Run on
// every certificate the search emits.
void verify_certificate(const MomentPolytope& p, const RPoint& x,
                        const Certificate& c);

// Tries, in a fixed order, the boundary rule, polytope symmetries, vertex
// chart involutions, polydisc projections and factor recursion. Returns the
// first certificate that verifies, or nothing for points such as the stem.
// Throws InputError when x is outside the polytope.
std::optional<Certificate> certify_displaceable(const MomentPolytope& p,
                                                const RPoint& x);

// all lattice-affine self-maps of the polytope, lexicographically ordered;
// includes the identity
std::vector<std::pair<std::vector<std::vector<long long>>, RPoint>>
polytope_symmetries(const MomentPolytope& p);

struct StemReport {
  int grid_denominator = 0;
  long long points_checked = 0;
  // grid points in lexicographic order with their certificates; uncertified
  // points carry no entry here and are listed separately
  std::vector<std::pair<RPoint, Certificate>> certified;
  std::vector<RPoint> uncertified;
  std::map<std::string, long long> kind_counts;
  // landmark name -> whether every uncertified point lies within one grid
  // cell of that landmark
  std::map<std::string, bool> stem_within_cell;
  std::string note;
};

// Certifies every grid point with coordinates k/denominator inside the
// closed polytope. denominator must be at least 2.
StemReport stem_search(const MomentPolytope& p, int denominator);

}  // namespace qs
