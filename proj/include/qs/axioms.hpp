#pragma once

// Seeded property-test harness for the state and measure axioms, plus the
// moment-family fiber search that locates the non-displaceable fiber of a
// commuting family.

#include <array>
#include <string>
#include <utility>
#include <vector>

#include "qs/mesh.hpp"
#include "qs/topmeasure.hpp"

namespace qs {

// A family of functions that pairwise commute because each one is a
// polynomial reparametrization of the shared generator. The generator is
// built with a dominant bottom plateau (a level region heavier than half the
// surface), which keeps every member's median pinned to the plateau value
// and makes the additivity and multiplicativity identities exact in double
// arithmetic rather than approximate.
struct CommutingFamily {
  PLFunction generator;
  double plateau_value = 0.0;  // generator value on the heavy plateau
  double gen_min = 0.0, gen_max = 0.0;
  struct Member {
    // p(x) = c + g x + (a/3)((x-b)^3 + b^3), increasing for g > 0, a >= 0
    std::array<double, 4> coef{0, 0, 0, 0};  // c, g, a, b
    PLFunction fn;
    double at_plateau = 0.0;
  };
  std::vector<Member> members;
};

CommutingFamily make_plateau_family(const TriMesh& m, unsigned long long seed,
                                    int n_members);

// evaluate a member polynomial at a point
double plateau_poly(const std::array<double, 4>& coef, double x);

// A function vanishing identically outside a grown disc of area below the
// given cap, with mixed-sign values on the disc interior. The area of the
// supporting disc is written to area_out when given.
PLFunction make_disc_supported_function(const TriMesh& m,
                                        unsigned long long seed,
                                        const Rational& max_area,
                                        Rational* area_out = nullptr);

// F1 a monotone image of a plateau generator, F2 a ramp of the same
// generator supported in a small superlevel cap, so the pair commutes and
// the second summand has displaceable support.
struct PartialPair {
  PLFunction f1;
  PLFunction f2;
};
PartialPair make_partial_additivity_pair(const TriMesh& m,
                                         unsigned long long seed);

struct AxiomSuiteReport {
  std::string suite_name;
  int cases_run = 0;
  double tolerance = 0.0;
  struct Failure {
    std::string input_digest;
    std::string expected;
    std::string observed;
    double gap = 0.0;
  };
  std::vector<Failure> failures;
  double max_gap = 0.0;
};

// Runs one named axiom suite over a seeded corpus. Known suites:
// quasi_linearity, monotonicity, normalization, strong_quasi_additivity,
// vanishing, partial_additivity, semi_homogeneity, multiplicativity_on_AF,
// quasi_measure_axioms. Empty evaluators default to the median state and
// the closed-set sphere measure. Unknown names throw InputError.
AxiomSuiteReport run_suite(const TriMesh& m, const std::string& suite,
                           unsigned long long corpus_seed, int n_cases,
                           double tol, StateEvaluator state = {},
                           MeasureEvaluator measure = {});

struct PartialAdditivityReport {
  double lhs = 0.0;  // state(F1 + F2)
  double rhs = 0.0;  // state(F1)
  double gap = 0.0;
  bool pass = false;
  Rational support_area;  // area of the disc carrying F2
};

// Checks state(F1+F2) = state(F1) after verifying that the pair commutes
// (one function determines the other through their common generator) and
// that supp F2 sits inside a disc of area strictly below 1/2. Precondition
// violations throw InputError naming the failed requirement.
PartialAdditivityReport partial_additivity_check(const TriMesh& m,
                                                 const StateEvaluator& state,
                                                 const PLFunction& f1,
                                                 const PLFunction& f2,
                                                 double tol = 1e-9);

struct MomentFamily {
  std::vector<PLFunction> functions;
};

// Result of sweeping the measure along a one-generator moment family over a
// uniform value grid. sigma is an exact probability distribution over the
// grid cells; cells with positive mass are the non-displaceable fiber
// candidates, and every other cell's fiber is certified displaceable by
// enclosing each of its components in a solid region of area below 1/2.
struct FiberSearchResult {
  std::vector<double> grid;  // cell boundaries, size cells + 1
  std::vector<Rational> sigma;
  std::vector<int> support;             // indices of positive-mass cells
  std::vector<Subcomplex> candidates;   // their fibers
  int certified_cells = 0;              // off-support cells checked
  bool degenerate = false;
  std::string note;
};
FiberSearchResult fiber_search(const TriMesh& m, const MomentFamily& family,
                               int covering_resolution);

}  // namespace qs
