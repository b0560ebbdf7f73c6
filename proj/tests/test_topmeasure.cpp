#include <doctest.h>

#include "qs/topmeasure.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <set>
#include <vector>

#include "qs/reeb.hpp"

using namespace qs;

namespace {

PLFunction height(const TriMesh& m) {
  PLFunction f;
  for (const auto& v : m.verts) f.vals.push_back(v[2]);
  return f;
}

Subcomplex equator_circle(const TriMesh& m) {
  std::vector<int> edges;
  for (int e = 0; e < m.ne(); ++e) {
    if (m.verts[m.edge_verts[e][0]][2] == 0.0 &&
        m.verts[m.edge_verts[e][1]][2] == 0.0)
      edges.push_back(e);
  }
  return make_subcomplex(m, {}, edges, {});
}

// the three coordinate great circles: the subdivided edge graph of the
// base octahedron
Subcomplex octahedron_skeleton(const TriMesh& m) {
  std::vector<int> edges;
  for (int e = 0; e < m.ne(); ++e) {
    const auto& a = m.verts[m.edge_verts[e][0]];
    const auto& b = m.verts[m.edge_verts[e][1]];
    for (int ax = 0; ax < 3; ++ax)
      if (a[ax] == 0.0 && b[ax] == 0.0) {
        edges.push_back(e);
        break;
      }
  }
  return make_subcomplex(m, {}, edges, {});
}

Subcomplex disc_sub(const TriMesh& m, int seed, const Rational& area) {
  return make_subcomplex(m, grow_disc(m, seed, area));
}

Subcomplex union_sub(const TriMesh& m, const Subcomplex& a,
                     const Subcomplex& b) {
  std::vector<int> tris = a.tris;
  tris.insert(tris.end(), b.tris.begin(), b.tris.end());
  std::vector<int> edges = a.edges;
  edges.insert(edges.end(), b.edges.begin(), b.edges.end());
  std::vector<int> verts = a.verts;
  verts.insert(verts.end(), b.verts.begin(), b.verts.end());
  return make_subcomplex(m, tris, edges, verts);
}

// Independent route to the closed-set measure: additivity over components,
// then for a connected piece express each open complement component U_i
// through the solid set M minus U_i, whose measure the area rule decides.
int tau_recursion_oracle(const TriMesh& m, const Subcomplex& a) {
  int total = 0;
  for (const Subcomplex& v : subcomplex_components(m, a)) {
    std::vector<OpenComponent> occ = complement_components(m, v);
    long long val = 1;
    for (size_t i = 0; i < occ.size(); ++i) {
      std::vector<int> tris = v.tris;
      for (size_t j = 0; j < occ.size(); ++j)
        if (j != i)
          tris.insert(tris.end(), occ[j].tris.begin(), occ[j].tris.end());
      Subcomplex w = make_subcomplex(m, tris, v.edges, v.verts);
      val -= 1 - tau_solid_sphere(m, w);
    }
    REQUIRE((val == 0 || val == 1));
    total += static_cast<int>(val);
  }
  return total;
}

// exact integral of a vertex-interpolated function, triangle by triangle
Rational pl_integral(const TriMesh& m, const PLFunction& f) {
  FracAcc acc;
  for (int t = 0; t < m.nt(); ++t) {
    Rational mean = (exact_rational(f.vals[m.tris[t][0]]) +
                     exact_rational(f.vals[m.tris[t][1]]) +
                     exact_rational(f.vals[m.tris[t][2]])) /
                    3;
    acc.add(mean * m.tri_area(t));
  }
  return acc.value();
}

Rational pl_span_bound(const TriMesh& m, const PLFunction& f) {
  FracAcc acc;
  for (int t = 0; t < m.nt(); ++t) {
    double lo = f.vals[m.tris[t][0]], hi = lo;
    for (int k : {1, 2}) {
      lo = std::min(lo, f.vals[m.tris[t][k]]);
      hi = std::max(hi, f.vals[m.tris[t][k]]);
    }
    acc.add((exact_rational(hi) - exact_rational(lo)) * m.tri_area(t));
  }
  return acc.value();
}

Subcomplex random_subcomplex(const TriMesh& m, unsigned long long seed) {
  std::mt19937_64 rng(seed);
  auto unit = [&] { return (rng() >> 11) * 0x1p-53; };
  switch (rng() % 4) {
    case 0: {
      double p = 0.08 + 0.42 * unit();
      std::vector<int> tris;
      for (int t = 0; t < m.nt(); ++t)
        if (unit() < p) tris.push_back(t);
      return make_subcomplex(m, tris);
    }
    case 1: {
      int k = 1 + static_cast<int>(rng() % 3);
      std::vector<int> tris;
      for (int i = 0; i < k; ++i) {
        int seed_v = static_cast<int>(rng() % m.nv());
        Rational cap = exact_rational(0.05 + 0.4 * unit());
        std::vector<int> d = grow_disc(m, seed_v, cap);
        tris.insert(tris.end(), d.begin(), d.end());
      }
      return make_subcomplex(m, tris);
    }
    case 2: {
      double a = unit() * 2 - 1, b = unit() * 2 - 1, c = unit() * 2 - 1;
      double d = unit() * 2 - 1;
      PLFunction f;
      for (const auto& v : m.verts)
        f.vals.push_back(a * v[0] + b * v[1] + c * v[2] + d * v[0] * v[1]);
      std::vector<double> sorted = f.vals;
      std::sort(sorted.begin(), sorted.end());
      size_t q = static_cast<size_t>((0.2 + 0.6 * unit()) * (m.nv() - 1));
      return superlevel_subcomplex(m, f, sorted[q]);
    }
    default: {
      std::vector<int> edges;
      std::vector<int> verts;
      for (int e = 0; e < m.ne(); ++e)
        if (unit() < 0.15) edges.push_back(e);
      for (int v = 0; v < m.nv(); ++v)
        if (unit() < 0.05) verts.push_back(v);
      return make_subcomplex(m, {}, edges, verts);
    }
  }
}

// triangles of the torus grid cells i0 <= i < i1, j0 <= j < j1
std::vector<int> cell_block(int n, int i0, int i1, int j0, int j1) {
  std::vector<int> tris;
  for (int j = j0; j < j1; ++j)
    for (int i = i0; i < i1; ++i) {
      tris.push_back(2 * (j * n + i));
      tris.push_back(2 * (j * n + i) + 1);
    }
  return tris;
}

// the vertical grid circle at x = i/n
std::vector<int> column_circle(const TriMesh& m, int i) {
  int n = m.torus_n;
  std::vector<int> edges;
  for (int j = 0; j < n; ++j) {
    int e = m.edge_between(j * n + i, ((j + 1) % n) * n + i);
    REQUIRE(e >= 0);
    edges.push_back(e);
  }
  return edges;
}

std::vector<int> region_boundary_edges(const TriMesh& m,
                                       const std::vector<int>& tris) {
  std::vector<int> cnt(m.ne(), 0);
  for (int t : tris)
    for (int e : m.tri_edges[t]) ++cnt[e];
  std::vector<int> out;
  for (int e = 0; e < m.ne(); ++e)
    if (cnt[e] == 1) out.push_back(e);
  return out;
}

}  // namespace

TEST_CASE("solid sets measure one exactly when they reach half the area") {
  TriMesh m = build_mesh(MeshKind::Sphere, 3);
  Subcomplex north = superlevel_subcomplex(m, height(m), 0.0);
  CHECK(tau_solid_sphere(m, north) == 1);

  Subcomplex disc = disc_sub(m, 4, Rational(2, 5));
  CHECK(tau_solid_sphere(m, disc) == 0);

  Subcomplex whole = make_subcomplex(
      m, [&] {
        std::vector<int> all(m.nt());
        for (int t = 0; t < m.nt(); ++t) all[t] = t;
        return all;
      }());
  CHECK(tau_solid_sphere(m, whole) == 1);

  // an equatorial band separates the sphere, so the solid rule refuses it
  std::vector<int> band;
  for (int t = 0; t < m.nt(); ++t) {
    bool ok = true;
    for (int v : m.tris[t]) ok = ok && std::abs(m.verts[v][2]) < 0.35;
    if (ok) band.push_back(t);
  }
  CHECK_THROWS_AS(tau_solid_sphere(m, make_subcomplex(m, band)), InputError);

  TriMesh t6 = build_mesh(MeshKind::Torus, 6);
  CHECK_THROWS_AS(
      tau_solid_sphere(t6, make_subcomplex(t6, {0, 1})), InputError);
}

TEST_CASE("a component wins when its complement splits into half-area pieces") {
  TriMesh m = build_mesh(MeshKind::Sphere, 4);

  SphereTau eq = tau_closed_sphere_detail(m, equator_circle(m));
  CHECK(eq.value == 1);
  CHECK(eq.winner == 0);

  Subcomplex disc = disc_sub(m, 4, Rational(2, 5));
  SphereTau d = tau_closed_sphere_detail(m, disc);
  CHECK(d.value == 0);
  CHECK(d.winner == -1);

  {
    // discs grown at resolution 4 are jagged enough to collide near the
    // equator; one level finer they stay in their hemispheres
    TriMesh m5 = build_mesh(MeshKind::Sphere, 5);
    Subcomplex two = union_sub(m5, disc_sub(m5, 4, Rational(2, 5)),
                               disc_sub(m5, 5, Rational(2, 5)));
    REQUIRE(subcomplex_components(m5, two).size() == 2);
    CHECK(tau_closed_sphere(m5, two) == 0);
  }

  CHECK(tau_closed_sphere(m, superlevel_subcomplex(m, height(m), 0.0)) == 1);
  CHECK(tau_closed_sphere(m, Subcomplex{}) == 0);
  CHECK(tau_closed_sphere(m, make_subcomplex(m, {}, {}, {0})) == 0);
  CHECK(tau_closed_sphere(m, octahedron_skeleton(m)) == 1);

  std::vector<int> all(m.nt());
  for (int t = 0; t < m.nt(); ++t) all[t] = t;
  CHECK(tau_closed_sphere(m, make_subcomplex(m, all)) == 1);

  TriMesh t6 = build_mesh(MeshKind::Torus, 6);
  CHECK_THROWS_AS(tau_closed_sphere(t6, Subcomplex{}), InputError);
}

TEST_CASE("open sets measure by complementarity") {
  TriMesh m = build_mesh(MeshKind::Sphere, 4);
  PLFunction h = height(m);

  // the open northern hemisphere is the complement of the closed southern one
  PLFunction neg;
  for (double v : h.vals) neg.vals.push_back(-v);
  Subcomplex south = superlevel_subcomplex(m, neg, 0.0);
  CHECK(tau_open_sphere(m, south) == 0);

  CHECK(tau_open_sphere(m, disc_sub(m, 4, Rational(1, 10))) == 1);

  std::vector<int> all(m.nt());
  for (int t = 0; t < m.nt(); ++t) all[t] = t;
  CHECK(tau_open_sphere(m, make_subcomplex(m, all)) == 0);
}

TEST_CASE("skeleton graphs leave only small disc faces") {
  TriMesh m = build_mesh(MeshKind::Sphere, 4);
  CHECK(in_skeleton_class(m, equator_circle(m)));

  Subcomplex skel = octahedron_skeleton(m);
  CHECK(in_skeleton_class(m, skel));
  std::vector<OpenComponent> faces = complement_components(m, skel);
  CHECK(faces.size() == 8);
  for (const OpenComponent& f : faces) CHECK(f.area == Rational(1, 8));

  // a small circle leaves one face that is far too big
  std::vector<int> disc = grow_disc(m, 4, Rational(2, 5));
  Subcomplex rim = make_subcomplex(m, {}, region_boundary_edges(m, disc), {});
  CHECK_FALSE(in_skeleton_class(m, rim));

  CHECK_FALSE(in_skeleton_class(m, Subcomplex{}));

  // a tree leaves a single disc face of full area
  Subcomplex path = make_subcomplex(m, {}, {0, 1}, {});
  CHECK_FALSE(in_skeleton_class(m, path));
}

TEST_CASE("component rule agrees with the solid-rule recursion") {
  TriMesh m = build_mesh(MeshKind::Sphere, 3);
  CHECK(tau_closed_sphere(m, equator_circle(m)) ==
        tau_recursion_oracle(m, equator_circle(m)));
  Subcomplex disc = disc_sub(m, 4, Rational(2, 5));
  CHECK(tau_closed_sphere(m, disc) == tau_recursion_oracle(m, disc));

  for (unsigned long long seed = 1; seed <= 40; ++seed) {
    Subcomplex a = random_subcomplex(m, seed);
    CAPTURE(seed);
    CHECK(tau_closed_sphere(m, a) == tau_recursion_oracle(m, a));
  }
}

TEST_CASE("the measure is normalized and monotone under adding cells") {
  TriMesh m = build_mesh(MeshKind::Sphere, 3);
  std::vector<int> all(m.nt());
  for (int t = 0; t < m.nt(); ++t) all[t] = t;
  CHECK(tau_closed_sphere(m, make_subcomplex(m, all)) == 1);

  for (unsigned long long seed = 100; seed < 120; ++seed) {
    Subcomplex a = random_subcomplex(m, seed);
    Subcomplex b = union_sub(m, a, random_subcomplex(m, seed + 1000));
    CAPTURE(seed);
    CHECK(tau_closed_sphere(m, a) <= tau_closed_sphere(m, b));
  }
}

TEST_CASE("disjoint closed unions add their measures") {
  TriMesh m = build_mesh(MeshKind::Sphere, 4);

  Subcomplex a = disc_sub(m, 4, Rational(1, 10));
  Subcomplex b = disc_sub(m, 5, Rational(1, 10));
  std::vector<int> shared;
  std::set_intersection(a.verts.begin(), a.verts.end(), b.verts.begin(),
                        b.verts.end(), std::back_inserter(shared));
  REQUIRE(shared.empty());
  CHECK(tau_closed_sphere(m, union_sub(m, a, b)) ==
        tau_closed_sphere(m, a) + tau_closed_sphere(m, b));

  // one heavy piece plus a far light one
  Subcomplex cap = superlevel_subcomplex(m, height(m), -0.1);
  Subcomplex far = disc_sub(m, 5, Rational(1, 20));
  shared.clear();
  std::set_intersection(cap.verts.begin(), cap.verts.end(), far.verts.begin(),
                        far.verts.end(), std::back_inserter(shared));
  REQUIRE(shared.empty());
  REQUIRE(tau_closed_sphere(m, cap) == 1);
  CHECK(tau_closed_sphere(m, union_sub(m, cap, far)) == 1);

  int usable = 0;
  for (unsigned long long seed = 0; seed < 12; ++seed) {
    std::mt19937_64 rng(900 + seed);
    Subcomplex x = disc_sub(m, static_cast<int>(rng() % m.nv()),
                            exact_rational(0.03 + 0.2 * ((rng() >> 11) * 0x1p-53)));
    Subcomplex y = disc_sub(m, static_cast<int>(rng() % m.nv()),
                            exact_rational(0.03 + 0.2 * ((rng() >> 11) * 0x1p-53)));
    shared.clear();
    std::set_intersection(x.verts.begin(), x.verts.end(), y.verts.begin(),
                          y.verts.end(), std::back_inserter(shared));
    if (!shared.empty()) continue;
    ++usable;
    CHECK(tau_closed_sphere(m, union_sub(m, x, y)) ==
          tau_closed_sphere(m, x) + tau_closed_sphere(m, y));
  }
  CHECK(usable >= 5);
}

TEST_CASE("a heavy union beats the sum of its light pieces") {
  // two discs of area about 2/5 joined by a thin band: each piece alone is
  // light, together they form a heavy solid set, so the measure is strictly
  // superadditive here
  TriMesh m = build_mesh(MeshKind::Sphere, 4);
  std::vector<int> band;
  {
    // vertex path from pole to pole, fattened by its triangle stars
    std::vector<int> prev(m.nv(), -1);
    std::vector<int> queue{4};
    prev[4] = 4;
    for (size_t k = 0; k < queue.size(); ++k) {
      int v = queue[k];
      if (v == 5) break;
      for (int w : m.vert_nbrs[v])
        if (prev[w] == -1) {
          prev[w] = v;
          queue.push_back(w);
        }
    }
    for (int v = 5; v != 4; v = prev[v])
      band.insert(band.end(), m.vert_tris[v].begin(), m.vert_tris[v].end());
  }
  Subcomplex a = union_sub(m, disc_sub(m, 4, Rational(2, 5)),
                           make_subcomplex(m, band));
  Subcomplex b = disc_sub(m, 5, Rational(2, 5));

  FracAcc area_a;
  for (int t : a.tris) area_a.add(m.tri_area(t));
  REQUIRE(area_a.cmp(Rational(1, 2)) < 0);

  int ta = tau_closed_sphere(m, a);
  int tb = tau_closed_sphere(m, b);
  int tu = tau_closed_sphere(m, union_sub(m, a, b));
  CHECK(ta == 0);
  CHECK(tb == 0);
  CHECK(tu == 1);
  CHECK(tu > ta + tb);
}

TEST_CASE("full-measure open sets contain full-measure closed sets") {
  TriMesh m = build_mesh(MeshKind::Sphere, 4);
  Subcomplex hole = disc_sub(m, 4, Rational(1, 10));
  REQUIRE(tau_open_sphere(m, hole) == 1);

  // pull back from the open complement: drop every triangle touching the hole
  std::set<int> hv(hole.verts.begin(), hole.verts.end());
  std::vector<int> tris;
  for (int t = 0; t < m.nt(); ++t) {
    bool touches = false;
    for (int v : m.tris[t]) touches = touches || hv.count(v);
    if (!touches) tris.push_back(t);
  }
  Subcomplex inner = make_subcomplex(m, tris);
  std::vector<int> shared;
  std::set_intersection(inner.verts.begin(), inner.verts.end(),
                        hole.verts.begin(), hole.verts.end(),
                        std::back_inserter(shared));
  REQUIRE(shared.empty());
  CHECK(tau_closed_sphere(m, inner) == 1);

  // and a zero-measure open set admits no positive closed subset
  PLFunction neg;
  for (const auto& v : m.verts) neg.vals.push_back(-v[2]);
  REQUIRE(tau_open_sphere(m, superlevel_subcomplex(m, neg, 0.0)) == 0);
  CHECK(tau_closed_sphere(m, superlevel_subcomplex(m, neg, 0.1)) == 0);
}

TEST_CASE("cutoff families shrink to the measure of the set") {
  // resolution 5: at coarser meshes the one-ring collar around a 2/5 disc
  // already tips the support past half the area
  TriMesh m = build_mesh(MeshKind::Sphere, 5);
  StateEvaluator zeta = [](const TriMesh& mm, const PLFunction& ff) {
    return zeta_median(mm, ff);
  };

  std::vector<int> all(m.nt());
  for (int t = 0; t < m.nt(); ++t) all[t] = t;
  Subcomplex whole = make_subcomplex(m, all);
  Subcomplex north = superlevel_subcomplex(m, height(m), 0.0);
  Subcomplex eq = equator_circle(m);
  Subcomplex disc = disc_sub(m, 4, Rational(2, 5));

  for (const auto& [set, expect] :
       std::vector<std::pair<const Subcomplex*, double>>{
           {&whole, 1.0}, {&north, 1.0}, {&eq, 1.0}, {&disc, 0.0}}) {
    CutoffReport rep = tau_from_state(m, zeta, *set, 4);
    CHECK(rep.value == expect);
    CHECK(rep.value == static_cast<double>(tau_closed_sphere(m, *set)));
    REQUIRE(rep.sequence.size() == 4);
    for (size_t i = 1; i < rep.sequence.size(); ++i)
      CHECK(rep.sequence[i] >= rep.sequence[i - 1]);
  }

  CutoffReport w = tau_from_state(m, zeta, whole, 3);
  for (double v : w.sequence) CHECK(v == 1.0);

  CHECK_THROWS_AS(tau_from_state(m, zeta, eq, 0), InputError);
}

TEST_CASE("threshold sweeps recover the state from the measure") {
  TriMesh m = build_mesh(MeshKind::Sphere, 4);
  MeasureEvaluator simple = [](const TriMesh& mm, const Subcomplex& aa) {
    return Rational(tau_closed_sphere(mm, aa));
  };

  CHECK(state_from_tau(m, simple, height(m)) == 0.0);

  PLFunction c;
  c.vals.assign(m.nv(), 2.625);
  CHECK(state_from_tau(m, simple, c) == 2.625);
}

TEST_CASE("area-weighted sweeps approximate the direct integral") {
  TriMesh m = build_mesh(MeshKind::Sphere, 3);
  MeasureEvaluator area = [](const TriMesh& mm, const Subcomplex& aa) {
    FracAcc acc;
    for (int t : aa.tris) acc.add(mm.tri_area(t));
    return acc.value();
  };

  std::mt19937_64 rng(77);
  for (int cases = 0; cases < 6; ++cases) {
    double a = (rng() >> 11) * 0x1p-53 * 2 - 1;
    double b = (rng() >> 11) * 0x1p-53 * 2 - 1;
    double cc = (rng() >> 11) * 0x1p-53 * 2 - 1;
    PLFunction f;
    for (const auto& v : m.verts)
      f.vals.push_back(a * v[0] + b * v[1] + cc * v[2] + 0.3 * v[0] * v[1]);
    double swept = state_from_tau(m, area, f);
    double exact = to_double(pl_integral(m, f));
    double bound = to_double(pl_span_bound(m, f));
    CAPTURE(cases);
    CHECK(std::abs(swept - exact) <= bound + 1e-12);
  }
}

TEST_CASE("functions push forward to a unit point mass") {
  TriMesh m = build_mesh(MeshKind::Sphere, 4);

  DiscreteMeasure h = pushforward_distribution(m, height(m));
  REQUIRE(h.atoms.size() == 1);
  CHECK(h.atoms[0].first == 0.0);
  CHECK(h.atoms[0].second == Rational(1));
  CHECK(h.atoms[0].first == zeta_median(m, height(m)));

  PLFunction c;
  c.vals.assign(m.nv(), -1.375);
  DiscreteMeasure dc = pushforward_distribution(m, c);
  REQUIRE(dc.atoms.size() == 1);
  CHECK(dc.atoms[0].first == -1.375);

  // two bumps over a dominant zero plateau: the point mass sits at the
  // plateau value picked by the median
  PLFunction f;
  f.vals.assign(m.nv(), 0.0);
  for (int sv : {4, 5}) {
    std::vector<int> disc = grow_disc(m, sv, Rational(1, 5));
    std::sort(disc.begin(), disc.end());
    std::set<int> in_disc;
    for (int t : disc)
      for (int v : m.tris[t]) in_disc.insert(v);
    for (int v : in_disc) {
      bool interior = true;
      for (int t : m.vert_tris[v])
        interior = interior && std::binary_search(disc.begin(), disc.end(), t);
      if (interior) f.vals[v] = sv == 4 ? 3.0 : 5.0;
    }
  }
  DiscreteMeasure bump = pushforward_distribution(m, f);
  REQUIRE(bump.atoms.size() == 1);
  CHECK(bump.atoms[0].first == zeta_median(m, f));
  CHECK(bump.atoms[0].first == 0.0);

  // generic data still concentrates at one value
  std::mt19937_64 rng(5);
  PLFunction g;
  for (const auto& v : m.verts)
    g.vals.push_back(v[2] + 1e-3 * ((rng() >> 11) * 0x1p-53));
  DiscreteMeasure dg = pushforward_distribution(m, g);
  REQUIRE(dg.atoms.size() == 1);
  CHECK(dg.atoms[0].second == Rational(1));

  TriMesh t6 = build_mesh(MeshKind::Torus, 6);
  PLFunction tf;
  tf.vals.assign(t6.nv(), 0.0);
  CHECK_THROWS_AS(pushforward_distribution(t6, tf), InputError);
}

TEST_CASE("a non-monotone measure evaluator is refused") {
  TriMesh m = build_mesh(MeshKind::Sphere, 2);
  MeasureEvaluator bogus = [](const TriMesh&, const Subcomplex& aa) {
    return Rational(static_cast<int>(aa.verts.size() % 2));
  };
  CHECK_THROWS_AS(superlevel_distribution(m, bogus, height(m)),
                  InvariantError);
}

TEST_CASE("torus measure of annuli, discs and their complements") {
  TriMesh m = build_mesh(MeshKind::Torus, 10);
  int n = m.torus_n;

  // closed annulus covering half the torus
  Subcomplex annulus = make_subcomplex(m, cell_block(n, 0, 5, 0, n));
  CHECK(grubb_tau_torus(m, annulus) == Rational(1, 2));
  CHECK_FALSE(contractible_in_torus(m, annulus.tris));

  std::vector<int> disc = grow_disc(m, 5 * n + 5, Rational(1, 5));
  CHECK(contractible_in_torus(m, disc));
  CHECK(grubb_tau_torus(m, make_subcomplex(m, disc)) == Rational(0));

  // The complement of an open disc measures the disc back in: whole mass.
  // A grid-aligned block disc keeps the complement free of pinch vertices,
  // which a greedily grown disc does not guarantee.
  std::vector<int> block = cell_block(n, 2, 6, 2, 7);
  REQUIRE(contractible_in_torus(m, block));
  std::set<int> in_disc(block.begin(), block.end());
  std::vector<int> rest;
  for (int t = 0; t < m.nt(); ++t)
    if (!in_disc.count(t)) rest.push_back(t);
  TorusSubsurface sub = analyze_torus_subsurface(m, rest);
  REQUIRE(sub.curves.size() == 1);
  CHECK(sub.curves[0].h1 == std::array<long long, 2>{0, 0});
  CHECK(grubb_tau_torus(m, make_subcomplex(m, rest)) == Rational(1));

  std::vector<int> all(m.nt());
  for (int t = 0; t < m.nt(); ++t) all[t] = t;
  CHECK(grubb_tau_torus(m, make_subcomplex(m, all)) == Rational(1));

  // disjoint pieces evaluate separately and sum
  Subcomplex mixed = union_sub(m, make_subcomplex(m, cell_block(n, 2, 5, 2, 6)),
                               make_subcomplex(m, cell_block(n, 8, 10, 0, n)));
  TorusTau detail = grubb_tau_torus_detail(m, mixed);
  CHECK(detail.total == Rational(1, 5));
  REQUIRE(detail.per_component.size() == 2);
  CHECK(std::count(detail.per_component.begin(), detail.per_component.end(),
                   Rational(0)) == 1);
  CHECK(std::count(detail.per_component.begin(), detail.per_component.end(),
                   Rational(1, 5)) == 1);
}

TEST_CASE("torus circles split by homology class") {
  TriMesh m = build_mesh(MeshKind::Torus, 10);

  // a grid meridian wraps once and measures zero
  Subcomplex meridian = make_subcomplex(m, {}, column_circle(m, 0), {});
  CHECK(grubb_tau_torus(m, meridian) == Rational(0));

  // the boundary of a disc separates; that case is outside the rules
  std::vector<int> disc = grow_disc(m, 44, Rational(1, 6));
  Subcomplex rim = make_subcomplex(m, {}, region_boundary_edges(m, disc), {});
  CHECK_THROWS_AS(grubb_tau_torus(m, rim), InputError);

  // a ring of cells whose core bounds a disc is contractible
  int n = m.torus_n;
  std::vector<int> ring;
  for (int j = 1; j <= 3; ++j)
    for (int i = 1; i <= 3; ++i) {
      if (i == 2 && j == 2) continue;
      ring.push_back(2 * (j * n + i));
      ring.push_back(2 * (j * n + i) + 1);
    }
  CHECK(contractible_in_torus(m, ring));
  CHECK(grubb_tau_torus(m, make_subcomplex(m, ring)) == Rational(0));

  // an annulus and a far meridian coexist
  Subcomplex both = union_sub(
      m, make_subcomplex(m, cell_block(n, 1, 6, 0, n)),
      make_subcomplex(m, {}, column_circle(m, 8), {}));
  CHECK(grubb_tau_torus(m, both) == Rational(1, 2));

  // isolated vertices weigh nothing
  CHECK(grubb_tau_torus(m, make_subcomplex(m, {}, {}, {0, 17})) ==
        Rational(0));
}

TEST_CASE("two annuli and two circles partition the torus measure") {
  TriMesh m = build_mesh(MeshKind::Torus, 10);
  int n = m.torus_n;
  Rational a = grubb_tau_torus(m, make_subcomplex(m, cell_block(n, 0, 5, 0, n)));
  Rational b = grubb_tau_torus(m, make_subcomplex(m, cell_block(n, 5, 10, 0, n)));
  Rational c1 =
      grubb_tau_torus(m, make_subcomplex(m, {}, column_circle(m, 0), {}));
  Rational c2 =
      grubb_tau_torus(m, make_subcomplex(m, {}, column_circle(m, 5), {}));
  CHECK(a == Rational(1, 2));
  CHECK(b == Rational(1, 2));
  CHECK(c1 == Rational(0));
  CHECK(c2 == Rational(0));
  CHECK(a + b + c1 + c2 == Rational(1));
}

TEST_CASE("malformed torus sets are rejected") {
  TriMesh m = build_mesh(MeshKind::Torus, 10);
  int n = m.torus_n;

  // two cells sharing only a vertex
  std::vector<int> bowtie = cell_block(n, 0, 1, 0, 1);
  std::vector<int> other = cell_block(n, 1, 2, 1, 2);
  bowtie.insert(bowtie.end(), other.begin(), other.end());
  CHECK_THROWS_AS(grubb_tau_torus(m, make_subcomplex(m, bowtie)), InputError);
  CHECK_THROWS_AS(analyze_torus_subsurface(m, bowtie), InputError);

  // a subsurface with a dangling edge glued on
  Subcomplex block = make_subcomplex(m, cell_block(n, 0, 2, 0, 2));
  int far_v = -1;
  for (int w : m.vert_nbrs[block.verts.front()]) {
    if (!std::binary_search(block.verts.begin(), block.verts.end(), w)) {
      far_v = w;
      break;
    }
  }
  REQUIRE(far_v >= 0);
  int dangle = m.edge_between(block.verts.front(), far_v);
  REQUIRE(dangle >= 0);
  Subcomplex dirty = make_subcomplex(m, block.tris, {dangle}, {});
  CHECK_THROWS_AS(grubb_tau_torus(m, dirty), InputError);

  // an open edge path is not a circle
  std::vector<int> path = {column_circle(m, 3)[0], column_circle(m, 3)[1]};
  CHECK_THROWS_AS(grubb_tau_torus(m, make_subcomplex(m, {}, path, {})),
                  InputError);

  TriMesh s = build_mesh(MeshKind::Sphere, 2);
  CHECK_THROWS_AS(grubb_tau_torus(s, Subcomplex{}), InputError);
  CHECK_THROWS_AS(analyze_torus_subsurface(s, {0}), InputError);
}
