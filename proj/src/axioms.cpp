#include "qs/axioms.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <random>
#include <set>

#include "qs/reeb.hpp"

namespace qs {
namespace {

double canon(std::mt19937_64& rng) {
  return static_cast<double>(rng() >> 11) * 0x1p-53;
}

Rational tris_area(const TriMesh& m, const std::vector<int>& ts) {
  long long s = 0;
  for (int t : ts) s += m.area_num[t];
  return Rational(s, m.area_den);
}

// low-degree polynomial in the embedding coordinates, plus a tiny seeded
// jitter so vertex values are pairwise distinct
PLFunction random_base(const TriMesh& m, std::mt19937_64& rng) {
  std::array<double, 9> c;
  for (double& v : c) v = 2.0 * canon(rng) - 1.0;
  PLFunction f;
  f.vals.resize(m.nv());
  for (int v = 0; v < m.nv(); ++v) {
    double x = m.verts[v][0], y = m.verts[v][1], z = m.verts[v][2];
    f.vals[v] = c[0] * x + c[1] * y + c[2] * z + c[3] * x * y + c[4] * y * z +
                c[5] * x * z + c[6] * (x * x - y * y) +
                c[7] * (2 * z * z - x * x - y * y) + c[8] * x * y * z;
  }
  auto [lo, hi] = std::minmax_element(f.vals.begin(), f.vals.end());
  double range = *hi - *lo;
  if (range == 0.0) range = 1.0;
  for (double& v : f.vals) v += (2.0 * canon(rng) - 1.0) * 1e-7 * range;
  return f;
}

// Smallest value c0 at or above the start quantile whose flat region
// {f <= c0} has a connected piece heavier than half the surface. Flat
// triangles are glued at shared vertices, matching level-set connectivity
// (every vertex of a flat triangle lies at the plateau value).
bool heavy_plateau_value(const TriMesh& m, const PLFunction& f, double* c0_out,
                         Rational* plateau_area) {
  std::vector<double> sorted = f.vals;
  std::sort(sorted.begin(), sorted.end());
  const int nv = m.nv();
  int step = std::max(1, nv / 64);
  for (int qidx = (nv * 3) / 5; qidx < nv - 1; qidx += step) {
    double c0 = sorted[qidx];
    std::vector<int> flat;
    for (int t = 0; t < m.nt(); ++t) {
      const auto& tr = m.tris[t];
      if (f.vals[tr[0]] <= c0 && f.vals[tr[1]] <= c0 && f.vals[tr[2]] <= c0)
        flat.push_back(t);
    }
    if (flat.empty()) continue;
    std::vector<char> is_flat(m.nt(), 0);
    for (int t : flat) is_flat[t] = 1;
    std::vector<int> parent(flat.size());
    std::iota(parent.begin(), parent.end(), 0);
    std::function<int(int)> find = [&](int a) {
      while (parent[a] != a) a = parent[a] = parent[parent[a]];
      return a;
    };
    std::vector<int> slot(m.nt(), -1);
    for (size_t i = 0; i < flat.size(); ++i) slot[flat[i]] = static_cast<int>(i);
    for (int v = 0; v < nv; ++v) {
      if (f.vals[v] > c0) continue;
      int first = -1;
      for (int t : m.vert_tris[v]) {
        if (!is_flat[t]) continue;
        if (first < 0)
          first = slot[t];
        else
          parent[find(slot[t])] = find(first);
      }
    }
    std::vector<long long> comp_num(flat.size(), 0);
    for (size_t i = 0; i < flat.size(); ++i)
      comp_num[find(static_cast<int>(i))] += m.area_num[flat[i]];
    long long best = *std::max_element(comp_num.begin(), comp_num.end());
    if (2 * best > m.area_den) {
      *c0_out = c0;
      if (plateau_area) *plateau_area = Rational(best, m.area_den);
      return true;
    }
  }
  return false;
}

unsigned long long mix_seed(unsigned long long seed, unsigned long long salt) {
  unsigned long long x = seed + 0x9E3779B97F4A7C15ull * (salt + 1);
  x ^= x >> 30;
  x *= 0xBF58476D1CE4E5B9ull;
  x ^= x >> 27;
  return x;
}

// Does the value of `a` at a vertex determine the value of `b` there?
// Exact equality on doubles; this is the finite form of functional
// dependence through a common generator.
bool value_determines(const PLFunction& a, const PLFunction& b) {
  std::vector<int> idx(a.vals.size());
  std::iota(idx.begin(), idx.end(), 0);
  std::sort(idx.begin(), idx.end(),
            [&](int u, int v) { return a.vals[u] < a.vals[v]; });
  for (size_t i = 1; i < idx.size(); ++i)
    if (a.vals[idx[i]] == a.vals[idx[i - 1]] &&
        b.vals[idx[i]] != b.vals[idx[i - 1]])
      return false;
  return true;
}

std::string fmt_double(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

}  // namespace

double plateau_poly(const std::array<double, 4>& coef, double x) {
  double d = x - coef[3];
  return coef[0] + coef[1] * x +
         (coef[2] / 3.0) * (d * d * d + coef[3] * coef[3] * coef[3]);
}

CommutingFamily make_plateau_family(const TriMesh& m, unsigned long long seed,
                                    int n_members) {
  if (n_members < 1) throw InputError("a commuting family needs at least one member");
  for (int attempt = 0; attempt < 50; ++attempt) {
    std::mt19937_64 rng(mix_seed(seed, attempt));
    PLFunction base = random_base(m, rng);
    double c0 = 0.0;
    if (!heavy_plateau_value(m, base, &c0, nullptr)) continue;

    CommutingFamily fam;
    fam.generator.vals.resize(m.nv());
    for (int v = 0; v < m.nv(); ++v)
      fam.generator.vals[v] = std::max(base.vals[v], c0);
    fam.plateau_value = c0;
    fam.gen_min = c0;
    fam.gen_max = *std::max_element(fam.generator.vals.begin(),
                                    fam.generator.vals.end());
    if (fam.gen_max == c0) continue;  // everything collapsed onto the plateau

    // distinct values above the plateau must be separated enough that later
    // perturbation corpora cannot fuse them
    std::vector<double> distinct = fam.generator.vals;
    std::sort(distinct.begin(), distinct.end());
    distinct.erase(std::unique(distinct.begin(), distinct.end()),
                   distinct.end());
    bool spaced = true;
    for (size_t i = 1; i < distinct.size(); ++i)
      if (distinct[i] - distinct[i - 1] < 1e-9) spaced = false;
    if (!spaced) continue;

    for (int k = 0; k < n_members; ++k) {
      CommutingFamily::Member mem;
      double g = 0.3 + 1.7 * canon(rng);
      double a = 1.5 * canon(rng);
      double b = fam.gen_min + (fam.gen_max - fam.gen_min) * canon(rng);
      double lift = 0.1 + 0.5 * canon(rng);
      // choose the constant so the member is bounded below by `lift` on the
      // generator's range; increasing polynomials of a positive family stay
      // positive, which products need
      std::array<double, 4> coef{0.0, g, a, b};
      double at_min = plateau_poly(coef, fam.gen_min);
      coef[0] = lift - at_min;
      mem.coef = coef;
      mem.fn.vals.resize(m.nv());
      for (int v = 0; v < m.nv(); ++v)
        mem.fn.vals[v] = plateau_poly(coef, fam.generator.vals[v]);
      mem.at_plateau = plateau_poly(coef, c0);
      fam.members.push_back(std::move(mem));
    }
    return fam;
  }
  throw InvariantError(
      "no heavy-plateau generator found after 50 attempts; the corpus sampler "
      "should always succeed on a closed surface");
}

PLFunction make_disc_supported_function(const TriMesh& m,
                                        unsigned long long seed,
                                        const Rational& max_area,
                                        Rational* area_out) {
  if (!(max_area < Rational(1, 2)))
    throw InputError("the supporting disc must have area below 1/2");
  for (int attempt = 0; attempt < 50; ++attempt) {
    std::mt19937_64 rng(mix_seed(seed, 0xD15Cull + attempt));
    int seed_vert = static_cast<int>(rng() % m.nv());
    std::vector<int> disc = grow_disc(m, seed_vert, max_area);
    std::vector<char> in_disc(m.nt(), 0);
    for (int t : disc) in_disc[t] = 1;
    std::vector<int> interior;
    for (int v = 0; v < m.nv(); ++v) {
      bool all = !m.vert_tris[v].empty();
      for (int t : m.vert_tris[v])
        if (!in_disc[t]) all = false;
      if (all) interior.push_back(v);
    }
    if (interior.size() < 3) continue;
    PLFunction f;
    f.vals.assign(m.nv(), 0.0);
    bool big = false;
    for (int v : interior) {
      f.vals[v] = 5.0 * (2.0 * canon(rng) - 1.0);
      if (std::fabs(f.vals[v]) > 0.05) big = true;
    }
    if (!big) f.vals[interior[0]] = 1.25;
    if (area_out) *area_out = tris_area(m, disc);
    return f;
  }
  throw InvariantError(
      "no disc with interior vertices found; mesh resolution is too small for "
      "the requested support area");
}

PartialPair make_partial_additivity_pair(const TriMesh& m,
                                         unsigned long long seed) {
  for (int attempt = 0; attempt < 20; ++attempt) {
    CommutingFamily fam =
        make_plateau_family(m, mix_seed(seed, 0xFA17ull + attempt), 1);
    const PLFunction& h = fam.generator;
    std::vector<double> distinct = h.vals;
    std::sort(distinct.begin(), distinct.end());
    distinct.erase(std::unique(distinct.begin(), distinct.end()),
                   distinct.end());
    std::mt19937_64 rng(mix_seed(seed, 0x2A1Bull + attempt));
    double amp = 0.5 + 2.0 * canon(rng);
    const int n = static_cast<int>(distinct.size());
    for (int idx = (n * 99) / 100; idx > (n * 55) / 100; --idx) {
      double t = distinct[idx];
      std::set<int> star;
      int nsupp = 0;
      for (int v = 0; v < m.nv(); ++v) {
        if (h.vals[v] > t) {
          ++nsupp;
          star.insert(m.vert_tris[v].begin(), m.vert_tris[v].end());
        }
      }
      if (nsupp < 2) continue;
      std::vector<int> star_tris(star.begin(), star.end());
      if (!open_region_is_disc(m, star_tris)) continue;
      if (!(tris_area(m, star_tris) < Rational(1, 2))) continue;
      PartialPair pair;
      pair.f1 = fam.members[0].fn;
      pair.f2.vals.resize(m.nv());
      for (int v = 0; v < m.nv(); ++v) {
        double d = h.vals[v] - t;
        pair.f2.vals[v] = d > 0.0 ? amp * d * d : 0.0;
      }
      return pair;
    }
  }
  throw InvariantError(
      "no superlevel cap of the generator fits in a small disc; the plateau "
      "sampler should leave room above the plateau");
}

PartialAdditivityReport partial_additivity_check(const TriMesh& m,
                                                 const StateEvaluator& state,
                                                 const PLFunction& f1,
                                                 const PLFunction& f2,
                                                 double tol) {
  validate_function(m, f1);
  validate_function(m, f2);
  if (!value_determines(f1, f2) && !value_determines(f2, f1))
    throw InputError(
        "cannot verify the pair commutes: neither function determines the "
        "other pointwise, so they are not images of a common generator");
  PartialAdditivityReport rep;
  std::vector<int> supp;
  for (int v = 0; v < m.nv(); ++v)
    if (f2.vals[v] != 0.0) supp.push_back(v);
  if (!supp.empty()) {
    std::set<int> star;
    for (int v : supp) star.insert(m.vert_tris[v].begin(), m.vert_tris[v].end());
    std::vector<int> star_tris(star.begin(), star.end());
    if (!open_region_is_disc(m, star_tris))
      throw InputError(
          "the support of the second function is not contained in an open "
          "disc, so its displaceability cannot be certified");
    rep.support_area = tris_area(m, star_tris);
    if (!(rep.support_area < Rational(1, 2)))
      throw InputError(
          "the support of the second function fills half the surface or "
          "more and is not displaceable");
  }
  PLFunction sum;
  sum.vals.resize(m.nv());
  for (int v = 0; v < m.nv(); ++v) sum.vals[v] = f1.vals[v] + f2.vals[v];
  rep.lhs = state(m, sum);
  rep.rhs = state(m, f1);
  rep.gap = std::fabs(rep.lhs - rep.rhs);
  rep.pass = rep.gap <= tol;
  return rep;
}

namespace {

const char* kSuites[] = {"quasi_linearity",
                         "monotonicity",
                         "normalization",
                         "strong_quasi_additivity",
                         "vanishing",
                         "partial_additivity",
                         "semi_homogeneity",
                         "multiplicativity_on_AF",
                         "quasi_measure_axioms"};

PLFunction combine(const PLFunction& a, const PLFunction& b, double ca,
                   double cb) {
  PLFunction r;
  r.vals.resize(a.vals.size());
  for (size_t v = 0; v < a.vals.size(); ++v)
    r.vals[v] = ca * a.vals[v] + cb * b.vals[v];
  return r;
}

// farthest vertex from src in the neighbor graph, ties to the smallest id
int farthest_vertex(const TriMesh& m, int src) {
  std::vector<int> dist(m.nv(), -1);
  std::vector<int> queue{src};
  dist[src] = 0;
  for (size_t q = 0; q < queue.size(); ++q) {
    int v = queue[q];
    for (int w : m.vert_nbrs[v])
      if (dist[w] < 0) {
        dist[w] = dist[v] + 1;
        queue.push_back(w);
      }
  }
  return static_cast<int>(
      std::max_element(dist.begin(), dist.end()) - dist.begin());
}

}  // namespace

AxiomSuiteReport run_suite(const TriMesh& m, const std::string& suite,
                           unsigned long long corpus_seed, int n_cases,
                           double tol, StateEvaluator state,
                           MeasureEvaluator measure) {
  bool known = false;
  for (const char* s : kSuites)
    if (suite == s) known = true;
  if (!known) throw InputError("unknown axiom suite: " + suite);
  if (n_cases < 1) throw InputError("the suite needs at least one case");
  if (!(tol >= 0.0)) throw InputError("tolerance must be nonnegative");
  if (!state)
    state = [](const TriMesh& mm, const PLFunction& f) {
      return zeta_median(mm, f);
    };
  if (!measure)
    measure = [](const TriMesh& mm, const Subcomplex& a) {
      return Rational(tau_closed_sphere(mm, a));
    };

  AxiomSuiteReport rep;
  rep.suite_name = suite;
  rep.tolerance = tol;

  auto record = [&](int case_idx, unsigned long long cs, double gap,
                    const std::string& expected, const std::string& observed) {
    rep.max_gap = std::max(rep.max_gap, gap);
    if (gap > tol) {
      AxiomSuiteReport::Failure f;
      f.input_digest =
          "case " + std::to_string(case_idx) + ", seed " + std::to_string(cs);
      f.expected = expected;
      f.observed = observed;
      f.gap = gap;
      rep.failures.push_back(std::move(f));
    }
  };

  for (int i = 0; i < n_cases; ++i) {
    unsigned long long cs = mix_seed(corpus_seed, static_cast<unsigned>(i));
    std::mt19937_64 rng(cs);

    if (suite == "normalization") {
      double c = i == 0 ? 1.0 : 6.0 * canon(rng) - 3.0;
      PLFunction f;
      f.vals.assign(m.nv(), c);
      double z = state(m, f);
      record(i, cs, std::fabs(z - c), "state(const " + fmt_double(c) + ") = " + fmt_double(c),
             fmt_double(z));
    } else if (suite == "quasi_linearity") {
      CommutingFamily fam = make_plateau_family(m, cs, 2);
      double alpha = 4.0 * canon(rng) - 2.0;
      double beta = 4.0 * canon(rng) - 2.0;
      double zp = state(m, fam.members[0].fn);
      double zq = state(m, fam.members[1].fn);
      double lhs = state(m, combine(fam.members[0].fn, fam.members[1].fn,
                                    alpha, beta));
      double want = alpha * zp + beta * zq;
      record(i, cs, std::fabs(lhs - want),
             "state(a P + b Q) = a state(P) + b state(Q) = " + fmt_double(want),
             fmt_double(lhs));
    } else if (suite == "monotonicity") {
      CommutingFamily fam = make_plateau_family(m, cs, 1);
      const PLFunction& f = fam.members[0].fn;
      PLFunction g = f;
      if (i % 2 == 0) {
        PLFunction bump = make_disc_supported_function(
            m, mix_seed(cs, 0x60ull), Rational(1, 3), nullptr);
        for (int v = 0; v < m.nv(); ++v) g.vals[v] += std::fabs(bump.vals[v]);
      } else {
        double c = 0.75 * canon(rng);
        for (double& x : g.vals) x += c;
      }
      double zf = state(m, f), zg = state(m, g);
      record(i, cs, std::max(0.0, zf - zg),
             "state(F) <= state(G) for F <= G",
             fmt_double(zf) + " vs " + fmt_double(zg));
    } else if (suite == "strong_quasi_additivity") {
      CommutingFamily fam = make_plateau_family(m, cs, 2);
      double zp = state(m, fam.members[0].fn);
      double zq = state(m, fam.members[1].fn);
      double zs =
          state(m, combine(fam.members[0].fn, fam.members[1].fn, 1.0, 1.0));
      // store the reference before subtracting; folding it into the gap
      // expression would re-round and manufacture a one-ulp artifact
      double want = zp + zq;
      record(i, cs, std::fabs(zs - want),
             "state(P + Q) = state(P) + state(Q) = " + fmt_double(want),
             fmt_double(zs));
    } else if (suite == "vanishing") {
      Rational area;
      PLFunction f =
          make_disc_supported_function(m, cs, Rational(2, 5), &area);
      // independent support oracle: the carrier star must itself be a small disc
      std::set<int> star;
      for (int v = 0; v < m.nv(); ++v)
        if (f.vals[v] != 0.0)
          star.insert(m.vert_tris[v].begin(), m.vert_tris[v].end());
      std::vector<int> star_tris(star.begin(), star.end());
      if (!open_region_is_disc(m, star_tris) ||
          !(tris_area(m, star_tris) < Rational(1, 2))) {
        record(i, cs, 1.0, "support contained in an open disc of area < 1/2",
               "support star is not such a disc");
      } else {
        double z = state(m, f);
        record(i, cs, std::fabs(z), "state(F) = 0 for a disc-supported F",
               fmt_double(z));
      }
    } else if (suite == "partial_additivity") {
      PartialPair pair = make_partial_additivity_pair(m, cs);
      PartialAdditivityReport pr =
          partial_additivity_check(m, state, pair.f1, pair.f2, tol);
      record(i, cs, pr.gap,
             "state(F1 + F2) = state(F1) = " + fmt_double(pr.rhs),
             fmt_double(pr.lhs));
    } else if (suite == "semi_homogeneity") {
      CommutingFamily fam = make_plateau_family(m, cs, 1);
      double lam = i % 4 == 0 ? 0.0 : 3.0 * canon(rng);
      double zp = state(m, fam.members[0].fn);
      PLFunction scaled = combine(fam.members[0].fn, fam.members[0].fn, lam, 0.0);
      double zs = state(m, scaled);
      double want = lam * zp;
      record(i, cs, std::fabs(zs - want),
             "state(lam F) = lam state(F) = " + fmt_double(want),
             fmt_double(zs));
    } else if (suite == "multiplicativity_on_AF") {
      CommutingFamily fam = make_plateau_family(m, cs, 2);
      double zp = state(m, fam.members[0].fn);
      double zq = state(m, fam.members[1].fn);
      PLFunction prod;
      prod.vals.resize(m.nv());
      for (int v = 0; v < m.nv(); ++v)
        prod.vals[v] = fam.members[0].fn.vals[v] * fam.members[1].fn.vals[v];
      double zm = state(m, prod);
      double want = zp * zq;
      record(i, cs, std::fabs(zm - want),
             "state(P Q) = state(P) state(Q) = " + fmt_double(want),
             fmt_double(zm));
    } else {  // quasi_measure_axioms
      std::vector<int> all(m.nt());
      std::iota(all.begin(), all.end(), 0);
      Subcomplex whole = make_subcomplex(m, all);
      bool ok_top = measure(m, whole) == Rational(1);
      bool ok_empty = measure(m, Subcomplex{}) == Rational(0);

      int v1 = static_cast<int>(rng() % m.nv());
      Subcomplex a1 = make_subcomplex(m, grow_disc(m, v1, Rational(1, 3)));
      int v2 = static_cast<int>(rng() % m.nv());
      std::vector<int> u = a1.tris;
      std::vector<int> extra = grow_disc(m, v2, Rational(1, 4));
      u.insert(u.end(), extra.begin(), extra.end());
      Subcomplex b1 = make_subcomplex(m, u);
      bool ok_mono = !(measure(m, b1) < measure(m, a1));

      int far = farthest_vertex(m, v1);
      Subcomplex da = make_subcomplex(m, grow_disc(m, v1, Rational(1, 8)));
      Subcomplex db = make_subcomplex(m, grow_disc(m, far, Rational(1, 8)));
      std::vector<int> shared;
      std::set_intersection(da.verts.begin(), da.verts.end(), db.verts.begin(),
                            db.verts.end(), std::back_inserter(shared));
      bool ok_add = true;
      if (shared.empty()) {
        std::vector<int> ut = da.tris;
        ut.insert(ut.end(), db.tris.begin(), db.tris.end());
        std::vector<int> ue = da.edges, uv = da.verts;
        ue.insert(ue.end(), db.edges.begin(), db.edges.end());
        uv.insert(uv.end(), db.verts.begin(), db.verts.end());
        Subcomplex both = make_subcomplex(m, ut, ue, uv);
        ok_add = measure(m, both) == measure(m, da) + measure(m, db);
      }

      // inner regularity spot check: the complement of a small disc has full
      // measure, and so does the closed set obtained by peeling the collar
      Subcomplex hole = make_subcomplex(m, grow_disc(m, v2, Rational(1, 8)));
      std::vector<char> near_hole(m.nv(), 0);
      for (int v : hole.verts) near_hole[v] = 1;
      std::vector<int> kept;
      for (int t = 0; t < m.nt(); ++t) {
        const auto& tr = m.tris[t];
        if (!near_hole[tr[0]] && !near_hole[tr[1]] && !near_hole[tr[2]])
          kept.push_back(t);
      }
      Subcomplex inner = make_subcomplex(m, kept);
      bool ok_inner = measure(m, inner) == Rational(1) - measure(m, hole);

      bool all_ok =
          ok_top && ok_empty && ok_mono && ok_add && ok_inner;
      std::string what;
      if (!ok_top) what += "[whole != 1]";
      if (!ok_empty) what += "[empty != 0]";
      if (!ok_mono) what += "[not monotone]";
      if (!ok_add) what += "[disjoint union not additive]";
      if (!ok_inner) what += "[no full closed set inside the open complement]";
      record(i, cs, all_ok ? 0.0 : 1.0,
             "normalized, monotone, additive, inner regular",
             all_ok ? "all hold" : what);
    }
    ++rep.cases_run;
  }
  return rep;
}

FiberSearchResult fiber_search(const TriMesh& m, const MomentFamily& family,
                               int covering_resolution) {
  if (m.kind != MeshKind::Sphere)
    throw InputError("fiber search runs on sphere meshes");
  if (covering_resolution < 1)
    throw InputError("covering resolution must be at least 1");
  if (family.functions.empty())
    throw InputError("the moment family has no functions");
  for (const PLFunction& f : family.functions) validate_function(m, f);
  for (size_t i = 1; i < family.functions.size(); ++i)
    if (!value_determines(family.functions[0], family.functions[i]))
      throw InputError(
          "moment family member " + std::to_string(i) +
          " is not a pointwise function of the first member, so the family "
          "does not commute through a single generator");

  const PLFunction& h = family.functions[0];
  auto [lo_it, hi_it] = std::minmax_element(h.vals.begin(), h.vals.end());
  double hmin = *lo_it, hmax = *hi_it;

  FiberSearchResult res;
  if (hmin == hmax) {
    res.degenerate = true;
    res.note =
        "every family member is constant; the moment image is a point and "
        "its fiber is the whole surface";
    res.grid = {hmin, hmax};
    res.sigma = {Rational(1)};
    res.support = {0};
    std::vector<int> all(m.nt());
    std::iota(all.begin(), all.end(), 0);
    res.candidates = {make_subcomplex(m, all)};
    return res;
  }

  const int k = covering_resolution;
  res.grid.resize(k + 1);
  for (int i = 0; i <= k; ++i)
    res.grid[i] = hmin + (hmax - hmin) * static_cast<double>(i) / k;
  res.grid[0] = hmin;
  res.grid[k] = hmax;

  // sweep the measure across the grid; the cell masses are the drops
  std::vector<Rational> tail(k);
  for (int i = 0; i < k; ++i) {
    Subcomplex sup = superlevel_subcomplex(m, h, res.grid[i]);
    tail[i] = Rational(tau_closed_sphere(m, sup));
  }
  if (tail[0] != Rational(1))
    throw InvariantError("the full superlevel set must carry measure one");
  res.sigma.resize(k);
  FracAcc total;
  for (int i = 0; i < k; ++i) {
    Rational next = i + 1 < k ? tail[i + 1] : Rational(0);
    res.sigma[i] = tail[i] - next;
    if (res.sigma[i] < Rational(0))
      throw InvariantError("the measure sweep decreased below zero; the "
                           "evaluator is not monotone");
    total.add(res.sigma[i]);
  }
  if (total.cmp(Rational(1)) != 0)
    throw InvariantError("cell masses must sum to exactly one");

  // The sweep puts the mass of [a_i, a_{i+1}) at cell i (the last cell keeps
  // its top). Support candidates use the closed band, a superset of the cell
  // preimage; certificates run on the half-open preimage itself, which stays
  // strictly off the median level.
  auto band = [&](int i, bool closed_top) {
    double lo = res.grid[i], hi = res.grid[i + 1];
    bool top = closed_top || i == k - 1;
    std::vector<int> bt, be, bv;
    for (int v = 0; v < m.nv(); ++v)
      if (h.vals[v] >= lo && (top ? h.vals[v] <= hi : h.vals[v] < hi))
        bv.push_back(v);
    std::vector<char> in(m.nv(), 0);
    for (int v : bv) in[v] = 1;
    for (int e = 0; e < m.ne(); ++e)
      if (in[m.edge_verts[e][0]] && in[m.edge_verts[e][1]]) be.push_back(e);
    for (int t = 0; t < m.nt(); ++t)
      if (in[m.tris[t][0]] && in[m.tris[t][1]] && in[m.tris[t][2]])
        bt.push_back(t);
    return make_subcomplex(m, bt, be, bv);
  };

  for (int i = 0; i < k; ++i) {
    if (res.sigma[i] > Rational(0)) {
      res.support.push_back(i);
      res.candidates.push_back(band(i, true));
    }
  }
  if (res.support.size() != 1)
    throw InvariantError(
        "the pushforward of a monotone {0,1} measure must be a single point "
        "mass, got " +
        std::to_string(res.support.size()) + " cells");

  // certify every unoccupied cell: each component of its fiber misses the
  // median, so the complement component holding the median outweighs 1/2 and
  // the rest encloses the component in a solid region below half the area
  for (int i = 0; i < k; ++i) {
    if (res.sigma[i] > Rational(0)) continue;
    Subcomplex fib = band(i, false);
    ++res.certified_cells;
    if (fib.empty()) continue;
    for (const Subcomplex& comp : subcomplex_components(m, fib)) {
      std::vector<OpenComponent> occ = complement_components(m, comp);
      if (occ.empty())
        throw InvariantError("an unoccupied cell's fiber covers the surface");
      size_t best = 0;
      for (size_t j = 1; j < occ.size(); ++j)
        if (occ[best].area < occ[j].area) best = j;
      if (!(occ[best].area > Rational(1, 2)))
        throw InvariantError(
            "fiber over an unoccupied cell could not be enclosed in a region "
            "below half the area");
      std::vector<int> w = comp.tris;
      for (size_t j = 0; j < occ.size(); ++j)
        if (j != best) w.insert(w.end(), occ[j].tris.begin(), occ[j].tris.end());
      Subcomplex enclosing = make_subcomplex(m, w, comp.edges, comp.verts);
      if (!is_solid(m, enclosing))
        throw InvariantError(
            "the enclosing region of a displaceable fiber must be solid");
    }
  }
  return res;
}

}  // namespace qs
