#include "qs/reeb.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <deque>
#include <functional>
#include <map>
#include <numeric>
#include <set>
#include <unordered_map>
#include <unordered_set>

namespace qs {

namespace {

// Double-precision mass sums carry rounding on the order of 1e-13 at the
// mesh sizes used here. Comparisons against 1/2 that land inside this band
// are re-done in exact rational arithmetic.
constexpr double kMassSlack = 1e-10;

struct UF {
  std::vector<int> p;
  explicit UF(int n) : p(n) { std::iota(p.begin(), p.end(), 0); }
  int find(int x) {
    while (p[x] != x) { p[x] = p[p[x]]; x = p[x]; }
    return x;
  }
};

// area fraction of a non-flat triangle below level u, in doubles; the branch
// flag picks the quadratic piece (false: u between k1 and k2, true: between
// k2 and k3), so callers never divide by a zero value gap
double frac_below_d(double k1, double k2, double k3, double u, bool upper) {
  if (upper) {
    double d = k3 - u;
    return 1.0 - d * d / ((k3 - k1) * (k3 - k2));
  }
  double d = u - k1;
  return d * d / ((k2 - k1) * (k3 - k1));
}

struct Grouping {
  std::vector<double> values;               // per node
  std::vector<std::vector<int>> verts;      // per node, sorted
  std::vector<long long> atom_num;
  std::vector<std::vector<int>> flat_tris;
  std::vector<int> vert_node;
  std::vector<char> tri_flat;
};

// one node per level-set component containing a vertex: vertices joined by
// flat edges first, then components at a shared value joined through the
// level set itself
Grouping contour_grouping(const TriMesh& m, const PLFunction& f) {
  const auto& F = f.vals;
  UF uf(m.nv());
  for (int e = 0; e < m.ne(); ++e) {
    int a = m.edge_verts[e][0], b = m.edge_verts[e][1];
    if (F[a] == F[b]) uf.p[uf.find(a)] = uf.find(b);
  }
  std::map<double, std::vector<int>> reps;  // value -> class representatives
  for (int v = 0; v < m.nv(); ++v)
    if (uf.find(v) == v) reps[F[v]].push_back(v);
  for (auto& [c, rs] : reps) {
    if (rs.size() < 2) continue;
    // distinct flat classes at one value may still lie on one contour,
    // connected through level segments crossing triangle interiors
    for (const auto& lc : level_components(m, f, c)) {
      const auto& vs = lc.cells.verts;
      for (size_t i = 1; i < vs.size(); ++i) uf.p[uf.find(vs[i])] = uf.find(vs[0]);
    }
  }

  std::map<std::pair<double, int>, std::vector<int>> classes;  // key -> verts
  {
    std::unordered_map<int, int> minv;
    for (int v = 0; v < m.nv(); ++v) minv.try_emplace(uf.find(v), v);
    for (int v = 0; v < m.nv(); ++v) classes[{F[v], minv[uf.find(v)]}].push_back(v);
  }

  Grouping g;
  g.vert_node.assign(m.nv(), -1);
  for (auto& [key, vs] : classes) {
    int id = static_cast<int>(g.values.size());
    g.values.push_back(key.first);
    std::sort(vs.begin(), vs.end());
    for (int v : vs) g.vert_node[v] = id;
    g.verts.push_back(std::move(vs));
  }
  g.atom_num.assign(g.values.size(), 0);
  g.flat_tris.assign(g.values.size(), {});
  g.tri_flat.assign(m.nt(), 0);
  for (int t = 0; t < m.nt(); ++t) {
    const auto& tr = m.tris[t];
    if (F[tr[0]] == F[tr[1]] && F[tr[1]] == F[tr[2]]) {
      g.tri_flat[t] = 1;
      int n = g.vert_node[tr[0]];
      g.atom_num[n] += m.area_num[t];
      g.flat_tris[n].push_back(t);
    }
  }
  return g;
}

}  // namespace

Rational tri_below_fraction(double k1, double k2, double k3, const Rational& u) {
  Rational K1 = exact_rational(k1), K2 = exact_rational(k2), K3 = exact_rational(k3);
  if (u <= K1) return Rational(0);
  if (u >= K3) return Rational(1);
  if (u <= K2)  // here K1 < u <= K2, so K1 < K2
    return (u - K1) * (u - K1) / ((K2 - K1) * (K3 - K1));
  return Rational(1) - (K3 - u) * (K3 - u) / ((K3 - K1) * (K3 - K2));
}

FineTree build_fine_tree(const TriMesh& m, const PLFunction& f) {
  if (m.kind != MeshKind::Sphere)
    throw InputError("the contour-tree construction requires a sphere mesh");
  validate_function(m, f);

  FineTree ft;
  ft.mesh = &m;
  ft.fvals = f.vals;

  Grouping g = contour_grouping(m, f);
  int G = static_cast<int>(g.values.size());
  ft.nodes.resize(G);
  for (int i = 0; i < G; ++i) {
    ft.nodes[i].value = g.values[i];
    ft.nodes[i].verts = std::move(g.verts[i]);
    ft.nodes[i].atom_num = g.atom_num[i];
    ft.nodes[i].flat_tris = std::move(g.flat_tris[i]);
  }
  ft.vert_node = std::move(g.vert_node);
  ft.tri_flat = std::move(g.tri_flat);

  ft.tri_nodes.assign(m.nt(), {-1, -1, -1});
  for (int t = 0; t < m.nt(); ++t) {
    std::array<int, 3> ns = {ft.vert_node[m.tris[t][0]], ft.vert_node[m.tris[t][1]],
                             ft.vert_node[m.tris[t][2]]};
    std::sort(ns.begin(), ns.end());
    ft.tri_nodes[t] = ns;
  }

  if (G == 1) {
    ft.parent = {-1};
    ft.parent_arc = {-1};
    ft.depth = {0};
    ft.tin = {0};
    ft.tout = {1};
    ft.sub_atom = {ft.nodes[0].atom_num};
    ft.sub_mass = {1.0};
    return ft;
  }

  // node adjacency through mesh edges
  std::vector<std::pair<int, int>> adj_pairs;
  for (int e = 0; e < m.ne(); ++e) {
    int a = ft.vert_node[m.edge_verts[e][0]], b = ft.vert_node[m.edge_verts[e][1]];
    if (a != b) adj_pairs.emplace_back(std::min(a, b), std::max(a, b));
  }
  std::sort(adj_pairs.begin(), adj_pairs.end());
  adj_pairs.erase(std::unique(adj_pairs.begin(), adj_pairs.end()), adj_pairs.end());
  std::vector<std::vector<int>> nbr(G);
  for (auto [a, b] : adj_pairs) {
    nbr[a].push_back(b);
    nbr[b].push_back(a);
  }

  // split tree: sweep ascending, record where sublevel components merge
  std::vector<int> sparent(G, -1);
  std::vector<std::set<int>> sch(G);
  {
    UF u(G);
    std::vector<int> top(G);
    for (int x = 0; x < G; ++x) {
      top[x] = x;
      int rx = u.find(x);
      for (int h : nbr[x]) {
        if (h > x) continue;
        int r = u.find(h);
        if (r == rx) continue;
        sparent[top[r]] = x;
        sch[x].insert(top[r]);
        u.p[r] = rx;
      }
      top[rx] = x;
    }
  }
  // join tree: sweep descending
  std::vector<int> jparent(G, -1);
  std::vector<std::set<int>> jch(G);
  {
    UF u(G);
    std::vector<int> bot(G);
    for (int x = G - 1; x >= 0; --x) {
      bot[x] = x;
      int rx = u.find(x);
      for (int h : nbr[x]) {
        if (h < x) continue;
        int r = u.find(h);
        if (r == rx) continue;
        jparent[bot[r]] = x;
        jch[x].insert(bot[r]);
        u.p[r] = rx;
      }
      bot[rx] = x;
    }
  }

  // merge join and split trees into the contour tree by peeling leaves
  std::vector<char> alive(G, 1);
  std::deque<int> queue;
  auto upper_leaf = [&](int v) { return jch[v].empty() && sch[v].size() == 1; };
  auto lower_leaf = [&](int v) { return sch[v].empty() && jch[v].size() == 1; };
  for (int v = 0; v < G; ++v)
    if (upper_leaf(v) || lower_leaf(v)) queue.push_back(v);
  int remaining = G;
  while (remaining > 1) {
    if (queue.empty()) throw InvariantError("contour tree merge stalled");
    int v = queue.front();
    queue.pop_front();
    if (!alive[v]) continue;
    if (upper_leaf(v)) {
      int p = jparent[v];
      if (p < 0 || p >= v) throw InvariantError("join parent order violated");
      FineTree::Arc arc;
      arc.lo = p;
      arc.hi = v;
      ft.arcs.push_back(arc);
      jch[p].erase(v);
      int c = *sch[v].begin();
      int sp = sparent[v];
      sparent[c] = sp;
      if (sp != -1) {
        sch[sp].erase(v);
        sch[sp].insert(c);
      }
      alive[v] = 0;
      --remaining;
      if (upper_leaf(p) || lower_leaf(p)) queue.push_back(p);
    } else if (lower_leaf(v)) {
      int p = sparent[v];
      if (p < 0 || p <= v) throw InvariantError("split parent order violated");
      FineTree::Arc arc;
      arc.lo = v;
      arc.hi = p;
      ft.arcs.push_back(arc);
      sch[p].erase(v);
      int c = *jch[v].begin();
      int jp = jparent[v];
      jparent[c] = jp;
      if (jp != -1) {
        jch[jp].erase(v);
        jch[jp].insert(c);
      }
      alive[v] = 0;
      --remaining;
      if (upper_leaf(p) || lower_leaf(p)) queue.push_back(p);
    }
  }
  if (static_cast<int>(ft.arcs.size()) != G - 1)
    throw InvariantError("contour tree arc count mismatch");
  for (int a = 0; a < G - 1; ++a) {
    const auto& arc = ft.arcs[a];
    if (!(ft.nodes[arc.lo].value < ft.nodes[arc.hi].value))
      throw InvariantError("contour tree arc with degenerate value interval");
    ft.nodes[arc.lo].arcs.push_back(a);
    ft.nodes[arc.hi].arcs.push_back(a);
  }

  // root at node 0; Euler intervals for side-of-arc tests
  ft.parent.assign(G, -1);
  ft.parent_arc.assign(G, -1);
  ft.depth.assign(G, 0);
  ft.tin.assign(G, -1);
  ft.tout.assign(G, -1);
  {
    std::vector<std::vector<std::pair<int, int>>> child(G);  // (node, arc)
    std::vector<char> seen(G, 0);
    std::deque<int> bfs{0};
    seen[0] = 1;
    std::vector<int> order;
    while (!bfs.empty()) {
      int x = bfs.front();
      bfs.pop_front();
      order.push_back(x);
      for (int a : ft.nodes[x].arcs) {
        int y = ft.arcs[a].lo == x ? ft.arcs[a].hi : ft.arcs[a].lo;
        if (seen[y]) continue;
        seen[y] = 1;
        ft.parent[y] = x;
        ft.parent_arc[y] = a;
        ft.depth[y] = ft.depth[x] + 1;
        child[x].push_back({y, a});
        bfs.push_back(y);
      }
    }
    if (static_cast<int>(order.size()) != G)
      throw InvariantError("contour tree is not connected");
    int clock = 0;
    std::vector<std::pair<int, size_t>> stack{{0, 0}};
    ft.tin[0] = clock++;
    while (!stack.empty()) {
      auto& [x, i] = stack.back();
      if (i < child[x].size()) {
        int y = child[x][i].first;
        ++i;
        ft.tin[y] = clock++;
        stack.push_back({y, 0});
      } else {
        ft.tout[x] = clock++;
        stack.pop_back();
      }
    }

    // register each non-flat triangle on the arcs its level segments sweep
    auto walk = [&](int a, int b, bool upper, int t) {
      if (a == b) return;
      std::vector<int> arcs_a, arcs_b, seq_a{a}, seq_b{b};
      int x = a, y = b;
      while (x != y) {
        if (ft.depth[x] >= ft.depth[y]) {
          arcs_a.push_back(ft.parent_arc[x]);
          x = ft.parent[x];
          seq_a.push_back(x);
        } else {
          arcs_b.push_back(ft.parent_arc[y]);
          y = ft.parent[y];
          seq_b.push_back(y);
        }
      }
      seq_b.pop_back();  // drop the meeting node, seq_a already has it
      for (auto it = seq_b.rbegin(); it != seq_b.rend(); ++it) seq_a.push_back(*it);
      for (size_t i = 1; i < seq_a.size(); ++i)
        if (seq_a[i - 1] >= seq_a[i])
          throw InvariantError("triangle sweep path is not monotone");
      for (int arc : arcs_a) ft.arcs[arc].crossings.push_back({t, upper});
      for (int arc : arcs_b) ft.arcs[arc].crossings.push_back({t, upper});
    };
    for (int t = 0; t < m.nt(); ++t) {
      if (ft.tri_flat[t]) continue;
      auto [n1, n2, n3] = ft.tri_nodes[t];
      walk(n1, n2, false, t);
      walk(n2, n3, true, t);
    }

    // swept area per arc in doubles
    double D = static_cast<double>(m.area_den);
    for (auto& arc : ft.arcs) {
      if (arc.crossings.empty())
        throw InvariantError("contour tree arc swept by no triangle");
      double a_val = ft.nodes[arc.lo].value, b_val = ft.nodes[arc.hi].value;
      double s = 0;
      for (auto [t, upper] : arc.crossings) {
        double k1 = ft.nodes[ft.tri_nodes[t][0]].value;
        double k2 = ft.nodes[ft.tri_nodes[t][1]].value;
        double k3 = ft.nodes[ft.tri_nodes[t][2]].value;
        double area = m.area_num[t] / D;
        s += area * (frac_below_d(k1, k2, k3, b_val, upper) -
                     frac_below_d(k1, k2, k3, a_val, upper));
      }
      arc.segmass = s;
    }

    ft.sub_atom.assign(G, 0);
    ft.sub_mass.assign(G, 0.0);
    for (auto it = order.rbegin(); it != order.rend(); ++it) {
      int x = *it;
      long long atoms = ft.nodes[x].atom_num;
      double mass = atoms / D;
      for (auto [y, a] : child[x]) {
        atoms += ft.sub_atom[y];
        mass += ft.sub_mass[y] + ft.arcs[a].segmass;
      }
      ft.sub_atom[x] = atoms;
      ft.sub_mass[x] = mass;
    }
  }
  return ft;
}

double FineTree::branch_mass(int n, int arc) const {
  int far = arcs[arc].lo == n ? arcs[arc].hi : arcs[arc].lo;
  if (parent[far] == n) return sub_mass[far] + arcs[arc].segmass;
  return 1.0 - sub_mass[n];
}

Rational FineTree::exact_branch(int n, int arc) const {
  const TriMesh& m = *mesh;
  int far = arcs[arc].lo == n ? arcs[arc].hi : arcs[arc].lo;
  bool far_is_child = (parent[far] == n);
  if (!far_is_child && parent[n] != far)
    throw InvariantError("arc does not join adjacent tree nodes");
  BigInt D(m.area_den);
  long long total_atom = sub_atom[0];

  FracAcc acc;
  acc.add(BigInt(far_is_child ? sub_atom[far] : total_atom - sub_atom[n]), D);

  std::unordered_set<int> crossing;
  for (auto [t, upper] : arcs[arc].crossings) {
    (void)upper;
    crossing.insert(t);
  }
  auto in_side = [&](int x) { return far_is_child ? in_subtree(far, x) : !in_subtree(n, x); };
  long long whole = 0;  // triangles swept entirely on the far side
  for (int t = 0; t < m.nt(); ++t) {
    if (tri_flat[t] || crossing.count(t)) continue;
    if (in_side(tri_nodes[t][0]) || in_side(tri_nodes[t][2])) whole += m.area_num[t];
  }
  acc.add(BigInt(whole), D);

  Rational u = exact_rational(nodes[n].value);
  bool far_below = (arcs[arc].lo == far);
  for (auto [t, upper] : arcs[arc].crossings) {
    (void)upper;
    double k1 = nodes[tri_nodes[t][0]].value;
    double k2 = nodes[tri_nodes[t][1]].value;
    double k3 = nodes[tri_nodes[t][2]].value;
    Rational frac = tri_below_fraction(k1, k2, k3, u);
    Rational portion = far_below ? frac : Rational(1) - frac;
    acc.add(numerator(portion) * m.area_num[t], denominator(portion) * D);
  }
  return acc.value();
}

namespace {

// sign of (x - 1/2), falling back to exact arithmetic inside the rounding band
int side_of_half(double x, const std::function<Rational()>& exact) {
  if (x > 0.5 + kMassSlack) return 1;
  if (x < 0.5 - kMassSlack) return -1;
  Rational v = exact();
  Rational half(1, 2);
  if (v > half) return 1;
  if (v < half) return -1;
  return 0;
}

LevelComponent gamma_at(const TriMesh& m, const PLFunction& f, double value, int seed_tri) {
  return level_component(m, f, value, seed_tri);
}

}  // namespace

MedianResult median_component(const TriMesh& m, const PLFunction& f) {
  FineTree ft = build_fine_tree(m, f);
  int G = static_cast<int>(ft.nodes.size());
  MedianResult res;

  if (G == 1) {
    res.at_node = true;
    res.node = 0;
    res.value = ft.nodes[0].value;
    res.gamma = gamma_at(m, f, res.value, 0);
    return res;
  }

  auto finalize_node = [&](int n) {
    res.at_node = true;
    res.node = n;
    res.value = ft.nodes[n].value;
    FracAcc total;
    total.add(BigInt(ft.nodes[n].atom_num), BigInt(m.area_den));
    for (int a : ft.nodes[n].arcs) {
      Rational br = ft.exact_branch(n, a);
      if (br > Rational(1, 2))
        throw InvariantError("median node has a complement component above 1/2");
      if (!(br > Rational(0)))
        throw InvariantError("empty complement branch at median node");
      res.complement_areas.push_back(br);
      total.add(br);
    }
    if (total.cmp(Rational(1)) != 0)
      throw InvariantError("complement areas and plateau mass do not sum to 1");
    std::sort(res.complement_areas.begin(), res.complement_areas.end(),
              [](const Rational& x, const Rational& y) { return x > y; });
    int v0 = ft.nodes[n].verts[0];
    res.gamma = gamma_at(m, f, res.value, m.vert_tris[v0][0]);
  };

  std::vector<char> visited(G, 0);
  int n = 0;
  int steps = 0;
  while (true) {
    if (++steps > G) throw InvariantError("median walk failed to terminate");
    if (visited[n]) throw InvariantError("median walk revisited a node");
    visited[n] = 1;

    int heavy = -1;
    for (int a : ft.nodes[n].arcs) {
      int s = side_of_half(ft.branch_mass(n, a), [&] { return ft.exact_branch(n, a); });
      if (s > 0) {
        if (heavy != -1) throw InvariantError("two complement branches above 1/2");
        heavy = a;
      }
    }
    if (heavy == -1) {
      finalize_node(n);
      return res;
    }

    const auto& arc = ft.arcs[heavy];
    bool going_down = (arc.hi == n);
    if (going_down) {
      // mass below the cut at the bottom end of the arc
      int s = side_of_half(1.0 - ft.branch_mass(arc.lo, heavy),
                           [&] { return Rational(1) - ft.exact_branch(arc.lo, heavy); });
      if (s >= 0) {
        n = arc.lo;
        continue;
      }
    } else {
      // mass below the cut at the top end of the arc
      int s = side_of_half(ft.branch_mass(arc.hi, heavy),
                           [&] { return ft.exact_branch(arc.hi, heavy); });
      if (s <= 0) {
        n = arc.hi;
        continue;
      }
    }

    // the level with half the area below lies strictly inside this arc;
    // certify the bracket exactly, then solve the quadratic by bisection
    Rational g_lo = Rational(1) - ft.exact_branch(arc.lo, heavy);
    Rational g_hi = ft.exact_branch(arc.hi, heavy);
    if (!(g_lo < Rational(1, 2) && g_hi > Rational(1, 2)))
      throw InvariantError("arc-interior median bracket failed exact verification");

    double a_val = ft.nodes[arc.lo].value, b_val = ft.nodes[arc.hi].value;
    double D = static_cast<double>(m.area_den);
    double glo_d = 1.0 - ft.branch_mass(arc.lo, heavy);
    auto below_delta = [&](double u) {
      double s_acc = 0;
      for (auto [t, upper] : arc.crossings) {
        double k1 = ft.nodes[ft.tri_nodes[t][0]].value;
        double k2 = ft.nodes[ft.tri_nodes[t][1]].value;
        double k3 = ft.nodes[ft.tri_nodes[t][2]].value;
        double area = m.area_num[t] / D;
        s_acc += area * (frac_below_d(k1, k2, k3, u, upper) -
                         frac_below_d(k1, k2, k3, a_val, upper));
      }
      return s_acc;
    };
    double target = 0.5 - glo_d;
    double lo = a_val, hi = b_val;
    for (int i = 0; i < 200 && lo < hi; ++i) {
      double mid = lo + (hi - lo) / 2;
      if (mid <= lo || mid >= hi) break;
      (below_delta(mid) < target ? lo : hi) = mid;
    }
    double u = lo + (hi - lo) / 2;
    if (u <= a_val) u = std::nextafter(a_val, b_val);
    if (u >= b_val) u = std::nextafter(b_val, a_val);

    res.at_node = false;
    res.arc = heavy;
    res.value = u;
    res.complement_areas = {Rational(1, 2), Rational(1, 2)};
    res.gamma = gamma_at(m, f, u, arc.crossings[0].first);
    return res;
  }
}

double zeta_median(const TriMesh& m, const PLFunction& f) {
  return median_component(m, f).value;
}

// ---- public Reeb graph via slab sweep ----

ReebGraph build_reeb(const TriMesh& m, const PLFunction& f) {
  validate_function(m, f);
  const auto& F = f.vals;
  Grouping g = contour_grouping(m, f);
  int G = static_cast<int>(g.values.size());
  BigInt D(m.area_den);

  ReebGraph rg;
  rg.total_area = Rational(1);

  std::vector<double> vals;
  for (double v : F) vals.push_back(v);
  std::sort(vals.begin(), vals.end());
  vals.erase(std::unique(vals.begin(), vals.end()), vals.end());
  int L = static_cast<int>(vals.size());
  std::unordered_map<double, int> val_idx;
  for (int i = 0; i < L; ++i) val_idx[vals[i]] = i;

  if (G == 1 && L == 1) {
    ReebGraph::Node node;
    node.value = vals[0];
    node.type = "plateau";
    node.plateau_area = Rational(1);
    node.verts = g.verts[0];
    rg.nodes.push_back(std::move(node));
    rg.is_tree = true;
    return rg;
  }

  // per-slab components of the triangles meeting the open slab
  std::vector<double> tmin(m.nt()), tmax(m.nt());
  for (int t = 0; t < m.nt(); ++t) {
    auto [a, b, c] = m.tris[t];
    tmin[t] = std::min({F[a], F[b], F[c]});
    tmax[t] = std::max({F[a], F[b], F[c]});
  }
  std::vector<std::vector<int>> slab_tris(L - 1);
  std::vector<int> inst_of(m.nt());  // triangle -> instance id, per slab
  std::vector<std::vector<int>> slab_inst(L - 1);
  int n_inst = 0;
  for (int k = 0; k + 1 < L; ++k) {
    for (int t = 0; t < m.nt(); ++t)
      if (tmin[t] < vals[k + 1] && tmax[t] > vals[k]) slab_tris[k].push_back(t);
    slab_inst[k].resize(slab_tris[k].size());
    for (auto& id : slab_inst[k]) id = n_inst++;
  }

  UF uf(n_inst);
  for (int k = 0; k + 1 < L; ++k) {
    std::unordered_map<int, int> local;
    for (size_t i = 0; i < slab_tris[k].size(); ++i) local[slab_tris[k][i]] = slab_inst[k][i];
    for (int t : slab_tris[k])
      for (int e : m.tri_edges[t]) {
        int u = m.edge_verts[e][0], v = m.edge_verts[e][1];
        double elo = std::min(F[u], F[v]), ehi = std::max(F[u], F[v]);
        if (!(elo < vals[k + 1] && ehi > vals[k])) continue;
        int other = m.edge_tris[e][0] == t ? m.edge_tris[e][1] : m.edge_tris[e][0];
        auto it = local.find(other);
        if (it != local.end()) uf.p[uf.find(local[t])] = uf.find(it->second);
      }
  }

  // stitch consecutive slabs through regular level circles; attach classes to
  // nodes where the level component carries a vertex
  std::map<int, std::set<int>> attach_dn, attach_up;  // by instance root, node ids
  std::vector<std::unordered_map<int, int>> inst_at(L - 1);
  for (int k = 0; k + 1 < L; ++k)
    for (size_t i = 0; i < slab_tris[k].size(); ++i) inst_at[k][slab_tris[k][i]] = slab_inst[k][i];

  for (int k = 0; k < L; ++k) {
    double c = vals[k];
    for (const auto& lc : level_components(m, f, c)) {
      if (lc.plateau) {
        int node = g.vert_node[lc.cells.verts[0]];
        // slab pieces bordering this contour from above and below
        for (int v : lc.cells.verts) {
          for (int t : m.vert_tris[v]) {
            if (k + 1 < L && tmax[t] > c) {
              auto it = inst_at[k].find(t);
              if (it != inst_at[k].end()) attach_dn[uf.find(it->second)].insert(node);
            }
            if (k > 0 && tmin[t] < c) {
              auto it = inst_at[k - 1].find(t);
              if (it != inst_at[k - 1].end()) attach_up[uf.find(it->second)].insert(node);
            }
          }
        }
      } else {
        // regular circle: the sweep continues through it
        if (k == 0 || k + 1 == L) throw InvariantError("regular level circle at an extreme value");
        for (int e : lc.crossed)
          for (int t : m.edge_tris[e]) {
            auto lo_it = inst_at[k - 1].find(t);
            auto hi_it = inst_at[k].find(t);
            if (lo_it == inst_at[k - 1].end() || hi_it == inst_at[k].end())
              throw InvariantError("crossed edge missing from an adjacent slab");
            uf.p[uf.find(lo_it->second)] = uf.find(hi_it->second);
          }
      }
    }
  }
  // re-canonicalize attachment keys after the stitching unions
  {
    std::map<int, std::set<int>> dn2, up2;
    for (auto& [root, s] : attach_dn) dn2[uf.find(root)].insert(s.begin(), s.end());
    for (auto& [root, s] : attach_up) up2[uf.find(root)].insert(s.begin(), s.end());
    attach_dn = std::move(dn2);
    attach_up = std::move(up2);
  }

  // exact swept area per class
  std::map<int, FracAcc> weight;
  for (int k = 0; k + 1 < L; ++k) {
    Rational lo = exact_rational(vals[k]), hi = exact_rational(vals[k + 1]);
    for (size_t i = 0; i < slab_tris[k].size(); ++i) {
      int t = slab_tris[k][i];
      auto [a, b, c] = m.tris[t];
      std::array<double, 3> ks = {F[a], F[b], F[c]};
      std::sort(ks.begin(), ks.end());
      Rational piece = tri_below_fraction(ks[0], ks[1], ks[2], hi) -
                       tri_below_fraction(ks[0], ks[1], ks[2], lo);
      auto& acc = weight[uf.find(slab_inst[k][i])];
      acc.add(numerator(piece) * m.area_num[t], denominator(piece) * D);
    }
  }

  // assemble: nodes keep their grouping ids until smoothing
  struct RawArc {
    int lo, hi;
    Rational w;
  };
  std::vector<RawArc> raw;
  for (auto& [root, acc] : weight) {
    auto dn = attach_dn.find(root), up = attach_up.find(root);
    if (dn == attach_dn.end() || up == attach_up.end() || dn->second.size() != 1 ||
        up->second.size() != 1)
      throw InvariantError("swept region does not attach to exactly one contour per side");
    RawArc a;
    a.lo = *dn->second.begin();
    a.hi = *up->second.begin();
    a.w = acc.value();
    if (!(a.w > Rational(0))) throw InvariantError("swept region with non-positive area");
    if (!(g.values[a.lo] < g.values[a.hi]))
      throw InvariantError("swept region with degenerate value interval");
    raw.push_back(std::move(a));
  }
  std::sort(raw.begin(), raw.end(), [](const RawArc& x, const RawArc& y) {
    if (x.lo != y.lo) return x.lo < y.lo;
    if (x.hi != y.hi) return x.hi < y.hi;
    return x.w < y.w;
  });

  {
    FracAcc total;
    for (int n = 0; n < G; ++n) total.add(BigInt(g.atom_num[n]), D);
    for (const auto& a : raw) total.add(a.w);
    if (total.cmp(Rational(1)) != 0)
      throw InvariantError("swept areas and plateau areas do not sum to the surface area");
  }

  // smooth regular nodes: exactly one arc below, one above, no plateau mass
  std::vector<std::vector<int>> below(G), above(G);
  for (size_t i = 0; i < raw.size(); ++i) {
    above[raw[i].lo].push_back(static_cast<int>(i));
    below[raw[i].hi].push_back(static_cast<int>(i));
  }
  std::vector<char> node_dead(G, 0), arc_dead(raw.size(), 0);
  for (int n = 0; n < G; ++n) {
    if (g.atom_num[n] != 0 || below[n].size() != 1 || above[n].size() != 1) continue;
    int lo_arc = below[n][0], hi_arc = above[n][0];
    if (lo_arc == hi_arc) continue;
    raw[lo_arc].hi = raw[hi_arc].hi;
    raw[lo_arc].w += raw[hi_arc].w;
    arc_dead[hi_arc] = 1;
    node_dead[n] = 1;
    auto& b = below[raw[hi_arc].hi];
    std::replace(b.begin(), b.end(), hi_arc, lo_arc);
    above[n].clear();
    below[n].clear();
  }

  std::vector<int> remap(G, -1);
  for (int n = 0; n < G; ++n) {
    if (node_dead[n]) continue;
    remap[n] = static_cast<int>(rg.nodes.size());
    ReebGraph::Node node;
    node.value = g.values[n];
    node.plateau_area = Rational(g.atom_num[n], m.area_den);
    node.verts = g.verts[n];
    int deg_dn = 0, deg_up = 0;
    for (int i : below[n])
      if (!arc_dead[i]) ++deg_dn;
    for (int i : above[n])
      if (!arc_dead[i]) ++deg_up;
    if (g.atom_num[n] != 0) node.type = "plateau";
    else if (deg_dn == 0) node.type = "min";
    else if (deg_up == 0) node.type = "max";
    else node.type = "saddle";
    rg.nodes.push_back(std::move(node));
  }
  for (size_t i = 0; i < raw.size(); ++i) {
    if (arc_dead[i]) continue;
    ReebGraph::Arc a;
    a.lo = remap[raw[i].lo];
    a.hi = remap[raw[i].hi];
    a.lo_value = g.values[raw[i].lo];
    a.hi_value = g.values[raw[i].hi];
    a.weight = raw[i].w;
    rg.arcs.push_back(std::move(a));
  }
  rg.is_tree = (rg.arcs.size() + 1 == rg.nodes.size());
  if (m.kind == MeshKind::Sphere && !rg.is_tree)
    throw InvariantError("sphere level-set graph is not a tree");
  return rg;
}

std::string reeb_to_dot(const ReebGraph& g) {
  auto fmt_d = [](double x) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return std::string(buf);
  };
  std::string out = "graph reeb {\n";
  for (size_t i = 0; i < g.nodes.size(); ++i) {
    const auto& n = g.nodes[i];
    out += "  n" + std::to_string(i) + " [label=\"" + n.type + " v=" + fmt_d(n.value);
    if (n.plateau_area != Rational(0)) out += " area=" + format_rational(n.plateau_area);
    out += "\"];\n";
  }
  for (const auto& a : g.arcs) {
    out += "  n" + std::to_string(a.lo) + " -- n" + std::to_string(a.hi) +
           " [label=\"w=" + format_rational(a.weight) + " [" + fmt_d(a.lo_value) + "," +
           fmt_d(a.hi_value) + "]\"];\n";
  }
  out += "}\n";
  return out;
}

}  // namespace qs
