#include "qs/mesh.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <deque>
#include <numeric>
#include <set>
#include <sstream>

namespace qs {

namespace {

struct UF {
  std::vector<int> p;
  explicit UF(int n) : p(n) { std::iota(p.begin(), p.end(), 0); }
  int find(int x) {
    while (p[x] != x) { p[x] = p[p[x]]; x = p[x]; }
    return x;
  }
  void unite(int a, int b) { p[find(a)] = find(b); }
};

std::array<double, 3> normalized(std::array<double, 3> v) {
  double n = std::sqrt(v[0] * v[0] + v[1] * v[1] + v[2] * v[2]);
  return {v[0] / n, v[1] / n, v[2] / n};
}

}  // namespace

int TriMesh::edge_between(int a, int b) const {
  if (a > b) std::swap(a, b);
  auto it = edge_index_.find({a, b});
  return it == edge_index_.end() ? -1 : it->second;
}

void TriMesh::finalize() {
  edge_verts.clear();
  edge_tris.clear();
  tri_edges.assign(tris.size(), {-1, -1, -1});
  edge_index_.clear();

  for (int t = 0; t < nt(); ++t) {
    const auto& tr = tris[t];
    for (int k = 0; k < 3; ++k) {
      int a = tr[k], b = tr[(k + 1) % 3];
      if (a == b || a < 0 || b < 0 || a >= nv() || b >= nv())
        throw InputError("triangle " + std::to_string(t) + " has invalid vertices");
      int lo = std::min(a, b), hi = std::max(a, b);
      auto [it, fresh] = edge_index_.try_emplace({lo, hi}, ne());
      if (fresh) {
        edge_verts.push_back({lo, hi});
        edge_tris.push_back({t, -1});
      } else {
        int e = it->second;
        if (edge_tris[e][1] != -1)
          throw InputError("edge (" + std::to_string(lo) + "," + std::to_string(hi) +
                           ") bounds more than two triangles");
        edge_tris[e][1] = t;
      }
      tri_edges[t][k] = it->second;
    }
  }
  for (int e = 0; e < ne(); ++e)
    if (edge_tris[e][1] == -1)
      throw InputError("edge (" + std::to_string(edge_verts[e][0]) + "," +
                       std::to_string(edge_verts[e][1]) + ") bounds only one triangle");

  long long chi = nv() - ne() + nt();
  long long want = (kind == MeshKind::Sphere) ? 2 : 0;
  if (chi != want)
    throw InputError("Euler characteristic " + std::to_string(chi) + " does not match mesh kind");

  vert_tris.assign(nv(), {});
  vert_edges.assign(nv(), {});
  vert_nbrs.assign(nv(), {});
  for (int t = 0; t < nt(); ++t)
    for (int k = 0; k < 3; ++k) vert_tris[tris[t][k]].push_back(t);
  for (int e = 0; e < ne(); ++e) {
    vert_edges[edge_verts[e][0]].push_back(e);
    vert_edges[edge_verts[e][1]].push_back(e);
    vert_nbrs[edge_verts[e][0]].push_back(edge_verts[e][1]);
    vert_nbrs[edge_verts[e][1]].push_back(edge_verts[e][0]);
  }

  // manifold vertex stars: the incident triangles of each vertex form one fan
  for (int v = 0; v < nv(); ++v) {
    const auto& star = vert_tris[v];
    if (star.empty()) throw InputError("vertex " + std::to_string(v) + " is isolated");
    if (star.size() != vert_edges[v].size())
      throw InputError("vertex " + std::to_string(v) + " has a non-manifold star");
    UF uf(static_cast<int>(star.size()));
    for (size_t i = 0; i < star.size(); ++i)
      for (size_t j = i + 1; j < star.size(); ++j) {
        const auto& ti = tris[star[i]];
        const auto& tj = tris[star[j]];
        int shared = 0;
        for (int x : ti)
          for (int y : tj)
            if (x == y) ++shared;
        if (shared >= 2) uf.unite(static_cast<int>(i), static_cast<int>(j));
      }
    for (size_t i = 1; i < star.size(); ++i)
      if (uf.find(static_cast<int>(i)) != uf.find(0))
        throw InputError("vertex " + std::to_string(v) + " has a pinched star");
  }

  if (area_num.size() != tris.size()) throw InputError("area list does not match triangle count");
  long long sum = 0;
  for (long long a : area_num) {
    if (a <= 0) throw InputError("non-positive triangle area");
    sum += a;
  }
  if (area_den <= 0 || sum != area_den)
    throw InputError("triangle areas must sum to exactly 1");
}

TriMesh build_mesh(MeshKind kind, int resolution) {
  if (resolution < 1) throw InputError("mesh resolution must be at least 1");
  TriMesh m;
  m.kind = kind;
  if (kind == MeshKind::Sphere) {
    m.verts = {{1, 0, 0}, {-1, 0, 0}, {0, 1, 0}, {0, -1, 0}, {0, 0, 1}, {0, 0, -1}};
    m.tris = {{0, 2, 4}, {2, 1, 4}, {1, 3, 4}, {3, 0, 4},
              {2, 0, 5}, {1, 2, 5}, {3, 1, 5}, {0, 3, 5}};
    for (int step = 1; step < resolution; ++step) {
      std::map<std::pair<int, int>, int> mid;
      auto midpoint = [&](int a, int b) {
        int lo = std::min(a, b), hi = std::max(a, b);
        auto it = mid.find({lo, hi});
        if (it != mid.end()) return it->second;
        std::array<double, 3> p = {(m.verts[lo][0] + m.verts[hi][0]) / 2,
                                   (m.verts[lo][1] + m.verts[hi][1]) / 2,
                                   (m.verts[lo][2] + m.verts[hi][2]) / 2};
        int id = m.nv();
        m.verts.push_back(normalized(p));
        mid.emplace(std::make_pair(lo, hi), id);
        return id;
      };
      std::vector<std::array<int, 3>> next;
      next.reserve(m.tris.size() * 4);
      for (const auto& t : m.tris) {
        int ab = midpoint(t[0], t[1]), bc = midpoint(t[1], t[2]), ca = midpoint(t[2], t[0]);
        next.push_back({t[0], ab, ca});
        next.push_back({ab, t[1], bc});
        next.push_back({ca, bc, t[2]});
        next.push_back({ab, bc, ca});
      }
      m.tris = std::move(next);
    }
    // every subdivision cell carries the same exact share of the total area
    m.area_den = static_cast<long long>(m.tris.size());
    m.area_num.assign(m.tris.size(), 1);
  } else {
    int n = resolution;
    if (n < 3)
      throw InputError("torus resolution below 3 identifies grid edges and is not a "
                       "simplicial complex; use resolution >= 3");
    m.torus_n = n;
    auto vid = [n](int i, int j) { return ((j % n + n) % n) * n + ((i % n + n) % n); };
    for (int j = 0; j < n; ++j)
      for (int i = 0; i < n; ++i) {
        m.verts.push_back({static_cast<double>(i) / n, static_cast<double>(j) / n, 0.0});
        m.torus_coord.push_back({i, j});
      }
    for (int j = 0; j < n; ++j)
      for (int i = 0; i < n; ++i) {
        m.tris.push_back({vid(i, j), vid(i + 1, j), vid(i + 1, j + 1)});
        m.tris.push_back({vid(i, j), vid(i + 1, j + 1), vid(i, j + 1)});
      }
    m.area_den = 2LL * n * n;
    m.area_num.assign(m.tris.size(), 1);
  }
  m.finalize();
  return m;
}

Subcomplex make_subcomplex(const TriMesh& m, const std::vector<int>& tris,
                           const std::vector<int>& extra_edges,
                           const std::vector<int>& extra_verts) {
  std::set<int> vs(extra_verts.begin(), extra_verts.end());
  std::set<int> es(extra_edges.begin(), extra_edges.end());
  std::set<int> ts(tris.begin(), tris.end());
  for (int t : ts) {
    if (t < 0 || t >= m.nt()) throw InputError("triangle id out of range: " + std::to_string(t));
    for (int e : m.tri_edges[t]) es.insert(e);
  }
  for (int e : es) {
    if (e < 0 || e >= m.ne()) throw InputError("edge id out of range: " + std::to_string(e));
    vs.insert(m.edge_verts[e][0]);
    vs.insert(m.edge_verts[e][1]);
  }
  for (int v : vs)
    if (v < 0 || v >= m.nv()) throw InputError("vertex id out of range: " + std::to_string(v));
  Subcomplex a;
  a.verts.assign(vs.begin(), vs.end());
  a.edges.assign(es.begin(), es.end());
  a.tris.assign(ts.begin(), ts.end());
  return a;
}

void validate_subcomplex(const TriMesh& m, const Subcomplex& a) {
  std::vector<char> inv(m.nv(), 0), ine(m.ne(), 0);
  for (int v : a.verts) {
    if (v < 0 || v >= m.nv()) throw InputError("vertex id out of range: " + std::to_string(v));
    inv[v] = 1;
  }
  for (int e : a.edges) {
    if (e < 0 || e >= m.ne()) throw InputError("edge id out of range: " + std::to_string(e));
    ine[e] = 1;
    if (!inv[m.edge_verts[e][0]] || !inv[m.edge_verts[e][1]])
      throw InputError("subcomplex is not downward closed at edge " + std::to_string(e));
  }
  for (int t : a.tris) {
    if (t < 0 || t >= m.nt()) throw InputError("triangle id out of range: " + std::to_string(t));
    for (int e : m.tri_edges[t])
      if (!ine[e])
        throw InputError("subcomplex is not downward closed at triangle " + std::to_string(t));
  }
}

std::vector<Subcomplex> subcomplex_components(const TriMesh& m, const Subcomplex& a) {
  int base_e = m.nv(), base_t = m.nv() + m.ne();
  UF uf(m.nv() + m.ne() + m.nt());
  for (int e : a.edges) {
    uf.unite(base_e + e, m.edge_verts[e][0]);
    uf.unite(base_e + e, m.edge_verts[e][1]);
  }
  for (int t : a.tris)
    for (int e : m.tri_edges[t]) uf.unite(base_t + t, base_e + e);

  std::map<int, Subcomplex> comps;
  for (int v : a.verts) comps[uf.find(v)].verts.push_back(v);
  for (int e : a.edges) comps[uf.find(base_e + e)].edges.push_back(e);
  for (int t : a.tris) comps[uf.find(base_t + t)].tris.push_back(t);

  std::vector<Subcomplex> out;
  for (auto& [root, sc] : comps) out.push_back(std::move(sc));
  std::sort(out.begin(), out.end(), [](const Subcomplex& x, const Subcomplex& y) {
    return x.verts.front() < y.verts.front();
  });
  return out;
}

std::vector<OpenComponent> complement_components(const TriMesh& m, const Subcomplex& a) {
  std::vector<char> in_t(m.nt(), 0), in_e(m.ne(), 0), in_v(m.nv(), 0);
  for (int t : a.tris) in_t[t] = 1;
  for (int e : a.edges) in_e[e] = 1;
  for (int v : a.verts) in_v[v] = 1;

  UF uf(m.nt());
  for (int e = 0; e < m.ne(); ++e)
    if (!in_e[e] && !in_t[m.edge_tris[e][0]] && !in_t[m.edge_tris[e][1]])
      uf.unite(m.edge_tris[e][0], m.edge_tris[e][1]);
  // a vertex outside A joins its whole open star (downward closure keeps the
  // star free of A triangles)
  for (int v = 0; v < m.nv(); ++v)
    if (!in_v[v])
      for (size_t i = 1; i < m.vert_tris[v].size(); ++i)
        uf.unite(m.vert_tris[v][0], m.vert_tris[v][i]);

  std::map<int, OpenComponent> comps;
  for (int t = 0; t < m.nt(); ++t)
    if (!in_t[t]) comps[uf.find(t)].tris.push_back(t);

  std::vector<OpenComponent> out;
  for (auto& [root, c] : comps) out.push_back(std::move(c));
  std::sort(out.begin(), out.end(),
            [](const OpenComponent& x, const OpenComponent& y) { return x.tris[0] < y.tris[0]; });
  for (auto& c : out) {
    long long num = 0;
    for (int t : c.tris) num += m.area_num[t];
    c.area = Rational(num, m.area_den);
  }
  return out;
}

long long open_region_euler(const TriMesh& m, const std::vector<int>& tris) {
  std::vector<char> in_t(m.nt(), 0);
  for (int t : tris) in_t[t] = 1;
  long long F = static_cast<long long>(tris.size());
  long long E = 0, V = 0;
  for (int e = 0; e < m.ne(); ++e)
    if (in_t[m.edge_tris[e][0]] && in_t[m.edge_tris[e][1]]) ++E;
  for (int v = 0; v < m.nv(); ++v) {
    bool full = true;
    for (int t : m.vert_tris[v])
      if (!in_t[t]) { full = false; break; }
    if (full) ++V;
  }
  return V - E + F;
}

bool open_region_is_disc(const TriMesh& m, const std::vector<int>& tris) {
  if (tris.empty()) return false;
  std::vector<char> in_t(m.nt(), 0);
  for (int t : tris) in_t[t] = 1;
  UF uf(m.nt());
  for (int e = 0; e < m.ne(); ++e)
    if (in_t[m.edge_tris[e][0]] && in_t[m.edge_tris[e][1]])
      uf.unite(m.edge_tris[e][0], m.edge_tris[e][1]);
  int root = uf.find(tris[0]);
  for (int t : tris)
    if (uf.find(t) != root) return false;
  return open_region_euler(m, tris) == 1;
}

bool is_solid(const TriMesh& m, const Subcomplex& a) {
  if (m.kind != MeshKind::Sphere)
    throw InputError("is_solid is defined on sphere meshes; torus sets go through grubb_tau_torus");
  if (a.empty()) return false;
  validate_subcomplex(m, a);
  if (subcomplex_components(m, a).size() != 1) return false;
  return complement_components(m, a).size() <= 1;
}

void validate_function(const TriMesh& m, const PLFunction& f) {
  if (static_cast<int>(f.vals.size()) != m.nv())
    throw InputError("function has " + std::to_string(f.vals.size()) + " values for " +
                     std::to_string(m.nv()) + " vertices");
  for (double x : f.vals)
    if (!std::isfinite(x)) throw InputError("function values must be finite");
}

std::vector<LevelComponent> level_components(const TriMesh& m, const PLFunction& f, double c) {
  validate_function(m, f);
  const auto& F = f.vals;

  std::vector<char> von(m.nv(), 0);
  for (int v = 0; v < m.nv(); ++v) von[v] = (F[v] == c);
  std::vector<char> ecross(m.ne(), 0), eflat(m.ne(), 0);
  for (int e = 0; e < m.ne(); ++e) {
    double a = F[m.edge_verts[e][0]], b = F[m.edge_verts[e][1]];
    if ((a < c && c < b) || (b < c && c < a)) ecross[e] = 1;
    if (a == c && b == c) eflat[e] = 1;
  }

  int base_e = m.nv(), base_t = m.nv() + m.ne();
  UF uf(m.nv() + m.ne() + m.nt());
  std::vector<char> tflat(m.nt(), 0);
  for (int t = 0; t < m.nt(); ++t) {
    const auto& tr = m.tris[t];
    double v0 = F[tr[0]], v1 = F[tr[1]], v2 = F[tr[2]];
    if (v0 == c && v1 == c && v2 == c) {
      tflat[t] = 1;
      for (int e : m.tri_edges[t]) uf.unite(base_t + t, base_e + e);
      continue;
    }
    // non-flat triangle: the level set inside it is a vertex, an edge, or a segment
    int eq = (v0 == c) + (v1 == c) + (v2 == c);
    if (eq == 2) {
      for (int k = 0; k < 3; ++k)
        if (eflat[m.tri_edges[t][k]]) uf.unite(base_e + m.tri_edges[t][k], m.edge_verts[m.tri_edges[t][k]][0]);
      continue;
    }
    if (eq == 1) {
      int vk = (v0 == c) ? 0 : (v1 == c ? 1 : 2);
      int opp = m.tri_edges[t][(vk + 1) % 3];  // edge between the other two vertices
      if (ecross[opp]) uf.unite(tr[vk], base_e + opp);
      continue;
    }
    // eq == 0: segment joining the two crossed edges, if any
    int first = -1;
    for (int k = 0; k < 3; ++k) {
      int e = m.tri_edges[t][k];
      if (!ecross[e]) continue;
      if (first < 0) first = e;
      else uf.unite(base_e + first, base_e + e);
    }
  }
  for (int e = 0; e < m.ne(); ++e)
    if (eflat[e]) {
      uf.unite(base_e + e, m.edge_verts[e][0]);
      uf.unite(base_e + e, m.edge_verts[e][1]);
    }

  std::map<int, LevelComponent> comps;
  auto touch = [&](int root) -> LevelComponent& {
    auto& lc = comps[root];
    lc.value = c;
    return lc;
  };
  for (int v = 0; v < m.nv(); ++v)
    if (von[v]) {
      auto& lc = touch(uf.find(v));
      lc.cells.verts.push_back(v);
      lc.plateau = true;
    }
  for (int e = 0; e < m.ne(); ++e) {
    if (eflat[e]) touch(uf.find(base_e + e)).cells.edges.push_back(e);
    if (ecross[e]) touch(uf.find(base_e + e)).crossed.push_back(e);
  }
  for (int t = 0; t < m.nt(); ++t)
    if (tflat[t]) touch(uf.find(base_t + t)).cells.tris.push_back(t);

  std::vector<LevelComponent> out;
  for (auto& [root, lc] : comps) out.push_back(std::move(lc));
  std::sort(out.begin(), out.end(), [](const LevelComponent& x, const LevelComponent& y) {
    int xv = x.cells.verts.empty() ? INT32_MAX : x.cells.verts[0];
    int yv = y.cells.verts.empty() ? INT32_MAX : y.cells.verts[0];
    if (xv != yv) return xv < yv;
    int xe = x.crossed.empty() ? INT32_MAX : x.crossed[0];
    int ye = y.crossed.empty() ? INT32_MAX : y.crossed[0];
    return xe < ye;
  });

  // order regular components into closed polylines
  for (auto& lc : out) {
    if (lc.plateau || lc.crossed.empty()) continue;
    std::map<int, std::array<int, 2>> nbr;  // crossed edge -> the two neighbors
    for (int e : lc.crossed) nbr[e] = {-1, -1};
    auto link = [&](int e1, int e2) {
      auto& n1 = nbr[e1];
      if (n1[0] == e2 || n1[1] == e2) return;
      (n1[0] < 0 ? n1[0] : n1[1]) = e2;
    };
    for (int e : lc.crossed)
      for (int t : m.edge_tris[e])
        for (int e2 : m.tri_edges[t])
          if (e2 != e && ecross[e2] && nbr.count(e2)) { link(e, e2); link(e2, e); }
    std::vector<int> cyc;
    int start = lc.crossed[0], prev = -1, cur = start;
    do {
      cyc.push_back(cur);
      auto& n = nbr[cur];
      if (n[0] < 0 || n[1] < 0)
        throw InvariantError("regular level component is not a closed curve");
      int nxt = (n[0] == prev) ? n[1] : n[0];
      prev = cur;
      cur = nxt;
    } while (cur != start && cyc.size() <= lc.crossed.size());
    if (cyc.size() != lc.crossed.size())
      throw InvariantError("regular level component walk did not close up");
    lc.cycle_edges = std::move(cyc);
  }
  return out;
}

LevelComponent level_component(const TriMesh& m, const PLFunction& f, double c, int seed_tri) {
  validate_function(m, f);
  if (seed_tri < 0 || seed_tri >= m.nt())
    throw InputError("seed triangle id out of range: " + std::to_string(seed_tri));
  double lo = f.vals[0], hi = f.vals[0];
  for (double x : f.vals) { lo = std::min(lo, x); hi = std::max(hi, x); }
  if (c < lo || c > hi)
    throw InputError("level value lies outside the function range");
  auto all = level_components(m, f, c);
  for (auto& lc : all) {
    for (int v : m.tris[seed_tri])
      if (std::find(lc.cells.verts.begin(), lc.cells.verts.end(), v) != lc.cells.verts.end())
        return lc;
    for (int e : m.tri_edges[seed_tri]) {
      if (std::find(lc.crossed.begin(), lc.crossed.end(), e) != lc.crossed.end()) return lc;
      if (std::find(lc.cells.edges.begin(), lc.cells.edges.end(), e) != lc.cells.edges.end())
        return lc;
    }
    if (std::find(lc.cells.tris.begin(), lc.cells.tris.end(), seed_tri) != lc.cells.tris.end())
      return lc;
  }
  throw InputError("level set at the given value does not meet the seed triangle");
}

std::vector<int> grow_disc(const TriMesh& m, int seed_vert, const Rational& max_area) {
  if (seed_vert < 0 || seed_vert >= m.nv())
    throw InputError("seed vertex id out of range: " + std::to_string(seed_vert));
  std::vector<char> in_s(m.nt(), 0);
  std::vector<int> region;
  long long num = 0;
  long long e_int = 0, v_int = 0;

  auto fits = [&](int t) {
    return Rational(num + m.area_num[t], m.area_den) <= max_area;
  };
  auto try_add = [&](int t) {
    if (in_s[t] || !fits(t)) return false;
    long long de = 0, dv = 0;
    for (int e : m.tri_edges[t]) {
      int other = m.edge_tris[e][0] == t ? m.edge_tris[e][1] : m.edge_tris[e][0];
      if (in_s[other]) ++de;
    }
    for (int v : m.tris[t]) {
      bool full = true;
      for (int t2 : m.vert_tris[v])
        if (t2 != t && !in_s[t2]) { full = false; break; }
      if (full) ++dv;
    }
    long long chi = (v_int + dv) - (e_int + de) + (static_cast<long long>(region.size()) + 1);
    if (chi != 1) return false;
    if (!region.empty() && de == 0) return false;  // keep it edge-connected
    in_s[t] = 1;
    region.push_back(t);
    e_int += de;
    v_int += dv;
    num += m.area_num[t];
    return true;
  };

  std::deque<int> queue;
  queue.push_back(m.vert_tris[seed_vert][0]);
  while (!queue.empty()) {
    int t = queue.front();
    queue.pop_front();
    if (in_s[t]) continue;
    if (!try_add(t)) continue;
    for (int e : m.tri_edges[t]) {
      int other = m.edge_tris[e][0] == t ? m.edge_tris[e][1] : m.edge_tris[e][0];
      if (!in_s[other]) queue.push_back(other);
    }
  }
  std::sort(region.begin(), region.end());
  if (!open_region_is_disc(m, region))
    throw InvariantError("grown region failed the disc check");
  return region;
}

// ---- file formats ----

using nlohmann::json;

std::string mesh_to_json(const TriMesh& m) {
  json j;
  j["kind"] = (m.kind == MeshKind::Sphere) ? "sphere" : "torus";
  j["vertices"] = json::array();
  for (const auto& v : m.verts) j["vertices"].push_back({v[0], v[1], v[2]});
  j["triangles"] = json::array();
  for (const auto& t : m.tris) j["triangles"].push_back({t[0], t[1], t[2]});
  j["areas"] = json::array();
  for (int t = 0; t < m.nt(); ++t) j["areas"].push_back(format_rational(m.tri_area(t)));
  return j.dump(2) + "\n";
}

TriMesh mesh_from_json(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw InputError(std::string("mesh JSON parse error: ") + e.what());
  }
  TriMesh m;
  if (!j.contains("kind") || !j["kind"].is_string())
    throw InputError("mesh JSON: missing string field \"kind\"");
  std::string kind = j["kind"];
  if (kind == "sphere") m.kind = MeshKind::Sphere;
  else if (kind == "torus") m.kind = MeshKind::Torus;
  else throw InputError("mesh JSON: unknown kind \"" + kind + "\"");
  if (!j.contains("vertices") || !j["vertices"].is_array())
    throw InputError("mesh JSON: missing array field \"vertices\"");
  for (const auto& v : j["vertices"]) {
    if (!v.is_array() || v.size() != 3) throw InputError("mesh JSON: vertex entries need 3 coordinates");
    m.verts.push_back({v[0].get<double>(), v[1].get<double>(), v[2].get<double>()});
  }
  if (!j.contains("triangles") || !j["triangles"].is_array())
    throw InputError("mesh JSON: missing array field \"triangles\"");
  for (const auto& t : j["triangles"]) {
    if (!t.is_array() || t.size() != 3) throw InputError("mesh JSON: triangle entries need 3 vertex ids");
    m.tris.push_back({t[0].get<int>(), t[1].get<int>(), t[2].get<int>()});
  }
  if (!j.contains("areas") || !j["areas"].is_array())
    throw InputError("mesh JSON: missing array field \"areas\"");
  std::vector<Rational> areas;
  for (const auto& a : j["areas"]) {
    if (!a.is_string()) throw InputError("mesh JSON: areas must be \"p/q\" strings");
    try {
      areas.push_back(parse_rational(a.get<std::string>()));
    } catch (const std::invalid_argument& e) {
      throw InputError(std::string("mesh JSON: ") + e.what());
    }
  }
  if (areas.size() != m.tris.size())
    throw InputError("mesh JSON: area count does not match triangle count");

  if (m.kind == MeshKind::Torus) {
    // The grid bookkeeping behind exact homology classes is not a file field;
    // recover it from the vertex positions, which build_mesh pins to
    // (i/n, j/n, 0) for an n x n grid.
    const int n = static_cast<int>(
        std::lround(std::sqrt(static_cast<double>(m.verts.size()))));
    if (n < 3 || static_cast<std::size_t>(n) * n != m.verts.size())
      throw InputError("mesh JSON: a torus mesh needs n*n vertices with n >= 3");
    m.torus_n = n;
    std::set<std::pair<int, int>> seen;
    for (const auto& v : m.verts) {
      const int i = static_cast<int>(std::lround(v[0] * n));
      const int j = static_cast<int>(std::lround(v[1] * n));
      if (i < 0 || i >= n || j < 0 || j >= n ||
          v[0] != static_cast<double>(i) / n ||
          v[1] != static_cast<double>(j) / n || v[2] != 0.0)
        throw InputError(
            "mesh JSON: torus vertices must lie on the uniform grid "
            "(i/n, j/n, 0)");
      if (!seen.insert({i, j}).second)
        throw InputError("mesh JSON: two torus vertices share a grid point");
      m.torus_coord.push_back({i, j});
    }
  }

  // common denominator, kept in int64; reject meshes too fine for that
  BigInt den = 1;
  for (const auto& a : areas) {
    BigInt d = denominator(a);
    den = den / gcd(den, d) * d;
    if (den > BigInt(1) << 53)
      throw InputError("mesh JSON: common area denominator exceeds 2^53");
  }
  m.area_den = den.convert_to<long long>();
  for (const auto& a : areas) {
    BigInt num = numerator(a) * (den / denominator(a));
    m.area_num.push_back(num.convert_to<long long>());
  }
  m.finalize();
  return m;
}

std::string function_to_csv(const PLFunction& f) {
  std::string out = "vertex_id,value\n";
  char buf[64];
  for (size_t v = 0; v < f.vals.size(); ++v) {
    std::snprintf(buf, sizeof buf, "%zu,%.17g\n", v, f.vals[v]);
    out += buf;
  }
  return out;
}

PLFunction function_from_csv(const TriMesh& m, const std::string& text) {
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line)) throw InputError("function CSV: empty file");
  while (!line.empty() && (line.back() == '\r' || line.back() == '\n')) line.pop_back();
  if (line != "vertex_id,value")
    throw InputError("function CSV line 1: expected header \"vertex_id,value\"");
  PLFunction f;
  f.vals.assign(m.nv(), 0.0);
  std::vector<char> seen(m.nv(), 0);
  int lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    while (!line.empty() && (line.back() == '\r' || line.back() == '\n')) line.pop_back();
    if (line.empty()) continue;
    auto comma = line.find(',');
    if (comma == std::string::npos)
      throw InputError("function CSV line " + std::to_string(lineno) + ": expected id,value");
    int id;
    double val;
    try {
      size_t pos;
      id = std::stoi(line.substr(0, comma), &pos);
      if (pos != comma) throw std::invalid_argument("");
      val = std::stod(line.substr(comma + 1), &pos);
      if (pos != line.size() - comma - 1) throw std::invalid_argument("");
    } catch (const std::exception&) {
      throw InputError("function CSV line " + std::to_string(lineno) + ": malformed row");
    }
    if (id < 0 || id >= m.nv())
      throw InputError("function CSV line " + std::to_string(lineno) + ": vertex id out of range");
    if (seen[id])
      throw InputError("function CSV line " + std::to_string(lineno) + ": duplicate vertex id");
    if (!std::isfinite(val))
      throw InputError("function CSV line " + std::to_string(lineno) + ": non-finite value");
    seen[id] = 1;
    f.vals[id] = val;
  }
  for (int v = 0; v < m.nv(); ++v)
    if (!seen[v]) throw InputError("function CSV: missing value for vertex " + std::to_string(v));
  return f;
}

std::string subcomplex_to_json(const TriMesh& m, const Subcomplex& a) {
  json j;
  j["triangles"] = a.tris;
  j["vertices"] = a.verts;
  j["edges"] = json::array();
  for (int e : a.edges) j["edges"].push_back({m.edge_verts[e][0], m.edge_verts[e][1]});
  return j.dump(2) + "\n";
}

Subcomplex subcomplex_from_json(const TriMesh& m, const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw InputError(std::string("subcomplex JSON parse error: ") + e.what());
  }
  Subcomplex a;
  if (j.contains("triangles"))
    for (const auto& t : j["triangles"]) a.tris.push_back(t.get<int>());
  if (j.contains("vertices"))
    for (const auto& v : j["vertices"]) a.verts.push_back(v.get<int>());
  if (j.contains("edges"))
    for (const auto& e : j["edges"]) {
      if (!e.is_array() || e.size() != 2)
        throw InputError("subcomplex JSON: edges are [i,j] vertex pairs");
      int id = m.edge_between(e[0].get<int>(), e[1].get<int>());
      if (id < 0)
        throw InputError("subcomplex JSON: no mesh edge between " +
                         to_string(e[0]) + " and " + to_string(e[1]));
      a.edges.push_back(id);
    }
  for (int& x : a.verts)
    if (x < 0 || x >= m.nv()) throw InputError("subcomplex JSON: vertex id out of range");
  for (int& x : a.tris)
    if (x < 0 || x >= m.nt()) throw InputError("subcomplex JSON: triangle id out of range");
  auto closed = make_subcomplex(m, a.tris, a.edges, a.verts);
  validate_subcomplex(m, closed);
  // the file must already be downward closed; closure only sorts and dedups
  if (closed.verts.size() != a.verts.size() || closed.edges.size() != a.edges.size())
    throw InputError("subcomplex JSON: cell lists are not downward closed");
  return closed;
}

}  // namespace qs
