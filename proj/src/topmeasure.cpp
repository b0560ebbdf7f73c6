#include "qs/topmeasure.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>
#include <map>
#include <set>
#include <string>

namespace qs {

namespace {

const Rational kHalf(1, 2);

void require_sphere(const TriMesh& m, const char* op) {
  if (m.kind != MeshKind::Sphere)
    throw InputError(std::string(op) + " needs a sphere mesh");
}

}  // namespace

int tau_solid_sphere(const TriMesh& m, const Subcomplex& a) {
  require_sphere(m, "tau_solid_sphere");
  validate_subcomplex(m, a);
  if (!is_solid(m, a))
    throw InputError(
        "tau_solid_sphere needs a solid set (connected, with connected "
        "complement); evaluate general closed sets with tau_closed_sphere");
  FracAcc area;
  for (int t : a.tris) area.add(m.tri_area(t));
  return area.cmp(kHalf) >= 0 ? 1 : 0;
}

SphereTau tau_closed_sphere_detail(const TriMesh& m, const Subcomplex& a) {
  require_sphere(m, "tau_closed_sphere");
  validate_subcomplex(m, a);
  SphereTau out;
  std::vector<Subcomplex> comps = subcomplex_components(m, a);
  for (int i = 0; i < static_cast<int>(comps.size()); ++i) {
    bool wins = true;
    for (const OpenComponent& oc : complement_components(m, comps[i])) {
      if (oc.area > kHalf) {
        wins = false;
        break;
      }
    }
    if (!wins) continue;
    if (out.value == 1)
      throw InvariantError(
          "two disjoint closed components each confine their complement to "
          "areas at most 1/2, which is impossible on the sphere");
    out.value = 1;
    out.winner = i;
  }
  return out;
}

int tau_closed_sphere(const TriMesh& m, const Subcomplex& a) {
  return tau_closed_sphere_detail(m, a).value;
}

int tau_open_sphere(const TriMesh& m, const Subcomplex& a) {
  return 1 - tau_closed_sphere(m, a);
}

bool in_skeleton_class(const TriMesh& m, const Subcomplex& g) {
  require_sphere(m, "in_skeleton_class");
  validate_subcomplex(m, g);
  std::vector<OpenComponent> occ = complement_components(m, g);
  if (occ.empty()) return false;  // the whole sphere is not a graph
  for (const OpenComponent& oc : occ) {
    if (oc.area > kHalf) return false;
    if (!open_region_is_disc(m, oc.tris)) return false;
  }
  return true;
}

Subcomplex superlevel_subcomplex(const TriMesh& m, const PLFunction& f,
                                 double a) {
  validate_function(m, f);
  std::vector<int> tris;
  std::vector<int> edges;
  std::vector<int> verts;
  for (int t = 0; t < m.nt(); ++t) {
    const auto& tv = m.tris[t];
    if (f.vals[tv[0]] >= a && f.vals[tv[1]] >= a && f.vals[tv[2]] >= a)
      tris.push_back(t);
  }
  for (int e = 0; e < m.ne(); ++e) {
    if (f.vals[m.edge_verts[e][0]] >= a && f.vals[m.edge_verts[e][1]] >= a)
      edges.push_back(e);
  }
  for (int v = 0; v < m.nv(); ++v)
    if (f.vals[v] >= a) verts.push_back(v);
  return make_subcomplex(m, tris, edges, verts);
}

CutoffReport tau_from_state(const TriMesh& m, const StateEvaluator& state,
                            const Subcomplex& a, int family_depth) {
  validate_subcomplex(m, a);
  if (family_depth < 1)
    throw InputError("cutoff family depth must be at least 1, got " +
                     std::to_string(family_depth));

  // edge-graph distance from the set, for the linear decay profile
  const int inf = std::numeric_limits<int>::max();
  std::vector<int> dist(m.nv(), inf);
  std::deque<int> queue;
  for (int v : a.verts) {
    dist[v] = 0;
    queue.push_back(v);
  }
  while (!queue.empty()) {
    int v = queue.front();
    queue.pop_front();
    for (int w : m.vert_nbrs[v]) {
      if (dist[w] > dist[v] + 1) {
        dist[w] = dist[v] + 1;
        queue.push_back(w);
      }
    }
  }

  CutoffReport out;
  PLFunction f;
  f.vals.resize(m.nv());
  for (int r = 1; r <= family_depth; ++r) {
    for (int v = 0; v < m.nv(); ++v) {
      f.vals[v] = dist[v] >= r
                      ? 0.0
                      : static_cast<double>(r - dist[v]) / static_cast<double>(r);
    }
    out.sequence.push_back(state(m, f));
    if (out.sequence.size() >= 2) {
      double prev = out.sequence[out.sequence.size() - 2];
      if (out.sequence.back() < prev - 1e-12)
        throw InvariantError(
            "state value decreased when the cutoff collar widened, breaking "
            "monotonicity of the family");
    }
  }
  out.value = *std::min_element(out.sequence.begin(), out.sequence.end());
  return out;
}

DiscreteMeasure superlevel_distribution(const TriMesh& m,
                                        const MeasureEvaluator& tau,
                                        const PLFunction& f) {
  validate_function(m, f);
  std::vector<double> levels = f.vals;
  std::sort(levels.begin(), levels.end());
  levels.erase(std::unique(levels.begin(), levels.end()), levels.end());

  std::vector<Rational> taus(levels.size());
  for (size_t i = 0; i < levels.size(); ++i)
    taus[i] = tau(m, superlevel_subcomplex(m, f, levels[i]));

  DiscreteMeasure out;
  for (size_t i = 0; i < levels.size(); ++i) {
    Rational drop =
        i + 1 < levels.size() ? Rational(taus[i] - taus[i + 1]) : taus[i];
    if (drop < 0)
      throw InvariantError(
          "superlevel measure grew as the threshold rose; the measure "
          "evaluator is not monotone");
    if (drop != 0) out.atoms.emplace_back(levels[i], drop);
  }
  return out;
}

double state_from_tau(const TriMesh& m, const MeasureEvaluator& tau,
                      const PLFunction& f) {
  DiscreteMeasure d = superlevel_distribution(m, tau, f);
  FracAcc acc;
  for (const auto& [pos, mass] : d.atoms) acc.add(exact_rational(pos) * mass);
  return to_double(acc.value());
}

DiscreteMeasure pushforward_distribution(const TriMesh& m,
                                         const PLFunction& f) {
  require_sphere(m, "pushforward_distribution");
  MeasureEvaluator simple = [](const TriMesh& mm, const Subcomplex& aa) {
    return Rational(tau_closed_sphere(mm, aa));
  };
  DiscreteMeasure d = superlevel_distribution(m, simple, f);
  FracAcc total;
  for (const auto& [pos, mass] : d.atoms) total.add(mass);
  if (total.cmp(Rational(1)) != 0)
    throw InvariantError(
        "the distribution of a function under the measure must have total "
        "mass one");
  if (d.atoms.size() != 1)
    throw InvariantError(
        "a monotone 0/1 measure concentrates every function at a single "
        "value, but the sweep found " +
        std::to_string(d.atoms.size()) + " atoms");
  return d;
}

// ---- torus ----

namespace {

// shortest representative of a grid coordinate difference, exact for the
// unit steps that mesh edges realize
int wrap_step(int d, int n) {
  int r = d % n;
  if (r < 0) r += n;
  if (2 * r > n) r -= n;
  return r;
}

std::array<long long, 2> edge_step(const TriMesh& m, int from, int to) {
  std::array<long long, 2> d{};
  for (int ax = 0; ax < 2; ++ax)
    d[ax] = wrap_step(m.torus_coord[to][ax] - m.torus_coord[from][ax],
                      m.torus_n);
  return d;
}

// splits a set of edges in which every vertex has degree two into its simple
// closed cycles, each walked in a deterministic order
std::vector<std::vector<int>> walk_cycles(const TriMesh& m,
                                          const std::vector<int>& edges) {
  std::map<int, std::vector<int>> at_vert;
  for (int e : edges) {
    at_vert[m.edge_verts[e][0]].push_back(e);
    at_vert[m.edge_verts[e][1]].push_back(e);
  }
  for (const auto& [v, inc] : at_vert) {
    if (inc.size() != 2)
      throw InvariantError("cycle walk found vertex " + std::to_string(v) +
                           " with " + std::to_string(inc.size()) +
                           " incident edges instead of two");
  }
  std::set<int> used;
  std::vector<std::vector<int>> cycles;
  for (int e0 : edges) {
    if (used.count(e0)) continue;
    std::vector<int> cyc;
    int home = m.edge_verts[e0][0];
    int at = m.edge_verts[e0][1];
    cyc.push_back(e0);
    used.insert(e0);
    int prev = e0;
    while (at != home) {
      const std::vector<int>& inc = at_vert[at];
      int nxt = inc[0] == prev ? inc[1] : inc[0];
      cyc.push_back(nxt);
      used.insert(nxt);
      int a = m.edge_verts[nxt][0], b = m.edge_verts[nxt][1];
      at = a == at ? b : a;
      prev = nxt;
    }
    cycles.push_back(std::move(cyc));
  }
  return cycles;
}

// winding numbers of a closed edge cycle around the two torus directions
std::array<long long, 2> cycle_class(const TriMesh& m,
                                     const std::vector<int>& cyc) {
  std::array<long long, 2> sum{};
  int at = m.edge_verts[cyc[0]][0];
  for (int e : cyc) {
    int a = m.edge_verts[e][0], b = m.edge_verts[e][1];
    int nxt = a == at ? b : a;
    std::array<long long, 2> d = edge_step(m, at, nxt);
    sum[0] += d[0];
    sum[1] += d[1];
    at = nxt;
  }
  for (int ax = 0; ax < 2; ++ax) {
    if (sum[ax] % m.torus_n != 0)
      throw InvariantError("cycle winding did not close to a whole number of "
                           "grid wraps");
    sum[ax] /= m.torus_n;
  }
  return sum;
}

}  // namespace

TorusSubsurface analyze_torus_subsurface(const TriMesh& m,
                                         const std::vector<int>& tris) {
  if (m.kind != MeshKind::Torus)
    throw InputError("torus subsurface analysis needs a torus mesh");
  TorusSubsurface out;
  out.tris = tris;
  std::sort(out.tris.begin(), out.tris.end());
  out.tris.erase(std::unique(out.tris.begin(), out.tris.end()),
                 out.tris.end());
  if (out.tris.empty())
    throw InputError("a torus subsurface needs at least one triangle");
  if (out.tris.front() < 0 || out.tris.back() >= m.nt())
    throw InputError("subsurface triangle id out of range");

  std::vector<char> in_w(m.nt(), 0);
  for (int t : out.tris) in_w[t] = 1;
  std::vector<int> edge_cnt(m.ne(), 0);
  for (int t : out.tris)
    for (int e : m.tri_edges[t]) ++edge_cnt[e];

  // edge connectivity across interior edges
  {
    std::vector<int> comp(m.nt(), -1);
    std::deque<int> queue;
    comp[out.tris.front()] = 0;
    queue.push_back(out.tris.front());
    while (!queue.empty()) {
      int t = queue.front();
      queue.pop_front();
      for (int e : m.tri_edges[t]) {
        if (edge_cnt[e] != 2) continue;
        int o = m.edge_tris[e][0] == t ? m.edge_tris[e][1] : m.edge_tris[e][0];
        if (comp[o] == -1) {
          comp[o] = 0;
          queue.push_back(o);
        }
      }
    }
    for (int t : out.tris) {
      if (comp[t] == -1)
        throw InputError(
            "subsurface triangles are not connected through shared edges "
            "(triangle " +
            std::to_string(t) + " is cut off)");
    }
  }

  // single triangle fan at every vertex; rejects pinch points
  std::vector<char> w_vert(m.nv(), 0);
  for (int t : out.tris)
    for (int v : m.tris[t]) w_vert[v] = 1;
  for (int v = 0; v < m.nv(); ++v) {
    if (!w_vert[v]) continue;
    std::map<int, int> local;  // triangle -> fan id, merged by shared edges
    for (int t : m.vert_tris[v])
      if (in_w[t]) local[t] = t;
    std::function<int(int)> find = [&](int t) {
      while (local[t] != t) t = local[t] = local[local[t]];
      return t;
    };
    for (int e : m.vert_edges[v]) {
      if (edge_cnt[e] != 2) continue;
      local[find(m.edge_tris[e][0])] = find(m.edge_tris[e][1]);
    }
    std::set<int> fans;
    for (const auto& [t, p] : local) fans.insert(find(t));
    if (fans.size() != 1)
      throw InputError("subsurface is pinched at vertex " + std::to_string(v) +
                       ": its triangles there form " +
                       std::to_string(fans.size()) + " separate fans");
  }

  // boundary curves
  std::vector<int> bedges;
  for (int e = 0; e < m.ne(); ++e)
    if (edge_cnt[e] == 1) bedges.push_back(e);
  {
    std::map<int, int> bdeg;
    for (int e : bedges) {
      ++bdeg[m.edge_verts[e][0]];
      ++bdeg[m.edge_verts[e][1]];
    }
    for (const auto& [v, d] : bdeg) {
      if (d != 2)
        throw InvariantError("boundary edges fail to pair up at vertex " +
                             std::to_string(v));
    }
  }
  if (!bedges.empty()) {
    for (std::vector<int>& cyc : walk_cycles(m, bedges)) {
      TorusSubsurface::BoundaryCurve c;
      c.h1 = cycle_class(m, cyc);
      c.edges = std::move(cyc);
      out.curves.push_back(std::move(c));
    }
  }

  // lift the grid coordinates over the subsurface; a cycle is essential
  // exactly when some edge fails to close up in the lift
  {
    std::vector<std::array<long long, 2>> lift(m.nv());
    std::vector<char> seen(m.nv(), 0);
    int root = m.tris[out.tris.front()][0];
    seen[root] = 1;
    std::deque<int> queue{root};
    std::vector<std::vector<int>> w_edges_at(m.nv());
    for (int e = 0; e < m.ne(); ++e) {
      if (edge_cnt[e] == 0) continue;
      w_edges_at[m.edge_verts[e][0]].push_back(e);
      w_edges_at[m.edge_verts[e][1]].push_back(e);
    }
    while (!queue.empty()) {
      int v = queue.front();
      queue.pop_front();
      for (int e : w_edges_at[v]) {
        int w = m.edge_verts[e][0] == v ? m.edge_verts[e][1]
                                        : m.edge_verts[e][0];
        if (seen[w]) continue;
        std::array<long long, 2> d = edge_step(m, v, w);
        lift[w] = {lift[v][0] + d[0], lift[v][1] + d[1]};
        seen[w] = 1;
        queue.push_back(w);
      }
    }
    bool essential = false;
    for (int e = 0; e < m.ne(); ++e) {
      if (edge_cnt[e] == 0) continue;
      int a = m.edge_verts[e][0], b = m.edge_verts[e][1];
      if (!seen[a] || !seen[b])
        throw InvariantError("subsurface vertex missed by the lift traversal");
      std::array<long long, 2> d = edge_step(m, a, b);
      for (int ax = 0; ax < 2; ++ax) {
        long long defect = lift[a][ax] + d[ax] - lift[b][ax];
        if (defect % m.torus_n != 0)
          throw InvariantError(
              "torus grid coordinates are inconsistent along an edge");
        if (defect != 0) essential = true;
      }
    }
    out.contractible = !essential;
  }

  FracAcc area;
  for (int t : out.tris) area.add(m.tri_area(t));
  out.area = area.value();
  return out;
}

bool contractible_in_torus(const TriMesh& m, const std::vector<int>& tris) {
  return analyze_torus_subsurface(m, tris).contractible;
}

TorusTau grubb_tau_torus_detail(const TriMesh& m, const Subcomplex& a) {
  if (m.kind != MeshKind::Torus)
    throw InputError("grubb_tau_torus needs a torus mesh");
  validate_subcomplex(m, a);
  TorusTau out;
  FracAcc total;
  for (const Subcomplex& comp : subcomplex_components(m, a)) {
    Rational value(0);
    if (!comp.tris.empty()) {
      Subcomplex closure = make_subcomplex(m, comp.tris);
      if (closure.verts != comp.verts || closure.edges != comp.edges)
        throw InputError(
            "a component with triangles carries extra edges or vertices "
            "outside its triangles; only clean subsurfaces are supported");
      TorusSubsurface sub = analyze_torus_subsurface(m, comp.tris);
      if (!sub.contractible) {
        std::vector<OpenComponent> occ = complement_components(m, closure);
        std::vector<int> comp_of(m.nt(), -1);
        for (int i = 0; i < static_cast<int>(occ.size()); ++i)
          for (int t : occ[i].tris) comp_of[t] = i;
        std::vector<char> in_w(m.nt(), 0);
        for (int t : comp.tris) in_w[t] = 1;
        FracAcc acc;
        acc.add(sub.area);
        std::set<int> taken;
        for (const TorusSubsurface::BoundaryCurve& c : sub.curves) {
          if (c.h1[0] != 0 || c.h1[1] != 0) continue;
          int disc = -1;
          for (int e : c.edges) {
            int t0 = m.edge_tris[e][0], t1 = m.edge_tris[e][1];
            int t_out = in_w[t0] ? t1 : t0;
            if (disc == -1) disc = comp_of[t_out];
            if (comp_of[t_out] != disc)
              throw InvariantError(
                  "a boundary curve touches two different complement "
                  "components on its far side");
          }
          if (open_region_euler(m, occ[disc].tris) != 1)
            throw InvariantError(
                "a null-homologous boundary curve failed to cut off a disc");
          if (!taken.insert(disc).second)
            throw InvariantError(
                "two null-homologous boundary curves claim the same disc");
          acc.add(occ[disc].area);
        }
        value = acc.value();
      }
    } else if (!comp.edges.empty()) {
      std::map<int, int> deg;
      for (int e : comp.edges) {
        ++deg[m.edge_verts[e][0]];
        ++deg[m.edge_verts[e][1]];
      }
      for (const auto& [v, d] : deg) {
        if (d != 2)
          throw InputError(
              "bare edges must form simple closed circles; vertex " +
              std::to_string(v) + " has degree " + std::to_string(d));
      }
      std::vector<std::vector<int>> cycles = walk_cycles(m, comp.edges);
      if (cycles.size() != 1)
        throw InvariantError(
            "a connected degree-two edge set split into several cycles");
      std::array<long long, 2> cls = cycle_class(m, cycles.front());
      if (cls[0] == 0 && cls[1] == 0)
        throw InputError(
            "the measure of a bare separating circle is not determined by "
            "the supported rules; thicken it to a subsurface");
      value = Rational(0);
    }
    // isolated vertices carry no area and measure zero
    out.per_component.push_back(value);
    total.add(value);
  }
  if (total.cmp(Rational(1)) > 0)
    throw InvariantError(
        "component measures sum past the total measure of the torus");
  out.total = total.value();
  return out;
}

Rational grubb_tau_torus(const TriMesh& m, const Subcomplex& a) {
  return grubb_tau_torus_detail(m, a).total;
}

}  // namespace qs
