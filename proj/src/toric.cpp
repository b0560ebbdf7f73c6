#include "qs/toric.hpp"

#include <algorithm>
#include <functional>
#include <numeric>
#include <set>

#include <json.hpp>

namespace qs {
namespace {

Rational dot(const std::vector<long long>& n, const RPoint& x) {
  Rational s(0);
  for (size_t i = 0; i < n.size(); ++i) s += Rational(n[i]) * x[i];
  return s;
}

long long det_ll(std::vector<std::vector<long long>> a) {
  // fraction-free elimination; dimensions here are tiny
  const int d = static_cast<int>(a.size());
  long long sign = 1, denom = 1;
  for (int col = 0; col < d; ++col) {
    int piv = -1;
    for (int r = col; r < d; ++r)
      if (a[r][col] != 0) {
        piv = r;
        break;
      }
    if (piv < 0) return 0;
    if (piv != col) {
      std::swap(a[piv], a[col]);
      sign = -sign;
    }
    for (int r = col + 1; r < d; ++r) {
      for (int c = col + 1; c < d; ++c)
        a[r][c] = (a[r][c] * a[col][col] - a[r][col] * a[col][c]) / denom;
      a[r][col] = 0;
    }
    denom = a[col][col];
  }
  return sign * a[d - 1][d - 1];
}

// rows of `n` form a basis; returns integer e_1..e_d (as columns) with
// <n_i, e_j> = delta_ij
std::vector<std::vector<long long>> dual_basis(
    const std::vector<std::vector<long long>>& n) {
  const int d = static_cast<int>(n.size());
  // invert over the rationals, then demand integrality
  std::vector<std::vector<Rational>> a(d, std::vector<Rational>(2 * d));
  for (int r = 0; r < d; ++r) {
    for (int c = 0; c < d; ++c) a[r][c] = Rational(n[r][c]);
    a[r][d + r] = Rational(1);
  }
  for (int col = 0; col < d; ++col) {
    int piv = -1;
    for (int r = col; r < d; ++r)
      if (a[r][col] != Rational(0)) {
        piv = r;
        break;
      }
    if (piv < 0) throw InvariantError("facet normals at a vertex are singular");
    std::swap(a[piv], a[col]);
    Rational lead = a[col][col];
    for (auto& v : a[col]) v /= lead;
    for (int r = 0; r < d; ++r) {
      if (r == col) continue;
      Rational f = a[r][col];
      if (f == Rational(0)) continue;
      for (int c = 0; c < 2 * d; ++c) a[r][c] -= f * a[col][c];
    }
  }
  // e_j is the j-th column of the inverse
  std::vector<std::vector<long long>> e(d, std::vector<long long>(d));
  for (int j = 0; j < d; ++j)
    for (int r = 0; r < d; ++r) {
      Rational v = a[r][d + j];
      if (denominator(v) != 1)
        throw InvariantError("vertex chart directions are not integral");
      e[j][r] = static_cast<long long>(numerator(v));
    }
  return e;
}

struct ChartData {
  std::vector<int> facets;                   // the d active facets, ascending
  std::vector<std::vector<long long>> dirs;  // dual edge directions e_j
  std::vector<Rational> ray;                 // edge length along each e_j
  Rational ball;                             // min ray: the chart ball size
};

ChartData build_chart(const MomentPolytope& p, int vi) {
  ChartData ch;
  const RPoint& v = p.vertices[vi];
  for (int f = 0; f < static_cast<int>(p.facets.size()); ++f)
    if (facet_slack(p, f, v) == Rational(0)) ch.facets.push_back(f);
  if (static_cast<int>(ch.facets.size()) != p.dim)
    throw InputError("vertex " + std::to_string(vi) + " lies on " +
                     std::to_string(ch.facets.size()) + " facets, expected " +
                     std::to_string(p.dim));
  std::vector<std::vector<long long>> normals;
  for (int f : ch.facets) normals.push_back(p.facets[f].normal);
  long long det = det_ll(normals);
  if (det != 1 && det != -1)
    throw InputError("polytope is not smooth at vertex " + std::to_string(vi) +
                     ": facet normals have determinant " + std::to_string(det));
  ch.dirs = dual_basis(normals);
  for (int j = 0; j < p.dim; ++j) {
    bool bounded = false;
    Rational limit(0);
    for (int f = 0; f < static_cast<int>(p.facets.size()); ++f) {
      Rational step = dot(p.facets[f].normal, RPoint(ch.dirs[j].begin(),
                                                     ch.dirs[j].end()));
      // moving along e_j changes facet f's slack at rate `step`
      if (step < Rational(0)) {
        Rational t = facet_slack(p, f, v) / -step;
        if (!bounded || t < limit) limit = t;
        bounded = true;
      }
    }
    if (!bounded)
      throw InputError("polytope is unbounded along an edge at vertex " +
                       std::to_string(vi));
    ch.ray.push_back(limit);
  }
  ch.ball = *std::min_element(ch.ray.begin(), ch.ray.end());
  return ch;
}

// chart coordinates of x at the vertex: the slacks of the active facets
RPoint chart_coords(const MomentPolytope& p, const ChartData& ch,
                    const RPoint& x) {
  RPoint w;
  for (int f : ch.facets) w.push_back(facet_slack(p, f, x));
  return w;
}

RPoint chart_point(const MomentPolytope& p, int vi, const ChartData& ch,
                   const RPoint& w) {
  RPoint y = p.vertices[vi];
  for (int j = 0; j < p.dim; ++j)
    for (int c = 0; c < p.dim; ++c) y[c] += w[j] * Rational(ch.dirs[j][c]);
  return y;
}

using Sym = std::pair<std::vector<std::vector<long long>>, RPoint>;

RPoint apply_sym(const Sym& s, const RPoint& x) {
  const int d = static_cast<int>(x.size());
  RPoint y(d, Rational(0));
  for (int r = 0; r < d; ++r) {
    for (int c = 0; c < d; ++c) y[r] += Rational(s.first[r][c]) * x[c];
    y[r] += s.second[r];
  }
  return y;
}

struct PolyContext {
  std::vector<ChartData> charts;
  std::vector<Sym> syms;
  // vertex indices ordered by coordinate; rule ties break toward the
  // lexicographically smallest witness, which is the vertex point itself
  std::vector<int> vertex_order;
};

bool lex_less(const RPoint& a, const RPoint& b) {
  for (size_t i = 0; i < a.size(); ++i) {
    if (a[i] < b[i]) return true;
    if (b[i] < a[i]) return false;
  }
  return false;
}

PolyContext build_context(const MomentPolytope& p) {
  PolyContext ctx;
  for (int v = 0; v < static_cast<int>(p.vertices.size()); ++v)
    ctx.charts.push_back(build_chart(p, v));
  ctx.syms = polytope_symmetries(p);
  ctx.vertex_order.resize(p.vertices.size());
  std::iota(ctx.vertex_order.begin(), ctx.vertex_order.end(), 0);
  std::sort(ctx.vertex_order.begin(), ctx.vertex_order.end(),
            [&](int a, int b) { return lex_less(p.vertices[a], p.vertices[b]); });
  return ctx;
}

std::optional<Certificate> certify_in_context(const MomentPolytope& p,
                                              const PolyContext& ctx,
                                              const RPoint& x);

// emit with the witness re-checked; a bug in the search must not survive
std::optional<Certificate> emit(const MomentPolytope& p, const RPoint& x,
                                Certificate c) {
  verify_certificate(p, x, c);
  return c;
}

std::optional<Certificate> certify_in_context(const MomentPolytope& p,
                                              const PolyContext& ctx,
                                              const RPoint& x) {
  const int d = p.dim;

  // boundary points of a compact toric image have sub-top-dimensional
  // isotropic fibers
  if (p.from_toric) {
    int best = -1;
    for (int f = 0; f < static_cast<int>(p.facets.size()); ++f) {
      if (facet_slack(p, f, x) != Rational(0)) continue;
      if (best < 0 ||
          std::make_pair(p.facets[f].normal, p.facets[f].offset) <
              std::make_pair(p.facets[best].normal, p.facets[best].offset))
        best = f;
    }
    if (best >= 0) {
      Certificate c;
      c.kind = Certificate::Kind::LowDimensionalFiber;
      c.facet = best;
      return emit(p, x, std::move(c));
    }
  }

  for (const Sym& s : ctx.syms) {
    RPoint y = apply_sym(s, x);
    if (y != x) {
      Certificate c;
      c.kind = Certificate::Kind::ReflectionSymmetry;
      c.matrix = s.first;
      c.shift = s.second;
      c.image = y;
      return emit(p, x, std::move(c));
    }
  }

  for (int v : ctx.vertex_order) {
    const ChartData& ch = ctx.charts[v];
    RPoint w = chart_coords(p, ch, x);
    Rational total(0);
    for (const Rational& c : w) total += c;
    if (!(total < ch.ball)) continue;
    for (int i = 0; i < d; ++i)
      for (int j = i + 1; j < d; ++j)
        if (w[i] != w[j]) {
          Certificate c;
          c.kind = Certificate::Kind::VertexChartInvolution;
          c.vertex = v;
          c.axis_i = i;
          c.axis_j = j;
          return emit(p, x, std::move(c));
        }
  }

  for (int v : ctx.vertex_order) {
    const ChartData& ch = ctx.charts[v];
    // the product box over the full edge lengths must sit inside the
    // polytope for the chart to be a polydisc over it
    bool fits = true;
    for (unsigned mask = 1; mask < (1u << d) && fits; ++mask) {
      RPoint w(d, Rational(0));
      for (int j = 0; j < d; ++j)
        if (mask & (1u << j)) w[j] = ch.ray[j];
      RPoint corner = chart_point(p, v, ch, w);
      if (!contains_point(p, corner)) fits = false;
    }
    if (!fits) continue;
    RPoint w = chart_coords(p, ch, x);
    bool inside = true;
    for (int j = 0; j < d; ++j)
      if (!(w[j] < ch.ray[j])) inside = false;
    if (!inside) continue;
    for (int j = 0; j < d; ++j) {
      if (Rational(2) * w[j] < ch.ray[j]) {
        Certificate c;
        c.kind = Certificate::Kind::PolydiscProjection;
        c.vertex = v;
        c.axis_j = j;
        c.ratio = w[j] / ch.ray[j];
        return emit(p, x, std::move(c));
      }
    }
  }

  if (!p.factors.empty()) {
    int off = 0;
    for (int f = 0; f < static_cast<int>(p.factors.size()); ++f) {
      const MomentPolytope& fac = p.factors[f];
      RPoint sub(x.begin() + off, x.begin() + off + fac.dim);
      std::optional<Certificate> in = certify_displaceable(fac, sub);
      if (in) {
        Certificate c;
        c.kind = Certificate::Kind::ProductFactor;
        c.factor = f;
        c.inner.push_back(std::move(*in));
        return emit(p, x, std::move(c));
      }
      off += fac.dim;
    }
  }

  return std::nullopt;
}

long long floor_ll(const Rational& r) {
  BigInt n = numerator(r), d = denominator(r);
  BigInt q = n / d;
  if (n < 0 && q * d != n) q -= 1;
  return static_cast<long long>(q);
}

long long ceil_ll(const Rational& r) { return -floor_ll(-r); }

}  // namespace

Rational facet_slack(const MomentPolytope& p, int f, const RPoint& x) {
  return dot(p.facets[f].normal, x) - p.facets[f].offset;
}

bool contains_point(const MomentPolytope& p, const RPoint& x) {
  if (static_cast<int>(x.size()) != p.dim)
    throw InputError("point dimension " + std::to_string(x.size()) +
                     " does not match the polytope dimension " +
                     std::to_string(p.dim));
  for (int f = 0; f < static_cast<int>(p.facets.size()); ++f)
    if (facet_slack(p, f, x) < Rational(0)) return false;
  return true;
}

void validate_polytope(const MomentPolytope& p) {
  if (p.dim < 1) throw InputError("polytope dimension must be positive");
  if (p.vertices.empty()) throw InputError("polytope has no vertices");
  if (p.facets.empty()) throw InputError("polytope has no facets");
  for (const auto& f : p.facets) {
    if (static_cast<int>(f.normal.size()) != p.dim)
      throw InputError("facet normal dimension mismatch");
    long long g = 0;
    for (long long c : f.normal) g = llgcd(g, c);
    if (g == 0) throw InputError("facet normal is zero");
    if (g != 1) throw InputError("facet normal is not primitive");
  }
  for (size_t i = 0; i < p.vertices.size(); ++i) {
    if (static_cast<int>(p.vertices[i].size()) != p.dim)
      throw InputError("vertex dimension mismatch");
    if (!contains_point(p, p.vertices[i]))
      throw InputError("vertex " + std::to_string(i) +
                       " violates a facet inequality");
    for (size_t j = i + 1; j < p.vertices.size(); ++j)
      if (p.vertices[i] == p.vertices[j])
        throw InputError("duplicate vertex " + std::to_string(j));
  }
  // every facet must be supported
  for (size_t f = 0; f < p.facets.size(); ++f) {
    bool touched = false;
    for (const auto& v : p.vertices)
      if (facet_slack(p, static_cast<int>(f), v) == Rational(0)) touched = true;
    if (!touched)
      throw InputError("facet " + std::to_string(f) +
                       " touches no vertex; the facet list is inconsistent");
  }
  // smoothness at every vertex, via the chart construction
  for (int v = 0; v < static_cast<int>(p.vertices.size()); ++v) build_chart(p, v);
  for (const auto& [name, pt] : p.landmarks) {
    if (static_cast<int>(pt.size()) != p.dim || !contains_point(p, pt))
      throw InputError("landmark \"" + name + "\" is outside the polytope");
  }
  if (!p.factors.empty()) {
    int total = 0;
    for (const auto& f : p.factors) total += f.dim;
    if (total != p.dim)
      throw InputError("product factor dimensions do not sum to the total");
  }
}

MomentPolytope cp_n(int n) {
  if (n < 1) throw InputError("cp_n needs n >= 1");
  MomentPolytope p;
  p.dim = n;
  p.from_toric = true;
  p.vertices.emplace_back(n, Rational(0));
  for (int i = 0; i < n; ++i) {
    RPoint v(n, Rational(0));
    v[i] = Rational(1);
    p.vertices.push_back(v);
  }
  for (int i = 0; i < n; ++i) {
    MomentPolytope::Facet f;
    f.normal.assign(n, 0);
    f.normal[i] = 1;
    f.offset = Rational(0);
    p.facets.push_back(f);
  }
  MomentPolytope::Facet top;
  top.normal.assign(n, -1);
  top.offset = Rational(-1);
  p.facets.push_back(top);
  p.landmarks["barycenter"] = RPoint(n, Rational(1, n + 1));
  validate_polytope(p);
  return p;
}

MomentPolytope blowup_cp2() {
  MomentPolytope p;
  p.dim = 2;
  p.from_toric = true;
  p.vertices = {
      {Rational(0), Rational(1, 3)},  // A
      {Rational(1, 3), Rational(0)},  // B
      {Rational(1), Rational(0)},     // C
      {Rational(0), Rational(1)},     // D
  };
  p.facets = {
      {{1, 0}, Rational(0)},      // x >= 0
      {{0, 1}, Rational(0)},      // y >= 0
      {{-1, -1}, Rational(-1)},   // x + y <= 1
      {{1, 1}, Rational(1, 3)},   // x + y >= 1/3, the exceptional facet
  };
  p.landmarks["A"] = {Rational(0), Rational(1, 3)};
  p.landmarks["B"] = {Rational(1, 3), Rational(0)};
  p.landmarks["C"] = {Rational(1), Rational(0)};
  p.landmarks["D"] = {Rational(0), Rational(1)};
  p.landmarks["P"] = {Rational(1, 6), Rational(1, 6)};
  p.landmarks["Q"] = {Rational(1, 3), Rational(1, 3)};
  p.landmarks["R"] = {Rational(1, 2), Rational(1, 2)};
  p.landmarks["E"] = {Rational(2, 3), Rational(1, 3)};
  validate_polytope(p);
  return p;
}

MomentPolytope product_polytope(const std::vector<MomentPolytope>& factors) {
  if (factors.empty()) throw InputError("product of no polytopes");
  MomentPolytope p;
  for (const auto& f : factors) p.dim += f.dim;
  p.from_toric = true;
  p.vertices.push_back({});
  for (const auto& f : factors) {
    std::vector<RPoint> next;
    for (const auto& partial : p.vertices)
      for (const auto& v : f.vertices) {
        RPoint w = partial;
        w.insert(w.end(), v.begin(), v.end());
        next.push_back(w);
      }
    p.vertices = std::move(next);
    p.from_toric = p.from_toric && f.from_toric;
  }
  int off = 0;
  for (const auto& f : factors) {
    for (const auto& facet : f.facets) {
      MomentPolytope::Facet g;
      g.normal.assign(p.dim, 0);
      for (int c = 0; c < f.dim; ++c) g.normal[off + c] = facet.normal[c];
      g.offset = facet.offset;
      p.facets.push_back(g);
    }
    off += f.dim;
  }
  // landmarks shared by every factor concatenate
  for (const auto& [name, pt] : factors[0].landmarks) {
    RPoint joined = pt;
    bool everywhere = true;
    for (size_t f = 1; f < factors.size(); ++f) {
      auto it = factors[f].landmarks.find(name);
      if (it == factors[f].landmarks.end()) {
        everywhere = false;
        break;
      }
      joined.insert(joined.end(), it->second.begin(), it->second.end());
    }
    if (everywhere) p.landmarks[name] = joined;
  }
  p.factors = factors;
  validate_polytope(p);
  return p;
}

MomentPolytope builtin_polytope(const std::string& name) {
  if (name == "cp1") return cp_n(1);
  if (name == "cp2") return cp_n(2);
  if (name == "cp3") return cp_n(3);
  if (name == "blowup-cp2") return blowup_cp2();
  throw InputError("unknown polytope name: \"" + name +
                   "\" (expected cp1, cp2, cp3 or blowup-cp2)");
}

MomentPolytope polytope_from_json(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw InputError(std::string("polytope JSON: ") + e.what());
  }
  if (!j.is_object() || !j.contains("vertices") || !j["vertices"].is_array())
    throw InputError("polytope JSON needs a \"vertices\" array");
  std::vector<RPoint> pts;
  for (const auto& row : j["vertices"]) {
    if (!row.is_array() || row.size() != 2)
      throw InputError("polytope vertices must be pairs; only "
                       "two-dimensional polytope files are supported");
    RPoint pt;
    for (const auto& cell : row) {
      if (!cell.is_string())
        throw InputError("polytope coordinates must be \"p/q\" strings");
      try {
        pt.push_back(parse_rational(cell.get<std::string>()));
      } catch (const std::invalid_argument& e) {
        throw InputError(std::string("polytope JSON: ") + e.what());
      }
    }
    pts.push_back(pt);
  }
  if (pts.size() < 3) throw InputError("a polytope file needs at least 3 vertices");

  // exact convex hull, counterclockwise
  std::sort(pts.begin(), pts.end(), lex_less);
  pts.erase(std::unique(pts.begin(), pts.end()), pts.end());
  auto cross = [](const RPoint& o, const RPoint& a, const RPoint& b) {
    return (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0]);
  };
  std::vector<RPoint> hull;
  for (int pass = 0; pass < 2; ++pass) {
    size_t start = hull.size();
    for (const auto& pt : pts) {
      while (hull.size() >= start + 2 &&
             !(cross(hull[hull.size() - 2], hull.back(), pt) > Rational(0)))
        hull.pop_back();
      hull.push_back(pt);
    }
    hull.pop_back();
    std::reverse(pts.begin(), pts.end());
  }
  if (hull.size() < 3)
    throw InputError("polytope vertices are collinear");

  MomentPolytope p;
  p.dim = 2;
  p.vertices = hull;
  for (size_t i = 0; i < hull.size(); ++i) {
    const RPoint& a = hull[i];
    const RPoint& b = hull[(i + 1) % hull.size()];
    // interior lies left of each directed hull edge
    Rational dx = b[0] - a[0], dy = b[1] - a[1];
    BigInt nx_num = -numerator(dy) * denominator(dx);
    BigInt ny_num = numerator(dx) * denominator(dy);
    BigInt g = gcd(nx_num, ny_num);
    if (g == 0) throw InputError("degenerate hull edge");
    if (g < 0) g = -g;
    MomentPolytope::Facet f;
    f.normal = {static_cast<long long>(nx_num / g),
                static_cast<long long>(ny_num / g)};
    f.offset = Rational(f.normal[0]) * a[0] + Rational(f.normal[1]) * a[1];
    p.facets.push_back(f);
  }
  if (j.contains("landmarks")) {
    if (!j["landmarks"].is_object())
      throw InputError("polytope landmarks must be an object");
    for (const auto& [name, row] : j["landmarks"].items()) {
      if (!row.is_array() || row.size() != 2)
        throw InputError("landmark \"" + name + "\" must be a pair");
      RPoint pt;
      for (const auto& cell : row) {
        if (!cell.is_string())
          throw InputError("landmark coordinates must be \"p/q\" strings");
        try {
          pt.push_back(parse_rational(cell.get<std::string>()));
        } catch (const std::invalid_argument& e) {
          throw InputError(std::string("polytope JSON: ") + e.what());
        }
      }
      p.landmarks[name] = pt;
    }
  }
  validate_polytope(p);
  return p;
}

std::string certificate_kind_name(Certificate::Kind k) {
  switch (k) {
    case Certificate::Kind::ReflectionSymmetry: return "ReflectionSymmetry";
    case Certificate::Kind::VertexChartInvolution: return "VertexChartInvolution";
    case Certificate::Kind::PolydiscProjection: return "PolydiscProjection";
    case Certificate::Kind::LowDimensionalFiber: return "LowDimensionalFiber";
    case Certificate::Kind::ProductFactor: return "ProductFactor";
    case Certificate::Kind::SubsetOfDisplaceable: return "SubsetOfDisplaceable";
  }
  return "?";
}

void verify_certificate(const MomentPolytope& p, const RPoint& x,
                        const Certificate& c) {
  if (!contains_point(p, x))
    throw InvariantError("certificate for a point outside the polytope");
  const int d = p.dim;
  switch (c.kind) {
    case Certificate::Kind::ReflectionSymmetry: {
      if (static_cast<int>(c.matrix.size()) != d)
        throw InvariantError("symmetry witness has the wrong dimension");
      std::vector<std::vector<long long>> m = c.matrix;
      long long det = det_ll(m);
      if (det != 1 && det != -1)
        throw InvariantError("symmetry matrix is not unimodular");
      Sym s{c.matrix, c.shift};
      std::set<RPoint, bool (*)(const RPoint&, const RPoint&)> vs(lex_less);
      for (const auto& v : p.vertices) vs.insert(v);
      for (const auto& v : p.vertices)
        if (!vs.count(apply_sym(s, v)))
          throw InvariantError("symmetry does not preserve the vertex set");
      RPoint y = apply_sym(s, x);
      if (y != c.image) throw InvariantError("symmetry image mismatch");
      if (y == x) throw InvariantError("symmetry fixes the point");
      break;
    }
    case Certificate::Kind::VertexChartInvolution: {
      if (c.vertex < 0 || c.vertex >= static_cast<int>(p.vertices.size()))
        throw InvariantError("involution vertex out of range");
      if (c.axis_i < 0 || c.axis_j < 0 || c.axis_i >= d || c.axis_j >= d ||
          c.axis_i == c.axis_j)
        throw InvariantError("involution axes are invalid");
      ChartData ch = build_chart(p, c.vertex);
      RPoint w = chart_coords(p, ch, x);
      Rational total(0);
      for (const Rational& wc : w) {
        if (wc < Rational(0))
          throw InvariantError("point is outside the vertex chart cone");
        total += wc;
      }
      if (!(total < ch.ball))
        throw InvariantError("point is outside the chart ball");
      if (w[c.axis_i] == w[c.axis_j])
        throw InvariantError("involution fixes the point: the swapped "
                             "coordinates are equal");
      std::swap(w[c.axis_i], w[c.axis_j]);
      if (!contains_point(p, chart_point(p, c.vertex, ch, w)))
        throw InvariantError("involution image left the polytope");
      break;
    }
    case Certificate::Kind::PolydiscProjection: {
      if (c.vertex < 0 || c.vertex >= static_cast<int>(p.vertices.size()))
        throw InvariantError("projection vertex out of range");
      if (c.axis_j < 0 || c.axis_j >= d)
        throw InvariantError("projection axis out of range");
      ChartData ch = build_chart(p, c.vertex);
      for (unsigned mask = 1; mask < (1u << d); ++mask) {
        RPoint w(d, Rational(0));
        for (int j = 0; j < d; ++j)
          if (mask & (1u << j)) w[j] = ch.ray[j];
        if (!contains_point(p, chart_point(p, c.vertex, ch, w)))
          throw InvariantError("polydisc box corner lies outside the polytope");
      }
      RPoint w = chart_coords(p, ch, x);
      for (int j = 0; j < d; ++j) {
        if (w[j] < Rational(0))
          throw InvariantError("point is outside the vertex chart cone");
        if (!(w[j] < ch.ray[j]))
          throw InvariantError("point is outside the open polydisc box");
      }
      if (c.ratio != w[c.axis_j] / ch.ray[c.axis_j])
        throw InvariantError("projection ratio mismatch");
      if (!(c.ratio < Rational(1, 2)))
        throw InvariantError("projection ratio must be below 1/2");
      break;
    }
    case Certificate::Kind::LowDimensionalFiber: {
      if (!p.from_toric)
        throw InvariantError("boundary rule used without the toric flag");
      if (c.facet < 0 || c.facet >= static_cast<int>(p.facets.size()))
        throw InvariantError("boundary facet out of range");
      if (facet_slack(p, c.facet, x) != Rational(0))
        throw InvariantError("point does not lie on the claimed facet");
      break;
    }
    case Certificate::Kind::ProductFactor: {
      if (p.factors.empty())
        throw InvariantError("factor certificate on a non-product polytope");
      if (c.factor < 0 || c.factor >= static_cast<int>(p.factors.size()))
        throw InvariantError("factor index out of range");
      if (c.inner.size() != 1)
        throw InvariantError("factor certificate needs exactly one inner "
                             "certificate");
      int off = 0;
      for (int f = 0; f < c.factor; ++f) off += p.factors[f].dim;
      RPoint sub(x.begin() + off, x.begin() + off + p.factors[c.factor].dim);
      verify_certificate(p.factors[c.factor], sub, c.inner[0]);
      break;
    }
    case Certificate::Kind::SubsetOfDisplaceable:
      throw InvariantError(
          "subset certificates carry no checkable witness in this engine");
  }
}

std::vector<Sym> polytope_symmetries(const MomentPolytope& p) {
  const int d = p.dim;
  std::vector<ChartData> charts;
  for (int v = 0; v < static_cast<int>(p.vertices.size()); ++v)
    charts.push_back(build_chart(p, v));

  std::set<RPoint, bool (*)(const RPoint&, const RPoint&)> vset(lex_less);
  for (const auto& v : p.vertices) vset.insert(v);

  // a lattice-affine self-map sends vertex 0 and its edge frame onto some
  // vertex and a permutation of its edge frame
  std::vector<std::vector<Rational>> e0inv(d, std::vector<Rational>(2 * d));
  {
    for (int r = 0; r < d; ++r) {
      for (int col = 0; col < d; ++col)
        e0inv[r][col] = Rational(charts[0].dirs[col][r]);
      e0inv[r][d + r] = Rational(1);
    }
    for (int col = 0; col < d; ++col) {
      int piv = -1;
      for (int r = col; r < d; ++r)
        if (e0inv[r][col] != Rational(0)) {
          piv = r;
          break;
        }
      if (piv < 0) throw InvariantError("vertex frame is singular");
      std::swap(e0inv[piv], e0inv[col]);
      Rational lead = e0inv[col][col];
      for (auto& vv : e0inv[col]) vv /= lead;
      for (int r = 0; r < d; ++r) {
        if (r == col) continue;
        Rational f = e0inv[r][col];
        if (f == Rational(0)) continue;
        for (int cc = 0; cc < 2 * d; ++cc) e0inv[r][cc] -= f * e0inv[col][cc];
      }
    }
  }

  std::set<Sym> found;
  std::vector<int> perm(d);
  for (size_t u = 0; u < p.vertices.size(); ++u) {
    std::iota(perm.begin(), perm.end(), 0);
    do {
      // M maps frame of vertex 0 to the permuted frame of vertex u
      std::vector<std::vector<long long>> mm(d, std::vector<long long>(d));
      bool integral = true;
      for (int r = 0; r < d && integral; ++r)
        for (int col = 0; col < d && integral; ++col) {
          Rational v(0);
          for (int t = 0; t < d; ++t)
            v += Rational(charts[u].dirs[perm[t]][r]) * e0inv[t][d + col];
          if (denominator(v) != 1) integral = false;
          else mm[r][col] = static_cast<long long>(numerator(v));
        }
      if (!integral) continue;
      long long det = det_ll(mm);
      if (det != 1 && det != -1) continue;
      RPoint shift = p.vertices[u];
      for (int r = 0; r < d; ++r)
        for (int col = 0; col < d; ++col)
          shift[r] -= Rational(mm[r][col]) * p.vertices[0][col];
      Sym s{mm, shift};
      bool keeps = true;
      for (const auto& v : p.vertices)
        if (!vset.count(apply_sym(s, v))) {
          keeps = false;
          break;
        }
      if (keeps) found.insert(s);
    } while (std::next_permutation(perm.begin(), perm.end()));
  }
  return std::vector<Sym>(found.begin(), found.end());
}

std::optional<Certificate> certify_displaceable(const MomentPolytope& p,
                                                const RPoint& x) {
  validate_polytope(p);
  if (!contains_point(p, x))
    throw InputError("the point lies outside the polytope");
  PolyContext ctx = build_context(p);
  return certify_in_context(p, ctx, x);
}

StemReport stem_search(const MomentPolytope& p, int denominator) {
  if (denominator < 2) throw InputError("grid denominator must be at least 2");
  validate_polytope(p);
  PolyContext ctx = build_context(p);

  StemReport rep;
  rep.grid_denominator = denominator;
  rep.note =
      "grid search at spacing 1/" + std::to_string(denominator) +
      "; \"uncertified\" means no certificate from this rule set, and points "
      "off the grid are not examined";

  std::vector<long long> lo(p.dim), hi(p.dim);
  for (int c = 0; c < p.dim; ++c) {
    Rational cmin = p.vertices[0][c], cmax = p.vertices[0][c];
    for (const auto& v : p.vertices) {
      if (v[c] < cmin) cmin = v[c];
      if (cmax < v[c]) cmax = v[c];
    }
    lo[c] = ceil_ll(cmin * denominator);
    hi[c] = floor_ll(cmax * denominator);
  }

  RPoint x(p.dim);
  std::function<void(int)> walk = [&](int c) {
    if (c == p.dim) {
      if (!contains_point(p, x)) return;
      ++rep.points_checked;
      std::optional<Certificate> cert = certify_in_context(p, ctx, x);
      if (cert) {
        ++rep.kind_counts[certificate_kind_name(cert->kind)];
        rep.certified.emplace_back(x, std::move(*cert));
      } else {
        rep.uncertified.push_back(x);
      }
      return;
    }
    for (long long k = lo[c]; k <= hi[c]; ++k) {
      x[c] = Rational(k, denominator);
      walk(c + 1);
    }
  };
  walk(0);

  Rational cell(1, denominator);
  for (const auto& [name, pt] : p.landmarks) {
    bool within = true;
    for (const RPoint& u : rep.uncertified)
      for (int c = 0; c < p.dim; ++c) {
        Rational diff = u[c] - pt[c];
        if (diff < Rational(0)) diff = -diff;
        if (cell < diff) within = false;
      }
    rep.stem_within_cell[name] = within;
  }
  return rep;
}

}  // namespace qs
