#include "tma/meshgen.hpp"

#include <gmpxx.h>

#include <cmath>
#include <deque>
#include <numeric>
#include <unordered_map>

namespace tma {

namespace {

struct P3 {
    double x, y, z;
};

int sign_exact(const P3& a, const P3& b, const P3& c, const P3& d)
{
    mpq_class m[3][3];
    const P3* r[3] = {&a, &b, &c};
    for (int i = 0; i < 3; ++i) {
        m[i][0] = mpq_class(r[i]->x) - mpq_class(d.x);
        m[i][1] = mpq_class(r[i]->y) - mpq_class(d.y);
        m[i][2] = mpq_class(r[i]->z) - mpq_class(d.z);
    }
    mpq_class det = m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1]) -
                    m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0]) +
                    m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0]);
    return sgn(det);
}

// > 0 when d lies strictly below the plane through a, b, c (a, b, c counter-clockwise in the plane).
int lifted_orient(const P3& a, const P3& b, const P3& c, const P3& d, double flat_tol)
{
    double m[3][3];
    const P3* r[3] = {&a, &b, &c};
    for (int i = 0; i < 3; ++i) {
        m[i][0] = r[i]->x - d.x;
        m[i][1] = r[i]->y - d.y;
        m[i][2] = r[i]->z - d.z;
    }
    double t0 = m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1]);
    double t1 = m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0]);
    double t2 = m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0]);
    double det = t0 - t1 + t2;
    double perm = std::abs(m[0][0]) * (std::abs(m[1][1] * m[2][2]) + std::abs(m[1][2] * m[2][1])) +
                  std::abs(m[0][1]) * (std::abs(m[1][0] * m[2][2]) + std::abs(m[1][2] * m[2][0])) +
                  std::abs(m[0][2]) * (std::abs(m[1][0] * m[2][1]) + std::abs(m[1][1] * m[2][0]));
    if (std::abs(det) > std::max(flat_tol, 1e-12) * perm) return det > 0 ? 1 : -1;
    return flat_tol > 0 ? 0 : sign_exact(a, b, c, d);
}

int orient2(const P3& a, const P3& b, const P3& c)
{
    double det = (b.x - a.x) * (c.y - a.y) - (b.y - a.y) * (c.x - a.x);
    double perm = std::abs((b.x - a.x) * (c.y - a.y)) + std::abs((b.y - a.y) * (c.x - a.x));
    if (std::abs(det) > 1e-13 * perm) return det > 0 ? 1 : -1;
    mpq_class d = (mpq_class(b.x) - a.x) * (mpq_class(c.y) - a.y) - (mpq_class(b.y) - a.y) * (mpq_class(c.x) - a.x);
    return sgn(d);
}

std::uint64_t key(int a, int b)
{
    return (static_cast<std::uint64_t>(static_cast<std::uint32_t>(a)) << 32) | static_cast<std::uint32_t>(b);
}

int third(const std::array<int, 3>& t, int a, int b)
{
    for (int v : t)
        if (v != a && v != b) return v;
    return -1;
}

cplx plane_gradient(const P3& a, const P3& b, const P3& c)
{
    double ux = b.x - a.x, uy = b.y - a.y, uz = b.z - a.z;
    double vx = c.x - a.x, vy = c.y - a.y, vz = c.z - a.z;
    double det = ux * vy - uy * vx;
    return cplx((uz * vy - uy * vz) / det, (ux * vz - uz * vx) / det);
}

struct Dsu {
    std::vector<int> p;
    explicit Dsu(int n) : p(n) { std::iota(p.begin(), p.end(), 0); }
    int find(int x)
    {
        while (p[x] != x) x = p[x] = p[p[x]];
        return x;
    }
    void unite(int a, int b) { p[find(a)] = find(b); }
};

} // namespace

HullInstance regular_subdivision(const std::vector<cplx>& pos, const std::vector<double>& z,
                                 std::vector<std::array<int, 3>> tris, double delta,
                                 const std::function<double(cplx)>& extend, double flat_tol)
{
    const int n = static_cast<int>(pos.size());
    if (n < 3 || z.size() != pos.size()) throw Error(Errc::DegenerateHull, "fewer than three samples");
    std::vector<P3> p(n);
    for (int i = 0; i < n; ++i) p[i] = {pos[i].real(), pos[i].imag(), z[i]};
    bool collinear = true;
    for (int i = 2; i < n && collinear; ++i) collinear = orient2(p[0], p[1], p[i]) == 0;
    if (collinear || tris.empty()) throw Error(Errc::DegenerateHull, "samples are collinear");

    std::unordered_map<std::uint64_t, int> owner; // directed edge a->b, counter-clockwise in its triangle
    auto attach = [&](int t) {
        auto& T = tris[t];
        for (int k = 0; k < 3; ++k) owner[key(T[k], T[(k + 1) % 3])] = t;
    };
    for (int t = 0; t < static_cast<int>(tris.size()); ++t) {
        auto& T = tris[t];
        int o = orient2(p[T[0]], p[T[1]], p[T[2]]);
        if (o == 0) throw Error(Errc::DegenerateHull, "flat starting triangle", "triangles", t);
        if (o < 0) std::swap(T[1], T[2]);
        attach(t);
    }

    std::deque<std::pair<int, int>> queue;
    for (auto& T : tris)
        for (int k = 0; k < 3; ++k) queue.emplace_back(T[k], T[(k + 1) % 3]);
    int flips = 0;
    const long long cap = 50LL * static_cast<long long>(tris.size()) * static_cast<long long>(tris.size()) + 1000;
    long long work = 0;
    while (!queue.empty()) {
        if (++work > cap) throw Error(Errc::NonConvexInput, "flip sequence does not terminate");
        auto [a, b] = queue.front();
        queue.pop_front();
        auto i1 = owner.find(key(a, b)), i2 = owner.find(key(b, a));
        if (i1 == owner.end() || i2 == owner.end()) continue;
        int t1 = i1->second, t2 = i2->second;
        int c = third(tris[t1], a, b), s = third(tris[t2], a, b);
        if (lifted_orient(p[a], p[b], p[c], p[s], flat_tol) <= 0) continue;
        if (orient2(p[a], p[s], p[c]) <= 0 || orient2(p[s], p[b], p[c]) <= 0) continue;
        for (int t : {t1, t2}) {
            auto& T = tris[t];
            for (int k = 0; k < 3; ++k) owner.erase(key(T[k], T[(k + 1) % 3]));
        }
        tris[t1] = {a, s, c};
        tris[t2] = {s, b, c};
        attach(t1);
        attach(t2);
        ++flips;
        queue.emplace_back(a, s);
        queue.emplace_back(s, b);
        queue.emplace_back(b, c);
        queue.emplace_back(c, a);
    }

    // classify every interior edge; a reflex edge left over means no convex flip existed
    const int nt = static_cast<int>(tris.size());
    Dsu cells(nt);
    std::vector<EdgeSpec> edges;
    std::vector<std::pair<int, int>> sides; // (left triangle, right triangle or -1)
    for (int t = 0; t < nt; ++t) {
        auto& T = tris[t];
        for (int k = 0; k < 3; ++k) {
            int a = T[k], b = T[(k + 1) % 3];
            auto it = owner.find(key(b, a));
            if (it == owner.end()) {
                edges.push_back({a, b, 0.0});
                sides.emplace_back(t, -1);
                continue;
            }
            if (a > b) continue;
            int u = it->second;
            int s = third(tris[u], a, b);
            int o = lifted_orient(p[a], p[b], p[T[(k + 2) % 3]], p[s], flat_tol);
            if (o > 0) throw Error(Errc::NonConvexInput, "samples are not in convex position", "vertices", s);
            if (o == 0) {
                cells.unite(t, u);
            } else {
                edges.push_back({a, b, 0.0});
                sides.emplace_back(t, u);
            }
        }
    }

    std::vector<cplx> tri_grad(nt);
    for (int t = 0; t < nt; ++t) tri_grad[t] = plane_gradient(p[tris[t][0]], p[tris[t][1]], p[tris[t][2]]);
    std::vector<int> touched(n, 0);
    for (std::size_t e = 0; e < edges.size(); ++e) {
        ++touched[edges[e].u];
        ++touched[edges[e].v];
        auto [l, r] = sides[e];
        if (r < 0) continue;
        cplx d = pos[edges[e].v] - pos[edges[e].u];
        double c = ((tri_grad[l] - tri_grad[r]) / (cplx(0, 1) * d)).real();
        if (!(c > 0)) throw Error(Errc::NonConvexInput, "gradient jump is not positive", "edges", static_cast<int>(e));
        edges[e].c = c;
    }
    for (int v = 0; v < n; ++v)
        if (touched[v] == 0)
            throw Error(Errc::NonConvexInput, "sample lies inside a flat cell and is not a hull vertex", "vertices", v);

    // boundary edges: jump to the plane through the edge and the mirrored opposite vertex
    for (std::size_t e = 0; e < edges.size(); ++e) {
        if (sides[e].second >= 0) continue;
        const auto& T = tris[sides[e].first];
        int a = edges[e].u, b = edges[e].v, c = third(T, a, b);
        double w = 1.0;
        if (extend) {
            cplx d = pos[b] - pos[a];
            cplx m = pos[a] + d * std::conj((pos[c] - pos[a]) / d);
            P3 q{m.real(), m.imag(), extend(m)};
            cplx gout = plane_gradient(p[a], p[b], q);
            w = ((tri_grad[sides[e].first] - gout) / (cplx(0, 1) * d)).real();
            if (!(w > 0)) throw Error(Errc::NonConvexInput, "gradient jump at the boundary is not positive", "edges", static_cast<int>(e));
        }
        edges[e].c = w;
    }

    auto tf = faces_from_positions(n, edges, pos);
    HullInstance out;
    out.flips = flips;
    out.Phi = z;
    Instance& inst = out.inst;
    inst.map = build_planar_map(n, edges, tf.faces, tf.outer);
    inst.delta = delta;
    inst.family = "hull";
    for (int v = 0; v < n; ++v)
        if (inst.map.boundary[v]) inst.boundary.emplace_back(v, pos[v]);
    inst.emb.H = pos;
    inst.emb.fixed = inst.map.boundary;
    inst.emb.residual = harmonicity_residual(inst.map, pos, inst.emb.fixed);
    out.cell_grad.assign(inst.map.faces.size(), cplx(0));
    for (std::size_t f = 0; f < inst.map.faces.size(); ++f) {
        if (static_cast<int>(f) == inst.map.outer_face) continue;
        int h = inst.map.face_edges[f][0];
        int a = inst.map.origin(h), b = inst.map.target(h);
        auto it = owner.find(key(a, b));
        if (it == owner.end()) throw Error(Errc::DegenerateHull, "face without a supporting triangle", "faces", static_cast<int>(f));
        out.cell_grad[f] = tri_grad[cells.find(it->second)];
    }
    return out;
}

HullInstance from_convex_potential(const ConvexPotential& phi, double delta, const Box& U)
{
    if (!(delta > 0)) throw Error(Errc::MalformedInput, "mesh scale must be positive");
    int i0 = static_cast<int>(std::ceil(U.x0 / delta - 1e-9)), i1 = static_cast<int>(std::floor(U.x1 / delta + 1e-9));
    int j0 = static_cast<int>(std::ceil(U.y0 / delta - 1e-9)), j1 = static_cast<int>(std::floor(U.y1 / delta + 1e-9));
    int nx = i1 - i0 + 1, ny = j1 - j0 + 1;
    if (nx < 1 || ny < 1 || nx * ny < 3) throw Error(Errc::DegenerateHull, "fewer than three samples in the region");
    if (nx < 2 || ny < 2) throw Error(Errc::DegenerateHull, "samples are collinear");
    std::vector<cplx> pos(static_cast<std::size_t>(nx) * ny);
    std::vector<double> z(pos.size());
    auto id = [&](int i, int j) { return (j - j0) * nx + (i - i0); };
    for (int j = j0; j <= j1; ++j)
        for (int i = i0; i <= i1; ++i) {
            pos[id(i, j)] = cplx(delta * i, delta * j);
            z[id(i, j)] = phi.phi(pos[id(i, j)]);
        }
    for (int j = j0; j <= j1; ++j)
        for (int i = i0 + 1; i < i1; ++i)
            if (z[id(i - 1, j)] + z[id(i + 1, j)] - 2 * z[id(i, j)] < 0)
                throw Error(Errc::NonConvexInput, "negative second difference along a lattice row", "vertices", id(i, j));
    for (int j = j0 + 1; j < j1; ++j)
        for (int i = i0; i <= i1; ++i)
            if (z[id(i, j - 1)] + z[id(i, j + 1)] - 2 * z[id(i, j)] < 0)
                throw Error(Errc::NonConvexInput, "negative second difference along a lattice column", "vertices", id(i, j));
    std::vector<std::array<int, 3>> tris;
    for (int j = j0; j < j1; ++j)
        for (int i = i0; i < i1; ++i) {
            tris.push_back({id(i, j), id(i + 1, j), id(i + 1, j + 1)});
            tris.push_back({id(i, j), id(i + 1, j + 1), id(i, j + 1)});
        }
    // sampled values carry roundoff, so cells flat in exact arithmetic may crease slightly
    return regular_subdivision(pos, z, std::move(tris), delta, [&](cplx w) { return phi.phi(w); }, kSampleFlatTol);
}

} // namespace tma
