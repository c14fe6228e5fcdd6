#include "tma/planar_map.hpp"

#include <cmath>
#include <algorithm>
#include <unordered_map>

namespace tma {

namespace {

std::uint64_t key(int a, int b)
{
    return (static_cast<std::uint64_t>(static_cast<std::uint32_t>(a)) << 32) |
           static_cast<std::uint32_t>(b);
}

} // namespace

std::vector<int> PlanarMap::out_half_edges(int v) const
{
    return std::vector<int>(out_he.begin() + out_ptr[v], out_he.begin() + out_ptr[v + 1]);
}

std::vector<int> PlanarMap::boundary_cycle() const
{
    const auto& fe = face_edges[outer_face];
    std::vector<int> out;
    for (auto it = fe.rbegin(); it != fe.rend(); ++it)
        out.push_back(target(*it));
    return out;
}

PlanarMap build_planar_map(int n_vertices, std::vector<EdgeSpec> edges,
                           const std::vector<std::vector<int>>& faces, int outer_face)
{
    if (n_vertices <= 0)
        throw Error(Errc::MalformedInput, "map has no vertices");
    if (outer_face < 0 || outer_face >= static_cast<int>(faces.size()))
        throw Error(Errc::MalformedInput, "outer_face index out of range", "outer_face", 0);

    PlanarMap m;
    m.n_vertices = n_vertices;
    m.outer_face = outer_face;
    const int ne = static_cast<int>(edges.size());

    std::unordered_map<std::uint64_t, int> half;
    half.reserve(2 * edges.size());
    for (int e = 0; e < ne; ++e) {
        const auto& ed = edges[e];
        if (ed.u < 0 || ed.u >= n_vertices || ed.v < 0 || ed.v >= n_vertices)
            throw Error(Errc::MalformedInput, "edge " + std::to_string(e) + " references unknown vertex", "edge", e);
        if (ed.u == ed.v)
            throw Error(Errc::NonPlanarInput, "edge " + std::to_string(e) + " is a loop", "edge", e);
        if (!(ed.c > 0) || !std::isfinite(ed.c))
            throw Error(Errc::NonPositiveConductance, "edge " + std::to_string(e) + " has conductance " + std::to_string(ed.c), "edge", e);
        if (half.count(key(ed.u, ed.v)) || half.count(key(ed.v, ed.u)))
            throw Error(Errc::MalformedInput, "edge " + std::to_string(e) + " duplicates an earlier edge", "edge", e);
        half[key(ed.u, ed.v)] = 2 * e;
        half[key(ed.v, ed.u)] = 2 * e + 1;
    }
    m.edges = std::move(edges);

    const int nh = 2 * ne;
    m.next.assign(nh, -1);
    m.prev.assign(nh, -1);
    m.face_of.assign(nh, -1);
    m.faces.resize(faces.size());
    m.face_edges.resize(faces.size());

    auto lookup = [&](const std::vector<int>& cyc, std::vector<int>& out) -> int {
        out.clear();
        const std::size_t k = cyc.size();
        for (std::size_t i = 0; i < k; ++i) {
            int a = cyc[i], b = cyc[(i + 1) % k];
            auto it = half.find(key(a, b));
            if (it == half.end()) return 1;
            if (m.face_of[it->second] != -1) return 2;
            for (int h : out)
                if (h == it->second) return 2;
            out.push_back(it->second);
        }
        return 0;
    };
    auto assign = [&](int f, const std::vector<int>& cyc, const std::vector<int>& hs) {
        m.faces[f] = cyc;
        m.face_edges[f] = hs;
        const std::size_t k = hs.size();
        for (std::size_t i = 0; i < k; ++i) {
            m.face_of[hs[i]] = f;
            m.next[hs[i]] = hs[(i + 1) % k];
            m.prev[hs[(i + 1) % k]] = hs[i];
        }
    };

    std::vector<int> hs;
    for (int f = 0; f < static_cast<int>(faces.size()); ++f) {
        if (f == outer_face) continue;
        const auto& cyc = faces[f];
        if (cyc.size() < 2)
            throw Error(Errc::MalformedInput, "face " + std::to_string(f) + " has fewer than two vertices", "face", f);
        int r = lookup(cyc, hs);
        if (r == 1)
            throw Error(Errc::DanglingHalfEdge, "face " + std::to_string(f) + " steps along a pair that is not an edge", "face", f);
        if (r == 2)
            throw Error(Errc::DanglingHalfEdge, "face " + std::to_string(f) + " reuses a half-edge", "face", f);
        assign(f, cyc, hs);
    }
    {
        const auto& cyc = faces[outer_face];
        if (cyc.size() < 2)
            throw Error(Errc::MalformedInput, "outer face has fewer than two vertices", "face", outer_face);
        int r = lookup(cyc, hs);
        std::vector<int> rev(cyc.rbegin(), cyc.rend());
        if (r != 0) {
            int r2 = lookup(rev, hs);
            if (r2 != 0)
                throw Error(Errc::DanglingHalfEdge, "outer face is inconsistent with the inner faces", "face", outer_face);
            assign(outer_face, rev, hs);
        } else {
            assign(outer_face, cyc, hs);
        }
    }
    for (int h = 0; h < nh; ++h)
        if (m.face_of[h] == -1)
            throw Error(Errc::DanglingHalfEdge, "a side of edge " + std::to_string(h / 2) + " lies on no face", "edge", h / 2);

    m.vertex_out.assign(n_vertices, -1);
    std::vector<int> deg(n_vertices, 0);
    for (int h = 0; h < nh; ++h) {
        int o = m.origin(h);
        ++deg[o];
        if (m.vertex_out[o] == -1) m.vertex_out[o] = h;
    }
    for (int v = 0; v < n_vertices; ++v) {
        if (deg[v] == 0)
            throw Error(Errc::MalformedInput, "vertex " + std::to_string(v) + " is isolated", "vertex", v);
        int steps = 0, h = m.vertex_out[v];
        do {
            ++steps;
            h = m.ccw_next(h);
        } while (h != m.vertex_out[v] && steps <= deg[v]);
        if (steps != deg[v])
            throw Error(Errc::NonPlanarInput, "rotation at vertex " + std::to_string(v) + " is not a single cycle", "vertex", v);
    }
    m.out_ptr.assign(n_vertices + 1, 0);
    for (int v = 0; v < n_vertices; ++v) m.out_ptr[v + 1] = m.out_ptr[v] + deg[v];
    m.out_he.reserve(nh);
    for (int v = 0; v < n_vertices; ++v) {
        int h = m.vertex_out[v];
        do {
            m.out_he.push_back(h);
            h = m.ccw_next(h);
        } while (h != m.vertex_out[v]);
    }
    const int chi = n_vertices - ne + static_cast<int>(faces.size());
    if (chi != 2)
        throw Error(Errc::NonPlanarInput, "Euler characteristic is " + std::to_string(chi));

    m.boundary.assign(n_vertices, 0);
    for (int v : m.faces[outer_face]) m.boundary[v] = 1;
    return m;
}

DualMap dual_map(const PlanarMap& m)
{
    DualMap d;
    const int nf = m.n_faces();
    d.face_dual.assign(nf, -1);
    for (int f = 0; f < nf; ++f) {
        if (f == m.outer_face) continue;
        d.face_dual[f] = d.n_inner++;
        d.inner_face.push_back(f);
    }
    const auto& outer = m.face_edges[m.outer_face];
    d.n_leaves = static_cast<int>(outer.size());
    d.half_edge_dual.assign(m.n_half_edges(), -1);
    for (int h = 0; h < m.n_half_edges(); ++h)
        if (!m.is_outer(h)) d.half_edge_dual[h] = d.face_dual[m.face_of[h]];
    for (int k = 0; k < d.n_leaves; ++k) {
        int h = outer[(d.n_leaves - k) % d.n_leaves];
        d.leaf_half_edge.push_back(h);
        d.half_edge_dual[h] = d.n_inner + k;
    }
    d.right.resize(m.n_edges());
    d.left.resize(m.n_edges());
    d.adj_edges.assign(d.n_vertices(), {});
    for (int e = 0; e < m.n_edges(); ++e) {
        d.left[e] = d.half_edge_dual[2 * e];
        d.right[e] = d.half_edge_dual[2 * e + 1];
        d.adj_edges[d.left[e]].push_back(e);
        d.adj_edges[d.right[e]].push_back(e);
    }
    return d;
}

CornerGraph corner_graph(const PlanarMap& m, const DualMap& d)
{
    CornerGraph g;
    const int nh = m.n_half_edges();
    g.inner_corner.assign(nh, -1);
    g.leaf_origin_corner.assign(nh, -1);
    g.leaf_target_corner.assign(nh, -1);
    auto add = [&](int v, int dv) {
        g.corner_vertex.push_back(v);
        g.corner_dual.push_back(dv);
        return g.n_corners() - 1;
    };
    for (int h = 0; h < nh; ++h) {
        if (m.is_outer(h)) continue;
        g.inner_corner[h] = add(m.origin(h), d.half_edge_dual[h]);
    }
    for (int k = 0; k < d.n_leaves; ++k) {
        int h = d.leaf_half_edge[k];
        g.leaf_origin_corner[h] = add(m.origin(h), d.n_inner + k);
        g.leaf_target_corner[h] = add(m.target(h), d.n_inner + k);
    }

    auto corner_at_origin = [&](int h) {
        return m.is_outer(h) ? g.leaf_origin_corner[h] : g.inner_corner[h];
    };
    auto corner_at_target = [&](int h) {
        return m.is_outer(h) ? g.leaf_target_corner[h] : g.inner_corner[m.next[h]];
    };
    g.white.resize(m.n_edges());
    for (int e = 0; e < m.n_edges(); ++e) {
        int h = 2 * e, t = 2 * e + 1;
        // (u,d1) (v,d1) (v,d2) (u,d2) with d1 right of u->v and d2 left
        g.white[e] = {corner_at_target(t), corner_at_origin(t), corner_at_target(h), corner_at_origin(h)};
        for (int i = 0; i < 4; ++i)
            g.edges.push_back({g.white[e][i], g.white[e][(i + 1) % 4]});
    }

    g.black.reserve(m.n_vertices + d.n_inner);
    for (int v = 0; v < m.n_vertices; ++v) {
        BlackFace b;
        b.id = v;
        auto outs = m.out_half_edges(v);
        std::size_t start = 0;
        if (m.boundary[v]) {
            b.open = true;
            for (std::size_t i = 0; i < outs.size(); ++i)
                if (m.is_outer(PlanarMap::twin(outs[i]))) {
                    start = i;
                    break;
                }
        }
        for (std::size_t i = 0; i < outs.size(); ++i) {
            int h = outs[(start + i) % outs.size()];
            if (m.is_outer(PlanarMap::twin(h))) b.corners.push_back(g.leaf_target_corner[PlanarMap::twin(h)]);
            b.corners.push_back(m.is_outer(h) ? g.leaf_origin_corner[h] : g.inner_corner[h]);
        }
        g.black.push_back(std::move(b));
    }
    for (int k = 0; k < d.n_inner; ++k) {
        BlackFace b;
        b.dual = true;
        b.id = k;
        for (int h : m.face_edges[d.inner_face[k]]) b.corners.push_back(g.inner_corner[h]);
        g.black.push_back(std::move(b));
    }
    return g;
}

} // namespace tma

namespace tma {

TracedFaces faces_from_positions(int n_vertices, const std::vector<EdgeSpec>& edges, const std::vector<cplx>& pos)
{
    const int nh = 2 * static_cast<int>(edges.size());
    auto org = [&](int h) { return (h & 1) ? edges[h >> 1].v : edges[h >> 1].u; };
    auto tgt = [&](int h) { return (h & 1) ? edges[h >> 1].u : edges[h >> 1].v; };
    std::vector<std::vector<int>> out(n_vertices);
    for (int h = 0; h < nh; ++h) out[org(h)].push_back(h);
    // counterclockwise order of outgoing half-edges
    std::vector<int> rank(nh, 0);
    for (int v = 0; v < n_vertices; ++v) {
        auto& o = out[v];
        std::sort(o.begin(), o.end(), [&](int a, int b) {
            return std::arg(pos[tgt(a)] - pos[v]) < std::arg(pos[tgt(b)] - pos[v]);
        });
        for (std::size_t k = 0; k < o.size(); ++k) rank[o[k]] = static_cast<int>(k);
    }
    // next(a->b) = b->c with c the neighbour of b just clockwise of a
    auto next = [&](int h) {
        int t = h ^ 1;
        const auto& o = out[org(t)];
        int k = rank[t];
        return o[(k + o.size() - 1) % o.size()];
    };
    TracedFaces tf;
    std::vector<char> used(nh, 0);
    for (int h0 = 0; h0 < nh; ++h0) {
        if (used[h0]) continue;
        std::vector<int> cyc;
        std::vector<cplx> poly;
        int h = h0;
        do {
            used[h] = 1;
            cyc.push_back(org(h));
            poly.push_back(pos[org(h)]);
            h = next(h);
        } while (h != h0);
        if (polygon_area(poly) < 0) {
            if (tf.outer >= 0) throw Error(Errc::NonPlanarInput, "drawing has more than one negatively oriented face");
            tf.outer = static_cast<int>(tf.faces.size());
        }
        tf.faces.push_back(std::move(cyc));
    }
    if (tf.outer < 0) throw Error(Errc::NonPlanarInput, "drawing has no outer face");
    return tf;
}

} // namespace tma
