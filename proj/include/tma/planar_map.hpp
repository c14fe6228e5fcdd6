#pragma once

#include "tma/common.hpp"

#include <array>
#include <vector>

namespace tma {

struct EdgeSpec {
    int u = 0, v = 0;
    double c = 1.0;
};

// Half-edge map. Half-edge 2e runs u->v of edge e, 2e+1 runs v->u.
// The face of a half-edge lies on its left.
struct PlanarMap {
    int n_vertices = 0;
    std::vector<EdgeSpec> edges;
    std::vector<int> next, prev, face_of;
    std::vector<std::vector<int>> faces;         // vertex cycles
    std::vector<std::vector<int>> face_edges;    // half-edge cycles
    int outer_face = 0;
    std::vector<char> boundary;
    std::vector<int> vertex_out;                 // some outgoing half-edge per vertex
    std::vector<int> out_ptr, out_he;            // outgoing half-edges, counterclockwise

    int n_edges() const { return static_cast<int>(edges.size()); }
    int n_faces() const { return static_cast<int>(faces.size()); }
    int n_half_edges() const { return 2 * n_edges(); }
    static int twin(int h) { return h ^ 1; }
    static int edge_of(int h) { return h >> 1; }
    int origin(int h) const { return (h & 1) ? edges[h >> 1].v : edges[h >> 1].u; }
    int target(int h) const { return (h & 1) ? edges[h >> 1].u : edges[h >> 1].v; }
    double conductance(int h) const { return edges[h >> 1].c; }
    // Next outgoing half-edge counterclockwise around origin(h).
    int ccw_next(int h) const { return twin(prev[h]); }
    int cw_next(int h) const { return next[twin(h)]; }
    std::vector<int> out_half_edges(int v) const;
    int degree(int v) const { return out_ptr[v + 1] - out_ptr[v]; }
    bool is_outer(int h) const { return face_of[h] == outer_face; }
    // Boundary vertices in the order met walking the outer face backwards (counterclockwise).
    std::vector<int> boundary_cycle() const;
};

PlanarMap build_planar_map(int n_vertices, std::vector<EdgeSpec> edges,
                           const std::vector<std::vector<int>>& faces, int outer_face);

struct DualMap {
    int n_inner = 0;
    int n_leaves = 0;
    std::vector<int> inner_face;      // dual id -> face id
    std::vector<int> face_dual;       // face id -> dual id, -1 for the outer face
    std::vector<int> leaf_half_edge;  // leaf k -> outer half-edge
    std::vector<int> half_edge_dual;  // dual vertex on the left of h
    std::vector<int> right, left;     // per edge u->v: v1* (right) and v2* (left)
    std::vector<std::vector<int>> adj_edges; // dual vertex -> incident primal edge ids

    int n_vertices() const { return n_inner + n_leaves; }
    bool is_leaf(int d) const { return d >= n_inner; }
    // The dual edge of primal edge e has index e; the map is its own inverse.
    static int dual_edge(int e) { return e; }
    static int primal_edge(int e) { return e; }
};

DualMap dual_map(const PlanarMap& m);

struct BlackFace {
    bool dual = false;   // false: primal vertex, true: inner dual vertex
    int id = 0;
    bool open = false;   // boundary vertex chains
    std::vector<int> corners;
};

struct CornerGraph {
    std::vector<int> corner_vertex, corner_dual;
    std::vector<int> inner_corner;        // per half-edge of an inner face: (origin, face)
    std::vector<int> leaf_origin_corner;  // per outer half-edge h: (origin h, leaf h)
    std::vector<int> leaf_target_corner;  // per outer half-edge h: (target h, leaf h)
    std::vector<std::array<int, 4>> white; // per edge: (u,d1) (v,d1) (v,d2) (u,d2)
    std::vector<BlackFace> black;         // primal vertices, then inner dual vertices
    std::vector<std::array<int, 2>> edges;

    int n_corners() const { return static_cast<int>(corner_vertex.size()); }
};

CornerGraph corner_graph(const PlanarMap& m, const DualMap& d);

} // namespace tma

namespace tma {

struct TracedFaces {
    std::vector<std::vector<int>> faces;
    int outer = -1;
};

// Face cycles of a straight-line drawing, read off the angular order of
// neighbours. The outer face is the unique cycle with negative area.
TracedFaces faces_from_positions(int n_vertices, const std::vector<EdgeSpec>& edges,
                                 const std::vector<cplx>& pos);

} // namespace tma
