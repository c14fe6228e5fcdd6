#pragma once

#include "tma/domain.hpp"
#include "tma/embedding.hpp"

#include <functional>
#include <limits>

namespace tma {

// Per-vertex (or per-dual-vertex) values; NaN marks "no value".
using Field = std::vector<double>;
inline constexpr double kNoValue = std::numeric_limits<double>::quiet_NaN();
inline bool valued(const Field& f, int i) { return f[i] == f[i]; }

struct DomainSlice {
    std::vector<char> interior, boundary;   // per primal vertex
    std::vector<int> interior_list, boundary_list;
    bool pruned = false;                    // smaller interior components were dropped
    bool closure(int v) const { return interior[v] || boundary[v]; }
};

DomainSlice slice_domain(const PlanarMap& m, const std::vector<cplx>& H, const Omega& omega);

// mu(v) = sum c |H(v') - H(v)|^2
double vertex_measure(const PlanarMap& m, const std::vector<cplx>& H, int v);

// mu(v)^-1 sum c (f(v) - f(v'))
double apply_laplacian(const PlanarMap& m, const std::vector<cplx>& H, const Field& f, int v);

enum class BoundaryMode {
    Extend, // g evaluated at the boundary vertex itself
    Trace   // g evaluated at the point of the boundary curve on the ray from the centre
};

Field boundary_data(const PlanarMap& m, const std::vector<cplx>& H, const DomainSlice& s, const Omega& omega,
                    const std::function<double(cplx)>& g, BoundaryMode mode);

struct DirichletResult {
    Field f;                 // valued on the closure of the slice
    double residual = 0;     // max |sum c (f(v') - f(v))| / sum c |f(v') - f(v)| over the interior
    int iterations = 0;
};

struct SolveOptions {
    double tol = 1e-14;
    bool parallel = true;
};

DirichletResult solve_dirichlet(const PlanarMap& m, const DomainSlice& s, const Field& g, const SolveOptions& opt = {});

// Zero on the slice boundary, sum c (G(v0) - G(v')) = 1 at v0, harmonic elsewhere.
DirichletResult green(const PlanarMap& m, const DomainSlice& s, int v0, const SolveOptions& opt = {});

struct Monodromy {
    int vertex = -1;         // primal vertex encircled by the dual cycle
    double value = 0;
};

struct ConjugateField {
    Field values;            // per dual vertex
    std::vector<char> edge_used;
    int root = -1;
    double closure_defect = 0;    // max co-tree defect relative to max |increment|
    std::vector<Monodromy> monodromy;  // cycles around vertices with nonzero flux
    int holes = 0;           // independent dual cycles not around a single vertex
};

// Increments f*(left) - f*(right) = c (f(v) - f(u)) on edges with an interior
// endpoint and both endpoints valued.
ConjugateField harmonic_conjugate(const PlanarMap& m, const DualMap& d, const DomainSlice& s, const Field& f,
                                  double monodromy_tol = 1e-9);

std::vector<char> edges_within(const PlanarMap& m, const std::vector<cplx>& H, const std::function<bool(cplx)>& in);
double dirichlet_energy(const PlanarMap& m, const Field& f, const std::vector<char>& edge_mask);
double dual_energy(const PlanarMap& m, const DualMap& d, const Field& fs, const std::vector<char>& edge_mask);

struct Caccioppoli {
    double lhs = 0, rhs = 0, ratio = 0;
};

inline constexpr double kCaccioppoliC = 4.0;

Caccioppoli caccioppoli_check(const PlanarMap& m, const std::vector<cplx>& H, const DomainSlice& s,
                              const Omega& omega, const Field& f, cplx p, double r);

struct THolo {
    std::vector<cplx> F;          // per black face of the corner graph
    std::vector<char> black_valued;
    std::vector<cplx> F_leaf;     // per leaf
    std::vector<std::array<cplx, 2>> Fo;  // per white face: values on the two split triangles
    std::vector<char> diagonal;   // 0: (u,d1)-(v,d2), 1: (v,d1)-(u,d2)
    std::vector<char> white_valued;
    std::vector<cplx> edge_coef;  // per corner edge: 2 F(b) of its black face, NaN when unvalued
    double white_defect = 0;      // max relative loop integral around white faces
};

THolo t_white_holo(const PlanarMap& m, const DualMap& d, const CornerGraph& cg, const TSurface& ts,
                   const std::vector<cplx>& H, const Field& f, const Field& fs);

struct Primitive {
    std::vector<cplx> I;          // per corner; NaN when unreached
    double loop_defect = 0;       // max fundamental-cycle integral / (cycle T-length * max |F|)
    int loops = 0;
};

Primitive integrate_closed_form(const CornerGraph& cg, const TSurface& ts, const THolo& F);

struct Triangle {
    std::array<int, 3> v;
    int face = -1;
};

struct GradientField {
    std::vector<Triangle> tris;
    std::vector<cplx> grad;          // d/dw of the linear interpolant
    std::vector<char> interior;      // all vertices in the slice interior
    std::vector<char> touches_boundary;
    double max_interior = 0, max_boundary = 0;
    int witness_interior = -1, witness_boundary = -1;
    bool max_principle = true;
};

// Faces with all vertices in the slice closure, fan-triangulated with the
// apex maximising the smallest inradius.
GradientField gradient_field(const PlanarMap& m, const std::vector<cplx>& H, const DomainSlice& s, const Field& f);

// max - min of f over valued vertices with |H(v) - p| <= r
double oscillation(const std::vector<cplx>& H, const Field& f, cplx p, double r);

struct HolderFit {
    std::vector<double> radii, osc;
    double beta = 0;
};

// Least-squares slope of log osc against log r over radii R, R/2, ..., R/2^(levels-1).
HolderFit holder_exponent(const std::vector<cplx>& H, const Field& f, cplx p, double R, int levels);

} // namespace tma
