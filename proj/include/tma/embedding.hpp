#pragma once

#include "tma/planar_map.hpp"
#include "tma/sparse.hpp"

#include <utility>

namespace tma {

struct HarmonicEmbedding {
    std::vector<cplx> H;
    std::vector<char> fixed;
    double residual = 0;          // max per-vertex relative harmonicity residual
    double solver_residual = 0;   // relative residual of the linear solve
    int iterations = 0;
};

struct TutteOptions {
    double tol = 1e-15;           // CG target; 1e-10 is the acceptance floor
    bool parallel = true;
};

HarmonicEmbedding solve_tutte(const PlanarMap& m, const std::vector<std::pair<int, cplx>>& boundary,
                              const TutteOptions& opt = {});

// max over non-fixed v of |sum c (H(v')-H(v))| / sum c |H(v')-H(v)|
double harmonicity_residual(const PlanarMap& m, const std::vector<cplx>& H, const std::vector<char>& fixed);

struct DualEmbedding {
    std::vector<cplx> Hs;         // per dual vertex
    double closure_defect = 0;    // max co-tree defect
};

DualEmbedding dual_embedding(const PlanarMap& m, const DualMap& d, const HarmonicEmbedding& e);

struct PiecewisePotential {
    std::vector<double> Phi;       // per primal vertex
    std::vector<cplx> grad;        // per inner dual vertex
    std::vector<double> offset;    // Phi(w) = Re(conj(grad) w) + offset on the face
    double closure_defect = 0;     // max co-tree defect
    double expression_gap = 0;     // max gap between the left- and right-face increments
    double face_fit_defect = 0;    // max deviation of Phi from the face affine maps
};

PiecewisePotential potential(const PlanarMap& m, const DualMap& d, const HarmonicEmbedding& e,
                             const DualEmbedding& de);

// Largest deviation of f from its least-squares affine fit over the points.
double affine_fit_defect(const std::vector<cplx>& pts, const std::vector<double>& f);

// Uniform bucket grid over polygons. Queries return the smallest polygon
// index containing the point, counting points within tol of the boundary.
class PolygonLocator {
public:
    PolygonLocator() = default;
    explicit PolygonLocator(std::vector<std::vector<cplx>> polys, double rel_tol = 1e-12);
    int locate(cplx w) const;
    std::vector<int> locate_all(cplx w) const;
    // strictly interior hits only (no boundary tolerance)
    std::vector<int> locate_interior(cplx w) const;
    const std::vector<cplx>& polygon(int i) const { return polys_[i]; }
    int size() const { return static_cast<int>(polys_.size()); }
    cplx lo() const { return lo_; }
    cplx hi() const { return hi_; }

private:
    int classify(int i, cplx w) const; // 0 outside, 1 inside, 2 on boundary
    std::vector<std::vector<cplx>> polys_;
    cplx lo_{0, 0}, hi_{0, 0};
    double cell_ = 1, tol_ = 0;
    int nx_ = 1, ny_ = 1;
    std::vector<std::vector<int>> buckets_;
};

struct GradientMap {
    PolygonLocator faces;          // inner faces in H coordinates, indexed by dual id
    std::vector<cplx> values;      // H* per inner dual id
    std::vector<double> offset;

    int face(cplx w) const;
    cplx psi(cplx w) const;        // throws PointOutsideCoveredRegion
    double phi(cplx w) const;      // piecewise affine potential
};

GradientMap gradient_map(const PlanarMap& m, const DualMap& d, const HarmonicEmbedding& e,
                         const PiecewisePotential& p);

struct TSurface {
    std::vector<cplx> T, O;        // per corner
    std::vector<cplx> eta_white;   // per primal edge
    static cplx eta_black(bool dual) { return dual ? cplx(0, 1) : cplx(1, 0); }
};

TSurface t_surface(const PlanarMap& m, const DualMap& d, const CornerGraph& cg,
                   const HarmonicEmbedding& e, const DualEmbedding& de);

struct TSurfaceCheck {
    double dT_dO = 0;         // max ||dT|-|dO|| / |dT|
    double white_origami = 0; // max |dO - eta^2 dT| / |dT| on white faces
    double black_origami = 0; // max |dO - conj(eta)^2 conj(dT)| / |dT| on black faces
    double w_collapse = 0;    // max |T - conj(O) - H(v)| on primal black faces
    double area_identity = 0; // max |c|v1-v2|^2 - 4 Area(T(u))| / (c|v1-v2|^2)
    bool white_rectangles = true;
};

TSurfaceCheck check_t_surface(const PlanarMap& m, const DualMap& d, const CornerGraph& cg,
                              const HarmonicEmbedding& e, const TSurface& ts);

// Faces of the t-surface drawn in the T-plane with O affine on each face:
// white O = O0 + a (z - T0); black O = O0 + s conj(z - T0).
struct TChart {
    PolygonLocator faces;
    std::vector<cplx> T0, O0, coef;
    std::vector<char> antilinear;
    std::vector<int> source;       // white: edge id; black: -1 - black face index

    cplx origami(int face, cplx z) const;
    cplx origami(cplx z) const;    // throws NonInjectiveChart outside the chart
};

TChart t_chart(const PlanarMap& m, const CornerGraph& cg, const TSurface& ts);

struct LiftCheck {
    int samples = 0;
    int covered = 0;
    int overlaps = 0;
    double max_w_ratio = 0;        // max |W(q)-W(p)| / r over samples
    bool ok = true;
};

// Samples the lifted ball over B(T(p), r) for each centre and checks that
// every point has exactly one preimage and that W stays within 2r.
LiftCheck check_lift(const TChart& chart, const std::vector<cplx>& centres, double r, int per_ball);

// Everything computed from a harmonic embedding, in dependency order.
struct Derived {
    DualMap d;
    DualEmbedding de;
    PiecewisePotential p;
    GradientMap gm;
    CornerGraph cg;
    TSurface ts;
    TChart chart;
};

Derived derive(const PlanarMap& m, const HarmonicEmbedding& e);

} // namespace tma
