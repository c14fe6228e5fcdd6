#pragma once

#include <array>
#include <complex>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace tma {

using cplx = std::complex<double>;

enum class Errc {
    NonPlanarInput,
    NonPositiveConductance,
    DanglingHalfEdge,
    MalformedInput,
    DisconnectedInterior,
    SolverDivergence,
    ClosureDefect,
    InconsistentIncrements,
    PointOutsideCoveredRegion,
    NonInjectiveChart,
    InsufficientSamples,
    BudgetTooSmall,
    DegenerateFace,
    EmptyInterior,
    MissingNeighborValue,
    PoleOnBoundary,
    BallNotCovered,
    NotConjugatePair,
    DegenerateTriangle,
    StartOnBoundary,
    TooCloseToBoundary,
    OutsideDomain,
    MeshGenerationFailure,
    LoopDefectExceeded,
    PoleTooCloseToBoundary,
    NonConvexInput,
    DegenerateHull,
    AngleOutOfRange,
    ExpFatViolated,
    BadExpression,
    EmptySampleSet,
};

const char* errc_name(Errc e);

class Error : public std::runtime_error {
public:
    Error(Errc code, const std::string& what)
        : std::runtime_error(std::string(errc_name(code)) + ": " + what), code_(code) {}
    // Points at the offending input element ("edge", "face", ...), used by loaders.
    Error(Errc code, const std::string& what, std::string item, int index)
        : Error(code, what) { item_ = std::move(item); index_ = index; }
    Errc code() const noexcept { return code_; }
    const std::string& item() const noexcept { return item_; }
    int index() const noexcept { return index_; }

private:
    Errc code_;
    std::string item_;
    int index_ = -1;
};

// Symmetric 2x2 matrix.
struct Mat2 {
    double xx = 0, xy = 0, yy = 0;
    double det() const { return xx * yy - xy * xy; }
    double trace() const { return xx + yy; }
    double lambda_min() const;
    double lambda_max() const;
};

inline double cross(cplx a, cplx b) { return a.real() * b.imag() - a.imag() * b.real(); }
inline double dotc(cplx a, cplx b) { return a.real() * b.real() + a.imag() * b.imag(); }

double polygon_area(const std::vector<cplx>& p);
double triangle_inradius(cplx a, cplx b, cplx c);

// Fan triangulation of a counterclockwise polygon maximising the smallest
// inradius. Zero-area triangles (collinear runs through the apex) are
// skipped; apex = -1 when no apex gives a valid fan.
struct Fan {
    int apex = -1;
    double min_inradius = 0;
    std::vector<std::array<int, 3>> tris;
};
Fan best_fan(const std::vector<cplx>& poly);
// Drops vertices lying on the segment between their neighbours.
std::vector<cplx> drop_collinear(const std::vector<cplx>& poly, double rel_tol = 1e-12);

} // namespace tma
