#include "tma/common.hpp"

#include <cmath>
#include <limits>

namespace tma {

const char* errc_name(Errc e)
{
    switch (e) {
    case Errc::NonPlanarInput: return "NonPlanarInput";
    case Errc::NonPositiveConductance: return "NonPositiveConductance";
    case Errc::DanglingHalfEdge: return "DanglingHalfEdge";
    case Errc::MalformedInput: return "MalformedInput";
    case Errc::DisconnectedInterior: return "DisconnectedInterior";
    case Errc::SolverDivergence: return "SolverDivergence";
    case Errc::ClosureDefect: return "ClosureDefect";
    case Errc::InconsistentIncrements: return "InconsistentIncrements";
    case Errc::PointOutsideCoveredRegion: return "PointOutsideCoveredRegion";
    case Errc::NonInjectiveChart: return "NonInjectiveChart";
    case Errc::InsufficientSamples: return "InsufficientSamples";
    case Errc::BudgetTooSmall: return "BudgetTooSmall";
    case Errc::DegenerateFace: return "DegenerateFace";
    case Errc::EmptyInterior: return "EmptyInterior";
    case Errc::MissingNeighborValue: return "MissingNeighborValue";
    case Errc::PoleOnBoundary: return "PoleOnBoundary";
    case Errc::BallNotCovered: return "BallNotCovered";
    case Errc::NotConjugatePair: return "NotConjugatePair";
    case Errc::DegenerateTriangle: return "DegenerateTriangle";
    case Errc::StartOnBoundary: return "StartOnBoundary";
    case Errc::TooCloseToBoundary: return "TooCloseToBoundary";
    case Errc::OutsideDomain: return "OutsideDomain";
    case Errc::MeshGenerationFailure: return "MeshGenerationFailure";
    case Errc::LoopDefectExceeded: return "LoopDefectExceeded";
    case Errc::PoleTooCloseToBoundary: return "PoleTooCloseToBoundary";
    case Errc::NonConvexInput: return "NonConvexInput";
    case Errc::DegenerateHull: return "DegenerateHull";
    case Errc::AngleOutOfRange: return "AngleOutOfRange";
    case Errc::ExpFatViolated: return "ExpFatViolated";
    case Errc::BadExpression: return "BadExpression";
    case Errc::EmptySampleSet: return "EmptySampleSet";
    }
    return "Unknown";
}

double Mat2::lambda_min() const
{
    double m = 0.5 * (xx + yy);
    double d = std::sqrt(0.25 * (xx - yy) * (xx - yy) + xy * xy);
    return m - d;
}

double Mat2::lambda_max() const
{
    double m = 0.5 * (xx + yy);
    double d = std::sqrt(0.25 * (xx - yy) * (xx - yy) + xy * xy);
    return m + d;
}

double polygon_area(const std::vector<cplx>& p)
{
    double a = 0;
    for (std::size_t i = 0; i < p.size(); ++i)
        a += cross(p[i], p[(i + 1) % p.size()]);
    return 0.5 * a;
}

double triangle_inradius(cplx a, cplx b, cplx c)
{
    double area = 0.5 * std::abs(cross(b - a, c - a));
    double per = std::abs(b - a) + std::abs(c - b) + std::abs(a - c);
    if (per <= 0) return 0;
    return 2 * area / per;
}

Fan best_fan(const std::vector<cplx>& poly)
{
    Fan best;
    const int n = static_cast<int>(poly.size());
    if (n < 3) return best;
    double diam = 0;
    for (cplx a : poly)
        for (cplx b : poly) diam = std::max(diam, std::abs(a - b));
    const double eps = 1e-12 * diam * diam;
    for (int k = 0; k < n; ++k) {
        Fan f;
        f.apex = k;
        f.min_inradius = std::numeric_limits<double>::infinity();
        bool ok = true;
        for (int i = 1; i + 1 < n && ok; ++i) {
            int a = k, b = (k + i) % n, c = (k + i + 1) % n;
            double area2 = cross(poly[b] - poly[a], poly[c] - poly[a]);
            if (std::abs(area2) <= eps) continue;
            if (area2 < 0) {
                ok = false;
                break;
            }
            f.tris.push_back({a, b, c});
            f.min_inradius = std::min(f.min_inradius, triangle_inradius(poly[a], poly[b], poly[c]));
        }
        if (!ok || f.tris.empty()) continue;
        if (best.apex < 0 || f.min_inradius > best.min_inradius) best = std::move(f);
    }
    return best;
}

std::vector<cplx> drop_collinear(const std::vector<cplx>& poly, double rel_tol)
{
    std::vector<cplx> p = poly;
    bool changed = true;
    while (changed && p.size() > 3) {
        changed = false;
        const std::size_t n = p.size();
        for (std::size_t i = 0; i < n; ++i) {
            cplx a = p[(i + n - 1) % n], b = p[i], c = p[(i + 1) % n];
            double scale = std::abs(c - a) * std::max(std::abs(b - a), std::abs(c - b));
            if (std::abs(cross(b - a, c - b)) <= rel_tol * scale && dotc(b - a, c - b) >= 0) {
                p.erase(p.begin() + static_cast<long>(i));
                changed = true;
                break;
            }
        }
    }
    return p;
}

} // namespace tma
