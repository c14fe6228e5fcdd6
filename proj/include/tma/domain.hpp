#pragma once

#include "tma/common.hpp"

#include <string>

namespace tma {

// Continuum region: disc, axis box or simple polygon (counterclockwise).
struct Omega {
    enum class Kind { Disc, Box, Polygon } kind = Kind::Disc;
    cplx centre{0, 0};
    double radius = 1;
    std::vector<cplx> poly;      // box corners or polygon vertices

    static Omega disc(cplx c, double r);
    static Omega box(double x0, double y0, double x1, double y1);
    static Omega polygon(std::vector<cplx> p);
    // disc:cx,cy,r | square:a,b | box:x0,y0,x1,y1 | poly:x,y;x,y;...
    static Omega parse(const std::string& spec);

    bool contains(cplx w) const;              // open set
    double boundary_distance(cplx w) const;   // distance to the boundary curve
    // Boundary point on the ray from the centre through w.
    cplx project(cplx w) const;
    // Nearest boundary point.
    cplx closest(cplx w) const;
    double diameter() const;
};

} // namespace tma
