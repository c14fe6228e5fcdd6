#pragma once

#include "tma/embedding.hpp"
#include "tma/meshgen.hpp"

#include <cmath>

namespace fx {

using tma::cplx;

// centre 0 joined to corners 1..4 at 0, 1, 1+i, i
inline tma::PlanarMap star(double c0 = 1.0)
{
    std::vector<tma::EdgeSpec> e = {{0, 1, c0}, {0, 2, 1}, {0, 3, 1}, {0, 4, 1},
                                    {1, 2, 1},  {2, 3, 1}, {3, 4, 1}, {4, 1, 1}};
    std::vector<std::vector<int>> f = {{0, 1, 2}, {0, 2, 3}, {0, 3, 4}, {0, 4, 1}, {1, 4, 3, 2}};
    return tma::build_planar_map(5, e, f, 4);
}

inline std::vector<std::pair<int, cplx>> star_corners()
{
    return {{1, {0, 0}}, {2, {1, 0}}, {3, {1, 1}}, {4, {0, 1}}};
}

inline tma::PlanarMap square_face()
{
    std::vector<tma::EdgeSpec> e = {{0, 1, 1}, {1, 2, 1}, {2, 3, 1}, {3, 0, 1}};
    return tma::build_planar_map(4, e, {{0, 1, 2, 3}, {0, 3, 2, 1}}, 1);
}

// max over vertices of |Phi - 1/2|H|^2 - affine| after fitting the affine part on three vertices
inline double quadratic_gap(const std::vector<double>& Phi, const std::vector<cplx>& H, double scale)
{
    std::vector<double> r(H.size());
    for (std::size_t v = 0; v < H.size(); ++v) r[v] = Phi[v] - 0.5 * scale * std::norm(H[v]);
    // least squares plane through r, in centred coordinates
    const double n = static_cast<double>(H.size());
    cplx mean = 0;
    double rmean = 0;
    for (std::size_t v = 0; v < H.size(); ++v) mean += H[v] / n, rmean += r[v] / n;
    double sxx = 0, sxy = 0, syy = 0, bx = 0, by = 0;
    for (std::size_t v = 0; v < H.size(); ++v) {
        double x = H[v].real() - mean.real(), y = H[v].imag() - mean.imag(), q = r[v] - rmean;
        sxx += x * x, sxy += x * y, syy += y * y, bx += x * q, by += y * q;
    }
    double det = sxx * syy - sxy * sxy;
    double a = (bx * syy - by * sxy) / det, b = (by * sxx - bx * sxy) / det;
    double c = rmean - a * mean.real() - b * mean.imag();
    double worst = 0;
    for (std::size_t v = 0; v < H.size(); ++v)
        worst = std::max(worst, std::abs(r[v] - a * H[v].real() - b * H[v].imag() - c));
    return worst;
}

} // namespace fx
