#pragma once

#include "tma/discrete_harmonic.hpp"
#include "tma/embedding.hpp"

#include <string>

namespace tma {

struct SvgStyle {
    double width = 800;        // pixels; height follows the aspect ratio
    double margin = 20;
    double stroke = 1;
    double vertex_radius = 2.5;
};

// One <line> per edge and one <circle> per vertex.
std::string svg_embedding(const PlanarMap& m, const std::vector<cplx>& H, const SvgStyle& style = {});
// Primal edges in grey, dual edges (leaves included) in red.
std::string svg_dual(const PlanarMap& m, const DualMap& d, const std::vector<cplx>& H, const std::vector<cplx>& Hs,
                     const SvgStyle& style = {});
// Corner-graph faces in the T-plane: black faces filled black, white faces white.
std::string svg_tembedding(const PlanarMap& m, const CornerGraph& cg, const TSurface& ts, const SvgStyle& style = {});
// Inner faces filled by the mean of the valued vertex values, with a legend.
std::string svg_field(const PlanarMap& m, const std::vector<cplx>& H, const Field& f, const SvgStyle& style = {});

} // namespace tma
