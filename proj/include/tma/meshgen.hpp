#pragma once

#include "tma/embedding.hpp"
#include "tma/planar_map.hpp"
#include "tma/potential.hpp"

#include <array>
#include <cstdint>
#include <functional>
#include <optional>

namespace tma {

// A generated weighted planar graph with its harmonic embedding.
struct Instance {
    PlanarMap map;
    HarmonicEmbedding emb;
    std::vector<std::pair<int, cplx>> boundary;
    double delta = 0;
    std::string family;
};

Instance square_lattice(double delta, const Box& U);

struct PerturbLaw {
    double lo = 0.5, hi = 2.0;
    bool log_uniform = true;
};

Instance perturbed_lattice(double delta, const Box& U, const PerturbLaw& law, std::uint64_t seed);

// Alternating rhombic lattice: column edge directions +-alpha_amp around 0,
// row edge directions pi/2 +- beta_amp.
struct AngleProfile {
    double alpha_amp = 0;
    double beta_amp = 0;
    double theta_min = 0.1;
};

Instance isoradial_rhombic(double delta, const AngleProfile& prof, const Box& U);

struct HullInstance {
    Instance inst;
    std::vector<double> Phi;        // samples of phi at the vertices
    std::vector<cplx> cell_grad;    // per face id (outer face entry unused)
    int flips = 0;
};

HullInstance from_convex_potential(const ConvexPotential& phi, double delta, const Box& U);

// Lower convex hull of the lifted points (pos, z) as a regular subdivision,
// reached by Lawson flips from the given triangulation of the points.
// Boundary edges take their weight from `extend` evaluated at the mirrored
// opposite vertex; without it they get weight 1. A positive flat_tol treats
// lifted quadruples with relative orientation below it as coplanar.
inline constexpr double kSampleFlatTol = 1e-9;

HullInstance regular_subdivision(const std::vector<cplx>& pos, const std::vector<double>& z,
                                 std::vector<std::array<int, 3>> tris, double delta,
                                 const std::function<double(cplx)>& extend = {}, double flat_tol = 0);

} // namespace tma
