#pragma once

#include "tma/planar_map.hpp"
#include "tma/sparse.hpp"

namespace tma {

// Weighted Laplacian sum_{v'} c (f(v) - f(v')) restricted to the unknown vertices.
struct ReducedSystem {
    Csr a;
    std::vector<int> index;   // vertex -> unknown slot or -1
    std::vector<int> vertex;  // unknown slot -> vertex
};

ReducedSystem reduced_laplacian(const PlanarMap& m, const std::vector<char>& unknown);

// Right-hand side sum c * vals(v') over known neighbours v'.
std::vector<double> reduced_rhs(const PlanarMap& m, const ReducedSystem& s, const std::vector<double>& vals);

// True when every connected block of unknowns touches a known vertex.
bool anchored(const PlanarMap& m, const ReducedSystem& s);

// sum_{v'} c (f(v') - f(v))
double flux_sum(const PlanarMap& m, const std::vector<double>& f, int v);
cplx flux_sum(const PlanarMap& m, const std::vector<cplx>& f, int v);

} // namespace tma
