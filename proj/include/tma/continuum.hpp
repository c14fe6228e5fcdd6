#pragma once

#include "tma/domain.hpp"
#include "tma/embedding.hpp"
#include "tma/potential.hpp"

#include <functional>

namespace tma {

// Adjugate of the Hessian: (phi_yy, -phi_xy; -phi_xy, phi_xx).
Mat2 matrix_A(const ConvexPotential& phi, cplx w);
// sqrt(det A)
double rho(const ConvexPotential& phi, cplx w);

// P1 mesh on the grid h Z^2 clipped to Omega. Grid nodes outside Omega that
// share a triangle with an inside node are moved to the nearest boundary point
// and carry the Dirichlet data.
struct FeMesh {
    std::vector<cplx> nodes;
    std::vector<std::array<int, 3>> tris;      // counterclockwise
    std::vector<char> dirichlet;
    double h = 0;
    PolygonLocator locator;

    int locate(cplx w) const;                  // -1 outside
    std::array<double, 3> barycentric(int t, cplx w) const;
};

FeMesh fe_mesh(const Omega& omega, double h);

// Element stiffness for -div(A grad u) with A at the barycentre.
using ElementMatrix = std::array<double, 9>;
void assemble_elements_serial(const FeMesh& mesh, const ConvexPotential& phi, std::vector<ElementMatrix>& out);
void assemble_elements_omp(const FeMesh& mesh, const ConvexPotential& phi, std::vector<ElementMatrix>& out);

struct ContinuumField {
    FeMesh mesh;
    std::vector<double> u;                     // nodal values
    std::vector<ElementMatrix> ke;
    double weak_residual = 0;                  // max |(K u)_i| / max_i sum_j |K_ij u_j| over free nodes
    int iterations = 0;

    double eval(cplx w) const;                 // throws OutsideDomain
    cplx grad(int tri) const;                  // u_x + i u_y
    // (K u)_i for every node, from the element matrices
    std::vector<double> apply() const;
};

struct FeOptions {
    double tol = 1e-14;
    bool parallel = true;
};

ContinuumField solve_Lphi_dirichlet(const ConvexPotential& phi, const Omega& omega, const std::function<double(cplx)>& g,
                                    double h, const FeOptions& opt = {});

struct ContinuumGreen {
    ContinuumField field;
    int pole_node = -1;
    double monodromy = 0;                      // conjugate increment around the circle of radius 10 h
};

// Unit load lumped at the node nearest to w0, zero on the boundary.
ContinuumGreen green_continuum(const ConvexPotential& phi, const Omega& omega, cplx w0, double h,
                               const FeOptions& opt = {});

// Crouzeix-Raviart conjugate: values at edge midpoints with
// h*(m2) - h*(m1) = (J A grad u) . (m2 - m1) inside each triangle, J the
// quarter turn.
struct ConjugateContinuum {
    std::vector<std::array<int, 2>> edges;     // mesh edges (node pairs)
    std::vector<cplx> midpoints;
    std::vector<double> values;
    std::vector<std::array<int, 3>> tri_edges; // edge opposite each corner
    std::vector<char> active;                  // triangles carrying the conjugate
    double loop_defect = 0;                    // max cycle defect / max |increment|
    const FeMesh* mesh = nullptr;

    double eval(cplx w) const;
};

ConjugateContinuum conjugate(const ContinuumField& h, const ConvexPotential& phi, double tol = 1e-8);
// Conjugate of arbitrary nodal data (no harmonicity required); loop_defect reports the mismatch.
ConjugateContinuum conjugate_unchecked(const FeMesh& mesh, const std::vector<double>& u, const ConvexPotential& phi);

struct FlatnessReport {
    bool flat = false;
    double mean = 0, sup_dev = 0;
    std::vector<cplx> points;
    std::vector<double> det;
};

FlatnessReport ma_flatness(const ConvexPotential& phi, const Box& domain, double tol, int n = 65);

struct LphiPsiResidual {
    FeMesh mesh;
    std::vector<cplx> residual;      // lumped weak residual of L_phi psi per free node
    std::vector<cplx> identity;      // -2 d/dwbar det D^2 phi at the same nodes
    double norm = 0;                 // discrete L2 norm of the residual
    double identity_gap = 0;         // max |residual - identity| over nodes at distance >= 0.1 from the boundary
};

LphiPsiResidual lphi_psi_residual(const ConvexPotential& phi, const Box& domain, double h, bool parallel = true);

Mat2 first_fundamental_form(const ConvexPotential& phi, cplx w);
// Pullback of x1^2 + x2^2 - x3^2 - x4^2 under w -> ((w + psi)/2, (conj psi - conj w)/2), central differences.
Mat2 pullback_metric(const ConvexPotential& phi, cplx w, double step);

} // namespace tma
