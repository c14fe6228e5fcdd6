#pragma once

#include "tma/discrete_harmonic.hpp"
#include "tma/random_walk.hpp"

#include <string>
#include <utility>

namespace tma {

struct Witness {
    std::vector<cplx> points;
    double value = 0;
};

struct PropertyReport {
    std::string property;
    double delta = 0, C = 0;
    double min_value = 0, max_value = 0;
    double estimate = 0;          // lambda (conv), kappa (lip), kappa (lipkd), c (rw)
    double ci_half_width = 0;
    Witness min_witness, max_witness;
    long samples = 0;
    double threshold = 0;
    bool pass = false;
    std::vector<std::pair<std::string, double>> details;
};

struct ScanOptions {
    int per_length = 256;         // segments per dyadic length
    int max_lengths = 8;
    std::uint64_t seed = 1;       // offsets the Halton streams
    bool parallel = true;
    double threshold = 0;
};

// Phi(w2) - 2 Phi((w1+w2)/2) + Phi(w1) over |w2-w1|^2
double conv_ratio(const GradientMap& gm, cplx w1, cplx w2);
// (Psi(w2) - Psi(w1)) / (w2 - w1)
cplx lip_quotient(const GradientMap& gm, cplx w1, cplx w2);
// |O(z2) - O(z1)| / |z2 - z1|
double lipkd_ratio(const TChart& chart, cplx z1, cplx z2);

// Segments of lengths C delta 2^k with endpoints and midpoint in the region
// and in the faces of the map.
PropertyReport check_conv(const GradientMap& gm, const Omega& region, double delta, double C,
                          const ScanOptions& opt = {});
PropertyReport check_lip(const GradientMap& gm, const Omega& region, double delta, double C,
                         const ScanOptions& opt = {});
// Pairs in the T-plane region with |z2 - z1| >= delta; pass when kappa < threshold.
PropertyReport check_lip_kdelta(const TChart& chart, const Omega& region, double delta, const ScanOptions& opt = {});

struct MeasureTable {
    std::vector<double> mu;                   // per vertex
    std::vector<double> alphas;               // direction angles
    std::vector<std::vector<double>> mu_alpha; // [vertex][direction]
    double area_defect = 0;   // max |c|v1-v2|^2 - 4 Area(T(u))| / c|v1-v2|^2
    double alpha_defect = 0;  // max |mu_alpha - area form| / mu over interior vertices
    bool dominated = true;    // mu_alpha <= mu everywhere
};

// mu_alpha(v) = sum c Re(conj(alpha)(v - v'))^2, cross-checked against
// sum Area((T - alpha^2 O)(u)) over the white faces at v.
MeasureTable measures(const PlanarMap& m, const CornerGraph& cg, const TSurface& ts, const std::vector<cplx>& H,
                      int directions = 16);

struct RwOptions {
    int centres = 8;              // vertices probed for (a)
    long walk_budget = 2000;      // trajectories per centre
    int directions = 16;
    double max_rel_ci = 0.25;     // BudgetTooSmall above this relative half-width
    std::uint64_t seed = 1;
    double threshold = 0;
    bool parallel = true;
};

// (a) min over centres and directions of Var(Re[conj(alpha) X]) / delta^2 at
// the exit of B(v, C delta); (b) min and max of sum_{B(x, C delta)} mu / delta^2.
// The estimate is the smaller of the (a) value and min(b_min, 1/b_max).
PropertyReport check_rw_property(const WalkEngine& w, const Omega& region, double delta, double C,
                                 const RwOptions& opt = {});

// True when the best fan triangulation has inradius >= rho.
bool face_fatness(const std::vector<cplx>& face, double rho);
double fan_inradius(const std::vector<cplx>& face);

// Drops every face that is delta exp(-delta'/delta)-fat and measures the
// vertex-connected clusters of the remaining faces that lie inside U.
PropertyReport exp_fat_check(const PlanarMap& m, const std::vector<cplx>& H, const Omega& U, double delta,
                             double delta_prime);

} // namespace tma
