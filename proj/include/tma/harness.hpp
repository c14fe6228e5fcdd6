#pragma once

#include "tma/discrete_harmonic.hpp"
#include "tma/meshgen.hpp"
#include "tma/regularity.hpp"

#include <cstdint>
#include <functional>
#include <limits>
#include <string>

namespace tma {

// Closed region: an Omega spec, or annulus:cx,cy,r0,r1.
struct CompactSet {
    Omega outer;
    double hole = 0;             // points closer than this to outer.centre are excluded

    static CompactSet parse(const std::string& spec);
    bool contains(cplx w) const;
    std::vector<cplx> boundary_samples(int n) const;
    double distance(cplx w) const;   // 0 inside
};

std::vector<cplx> boundary_samples(const Omega& omega, int n);

struct CrosscheckSettings {
    int instances = 10;
    std::vector<double> spreads;     // perturbed: instance k draws c from [1/s_k, s_k]; overrides instances
    double C = 4;
    std::string region = "disc:0,0,0.6";
    double conv_threshold = 0.17892;   // calibrated at delta 1/32, C 4
    double rw_threshold = 0.00446556;
    double slack = 0.1;
    int centres = 8;
    long walk_budget = 2000;
    int per_length = 128;
};

struct ExperimentPlan {
    std::string family = "square";   // square | perturbed | isoradial | hull
    std::string potential = "quad";  // continuum reference and hull generator
    std::vector<double> deltas;      // strictly decreasing
    std::string omega = "disc:0,0,1";
    std::string region;              // generator box "box:..."/"square:..."; default: Omega grown by 2 delta
    std::string g = "Re(w^3)";
    std::string g_conjugate;         // exact conjugate; FE conjugate when empty
    std::string reference = "exact"; // exact | fem
    double ref_h = 0;                // FE mesh size; default min delta / 4
    cplx pole{0, 0};
    std::string K = "disc:0,0,0.7";
    BoundaryMode mode = BoundaryMode::Trace;
    double delta_prime = 1;
    std::uint64_t seed = 1;
    bool timing = true;              // false writes runtime_ms = 0
    bool parallel = true;            // one task per delta
    PerturbLaw law;
    AngleProfile angles{0.3, 0.2, 0.1};
    CrosscheckSettings cross;
    std::string out, svg;

    void validate() const;
};

ExperimentPlan parse_plan(const std::string& json_text);
ExperimentPlan load_plan(const std::string& path);

using InstanceFactory = std::function<Instance(double delta)>;
InstanceFactory plan_family(const ExperimentPlan& plan);

inline constexpr double kAbsent = std::numeric_limits<double>::quiet_NaN();

struct ConvergenceRow {
    double delta = 0;
    double sup_err = 0, l2_err = 0;
    double grad_sup_err = kAbsent, conj_err = kAbsent;
    double runtime_ms = 0;
    int vertices = 0, compared = 0;
    double solver_residual = 0;
    double monodromy = kAbsent;       // green: conjugate increment around the pole
    double symmetry_gap = kAbsent;    // green: relative gap of mu(v1)G(v2,v1) vs mu(v2)G(v1,v2)
    double ref_scale = 0;             // osc of g on the boundary, or max |reference| on K
    bool exp_fat = true;
};

struct ConvergenceReport {
    std::string mode;
    std::vector<ConvergenceRow> rows;   // in ladder order
    double rate = kAbsent;              // least-squares slope of log error against log delta
    bool pass = false;                  // final error <= first / 2
    std::vector<double> exp_fat_failures;   // deltas whose instance violated EXP-FAT
    Field last_field;                   // finest discrete solution, for rendering
    Instance last_instance;
};

ConvergenceReport run_dirichlet_convergence(const ExperimentPlan& plan);
ConvergenceReport run_dirichlet_convergence(const ExperimentPlan& plan, const InstanceFactory& family);
ConvergenceReport run_green_convergence(const ExperimentPlan& plan);
ConvergenceReport run_green_convergence(const ExperimentPlan& plan, const InstanceFactory& family);
ConvergenceReport run_gradient_convergence(const ExperimentPlan& plan);
ConvergenceReport run_gradient_convergence(const ExperimentPlan& plan, const InstanceFactory& family);
// Throws ExpFatViolated when the report recorded a violation.
void require_exp_fat(const ConvergenceReport& r);

std::string convergence_csv(const ConvergenceReport& r);

struct CrosscheckRow {
    double delta = 0;
    std::uint64_t seed = 0;
    double lambda = 0, lambda_2C = 0;     // CONV at C and 2C
    double kappa = 0, kappa_inner = 0;    // LIP at C on the region and on its 4C delta interior
    double kappa_kd = 0;                  // Lip(kappa, delta) in the T-plane
    double rw = 0, rw_var = 0, rw_bmin = 0, rw_bmax = 0;
    bool rw_flagged = false;
    bool conv_pass = false, rw_pass = false;
    bool conversion_upper = false, conversion_lower = false;
};

struct CrosscheckReport {
    std::vector<CrosscheckRow> rows;
    bool conv_implies_rw = true, rw_implies_conv = true, conversion = true;
    double conv_threshold = 0, rw_threshold = 0;
};

CrosscheckReport run_theorem_a_crosscheck(const ExperimentPlan& plan);
// family(delta, seed, k) builds instance k of the row set.
CrosscheckReport run_theorem_a_crosscheck(const ExperimentPlan& plan,
                                          const std::function<Instance(double, std::uint64_t, int)>& family);

struct Calibration {
    double conv_threshold = 0, rw_threshold = 0;
    int agree = 0, total = 0;
};

// Threshold pair maximising the rows where CONV and RW agree; among ties the
// one with the widest relative margins. Each threshold splits the rows at a
// geometric midpoint of consecutive estimates.
Calibration calibrate_thresholds(const CrosscheckReport& r);
std::string crosscheck_csv(const CrosscheckReport& r);

} // namespace tma
