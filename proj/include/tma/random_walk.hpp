#pragma once

#include "tma/discrete_harmonic.hpp"
#include "tma/rng.hpp"

#include <limits>

namespace tma {

struct Step {
    int vertex = -1;
    double hold = 0;
};
using Trajectory = std::vector<Step>;

// The walk stops on arrival at a vertex outside `inside` (map boundary
// vertices always count as outside), on reaching `target`, or at time t_max.
struct StopRule {
    std::vector<char> inside;     // empty: every non-boundary vertex
    double t_max = std::numeric_limits<double>::infinity();
    int target = -1;

    static StopRule exit_region(std::vector<char> inside) { return {std::move(inside)}; }
    static StopRule fixed_time(double t) { return {{}, t, -1}; }
    static StopRule hit_vertex(int v) { return {{}, std::numeric_limits<double>::infinity(), v}; }
};

struct WalkEnd {
    int vertex = -1;
    double time = 0;
    double watched = 0;           // time spent at the watched vertex
    long steps = 0;
};

// Continuous-time walk with jump rates c / mu(v).
class WalkEngine {
public:
    WalkEngine(const PlanarMap& m, const std::vector<cplx>& H);

    const PlanarMap& map() const { return *m_; }
    const std::vector<cplx>& positions() const { return *H_; }
    double mu(int v) const { return mu_[v]; }
    double rate(int v) const { return rate_[v]; }
    double boundary_distance(int v) const;

    Trajectory simulate(int v, const StopRule& stop, CounterRng& rng) const;
    WalkEnd run(int v, const StopRule& stop, CounterRng& rng, int watch = -1) const;

    // max over interior v of |sum q |dH|^2 - 1| and |sum q dH| / sqrt(rate)
    double normalization_defect() const;
    double drift_defect() const;

private:
    bool stops(int v, const StopRule& s) const;
    int jump(int v, double u) const;

    const PlanarMap* m_;
    const std::vector<cplx>* H_;
    std::vector<double> mu_, rate_, cum_;   // cum_: cumulative jump probabilities in out_he order
    std::vector<cplx> bpos_;
};

// Welford mean/variance with third and fourth central moments, mergeable.
struct Moments {
    long n = 0;
    double mean = 0, m2 = 0, m3 = 0, m4 = 0;
    void add(double x);
    void merge(const Moments& o);
    double variance() const { return n > 1 ? m2 / (n - 1) : 0; }
    double skewness() const;
};

struct EstimatorResult {
    double estimate = 0;
    double half_width = 0;        // 95% normal-approximation half-width
    long n = 0;
    std::uint64_t seed = 0;
    bool flagged = false;         // fewer than 100 samples or extreme skew
    bool covers(double x) const { return std::abs(x - estimate) <= half_width; }
};

EstimatorResult mean_estimate(const Moments& mo, std::uint64_t seed);
// Sample variance with a fourth-moment half-width.
EstimatorResult variance_estimate(const Moments& mo, std::uint64_t seed);

struct WalkOptions {
    bool parallel = true;
};

// Runs n walks from v; trajectory i uses CounterRng(seed, i). Per-walk
// observations f(end) are accumulated in fixed blocks merged in order, so
// serial and parallel runs agree bitwise.
std::vector<Moments> walk_batch(const WalkEngine& w, int v, const StopRule& stop, long n, std::uint64_t seed,
                                int n_obs, const std::function<void(const WalkEnd&, double*)>& observe,
                                const WalkOptions& opt = {}, int watch = -1);

std::vector<EstimatorResult> variance_ellipticity(const WalkEngine& w, int v, double t,
                                                  const std::vector<double>& thetas, long n, std::uint64_t seed,
                                                  const WalkOptions& opt = {});

EstimatorResult crossing_probability(const WalkEngine& w, int v, double r, double theta0, long n,
                                     std::uint64_t seed, const WalkOptions& opt = {});

EstimatorResult occupation_green(const WalkEngine& w, const DomainSlice& s, int v1, int v2, long n,
                                 std::uint64_t seed, const WalkOptions& opt = {});

// E g(X_tau) for the walk stopped on leaving the slice interior.
EstimatorResult exit_expectation(const WalkEngine& w, const DomainSlice& s, int v, const Field& g, long n,
                                 std::uint64_t seed, const WalkOptions& opt = {});

struct MartingaleCheck {
    EstimatorResult re, im;       // X_tau
    EstimatorResult square;       // |X_tau|^2 - tau
    cplx start;
    bool ok() const { return re.covers(start.real()) && im.covers(start.imag()) && square.covers(std::norm(start)); }
};

MartingaleCheck martingale_check(const WalkEngine& w, int v, const StopRule& stop, long n, std::uint64_t seed,
                                 const WalkOptions& opt = {});

} // namespace tma
