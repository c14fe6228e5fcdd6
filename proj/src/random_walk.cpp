#include "tma/random_walk.hpp"

#include <algorithm>
#include <cmath>

namespace tma {

namespace {
constexpr long kBlock = 4096;
constexpr double kZ95 = 1.959963984540054;
}

WalkEngine::WalkEngine(const PlanarMap& m, const std::vector<cplx>& H) : m_(&m), H_(&H)
{
    int n = m.n_vertices;
    mu_.assign(n, 0);
    rate_.assign(n, 0);
    cum_.assign(m.out_he.size(), 0);
    for (int v = 0; v < n; ++v) {
        double csum = 0;
        for (int k = m.out_ptr[v]; k < m.out_ptr[v + 1]; ++k) {
            int h = m.out_he[k];
            csum += m.conductance(h);
            mu_[v] += m.conductance(h) * std::norm(H[m.target(h)] - H[v]);
            cum_[k] = csum;
        }
        for (int k = m.out_ptr[v]; k < m.out_ptr[v + 1]; ++k) cum_[k] /= csum;
        if (m.out_ptr[v + 1] > m.out_ptr[v]) cum_[m.out_ptr[v + 1] - 1] = 1.0;
        rate_[v] = mu_[v] > 0 ? csum / mu_[v] : 0;
        if (m.boundary[v]) bpos_.push_back(H[v]);
    }
}

double WalkEngine::boundary_distance(int v) const
{
    double d = std::numeric_limits<double>::infinity();
    for (cplx b : bpos_) d = std::min(d, std::abs(b - (*H_)[v]));
    return d;
}

bool WalkEngine::stops(int v, const StopRule& s) const
{
    if (v == s.target) return true;
    if (m_->boundary[v]) return true;
    return !s.inside.empty() && !s.inside[v];
}

int WalkEngine::jump(int v, double u) const
{
    int k = m_->out_ptr[v];
    int end = m_->out_ptr[v + 1] - 1;
    while (k < end && cum_[k] <= u) ++k;
    return m_->target(m_->out_he[k]);
}

WalkEnd WalkEngine::run(int v, const StopRule& stop, CounterRng& rng, int watch) const
{
    if (m_->boundary[v] || (!stop.inside.empty() && !stop.inside[v]))
        throw Error(Errc::StartOnBoundary, "walk must start at an interior vertex");
    WalkEnd e;
    while (!stops(v, stop)) {
        double h = rng.exponential(rate_[v]);
        if (e.time + h >= stop.t_max) {
            if (v == watch) e.watched += stop.t_max - e.time;
            e.time = stop.t_max;
            break;
        }
        e.time += h;
        if (v == watch) e.watched += h;
        v = jump(v, rng.uniform());
        ++e.steps;
    }
    e.vertex = v;
    return e;
}

Trajectory WalkEngine::simulate(int v, const StopRule& stop, CounterRng& rng) const
{
    if (m_->boundary[v] || (!stop.inside.empty() && !stop.inside[v]))
        throw Error(Errc::StartOnBoundary, "walk must start at an interior vertex");
    Trajectory tr;
    double t = 0;
    while (!stops(v, stop)) {
        double h = rng.exponential(rate_[v]);
        if (t + h >= stop.t_max) {
            tr.push_back({v, stop.t_max - t});
            return tr;
        }
        t += h;
        tr.push_back({v, h});
        v = jump(v, rng.uniform());
    }
    tr.push_back({v, 0});
    return tr;
}

double WalkEngine::normalization_defect() const
{
    double worst = 0;
    for (int v = 0; v < m_->n_vertices; ++v) {
        if (m_->boundary[v]) continue;
        double s = 0;
        for (int h : m_->out_half_edges(v)) s += m_->conductance(h) / mu_[v] * std::norm((*H_)[m_->target(h)] - (*H_)[v]);
        worst = std::max(worst, std::abs(s - 1));
    }
    return worst;
}

double WalkEngine::drift_defect() const
{
    double worst = 0;
    for (int v = 0; v < m_->n_vertices; ++v) {
        if (m_->boundary[v]) continue;
        cplx s = 0;
        for (int h : m_->out_half_edges(v)) s += m_->conductance(h) / mu_[v] * ((*H_)[m_->target(h)] - (*H_)[v]);
        worst = std::max(worst, std::abs(s) / std::sqrt(rate_[v]));
    }
    return worst;
}

void Moments::add(double x)
{
    double n1 = static_cast<double>(n);
    ++n;
    double nn = static_cast<double>(n);
    double d = x - mean, dn = d / nn, dn2 = dn * dn, t1 = d * dn * n1;
    mean += dn;
    m4 += t1 * dn2 * (nn * nn - 3 * nn + 3) + 6 * dn2 * m2 - 4 * dn * m3;
    m3 += t1 * dn * (nn - 2) - 3 * dn * m2;
    m2 += t1;
}

void Moments::merge(const Moments& o)
{
    if (o.n == 0) return;
    if (n == 0) {
        *this = o;
        return;
    }
    double na = static_cast<double>(n), nb = static_cast<double>(o.n), nn = na + nb;
    double d = o.mean - mean, d2 = d * d;
    double M2 = m2 + o.m2 + d2 * na * nb / nn;
    double M3 = m3 + o.m3 + d2 * d * na * nb * (na - nb) / (nn * nn) + 3 * d * (na * o.m2 - nb * m2) / nn;
    double M4 = m4 + o.m4 + d2 * d2 * na * nb * (na * na - na * nb + nb * nb) / (nn * nn * nn) +
                6 * d2 * (na * na * o.m2 + nb * nb * m2) / (nn * nn) + 4 * d * (na * o.m3 - nb * m3) / nn;
    mean += d * nb / nn;
    m2 = M2;
    m3 = M3;
    m4 = M4;
    n += o.n;
}

double Moments::skewness() const
{
    if (n < 2 || m2 <= 0) return 0;
    return std::sqrt(static_cast<double>(n)) * m3 / std::pow(m2, 1.5);
}

EstimatorResult mean_estimate(const Moments& mo, std::uint64_t seed)
{
    EstimatorResult r;
    r.estimate = mo.mean;
    r.n = mo.n;
    r.seed = seed;
    r.half_width = mo.n > 0 ? kZ95 * std::sqrt(mo.variance() / static_cast<double>(mo.n)) : INFINITY;
    r.flagged = mo.n < 100 || std::abs(mo.skewness()) > 0.5 * std::sqrt(static_cast<double>(mo.n));
    return r;
}

EstimatorResult variance_estimate(const Moments& mo, std::uint64_t seed)
{
    EstimatorResult r;
    double n = static_cast<double>(mo.n);
    r.estimate = mo.variance();
    r.n = mo.n;
    r.seed = seed;
    double mu4 = mo.n > 0 ? mo.m4 / n : 0, s2 = mo.n > 0 ? mo.m2 / n : 0;
    r.half_width = mo.n > 1 ? kZ95 * std::sqrt(std::max(0.0, mu4 - s2 * s2) / n) : INFINITY;
    r.flagged = mo.n < 100;
    return r;
}

std::vector<Moments> walk_batch(const WalkEngine& w, int v, const StopRule& stop, long n, std::uint64_t seed,
                                int n_obs, const std::function<void(const WalkEnd&, double*)>& observe,
                                const WalkOptions& opt, int watch)
{
    long nblocks = (n + kBlock - 1) / kBlock;
    std::vector<std::vector<Moments>> blocks(nblocks, std::vector<Moments>(n_obs));
    // validate the start once so no exception escapes the parallel region
    if (n > 0) {
        CounterRng probe(seed, 0);
        w.run(v, StopRule::fixed_time(0), probe);
        if (!stop.inside.empty() && !stop.inside[v])
            throw Error(Errc::StartOnBoundary, "walk must start inside the stopping region");
    }
    auto body = [&](long b) {
        std::vector<double> obs(n_obs);
        for (long i = b * kBlock; i < std::min(n, (b + 1) * kBlock); ++i) {
            CounterRng rng(seed, static_cast<std::uint64_t>(i));
            WalkEnd e = w.run(v, stop, rng, watch);
            observe(e, obs.data());
            for (int k = 0; k < n_obs; ++k) blocks[b][k].add(obs[k]);
        }
    };
    if (opt.parallel) {
#pragma omp parallel for schedule(dynamic, 1)
        for (long b = 0; b < nblocks; ++b) body(b);
    } else {
        for (long b = 0; b < nblocks; ++b) body(b);
    }
    std::vector<Moments> out(n_obs);
    for (const auto& blk : blocks)
        for (int k = 0; k < n_obs; ++k) out[k].merge(blk[k]);
    return out;
}

std::vector<EstimatorResult> variance_ellipticity(const WalkEngine& w, int v, double t,
                                                  const std::vector<double>& thetas, long n, std::uint64_t seed,
                                                  const WalkOptions& opt)
{
    if (w.boundary_distance(v) < std::sqrt(t))
        throw Error(Errc::TooCloseToBoundary, "start closer than sqrt(t) to the boundary");
    cplx x0 = w.positions()[v];
    const auto& H = w.positions();
    int k = static_cast<int>(thetas.size());
    auto mo = walk_batch(w, v, StopRule::fixed_time(t), n, seed, k, [&](const WalkEnd& e, double* o) {
        cplx d = H[e.vertex] - x0;
        for (int j = 0; j < k; ++j) o[j] = (std::polar(1.0, thetas[j]) * d).real();
    }, opt);
    std::vector<EstimatorResult> out;
    for (const auto& m : mo) out.push_back(variance_estimate(m, seed));
    return out;
}

EstimatorResult crossing_probability(const WalkEngine& w, int v, double r, double theta0, long n,
                                     std::uint64_t seed, const WalkOptions& opt)
{
    if (w.boundary_distance(v) <= r) throw Error(Errc::TooCloseToBoundary, "exit circle leaves the graph");
    const auto& H = w.positions();
    cplx x0 = H[v];
    std::vector<char> inside(H.size());
    for (std::size_t u = 0; u < H.size(); ++u) inside[u] = std::abs(H[u] - x0) < r;
    auto mo = walk_batch(w, v, StopRule::exit_region(std::move(inside)), n, seed, 1, [&](const WalkEnd& e, double* o) {
        double d = std::remainder(std::arg(H[e.vertex] - x0) - theta0, 2 * M_PI);
        o[0] = (d >= -M_PI / 4 && d < M_PI / 4) ? 1.0 : 0.0;
    }, opt);
    auto res = mean_estimate(mo[0], seed);
    double p = res.estimate;
    res.flagged = res.flagged || static_cast<double>(res.n) * p * (1 - p) < 10;
    return res;
}

EstimatorResult occupation_green(const WalkEngine& w, const DomainSlice& s, int v1, int v2, long n,
                                 std::uint64_t seed, const WalkOptions& opt)
{
    if (!s.interior[v1]) throw Error(Errc::StartOnBoundary, "start outside the slice interior");
    if (!s.interior[v2]) {
        EstimatorResult r;
        r.n = n;
        r.seed = seed;
        return r;
    }
    double mu2 = w.mu(v2);
    auto mo = walk_batch(w, v1, StopRule::exit_region(s.interior), n, seed, 1,
                         [&](const WalkEnd& e, double* o) { o[0] = e.watched / mu2; }, opt, v2);
    return mean_estimate(mo[0], seed);
}

EstimatorResult exit_expectation(const WalkEngine& w, const DomainSlice& s, int v, const Field& g, long n,
                                 std::uint64_t seed, const WalkOptions& opt)
{
    for (int b : s.boundary_list)
        if (!valued(g, b)) throw Error(Errc::MissingNeighborValue, "no boundary value at a slice boundary vertex");
    auto mo = walk_batch(w, v, StopRule::exit_region(s.interior), n, seed, 1,
                         [&](const WalkEnd& e, double* o) { o[0] = g[e.vertex]; }, opt);
    return mean_estimate(mo[0], seed);
}

MartingaleCheck martingale_check(const WalkEngine& w, int v, const StopRule& stop, long n, std::uint64_t seed,
                                 const WalkOptions& opt)
{
    const auto& H = w.positions();
    auto mo = walk_batch(w, v, stop, n, seed, 3, [&](const WalkEnd& e, double* o) {
        o[0] = H[e.vertex].real();
        o[1] = H[e.vertex].imag();
        o[2] = std::norm(H[e.vertex]) - e.time;
    }, opt);
    return {mean_estimate(mo[0], seed), mean_estimate(mo[1], seed), mean_estimate(mo[2], seed), H[v]};
}

} // namespace tma
