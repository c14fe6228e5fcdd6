#include "tma/regularity.hpp"
#include "tma/rng.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace tma {

namespace {

struct Extreme {
    double lo = INFINITY, hi = -INFINITY;
    long ilo = -1, ihi = -1;
    long count = 0;

    void take(long i, double a, double b)
    {
        ++count;
        if (a < lo || (a == lo && i < ilo)) {
            lo = a;
            ilo = i;
        }
        if (b > hi || (b == hi && i < ihi)) {
            hi = b;
            ihi = i;
        }
    }
    void merge(const Extreme& o)
    {
        count += o.count;
        if (o.ilo >= 0 && (o.lo < lo || (o.lo == lo && o.ilo < ilo))) {
            lo = o.lo;
            ilo = o.ilo;
        }
        if (o.ihi >= 0 && (o.hi > hi || (o.hi == hi && o.ihi < ihi))) {
            hi = o.hi;
            ihi = o.ihi;
        }
    }
};

// eval(i, a, b) -> false to skip sample i; min of a and max of b are tracked.
template <class F>
Extreme scan_serial(long n, const F& eval)
{
    Extreme e;
    for (long i = 0; i < n; ++i) {
        double a, b;
        if (eval(i, a, b)) e.take(i, a, b);
    }
    return e;
}

template <class F>
Extreme scan_omp(long n, const F& eval)
{
    Extreme total;
#pragma omp parallel
    {
        Extreme loc;
#pragma omp for schedule(static)
        for (long i = 0; i < n; ++i) {
            double a, b;
            if (eval(i, a, b)) loc.take(i, a, b);
        }
#pragma omp critical
        total.merge(loc);
    }
    return total;
}

template <class F>
Extreme scan(long n, bool parallel, const F& eval)
{
    return parallel ? scan_omp(n, eval) : scan_serial(n, eval);
}

void bbox(const Omega& o, cplx& lo, cplx& hi)
{
    if (o.kind == Omega::Kind::Disc) {
        lo = o.centre - cplx(o.radius, o.radius);
        hi = o.centre + cplx(o.radius, o.radius);
        return;
    }
    lo = hi = o.poly[0];
    for (cplx p : o.poly) {
        lo = {std::min(lo.real(), p.real()), std::min(lo.imag(), p.imag())};
        hi = {std::max(hi.real(), p.real()), std::max(hi.imag(), p.imag())};
    }
}

// Segment i: length base 2^(i / per), start and direction from Halton streams.
struct SegmentSampler {
    cplx lo, span;
    double base;
    int per;
    std::uint64_t offset;

    SegmentSampler(const Omega& region, double base_len, const ScanOptions& opt) : base(base_len), per(opt.per_length)
    {
        cplx hi;
        bbox(region, lo, hi);
        span = hi - lo;
        offset = 1 + (opt.seed - 1) * static_cast<std::uint64_t>(per);
    }
    void operator()(long i, cplx& w1, cplx& w2) const
    {
        long k = i / per;
        std::uint64_t q = offset + static_cast<std::uint64_t>(i % per);
        w1 = lo + cplx(halton(q, 2) * span.real(), halton(q, 3) * span.imag());
        w2 = w1 + std::polar(base * std::ldexp(1.0, static_cast<int>(k)), 2 * M_PI * halton(q, 5));
    }
};

int length_count(const Omega& region, double base, int max_lengths)
{
    int k = 1;
    while (k < max_lengths && base * std::ldexp(1.0, k) <= region.diameter()) ++k;
    return k;
}

PropertyReport finish(PropertyReport r, const Extreme& e, const SegmentSampler& smp)
{
    if (e.count == 0) throw Error(Errc::EmptySampleSet, "no admissible segment in the region");
    r.samples = e.count;
    r.min_value = e.lo;
    r.max_value = e.hi;
    cplx a, b;
    smp(e.ilo, a, b);
    r.min_witness = {{a, b}, e.lo};
    smp(e.ihi, a, b);
    r.max_witness = {{a, b}, e.hi};
    return r;
}

} // namespace

double conv_ratio(const GradientMap& gm, cplx w1, cplx w2)
{
    return (gm.phi(w2) - 2 * gm.phi(0.5 * (w1 + w2)) + gm.phi(w1)) / std::norm(w2 - w1);
}

cplx lip_quotient(const GradientMap& gm, cplx w1, cplx w2)
{
    return (gm.psi(w2) - gm.psi(w1)) / (w2 - w1);
}

double lipkd_ratio(const TChart& chart, cplx z1, cplx z2)
{
    return std::abs(chart.origami(z2) - chart.origami(z1)) / std::abs(z2 - z1);
}

PropertyReport check_conv(const GradientMap& gm, const Omega& region, double delta, double C, const ScanOptions& opt)
{
    SegmentSampler smp(region, C * delta, opt);
    long n = static_cast<long>(length_count(region, C * delta, opt.max_lengths)) * opt.per_length;
    auto ok = [&](cplx w) { return region.contains(w) && gm.face(w) >= 0; };
    Extreme e = scan(n, opt.parallel, [&](long i, double& a, double& b) {
        cplx w1, w2;
        smp(i, w1, w2);
        if (!ok(w1) || !ok(w2) || !ok(0.5 * (w1 + w2))) return false;
        a = b = conv_ratio(gm, w1, w2);
        return true;
    });
    PropertyReport r;
    r.property = "conv";
    r.delta = delta;
    r.C = C;
    r.threshold = opt.threshold;
    r = finish(std::move(r), e, smp);
    r.estimate = std::min(r.min_value, 1 / r.max_value);
    r.pass = r.estimate > 0 && r.estimate >= opt.threshold;
    return r;
}

PropertyReport check_lip(const GradientMap& gm, const Omega& region, double delta, double C, const ScanOptions& opt)
{
    SegmentSampler smp(region, C * delta, opt);
    long n = static_cast<long>(length_count(region, C * delta, opt.max_lengths)) * opt.per_length;
    auto ok = [&](cplx w) { return region.contains(w) && gm.face(w) >= 0; };
    Extreme e = scan(n, opt.parallel, [&](long i, double& a, double& b) {
        cplx w1, w2;
        smp(i, w1, w2);
        if (!ok(w1) || !ok(w2)) return false;
        cplx q = lip_quotient(gm, w1, w2);
        a = q.real();
        b = std::abs(q);
        return true;
    });
    PropertyReport r;
    r.property = "lip";
    r.delta = delta;
    r.C = C;
    r.threshold = opt.threshold;
    r = finish(std::move(r), e, smp);
    r.estimate = std::min(r.min_value, 1 / r.max_value);
    r.pass = r.estimate > 0 && r.estimate >= opt.threshold;
    return r;
}

PropertyReport check_lip_kdelta(const TChart& chart, const Omega& region, double delta, const ScanOptions& opt)
{
    if (chart.faces.size() == 0) throw Error(Errc::NonInjectiveChart, "the t-surface has no two-dimensional chart");
    // the scanned region must lie in a single-sheeted part of the chart
    cplx lo, hi;
    bbox(region, lo, hi);
    for (std::uint64_t q = 1; q <= 4 * static_cast<std::uint64_t>(opt.per_length); ++q) {
        cplx z = lo + cplx(halton(q, 7) * (hi - lo).real(), halton(q, 11) * (hi - lo).imag());
        if (!region.contains(z)) continue;
        if (chart.faces.locate(z) < 0) throw Error(Errc::NonInjectiveChart, "region is not covered by the chart");
        if (chart.faces.locate_interior(z).size() > 1)
            throw Error(Errc::NonInjectiveChart, "T is not injective on the scanned region");
    }
    SegmentSampler smp(region, delta, opt);
    long n = static_cast<long>(length_count(region, delta, opt.max_lengths)) * opt.per_length;
    auto face = [&](cplx z) {
        if (!region.contains(z)) return -1;
        return chart.faces.locate(z);
    };
    Extreme e = scan(n, opt.parallel, [&](long i, double& a, double& b) {
        cplx z1, z2;
        smp(i, z1, z2);
        int f1 = face(z1), f2 = face(z2);
        if (f1 < 0 || f2 < 0) return false;
        a = b = std::abs(chart.origami(f2, z2) - chart.origami(f1, z1)) / std::abs(z2 - z1);
        return true;
    });
    PropertyReport r;
    r.property = "lipkd";
    r.delta = delta;
    r.C = 1;
    r.threshold = opt.threshold > 0 ? opt.threshold : 1.0;
    r = finish(std::move(r), e, smp);
    r.estimate = r.max_value;
    r.pass = r.estimate < r.threshold;
    return r;
}

MeasureTable measures(const PlanarMap& m, const CornerGraph& cg, const TSurface& ts, const std::vector<cplx>& H,
                      int directions)
{
    int n = m.n_vertices;
    MeasureTable t;
    t.mu.assign(n, 0);
    t.mu_alpha.assign(n, std::vector<double>(directions, 0));
    std::vector<std::vector<double>> area(n, std::vector<double>(directions, 0));
    for (int k = 0; k < directions; ++k) t.alphas.push_back(2 * M_PI * k / directions);
    for (int e = 0; e < m.n_edges(); ++e) {
        const auto& ed = m.edges[e];
        cplx dv = H[ed.v] - H[ed.u];
        double w = ed.c * std::norm(dv);
        t.mu[ed.u] += w;
        t.mu[ed.v] += w;
        const auto& q = cg.white[e];
        std::vector<cplx> poly(4);
        for (int i = 0; i < 4; ++i) poly[i] = ts.T[q[i]];
        double aT = std::abs(polygon_area(poly));
        if (w > 0) t.area_defect = std::max(t.area_defect, std::abs(w - 4 * aT) / w);
        for (int k = 0; k < directions; ++k) {
            cplx a = std::polar(1.0, t.alphas[k]);
            double re = (std::conj(a) * dv).real();
            t.mu_alpha[ed.u][k] += ed.c * re * re;
            t.mu_alpha[ed.v][k] += ed.c * re * re;
            for (int i = 0; i < 4; ++i) poly[i] = ts.T[q[i]] - a * a * ts.O[q[i]];
            double aa = std::abs(polygon_area(poly));
            area[ed.u][k] += aa;
            area[ed.v][k] += aa;
        }
    }
    for (int v = 0; v < n; ++v) {
        for (int k = 0; k < directions; ++k) {
            if (t.mu_alpha[v][k] > t.mu[v] * (1 + 1e-12)) t.dominated = false;
            if (!m.boundary[v] && t.mu[v] > 0)
                t.alpha_defect = std::max(t.alpha_defect, std::abs(t.mu_alpha[v][k] - area[v][k]) / t.mu[v]);
        }
    }
    return t;
}

namespace {

// Uniform buckets over vertex positions for radius queries.
class PointGrid {
public:
    PointGrid(const std::vector<cplx>& pts, double cell) : pts_(pts), cell_(cell)
    {
        lo_ = hi_ = pts.empty() ? cplx(0, 0) : pts[0];
        for (cplx p : pts) {
            lo_ = {std::min(lo_.real(), p.real()), std::min(lo_.imag(), p.imag())};
            hi_ = {std::max(hi_.real(), p.real()), std::max(hi_.imag(), p.imag())};
        }
        nx_ = std::max(1, static_cast<int>((hi_.real() - lo_.real()) / cell) + 1);
        ny_ = std::max(1, static_cast<int>((hi_.imag() - lo_.imag()) / cell) + 1);
        cells_.resize(static_cast<std::size_t>(nx_) * ny_);
        for (std::size_t i = 0; i < pts.size(); ++i) cells_[index(pts[i])].push_back(static_cast<int>(i));
    }
    template <class F>
    void within(cplx x, double r, const F& f) const
    {
        int i0 = std::max(0, static_cast<int>((x.real() - r - lo_.real()) / cell_));
        int i1 = std::min(nx_ - 1, static_cast<int>((x.real() + r - lo_.real()) / cell_));
        int j0 = std::max(0, static_cast<int>((x.imag() - r - lo_.imag()) / cell_));
        int j1 = std::min(ny_ - 1, static_cast<int>((x.imag() + r - lo_.imag()) / cell_));
        for (int i = i0; i <= i1; ++i)
            for (int j = j0; j <= j1; ++j)
                for (int k : cells_[static_cast<std::size_t>(j) * nx_ + i])
                    if (std::abs(pts_[k] - x) < r) f(k);
    }

private:
    std::size_t index(cplx p) const
    {
        int i = std::min(nx_ - 1, static_cast<int>((p.real() - lo_.real()) / cell_));
        int j = std::min(ny_ - 1, static_cast<int>((p.imag() - lo_.imag()) / cell_));
        return static_cast<std::size_t>(j) * nx_ + i;
    }
    const std::vector<cplx>& pts_;
    double cell_;
    cplx lo_, hi_;
    int nx_, ny_;
    std::vector<std::vector<int>> cells_;
};

} // namespace

PropertyReport check_rw_property(const WalkEngine& w, const Omega& region, double delta, double C,
                                 const RwOptions& opt)
{
    if (opt.walk_budget <= 0) throw Error(Errc::BudgetTooSmall, "walk budget must be positive");
    const auto& m = w.map();
    const auto& H = w.positions();
    double r = C * delta;
    std::vector<int> cand;
    for (int v = 0; v < m.n_vertices; ++v)
        if (!m.boundary[v] && region.contains(H[v]) && region.boundary_distance(H[v]) >= r &&
            w.boundary_distance(v) > r)
            cand.push_back(v);
    if (cand.empty()) throw Error(Errc::EmptySampleSet, "no vertex in the C delta interior of the region");

    PropertyReport rep;
    rep.property = "rw";
    rep.delta = delta;
    rep.C = C;
    rep.threshold = opt.threshold;

    // (b) measure comparability
    PointGrid grid(H, r);
    double bmin = INFINITY, bmax = -INFINITY;
    int vmin = -1, vmax = -1;
    for (int v : cand) {
        double s = 0;
        grid.within(H[v], r, [&](int k) { s += w.mu(k); });
        s /= delta * delta;
        if (s < bmin) bmin = s, vmin = v;
        if (s > bmax) bmax = s, vmax = v;
    }

    // (a) exit variances
    int nc = std::min<int>(opt.centres, static_cast<int>(cand.size()));
    double amin = INFINITY, half = 0;
    int awit = -1, adir = 0;
    WalkOptions wo{opt.parallel};
    for (int c = 0; c < nc; ++c) {
        int v = cand[(static_cast<std::size_t>(c) * cand.size()) / nc + cand.size() / (2 * nc)];
        std::vector<char> inside(H.size());
        for (std::size_t u = 0; u < H.size(); ++u) inside[u] = std::abs(H[u] - H[v]) < r;
        auto mo = walk_batch(w, v, StopRule::exit_region(std::move(inside)), opt.walk_budget,
                             opt.seed + static_cast<std::uint64_t>(c), opt.directions,
                             [&](const WalkEnd& e, double* o) {
                                 for (int k = 0; k < opt.directions; ++k)
                                     o[k] = (std::polar(1.0, -2 * M_PI * k / opt.directions) * H[e.vertex]).real();
                             }, wo);
        for (int k = 0; k < opt.directions; ++k) {
            auto est = variance_estimate(mo[k], opt.seed);
            if (!(est.half_width <= opt.max_rel_ci * est.estimate))
                throw Error(Errc::BudgetTooSmall, "exit-variance confidence interval wider than requested");
            double val = est.estimate / (delta * delta);
            if (val < amin) {
                amin = val;
                half = est.half_width / (delta * delta);
                awit = v;
                adir = k;
            }
        }
    }
    rep.min_value = std::min(amin, bmin);
    rep.max_value = bmax;
    rep.ci_half_width = half;
    rep.samples = static_cast<long>(nc) * opt.walk_budget;
    rep.min_witness = {{H[awit], H[awit] + std::polar(r, 2 * M_PI * adir / opt.directions)}, amin};
    rep.max_witness = {{H[vmax]}, bmax};
    rep.details = {{"var_min", amin}, {"mu_ball_min", bmin}, {"mu_ball_max", bmax},
                   {"mu_ball_min_x", H[vmin].real()}, {"mu_ball_min_y", H[vmin].imag()}};
    rep.estimate = std::min(amin, std::min(bmin, 1 / bmax));
    rep.pass = rep.estimate > 0 && rep.estimate >= opt.threshold;
    return rep;
}

double fan_inradius(const std::vector<cplx>& face)
{
    std::vector<cplx> p = drop_collinear(face);
    double area = p.size() >= 3 ? polygon_area(p) : 0;
    double diam = 0;
    for (cplx a : face)
        for (cplx b : face) diam = std::max(diam, std::abs(a - b));
    if (!(std::abs(area) > 1e-14 * diam * diam)) throw Error(Errc::DegenerateFace, "face has zero area");
    if (area < 0) std::reverse(p.begin(), p.end());
    Fan f = best_fan(p);
    return f.apex < 0 ? 0.0 : f.min_inradius;
}

bool face_fatness(const std::vector<cplx>& face, double rho)
{
    return fan_inradius(face) >= rho;
}

namespace {

double cluster_diameter(std::vector<cplx> p)
{
    std::sort(p.begin(), p.end(), [](cplx a, cplx b) { return a.real() < b.real() || (a.real() == b.real() && a.imag() < b.imag()); });
    std::vector<cplx> hull;
    auto build = [&](auto first, auto last) {
        std::size_t base = hull.size();
        for (auto it = first; it != last; ++it) {
            while (hull.size() >= base + 2 && cross(hull.back() - hull[hull.size() - 2], *it - hull.back()) <= 0)
                hull.pop_back();
            hull.push_back(*it);
        }
        hull.pop_back();
    };
    build(p.begin(), p.end());
    build(p.rbegin(), p.rend());
    if (hull.empty()) hull = p;
    double d = 0;
    for (cplx a : hull)
        for (cplx b : hull) d = std::max(d, std::abs(a - b));
    return d;
}

} // namespace

PropertyReport exp_fat_check(const PlanarMap& m, const std::vector<cplx>& H, const Omega& U, double delta,
                             double delta_prime)
{
    double rho = delta * std::exp(-delta_prime / delta);
    std::vector<int> parent(m.n_vertices);
    std::iota(parent.begin(), parent.end(), 0);
    auto find = [&](int x) {
        while (parent[x] != x) x = parent[x] = parent[parent[x]];
        return x;
    };
    std::vector<char> thin_vertex(m.n_vertices, 0);
    int thin = 0;
    for (int f = 0; f < m.n_faces(); ++f) {
        if (f == m.outer_face) continue;
        std::vector<cplx> poly;
        for (int v : m.faces[f]) poly.push_back(H[v]);
        double ir = 0;
        try {
            ir = fan_inradius(poly);
        } catch (const Error&) {
            ir = 0;
        }
        if (ir >= rho) continue;
        ++thin;
        for (int v : m.faces[f]) {
            thin_vertex[v] = 1;
            parent[find(v)] = find(m.faces[f][0]);
        }
    }
    std::vector<std::vector<int>> comps(m.n_vertices);
    for (int v = 0; v < m.n_vertices; ++v)
        if (thin_vertex[v]) comps[find(v)].push_back(v);
    PropertyReport r;
    r.property = "expfat";
    r.delta = delta;
    r.threshold = delta_prime;
    r.min_value = r.max_value = 0;
    int counted = 0;
    for (const auto& c : comps) {
        if (c.empty()) continue;
        bool inside = std::all_of(c.begin(), c.end(), [&](int v) { return U.contains(H[v]); });
        if (!inside) continue;
        ++counted;
        std::vector<cplx> pts;
        for (int v : c) pts.push_back(H[v]);
        double d = cluster_diameter(pts);
        if (d > r.max_value) {
            r.max_value = d;
            r.max_witness = {pts, d};
        }
    }
    r.estimate = r.max_value;
    r.samples = counted;
    r.pass = r.max_value < delta_prime;
    r.details = {{"rho", rho}, {"thin_faces", thin}, {"clusters", counted}};
    return r;
}

} // namespace tma
