#include "tma/embedding.hpp"

#include "tma/laplacian.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <queue>

namespace tma {

HarmonicEmbedding solve_tutte(const PlanarMap& m, const std::vector<std::pair<int, cplx>>& boundary,
                              const TutteOptions& opt)
{
    HarmonicEmbedding e;
    e.H.assign(m.n_vertices, cplx(0, 0));
    e.fixed.assign(m.n_vertices, 0);
    for (const auto& [v, z] : boundary) {
        if (v < 0 || v >= m.n_vertices)
            throw Error(Errc::MalformedInput, "boundary position for unknown vertex " + std::to_string(v), "boundary", v);
        e.H[v] = z;
        e.fixed[v] = 1;
    }

    std::vector<char> unknown(m.n_vertices);
    for (int v = 0; v < m.n_vertices; ++v) unknown[v] = !e.fixed[v];
    ReducedSystem s = reduced_laplacian(m, unknown);
    if (s.vertex.empty()) return e;
    if (!anchored(m, s))
        throw Error(Errc::DisconnectedInterior, "an interior component has no fixed neighbour");

    std::vector<double> bx(m.n_vertices), by(m.n_vertices);
    for (int v = 0; v < m.n_vertices; ++v) {
        bx[v] = e.H[v].real();
        by[v] = e.H[v].imag();
    }
    CgOptions co;
    co.tol = opt.tol;
    co.parallel = opt.parallel;
    std::vector<double> x, y;
    auto rx = cg_solve(s.a, reduced_rhs(m, s, bx), x, co);
    auto ry = cg_solve(s.a, reduced_rhs(m, s, by), y, co);
    e.iterations = std::max(rx.iterations, ry.iterations);
    e.solver_residual = std::max(rx.rel_residual, ry.rel_residual);
    if (e.solver_residual > 1e-10)
        throw Error(Errc::SolverDivergence, "relative residual " + std::to_string(e.solver_residual) +
                                                " after " + std::to_string(e.iterations) + " iterations");
    for (std::size_t i = 0; i < s.vertex.size(); ++i) e.H[s.vertex[i]] = cplx(x[i], y[i]);
    e.residual = harmonicity_residual(m, e.H, e.fixed);
    return e;
}

double harmonicity_residual(const PlanarMap& m, const std::vector<cplx>& H, const std::vector<char>& fixed)
{
    double worst = 0;
    for (int v = 0; v < m.n_vertices; ++v) {
        if (fixed[v]) continue;
        cplx s = 0;
        double a = 0;
        for (int k = m.out_ptr[v]; k < m.out_ptr[v + 1]; ++k) {
            int h = m.out_he[k];
            cplx dz = m.conductance(h) * (H[m.target(h)] - H[v]);
            s += dz;
            a += std::abs(dz);
        }
        if (a > 0) worst = std::max(worst, std::abs(s) / a);
    }
    return worst;
}

DualEmbedding dual_embedding(const PlanarMap& m, const DualMap& d, const HarmonicEmbedding& e)
{
    DualEmbedding de;
    const int nd = d.n_vertices();
    de.Hs.assign(nd, cplx(0, 0));
    std::vector<char> seen(nd, 0), tree(m.n_edges(), 0);
    auto inc = [&](int ed) {
        const auto& E = m.edges[ed];
        return cplx(0, 1) * E.c * (e.H[E.v] - e.H[E.u]);
    };
    for (int root = 0; root < nd; ++root) {
        if (seen[root]) continue;
        seen[root] = 1;
        std::queue<int> q;
        q.push(root);
        while (!q.empty()) {
            int a = q.front();
            q.pop();
            for (int ed : d.adj_edges[a]) {
                int b = d.left[ed] == a ? d.right[ed] : d.left[ed];
                if (seen[b]) continue;
                seen[b] = 1;
                tree[ed] = 1;
                de.Hs[b] = d.left[ed] == b ? de.Hs[a] + inc(ed) : de.Hs[a] - inc(ed);
                q.push(b);
            }
        }
    }
    double lo_x = 0, hi_x = 0, lo_y = 0, hi_y = 0;
    for (cplx z : de.Hs) {
        lo_x = std::min(lo_x, z.real());
        hi_x = std::max(hi_x, z.real());
        lo_y = std::min(lo_y, z.imag());
        hi_y = std::max(hi_y, z.imag());
    }
    const double scale = std::max(std::hypot(hi_x - lo_x, hi_y - lo_y), 1e-300);
    for (int ed = 0; ed < m.n_edges(); ++ed) {
        if (tree[ed]) continue;
        double defect = std::abs(de.Hs[d.left[ed]] - de.Hs[d.right[ed]] - inc(ed));
        de.closure_defect = std::max(de.closure_defect, defect / scale);
    }
    if (de.closure_defect > 1e-8)
        throw Error(Errc::ClosureDefect, "dual increments fail to close: relative defect " +
                                             std::to_string(de.closure_defect));
    return de;
}

PiecewisePotential potential(const PlanarMap& m, const DualMap& d, const HarmonicEmbedding& e,
                             const DualEmbedding& de)
{
    PiecewisePotential p;
    p.Phi.assign(m.n_vertices, 0.0);
    std::vector<char> seen(m.n_vertices, 0), tree(m.n_edges(), 0);
    auto inc_left = [&](int h) {
        return (std::conj(de.Hs[d.half_edge_dual[h]]) * (e.H[m.target(h)] - e.H[m.origin(h)])).real();
    };
    double scale = 0;
    for (int ed = 0; ed < m.n_edges(); ++ed) {
        int h = 2 * ed;
        double a = inc_left(h);
        double b = -inc_left(h + 1);
        double mag = std::abs(e.H[m.target(h)] - e.H[m.origin(h)]) *
                     std::max(std::abs(de.Hs[d.left[ed]]), std::abs(de.Hs[d.right[ed]]));
        scale = std::max(scale, mag);
        p.expression_gap = std::max(p.expression_gap, std::abs(a - b));
    }
    for (int root = 0; root < m.n_vertices; ++root) {
        if (seen[root]) continue;
        seen[root] = 1;
        std::queue<int> q;
        q.push(root);
        while (!q.empty()) {
            int a = q.front();
            q.pop();
            for (int k = m.out_ptr[a]; k < m.out_ptr[a + 1]; ++k) {
                int h = m.out_he[k];
                int b = m.target(h);
                if (seen[b]) continue;
                seen[b] = 1;
                tree[h >> 1] = 1;
                p.Phi[b] = p.Phi[a] + inc_left(h);
                q.push(b);
            }
        }
    }
    for (int ed = 0; ed < m.n_edges(); ++ed) {
        if (tree[ed]) continue;
        int h = 2 * ed;
        double defect = std::abs(p.Phi[m.target(h)] - p.Phi[m.origin(h)] - inc_left(h));
        p.closure_defect = std::max(p.closure_defect, defect);
    }
    if (scale > 0 && p.expression_gap > 1e-8 * scale)
        throw Error(Errc::InconsistentIncrements, "left and right face increments differ by " +
                                                      std::to_string(p.expression_gap));
    p.grad.resize(d.n_inner);
    p.offset.resize(d.n_inner);
    for (int k = 0; k < d.n_inner; ++k) {
        const auto& cyc = m.faces[d.inner_face[k]];
        cplx g = de.Hs[k];
        p.grad[k] = g;
        p.offset[k] = p.Phi[cyc[0]] - (std::conj(g) * e.H[cyc[0]]).real();
        for (int v : cyc) {
            double fit = (std::conj(g) * e.H[v]).real() + p.offset[k];
            p.face_fit_defect = std::max(p.face_fit_defect, std::abs(fit - p.Phi[v]));
        }
    }
    return p;
}

// ---------------------------------------------------------------- locator

PolygonLocator::PolygonLocator(std::vector<std::vector<cplx>> polys, double rel_tol) : polys_(std::move(polys))
{
    if (polys_.empty()) return;
    double x0 = 1e300, y0 = 1e300, x1 = -1e300, y1 = -1e300;
    std::vector<double> diam;
    diam.reserve(polys_.size());
    for (const auto& p : polys_) {
        double a0 = 1e300, b0 = 1e300, a1 = -1e300, b1 = -1e300;
        for (cplx z : p) {
            a0 = std::min(a0, z.real());
            a1 = std::max(a1, z.real());
            b0 = std::min(b0, z.imag());
            b1 = std::max(b1, z.imag());
        }
        x0 = std::min(x0, a0);
        x1 = std::max(x1, a1);
        y0 = std::min(y0, b0);
        y1 = std::max(y1, b1);
        diam.push_back(std::hypot(a1 - a0, b1 - b0));
    }
    lo_ = cplx(x0, y0);
    hi_ = cplx(x1, y1);
    const double span = std::max(std::hypot(x1 - x0, y1 - y0), 1e-300);
    tol_ = rel_tol * span;
    std::nth_element(diam.begin(), diam.begin() + diam.size() / 2, diam.end());
    cell_ = std::max(diam[diam.size() / 2], span / 2048.0);
    if (!(cell_ > 0)) cell_ = span;
    nx_ = std::max(1, std::min(2048, static_cast<int>(std::ceil((x1 - x0) / cell_)) + 1));
    ny_ = std::max(1, std::min(2048, static_cast<int>(std::ceil((y1 - y0) / cell_)) + 1));
    buckets_.assign(static_cast<std::size_t>(nx_) * ny_, {});
    for (int i = 0; i < static_cast<int>(polys_.size()); ++i) {
        double a0 = 1e300, b0 = 1e300, a1 = -1e300, b1 = -1e300;
        for (cplx z : polys_[i]) {
            a0 = std::min(a0, z.real());
            a1 = std::max(a1, z.real());
            b0 = std::min(b0, z.imag());
            b1 = std::max(b1, z.imag());
        }
        int i0 = std::clamp(static_cast<int>(std::floor((a0 - tol_ - x0) / cell_)), 0, nx_ - 1);
        int i1 = std::clamp(static_cast<int>(std::floor((a1 + tol_ - x0) / cell_)), 0, nx_ - 1);
        int j0 = std::clamp(static_cast<int>(std::floor((b0 - tol_ - y0) / cell_)), 0, ny_ - 1);
        int j1 = std::clamp(static_cast<int>(std::floor((b1 + tol_ - y0) / cell_)), 0, ny_ - 1);
        for (int jj = j0; jj <= j1; ++jj)
            for (int ii = i0; ii <= i1; ++ii) buckets_[static_cast<std::size_t>(jj) * nx_ + ii].push_back(i);
    }
}

int PolygonLocator::classify(int i, cplx w) const
{
    const auto& p = polys_[i];
    const std::size_t n = p.size();
    int wind = 0;
    for (std::size_t k = 0; k < n; ++k) {
        cplx a = p[k], b = p[(k + 1) % n];
        cplx ab = b - a;
        double len2 = std::norm(ab);
        double t = len2 > 0 ? std::clamp(dotc(w - a, ab) / len2, 0.0, 1.0) : 0.0;
        if (std::abs(w - (a + t * ab)) <= tol_) return 2;
        if (a.imag() <= w.imag()) {
            if (b.imag() > w.imag() && cross(ab, w - a) > 0) ++wind;
        } else if (b.imag() <= w.imag() && cross(ab, w - a) < 0) {
            --wind;
        }
    }
    return wind != 0 ? 1 : 0;
}

std::vector<int> PolygonLocator::locate_all(cplx w) const
{
    std::vector<int> out;
    if (polys_.empty()) return out;
    if (w.real() < lo_.real() - tol_ || w.real() > hi_.real() + tol_ || w.imag() < lo_.imag() - tol_ ||
        w.imag() > hi_.imag() + tol_)
        return out;
    int ii = std::clamp(static_cast<int>(std::floor((w.real() - lo_.real()) / cell_)), 0, nx_ - 1);
    int jj = std::clamp(static_cast<int>(std::floor((w.imag() - lo_.imag()) / cell_)), 0, ny_ - 1);
    for (int i : buckets_[static_cast<std::size_t>(jj) * nx_ + ii])
        if (classify(i, w) > 0) out.push_back(i);
    std::sort(out.begin(), out.end());
    return out;
}

std::vector<int> PolygonLocator::locate_interior(cplx w) const
{
    std::vector<int> out;
    for (int i : locate_all(w))
        if (classify(i, w) == 1) out.push_back(i);
    return out;
}

int PolygonLocator::locate(cplx w) const
{
    auto all = locate_all(w);
    return all.empty() ? -1 : all.front();
}

// ------------------------------------------------------------ gradient map

int GradientMap::face(cplx w) const { return faces.locate(w); }

cplx GradientMap::psi(cplx w) const
{
    int f = faces.locate(w);
    if (f < 0)
        throw Error(Errc::PointOutsideCoveredRegion, "point (" + std::to_string(w.real()) + ", " +
                                                         std::to_string(w.imag()) + ") lies in no face");
    return values[f];
}

double GradientMap::phi(cplx w) const
{
    int f = faces.locate(w);
    if (f < 0)
        throw Error(Errc::PointOutsideCoveredRegion, "point (" + std::to_string(w.real()) + ", " +
                                                         std::to_string(w.imag()) + ") lies in no face");
    return (std::conj(values[f]) * w).real() + offset[f];
}

GradientMap gradient_map(const PlanarMap& m, const DualMap& d, const HarmonicEmbedding& e,
                         const PiecewisePotential& p)
{
    std::vector<std::vector<cplx>> polys(d.n_inner);
    for (int k = 0; k < d.n_inner; ++k)
        for (int v : m.faces[d.inner_face[k]]) polys[k].push_back(e.H[v]);
    GradientMap g;
    g.faces = PolygonLocator(std::move(polys));
    g.values = p.grad;
    g.offset = p.offset;
    return g;
}

// -------------------------------------------------------------- t-surface

TSurface t_surface(const PlanarMap& m, const DualMap& d, const CornerGraph& cg, const HarmonicEmbedding& e,
                   const DualEmbedding& de)
{
    (void)d;
    TSurface ts;
    const int nc = cg.n_corners();
    ts.T.resize(nc);
    ts.O.resize(nc);
    for (int c = 0; c < nc; ++c) {
        cplx h = e.H[cg.corner_vertex[c]];
        cplx hs = de.Hs[cg.corner_dual[c]];
        ts.T[c] = 0.5 * (h + hs);
        ts.O[c] = 0.5 * (std::conj(hs) - std::conj(h));
    }
    ts.eta_white.resize(m.n_edges());
    for (int ed = 0; ed < m.n_edges(); ++ed) {
        cplx dz = e.H[m.edges[ed].v] - e.H[m.edges[ed].u];
        double len = std::abs(dz);
        ts.eta_white[ed] = len > 0 ? cplx(0, 1) * std::conj(dz) / len : cplx(1, 0);
    }
    return ts;
}

TSurfaceCheck check_t_surface(const PlanarMap& m, const DualMap& d, const CornerGraph& cg,
                              const HarmonicEmbedding& e, const TSurface& ts)
{
    (void)d;
    TSurfaceCheck r;
    auto edge_check = [&](int a, int b, auto&& predicted, double& slot) {
        cplx dT = ts.T[b] - ts.T[a];
        cplx dO = ts.O[b] - ts.O[a];
        double s = std::abs(dT);
        if (s == 0) return;
        r.dT_dO = std::max(r.dT_dO, std::abs(std::abs(dT) - std::abs(dO)) / s);
        slot = std::max(slot, std::abs(dO - predicted(dT)) / s);
    };
    for (int ed = 0; ed < m.n_edges(); ++ed) {
        const auto& w = cg.white[ed];
        cplx eta2 = ts.eta_white[ed] * ts.eta_white[ed];
        for (int i = 0; i < 4; ++i)
            edge_check(w[i], w[(i + 1) % 4], [&](cplx dT) { return eta2 * dT; }, r.white_origami);
        std::vector<cplx> quad{ts.T[w[0]], ts.T[w[1]], ts.T[w[2]], ts.T[w[3]]};
        double area = polygon_area(quad);
        cplx dz = e.H[m.edges[ed].v] - e.H[m.edges[ed].u];
        double lhs = m.edges[ed].c * std::norm(dz);
        if (lhs > 0) r.area_identity = std::max(r.area_identity, std::abs(lhs - 4 * area) / lhs);
        for (int i = 0; i < 4; ++i) {
            cplx s1 = quad[(i + 1) % 4] - quad[i];
            cplx s2 = quad[(i + 2) % 4] - quad[(i + 1) % 4];
            double n = std::abs(s1) * std::abs(s2);
            if (n > 0 && std::abs(dotc(s1, s2)) > 1e-9 * n) r.white_rectangles = false;
        }
    }
    for (const auto& b : cg.black) {
        cplx eta = TSurface::eta_black(b.dual);
        cplx ceta2 = std::conj(eta) * std::conj(eta);
        const std::size_t n = b.corners.size();
        const std::size_t steps = b.open ? n - 1 : n;
        for (std::size_t i = 0; i < steps; ++i)
            edge_check(b.corners[i], b.corners[(i + 1) % n], [&](cplx dT) { return ceta2 * std::conj(dT); },
                       r.black_origami);
        if (!b.dual)
            for (int c : b.corners)
                r.w_collapse = std::max(r.w_collapse, std::abs(ts.T[c] - std::conj(ts.O[c]) - e.H[b.id]));
    }
    return r;
}

// ------------------------------------------------------------------ chart

cplx TChart::origami(int f, cplx z) const
{
    cplx dz = z - T0[f];
    return O0[f] + coef[f] * (antilinear[f] ? std::conj(dz) : dz);
}

cplx TChart::origami(cplx z) const
{
    int f = faces.locate(z);
    if (f < 0) throw Error(Errc::NonInjectiveChart, "point outside the t-embedding chart");
    return origami(f, z);
}

TChart t_chart(const PlanarMap& m, const CornerGraph& cg, const TSurface& ts)
{
    TChart ch;
    std::vector<std::vector<cplx>> polys;
    auto push = [&](const std::vector<int>& corners, cplx coef, bool anti, int src) {
        std::vector<cplx> p;
        for (int c : corners) p.push_back(ts.T[c]);
        polys.push_back(std::move(p));
        ch.T0.push_back(ts.T[corners[0]]);
        ch.O0.push_back(ts.O[corners[0]]);
        ch.coef.push_back(coef);
        ch.antilinear.push_back(anti ? 1 : 0);
        ch.source.push_back(src);
    };
    for (int ed = 0; ed < m.n_edges(); ++ed) {
        const auto& w = cg.white[ed];
        cplx eta = ts.eta_white[ed];
        push({w[0], w[1], w[2], w[3]}, eta * eta, false, ed);
    }
    for (std::size_t k = 0; k < cg.black.size(); ++k) {
        const auto& b = cg.black[k];
        if (b.open || b.corners.size() < 3) continue;
        push(b.corners, b.dual ? cplx(-1, 0) : cplx(1, 0), true, -1 - static_cast<int>(k));
    }
    ch.faces = PolygonLocator(std::move(polys));
    return ch;
}

LiftCheck check_lift(const TChart& chart, const std::vector<cplx>& centres, double r, int per_ball)
{
    LiftCheck out;
    const double golden = std::numbers::pi * (3.0 - std::sqrt(5.0));
    for (cplx p : centres) {
        int fp = chart.faces.locate(p);
        if (fp < 0) {
            ++out.samples;
            out.ok = false;
            continue;
        }
        cplx wp = p - std::conj(chart.origami(fp, p));
        for (int k = 0; k < per_ball; ++k) {
            // sunflower sampling of the disc
            double rad = r * std::sqrt((k + 0.5) / per_ball);
            cplx z = p + std::polar(rad, k * golden);
            ++out.samples;
            auto all = chart.faces.locate_all(z);
            if (all.empty()) {
                out.ok = false;
                continue;
            }
            ++out.covered;
            if (chart.faces.locate_interior(z).size() > 1) {
                ++out.overlaps;
                out.ok = false;
            }
            cplx wz = z - std::conj(chart.origami(all.front(), z));
            out.max_w_ratio = std::max(out.max_w_ratio, std::abs(wz - wp) / r);
        }
    }
    if (out.max_w_ratio > 2.0 * (1 + 1e-9)) out.ok = false;
    return out;
}

Derived derive(const PlanarMap& m, const HarmonicEmbedding& e)
{
    Derived x;
    x.d = dual_map(m);
    x.de = dual_embedding(m, x.d, e);
    x.p = potential(m, x.d, e, x.de);
    x.gm = gradient_map(m, x.d, e, x.p);
    x.cg = corner_graph(m, x.d);
    x.ts = t_surface(m, x.d, x.cg, e, x.de);
    x.chart = t_chart(m, x.cg, x.ts);
    return x;
}

} // namespace tma

namespace tma {

double affine_fit_defect(const std::vector<cplx>& pts, const std::vector<double>& f)
{
    const std::size_t n = pts.size();
    if (n == 0) return 0;
    cplx c = 0;
    double fm = 0;
    for (std::size_t i = 0; i < n; ++i) {
        c += pts[i];
        fm += f[i];
    }
    c /= static_cast<double>(n);
    fm /= static_cast<double>(n);
    double sxx = 0, sxy = 0, syy = 0, sxf = 0, syf = 0;
    for (std::size_t i = 0; i < n; ++i) {
        cplx d = pts[i] - c;
        double g = f[i] - fm;
        sxx += d.real() * d.real();
        sxy += d.real() * d.imag();
        syy += d.imag() * d.imag();
        sxf += d.real() * g;
        syf += d.imag() * g;
    }
    double det = sxx * syy - sxy * sxy;
    double bx = 0, by = 0;
    if (std::abs(det) > 1e-300) {
        bx = (syy * sxf - sxy * syf) / det;
        by = (sxx * syf - sxy * sxf) / det;
    }
    double worst = 0;
    for (std::size_t i = 0; i < n; ++i) {
        cplx d = pts[i] - c;
        worst = std::max(worst, std::abs(f[i] - fm - bx * d.real() - by * d.imag()));
    }
    return worst;
}

} // namespace tma
