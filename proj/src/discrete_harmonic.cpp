#include "tma/discrete_harmonic.hpp"

#include "tma/laplacian.hpp"

#include <algorithm>
#include <cmath>
#include <queue>

namespace tma {

DomainSlice slice_domain(const PlanarMap& m, const std::vector<cplx>& H, const Omega& omega)
{
    const int n = m.n_vertices;
    DomainSlice s;
    s.interior.assign(n, 0);
    s.boundary.assign(n, 0);
    std::vector<char> cand(n, 0);
    for (int v = 0; v < n; ++v) cand[v] = !m.boundary[v] && omega.contains(H[v]);

    std::vector<int> comp(n, -1), best;
    int ncomp = 0;
    for (int r = 0; r < n; ++r) {
        if (!cand[r] || comp[r] >= 0) continue;
        std::vector<int> members{r};
        comp[r] = ncomp;
        for (std::size_t k = 0; k < members.size(); ++k) {
            int a = members[k];
            for (int i = m.out_ptr[a]; i < m.out_ptr[a + 1]; ++i) {
                int b = m.target(m.out_he[i]);
                if (cand[b] && comp[b] < 0) {
                    comp[b] = ncomp;
                    members.push_back(b);
                }
            }
        }
        ++ncomp;
        if (members.size() > best.size()) best = std::move(members);
    }
    if (best.empty()) throw Error(Errc::EmptyInterior, "no graph vertex lies inside the region");
    s.pruned = ncomp > 1;
    std::sort(best.begin(), best.end());
    for (int v : best) s.interior[v] = 1;
    s.interior_list = best;
    for (int v : best)
        for (int i = m.out_ptr[v]; i < m.out_ptr[v + 1]; ++i) {
            int b = m.target(m.out_he[i]);
            if (!s.interior[b]) s.boundary[b] = 1;
        }
    for (int v = 0; v < n; ++v)
        if (s.boundary[v]) s.boundary_list.push_back(v);
    return s;
}

double vertex_measure(const PlanarMap& m, const std::vector<cplx>& H, int v)
{
    double mu = 0;
    for (int i = m.out_ptr[v]; i < m.out_ptr[v + 1]; ++i) {
        int h = m.out_he[i];
        mu += m.conductance(h) * std::norm(H[m.target(h)] - H[v]);
    }
    return mu;
}

double apply_laplacian(const PlanarMap& m, const std::vector<cplx>& H, const Field& f, int v)
{
    if (!valued(f, v)) throw Error(Errc::MissingNeighborValue, "vertex has no value", "vertices", v);
    double acc = 0;
    for (int i = m.out_ptr[v]; i < m.out_ptr[v + 1]; ++i) {
        int h = m.out_he[i], w = m.target(h);
        if (!valued(f, w)) throw Error(Errc::MissingNeighborValue, "neighbour has no value", "vertices", w);
        acc += m.conductance(h) * (f[v] - f[w]);
    }
    return acc / vertex_measure(m, H, v);
}

Field boundary_data(const PlanarMap& m, const std::vector<cplx>& H, const DomainSlice& s, const Omega& omega,
                    const std::function<double(cplx)>& g, BoundaryMode mode)
{
    Field out(m.n_vertices, kNoValue);
    for (int v : s.boundary_list) out[v] = g(mode == BoundaryMode::Trace ? omega.project(H[v]) : H[v]);
    return out;
}

namespace {

double relative_residual(const PlanarMap& m, const DomainSlice& s, const Field& f, int skip)
{
    double worst = 0;
    for (int v : s.interior_list) {
        if (v == skip) continue;
        double num = 0, den = 0;
        for (int i = m.out_ptr[v]; i < m.out_ptr[v + 1]; ++i) {
            int h = m.out_he[i];
            double d = f[m.target(h)] - f[v];
            num += m.conductance(h) * d;
            den += m.conductance(h) * std::abs(d);
        }
        if (den > 0) worst = std::max(worst, std::abs(num) / den);
    }
    return worst;
}

DirichletResult solve(const PlanarMap& m, const DomainSlice& s, const Field& known, const std::vector<double>* load,
                      const SolveOptions& opt, int skip)
{
    ReducedSystem sys = reduced_laplacian(m, s.interior);
    std::vector<double> vals(m.n_vertices, 0.0);
    double mean = 0;
    for (int v : s.boundary_list) {
        if (!valued(known, v)) throw Error(Errc::MissingNeighborValue, "boundary vertex has no value", "vertices", v);
        vals[v] = known[v];
        mean += known[v];
    }
    if (!s.boundary_list.empty()) mean /= static_cast<double>(s.boundary_list.size());
    auto rhs = reduced_rhs(m, sys, vals);
    if (load)
        for (std::size_t i = 0; i < rhs.size(); ++i) rhs[i] += (*load)[sys.vertex[i]];
    std::vector<double> x(rhs.size(), load ? 0.0 : mean);
    CgOptions co;
    co.tol = opt.tol;
    co.parallel = opt.parallel;
    auto res = cg_solve(sys.a, rhs, x, co);
    if (res.rel_residual > 1e-10)
        throw Error(Errc::SolverDivergence, "relative residual " + std::to_string(res.rel_residual) + " after " +
                                                std::to_string(res.iterations) + " iterations");
    DirichletResult out;
    out.f.assign(m.n_vertices, kNoValue);
    for (int v : s.boundary_list) out.f[v] = known[v];
    for (std::size_t i = 0; i < x.size(); ++i) out.f[sys.vertex[i]] = x[i];
    out.iterations = res.iterations;
    out.residual = relative_residual(m, s, out.f, skip);
    return out;
}

} // namespace

DirichletResult solve_dirichlet(const PlanarMap& m, const DomainSlice& s, const Field& g, const SolveOptions& opt)
{
    return solve(m, s, g, nullptr, opt, -1);
}

DirichletResult green(const PlanarMap& m, const DomainSlice& s, int v0, const SolveOptions& opt)
{
    if (v0 < 0 || v0 >= m.n_vertices || !s.interior[v0])
        throw Error(Errc::PoleOnBoundary, "pole is not an interior vertex of the slice", "vertices", v0);
    Field zero(m.n_vertices, kNoValue);
    for (int v : s.boundary_list) zero[v] = 0;
    std::vector<double> load(m.n_vertices, 0.0);
    load[v0] = 1.0;
    return solve(m, s, zero, &load, opt, v0);
}

ConjugateField harmonic_conjugate(const PlanarMap& m, const DualMap& d, const DomainSlice& s, const Field& f,
                                  double monodromy_tol)
{
    ConjugateField out;
    const int ne = m.n_edges(), nd = d.n_vertices();
    out.values.assign(nd, kNoValue);
    out.edge_used.assign(ne, 0);
    std::vector<double> inc(ne, 0);
    double scale = 0;
    for (int e = 0; e < ne; ++e) {
        int u = m.edges[e].u, v = m.edges[e].v;
        if (!(s.interior[u] || s.interior[v]) || !valued(f, u) || !valued(f, v)) continue;
        out.edge_used[e] = 1;
        inc[e] = m.edges[e].c * (f[v] - f[u]);
        scale = std::max(scale, std::abs(inc[e]));
    }
    std::vector<char> touched(nd, 0), tree(ne, 0);
    int used_edges = 0, used_vertices = 0, components = 0;
    for (int e = 0; e < ne; ++e)
        if (out.edge_used[e]) {
            ++used_edges;
            touched[d.left[e]] = touched[d.right[e]] = 1;
        }
    for (int k = 0; k < nd; ++k) used_vertices += touched[k];
    std::vector<char> seen(nd, 0);
    for (int r = 0; r < nd; ++r) {
        if (!touched[r] || seen[r]) continue;
        if (out.root < 0) out.root = r;
        ++components;
        seen[r] = 1;
        out.values[r] = 0;
        std::queue<int> q;
        q.push(r);
        while (!q.empty()) {
            int a = q.front();
            q.pop();
            for (int e : d.adj_edges[a]) {
                if (!out.edge_used[e]) continue;
                int b = d.left[e] == a ? d.right[e] : d.left[e];
                if (seen[b]) continue;
                seen[b] = 1;
                tree[e] = 1;
                out.values[b] = d.left[e] == b ? out.values[a] + inc[e] : out.values[a] - inc[e];
                q.push(b);
            }
        }
    }
    for (int e = 0; e < ne; ++e) {
        if (!out.edge_used[e] || tree[e]) continue;
        double defect = std::abs(out.values[d.left[e]] - out.values[d.right[e]] - inc[e]);
        out.closure_defect = std::max(out.closure_defect, scale > 0 ? defect / scale : defect);
    }
    int enclosed = 0;
    for (int v = 0; v < m.n_vertices; ++v) {
        bool all = m.degree(v) > 0 && !m.boundary[v];
        double flux = 0;
        for (int i = m.out_ptr[v]; i < m.out_ptr[v + 1] && all; ++i) {
            int h = m.out_he[i];
            all = out.edge_used[h >> 1];
            flux += m.conductance(h) * (f[m.target(h)] - f[v]);
        }
        if (!all) continue;
        ++enclosed;
        if (std::abs(flux) > monodromy_tol * std::max(1.0, scale)) out.monodromy.push_back({v, flux});
    }
    out.holes = used_edges - used_vertices + components - enclosed;
    return out;
}

std::vector<char> edges_within(const PlanarMap& m, const std::vector<cplx>& H, const std::function<bool(cplx)>& in)
{
    std::vector<char> mask(m.n_edges(), 0);
    for (int e = 0; e < m.n_edges(); ++e) mask[e] = in(H[m.edges[e].u]) && in(H[m.edges[e].v]);
    return mask;
}

double dirichlet_energy(const PlanarMap& m, const Field& f, const std::vector<char>& edge_mask)
{
    double acc = 0;
    for (int e = 0; e < m.n_edges(); ++e) {
        if (!edge_mask[e]) continue;
        int u = m.edges[e].u, v = m.edges[e].v;
        if (!valued(f, u) || !valued(f, v)) continue;
        acc += m.edges[e].c * (f[v] - f[u]) * (f[v] - f[u]);
    }
    return acc;
}

double dual_energy(const PlanarMap& m, const DualMap& d, const Field& fs, const std::vector<char>& edge_mask)
{
    double acc = 0;
    for (int e = 0; e < m.n_edges(); ++e) {
        if (!edge_mask[e]) continue;
        int l = d.left[e], r = d.right[e];
        if (!valued(fs, l) || !valued(fs, r)) continue;
        acc += (fs[l] - fs[r]) * (fs[l] - fs[r]) / m.edges[e].c;
    }
    return acc;
}

Caccioppoli caccioppoli_check(const PlanarMap& m, const std::vector<cplx>& H, const DomainSlice& s,
                              const Omega& omega, const Field& f, cplx p, double r)
{
    if (!(r > 0) || !omega.contains(p) || omega.boundary_distance(p) < 2 * r)
        throw Error(Errc::BallNotCovered, "the doubled ball leaves the region");
    for (int v = 0; v < m.n_vertices; ++v)
        if (std::abs(H[v] - p) < 2 * r && !s.interior[v])
            throw Error(Errc::BallNotCovered, "the doubled ball contains a vertex outside the slice interior",
                        "vertices", v);
    Caccioppoli c;
    double sum = 0;
    for (int e = 0; e < m.n_edges(); ++e) {
        int u = m.edges[e].u, v = m.edges[e].v;
        double du = std::abs(H[u] - p), dv = std::abs(H[v] - p);
        if (du <= r && dv <= r) c.lhs += m.edges[e].c * (f[v] - f[u]) * (f[v] - f[u]);
        if (du < 2 * r || dv < 2 * r)
            sum += m.edges[e].c * std::norm(H[v] - H[u]) * (f[u] + f[v]) * (f[u] + f[v]);
    }
    c.rhs = kCaccioppoliC / (r * r) * sum;
    c.ratio = c.rhs > 0 ? c.lhs / c.rhs : (c.lhs > 0 ? INFINITY : 0.0);
    return c;
}

THolo t_white_holo(const PlanarMap& m, const DualMap& d, const CornerGraph& cg, const TSurface& ts,
                   const std::vector<cplx>& H, const Field& f, const Field& fs)
{
    (void)H;
    const cplx I(0, 1);
    const cplx none(kNoValue, kNoValue);
    THolo out;
    const int nb = static_cast<int>(cg.black.size());
    out.F.assign(nb, none);
    out.black_valued.assign(nb, 0);
    for (int k = 0; k < nb; ++k) {
        const auto& b = cg.black[k];
        double val = b.dual ? fs[b.id] : f[b.id];
        if (val != val) continue;
        out.F[k] = b.dual ? I * val : cplx(val, 0);
        out.black_valued[k] = 1;
    }
    out.F_leaf.assign(d.n_leaves, none);
    for (int k = 0; k < d.n_leaves; ++k)
        if (valued(fs, d.n_inner + k)) out.F_leaf[k] = I * fs[d.n_inner + k];

    auto dual_F = [&](int dv) -> cplx {
        if (!valued(fs, dv)) return none;
        return I * fs[dv];
    };
    auto primal_F = [&](int v) -> cplx { return valued(f, v) ? cplx(f[v], 0) : none; };

    const int ne = m.n_edges();
    out.Fo.assign(ne, {none, none});
    out.diagonal.assign(ne, 0);
    out.white_valued.assign(ne, 0);
    out.edge_coef.assign(4 * static_cast<std::size_t>(ne), none);
    for (int e = 0; e < ne; ++e) {
        const auto& w = cg.white[e];
        cplx side[4] = {dual_F(d.right[e]), primal_F(m.edges[e].v), dual_F(d.left[e]), primal_F(m.edges[e].u)};
        bool all = true;
        double fmax = 0, per = 0;
        cplx loop = 0;
        for (int i = 0; i < 4; ++i) {
            bool ok = side[i] == side[i];
            all = all && ok;
            if (!ok) continue;
            out.edge_coef[4 * e + i] = 2.0 * side[i];
            fmax = std::max(fmax, std::abs(2.0 * side[i]));
            cplx dT = ts.T[w[(i + 1) % 4]] - ts.T[w[i]];
            per += std::abs(dT);
            loop += 2.0 * side[i] * dT;
        }
        if (!all) continue;
        out.white_valued[e] = 1;
        double dA = std::abs(ts.T[w[2]] - ts.T[w[0]]), dB = std::abs(ts.T[w[3]] - ts.T[w[1]]);
        out.diagonal[e] = dB < dA ? 1 : 0;
        if (out.diagonal[e] == 0)
            out.Fo[e] = {side[0] + side[1], side[2] + side[3]};
        else
            out.Fo[e] = {side[0] + side[3], side[1] + side[2]};
        if (per > 0 && fmax > 0) out.white_defect = std::max(out.white_defect, std::abs(loop) / (per * fmax));
    }
    return out;
}

Primitive integrate_closed_form(const CornerGraph& cg, const TSurface& ts, const THolo& F)
{
    const int nc = cg.n_corners();
    const cplx none(kNoValue, kNoValue);
    Primitive out;
    out.I.assign(nc, none);
    std::vector<std::vector<std::pair<int, int>>> adj(nc);
    double fmax = 0;
    for (std::size_t k = 0; k < cg.edges.size(); ++k) {
        cplx c = F.edge_coef[k];
        if (c != c) continue;
        fmax = std::max(fmax, std::abs(c));
        adj[cg.edges[k][0]].push_back({cg.edges[k][1], static_cast<int>(k)});
        adj[cg.edges[k][1]].push_back({cg.edges[k][0], static_cast<int>(k)});
    }
    std::vector<int> parent(nc, -1), depth(nc, 0);
    std::vector<double> tlen(nc, 0);
    std::vector<char> tree(cg.edges.size(), 0);
    auto step = [&](int k, int from) {
        const auto& ed = cg.edges[k];
        cplx dT = ts.T[ed[1]] - ts.T[ed[0]];
        cplx v = F.edge_coef[k] * dT;
        return from == ed[0] ? v : -v;
    };
    for (int r = 0; r < nc; ++r) {
        if (adj[r].empty() || out.I[r] == out.I[r]) continue;
        out.I[r] = 0;
        std::queue<int> q;
        q.push(r);
        while (!q.empty()) {
            int a = q.front();
            q.pop();
            for (auto [b, k] : adj[a]) {
                if (out.I[b] == out.I[b]) continue;
                out.I[b] = out.I[a] + step(k, a);
                parent[b] = a;
                depth[b] = depth[a] + 1;
                tlen[b] = tlen[a] + std::abs(ts.T[b] - ts.T[a]);
                tree[k] = 1;
                q.push(b);
            }
        }
    }
    for (std::size_t k = 0; k < cg.edges.size(); ++k) {
        cplx c = F.edge_coef[k];
        if (c != c || tree[k]) continue;
        int a = cg.edges[k][0], b = cg.edges[k][1];
        cplx defect = out.I[a] + step(static_cast<int>(k), a) - out.I[b];
        int x = a, y = b;
        while (depth[x] > depth[y]) x = parent[x];
        while (depth[y] > depth[x]) y = parent[y];
        while (x != y) x = parent[x], y = parent[y];
        double len = tlen[a] + tlen[b] - 2 * tlen[x] + std::abs(ts.T[b] - ts.T[a]);
        ++out.loops;
        if (len > 0 && fmax > 0) out.loop_defect = std::max(out.loop_defect, std::abs(defect) / (len * fmax));
    }
    return out;
}

GradientField gradient_field(const PlanarMap& m, const std::vector<cplx>& H, const DomainSlice& s, const Field& f)
{
    GradientField g;
    for (int fi = 0; fi < m.n_faces(); ++fi) {
        if (fi == m.outer_face) continue;
        const auto& cyc = m.faces[fi];
        bool inside = true, interior = true, touches = false;
        for (int v : cyc) {
            inside = inside && s.closure(v) && valued(f, v);
            interior = interior && s.interior[v];
            touches = touches || s.boundary[v];
        }
        if (!inside) continue;
        std::vector<cplx> poly;
        for (int v : cyc) poly.push_back(H[v]);
        Fan fan = best_fan(poly);
        if (fan.apex < 0) throw Error(Errc::DegenerateTriangle, "face admits no fan triangulation", "faces", fi);
        for (const auto& t : fan.tris) {
            int a = cyc[t[0]], b = cyc[t[1]], c = cyc[t[2]];
            cplx e1 = H[b] - H[a], e2 = H[c] - H[a];
            double det = cross(e1, e2);
            if (!(det > 0)) throw Error(Errc::DegenerateTriangle, "zero-area triangle", "faces", fi);
            double d1 = f[b] - f[a], d2 = f[c] - f[a];
            double gx = (d1 * e2.imag() - d2 * e1.imag()) / det;
            double gy = (d2 * e1.real() - d1 * e2.real()) / det;
            cplx grad = 0.5 * cplx(gx, -gy);
            int idx = static_cast<int>(g.tris.size());
            g.tris.push_back({{a, b, c}, fi});
            g.grad.push_back(grad);
            g.interior.push_back(interior ? 1 : 0);
            g.touches_boundary.push_back(touches ? 1 : 0);
            double mag = std::abs(grad);
            if (interior && mag > g.max_interior) g.max_interior = mag, g.witness_interior = idx;
            if (touches && mag > g.max_boundary) g.max_boundary = mag, g.witness_boundary = idx;
        }
    }
    g.max_principle = g.max_interior <= g.max_boundary * (1 + 1e-12) + 1e-300;
    return g;
}

double oscillation(const std::vector<cplx>& H, const Field& f, cplx p, double r)
{
    double lo = INFINITY, hi = -INFINITY;
    for (std::size_t v = 0; v < H.size(); ++v) {
        if (!valued(f, static_cast<int>(v)) || std::abs(H[v] - p) > r) continue;
        lo = std::min(lo, f[v]);
        hi = std::max(hi, f[v]);
    }
    return hi >= lo ? hi - lo : 0.0;
}

HolderFit holder_exponent(const std::vector<cplx>& H, const Field& f, cplx p, double R, int levels)
{
    HolderFit fit;
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    int n = 0;
    for (int k = 0; k < levels; ++k) {
        double r = R / std::pow(2.0, k);
        double o = oscillation(H, f, p, r);
        fit.radii.push_back(r);
        fit.osc.push_back(o);
        if (!(o > 0)) continue;
        double x = std::log(r), y = std::log(o);
        sx += x, sy += y, sxx += x * x, sxy += x * y;
        ++n;
    }
    if (n >= 2) fit.beta = (n * sxy - sx * sy) / (n * sxx - sx * sx);
    return fit;
}

} // namespace tma
