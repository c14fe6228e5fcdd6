#include "tma/continuum.hpp"
#include "tma/sparse.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <queue>

namespace tma {

Mat2 matrix_A(const ConvexPotential& phi, cplx w)
{
    phi.require_inside(w);
    Mat2 H = phi.hessian(w);
    return {H.yy, -H.xy, H.xx};
}

double rho(const ConvexPotential& phi, cplx w)
{
    return std::sqrt(matrix_A(phi, w).det());
}

int FeMesh::locate(cplx w) const
{
    return locator.locate(w);
}

std::array<double, 3> FeMesh::barycentric(int t, cplx w) const
{
    const auto& q = tris[t];
    cplx p[3] = {nodes[q[0]], nodes[q[1]], nodes[q[2]]};
    double a2 = cross(p[1] - p[0], p[2] - p[0]);
    std::array<double, 3> l;
    for (int k = 0; k < 3; ++k) l[k] = cross(p[(k + 1) % 3] - w, p[(k + 2) % 3] - w) / a2;
    return l;
}

FeMesh fe_mesh(const Omega& omega, double h)
{
    if (!(h > 0)) throw Error(Errc::MeshGenerationFailure, "mesh size must be positive");
    cplx lo, hi;
    if (omega.kind == Omega::Kind::Disc) {
        lo = omega.centre - cplx(omega.radius, omega.radius);
        hi = omega.centre + cplx(omega.radius, omega.radius);
    } else {
        lo = hi = omega.poly[0];
        for (cplx p : omega.poly) {
            lo = {std::min(lo.real(), p.real()), std::min(lo.imag(), p.imag())};
            hi = {std::max(hi.real(), p.real()), std::max(hi.imag(), p.imag())};
        }
    }
    long i0 = static_cast<long>(std::floor(lo.real() / h)) - 1, i1 = static_cast<long>(std::ceil(hi.real() / h)) + 1;
    long j0 = static_cast<long>(std::floor(lo.imag() / h)) - 1, j1 = static_cast<long>(std::ceil(hi.imag() / h)) + 1;
    long nx = i1 - i0 + 1, ny = j1 - j0 + 1;
    if (nx * ny > 40'000'000) throw Error(Errc::MeshGenerationFailure, "mesh too large");
    auto gid = [&](long i, long j) { return (j - j0) * nx + (i - i0); };
    auto gpos = [&](long i, long j) { return cplx(static_cast<double>(i) * h, static_cast<double>(j) * h); };
    // free: strictly inside and not within 0.2 h of the boundary
    std::vector<char> free(nx * ny, 0);
    long nfree = 0;
    for (long j = j0; j <= j1; ++j)
        for (long i = i0; i <= i1; ++i) {
            cplx p = gpos(i, j);
            if (omega.contains(p) && omega.boundary_distance(p) >= 0.2 * h) {
                free[gid(i, j)] = 1;
                ++nfree;
            }
        }
    if (nfree == 0) throw Error(Errc::MeshGenerationFailure, "no mesh node inside the region");

    FeMesh m;
    m.h = h;
    std::vector<int> slot(nx * ny, -1);
    auto node = [&](long i, long j) {
        long g = gid(i, j);
        if (slot[g] < 0) {
            slot[g] = static_cast<int>(m.nodes.size());
            cplx p = gpos(i, j);
            m.nodes.push_back(free[g] ? p : omega.closest(p));
            m.dirichlet.push_back(!free[g]);
        }
        return slot[g];
    };
    for (long j = j0; j < j1; ++j)
        for (long i = i0; i < i1; ++i) {
            long c[4] = {gid(i, j), gid(i + 1, j), gid(i + 1, j + 1), gid(i, j + 1)};
            long ci[4] = {i, i + 1, i + 1, i}, cj[4] = {j, j, j + 1, j + 1};
            const int split[2][3] = {{0, 1, 2}, {0, 2, 3}};
            for (const auto& s : split) {
                bool any = free[c[s[0]]] || free[c[s[1]]] || free[c[s[2]]];
                if (!any) continue;
                std::array<int, 3> t;
                for (int k = 0; k < 3; ++k) t[k] = node(ci[s[k]], cj[s[k]]);
                double a = cross(m.nodes[t[1]] - m.nodes[t[0]], m.nodes[t[2]] - m.nodes[t[0]]);
                if (!(a > 1e-9 * h * h))
                    throw Error(Errc::MeshGenerationFailure, "boundary snapping produced a degenerate triangle");
                m.tris.push_back(t);
            }
        }
    std::vector<std::vector<cplx>> polys;
    polys.reserve(m.tris.size());
    for (const auto& t : m.tris) polys.push_back({m.nodes[t[0]], m.nodes[t[1]], m.nodes[t[2]]});
    m.locator = PolygonLocator(std::move(polys));
    return m;
}

namespace {

ElementMatrix element(const FeMesh& mesh, const ConvexPotential& phi, int t)
{
    const auto& q = mesh.tris[t];
    cplx p[3] = {mesh.nodes[q[0]], mesh.nodes[q[1]], mesh.nodes[q[2]]};
    double area = 0.5 * cross(p[1] - p[0], p[2] - p[0]);
    Mat2 A = matrix_A(phi, (p[0] + p[1] + p[2]) / 3.0);
    cplx g[3];
    for (int k = 0; k < 3; ++k) g[k] = cplx(0, 1) * (p[(k + 2) % 3] - p[(k + 1) % 3]) / (2 * area);
    ElementMatrix e;
    for (int a = 0; a < 3; ++a)
        for (int b = 0; b < 3; ++b) {
            double ax = A.xx * g[b].real() + A.xy * g[b].imag();
            double ay = A.xy * g[b].real() + A.yy * g[b].imag();
            e[3 * a + b] = area * (g[a].real() * ax + g[a].imag() * ay);
        }
    return e;
}

cplx tri_grad(const FeMesh& mesh, int t, const std::vector<double>& u)
{
    const auto& q = mesh.tris[t];
    cplx p[3] = {mesh.nodes[q[0]], mesh.nodes[q[1]], mesh.nodes[q[2]]};
    double a2 = cross(p[1] - p[0], p[2] - p[0]);
    cplx gr = 0;
    for (int k = 0; k < 3; ++k) gr += u[q[k]] * cplx(0, 1) * (p[(k + 2) % 3] - p[(k + 1) % 3]) / a2;
    return gr;
}

std::vector<double> apply_elements(const FeMesh& mesh, const std::vector<ElementMatrix>& ke, const std::vector<double>& u)
{
    std::vector<double> y(mesh.nodes.size(), 0.0);
    for (std::size_t t = 0; t < mesh.tris.size(); ++t) {
        const auto& q = mesh.tris[t];
        for (int a = 0; a < 3; ++a)
            for (int b = 0; b < 3; ++b) y[q[a]] += ke[t][3 * a + b] * u[q[b]];
    }
    return y;
}

double weak_residual(const FeMesh& mesh, const std::vector<ElementMatrix>& ke, const std::vector<double>& u,
                     const std::vector<double>& load)
{
    std::vector<double> y(mesh.nodes.size(), 0.0), s(mesh.nodes.size(), 0.0);
    for (std::size_t t = 0; t < mesh.tris.size(); ++t) {
        const auto& q = mesh.tris[t];
        for (int a = 0; a < 3; ++a)
            for (int b = 0; b < 3; ++b) {
                y[q[a]] += ke[t][3 * a + b] * u[q[b]];
                s[q[a]] += std::abs(ke[t][3 * a + b] * u[q[b]]);
            }
    }
    double num = 0, den = 0;
    for (std::size_t i = 0; i < y.size(); ++i) {
        if (mesh.dirichlet[i]) continue;
        double li = load.empty() ? 0.0 : load[i];
        num = std::max(num, std::abs(y[i] - li));
        den = std::max(den, std::max(s[i], std::abs(li)));
    }
    return den > 0 ? num / den : 0.0;
}

// Solves K u = load on free nodes with u fixed on Dirichlet nodes.
ContinuumField fe_solve(FeMesh mesh, const ConvexPotential& phi, std::vector<double> u, const std::vector<double>& load,
                        const FeOptions& opt)
{
    ContinuumField f;
    if (opt.parallel)
        assemble_elements_omp(mesh, phi, f.ke);
    else
        assemble_elements_serial(mesh, phi, f.ke);
    int n = static_cast<int>(mesh.nodes.size());
    std::vector<int> idx(n, -1), free_nodes;
    for (int i = 0; i < n; ++i)
        if (!mesh.dirichlet[i]) {
            idx[i] = static_cast<int>(free_nodes.size());
            free_nodes.push_back(i);
        }
    int nf = static_cast<int>(free_nodes.size());
    std::vector<std::map<int, double>> rows(nf);
    std::vector<double> b(nf, 0.0);
    for (std::size_t t = 0; t < mesh.tris.size(); ++t) {
        const auto& q = mesh.tris[t];
        for (int a = 0; a < 3; ++a) {
            int r = idx[q[a]];
            if (r < 0) continue;
            for (int c = 0; c < 3; ++c) {
                double k = f.ke[t][3 * a + c];
                if (idx[q[c]] >= 0)
                    rows[r][idx[q[c]]] += k;
                else
                    b[r] -= k * u[q[c]];
            }
        }
    }
    if (!load.empty())
        for (int r = 0; r < nf; ++r) b[r] += load[free_nodes[r]];
    Csr a;
    a.n = nf;
    a.ptr.push_back(0);
    for (const auto& row : rows) {
        for (auto [c, v] : row) {
            a.col.push_back(c);
            a.val.push_back(v);
        }
        a.ptr.push_back(static_cast<int>(a.col.size()));
    }
    std::vector<double> x(nf, 0.0);
    for (int r = 0; r < nf; ++r) x[r] = u[free_nodes[r]];
    CgOptions co;
    co.tol = opt.tol;
    co.parallel = opt.parallel;
    co.max_iter = std::max(200, 40 * static_cast<int>(std::sqrt(static_cast<double>(nf))));
    auto res = cg_solve(a, b, x, co);
    for (int r = 0; r < nf; ++r) u[free_nodes[r]] = x[r];
    f.iterations = res.iterations;
    f.weak_residual = weak_residual(mesh, f.ke, u, load);
    if (!(f.weak_residual <= 1e-10))
        throw Error(Errc::SolverDivergence, "weak residual " + std::to_string(f.weak_residual) + " above 1e-10");
    f.mesh = std::move(mesh);
    f.u = std::move(u);
    return f;
}

} // namespace

void assemble_elements_serial(const FeMesh& mesh, const ConvexPotential& phi, std::vector<ElementMatrix>& out)
{
    out.resize(mesh.tris.size());
    for (std::size_t t = 0; t < mesh.tris.size(); ++t) out[t] = element(mesh, phi, static_cast<int>(t));
}

void assemble_elements_omp(const FeMesh& mesh, const ConvexPotential& phi, std::vector<ElementMatrix>& out)
{
    out.resize(mesh.tris.size());
    long n = static_cast<long>(mesh.tris.size());
    // matrix_A may throw OutsideDomain; check the barycentres first
    for (long t = 0; t < n; ++t) {
        const auto& q = mesh.tris[t];
        phi.require_inside((mesh.nodes[q[0]] + mesh.nodes[q[1]] + mesh.nodes[q[2]]) / 3.0);
    }
#pragma omp parallel for schedule(static)
    for (long t = 0; t < n; ++t) out[t] = element(mesh, phi, static_cast<int>(t));
}

double ContinuumField::eval(cplx w) const
{
    int t = mesh.locate(w);
    if (t < 0) throw Error(Errc::OutsideDomain, "point outside the mesh");
    auto l = mesh.barycentric(t, w);
    const auto& q = mesh.tris[t];
    return l[0] * u[q[0]] + l[1] * u[q[1]] + l[2] * u[q[2]];
}

cplx ContinuumField::grad(int tri) const
{
    return tri_grad(mesh, tri, u);
}

std::vector<double> ContinuumField::apply() const
{
    return apply_elements(mesh, ke, u);
}

ContinuumField solve_Lphi_dirichlet(const ConvexPotential& phi, const Omega& omega, const std::function<double(cplx)>& g,
                                    double h, const FeOptions& opt)
{
    FeMesh mesh = fe_mesh(omega, h);
    std::vector<double> u(mesh.nodes.size(), 0.0);
    double mean = 0;
    int nb = 0;
    for (std::size_t i = 0; i < u.size(); ++i)
        if (mesh.dirichlet[i]) {
            u[i] = g(mesh.nodes[i]);
            mean += u[i];
            ++nb;
        }
    mean /= std::max(1, nb);
    for (std::size_t i = 0; i < u.size(); ++i)
        if (!mesh.dirichlet[i]) u[i] = mean;
    return fe_solve(std::move(mesh), phi, std::move(u), {}, opt);
}

ContinuumGreen green_continuum(const ConvexPotential& phi, const Omega& omega, cplx w0, double h, const FeOptions& opt)
{
    if (!omega.contains(w0) || omega.boundary_distance(w0) < 11 * h)
        throw Error(Errc::PoleTooCloseToBoundary, "pole within 11 mesh sizes of the boundary");
    FeMesh mesh = fe_mesh(omega, h);
    int pole = -1;
    for (int i = 0; i < static_cast<int>(mesh.nodes.size()); ++i)
        if (!mesh.dirichlet[i] && (pole < 0 || std::abs(mesh.nodes[i] - w0) < std::abs(mesh.nodes[pole] - w0)))
            pole = i;
    std::vector<double> load(mesh.nodes.size(), 0.0);
    load[pole] = 1;
    std::vector<double> u(mesh.nodes.size(), 0.0);
    ContinuumGreen g;
    g.field = fe_solve(std::move(mesh), phi, std::move(u), load, opt);
    g.pole_node = pole;
    // The conjugate increment along the chain of edge midpoints bounding the
    // median cells of the nodes within 10 h equals minus their total weak flux.
    auto y = g.field.apply();
    double flux = 0;
    for (std::size_t i = 0; i < y.size(); ++i)
        if (!g.field.mesh.dirichlet[i] && std::abs(g.field.mesh.nodes[i] - g.field.mesh.nodes[pole]) <= 10 * h)
            flux += y[i];
    g.monodromy = -flux;
    return g;
}

ConjugateContinuum conjugate_unchecked(const FeMesh& mesh, const std::vector<double>& u, const ConvexPotential& phi)
{
    ConjugateContinuum c;
    c.mesh = &mesh;
    std::map<std::pair<int, int>, int> eid;
    c.tri_edges.resize(mesh.tris.size());
    std::vector<std::vector<int>> edge_tris;
    // Dirichlet nodes with a closed fan (inside nodes snapped to the boundary)
    // would enclose a cycle carrying their nonzero flux; their triangles are left out.
    std::size_t nn = mesh.nodes.size();
    std::vector<int> tri_count(nn, 0);
    std::vector<std::vector<int>> nbr(nn);
    for (const auto& q : mesh.tris)
        for (int k = 0; k < 3; ++k) {
            ++tri_count[q[k]];
            nbr[q[k]].push_back(q[(k + 1) % 3]);
            nbr[q[k]].push_back(q[(k + 2) % 3]);
        }
    std::vector<char> closed_dirichlet(nn, 0);
    for (std::size_t i = 0; i < nn; ++i) {
        std::sort(nbr[i].begin(), nbr[i].end());
        long distinct = std::unique(nbr[i].begin(), nbr[i].end()) - nbr[i].begin();
        closed_dirichlet[i] = mesh.dirichlet[i] && distinct == tri_count[i];
    }
    c.active.assign(mesh.tris.size(), 1);
    for (std::size_t t = 0; t < mesh.tris.size(); ++t) {
        const auto& q = mesh.tris[t];
        if (closed_dirichlet[q[0]] || closed_dirichlet[q[1]] || closed_dirichlet[q[2]]) {
            c.active[t] = 0;
            c.tri_edges[t] = {-1, -1, -1};
            continue;
        }
        for (int k = 0; k < 3; ++k) {
            int a = q[(k + 1) % 3], b = q[(k + 2) % 3];
            auto key = std::minmax(a, b);
            auto it = eid.find(key);
            int e;
            if (it == eid.end()) {
                e = static_cast<int>(c.edges.size());
                eid.emplace(key, e);
                c.edges.push_back({key.first, key.second});
                c.midpoints.push_back(0.5 * (mesh.nodes[a] + mesh.nodes[b]));
                edge_tris.emplace_back();
            } else {
                e = it->second;
            }
            c.tri_edges[t][k] = e;
            edge_tris[e].push_back(static_cast<int>(t));
        }
    }
    // J A grad u per triangle; J is multiplication by i
    std::vector<cplx> flow(mesh.tris.size());
    double scale = 0;
    for (std::size_t t = 0; t < mesh.tris.size(); ++t) {
        if (!c.active[t]) continue;
        const auto& q = mesh.tris[t];
        Mat2 A = matrix_A(phi, (mesh.nodes[q[0]] + mesh.nodes[q[1]] + mesh.nodes[q[2]]) / 3.0);
        cplx g = tri_grad(mesh, static_cast<int>(t), u);
        cplx s(A.xx * g.real() + A.xy * g.imag(), A.xy * g.real() + A.yy * g.imag());
        flow[t] = cplx(0, 1) * s;
    }
    auto inc = [&](int t, int ea, int eb) { return dotc(flow[t], c.midpoints[eb] - c.midpoints[ea]); };
    c.values.assign(c.edges.size(), std::numeric_limits<double>::quiet_NaN());
    std::vector<char> seen(c.edges.size(), 0);
    for (std::size_t root = 0; root < c.edges.size(); ++root) {
        if (seen[root]) continue;
        seen[root] = 1;
        c.values[root] = 0;
        std::queue<int> qu;
        qu.push(static_cast<int>(root));
        while (!qu.empty()) {
            int e = qu.front();
            qu.pop();
            for (int t : edge_tris[e])
                for (int f : c.tri_edges[t])
                    if (!seen[f]) {
                        seen[f] = 1;
                        c.values[f] = c.values[e] + inc(t, e, f);
                        qu.push(f);
                    }
        }
    }
    double worst = 0;
    for (std::size_t t = 0; t < mesh.tris.size(); ++t)
        for (int a = 0; a < 3 && c.active[t]; ++a) {
            int ea = c.tri_edges[t][a], eb = c.tri_edges[t][(a + 1) % 3];
            double d = inc(static_cast<int>(t), ea, eb);
            scale = std::max(scale, std::abs(d));
            worst = std::max(worst, std::abs(c.values[eb] - c.values[ea] - d));
        }
    // floor for (numerically) constant fields
    double umax = 0;
    for (double v : u) umax = std::max(umax, std::abs(v));
    scale = std::max(scale, umax * mesh.h);
    c.loop_defect = scale > 0 ? worst / scale : 0.0;
    return c;
}

ConjugateContinuum conjugate(const ContinuumField& h, const ConvexPotential& phi, double tol)
{
    auto c = conjugate_unchecked(h.mesh, h.u, phi);
    if (c.loop_defect > tol)
        throw Error(Errc::LoopDefectExceeded, "conjugate loop defect " + std::to_string(c.loop_defect));
    return c;
}

double ConjugateContinuum::eval(cplx w) const
{
    int t = mesh->locate(w);
    if (t < 0 || !active[t]) throw Error(Errc::OutsideDomain, "point outside the conjugate's mesh");
    auto l = mesh->barycentric(t, w);
    double s = 0;
    for (int k = 0; k < 3; ++k) s += values[tri_edges[t][k]] * (1 - 2 * l[k]);
    return s;
}

FlatnessReport ma_flatness(const ConvexPotential& phi, const Box& domain, double tol, int n)
{
    FlatnessReport r;
    for (int j = 0; j < n; ++j)
        for (int i = 0; i < n; ++i) {
            cplx w(domain.x0 + (domain.x1 - domain.x0) * i / (n - 1), domain.y0 + (domain.y1 - domain.y0) * j / (n - 1));
            r.points.push_back(w);
            r.det.push_back(phi.hessian(w).det());
        }
    for (double d : r.det) r.mean += d;
    r.mean /= static_cast<double>(r.det.size());
    for (double d : r.det) r.sup_dev = std::max(r.sup_dev, std::abs(d - r.mean));
    r.flat = r.sup_dev <= tol * r.mean;
    return r;
}

LphiPsiResidual lphi_psi_residual(const ConvexPotential& phi, const Box& domain, double h, bool parallel)
{
    LphiPsiResidual r;
    Omega om = Omega::box(domain.x0, domain.y0, domain.x1, domain.y1);
    r.mesh = fe_mesh(om, h);
    std::vector<ElementMatrix> ke;
    if (parallel)
        assemble_elements_omp(r.mesh, phi, ke);
    else
        assemble_elements_serial(r.mesh, phi, ke);
    std::size_t n = r.mesh.nodes.size();
    std::vector<double> px(n), py(n), mass(n, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        cplx p = phi.psi(r.mesh.nodes[i]);
        px[i] = p.real();
        py[i] = p.imag();
    }
    for (const auto& t : r.mesh.tris) {
        double a = 0.5 * cross(r.mesh.nodes[t[1]] - r.mesh.nodes[t[0]], r.mesh.nodes[t[2]] - r.mesh.nodes[t[0]]);
        for (int k = 0; k < 3; ++k) mass[t[k]] += a / 3;
    }
    auto yx = apply_elements(r.mesh, ke, px), yy = apply_elements(r.mesh, ke, py);
    r.residual.assign(n, 0.0);
    r.identity.assign(n, 0.0);
    double sq = 0;
    for (std::size_t i = 0; i < n; ++i) {
        if (r.mesh.dirichlet[i]) continue;
        r.residual[i] = cplx(yx[i], yy[i]) / mass[i];
        r.identity[i] = phi.dbar_det(r.mesh.nodes[i]);
        sq += std::norm(r.residual[i]) * mass[i];
        if (om.boundary_distance(r.mesh.nodes[i]) >= 0.1)
            r.identity_gap = std::max(r.identity_gap, std::abs(r.residual[i] - r.identity[i]));
    }
    r.norm = std::sqrt(sq);
    return r;
}

Mat2 first_fundamental_form(const ConvexPotential& phi, cplx w)
{
    phi.require_inside(w);
    return phi.hessian(w);
}

Mat2 pullback_metric(const ConvexPotential& phi, cplx w, double step)
{
    phi.require_inside(w);
    auto lift = [&](cplx z, cplx& a, cplx& b) {
        cplx p = phi.psi(z);
        a = 0.5 * (z + p);
        b = 0.5 * (std::conj(p) - std::conj(z));
    };
    cplx a1, b1, a2, b2, ax, bx, ay, by;
    lift(w + step, a1, b1);
    lift(w - step, a2, b2);
    ax = (a1 - a2) / (2 * step);
    bx = (b1 - b2) / (2 * step);
    lift(w + cplx(0, step), a1, b1);
    lift(w - cplx(0, step), a2, b2);
    ay = (a1 - a2) / (2 * step);
    by = (b1 - b2) / (2 * step);
    auto form = [](cplx p, cplx q, cplx r, cplx s) { return dotc(p, r) - dotc(q, s); };
    return {form(ax, bx, ax, bx), form(ax, bx, ay, by), form(ay, by, ay, by)};
}

} // namespace tma
