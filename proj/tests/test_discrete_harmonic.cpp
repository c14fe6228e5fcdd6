#include "doctest.h"
#include "fixtures.hpp"
#include "tma/discrete_harmonic.hpp"
#include "tma/rng.hpp"

#include <cmath>

using namespace tma;

namespace {

Field field_of(const std::vector<cplx>& H, const std::function<double(cplx)>& g)
{
    Field f(H.size());
    for (std::size_t v = 0; v < H.size(); ++v) f[v] = g(H[v]);
    return f;
}

struct Setup {
    Instance inst;
    DomainSlice s;
    Omega omega;
};

Setup lattice_disc(double delta, double R = 1.0)
{
    Setup st{square_lattice(delta, Box{-R - 2 * delta, -R - 2 * delta, R + 2 * delta, R + 2 * delta}), {},
             Omega::disc(0, R)};
    st.s = slice_domain(st.inst.map, st.inst.emb.H, st.omega);
    return st;
}

} // namespace

TEST_CASE("slice of the unit disc")
{
    auto st = lattice_disc(1.0 / 16);
    const auto& H = st.inst.emb.H;
    for (int v = 0; v < st.inst.map.n_vertices; ++v) {
        CHECK(bool(st.s.interior[v]) == (std::abs(H[v]) < 1.0));
        if (st.s.boundary[v]) {
            CHECK(std::abs(H[v]) >= 1.0);
            bool near = false;
            for (int h : st.inst.map.out_half_edges(v)) near = near || st.s.interior[st.inst.map.target(h)];
            CHECK(near);
        }
    }
    CHECK_FALSE(st.s.pruned);
}

TEST_CASE("slice errors and pruning")
{
    auto inst = square_lattice(0.25, Box{-1, -1, 1, 1});
    try {
        slice_domain(inst.map, inst.emb.H, Omega::disc(cplx(0.1, 0.1), 0.05));
        FAIL("accepted");
    } catch (const Error& err) {
        CHECK(err.code() == Errc::EmptyInterior);
    }
    // two lobes joined by a corridor thinner than the mesh
    auto db = Omega::polygon({{-0.9, -0.9}, {-0.1, -0.9}, {-0.1, 0.05}, {0.4, 0.05}, {0.4, -0.4}, {0.9, -0.4},
                              {0.9, 0.4}, {0.4, 0.4}, {0.4, 0.2}, {-0.1, 0.2}, {-0.1, 0.9}, {-0.9, 0.9}});
    auto s = slice_domain(inst.map, inst.emb.H, db);
    CHECK(s.pruned);
    // the corridor holds no vertex; the left lobe (3 x 7) beats the right one (2 x 3)
    CHECK(s.interior_list.size() == 21);
    for (int v : s.interior_list) CHECK(inst.emb.H[v].real() < 0);
}

TEST_CASE("discrete Laplacian examples")
{
    auto inst = square_lattice(0.125, Box{-1, -1, 1, 1});
    const auto& H = inst.emb.H;
    auto x = field_of(H, [](cplx w) { return w.real(); });
    auto sq = field_of(H, [](cplx w) { return std::norm(w); });
    auto one = field_of(H, [](cplx) { return 1.0; });
    for (int v = 0; v < inst.map.n_vertices; ++v) {
        if (inst.map.boundary[v]) continue;
        CHECK(std::abs(apply_laplacian(inst.map, H, x, v)) < 1e-12);
        CHECK(apply_laplacian(inst.map, H, sq, v) == doctest::Approx(-1.0).epsilon(1e-12));
        CHECK(apply_laplacian(inst.map, H, one, v) == 0.0);
    }
    Field hole = x;
    hole[inst.map.target(inst.map.out_half_edges(40)[0])] = kNoValue;
    try {
        apply_laplacian(inst.map, H, hole, 40);
        FAIL("accepted");
    } catch (const Error& err) {
        CHECK(err.code() == Errc::MissingNeighborValue);
    }
}

TEST_CASE("Dirichlet problem exactness")
{
    auto st = lattice_disc(1.0 / 32);
    const auto& H = st.inst.emb.H;
    auto g = boundary_data(st.inst.map, H, st.s, st.omega, [](cplx w) { return (w * w).real(); }, BoundaryMode::Extend);
    auto r = solve_dirichlet(st.inst.map, st.s, g);
    double err = 0;
    for (int v : st.s.interior_list) err = std::max(err, std::abs(r.f[v] - (H[v] * H[v]).real()));
    CHECK(err < 1e-10);
    CHECK(r.residual < 1e-10);

    auto c = boundary_data(st.inst.map, H, st.s, st.omega, [](cplx) { return 1.0; }, BoundaryMode::Extend);
    auto rc = solve_dirichlet(st.inst.map, st.s, c);
    for (int v : st.s.interior_list) CHECK(std::abs(rc.f[v] - 1.0) < 1e-12);

    auto star = fx::star(3.0);
    auto e = solve_tutte(star, fx::star_corners());
    DomainSlice s1;
    s1.interior = {1, 0, 0, 0, 0};
    s1.boundary = {0, 1, 1, 1, 1};
    s1.interior_list = {0};
    s1.boundary_list = {1, 2, 3, 4};
    Field gs = {kNoValue, 1.0, 2.0, 5.0, -1.0};
    auto rs = solve_dirichlet(star, s1, gs);
    CHECK(rs.f[0] == doctest::Approx((3 * 1.0 + 2.0 + 5.0 - 1.0) / 6.0).epsilon(1e-13));
}

TEST_CASE("maximum principle on random data")
{
    auto inst = perturbed_lattice(0.1, Box{-1, -1, 1, 1}, {}, 7);
    auto omega = Omega::disc(0, 0.85);
    auto s = slice_domain(inst.map, inst.emb.H, omega);
    CounterRng rng(99);
    for (int trial = 0; trial < 10; ++trial) {
        Field g(inst.map.n_vertices, kNoValue);
        double lo = INFINITY, hi = -INFINITY;
        for (int v : s.boundary_list) {
            g[v] = rng.uniform(-1, 1);
            lo = std::min(lo, g[v]);
            hi = std::max(hi, g[v]);
        }
        auto r = solve_dirichlet(inst.map, s, g);
        for (int v : s.interior_list) {
            CHECK(r.f[v] >= lo - 1e-12);
            CHECK(r.f[v] <= hi + 1e-12);
        }
    }
}

TEST_CASE("Green function")
{
    auto star = fx::star();
    DomainSlice s1;
    s1.interior = {1, 0, 0, 0, 0};
    s1.boundary = {0, 1, 1, 1, 1};
    s1.interior_list = {0};
    s1.boundary_list = {1, 2, 3, 4};
    auto g = green(star, s1, 0);
    CHECK(g.f[0] == doctest::Approx(0.25).epsilon(1e-14));
    for (int v = 1; v <= 4; ++v) CHECK(g.f[v] == 0.0);
    try {
        green(star, s1, 2);
        FAIL("accepted");
    } catch (const Error& err) {
        CHECK(err.code() == Errc::PoleOnBoundary);
    }

    auto st = lattice_disc(1.0 / 16);
    const auto& m = st.inst.map;
    int a = st.s.interior_list[st.s.interior_list.size() / 3], b = st.s.interior_list[st.s.interior_list.size() / 2];
    auto ga = green(m, st.s, a), gb = green(m, st.s, b);
    double flux = 0;
    for (int h : m.out_half_edges(a)) flux += m.conductance(h) * (ga.f[a] - ga.f[m.target(h)]);
    CHECK(flux == doctest::Approx(1.0).epsilon(1e-10));
    for (int v : st.s.interior_list) CHECK(ga.f[v] > 0);
    double mua = vertex_measure(m, st.inst.emb.H, a), mub = vertex_measure(m, st.inst.emb.H, b);
    CHECK(std::abs(mua * gb.f[a] - mub * ga.f[b]) < 1e-9 * mua * ga.f[a]);
    CHECK(std::abs(gb.f[a] - ga.f[b]) < 1e-12);
}

TEST_CASE("Green function is symmetric without the measure on perturbed lattices")
{
    auto inst = perturbed_lattice(0.125, Box{-1, -1, 1, 1}, {}, 4);
    auto s = slice_domain(inst.map, inst.emb.H, Omega::disc(0, 0.9));
    int a = s.interior_list[5], b = s.interior_list[s.interior_list.size() - 7];
    auto ga = green(inst.map, s, a), gb = green(inst.map, s, b);
    CHECK(std::abs(ga.f[b] - gb.f[a]) < 1e-12 * ga.f[a]);
}

TEST_CASE("harmonic conjugates")
{
    auto inst = square_lattice(0.25, Box{-1, -1, 1, 1});
    const auto& m = inst.map;
    auto d = dual_map(m);
    auto de = dual_embedding(m, d, inst.emb);
    DomainSlice all;
    all.interior.assign(m.n_vertices, 0);
    all.boundary.assign(m.n_vertices, 0);
    for (int v = 0; v < m.n_vertices; ++v) {
        (m.boundary[v] ? all.boundary : all.interior)[v] = 1;
        (m.boundary[v] ? all.boundary_list : all.interior_list).push_back(v);
    }
    auto x = field_of(inst.emb.H, [](cplx w) { return w.real(); });
    auto cj = harmonic_conjugate(m, d, all, x);
    CHECK(cj.closure_defect < 1e-12);
    CHECK(cj.monodromy.empty());
    CHECK(cj.holes == 0);
    double shift = cj.values[0] - de.Hs[0].imag();
    for (int k = 0; k < d.n_vertices(); ++k)
        if (valued(cj.values, k)) CHECK(std::abs(cj.values[k] - de.Hs[k].imag() - shift) < 1e-12);

    auto mask = cj.edge_used;
    CHECK(dirichlet_energy(m, x, mask) == doctest::Approx(dual_energy(m, d, cj.values, mask)).epsilon(1e-12));

    auto c = field_of(inst.emb.H, [](cplx) { return 2.0; });
    auto cc = harmonic_conjugate(m, d, all, c);
    for (int k = 0; k < d.n_vertices(); ++k)
        if (valued(cc.values, k)) CHECK(cc.values[k] == 0.0);
}

TEST_CASE("Green conjugate monodromy")
{
    auto st = lattice_disc(1.0 / 16);
    const auto& m = st.inst.map;
    auto d = dual_map(m);
    int pole = -1;
    for (int v : st.s.interior_list)
        if (std::abs(st.inst.emb.H[v]) < 1e-12) pole = v;
    REQUIRE(pole >= 0);
    auto g = green(m, st.s, pole);
    auto cj = harmonic_conjugate(m, d, st.s, g.f);
    REQUIRE(cj.monodromy.size() == 1);
    CHECK(cj.monodromy[0].vertex == pole);
    CHECK(cj.monodromy[0].value == doctest::Approx(-1.0).epsilon(1e-9));
}

TEST_CASE("Dirichlet energy examples")
{
    auto inst = square_lattice(1.0, Box{0, 0, 3, 3});
    auto x = field_of(inst.emb.H, [](cplx w) { return w.real(); });
    std::vector<char> all(inst.map.n_edges(), 1);
    CHECK(dirichlet_energy(inst.map, x, all) == doctest::Approx(12.0));
    auto c = field_of(inst.emb.H, [](cplx) { return 3.0; });
    CHECK(dirichlet_energy(inst.map, c, all) == 0.0);
}

TEST_CASE("energy equality for random harmonic fields")
{
    auto inst = perturbed_lattice(0.1, Box{-1, -1, 1, 1}, {}, 21);
    const auto& m = inst.map;
    auto d = dual_map(m);
    auto s = slice_domain(m, inst.emb.H, Omega::disc(0, 0.8));
    CounterRng rng(5);
    Field g(m.n_vertices, kNoValue);
    for (int v : s.boundary_list) g[v] = rng.normal();
    auto r = solve_dirichlet(m, s, g);
    auto cj = harmonic_conjugate(m, d, s, r.f);
    CHECK(cj.closure_defect < 1e-10);
    CHECK(cj.holes == 0);
    double e = dirichlet_energy(m, r.f, cj.edge_used), es = dual_energy(m, d, cj.values, cj.edge_used);
    CHECK(std::abs(e - es) < 1e-9 * e);
}

TEST_CASE("Caccioppoli inequality")
{
    auto st = lattice_disc(1.0 / 16);
    const auto& m = st.inst.map;
    const auto& H = st.inst.emb.H;
    auto c = field_of(H, [](cplx) { return 1.0; });
    auto k0 = caccioppoli_check(m, H, st.s, st.omega, c, 0, 0.3);
    CHECK(k0.lhs == 0.0);
    CHECK(k0.rhs > 0);
    auto x = field_of(H, [](cplx w) { return w.real(); });
    auto k1 = caccioppoli_check(m, H, st.s, st.omega, x, 0, 0.3);
    CHECK(k1.ratio < 1);
    try {
        caccioppoli_check(m, H, st.s, st.omega, x, 0.5, 0.3);
        FAIL("accepted");
    } catch (const Error& err) {
        CHECK(err.code() == Errc::BallNotCovered);
    }
    CounterRng rng(8);
    for (int trial = 0; trial < 20; ++trial) {
        Field g(m.n_vertices, kNoValue);
        for (int v : st.s.boundary_list) g[v] = rng.uniform(-1, 1);
        auto r = solve_dirichlet(m, st.s, g);
        cplx p(rng.uniform(-0.3, 0.3), rng.uniform(-0.3, 0.3));
        double rad = rng.uniform(0.1, 0.25);
        auto k = caccioppoli_check(m, H, st.s, st.omega, r.f, p, rad);
        CHECK(k.lhs <= k.rhs);
    }
}

TEST_CASE("t-white-holomorphic pairs")
{
    auto inst = square_lattice(0.25, Box{-0.75, -0.75, 0.75, 0.75});
    const auto& m = inst.map;
    auto d = dual_map(m);
    auto de = dual_embedding(m, d, inst.emb);
    auto cg = corner_graph(m, d);
    auto ts = t_surface(m, d, cg, inst.emb, de);
    DomainSlice all;
    all.interior.assign(m.n_vertices, 0);
    all.boundary.assign(m.n_vertices, 0);
    for (int v = 0; v < m.n_vertices; ++v) {
        (m.boundary[v] ? all.boundary : all.interior)[v] = 1;
        (m.boundary[v] ? all.boundary_list : all.interior_list).push_back(v);
    }
    SUBCASE("constants")
    {
        Field f(m.n_vertices, 1.5);
        Field fs(d.n_vertices(), -0.5);
        auto F = t_white_holo(m, d, cg, ts, inst.emb.H, f, fs);
        for (int e = 0; e < m.n_edges(); ++e) {
            CHECK(std::abs(F.Fo[e][0] - cplx(1.5, -0.5)) < 1e-15);
            CHECK(std::abs(F.Fo[e][1] - cplx(1.5, -0.5)) < 1e-15);
        }
        auto P = integrate_closed_form(cg, ts, F);
        CHECK(P.loop_defect < 1e-13);
    }
    SUBCASE("coordinate pair")
    {
        auto x = field_of(inst.emb.H, [](cplx w) { return w.real(); });
        auto cj = harmonic_conjugate(m, d, all, x);
        auto F = t_white_holo(m, d, cg, ts, inst.emb.H, x, cj.values);
        CHECK(F.white_defect < 1e-12);
        auto P = integrate_closed_form(cg, ts, F);
        CHECK(P.loops > 0);
        CHECK(P.loop_defect < 1e-12);
    }
}

TEST_CASE("gradient field")
{
    auto st = lattice_disc(1.0 / 16);
    const auto& m = st.inst.map;
    const auto& H = st.inst.emb.H;
    auto x = field_of(H, [](cplx w) { return w.real(); });
    auto g = gradient_field(m, H, st.s, x);
    for (cplx z : g.grad) CHECK(std::abs(z - 0.5) < 1e-12);
    auto q = field_of(H, [](cplx w) { return (w * w).real(); });
    auto gq = gradient_field(m, H, st.s, q);
    for (std::size_t t = 0; t < gq.tris.size(); ++t) {
        cplx bc = (H[gq.tris[t].v[0]] + H[gq.tris[t].v[1]] + H[gq.tris[t].v[2]]) / 3.0;
        CHECK(std::abs(gq.grad[t] - bc) < 1.0 / 16);
    }
}

TEST_CASE("gradient maximum principle on random harmonic fields")
{
    auto inst = perturbed_lattice(0.1, Box{-1, -1, 1, 1}, {}, 13);
    const auto& m = inst.map;
    auto s = slice_domain(m, inst.emb.H, Omega::disc(0, 0.8));
    CounterRng rng(3);
    for (int trial = 0; trial < 10; ++trial) {
        Field g(m.n_vertices, kNoValue);
        for (int v : s.boundary_list) g[v] = rng.normal();
        auto r = solve_dirichlet(m, s, g);
        auto gf = gradient_field(m, inst.emb.H, s, r.f);
        CHECK(gf.max_principle);
    }
}

TEST_CASE("oscillation decay")
{
    auto st = lattice_disc(1.0 / 32);
    const auto& H = st.inst.emb.H;
    auto g = boundary_data(st.inst.map, H, st.s, st.omega, [](cplx w) { return (w * w * w).real(); }, BoundaryMode::Trace);
    auto r = solve_dirichlet(st.inst.map, st.s, g);
    auto fit = holder_exponent(H, r.f, cplx(0.1, 0.05), 0.6, 4);
    CHECK(fit.beta > 0);
    for (std::size_t k = 1; k < fit.osc.size(); ++k) CHECK(fit.osc[k] <= fit.osc[k - 1]);
}
