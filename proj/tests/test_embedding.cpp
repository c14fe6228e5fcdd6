#include "doctest.h"
#include "fixtures.hpp"

#include <cmath>

using namespace tma;

namespace {

struct Full {
    DualMap d;
    DualEmbedding de;
    PiecewisePotential p;
};

Full full(const PlanarMap& m, const HarmonicEmbedding& e)
{
    Full f;
    f.d = dual_map(m);
    f.de = dual_embedding(m, f.d, e);
    f.p = potential(m, f.d, e, f.de);
    return f;
}

} // namespace

TEST_CASE("Tutte embedding of the star")
{
    auto m = fx::star();
    auto e = solve_tutte(m, fx::star_corners());
    CHECK(std::abs(e.H[0] - cplx(0.5, 0.5)) < 1e-13);
    CHECK(e.residual <= 1e-10);

    auto mw = fx::star(3.0);
    auto ew = solve_tutte(mw, fx::star_corners());
    CHECK(std::abs(ew.H[0] - cplx(2, 2) / 6.0) < 1e-13);
}

TEST_CASE("Tutte embedding of a path")
{
    std::vector<EdgeSpec> e = {{0, 1, 1}, {1, 2, 1}};
    auto m = build_planar_map(3, e, {{0, 1, 2, 1}}, 0);
    auto h = solve_tutte(m, {{0, {0, 0}}, {2, {1, 0}}});
    CHECK(std::abs(h.H[1] - cplx(0.5, 0)) < 1e-14);
}

TEST_CASE("disconnected interior is reported")
{
    std::vector<EdgeSpec> e = {{0, 1, 1}, {1, 2, 1}};
    auto m = build_planar_map(3, e, {{0, 1, 2, 1}}, 0);
    try {
        solve_tutte(m, {});
        FAIL("accepted");
    } catch (const Error& err) {
        CHECK(err.code() == Errc::DisconnectedInterior);
    }
}

TEST_CASE("dual increments of the star")
{
    auto m = fx::star();
    auto e = solve_tutte(m, fx::star_corners());
    auto f = full(m, e);
    // edge 1 runs from the centre to the corner at 1
    cplx inc = f.de.Hs[f.d.left[1]] - f.de.Hs[f.d.right[1]];
    CHECK(std::abs(inc - cplx(0.5, 0.5)) < 1e-14);
    // increments around the inner vertex sum to zero
    cplx s = 0;
    for (int h : m.out_half_edges(0)) {
        int ed = h >> 1;
        cplx i = f.de.Hs[f.d.left[ed]] - f.de.Hs[f.d.right[ed]];
        s += (h & 1) ? -i : i;
    }
    CHECK(std::abs(s) < 1e-14);
    CHECK(f.de.closure_defect < 1e-12);
    CHECK(f.p.expression_gap < 1e-12);
    // Phi increment on edge (v0, corner 0) through the right face
    double expect = (std::conj(f.de.Hs[f.d.right[0]]) * (e.H[1] - e.H[0])).real();
    CHECK(std::abs(f.p.Phi[1] - f.p.Phi[0] - expect) < 1e-14);
}

TEST_CASE("square lattice dual is the face centre map")
{
    auto inst = square_lattice(1.0, Box{0, 0, 3, 3});
    auto f = full(inst.map, inst.emb);
    cplx shift = 0;
    bool first = true;
    for (int k = 0; k < f.d.n_inner; ++k) {
        cplx centre = 0;
        for (int v : inst.map.faces[f.d.inner_face[k]]) centre += inst.emb.H[v];
        centre /= 4.0;
        if (first) shift = f.de.Hs[k] - centre, first = false;
        CHECK(std::abs(f.de.Hs[k] - centre - shift) < 1e-12);
    }
    CHECK(fx::quadratic_gap(f.p.Phi, inst.emb.H, 1.0) < 1e-12);
    CHECK(f.p.face_fit_defect < 1e-12);
}

TEST_CASE("potential scales with the conductances")
{
    auto inst = perturbed_lattice(0.25, Box{-1, -1, 1, 1}, {}, 3);
    auto f = full(inst.map, inst.emb);
    auto edges = inst.map.edges;
    for (auto& e : edges) e.c *= 2.5;
    auto m2 = build_planar_map(inst.map.n_vertices, edges, inst.map.faces, inst.map.outer_face);
    auto f2 = full(m2, inst.emb);
    for (int v = 0; v < inst.map.n_vertices; ++v) CHECK(std::abs(f2.p.Phi[v] - 2.5 * f.p.Phi[v]) < 1e-10);
}

TEST_CASE("gradient map lookups")
{
    auto inst = square_lattice(1.0, Box{0, 0, 2, 2});
    auto f = full(inst.map, inst.emb);
    auto g = gradient_map(inst.map, f.d, inst.emb, f.p);
    int k = g.face(cplx(0.4, 0.6));
    REQUIRE(k >= 0);
    cplx shift = f.de.Hs[k] - cplx(0.5, 0.5);
    CHECK(std::abs(g.psi(cplx(1.5, 1.5)) - cplx(1.5, 1.5) - shift) < 1e-12);
    // on the shared edge x = 1 the smaller dual id wins, independent of query order
    int a = g.face(cplx(0.2, 0.5) + cplx(0.8, 0));
    int b = g.face(cplx(1.0, 0.5));
    CHECK(a == b);
    auto all = g.faces.locate_all(cplx(1.0, 0.5));
    CHECK(all.size() == 2);
    CHECK(a == std::min(all[0], all[1]));
    try {
        g.psi(cplx(3, 3));
        FAIL("accepted");
    } catch (const Error& err) {
        CHECK(err.code() == Errc::PointOutsideCoveredRegion);
    }
    // Psi is twice d/dwbar of the piecewise potential inside faces
    double h = 1e-6;
    cplx w(0.3, 1.7);
    cplx grad((g.phi(w + h) - g.phi(w - h)) / (2 * h), (g.phi(w + cplx(0, h)) - g.phi(w - cplx(0, h))) / (2 * h));
    CHECK(std::abs(grad - g.psi(w)) < 1e-8);
}

TEST_CASE("t-surface of the square lattice")
{
    auto inst = square_lattice(1.0, Box{-1, -1, 1, 1});
    const auto& m = inst.map;
    auto d = dual_map(m);
    auto de = dual_embedding(m, d, inst.emb);
    // shift H* so it equals the face centres
    cplx shift = 0;
    {
        cplx centre = 0;
        for (int v : m.faces[d.inner_face[0]]) centre += inst.emb.H[v];
        shift = centre / 4.0 - de.Hs[0];
    }
    for (auto& z : de.Hs) z += shift;
    auto cg = corner_graph(m, d);
    auto ts = t_surface(m, d, cg, inst.emb, de);
    bool seen = false;
    for (int c = 0; c < cg.n_corners(); ++c) {
        if (std::abs(inst.emb.H[cg.corner_vertex[c]]) > 1e-12) continue;
        if (std::abs(de.Hs[cg.corner_dual[c]] - cplx(0.5, 0.5)) > 1e-12) continue;
        CHECK(std::abs(ts.T[c] - cplx(0.25, 0.25)) < 1e-14);
        CHECK(std::abs(ts.O[c] - cplx(0.25, -0.25)) < 1e-14);
        seen = true;
    }
    CHECK(seen);
    auto chk = check_t_surface(m, d, cg, inst.emb, ts);
    CHECK(chk.dT_dO < 1e-12);
    CHECK(chk.white_origami < 1e-12);
    CHECK(chk.black_origami < 1e-12);
    CHECK(chk.w_collapse < 1e-12);
    CHECK(chk.area_identity < 1e-10);
    CHECK(chk.white_rectangles);
}

TEST_CASE("t-surface identities on perturbed and isoradial instances")
{
    std::vector<Instance> insts;
    insts.push_back(perturbed_lattice(0.2, Box{-1, -1, 1, 1}, {}, 11));
    insts.push_back(isoradial_rhombic(0.2, {0.3, 0.2, 0.1}, Box{-1, -1, 1, 1}));
    for (const auto& inst : insts) {
        const auto& m = inst.map;
        auto d = dual_map(m);
        auto de = dual_embedding(m, d, inst.emb);
        auto cg = corner_graph(m, d);
        auto ts = t_surface(m, d, cg, inst.emb, de);
        auto chk = check_t_surface(m, d, cg, inst.emb, ts);
        CHECK(inst.emb.residual < 1e-10);
        CHECK(chk.dT_dO < 1e-12);
        CHECK(chk.white_origami < 1e-12);
        CHECK(chk.black_origami < 1e-12);
        CHECK(chk.w_collapse < 1e-12);
        CHECK(chk.area_identity < 1e-10);
        CHECK(chk.white_rectangles);
        for (int ed = 0; ed < m.n_edges(); ++ed) CHECK(std::abs(std::abs(ts.eta_white[ed]) - 1) < 1e-15);
    }
}

TEST_CASE("lifted balls in the t-chart")
{
    auto inst = perturbed_lattice(0.25, Box{-1, -1, 1, 1}, {}, 5);
    const auto& m = inst.map;
    auto d = dual_map(m);
    auto de = dual_embedding(m, d, inst.emb);
    auto cg = corner_graph(m, d);
    auto ts = t_surface(m, d, cg, inst.emb, de);
    auto chart = t_chart(m, cg, ts);
    // centres near the middle of the chart
    cplx mid = 0.5 * (chart.faces.lo() + chart.faces.hi());
    double span = std::abs(chart.faces.hi() - chart.faces.lo());
    std::vector<cplx> centres = {mid, mid + 0.05 * span, mid - cplx(0, 0.05) * span};
    auto lc = check_lift(chart, centres, 0.1 * span, 400);
    CHECK(lc.ok);
    CHECK(lc.covered == lc.samples);
    CHECK(lc.max_w_ratio <= 2.0);
}

TEST_CASE("path graph has no t-chart")
{
    std::vector<EdgeSpec> e = {{0, 1, 1}, {1, 2, 1}};
    auto m = build_planar_map(3, e, {{0, 1, 2, 1}}, 0);
    auto h = solve_tutte(m, {{0, {0, 0}}, {2, {1, 0}}});
    auto d = dual_map(m);
    auto de = dual_embedding(m, d, h);
    auto cg = corner_graph(m, d);
    auto ts = t_surface(m, d, cg, h, de);
    auto chart = t_chart(m, cg, ts);
    try {
        chart.origami(cplx(0.25, 0.3));
        FAIL("accepted");
    } catch (const Error& err) {
        CHECK(err.code() == Errc::NonInjectiveChart);
    }
}
