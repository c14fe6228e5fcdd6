#include "doctest.h"
#include "fixtures.hpp"
#include "tma/meshgen.hpp"
#include "tma/regularity.hpp"

#include <cmath>

using namespace tma;

TEST_CASE("CONV on the square lattice")
{
    double delta = 1.0 / 16;
    auto inst = square_lattice(delta, Box{-1, -1, 1, 1});
    auto x = derive(inst.map, inst.emb);
    auto region = Omega::disc(0, 0.9);
    auto r = check_conv(x.gm, region, delta, 4, {});
    // piecewise-linear interpolation of 1/2|w|^2 is off by at most delta^2/4
    CHECK(r.min_value >= 0.25 - 0.5 / 16);
    CHECK(r.max_value <= 0.25 + 0.5 / 16);
    CHECK(r.estimate == doctest::Approx(0.25).epsilon(0.15));
    CHECK(std::abs(conv_ratio(x.gm, r.min_witness.points[0], r.min_witness.points[1]) - r.min_value) <= 1e-9);
    CHECK(std::abs(conv_ratio(x.gm, r.max_witness.points[0], r.max_witness.points[1]) - r.max_value) <= 1e-9);
    CHECK(std::abs(r.min_witness.points[1] - r.min_witness.points[0]) >= 4 * delta * (1 - 1e-12));
    CHECK(r.pass);
}

TEST_CASE("CONV on the anisotropic hull family")
{
    QuadraticPotential phi(1.0, 0.5);
    double delta = 1.0 / 16;
    auto h = from_convex_potential(phi, delta, Box{-1, -1, 1, 1});
    auto x = derive(h.inst.map, h.inst.emb);
    auto r = check_conv(x.gm, Omega::disc(0, 0.8), delta, 4, {});
    // eigenvalues 2 and 1 of the Hessian give ratios in [1/4, 1/2]
    CHECK(r.min_value >= 0.25 - 0.05);
    CHECK(r.max_value <= 0.5 + 0.05);
    CHECK(r.max_value >= 0.45);
    CHECK(r.min_value <= 0.3);
}

TEST_CASE("CONV scan errors and determinism")
{
    auto inst = square_lattice(0.25, Box{-1, -1, 1, 1});
    auto x = derive(inst.map, inst.emb);
    try {
        check_conv(x.gm, Omega::disc(cplx(5, 5), 0.5), 0.25, 4, {});
        FAIL("accepted");
    } catch (const Error& err) {
        CHECK(err.code() == Errc::EmptySampleSet);
    }
    ScanOptions ser, par;
    ser.parallel = false;
    auto a = check_conv(x.gm, Omega::disc(0, 0.9), 0.25, 2, ser);
    auto b = check_conv(x.gm, Omega::disc(0, 0.9), 0.25, 2, par);
    CHECK(a.min_value == b.min_value);
    CHECK(a.max_value == b.max_value);
    CHECK(a.min_witness.points == b.min_witness.points);
}

TEST_CASE("LIP on the unit square lattice")
{
    auto inst = square_lattice(1.0, Box{-16, -16, 16, 16});
    auto x = derive(inst.map, inst.emb);
    ScanOptions opt;
    opt.per_length = 2000;
    auto r = check_lip(x.gm, Omega::box(-14, -14, 14, 14), 1.0, 2, opt);
    CHECK(r.min_value >= 1 - std::sqrt(2.0) / 2 - 1e-12);
    cplx q = lip_quotient(x.gm, r.min_witness.points[0], r.min_witness.points[1]);
    CHECK(std::abs(q.real() - r.min_value) <= 1e-9);
    // long segments: modulus ratio close to 1
    auto lng = check_lip(x.gm, Omega::box(-14, -14, 14, 14), 1.0, 16, opt);
    CHECK(lng.max_value <= 1 + std::sqrt(2.0) / 16 + 1e-12);
}

TEST_CASE("CONV and LIP constants convert into each other")
{
    for (std::uint64_t seed : {1u, 2u, 3u}) {
        double delta = 1.0 / 16;
        auto inst = perturbed_lattice(delta, Box{-1.5, -1.5, 1.5, 1.5}, {}, seed);
        auto x = derive(inst.map, inst.emb);
        // CONV at C gives LIP at C on the 4 C delta interior; LIP at C gives CONV at 2C
        double C = 4;
        auto region = Omega::disc(0, 1.4);
        auto inner = Omega::disc(0, 1.4 - 4 * C * delta);
        auto c = check_conv(x.gm, region, delta, C, {});
        auto c2 = check_conv(x.gm, region, delta, 2 * C, {});
        auto l = check_lip(x.gm, inner, delta, C, {});
        auto l2 = check_lip(x.gm, region, delta, C, {});
        CHECK(c.estimate > 0);
        CHECK(l.estimate > 0);
        CHECK(l.estimate >= 0.9 * c.estimate / 8);
        CHECK(c2.estimate >= 0.9 * l2.estimate / 4);
    }
}

TEST_CASE("Lip(kappa, delta) of t-surfaces")
{
    double delta = 1.0 / 8;
    auto inst = isoradial_rhombic(delta, {0.3, 0.2, 0.1}, Box{-1, -1, 1, 1});
    auto x = derive(inst.map, inst.emb);
    cplx mid = 0.5 * (x.chart.faces.lo() + x.chart.faces.hi());
    auto r = check_lip_kdelta(x.chart, Omega::disc(mid, 0.5), delta, {});
    CHECK(r.estimate < 1);
    CHECK(r.pass);
    CHECK(std::abs(lipkd_ratio(x.chart, r.max_witness.points[0], r.max_witness.points[1]) - r.max_value) <= 1e-9);

    std::vector<EdgeSpec> e = {{0, 1, 1}, {1, 2, 1}};
    auto m = build_planar_map(3, e, {{0, 1, 2, 1}}, 0);
    auto h = solve_tutte(m, {{0, {0, 0}}, {2, {1, 0}}});
    auto d = dual_map(m);
    auto de = dual_embedding(m, d, h);
    auto cg = corner_graph(m, d);
    auto ts = t_surface(m, d, cg, h, de);
    auto chart = t_chart(m, cg, ts);
    try {
        check_lip_kdelta(chart, Omega::disc(0, 2), 0.1, {});
        FAIL("accepted");
    } catch (const Error& err) {
        CHECK(err.code() == Errc::NonInjectiveChart);
    }
}

TEST_CASE("measures on the square lattice")
{
    double delta = 0.25;
    auto inst = square_lattice(delta, Box{-1, -1, 1, 1});
    auto x = derive(inst.map, inst.emb);
    auto t = measures(inst.map, x.cg, x.ts, inst.emb.H);
    REQUIRE(t.alphas.size() == 16);
    for (int v = 0; v < inst.map.n_vertices; ++v) {
        if (inst.map.boundary[v]) continue;
        CHECK(t.mu[v] == doctest::Approx(4 * delta * delta).epsilon(1e-12));
        CHECK(t.mu_alpha[v][0] == doctest::Approx(2 * delta * delta).epsilon(1e-12));
    }
    CHECK(t.area_defect < 1e-12);
    CHECK(t.alpha_defect < 1e-12);
    CHECK(t.dominated);
}

TEST_CASE("measures on generated families")
{
    auto a = perturbed_lattice(0.125, Box{-1, -1, 1, 1}, {}, 17);
    auto b = isoradial_rhombic(0.125, {0.3, 0.2, 0.1}, Box{-1, -1, 1, 1});
    for (const Instance* inst : {&a, &b}) {
        auto x = derive(inst->map, inst->emb);
        auto t = measures(inst->map, x.cg, x.ts, inst->emb.H);
        CHECK(t.area_defect < 1e-10);
        CHECK(t.alpha_defect < 1e-10);
        CHECK(t.dominated);
    }
}

TEST_CASE("RW property on the square lattice")
{
    double delta = 1.0 / 16;
    auto inst = square_lattice(delta, Box{-1, -1, 1, 1});
    WalkEngine w(inst.map, inst.emb.H);
    RwOptions opt;
    opt.centres = 3;
    opt.walk_budget = 4000;
    auto r = check_rw_property(w, Omega::disc(0, 0.8), delta, 4, opt);
    // 45 lattice points lie strictly inside a disc of radius 4 about a lattice point
    double bmin = 0, bmax = 0;
    for (auto& [k, v] : r.details) {
        if (k == "mu_ball_min") bmin = v;
        if (k == "mu_ball_max") bmax = v;
    }
    CHECK(bmin == doctest::Approx(4 * 45).epsilon(1e-12));
    CHECK(bmax == doctest::Approx(4 * 45).epsilon(1e-12));
    CHECK(r.estimate > 0);
    opt.walk_budget = 0;
    try {
        check_rw_property(w, Omega::disc(0, 0.8), delta, 4, opt);
        FAIL("accepted");
    } catch (const Error& err) {
        CHECK(err.code() == Errc::BudgetTooSmall);
    }
}

TEST_CASE("face fatness")
{
    std::vector<cplx> sq = {{0, 0}, {1, 0}, {1, 1}, {0, 1}};
    CHECK(fan_inradius(sq) == doctest::Approx((2 - std::sqrt(2.0)) / 2).epsilon(1e-12));
    CHECK(face_fatness(sq, 0.2));
    CHECK_FALSE(face_fatness(sq, 0.3));
    std::vector<cplx> needle = {{0, 0}, {1, 0}, {0.5, 1e-6}};
    CHECK_FALSE(face_fatness(needle, 1e-3));
    std::vector<cplx> flat = {{0, 0}, {1, 0}, {2, 0}};
    try {
        face_fatness(flat, 0.1);
        FAIL("accepted");
    } catch (const Error& err) {
        CHECK(err.code() == Errc::DegenerateFace);
    }
}

TEST_CASE("EXP-FAT check")
{
    auto inst = square_lattice(0.125, Box{-1, -1, 1, 1});
    auto lat = exp_fat_check(inst.map, inst.emb.H, Omega::disc(0, 1.5), 0.125, 0.25);
    CHECK(lat.pass);
    CHECK(lat.samples == 0);

    // 4 x 4 vertex grid whose middle row has height 1e-6 and no inner rungs
    std::vector<double> ys = {0, 1, 1 + 1e-6, 2};
    std::vector<cplx> pos;
    for (double y : ys)
        for (int i = 0; i < 4; ++i) pos.push_back({static_cast<double>(i), y});
    auto id = [](int i, int j) { return j * 4 + i; };
    std::vector<EdgeSpec> edges;
    for (int j = 0; j < 4; ++j)
        for (int i = 0; i < 3; ++i) edges.push_back({id(i, j), id(i + 1, j), 1});
    for (int j = 0; j < 3; ++j)
        for (int i = 0; i < 4; ++i)
            if (j != 1 || i == 0 || i == 3) edges.push_back({id(i, j), id(i, j + 1), 1});
    auto tf = faces_from_positions(16, edges, pos);
    auto m = build_planar_map(16, edges, tf.faces, tf.outer);
    auto r = exp_fat_check(m, pos, Omega::box(-0.5, -0.5, 3.5, 2.5), 1.0, 2.0);
    CHECK_FALSE(r.pass);
    CHECK(r.samples == 1);
    CHECK(r.max_value == doctest::Approx(std::sqrt(9 + 1e-12)).epsilon(1e-12));
    CHECK(r.max_witness.points.size() == 8);
    auto vac = exp_fat_check(m, pos, Omega::box(-0.5, -0.5, 3.5, 2.5), 1.0, 5.0);
    CHECK(vac.pass);
}
