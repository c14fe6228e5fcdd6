#include "doctest.h"
#include "fixtures.hpp"

#include <cmath>
#include <map>

using namespace tma;

namespace {

double max_phi_quadratic_gap(const Instance& inst)
{
    auto d = dual_map(inst.map);
    auto de = dual_embedding(inst.map, d, inst.emb);
    auto p = potential(inst.map, d, inst.emb, de);
    return fx::quadratic_gap(p.Phi, inst.emb.H, 1.0);
}

std::vector<std::array<int, 3>> fan(const PlanarMap& m)
{
    std::vector<std::array<int, 3>> t;
    for (int f = 0; f < m.n_faces(); ++f) {
        if (f == m.outer_face) continue;
        const auto& c = m.faces[f];
        for (std::size_t k = 1; k + 1 < c.size(); ++k) t.push_back({c[0], c[k], c[k + 1]});
    }
    return t;
}

} // namespace

TEST_CASE("square lattice counts and measure")
{
    auto inst = square_lattice(1.0, Box{0, 0, 2, 2});
    CHECK(inst.map.n_vertices == 9);
    CHECK(inst.map.n_edges() == 12);
    CHECK(inst.map.n_faces() - 1 == 4);
    auto small = square_lattice(0.125, Box{-1, -1, 1, 1});
    CHECK(max_phi_quadratic_gap(small) < 1e-12);
    for (int v = 0; v < small.map.n_vertices; ++v) {
        if (small.map.boundary[v]) continue;
        double mu = 0;
        for (int h : small.map.out_half_edges(v))
            mu += small.map.conductance(h) * std::norm(small.emb.H[small.map.target(h)] - small.emb.H[v]);
        CHECK(mu == doctest::Approx(4 * 0.125 * 0.125).epsilon(1e-14));
    }
}

TEST_CASE("perturbed lattice")
{
    Box U{-1, -1, 1, 1};
    PerturbLaw one{1.0, 1.0, false};
    auto a = perturbed_lattice(0.25, U, one, 1);
    auto b = square_lattice(0.25, U);
    REQUIRE(a.map.n_vertices == b.map.n_vertices);
    for (int v = 0; v < a.map.n_vertices; ++v) CHECK(std::abs(a.emb.H[v] - b.emb.H[v]) < 1e-13);

    PerturbLaw uni{0.5, 2.0, false};
    auto p1 = perturbed_lattice(0.1, U, uni, 42);
    auto p2 = perturbed_lattice(0.1, U, uni, 42);
    for (int v = 0; v < p1.map.n_vertices; ++v) CHECK(p1.emb.H[v] == p2.emb.H[v]);
    for (const auto& e : p1.map.edges) CHECK((e.c >= 0.5 && e.c <= 2.0));
    CHECK(p1.emb.residual < 1e-10);
}

TEST_CASE("isoradial rhombic lattices")
{
    Box U{-1, -1, 1, 1};
    auto sq = isoradial_rhombic(0.2, {0, 0, 0.1}, U);
    for (const auto& e : sq.map.edges) CHECK(e.c == doctest::Approx(1.0).epsilon(1e-14));
    for (int v = 0; v < sq.map.n_vertices; ++v)
        if (!sq.map.boundary[v]) CHECK(sq.map.degree(v) == 4);
    CHECK(sq.emb.residual < 1e-12);

    auto alt = isoradial_rhombic(0.2, {0.35, 0.25, 0.1}, U);
    CHECK(alt.emb.residual < 1e-10);
    CHECK(max_phi_quadratic_gap(alt) < 1e-10);

    try {
        isoradial_rhombic(0.2, {0, 0, 0.0}, U);
        FAIL("accepted");
    } catch (const Error& err) {
        CHECK(err.code() == Errc::AngleOutOfRange);
    }
    try {
        isoradial_rhombic(0.2, {0.7, 0.7, 0.3}, U);
        FAIL("accepted");
    } catch (const Error& err) {
        CHECK(err.code() == Errc::AngleOutOfRange);
    }
}

TEST_CASE("hull of the paraboloid is the unit square lattice")
{
    QuadraticPotential phi(0.5, 0.5);
    auto h = from_convex_potential(phi, 0.25, Box{-1, -1, 1, 1});
    auto sq = square_lattice(0.25, Box{-1, -1, 1, 1});
    CHECK(h.inst.map.n_vertices == sq.map.n_vertices);
    CHECK(h.inst.map.n_edges() == sq.map.n_edges());
    for (const auto& e : h.inst.map.edges) CHECK(e.c == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(h.inst.emb.residual < 1e-12);
}

TEST_CASE("hull of an anisotropic quadratic")
{
    QuadraticPotential phi(1.0, 0.5);
    double delta = 0.125;
    auto h = from_convex_potential(phi, delta, Box{-1, -1, 1, 1});
    const auto& m = h.inst.map;
    for (const auto& e : m.edges) {
        cplx d = h.inst.emb.H[e.v] - h.inst.emb.H[e.u];
        double expect = std::abs(d.imag()) > std::abs(d.real()) ? 2.0 : 1.0;
        CHECK(e.c == doctest::Approx(expect).epsilon(1e-12));
    }
    auto d = dual_map(m);
    auto de = dual_embedding(m, d, h.inst.emb);
    cplx shift = 0;
    for (int k = 0; k < d.n_inner; ++k) {
        int f = d.inner_face[k];
        cplx s = de.Hs[k] - h.cell_grad[f];
        if (k == 0) shift = s;
        CHECK(std::abs(s - shift) < 1e-12);
        cplx centre = 0;
        for (int v : m.faces[f]) centre += h.inst.emb.H[v];
        centre /= static_cast<double>(m.faces[f].size());
        CHECK(std::abs(h.cell_grad[f] - phi.psi(centre)) < 1e-12);
    }
}

TEST_CASE("hull weights ignore affine terms")
{
    struct Shifted : QuadraticPotential {
        Shifted() : QuadraticPotential(1.0, 0.5) {}
        double phi(cplx w) const override { return QuadraticPotential::phi(w) + 0.375 * w.real() - 1.25 * w.imag() + 3; }
    } shifted;
    QuadraticPotential plain(1.0, 0.5);
    auto a = from_convex_potential(plain, 0.25, Box{-1, -1, 1, 1});
    auto b = from_convex_potential(shifted, 0.25, Box{-1, -1, 1, 1});
    REQUIRE(a.inst.map.n_edges() == b.inst.map.n_edges());
    for (int e = 0; e < a.inst.map.n_edges(); ++e) {
        CHECK(a.inst.map.edges[e].u == b.inst.map.edges[e].u);
        CHECK(a.inst.map.edges[e].v == b.inst.map.edges[e].v);
        CHECK(a.inst.map.edges[e].c == doctest::Approx(b.inst.map.edges[e].c).epsilon(1e-9));
    }
}

TEST_CASE("hull of a non-quadratic potential is harmonic")
{
    ExpShearPotential phi(0.3);
    auto h = from_convex_potential(phi, 0.125, Box{-1, -1, 1, 1});
    CHECK(h.inst.emb.residual < 1e-10);
    auto d = dual_map(h.inst.map);
    auto de = dual_embedding(h.inst.map, d, h.inst.emb);
    auto p = potential(h.inst.map, d, h.inst.emb, de);
    // Phi reproduces the samples up to an affine gauge
    std::vector<double> r(p.Phi.size());
    for (std::size_t v = 0; v < r.size(); ++v) r[v] = p.Phi[v] - h.Phi[v];
    const auto& H = h.inst.emb.H;
    // fit r = a x + b y + c through vertices 0, 1 and one off the first row
    int i2 = 0;
    for (std::size_t v = 0; v < H.size(); ++v)
        if (std::abs(cross(H[1] - H[0], H[v] - H[0])) > 1e-6) {
            i2 = static_cast<int>(v);
            break;
        }
    cplx e1 = H[1] - H[0], e2 = H[i2] - H[0];
    double det = cross(e1, e2);
    double da = r[1] - r[0], db = r[i2] - r[0];
    double gx = (da * e2.imag() - db * e1.imag()) / det;
    double gy = (db * e1.real() - da * e2.real()) / det;
    for (std::size_t v = 0; v < r.size(); ++v) {
        double fit = r[0] + gx * (H[v] - H[0]).real() + gy * (H[v] - H[0]).imag();
        CHECK(std::abs(r[v] - fit) < 1e-10);
    }
}

TEST_CASE("hull round trip on a perturbed lattice")
{
    auto inst = perturbed_lattice(0.25, Box{-1, -1, 1, 1}, {}, 9);
    auto d = dual_map(inst.map);
    auto de = dual_embedding(inst.map, d, inst.emb);
    auto p = potential(inst.map, d, inst.emb, de);
    auto h = regular_subdivision(inst.emb.H, p.Phi, fan(inst.map), inst.delta, {}, 1e-9);
    REQUIRE(h.inst.map.n_edges() == inst.map.n_edges());
    std::map<std::pair<int, int>, double> want;
    for (const auto& e : inst.map.edges) want[{std::min(e.u, e.v), std::max(e.u, e.v)}] = e.c;
    for (const auto& e : h.inst.map.edges) {
        auto it = want.find({std::min(e.u, e.v), std::max(e.u, e.v)});
        REQUIRE(it != want.end());
        if (inst.map.boundary[e.u] && inst.map.boundary[e.v]) continue;
        CHECK(e.c == doctest::Approx(it->second).epsilon(1e-8));
    }
}

TEST_CASE("hull errors")
{
    try {
        regular_subdivision({0, 1, 2}, {0, 1, 4}, {{0, 1, 2}}, 1.0);
        FAIL("accepted");
    } catch (const Error& err) {
        CHECK(err.code() == Errc::DegenerateHull);
    }
    struct Saddle : ConvexPotential {
        double phi(cplx w) const override { return w.real() * w.real() - w.imag() * w.imag(); }
        cplx psi(cplx w) const override { return {2 * w.real(), -2 * w.imag()}; }
        Mat2 hessian(cplx) const override { return {2, 0, -2}; }
        std::string tag() const override { return "saddle"; }
    } saddle;
    try {
        from_convex_potential(saddle, 0.25, Box{-1, -1, 1, 1});
        FAIL("accepted");
    } catch (const Error& err) {
        CHECK(err.code() == Errc::NonConvexInput);
    }
    struct Flat : ConvexPotential {
        double phi(cplx w) const override { return std::abs(w.real()); }
        cplx psi(cplx w) const override { return {w.real() > 0 ? 1.0 : -1.0, 0}; }
        Mat2 hessian(cplx) const override { return {0, 0, 0}; }
        std::string tag() const override { return "flat"; }
    } flat;
    try {
        from_convex_potential(flat, 0.25, Box{-1, -1, 1, 1});
        FAIL("accepted");
    } catch (const Error& err) {
        CHECK(err.code() == Errc::NonConvexInput);
    }
}
