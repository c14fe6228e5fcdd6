#include "doctest.h"
#include "fixtures.hpp"
#include "tma/meshgen.hpp"
#include "tma/random_walk.hpp"

#include <cmath>

using namespace tma;

namespace {

DomainSlice star_slice()
{
    DomainSlice s;
    s.interior = {1, 0, 0, 0, 0};
    s.boundary = {0, 1, 1, 1, 1};
    s.interior_list = {0};
    s.boundary_list = {1, 2, 3, 4};
    return s;
}

int nearest(const std::vector<cplx>& H, cplx p)
{
    int best = 0;
    for (std::size_t v = 0; v < H.size(); ++v)
        if (std::abs(H[v] - p) < std::abs(H[best] - p)) best = static_cast<int>(v);
    return best;
}

} // namespace

TEST_CASE("walk normalization")
{
    auto inst = perturbed_lattice(0.1, Box{-1, -1, 1, 1}, {}, 3);
    WalkEngine w(inst.map, inst.emb.H);
    CHECK(w.normalization_defect() < 1e-12);
    CHECK(w.drift_defect() < 1e-9);
}

TEST_CASE("holding times on the square lattice")
{
    double delta = 0.125;
    auto inst = square_lattice(delta, Box{-1, -1, 1, 1});
    WalkEngine w(inst.map, inst.emb.H);
    int v = nearest(inst.emb.H, 0);
    CHECK(1.0 / w.rate(v) == doctest::Approx(delta * delta).epsilon(1e-12));
    Moments mo;
    for (int i = 0; i < 20000; ++i) {
        CounterRng rng(1, i);
        auto tr = w.simulate(v, StopRule::fixed_time(10), rng);
        mo.add(tr.front().hold);
    }
    auto est = mean_estimate(mo, 1);
    CHECK(est.covers(delta * delta));

    CounterRng rng(2);
    auto t0 = w.simulate(v, StopRule::fixed_time(0), rng);
    REQUIRE(t0.size() == 1);
    CHECK(t0[0].vertex == v);
    CHECK(t0[0].hold == 0.0);

    int b = inst.map.boundary_cycle()[0];
    try {
        w.simulate(b, StopRule::fixed_time(1), rng);
        FAIL("accepted");
    } catch (const Error& err) {
        CHECK(err.code() == Errc::StartOnBoundary);
    }
}

TEST_CASE("star graph exit law and occupation")
{
    auto star = fx::star();
    auto e = solve_tutte(star, fx::star_corners());
    WalkEngine w(star, e.H);
    auto s = star_slice();
    for (int corner = 1; corner <= 4; ++corner) {
        Field g(5, 0.0);
        g[corner] = 1;
        auto r = exit_expectation(w, s, 0, g, 40000, 11);
        CHECK(r.covers(0.25));
    }
    auto occ = occupation_green(w, s, 0, 0, 40000, 5);
    CHECK(occ.covers(0.25));
    auto zero = occupation_green(w, s, 0, 2, 100, 5);
    CHECK(zero.estimate == 0.0);
}

TEST_CASE("variance ellipticity on the square lattice")
{
    double delta = 1.0 / 16;
    auto inst = square_lattice(delta, Box{-1, -1, 1, 1});
    WalkEngine w(inst.map, inst.emb.H);
    int v = nearest(inst.emb.H, 0);
    double t = 0.04;
    auto est = variance_ellipticity(w, v, t, {0.0, 0.7, M_PI, 0.7 + M_PI}, 40000, 9);
    for (const auto& r : est) CHECK(std::abs(r.estimate - t / 2) <= r.half_width + 0.01 * t);
    CHECK(est[0].estimate == doctest::Approx(est[2].estimate).epsilon(1e-12));
    CHECK(est[1].estimate == doctest::Approx(est[3].estimate).epsilon(1e-12));
    auto z = variance_ellipticity(w, v, 0, {0.0}, 100, 9);
    CHECK(z[0].estimate == 0.0);
    int near_edge = nearest(inst.emb.H, cplx(0.9, 0));
    CHECK_THROWS_AS(variance_ellipticity(w, near_edge, 0.04, {0.0}, 10, 1), Error);
}

TEST_CASE("crossing probabilities")
{
    double delta = 1.0 / 16;
    auto inst = square_lattice(delta, Box{-1.2, -1.2, 1.2, 1.2});
    WalkEngine w(inst.map, inst.emb.H);
    int v = nearest(inst.emb.H, 0);
    double total = 0;
    for (int k = 0; k < 4; ++k) {
        auto r = crossing_probability(w, v, 1.0, k * M_PI / 2, 20000, 4);
        CHECK(r.covers(0.25));
        CHECK_FALSE(r.flagged);
        total += r.estimate;
    }
    CHECK(total == doctest::Approx(1.0).epsilon(1e-12));
    auto small = crossing_probability(w, v, 1.0, 0, 10, 4);
    CHECK(small.flagged);
    CHECK(small.half_width > 0.1);
}

TEST_CASE("martingales and harmonic measure")
{
    auto inst = perturbed_lattice(0.1, Box{-1, -1, 1, 1}, {}, 12);
    WalkEngine w(inst.map, inst.emb.H);
    auto omega = Omega::disc(0, 0.7);
    auto s = slice_domain(inst.map, inst.emb.H, omega);
    int v = nearest(inst.emb.H, cplx(0.2, -0.1));
    auto mc = martingale_check(w, v, StopRule::exit_region(s.interior), 20000, 3);
    CHECK(mc.ok());

    Field g(inst.map.n_vertices, kNoValue);
    for (int b : s.boundary_list) g[b] = inst.emb.H[b].real() > 0 ? 1.0 : 0.0;
    auto sol = solve_dirichlet(inst.map, s, g);
    auto est = exit_expectation(w, s, v, g, 20000, 8);
    CHECK(est.covers(sol.f[v]));
}

TEST_CASE("batches are reproducible and schedule independent")
{
    auto inst = square_lattice(0.1, Box{-1, -1, 1, 1});
    WalkEngine w(inst.map, inst.emb.H);
    auto s = slice_domain(inst.map, inst.emb.H, Omega::disc(0, 0.8));
    int v = nearest(inst.emb.H, 0);
    WalkOptions serial{false}, par{true};
    auto a = occupation_green(w, s, v, v, 10000, 77, serial);
    auto b = occupation_green(w, s, v, v, 10000, 77, par);
    CHECK(a.estimate == b.estimate);
    CHECK(a.half_width == b.half_width);
}

TEST_CASE("confidence intervals shrink like one over root n")
{
    auto inst = square_lattice(0.1, Box{-1, -1, 1, 1});
    WalkEngine w(inst.map, inst.emb.H);
    auto s = slice_domain(inst.map, inst.emb.H, Omega::disc(0, 0.8));
    int v = nearest(inst.emb.H, 0);
    auto a = occupation_green(w, s, v, v, 4000, 1);
    auto b = occupation_green(w, s, v, v, 16000, 1);
    CHECK(b.half_width / a.half_width == doctest::Approx(0.5).epsilon(0.1));
}
