#include "doctest.h"
#include "tma/laplacian.hpp"
#include "tma/meshgen.hpp"
#include "tma/random_walk.hpp"

#include <cstring>

using namespace tma;

TEST_CASE("omp sparse kernels match the serial reference bitwise")
{
    auto inst = perturbed_lattice(1.0 / 32, Box{-1, -1, 1, 1}, {0.2, 5, true}, 9);
    auto s = slice_domain(inst.map, inst.emb.H, Omega::disc(0, 0.9));
    auto sys = reduced_laplacian(inst.map, s.interior);
    std::vector<double> x(sys.a.n), y1(sys.a.n), y2(sys.a.n);
    for (int i = 0; i < sys.a.n; ++i) x[i] = std::cos(1.7 * i) / (1 + i % 7);
    spmv_serial(sys.a, x.data(), y1.data());
    spmv_omp(sys.a, x.data(), y2.data());
    CHECK(std::memcmp(y1.data(), y2.data(), y1.size() * sizeof(double)) == 0);
    double a = dot_serial(x.data(), y1.data(), sys.a.n), b = dot_omp(x.data(), y1.data(), sys.a.n);
    CHECK(std::memcmp(&a, &b, sizeof a) == 0);
}

TEST_CASE("walk batches are reproducible across serial and parallel runs")
{
    auto inst = square_lattice(1.0 / 8, Box{-1, -1, 1, 1});
    auto s = slice_domain(inst.map, inst.emb.H, Omega::disc(0, 0.9));
    WalkEngine w(inst.map, inst.emb.H);
    int v = s.interior_list.front();
    auto obs = [&](const WalkEnd& e, double* o) {
        o[0] = inst.emb.H[e.vertex].real();
        o[1] = e.time;
    };
    auto a = walk_batch(w, v, StopRule::exit_region(s.interior), 3000, 11, 2, obs, {false});
    auto b = walk_batch(w, v, StopRule::exit_region(s.interior), 3000, 11, 2, obs, {true});
    for (int k = 0; k < 2; ++k) {
        CHECK(a[k].n == b[k].n);
        CHECK(a[k].mean == b[k].mean);
        CHECK(a[k].m2 == b[k].m2);
    }
}
