#include "tma/continuum.hpp"
#include "tma/laplacian.hpp"
#include "tma/meshgen.hpp"
#include "tma/random_walk.hpp"
#include "tma/regularity.hpp"

#include <benchmark/benchmark.h>

#include <map>

using namespace tma;

namespace {

struct Lattice {
    Instance inst;
    DomainSlice s;
    ReducedSystem sys;
    std::vector<double> x;

    explicit Lattice(double delta)
        : inst(square_lattice(delta, Box{-1, -1, 1, 1})),
          s(slice_domain(inst.map, inst.emb.H, Omega::disc(0, 0.95))),
          sys(reduced_laplacian(inst.map, s.interior))
    {
        x.resize(sys.a.n);
        for (int i = 0; i < sys.a.n; ++i) x[i] = std::sin(0.1 * i);
    }
};

const Lattice& lattice(int inv_delta)
{
    static std::map<int, Lattice> cache;
    auto it = cache.find(inv_delta);
    if (it == cache.end()) it = cache.emplace(inv_delta, Lattice(1.0 / inv_delta)).first;
    return it->second;
}

void BM_spmv_serial(benchmark::State& st)
{
    const auto& L = lattice(static_cast<int>(st.range(0)));
    std::vector<double> y(L.sys.a.n);
    for (auto _ : st) {
        spmv_serial(L.sys.a, L.x.data(), y.data());
        benchmark::DoNotOptimize(y.data());
    }
    st.SetItemsProcessed(st.iterations() * static_cast<long>(L.sys.a.val.size()));
}

void BM_spmv_omp(benchmark::State& st)
{
    const auto& L = lattice(static_cast<int>(st.range(0)));
    std::vector<double> y(L.sys.a.n);
    for (auto _ : st) {
        spmv_omp(L.sys.a, L.x.data(), y.data());
        benchmark::DoNotOptimize(y.data());
    }
    st.SetItemsProcessed(st.iterations() * static_cast<long>(L.sys.a.val.size()));
}

void BM_dot_serial(benchmark::State& st)
{
    std::vector<double> a(st.range(0), 0.5), b(st.range(0), 2.0);
    for (auto _ : st) benchmark::DoNotOptimize(dot_serial(a.data(), b.data(), static_cast<int>(a.size())));
}

void BM_dot_omp(benchmark::State& st)
{
    std::vector<double> a(st.range(0), 0.5), b(st.range(0), 2.0);
    for (auto _ : st) benchmark::DoNotOptimize(dot_omp(a.data(), b.data(), static_cast<int>(a.size())));
}

void walks(benchmark::State& st, bool parallel)
{
    const Lattice& L = lattice(16);
    WalkEngine w(L.inst.map, L.inst.emb.H);
    int v = L.s.interior_list[L.s.interior_list.size() / 2];
    StopRule stop = StopRule::exit_region(L.s.interior);
    for (auto _ : st) {
        auto mo = walk_batch(w, v, stop, st.range(0), 7, 1, [](const WalkEnd& e, double* o) { o[0] = e.time; },
                             {parallel});
        benchmark::DoNotOptimize(mo);
    }
    st.SetItemsProcessed(st.iterations() * st.range(0));
}

void BM_walk_batch_serial(benchmark::State& st) { walks(st, false); }
void BM_walk_batch_omp(benchmark::State& st) { walks(st, true); }

void scan(benchmark::State& st, bool parallel)
{
    static Instance inst = perturbed_lattice(1.0 / 32, Box{-1, -1, 1, 1}, {0.5, 2, true}, 3);
    static Derived d = derive(inst.map, inst.emb);
    ScanOptions opt;
    opt.parallel = parallel;
    opt.per_length = static_cast<int>(st.range(0));
    for (auto _ : st) benchmark::DoNotOptimize(check_conv(d.gm, Omega::disc(0, 0.6), 1.0 / 32, 4, opt));
}

void BM_scan_serial(benchmark::State& st) { scan(st, false); }
void BM_scan_omp(benchmark::State& st) { scan(st, true); }

void assemble(benchmark::State& st, bool parallel)
{
    FeMesh mesh = fe_mesh(Omega::disc(0, 1), 1.0 / st.range(0));
    auto phi = make_potential("expshear:0.1");
    std::vector<ElementMatrix> out;
    for (auto _ : st) {
        if (parallel) assemble_elements_omp(mesh, *phi, out);
        else assemble_elements_serial(mesh, *phi, out);
        benchmark::DoNotOptimize(out.data());
    }
    st.SetItemsProcessed(st.iterations() * static_cast<long>(mesh.tris.size()));
}

void BM_assemble_elements_serial(benchmark::State& st) { assemble(st, false); }
void BM_assemble_elements_omp(benchmark::State& st) { assemble(st, true); }

} // namespace

BENCHMARK(BM_spmv_serial)->Arg(64)->Arg(256);
BENCHMARK(BM_spmv_omp)->Arg(64)->Arg(256);
BENCHMARK(BM_dot_serial)->Arg(1 << 16)->Arg(1 << 20);
BENCHMARK(BM_dot_omp)->Arg(1 << 16)->Arg(1 << 20);
BENCHMARK(BM_walk_batch_serial)->Arg(2000)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_walk_batch_omp)->Arg(2000)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_scan_serial)->Arg(64)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_scan_omp)->Arg(64)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_assemble_elements_serial)->Arg(64)->Arg(256)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_assemble_elements_omp)->Arg(64)->Arg(256)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
