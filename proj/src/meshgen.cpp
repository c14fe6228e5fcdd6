#include "tma/meshgen.hpp"

#include "tma/rng.hpp"

#include <cmath>
#include <numbers>

namespace tma {

namespace {

Instance finish(int n, std::vector<EdgeSpec> edges, const std::vector<cplx>& pos, double delta,
                const std::string& family, bool resolve)
{
    auto tf = faces_from_positions(n, edges, pos);
    Instance inst;
    inst.map = build_planar_map(n, std::move(edges), tf.faces, tf.outer);
    inst.delta = delta;
    inst.family = family;
    for (int v = 0; v < n; ++v)
        if (inst.map.boundary[v]) inst.boundary.emplace_back(v, pos[v]);
    if (resolve) {
        inst.emb = solve_tutte(inst.map, inst.boundary);
    } else {
        inst.emb.H = pos;
        inst.emb.fixed = inst.map.boundary;
        inst.emb.residual = harmonicity_residual(inst.map, pos, inst.emb.fixed);
    }
    return inst;
}

struct Grid {
    int i0, i1, j0, j1;
    int nx() const { return i1 - i0 + 1; }
    int ny() const { return j1 - j0 + 1; }
    int id(int i, int j) const { return (j - j0) * nx() + (i - i0); }
};

Grid grid_in(double delta, const Box& U)
{
    if (!(delta > 0)) throw Error(Errc::MalformedInput, "mesh scale must be positive");
    Grid g{static_cast<int>(std::ceil(U.x0 / delta - 1e-9)), static_cast<int>(std::floor(U.x1 / delta + 1e-9)),
           static_cast<int>(std::ceil(U.y0 / delta - 1e-9)), static_cast<int>(std::floor(U.y1 / delta + 1e-9))};
    if (g.nx() < 2 || g.ny() < 2) throw Error(Errc::MalformedInput, "region holds fewer than 2x2 lattice points");
    return g;
}

std::vector<EdgeSpec> grid_edges(const Grid& g)
{
    std::vector<EdgeSpec> edges;
    for (int j = g.j0; j <= g.j1; ++j)
        for (int i = g.i0; i <= g.i1; ++i) {
            if (i < g.i1) edges.push_back({g.id(i, j), g.id(i + 1, j), 1.0});
            if (j < g.j1) edges.push_back({g.id(i, j), g.id(i, j + 1), 1.0});
        }
    return edges;
}

std::vector<cplx> grid_positions(const Grid& g, double delta)
{
    std::vector<cplx> pos(static_cast<std::size_t>(g.nx()) * g.ny());
    for (int j = g.j0; j <= g.j1; ++j)
        for (int i = g.i0; i <= g.i1; ++i) pos[g.id(i, j)] = cplx(delta * i, delta * j);
    return pos;
}

} // namespace

Instance square_lattice(double delta, const Box& U)
{
    Grid g = grid_in(delta, U);
    return finish(g.nx() * g.ny(), grid_edges(g), grid_positions(g, delta), delta, "square", false);
}

Instance perturbed_lattice(double delta, const Box& U, const PerturbLaw& law, std::uint64_t seed)
{
    if (!(law.lo > 0) || !(law.hi >= law.lo))
        throw Error(Errc::NonPositiveConductance, "perturbation law must stay in (0, inf)");
    Grid g = grid_in(delta, U);
    auto edges = grid_edges(g);
    CounterRng rng(seed);
    for (auto& e : edges) {
        double u = rng.uniform();
        e.c = law.log_uniform ? std::exp(std::log(law.lo) + u * (std::log(law.hi) - std::log(law.lo)))
                              : law.lo + u * (law.hi - law.lo);
    }
    return finish(g.nx() * g.ny(), std::move(edges), grid_positions(g, delta), delta, "perturbed", true);
}

Instance isoradial_rhombic(double delta, const AngleProfile& prof, const Box& U)
{
    if (!(prof.theta_min > 0) || prof.theta_min >= std::numbers::pi / 4)
        throw Error(Errc::AngleOutOfRange, "theta_min must lie in (0, pi/4)");
    if (!(delta > 0)) throw Error(Errc::MalformedInput, "mesh scale must be positive");
    const double pi = std::numbers::pi;
    // quad-graph on (J+1) x (K+1) points, J and K even so the corners are white and no black vertex dangles
    int J = 2 * std::max(1, static_cast<int>(std::ceil((U.x1 - U.x0) / delta / 2)));
    int K = 2 * std::max(1, static_cast<int>(std::ceil((U.y1 - U.y0) / delta / 2)));
    std::vector<double> alpha(J), beta(K);
    for (int j = 0; j < J; ++j) alpha[j] = (j % 2 ? -1 : 1) * prof.alpha_amp;
    for (int k = 0; k < K; ++k) beta[k] = pi / 2 + (k % 2 ? -1 : 1) * prof.beta_amp;
    std::vector<cplx> colx(J + 1, 0), rowy(K + 1, 0);
    for (int j = 0; j < J; ++j) colx[j + 1] = colx[j] + delta * std::polar(1.0, alpha[j]);
    for (int k = 0; k < K; ++k) rowy[k + 1] = rowy[k] + delta * std::polar(1.0, beta[k]);
    const cplx centre = 0.5 * (colx[J] + rowy[K]);
    const cplx target(0.5 * (U.x0 + U.x1), 0.5 * (U.y0 + U.y1));

    std::vector<int> id((J + 1) * (K + 1), -1);
    std::vector<cplx> pos;
    for (int k = 0; k <= K; ++k)
        for (int j = 0; j <= J; ++j)
            if ((j + k) % 2 == 1) {
                id[k * (J + 1) + j] = static_cast<int>(pos.size());
                pos.push_back(colx[j] + rowy[k] - centre + target);
            }
    std::vector<EdgeSpec> edges;
    for (int k = 0; k < K; ++k)
        for (int j = 0; j < J; ++j) {
            double angle = beta[k] - alpha[j]; // rhombus angle at (j,k)
            const bool black_origin = (j + k) % 2 == 1;
            double theta = black_origin ? angle / 2 : (pi - angle) / 2;
            if (theta < prof.theta_min - 1e-12 || theta > pi / 2 - prof.theta_min + 1e-12)
                throw Error(Errc::AngleOutOfRange, "rhombus half-angle " + std::to_string(theta) +
                                                       " outside [theta_min, pi/2 - theta_min]");
            int a, b;
            if (black_origin) {
                a = id[k * (J + 1) + j];
                b = id[(k + 1) * (J + 1) + j + 1];
            } else {
                a = id[k * (J + 1) + j + 1];
                b = id[(k + 1) * (J + 1) + j];
            }
            edges.push_back({a, b, std::tan(theta)});
        }
    return finish(static_cast<int>(pos.size()), std::move(edges), pos, delta, "isoradial", false);
}

} // namespace tma
