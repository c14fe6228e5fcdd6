// tma: command-line front end.
#include "tma/continuum.hpp"
#include "tma/discrete_harmonic.hpp"
#include "tma/expr.hpp"
#include "tma/graph_io.hpp"
#include "tma/harness.hpp"
#include "tma/meshgen.hpp"
#include "tma/random_walk.hpp"
#include "tma/regularity.hpp"
#include "tma/render.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <cstdio>
#include <iostream>

using namespace tma;
using nlohmann::ordered_json;

namespace {

constexpr int kCheckFailed = 3;

ordered_json pt(cplx w) { return ordered_json::array({w.real(), w.imag()}); }

ordered_json value_or_null(double x) { return x == x ? ordered_json(x) : ordered_json(nullptr); }

int dense_id(const GraphFile& g, int id)
{
    for (std::size_t k = 0; k < g.ids.size(); ++k)
        if (g.ids[k] == id) return static_cast<int>(k);
    throw Error(Errc::MalformedInput, "no vertex with id " + std::to_string(id));
}

// Every non-boundary vertex is interior.
DomainSlice whole_map(const PlanarMap& m)
{
    DomainSlice s;
    s.interior.assign(m.n_vertices, 0);
    s.boundary.assign(m.n_vertices, 0);
    for (int v = 0; v < m.n_vertices; ++v) {
        if (m.boundary[v]) { s.boundary[v] = 1; s.boundary_list.push_back(v); }
        else { s.interior[v] = 1; s.interior_list.push_back(v); }
    }
    return s;
}

std::string field_json(const GraphFile& g, const Field& f, double residual)
{
    ordered_json j;
    j["ids"] = g.ids;
    j["values"] = ordered_json::array();
    for (double x : f) j["values"].push_back(value_or_null(x));
    j["residual"] = residual;
    return j.dump(1) + "\n";
}

std::string report_json(const PropertyReport& r)
{
    auto witness = [](const Witness& w) {
        ordered_json j;
        j["points"] = ordered_json::array();
        for (cplx p : w.points) j["points"].push_back(pt(p));
        j["value"] = value_or_null(w.value);
        return j;
    };
    ordered_json j;
    j["property"] = r.property;
    j["delta"] = r.delta;
    j["C"] = r.C;
    j["min"] = value_or_null(r.min_value);
    j["max"] = value_or_null(r.max_value);
    j["estimate"] = value_or_null(r.estimate);
    j["ci_half_width"] = r.ci_half_width;
    j["samples"] = r.samples;
    j["threshold"] = r.threshold;
    j["pass"] = r.pass;
    j["min_witness"] = witness(r.min_witness);
    j["max_witness"] = witness(r.max_witness);
    j["details"] = ordered_json::object();
    for (const auto& [k, v] : r.details) j["details"][k] = value_or_null(v);
    return j.dump(1) + "\n";
}

ordered_json estimator(const EstimatorResult& e)
{
    return {{"estimate", e.estimate}, {"half_width", e.half_width}, {"n", e.n}, {"flagged", e.flagged}};
}

void emit(const std::string& path, const std::string& text)
{
    if (path.empty() || path == "-") std::cout << text;
    else write_text(path, text);
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Discrete harmonic embeddings, t-surfaces and their continuum limits"};
    app.require_subcommand(1);
    int status = 0;

    // gen
    auto* gen = app.add_subcommand("gen", "Generate a graph family instance");
    std::string gen_family = "square", gen_potential = "quad", gen_region = "square:-1,1", gen_out = "-";
    double gen_delta = 0.125, gen_lo = 0.5, gen_hi = 2, gen_alpha = 0.3, gen_beta = 0.2;
    std::uint64_t gen_seed = 1;
    gen->add_option("--family", gen_family, "square|perturbed|isoradial|hull")->check(CLI::IsMember({"square", "perturbed", "isoradial", "hull"}));
    gen->add_option("--potential", gen_potential, "quad|aniso:a,b|expshear:eps|file:phi.json");
    gen->add_option("--delta", gen_delta)->required();
    gen->add_option("--region", gen_region, "square:a,b or box:x0,y0,x1,y1");
    gen->add_option("--seed", gen_seed);
    gen->add_option("--lo", gen_lo, "perturbed: smallest conductance");
    gen->add_option("--hi", gen_hi, "perturbed: largest conductance");
    gen->add_option("--alpha", gen_alpha, "isoradial: column angle amplitude");
    gen->add_option("--beta", gen_beta, "isoradial: row angle amplitude");
    gen->add_option("--out", gen_out);
    gen->callback([&] {
        Omega r = Omega::parse(gen_region);
        if (r.kind == Omega::Kind::Disc) throw Error(Errc::MalformedInput, "--region must be a square or box");
        Box U{r.poly[0].real(), r.poly[0].imag(), r.poly[2].real(), r.poly[2].imag()};
        Instance inst;
        if (gen_family == "square") inst = square_lattice(gen_delta, U);
        else if (gen_family == "perturbed") inst = perturbed_lattice(gen_delta, U, {gen_lo, gen_hi, true}, gen_seed);
        else if (gen_family == "isoradial") inst = isoradial_rhombic(gen_delta, {gen_alpha, gen_beta, 0.1}, U);
        else inst = from_convex_potential(*make_potential(gen_potential), gen_delta, U).inst;
        emit(gen_out, dump_graph(inst.map, inst.boundary));
    });

    // embed
    auto* embed = app.add_subcommand("embed", "Tutte embedding, dual embedding and potential");
    std::string embed_graph, embed_out = "-";
    embed->add_option("--graph", embed_graph)->required();
    embed->add_option("--out", embed_out);
    embed->callback([&] {
        GraphFile g = load_graph(embed_graph);
        HarmonicEmbedding e = solve_tutte(g.map, g.boundary);
        Derived d = derive(g.map, e);
        emit(embed_out, dump_embedding(g, e, d));
        std::cerr << "residual " << e.residual << "\n";
    });

    // render
    auto* render = app.add_subcommand("render", "Draw an embedding as SVG");
    std::string render_emb, render_what = "embedding", render_svg = "-";
    render->add_option("--emb,--graph", render_emb)->required();
    render->add_option("--what", render_what)->check(CLI::IsMember({"embedding", "dual", "tembedding"}));
    render->add_option("--svg", render_svg);
    render->callback([&] {
        GraphFile g = load_graph(render_emb);
        HarmonicEmbedding e = embedding_of(g);
        if (render_what == "embedding") {
            emit(render_svg, svg_embedding(g.map, e.H));
            return;
        }
        Derived d = derive(g.map, e);
        if (render_what == "dual") emit(render_svg, svg_dual(g.map, d.d, e.H, d.de.Hs));
        else emit(render_svg, svg_tembedding(g.map, d.cg, d.ts));
    });

    // check
    auto* check = app.add_subcommand("check", "Estimate a regularity property");
    std::string check_prop, check_graph, check_out = "-", check_region;
    double check_delta = 0, check_C = 4, check_dp = 1, check_threshold = 0;
    int check_per_length = 256;
    long check_budget = 2000;
    std::uint64_t check_seed = 1;
    check->add_option("--property", check_prop)->required()->check(CLI::IsMember({"conv", "lip", "lipkd", "rw", "expfat"}));
    check->add_option("--graph,--emb", check_graph)->required();
    check->add_option("--delta", check_delta)->required();
    check->add_option("--C", check_C, "segment scale multiplier");
    check->add_option("--region", check_region, "region spec; default: disc inscribed in the boundary");
    check->add_option("--delta-prime", check_dp, "expfat: delta'");
    check->add_option("--threshold", check_threshold);
    check->add_option("--per-length", check_per_length);
    check->add_option("--budget", check_budget, "rw: walks per centre");
    check->add_option("--seed", check_seed);
    check->add_option("--out", check_out);
    check->callback([&] {
        GraphFile g = load_graph(check_graph);
        HarmonicEmbedding e = embedding_of(g);
        Omega region;
        if (!check_region.empty()) {
            region = Omega::parse(check_region);
        } else {
            cplx c = 0;
            int n = 0;
            for (int v = 0; v < g.map.n_vertices; ++v)
                if (g.map.boundary[v]) { c += e.H[v]; ++n; }
            c /= std::max(n, 1);
            double r = std::numeric_limits<double>::infinity();
            for (int v = 0; v < g.map.n_vertices; ++v)
                if (g.map.boundary[v]) r = std::min(r, std::abs(e.H[v] - c));
            region = Omega::disc(c, 0.8 * r);
        }
        ScanOptions so;
        so.per_length = check_per_length;
        so.seed = check_seed;
        so.threshold = check_threshold;
        PropertyReport r;
        if (check_prop == "expfat") {
            r = exp_fat_check(g.map, e.H, region, check_delta, check_dp);
        } else if (check_prop == "rw") {
            WalkEngine w(g.map, e.H);
            RwOptions ro;
            ro.walk_budget = check_budget;
            ro.seed = check_seed;
            ro.threshold = check_threshold;
            r = check_rw_property(w, region, check_delta, check_C, ro);
        } else {
            Derived d = derive(g.map, e);
            if (check_prop == "conv") r = check_conv(d.gm, region, check_delta, check_C, so);
            else if (check_prop == "lip") r = check_lip(d.gm, region, check_delta, check_C, so);
            else {
                if (check_threshold == 0) so.threshold = 1;
                r = check_lip_kdelta(d.chart, region, check_delta, so);
            }
        }
        emit(check_out, report_json(r));
        if (!r.pass) status = kCheckFailed;
    });

    // dirichlet
    auto* dir = app.add_subcommand("dirichlet", "Discrete Dirichlet problem");
    std::string dir_emb, dir_omega, dir_g, dir_out = "-", dir_mode = "trace", dir_svg;
    dir->add_option("--emb", dir_emb)->required();
    dir->add_option("--omega", dir_omega)->required();
    dir->add_option("--g", dir_g)->required();
    dir->add_option("--mode", dir_mode)->check(CLI::IsMember({"trace", "extend"}));
    dir->add_option("--out", dir_out);
    dir->add_option("--svg", dir_svg);
    dir->callback([&] {
        GraphFile g = load_graph(dir_emb);
        HarmonicEmbedding e = embedding_of(g);
        Omega om = Omega::parse(dir_omega);
        Expression ex = Expression::parse(dir_g);
        DomainSlice s = slice_domain(g.map, e.H, om);
        Field gv = boundary_data(g.map, e.H, s, om, [&](cplx w) { return ex(w); },
                                 dir_mode == "trace" ? BoundaryMode::Trace : BoundaryMode::Extend);
        DirichletResult r = solve_dirichlet(g.map, s, gv);
        emit(dir_out, field_json(g, r.f, r.residual));
        if (!dir_svg.empty()) write_text(dir_svg, svg_field(g.map, e.H, r.f));
    });

    // green
    auto* grn = app.add_subcommand("green", "Discrete Green's function");
    std::string grn_emb, grn_omega, grn_out = "-", grn_svg;
    int grn_pole = 0;
    grn->add_option("--emb", grn_emb)->required();
    grn->add_option("--pole", grn_pole, "vertex id")->required();
    grn->add_option("--omega", grn_omega, "default: the whole map");
    grn->add_option("--out", grn_out);
    grn->add_option("--svg", grn_svg);
    grn->callback([&] {
        GraphFile g = load_graph(grn_emb);
        HarmonicEmbedding e = embedding_of(g);
        DomainSlice s = grn_omega.empty() ? whole_map(g.map) : slice_domain(g.map, e.H, Omega::parse(grn_omega));
        DirichletResult r = green(g.map, s, dense_id(g, grn_pole));
        emit(grn_out, field_json(g, r.f, r.residual));
        if (!grn_svg.empty()) write_text(grn_svg, svg_field(g.map, e.H, r.f));
    });

    // walk
    auto* walk = app.add_subcommand("walk", "Monte Carlo random walk estimates");
    std::string walk_emb, walk_stop, walk_out = "-";
    int walk_start = 0;
    long walk_n = 100000;
    std::uint64_t walk_seed = 1;
    walk->add_option("--emb", walk_emb)->required();
    walk->add_option("--start", walk_start, "vertex id")->required();
    walk->add_option("--stop", walk_stop, "region the walk must leave")->required();
    walk->add_option("--n", walk_n);
    walk->add_option("--seed", walk_seed);
    walk->add_option("--out", walk_out);
    walk->callback([&] {
        GraphFile g = load_graph(walk_emb);
        HarmonicEmbedding e = embedding_of(g);
        Omega stop = Omega::parse(walk_stop);
        std::vector<char> inside(g.map.n_vertices, 0);
        for (int v = 0; v < g.map.n_vertices; ++v) inside[v] = stop.contains(e.H[v]);
        WalkEngine w(g.map, e.H);
        MartingaleCheck mc = martingale_check(w, dense_id(g, walk_start), StopRule::exit_region(inside), walk_n, walk_seed);
        ordered_json j;
        j["start"] = pt(mc.start);
        j["n"] = walk_n;
        j["seed"] = walk_seed;
        j["exit_re"] = estimator(mc.re);
        j["exit_im"] = estimator(mc.im);
        j["square_minus_time"] = estimator(mc.square);
        j["martingale_ok"] = mc.ok();
        emit(walk_out, j.dump(1) + "\n");
    });

    // pde
    auto* pde = app.add_subcommand("pde", "P1 finite elements for -div(A grad h) = 0");
    std::string pde_pot = "quad", pde_omega, pde_g, pde_out = "-";
    double pde_h = 1.0 / 32;
    pde->set_help_flag("--help", "Print this help message and exit");
    pde->add_option("--potential", pde_pot);
    pde->add_option("--omega", pde_omega)->required();
    pde->add_option("--g", pde_g)->required();
    pde->add_option("--h", pde_h);
    pde->add_option("--out", pde_out);
    pde->callback([&] {
        auto phi = make_potential(pde_pot);
        Expression ex = Expression::parse(pde_g);
        ContinuumField f = solve_Lphi_dirichlet(*phi, Omega::parse(pde_omega), [&](cplx w) { return ex(w); }, pde_h);
        ordered_json j;
        j["h"] = pde_h;
        j["nodes"] = ordered_json::array();
        for (cplx p : f.mesh.nodes) j["nodes"].push_back(pt(p));
        j["values"] = f.u;
        j["weak_residual"] = f.weak_residual;
        emit(pde_out, j.dump() + "\n");
    });

    // macheck
    auto* ma = app.add_subcommand("macheck", "Monge-Ampere flatness of a potential");
    std::string ma_pot = "quad", ma_box = "square:-1,1";
    double ma_tol = 1e-8, ma_h = 1.0 / 64;
    ma->set_help_flag("--help", "Print this help message and exit");
    ma->add_option("--potential", ma_pot);
    ma->add_option("--tol", ma_tol);
    ma->add_option("--box", ma_box);
    ma->add_option("--h", ma_h, "mesh for the residual");
    ma->callback([&] {
        auto phi = make_potential(ma_pot);
        Omega b = Omega::parse(ma_box);
        if (b.kind == Omega::Kind::Disc) throw Error(Errc::MalformedInput, "--box must be a square or box");
        Box box{b.poly[0].real(), b.poly[0].imag(), b.poly[2].real(), b.poly[2].imag()};
        FlatnessReport fr = ma_flatness(*phi, box, ma_tol);
        LphiPsiResidual res = lphi_psi_residual(*phi, box, ma_h);
        ordered_json j;
        j["potential"] = ma_pot;
        j["flat"] = fr.flat;
        j["mean_det"] = fr.mean;
        j["sup_dev"] = fr.sup_dev;
        j["residual_norm"] = res.norm;
        j["identity_gap"] = res.identity_gap;
        std::cout << j.dump(1) << "\n";
    });

    // converge
    auto* conv = app.add_subcommand("converge", "Convergence study from a plan");
    std::string conv_mode = "dirichlet", conv_plan, conv_out, conv_svg;
    conv->add_option("--mode", conv_mode)->check(CLI::IsMember({"dirichlet", "green", "gradient"}));
    conv->add_option("--plan", conv_plan)->required();
    conv->add_option("--out", conv_out, "CSV path; default from the plan or stdout");
    conv->add_option("--svg", conv_svg, "field of the finest level");
    conv->callback([&] {
        ExperimentPlan plan = load_plan(conv_plan);
        ConvergenceReport r = conv_mode == "dirichlet" ? run_dirichlet_convergence(plan)
                              : conv_mode == "green"   ? run_green_convergence(plan)
                                                       : run_gradient_convergence(plan);
        std::string out = !conv_out.empty() ? conv_out : plan.out;
        emit(out.empty() ? "-" : out, convergence_csv(r));
        std::string svg = !conv_svg.empty() ? conv_svg : plan.svg;
        if (!svg.empty()) write_text(svg, svg_field(r.last_instance.map, r.last_instance.emb.H, r.last_field));
        std::fprintf(stderr, "rate %.3f  final/first %s\n", r.rate, r.pass ? "pass" : "fail");
        require_exp_fat(r);
        if (!r.pass) status = kCheckFailed;
    });

    // crosscheck
    auto* cross = app.add_subcommand("crosscheck", "Regularity property table over a family");
    std::string cross_plan, cross_out = "-";
    bool cross_calibrate = false;
    cross->add_option("--plan", cross_plan)->required();
    cross->add_option("--out", cross_out);
    cross->add_flag("--calibrate", cross_calibrate, "print the threshold pair that best separates the rows");
    cross->callback([&] {
        ExperimentPlan plan = load_plan(cross_plan);
        CrosscheckReport r = run_theorem_a_crosscheck(plan);
        emit(cross_out, crosscheck_csv(r));
        if (cross_calibrate) {
            Calibration c = calibrate_thresholds(r);
            std::printf("conv_threshold %.6g\nrw_threshold %.6g\nagreement %d/%d\n", c.conv_threshold, c.rw_threshold,
                        c.agree, c.total);
            return;
        }
        std::fprintf(stderr, "CONV=>RW %s  RW=>CONV %s  conversion %s\n", r.conv_implies_rw ? "yes" : "no",
                     r.rw_implies_conv ? "yes" : "no", r.conversion ? "yes" : "no");
        if (!r.conv_implies_rw || !r.rw_implies_conv || !r.conversion) status = kCheckFailed;
    });

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e);
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return status;
}
