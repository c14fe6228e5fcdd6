#include "tma/harness.hpp"

#include "tma/continuum.hpp"
#include "tma/expr.hpp"
#include "tma/graph_io.hpp"

#include <json.hpp>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <exception>
#include <numbers>
#include <optional>
#include <set>
#include <sstream>

namespace tma {

namespace {

// second differences of a piecewise linear potential carry this much noise
constexpr double kRoundoff = 1e-12;

std::vector<double> numbers_of(const std::string& s)
{
    std::vector<double> v;
    std::stringstream ss(s);
    std::string tok;
    while (std::getline(ss, tok, ',')) {
        try {
            v.push_back(std::stod(tok));
        } catch (const std::exception&) {
            throw Error(Errc::MalformedInput, "bad number '" + tok + "'");
        }
    }
    return v;
}

Box bounding_box(const Omega& o)
{
    if (o.kind == Omega::Kind::Disc)
        return {o.centre.real() - o.radius, o.centre.imag() - o.radius, o.centre.real() + o.radius,
                o.centre.imag() + o.radius};
    Box b{o.poly[0].real(), o.poly[0].imag(), o.poly[0].real(), o.poly[0].imag()};
    for (cplx p : o.poly) {
        b.x0 = std::min(b.x0, p.real());
        b.y0 = std::min(b.y0, p.imag());
        b.x1 = std::max(b.x1, p.real());
        b.y1 = std::max(b.y1, p.imag());
    }
    return b;
}

Box grow(Box b, double m) { return {b.x0 - m, b.y0 - m, b.x1 + m, b.y1 + m}; }

double elapsed_ms(std::chrono::steady_clock::time_point t0)
{
    return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
}

} // namespace

std::vector<cplx> boundary_samples(const Omega& omega, int n)
{
    std::vector<cplx> out;
    if (omega.kind == Omega::Kind::Disc) {
        for (int k = 0; k < n; ++k)
            out.push_back(omega.centre + std::polar(omega.radius, 2 * std::numbers::pi * k / n));
        return out;
    }
    const auto& p = omega.poly;
    double perimeter = 0;
    for (std::size_t i = 0; i < p.size(); ++i) perimeter += std::abs(p[(i + 1) % p.size()] - p[i]);
    for (std::size_t i = 0; i < p.size(); ++i) {
        cplx a = p[i], b = p[(i + 1) % p.size()];
        int m = std::max(1, static_cast<int>(std::lround(n * std::abs(b - a) / perimeter)));
        for (int k = 0; k < m; ++k) out.push_back(a + (b - a) * (static_cast<double>(k) / m));
    }
    return out;
}

CompactSet CompactSet::parse(const std::string& spec)
{
    if (spec.rfind("annulus:", 0) == 0) {
        auto v = numbers_of(spec.substr(8));
        if (v.size() != 4 || !(v[2] >= 0) || !(v[3] > v[2]))
            throw Error(Errc::MalformedInput, "annulus:cx,cy,r0,r1 with 0 <= r0 < r1");
        CompactSet k;
        k.outer = Omega::disc({v[0], v[1]}, v[3]);
        k.hole = v[2];
        return k;
    }
    return CompactSet{Omega::parse(spec), 0};
}

bool CompactSet::contains(cplx w) const
{
    bool in = outer.contains(w) || outer.boundary_distance(w) <= 1e-12;
    return in && (hole == 0 || std::abs(w - outer.centre) >= hole);
}

std::vector<cplx> CompactSet::boundary_samples(int n) const
{
    auto out = tma::boundary_samples(outer, n);
    if (hole > 0)
        for (int k = 0; k < n; ++k) out.push_back(outer.centre + std::polar(hole, 2 * std::numbers::pi * k / n));
    return out;
}

double CompactSet::distance(cplx w) const
{
    if (contains(w)) return 0;
    if (hole > 0 && outer.contains(w)) return hole - std::abs(w - outer.centre);
    return outer.boundary_distance(w);
}

void ExperimentPlan::validate() const
{
    static const std::set<std::string> families{"square", "perturbed", "isoradial", "hull"};
    if (!families.count(family)) throw Error(Errc::MalformedInput, "unknown family '" + family + "'");
    if (reference != "exact" && reference != "fem")
        throw Error(Errc::MalformedInput, "reference must be exact or fem");
    if (deltas.empty()) throw Error(Errc::MalformedInput, "plan has no deltas");
    for (std::size_t i = 0; i < deltas.size(); ++i) {
        if (!(deltas[i] > 0)) throw Error(Errc::MalformedInput, "deltas must be positive");
        if (i && !(deltas[i] < deltas[i - 1])) throw Error(Errc::MalformedInput, "deltas must strictly decrease");
    }
    Omega om = Omega::parse(omega);
    CompactSet k = CompactSet::parse(K);
    for (cplx w : k.boundary_samples(256))
        if (!om.contains(w) || om.boundary_distance(w) <= 1e-9)
            throw Error(Errc::MalformedInput, "K must lie compactly inside Omega");
    Expression::parse(g);
    if (!g_conjugate.empty()) Expression::parse(g_conjugate);
    make_potential(potential);
    if (ref_h < 0) throw Error(Errc::MalformedInput, "ref_h must be nonnegative");
}

ExperimentPlan parse_plan(const std::string& text)
{
    using nlohmann::json;
    json j;
    try {
        j = json::parse(text);
    } catch (const json::parse_error& e) {
        throw Error(Errc::MalformedInput, std::string("plan: ") + e.what());
    }
    static const std::set<std::string> known{"family", "potential", "deltas", "omega", "region", "g", "g_conjugate",
                                             "reference", "ref_h", "pole", "K", "boundary_mode", "delta_prime",
                                             "seed", "timing", "parallel", "perturb", "angles", "crosscheck", "out",
                                             "svg"};
    ExperimentPlan p;
    try {
        for (auto it = j.begin(); it != j.end(); ++it)
            if (!known.count(it.key())) throw Error(Errc::MalformedInput, "plan: unknown key '" + it.key() + "'");
        p.family = j.value("family", p.family);
        p.potential = j.value("potential", p.potential);
        p.deltas = j.value("deltas", p.deltas);
        p.omega = j.value("omega", p.omega);
        p.region = j.value("region", p.region);
        p.g = j.value("g", p.g);
        p.g_conjugate = j.value("g_conjugate", p.g_conjugate);
        p.reference = j.value("reference", p.reference);
        p.ref_h = j.value("ref_h", p.ref_h);
        if (j.contains("pole")) {
            auto v = j["pole"].get<std::vector<double>>();
            if (v.size() != 2) throw Error(Errc::MalformedInput, "plan: pole must be [x, y]");
            p.pole = {v[0], v[1]};
        }
        p.K = j.value("K", p.K);
        std::string mode = j.value("boundary_mode", std::string("trace"));
        if (mode == "trace") p.mode = BoundaryMode::Trace;
        else if (mode == "extend") p.mode = BoundaryMode::Extend;
        else throw Error(Errc::MalformedInput, "plan: boundary_mode must be trace or extend");
        p.delta_prime = j.value("delta_prime", p.delta_prime);
        p.seed = j.value("seed", p.seed);
        p.timing = j.value("timing", p.timing);
        p.parallel = j.value("parallel", p.parallel);
        if (j.contains("perturb")) {
            const json& q = j["perturb"];
            p.law.lo = q.value("lo", p.law.lo);
            p.law.hi = q.value("hi", p.law.hi);
            p.law.log_uniform = q.value("log_uniform", p.law.log_uniform);
        }
        if (j.contains("angles")) {
            const json& q = j["angles"];
            p.angles.alpha_amp = q.value("alpha", p.angles.alpha_amp);
            p.angles.beta_amp = q.value("beta", p.angles.beta_amp);
            p.angles.theta_min = q.value("theta_min", p.angles.theta_min);
        }
        if (j.contains("crosscheck")) {
            const json& q = j["crosscheck"];
            auto& c = p.cross;
            c.instances = q.value("instances", c.instances);
            c.spreads = q.value("spreads", c.spreads);
            for (double sp : c.spreads)
                if (!(sp >= 1)) throw Error(Errc::MalformedInput, "plan: spreads must be >= 1");
            c.C = q.value("C", c.C);
            c.region = q.value("region", c.region);
            c.conv_threshold = q.value("conv_threshold", c.conv_threshold);
            c.rw_threshold = q.value("rw_threshold", c.rw_threshold);
            c.slack = q.value("slack", c.slack);
            c.centres = q.value("centres", c.centres);
            c.walk_budget = q.value("walk_budget", c.walk_budget);
            c.per_length = q.value("per_length", c.per_length);
        }
        p.out = j.value("out", p.out);
        p.svg = j.value("svg", p.svg);
    } catch (const json::exception& e) {
        throw Error(Errc::MalformedInput, std::string("plan: ") + e.what());
    }
    p.validate();
    return p;
}

ExperimentPlan load_plan(const std::string& path) { return parse_plan(read_text(path)); }

InstanceFactory plan_family(const ExperimentPlan& plan)
{
    Omega omega = Omega::parse(plan.omega);
    std::optional<Box> fixed;
    if (!plan.region.empty()) fixed = bounding_box(Omega::parse(plan.region));
    std::shared_ptr<ConvexPotential> phi = make_potential(plan.potential);
    return [=](double delta) {
        Box U = fixed ? *fixed : grow(bounding_box(omega), 2 * delta);
        if (plan.family == "square") return square_lattice(delta, U);
        if (plan.family == "perturbed") return perturbed_lattice(delta, U, plan.law, plan.seed);
        if (plan.family == "isoradial") return isoradial_rhombic(delta, plan.angles, U);
        return from_convex_potential(*phi, delta, U).inst;
    };
}

namespace {

struct Reference {
    std::function<double(cplx)> h;
    std::function<double(cplx)> conj;      // empty when unavailable
    std::function<cplx(cplx)> grad;        // f_x + i f_y
    std::shared_ptr<ContinuumField> field;
    std::shared_ptr<ConjugateContinuum> cfield;
};

Reference dirichlet_reference(const ExperimentPlan& plan, const ConvexPotential& phi, const Omega& omega,
                              bool need_conj)
{
    Reference r;
    auto g = std::make_shared<Expression>(Expression::parse(plan.g));
    double ref_h = plan.ref_h > 0 ? plan.ref_h : plan.deltas.back() / 4;
    if (plan.reference == "exact") {
        r.h = [g](cplx w) { return (*g)(w); };
        r.grad = [g](cplx w) { return g->gradient(w); };
    } else {
        r.field = std::make_shared<ContinuumField>(solve_Lphi_dirichlet(phi, omega, [g](cplx w) { return (*g)(w); }, ref_h));
        auto f = r.field;
        r.h = [f](cplx w) { return f->eval(w); };
        r.grad = [f](cplx w) {
            int t = f->mesh.locate(w);
            if (t < 0) throw Error(Errc::OutsideDomain, "reference gradient outside the mesh");
            return f->grad(t);
        };
    }
    if (!plan.g_conjugate.empty()) {
        auto gs = std::make_shared<Expression>(Expression::parse(plan.g_conjugate));
        r.conj = [gs](cplx w) { return (*gs)(w); };
    } else if (need_conj) {
        if (!r.field)
            r.field = std::make_shared<ContinuumField>(solve_Lphi_dirichlet(phi, omega, [g](cplx w) { return (*g)(w); }, ref_h));
        r.cfield = std::make_shared<ConjugateContinuum>(conjugate(*r.field, phi));
        auto c = r.cfield;
        auto f = r.field;   // keeps the mesh alive
        r.conj = [c, f](cplx w) { return c->eval(w); };
    }
    return r;
}

std::vector<cplx> dual_points(const PlanarMap& m, const DualMap& d, const std::vector<cplx>& H)
{
    std::vector<cplx> pts(d.n_inner);
    for (int k = 0; k < d.n_inner; ++k) {
        cplx s = 0;
        for (int v : m.faces[d.inner_face[k]]) s += H[v];
        pts[k] = s / static_cast<double>(m.faces[d.inner_face[k]].size());
    }
    return pts;
}

// sup and mu-weighted RMS of f - ref over valued vertices in K.
void vertex_errors(const Instance& inst, const DomainSlice& s, const Field& f, const CompactSet& K,
                   const std::function<double(cplx)>& ref, ConvergenceRow& row)
{
    const auto& H = inst.emb.H;
    double sup = 0, num = 0, den = 0;
    int n = 0;
    for (int v = 0; v < inst.map.n_vertices; ++v) {
        if (!s.closure(v) || !valued(f, v) || !K.contains(H[v])) continue;
        double e = std::abs(f[v] - ref(H[v]));
        double mu = vertex_measure(inst.map, H, v);
        sup = std::max(sup, e);
        num += mu * e * e;
        den += mu;
        ++n;
    }
    if (n == 0) throw Error(Errc::EmptySampleSet, "no vertex of the slice lies in K");
    row.sup_err = sup;
    row.l2_err = std::sqrt(num / den);
    row.compared = n;
}

double conjugate_error(const Instance& inst, const DualMap& d, const ConjugateField& cf, const CompactSet& K,
                       const std::function<double(cplx)>& ref)
{
    auto pts = dual_points(inst.map, d, inst.emb.H);
    std::vector<double> diff;
    for (int k = 0; k < d.n_inner; ++k)
        if (valued(cf.values, k) && K.contains(pts[k])) diff.push_back(cf.values[k] - ref(pts[k]));
    if (diff.empty()) return kAbsent;
    double mean = 0;
    for (double x : diff) mean += x;
    mean /= static_cast<double>(diff.size());
    double sup = 0;
    for (double x : diff) sup = std::max(sup, std::abs(x - mean));
    return sup;
}

double gradient_error(const Instance& inst, const DomainSlice& s, const Field& f, const CompactSet& K,
                      const std::function<cplx(cplx)>& ref)
{
    const auto& H = inst.emb.H;
    GradientField gf = gradient_field(inst.map, H, s, f);
    double sup = 0;
    bool any = false;
    for (std::size_t t = 0; t < gf.tris.size(); ++t) {
        const auto& v = gf.tris[t].v;
        if (!K.contains(H[v[0]]) || !K.contains(H[v[1]]) || !K.contains(H[v[2]])) continue;
        cplx c = (H[v[0]] + H[v[1]] + H[v[2]]) / 3.0;
        cplx want = 0.5 * std::conj(ref(c));
        sup = std::max(sup, std::abs(gf.grad[t] - want));
        any = true;
    }
    return any ? sup : kAbsent;
}

double boundary_oscillation(const Omega& omega, const std::function<double(cplx)>& g)
{
    double lo = 0, hi = 0;
    bool first = true;
    for (cplx w : boundary_samples(omega, 2048)) {
        double x = g(w);
        if (first) { lo = hi = x; first = false; }
        lo = std::min(lo, x);
        hi = std::max(hi, x);
    }
    return hi - lo;
}

double fit_rate(const std::vector<ConvergenceRow>& rows, bool gradient)
{
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    int n = 0;
    for (const auto& r : rows) {
        double e = gradient ? r.grad_sup_err : r.sup_err;
        if (!(e > 0)) continue;
        double x = std::log(r.delta), y = std::log(e);
        sx += x; sy += y; sxx += x * x; sxy += x * y;
        ++n;
    }
    if (n < 2) return kAbsent;
    return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

// One task per delta; errors are rethrown in ladder order.
template <class Cell>
std::vector<ConvergenceRow> run_cells(const ExperimentPlan& plan, Cell cell, std::vector<Instance>* keep_last,
                                      std::vector<Field>* last_field)
{
    int n = static_cast<int>(plan.deltas.size());
    std::vector<ConvergenceRow> rows(n);
    std::vector<std::exception_ptr> errors(n);
    std::vector<Instance> insts(n);
    std::vector<Field> fields(n);
#pragma omp parallel for schedule(dynamic, 1) if (plan.parallel)
    for (int i = 0; i < n; ++i) {
        try {
            auto t0 = std::chrono::steady_clock::now();
            rows[i] = cell(plan.deltas[i], insts[i], fields[i]);
            rows[i].delta = plan.deltas[i];
            rows[i].runtime_ms = plan.timing ? elapsed_ms(t0) : 0;
            if (i != n - 1) { insts[i] = Instance{}; fields[i].clear(); }
        } catch (...) {
            errors[i] = std::current_exception();
        }
    }
    for (auto& e : errors)
        if (e) std::rethrow_exception(e);
    keep_last->push_back(std::move(insts.back()));
    last_field->push_back(std::move(fields.back()));
    return rows;
}

ConvergenceReport dirichlet_like(const ExperimentPlan& plan, const InstanceFactory& family, bool gradient)
{
    plan.validate();
    auto phi = make_potential(plan.potential);
    Omega omega = Omega::parse(plan.omega);
    CompactSet K = CompactSet::parse(plan.K);
    auto g = std::make_shared<Expression>(Expression::parse(plan.g));
    Reference ref = dirichlet_reference(plan, *phi, omega, true);
    double osc = boundary_oscillation(omega, [&](cplx w) { return (*g)(w); });

    ConvergenceReport rep;
    rep.mode = gradient ? "gradient" : "dirichlet";
    std::vector<Instance> last;
    std::vector<Field> lastf;
    std::vector<char> fat(plan.deltas.size(), 1);
    auto cell = [&](double delta, Instance& inst, Field& field) {
        ConvergenceRow row;
        inst = family(delta);
        const auto& m = inst.map;
        const auto& H = inst.emb.H;
        DomainSlice s = slice_domain(m, H, omega);
        Field gv = boundary_data(m, H, s, omega, [&](cplx w) { return (*g)(w); }, plan.mode);
        DirichletResult res = solve_dirichlet(m, s, gv);
        vertex_errors(inst, s, res.f, K, ref.h, row);
        row.vertices = m.n_vertices;
        row.solver_residual = res.residual;
        row.ref_scale = osc;
        if (ref.conj) {
            DualMap d = dual_map(m);
            ConjugateField cf = harmonic_conjugate(m, d, s, res.f);
            row.conj_err = conjugate_error(inst, d, cf, K, ref.conj);
        }
        if (gradient) {
            PropertyReport ef = exp_fat_check(m, H, K.outer, delta, plan.delta_prime);
            row.exp_fat = ef.pass;
            if (ef.pass) row.grad_sup_err = gradient_error(inst, s, res.f, K, ref.grad);
        }
        field = std::move(res.f);
        return row;
    };
    rep.rows = run_cells(plan, cell, &last, &lastf);
    for (const auto& r : rep.rows)
        if (!r.exp_fat) rep.exp_fat_failures.push_back(r.delta);
    rep.last_instance = std::move(last.back());
    rep.last_field = std::move(lastf.back());
    rep.rate = fit_rate(rep.rows, gradient);
    const auto& a = rep.rows.front();
    const auto& b = rep.rows.back();
    if (gradient)
        rep.pass = rep.exp_fat_failures.empty() && b.grad_sup_err <= a.grad_sup_err / 2;
    else
        rep.pass = b.sup_err <= a.sup_err / 2;
    return rep;
}

int nearest_interior(const DomainSlice& s, const std::vector<cplx>& H, cplx w)
{
    int best = -1;
    double bd = 0;
    for (int v : s.interior_list) {
        double d = std::abs(H[v] - w);
        if (best < 0 || d < bd) { best = v; bd = d; }
    }
    if (best < 0) throw Error(Errc::EmptyInterior, "slice has no interior vertex");
    return best;
}

} // namespace

ConvergenceReport run_dirichlet_convergence(const ExperimentPlan& plan, const InstanceFactory& family)
{
    return dirichlet_like(plan, family, false);
}

ConvergenceReport run_dirichlet_convergence(const ExperimentPlan& plan)
{
    return run_dirichlet_convergence(plan, plan_family(plan));
}

ConvergenceReport run_gradient_convergence(const ExperimentPlan& plan, const InstanceFactory& family)
{
    return dirichlet_like(plan, family, true);
}

ConvergenceReport run_gradient_convergence(const ExperimentPlan& plan)
{
    return run_gradient_convergence(plan, plan_family(plan));
}

void require_exp_fat(const ConvergenceReport& r)
{
    if (r.exp_fat_failures.empty()) return;
    std::ostringstream s;
    s << "EXP-FAT fails at delta";
    for (double d : r.exp_fat_failures) s << " " << d;
    throw Error(Errc::ExpFatViolated, s.str());
}

ConvergenceReport run_green_convergence(const ExperimentPlan& plan, const InstanceFactory& family)
{
    plan.validate();
    auto phi = make_potential(plan.potential);
    Omega omega = Omega::parse(plan.omega);
    CompactSet K = CompactSet::parse(plan.K);
    if (!omega.contains(plan.pole)) throw Error(Errc::PoleOnBoundary, "pole lies outside Omega");
    double sep = 2 * plan.deltas.front();
    if (K.distance(plan.pole) < sep) throw Error(Errc::MalformedInput, "K must stay at least 2 delta away from the pole");
    if (omega.boundary_distance(plan.pole) < sep) throw Error(Errc::PoleTooCloseToBoundary, "pole within 2 delta of the boundary");

    std::function<double(cplx)> ref;
    std::shared_ptr<ContinuumGreen> cg;
    if (plan.reference == "exact") {
        if (omega.kind != Omega::Kind::Disc) throw Error(Errc::MalformedInput, "exact Green reference needs a disc");
        cplx c = omega.centre, a = (plan.pole - c) / omega.radius;
        double R = omega.radius;
        ref = [c, a, R](cplx w) {
            cplx z = (w - c) / R;
            return -std::log(std::abs((z - a) / (1.0 - std::conj(a) * z))) / (2 * std::numbers::pi);
        };
    } else {
        double ref_h = plan.ref_h > 0 ? plan.ref_h : plan.deltas.back() / 4;
        cg = std::make_shared<ContinuumGreen>(green_continuum(*phi, omega, plan.pole, ref_h));
        ref = [cg](cplx w) { return cg->field.eval(w); };
    }
    double ref_max = 0;
    for (cplx w : K.boundary_samples(1024)) ref_max = std::max(ref_max, std::abs(ref(w)));

    ConvergenceReport rep;
    rep.mode = "green";
    std::vector<Instance> last;
    std::vector<Field> lastf;
    auto cell = [&](double delta, Instance& inst, Field& field) {
        ConvergenceRow row;
        inst = family(delta);
        const auto& m = inst.map;
        const auto& H = inst.emb.H;
        DomainSlice s = slice_domain(m, H, omega);
        int v1 = nearest_interior(s, H, plan.pole);
        DirichletResult G1 = green(m, s, v1);
        vertex_errors(inst, s, G1.f, K, ref, row);
        row.vertices = m.n_vertices;
        row.solver_residual = G1.residual;
        row.ref_scale = ref_max;

        DualMap d = dual_map(m);
        ConjugateField cf = harmonic_conjugate(m, d, s, G1.f);
        for (const auto& mo : cf.monodromy)
            if (mo.vertex == v1) row.monodromy = mo.value;

        // occupation-time normalisation: G(x, y) = mu(x) G_sym(x, y)
        cplx probe = plan.pole + 0.5 * omega.boundary_distance(plan.pole);
        int v2 = nearest_interior(s, H, probe);
        if (v2 != v1) {
            DirichletResult G2 = green(m, s, v2);
            double mu1 = vertex_measure(m, H, v1), mu2 = vertex_measure(m, H, v2);
            double lhs = mu1 * (mu2 * G1.f[v2]);
            double rhs = mu2 * (mu1 * G2.f[v1]);
            row.symmetry_gap = std::abs(lhs - rhs) / std::max(std::abs(lhs), std::abs(rhs));
        }
        field = std::move(G1.f);
        return row;
    };
    rep.rows = run_cells(plan, cell, &last, &lastf);
    rep.last_instance = std::move(last.back());
    rep.last_field = std::move(lastf.back());
    rep.rate = fit_rate(rep.rows, false);
    rep.pass = rep.rows.back().sup_err <= rep.rows.front().sup_err / 2;
    return rep;
}

ConvergenceReport run_green_convergence(const ExperimentPlan& plan)
{
    return run_green_convergence(plan, plan_family(plan));
}

namespace {

std::string csv_num(double x)
{
    if (!(x == x)) return "";
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.10g", x);
    return buf;
}

} // namespace

std::string convergence_csv(const ConvergenceReport& r)
{
    std::string out = "delta,sup_err,l2_err,grad_sup_err,conj_err,runtime_ms\n";
    for (const auto& row : r.rows)
        out += csv_num(row.delta) + "," + csv_num(row.sup_err) + "," + csv_num(row.l2_err) + "," +
               csv_num(row.grad_sup_err) + "," + csv_num(row.conj_err) + "," + csv_num(std::round(row.runtime_ms)) + "\n";
    return out;
}

CrosscheckReport run_theorem_a_crosscheck(const ExperimentPlan& plan,
                                          const std::function<Instance(double, std::uint64_t, int)>& family)
{
    const auto& cs = plan.cross;
    Omega region = Omega::parse(cs.region);
    CrosscheckReport rep;
    rep.conv_threshold = cs.conv_threshold;
    rep.rw_threshold = cs.rw_threshold;
    int n_seeds = cs.spreads.empty() ? std::max(1, cs.instances) : static_cast<int>(cs.spreads.size());
    int n = static_cast<int>(plan.deltas.size()) * n_seeds;
    rep.rows.resize(n);
    std::vector<std::exception_ptr> errors(n);
#pragma omp parallel for schedule(dynamic, 1) if (plan.parallel)
    for (int i = 0; i < n; ++i) {
        try {
            CrosscheckRow& row = rep.rows[i];
            row.delta = plan.deltas[i / n_seeds];
            row.seed = plan.seed + static_cast<std::uint64_t>(i % n_seeds);
            Instance inst = family(row.delta, row.seed, i % n_seeds);
            const auto& m = inst.map;
            const auto& H = inst.emb.H;
            Derived dv = derive(m, inst.emb);
            ScanOptions so;
            so.per_length = cs.per_length;
            so.seed = row.seed;
            so.parallel = false;
            double C = cs.C;
            row.lambda = check_conv(dv.gm, region, row.delta, C, so).estimate;
            row.lambda_2C = check_conv(dv.gm, region, row.delta, 2 * C, so).estimate;
            row.kappa = check_lip(dv.gm, region, row.delta, C, so).estimate;
            Omega inner = region;
            if (region.kind == Omega::Kind::Disc) {
                inner.radius = region.radius - 4 * C * row.delta;
            } else {
                Box b = grow(bounding_box(region), -4 * C * row.delta);
                inner = Omega::box(b.x0, b.y0, b.x1, b.y1);
            }
            row.kappa_inner = check_lip(dv.gm, inner, row.delta, C, so).estimate;

            // T-plane disc around the image of the region
            cplx zc = 0;
            int cnt = 0;
            for (int c = 0; c < dv.cg.n_corners(); ++c)
                if (region.contains(H[dv.cg.corner_vertex[c]])) { zc += dv.ts.T[c]; ++cnt; }
            zc /= std::max(cnt, 1);
            double rt = std::numeric_limits<double>::infinity();
            for (int c = 0; c < dv.cg.n_corners(); ++c)
                if (!region.contains(H[dv.cg.corner_vertex[c]])) rt = std::min(rt, std::abs(dv.ts.T[c] - zc));
            try {
                row.kappa_kd = check_lip_kdelta(dv.chart, Omega::disc(zc, 0.5 * rt), row.delta, so).estimate;
            } catch (const Error&) {
                row.kappa_kd = std::numeric_limits<double>::infinity();
            }

            WalkEngine walk(m, H);
            RwOptions ro;
            ro.centres = cs.centres;
            ro.walk_budget = cs.walk_budget;
            ro.seed = row.seed;
            ro.parallel = false;
            try {
                PropertyReport rw = check_rw_property(walk, region, row.delta, C, ro);
                row.rw = rw.estimate;
                for (const auto& [k, v] : rw.details) {
                    if (k == "var_min") row.rw_var = v;
                    if (k == "mu_ball_min") row.rw_bmin = v;
                    if (k == "mu_ball_max") row.rw_bmax = v;
                }
            } catch (const Error& e) {
                if (e.code() != Errc::BudgetTooSmall) throw;
                row.rw = 0;
                row.rw_flagged = true;
            }
            row.conv_pass = row.lambda >= cs.conv_threshold;
            row.rw_pass = row.rw >= cs.rw_threshold;
            double keep = 1 - cs.slack;
            row.conversion_upper = row.lambda_2C >= keep * row.kappa / 4 - kRoundoff;
            row.conversion_lower = row.kappa_inner >= keep * row.lambda / 8 - kRoundoff;
        } catch (...) {
            errors[i] = std::current_exception();
        }
    }
    for (auto& e : errors)
        if (e) std::rethrow_exception(e);
    for (const auto& r : rep.rows) {
        if (r.conv_pass && !r.rw_pass) rep.conv_implies_rw = false;
        if (r.rw_pass && !r.conv_pass) rep.rw_implies_conv = false;
        if (!r.conversion_upper || !r.conversion_lower) rep.conversion = false;
    }
    return rep;
}

CrosscheckReport run_theorem_a_crosscheck(const ExperimentPlan& plan)
{
    plan.validate();
    Omega omega = Omega::parse(plan.omega);
    std::optional<Box> fixed;
    if (!plan.region.empty()) fixed = bounding_box(Omega::parse(plan.region));
    std::shared_ptr<ConvexPotential> phi = make_potential(plan.potential);
    return run_theorem_a_crosscheck(plan, [&](double delta, std::uint64_t seed, int k) {
        Box U = fixed ? *fixed : grow(bounding_box(omega), 2 * delta);
        if (plan.family == "perturbed") {
            PerturbLaw law = plan.law;
            if (!plan.cross.spreads.empty()) {
                double sp = plan.cross.spreads[k];
                law.lo = 1 / sp;
                law.hi = sp;
            }
            return perturbed_lattice(delta, U, law, seed);
        }
        if (plan.family == "square") return square_lattice(delta, U);
        if (plan.family == "isoradial") return isoradial_rhombic(delta, plan.angles, U);
        return from_convex_potential(*phi, delta, U).inst;
    });
}

Calibration calibrate_thresholds(const CrosscheckReport& r)
{
    auto cuts = [](std::vector<double> v) {
        std::sort(v.begin(), v.end());
        std::vector<double> c;
        for (std::size_t i = 1; i < v.size(); ++i)
            if (v[i] > v[i - 1]) c.push_back(v[i - 1] > 0 ? std::sqrt(v[i - 1] * v[i]) : v[i] / 2);
        if (c.empty()) c.push_back(v.front() / 2);   // nothing to separate
        return c;
    };
    std::vector<double> lam, rw;
    for (const auto& row : r.rows) {
        lam.push_back(std::max(row.lambda, 0.0));
        rw.push_back(std::max(row.rw, 0.0));
    }
    Calibration best;
    best.total = static_cast<int>(r.rows.size());
    if (r.rows.empty()) return best;
    double best_margin = -1;
    best.agree = -1;
    for (double tc : cuts(lam))
        for (double tr : cuts(rw)) {
            int agree = 0;
            double margin = std::numeric_limits<double>::infinity();
            for (std::size_t i = 0; i < lam.size(); ++i) {
                agree += (lam[i] >= tc) == (rw[i] >= tr);
                if (lam[i] > 0) margin = std::min(margin, std::abs(std::log(lam[i] / tc)));
                if (rw[i] > 0) margin = std::min(margin, std::abs(std::log(rw[i] / tr)));
            }
            if (agree > best.agree || (agree == best.agree && margin > best_margin)) {
                best.agree = agree;
                best.conv_threshold = tc;
                best.rw_threshold = tr;
                best_margin = margin;
            }
        }
    return best;
}

std::string crosscheck_csv(const CrosscheckReport& r)
{
    std::string out = "delta,seed,lambda,lambda_2C,kappa,kappa_inner,kappa_kd,rw,conv_pass,rw_pass,conversion\n";
    for (const auto& row : r.rows)
        out += csv_num(row.delta) + "," + std::to_string(row.seed) + "," + csv_num(row.lambda) + "," +
               csv_num(row.lambda_2C) + "," + csv_num(row.kappa) + "," + csv_num(row.kappa_inner) + "," +
               csv_num(row.kappa_kd) + "," + csv_num(row.rw) + "," + (row.conv_pass ? "1" : "0") + "," +
               (row.rw_pass ? "1" : "0") + "," + (row.conversion_upper && row.conversion_lower ? "1" : "0") + "\n";
    return out;
}

} // namespace tma
