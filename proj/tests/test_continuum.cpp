#include "doctest.h"
#include "tma/continuum.hpp"

#include <cmath>

using namespace tma;

namespace {

double sup_error(const ContinuumField& f, const std::function<double(cplx)>& exact)
{
    double e = 0;
    for (std::size_t i = 0; i < f.u.size(); ++i) e = std::max(e, std::abs(f.u[i] - exact(f.mesh.nodes[i])));
    return e;
}

} // namespace

TEST_CASE("matrix A")
{
    QuadraticPotential iso, an(1.0, 0.5);
    ExpShearPotential ex(0.1);
    Mat2 a = matrix_A(iso, cplx(0.3, 0.2));
    CHECK(a.xx == 1.0);
    CHECK(a.xy == 0.0);
    CHECK(a.yy == 1.0);
    Mat2 b = matrix_A(an, 0);
    CHECK(b.xx == 1.0);
    CHECK(b.yy == 2.0);
    for (cplx w : {cplx(0.1, 0.2), cplx(-0.7, 0.4)}) {
        Mat2 H = ex.hessian(w), A = matrix_A(ex, w);
        CHECK(A.det() == doctest::Approx(H.det()).epsilon(1e-14));
        // A H = det I
        CHECK(A.xx * H.xx + A.xy * H.xy == doctest::Approx(H.det()).epsilon(1e-14));
        CHECK(std::abs(A.xx * H.xy + A.xy * H.yy) < 1e-14);
        CHECK(rho(ex, w) == doctest::Approx(std::sqrt(H.det())).epsilon(1e-14));
    }
    try {
        matrix_A(iso, cplx(20, 0));
        FAIL("accepted");
    } catch (const Error& err) {
        CHECK(err.code() == Errc::OutsideDomain);
    }
}

TEST_CASE("P1 mesh of the disc")
{
    auto m = fe_mesh(Omega::disc(0, 1), 1.0 / 16);
    double area = 0;
    for (const auto& t : m.tris) area += 0.5 * cross(m.nodes[t[1]] - m.nodes[t[0]], m.nodes[t[2]] - m.nodes[t[0]]);
    CHECK(area == doctest::Approx(M_PI).epsilon(0.01));
    for (std::size_t i = 0; i < m.nodes.size(); ++i)
        if (m.dirichlet[i]) CHECK(std::abs(std::abs(m.nodes[i]) - 1) < 1e-12);
    CHECK_THROWS_AS(fe_mesh(Omega::disc(0, 0.01), 1.0), Error);
}

TEST_CASE("L_phi Dirichlet solutions")
{
    QuadraticPotential iso, an(1.0, 0.5);
    auto omega = Omega::disc(0, 1);
    auto q = [](cplx w) { return (w * w).real(); };
    auto a16 = solve_Lphi_dirichlet(iso, omega, q, 1.0 / 16);
    auto a32 = solve_Lphi_dirichlet(iso, omega, q, 1.0 / 32);
    CHECK(a16.weak_residual <= 1e-10);
    double e16 = sup_error(a16, q), e32 = sup_error(a32, q);
    CHECK(e32 < 0.01);
    CHECK(e16 / e32 > 3);

    auto g = [](cplx w) { return 2 * w.real() * w.real() - w.imag() * w.imag(); };
    auto b16 = solve_Lphi_dirichlet(an, omega, g, 1.0 / 16);
    auto b32 = solve_Lphi_dirichlet(an, omega, g, 1.0 / 32);
    double f16 = sup_error(b16, g), f32 = sup_error(b32, g);
    CHECK(f32 < 0.01);
    CHECK(f16 / f32 > 3);

    auto c = solve_Lphi_dirichlet(an, omega, [](cplx) { return 2.5; }, 1.0 / 16);
    for (double v : c.u) CHECK(std::abs(v - 2.5) < 1e-12);

    // maximum principle with rough boundary data
    auto r = solve_Lphi_dirichlet(an, omega, [](cplx w) { return std::sin(7 * std::arg(w)); }, 1.0 / 16);
    double lo = INFINITY, hi = -INFINITY;
    for (std::size_t i = 0; i < r.u.size(); ++i)
        if (r.mesh.dirichlet[i]) lo = std::min(lo, r.u[i]), hi = std::max(hi, r.u[i]);
    for (double v : r.u) {
        CHECK(v >= lo - 1e-12);
        CHECK(v <= hi + 1e-12);
    }
    CHECK(r.eval(0) == doctest::Approx(r.eval(cplx(1e-9, 0))).epsilon(1e-6));
}

TEST_CASE("serial and parallel element assembly agree")
{
    ExpShearPotential ex(0.1);
    auto m = fe_mesh(Omega::disc(0, 1), 1.0 / 16);
    std::vector<ElementMatrix> a, b;
    assemble_elements_serial(m, ex, a);
    assemble_elements_omp(m, ex, b);
    CHECK(a == b);
}

TEST_CASE("A-harmonic conjugates")
{
    QuadraticPotential iso;
    auto omega = Omega::disc(0, 1);
    auto x = solve_Lphi_dirichlet(iso, omega, [](cplx w) { return w.real(); }, 1.0 / 16);
    auto cx = conjugate(x, iso);
    CHECK(cx.loop_defect < 1e-10);
    double shift = cx.values[0] - cx.midpoints[0].imag();
    for (std::size_t e = 0; e < cx.values.size(); ++e) CHECK(std::abs(cx.values[e] - cx.midpoints[e].imag() - shift) < 1e-10);
    CHECK(std::abs(cx.eval(cplx(0.2, 0.3)) - 0.3 - shift) < 1e-10);

    auto c = solve_Lphi_dirichlet(iso, omega, [](cplx) { return 1.0; }, 1.0 / 16);
    auto cc = conjugate(c, iso);
    for (double v : cc.values) CHECK(std::abs(v) < 1e-12);

    // conjugate of the coordinate w is -i psi
    ExpShearPotential ex(0.1);
    for (double h : {1.0 / 16, 1.0 / 32}) {
        auto m = fe_mesh(omega, h);
        std::vector<double> ux(m.nodes.size()), uy(m.nodes.size());
        for (std::size_t i = 0; i < m.nodes.size(); ++i) {
            ux[i] = m.nodes[i].real();
            uy[i] = m.nodes[i].imag();
        }
        auto sx = conjugate_unchecked(m, ux, ex), sy = conjugate_unchecked(m, uy, ex);
        double worst = 0;
        cplx target0 = cplx(0, -1) * ex.psi(sx.midpoints[0]);
        cplx got0(sx.values[0], sy.values[0]);
        for (std::size_t e = 0; e < sx.values.size(); ++e) {
            cplx target = cplx(0, -1) * ex.psi(sx.midpoints[e]) - target0;
            cplx got = cplx(sx.values[e], sy.values[e]) - got0;
            worst = std::max(worst, std::abs(got - target));
        }
        CHECK(worst < 0.2 * h * h * 16);
    }
}

TEST_CASE("continuum Green function of the disc")
{
    QuadraticPotential iso;
    auto omega = Omega::disc(0, 1);
    auto ref = [](cplx w) { return -std::log(std::abs(w)) / (2 * M_PI); };
    double err[2];
    int k = 0;
    for (double h : {1.0 / 32, 1.0 / 64}) {
        auto g = green_continuum(iso, omega, 0, h);
        CHECK(g.monodromy == doctest::Approx(-1.0).epsilon(1e-6));
        double e = 0;
        for (std::size_t i = 0; i < g.field.u.size(); ++i) {
            double r = std::abs(g.field.mesh.nodes[i]);
            if (r >= 0.3 && r <= 0.8) e = std::max(e, std::abs(g.field.u[i] - ref(g.field.mesh.nodes[i])));
            CHECK(g.field.u[i] >= -1e-14);
        }
        err[k++] = e;
    }
    CHECK(err[1] < 0.01 * ref(0.3));
    CHECK(err[0] / err[1] > 3);

    auto g1 = green_continuum(iso, omega, cplx(0.2, 0.1), 1.0 / 32);
    auto g2 = green_continuum(iso, omega, cplx(-0.3, 0.2), 1.0 / 32);
    CHECK(std::abs(g1.field.u[g2.pole_node] - g2.field.u[g1.pole_node]) < 1e-10);
    try {
        green_continuum(iso, omega, cplx(0.95, 0), 1.0 / 32);
        FAIL("accepted");
    } catch (const Error& err2) {
        CHECK(err2.code() == Errc::PoleTooCloseToBoundary);
    }
}

TEST_CASE("Monge-Ampere flatness")
{
    Box sq{-1, -1, 1, 1};
    auto a = ma_flatness(QuadraticPotential(1.0, 0.5), sq, 1e-10);
    CHECK(a.flat);
    CHECK(a.mean == doctest::Approx(2.0));
    auto b = ma_flatness(QuadraticPotential(), sq, 1e-10);
    CHECK(b.flat);
    CHECK(b.sup_dev == 0.0);
    auto c = ma_flatness(ExpShearPotential(0.1), sq, 1e-3);
    CHECK_FALSE(c.flat);
}

TEST_CASE("L_phi psi residual")
{
    Box sq{-1, -1, 1, 1};
    auto a = lphi_psi_residual(QuadraticPotential(1.0, 0.5), sq, 1.0 / 32);
    CHECK(a.norm <= 1e-8);
    auto b = lphi_psi_residual(ExpShearPotential(0.1), sq, 1.0 / 64);
    CHECK(b.norm >= 0.01);
    // L2 norm of 0.1 e^x over the square
    CHECK(b.norm == doctest::Approx(0.1 * std::sqrt(std::exp(2.0) - std::exp(-2.0))).epsilon(0.05));
    auto c = lphi_psi_residual(ExpShearPotential(0.1), sq, 1.0 / 32);
    CHECK(c.identity_gap / b.identity_gap > 3);
}

TEST_CASE("first fundamental form of the t-surface")
{
    QuadraticPotential iso, an(1.0, 0.5);
    ExpShearPotential ex(0.1);
    Mat2 f = first_fundamental_form(iso, 0.3);
    CHECK(f.xx == 1.0);
    CHECK(f.yy == 1.0);
    Mat2 g = first_fundamental_form(an, 0.3);
    CHECK(g.xx == 2.0);
    CHECK(g.yy == 1.0);
    cplx w(0.3, -0.2);
    Mat2 h = first_fundamental_form(ex, w);
    double e1 = 0, e2 = 0;
    for (double s : {1e-2, 5e-3}) {
        Mat2 p = pullback_metric(ex, w, s);
        double e = std::abs(p.xx - h.xx) + std::abs(p.xy - h.xy) + std::abs(p.yy - h.yy);
        (s > 6e-3 ? e1 : e2) = e;
    }
    CHECK(e1 < 1e-4);
    CHECK(e1 / e2 > 3);
}
