#include "tma/potential.hpp"

#include "json.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

namespace tma {

cplx ConvexPotential::dbar_det(cplx w) const
{
    const double h = 1e-4;
    auto det = [&](cplx z) { return hessian(z).det(); };
    double dx = (det(w + h) - det(w - h)) / (2 * h);
    double dy = (det(w + cplx(0, h)) - det(w - cplx(0, h))) / (2 * h);
    return -2.0 * 0.5 * cplx(dx, dy);
}

void ConvexPotential::require_inside(cplx w) const
{
    if (!domain.contains(w, 1e-12))
        throw Error(Errc::OutsideDomain, "point (" + std::to_string(w.real()) + ", " + std::to_string(w.imag()) +
                                             ") outside the potential's domain");
}

std::string QuadraticPotential::tag() const
{
    if (a_ == 0.5 && b_ == 0.5) return "quad";
    std::ostringstream s;
    s << "aniso:" << a_ << "," << b_;
    return s.str();
}

std::string ExpShearPotential::tag() const
{
    std::ostringstream s;
    s << "expshear:" << eps_;
    return s.str();
}

SampledPotential::SampledPotential(Box grid, int nx, int ny, std::vector<double> values, double step)
    : grid_(grid), nx_(nx), ny_(ny), v_(std::move(values)), step_(step)
{
    if (nx_ < 2 || ny_ < 2 || static_cast<int>(v_.size()) != nx_ * ny_)
        throw Error(Errc::MalformedInput, "sampled potential grid has the wrong size");
    domain = grid_;
}

double SampledPotential::phi(cplx w) const
{
    require_inside(w);
    double fx = (w.real() - grid_.x0) / (grid_.x1 - grid_.x0) * (nx_ - 1);
    double fy = (w.imag() - grid_.y0) / (grid_.y1 - grid_.y0) * (ny_ - 1);
    int i = std::clamp(static_cast<int>(std::floor(fx)), 0, nx_ - 2);
    int j = std::clamp(static_cast<int>(std::floor(fy)), 0, ny_ - 2);
    double s = fx - i, t = fy - j;
    auto at = [&](int a, int b) { return v_[static_cast<std::size_t>(b) * nx_ + a]; };
    return (1 - s) * (1 - t) * at(i, j) + s * (1 - t) * at(i + 1, j) + (1 - s) * t * at(i, j + 1) +
           s * t * at(i + 1, j + 1);
}

cplx SampledPotential::psi(cplx w) const
{
    const double h = step_;
    return {(phi(w + h) - phi(w - h)) / (2 * h), (phi(w + cplx(0, h)) - phi(w - cplx(0, h))) / (2 * h)};
}

Mat2 SampledPotential::hessian(cplx w) const
{
    const double h = step_;
    const cplx ex(h, 0), ey(0, h);
    double f = phi(w);
    Mat2 m;
    m.xx = (phi(w + ex) - 2 * f + phi(w - ex)) / (h * h);
    m.yy = (phi(w + ey) - 2 * f + phi(w - ey)) / (h * h);
    m.xy = (phi(w + ex + ey) - phi(w + ex - ey) - phi(w - ex + ey) + phi(w - ex - ey)) / (4 * h * h);
    return m;
}

std::unique_ptr<ConvexPotential> make_potential(const std::string& spec)
{
    auto args = [&](const std::string& s) {
        std::vector<double> out;
        std::stringstream ss(s);
        std::string tok;
        while (std::getline(ss, tok, ',')) out.push_back(std::stod(tok));
        return out;
    };
    try {
        if (spec == "quad") return std::make_unique<QuadraticPotential>(0.5, 0.5);
        if (spec.rfind("aniso:", 0) == 0) {
            auto a = args(spec.substr(6));
            if (a.size() != 2 || !(a[0] > 0) || !(a[1] > 0))
                throw Error(Errc::MalformedInput, "aniso needs two positive coefficients");
            return std::make_unique<QuadraticPotential>(a[0], a[1]);
        }
        if (spec.rfind("expshear:", 0) == 0) {
            auto a = args(spec.substr(9));
            if (a.size() != 1) throw Error(Errc::MalformedInput, "expshear needs one coefficient");
            return std::make_unique<ExpShearPotential>(a[0]);
        }
        if (spec.rfind("file:", 0) == 0) {
            std::ifstream in(spec.substr(5));
            if (!in) throw Error(Errc::MalformedInput, "cannot open " + spec.substr(5));
            nlohmann::json j = nlohmann::json::parse(in);
            Box b{j.at("x0"), j.at("y0"), j.at("x1"), j.at("y1")};
            int nx = j.at("nx"), ny = j.at("ny");
            std::vector<double> vals = j.at("values").get<std::vector<double>>();
            double step = j.value("step", std::max((b.x1 - b.x0) / (nx - 1), (b.y1 - b.y0) / (ny - 1)));
            return std::make_unique<SampledPotential>(b, nx, ny, std::move(vals), step);
        }
    } catch (const std::invalid_argument&) {
        throw Error(Errc::MalformedInput, "bad number in potential spec '" + spec + "'");
    } catch (const nlohmann::json::exception& e) {
        throw Error(Errc::MalformedInput, std::string("potential file: ") + e.what());
    }
    throw Error(Errc::MalformedInput, "unknown potential '" + spec + "'");
}

} // namespace tma
