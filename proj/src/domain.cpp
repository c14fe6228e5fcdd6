#include "tma/domain.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace tma {

namespace {

double seg_dist(cplx p, cplx a, cplx b)
{
    cplx d = b - a;
    double t = std::norm(d) > 0 ? std::clamp(dotc(p - a, d) / std::norm(d), 0.0, 1.0) : 0.0;
    return std::abs(p - (a + t * d));
}

std::vector<double> numbers(const std::string& s, char sep)
{
    std::vector<double> out;
    std::stringstream ss(s);
    std::string tok;
    while (std::getline(ss, tok, sep)) {
        try {
            std::size_t used = 0;
            out.push_back(std::stod(tok, &used));
            if (used != tok.size()) throw std::invalid_argument(tok);
        } catch (const std::exception&) {
            throw Error(Errc::MalformedInput, "bad number '" + tok + "' in region spec");
        }
    }
    return out;
}

} // namespace

Omega Omega::disc(cplx c, double r)
{
    if (!(r > 0)) throw Error(Errc::MalformedInput, "disc radius must be positive");
    Omega o;
    o.kind = Kind::Disc;
    o.centre = c;
    o.radius = r;
    return o;
}

Omega Omega::box(double x0, double y0, double x1, double y1)
{
    if (!(x1 > x0) || !(y1 > y0)) throw Error(Errc::MalformedInput, "empty box");
    Omega o;
    o.kind = Kind::Box;
    o.poly = {{x0, y0}, {x1, y0}, {x1, y1}, {x0, y1}};
    o.centre = cplx(0.5 * (x0 + x1), 0.5 * (y0 + y1));
    return o;
}

Omega Omega::polygon(std::vector<cplx> p)
{
    if (p.size() < 3) throw Error(Errc::MalformedInput, "polygon needs three vertices");
    if (polygon_area(p) < 0) std::reverse(p.begin(), p.end());
    Omega o;
    o.kind = Kind::Polygon;
    cplx c = 0;
    for (cplx z : p) c += z;
    o.centre = c / static_cast<double>(p.size());
    o.poly = std::move(p);
    return o;
}

Omega Omega::parse(const std::string& spec)
{
    auto colon = spec.find(':');
    if (colon == std::string::npos) throw Error(Errc::MalformedInput, "region spec needs kind:params");
    std::string kind = spec.substr(0, colon), rest = spec.substr(colon + 1);
    if (kind == "disc") {
        auto v = numbers(rest, ',');
        if (v.size() != 3) throw Error(Errc::MalformedInput, "disc:cx,cy,r");
        return disc({v[0], v[1]}, v[2]);
    }
    if (kind == "square") {
        auto v = numbers(rest, ',');
        if (v.size() != 2) throw Error(Errc::MalformedInput, "square:a,b");
        return box(v[0], v[0], v[1], v[1]);
    }
    if (kind == "box") {
        auto v = numbers(rest, ',');
        if (v.size() != 4) throw Error(Errc::MalformedInput, "box:x0,y0,x1,y1");
        return box(v[0], v[1], v[2], v[3]);
    }
    if (kind == "poly") {
        std::vector<cplx> p;
        std::stringstream ss(rest);
        std::string pt;
        while (std::getline(ss, pt, ';')) {
            auto v = numbers(pt, ',');
            if (v.size() != 2) throw Error(Errc::MalformedInput, "poly:x,y;x,y;...");
            p.emplace_back(v[0], v[1]);
        }
        return polygon(std::move(p));
    }
    throw Error(Errc::MalformedInput, "unknown region kind '" + kind + "'");
}

bool Omega::contains(cplx w) const
{
    if (kind == Kind::Disc) return std::abs(w - centre) < radius;
    if (kind == Kind::Box)
        return w.real() > poly[0].real() && w.real() < poly[2].real() && w.imag() > poly[0].imag() &&
               w.imag() < poly[2].imag();
    int wn = 0;
    const std::size_t n = poly.size();
    for (std::size_t i = 0; i < n; ++i) {
        cplx a = poly[i], b = poly[(i + 1) % n];
        if (seg_dist(w, a, b) == 0) return false;
        if (a.imag() <= w.imag()) {
            if (b.imag() > w.imag() && cross(b - a, w - a) > 0) ++wn;
        } else if (b.imag() <= w.imag() && cross(b - a, w - a) < 0) {
            --wn;
        }
    }
    return wn != 0;
}

double Omega::boundary_distance(cplx w) const
{
    if (kind == Kind::Disc) return std::abs(radius - std::abs(w - centre));
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < poly.size(); ++i) best = std::min(best, seg_dist(w, poly[i], poly[(i + 1) % poly.size()]));
    return best;
}

cplx Omega::project(cplx w) const
{
    cplx d = w - centre;
    if (std::abs(d) == 0) d = cplx(1, 0);
    if (kind == Kind::Disc) return centre + radius * d / std::abs(d);
    // first crossing of the ray centre + t d with the polygon
    double tbest = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < poly.size(); ++i) {
        cplx a = poly[i], e = poly[(i + 1) % poly.size()] - a;
        double den = cross(d, e);
        if (den == 0) continue;
        double t = cross(a - centre, e) / den;
        double s = cross(a - centre, d) / den;
        if (t > 0 && s >= 0 && s <= 1) tbest = std::min(tbest, t);
    }
    if (!std::isfinite(tbest)) return w;
    return centre + tbest * d;
}

cplx Omega::closest(cplx w) const
{
    if (kind == Kind::Disc) return project(w);
    cplx best = poly[0];
    double bd = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < poly.size(); ++i) {
        cplx a = poly[i], d = poly[(i + 1) % poly.size()] - a;
        double t = std::norm(d) > 0 ? std::clamp(dotc(w - a, d) / std::norm(d), 0.0, 1.0) : 0.0;
        cplx q = a + t * d;
        if (std::abs(w - q) < bd) {
            bd = std::abs(w - q);
            best = q;
        }
    }
    return best;
}

double Omega::diameter() const
{
    if (kind == Kind::Disc) return 2 * radius;
    double d = 0;
    for (cplx a : poly)
        for (cplx b : poly) d = std::max(d, std::abs(a - b));
    return d;
}

} // namespace tma
