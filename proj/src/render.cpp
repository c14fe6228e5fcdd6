#include "tma/render.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>

namespace tma {

namespace {

std::string num(double x)
{
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.2f", x);
    return buf;
}

// Maps world coordinates to the SVG canvas (y up).
class Canvas {
public:
    Canvas(const std::vector<cplx>& pts, const SvgStyle& st) : st_(st)
    {
        double x0 = 0, x1 = 1, y0 = 0, y1 = 1;
        bool first = true;
        for (cplx p : pts) {
            if (!std::isfinite(p.real()) || !std::isfinite(p.imag())) continue;
            if (first) { x0 = x1 = p.real(); y0 = y1 = p.imag(); first = false; }
            x0 = std::min(x0, p.real()); x1 = std::max(x1, p.real());
            y0 = std::min(y0, p.imag()); y1 = std::max(y1, p.imag());
        }
        double span = std::max({x1 - x0, y1 - y0, 1e-12});
        scale_ = (st.width - 2 * st.margin) / span;
        x0_ = x0; y1_ = y1;
        height_ = (y1 - y0) * scale_ + 2 * st.margin;
    }

    double X(cplx p) const { return st_.margin + (p.real() - x0_) * scale_; }
    double Y(cplx p) const { return st_.margin + (y1_ - p.imag()) * scale_; }

    std::string header(double extra = 0) const
    {
        std::ostringstream s;
        s << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << num(st_.width + extra) << "\" height=\""
          << num(height_) << "\" viewBox=\"0 0 " << num(st_.width + extra) << " " << num(height_) << "\">\n"
          << "<rect width=\"100%\" height=\"100%\" fill=\"#ffffff\"/>\n";
        return s.str();
    }

    std::string line(cplx a, cplx b, const char* colour, double width) const
    {
        return "<line x1=\"" + num(X(a)) + "\" y1=\"" + num(Y(a)) + "\" x2=\"" + num(X(b)) + "\" y2=\"" + num(Y(b)) +
               "\" stroke=\"" + colour + "\" stroke-width=\"" + num(width) + "\"/>\n";
    }

    std::string polygon(const std::vector<cplx>& p, const std::string& fill, const std::string& stroke, double width) const
    {
        std::string pts;
        for (cplx w : p) pts += num(X(w)) + "," + num(Y(w)) + " ";
        if (!pts.empty()) pts.pop_back();
        return "<polygon points=\"" + pts + "\" fill=\"" + fill + "\" stroke=\"" + stroke + "\" stroke-width=\"" +
               num(width) + "\"/>\n";
    }

    double height() const { return height_; }

private:
    SvgStyle st_;
    double scale_ = 1, x0_ = 0, y1_ = 0, height_ = 0;
};

// Blue -> white -> red.
std::string colour(double t)
{
    t = std::clamp(t, 0.0, 1.0);
    int r, g, b;
    if (t < 0.5) {
        double s = t / 0.5;
        r = static_cast<int>(std::lround(59 + s * (255 - 59)));
        g = static_cast<int>(std::lround(76 + s * (255 - 76)));
        b = static_cast<int>(std::lround(192 + s * (255 - 192)));
    } else {
        double s = (t - 0.5) / 0.5;
        r = static_cast<int>(std::lround(255 + s * (180 - 255)));
        g = static_cast<int>(std::lround(255 + s * (4 - 255)));
        b = static_cast<int>(std::lround(255 + s * (38 - 255)));
    }
    char buf[8];
    std::snprintf(buf, sizeof buf, "#%02x%02x%02x", r, g, b);
    return buf;
}

} // namespace

std::string svg_embedding(const PlanarMap& m, const std::vector<cplx>& H, const SvgStyle& st)
{
    Canvas cv(H, st);
    std::string out = cv.header();
    for (const auto& e : m.edges) out += cv.line(H[e.u], H[e.v], "#000000", st.stroke);
    for (int v = 0; v < m.n_vertices; ++v)
        out += "<circle cx=\"" + num(cv.X(H[v])) + "\" cy=\"" + num(cv.Y(H[v])) + "\" r=\"" + num(st.vertex_radius) +
               "\" fill=\"" + (m.boundary[v] ? "#1f5fbf" : "#000000") + "\"/>\n";
    return out + "</svg>\n";
}

std::string svg_dual(const PlanarMap& m, const DualMap& d, const std::vector<cplx>& H, const std::vector<cplx>& Hs,
                     const SvgStyle& st)
{
    std::vector<cplx> all = H;
    all.insert(all.end(), Hs.begin(), Hs.end());
    Canvas cv(all, st);
    std::string out = cv.header();
    for (const auto& e : m.edges) out += cv.line(H[e.u], H[e.v], "#999999", st.stroke);
    for (int e = 0; e < m.n_edges(); ++e) out += cv.line(Hs[d.right[e]], Hs[d.left[e]], "#c0392b", st.stroke);
    return out + "</svg>\n";
}

std::string svg_tembedding(const PlanarMap& m, const CornerGraph& cg, const TSurface& ts, const SvgStyle& st)
{
    Canvas cv(ts.T, st);
    std::string out = cv.header();
    for (const auto& b : cg.black) {
        std::vector<cplx> p;
        for (int c : b.corners) p.push_back(ts.T[c]);
        out += cv.polygon(p, "#000000", "#000000", st.stroke);
    }
    for (int e = 0; e < m.n_edges(); ++e) {
        std::vector<cplx> p;
        for (int c : cg.white[e]) p.push_back(ts.T[c]);
        out += cv.polygon(p, "#ffffff", "#000000", st.stroke);
    }
    return out + "</svg>\n";
}

std::string svg_field(const PlanarMap& m, const std::vector<cplx>& H, const Field& f, const SvgStyle& st)
{
    double lo = 0, hi = 0;
    bool any = false;
    for (int v = 0; v < m.n_vertices; ++v) {
        if (!valued(f, v)) continue;
        if (!any) { lo = hi = f[v]; any = true; }
        lo = std::min(lo, f[v]);
        hi = std::max(hi, f[v]);
    }
    double span = hi > lo ? hi - lo : 1;
    const double legend = 90;
    Canvas cv(H, st);
    std::string out = cv.header(legend);
    for (int fc = 0; fc < m.n_faces(); ++fc) {
        if (fc == m.outer_face) continue;
        double s = 0;
        int n = 0;
        std::vector<cplx> p;
        for (int v : m.faces[fc]) {
            p.push_back(H[v]);
            if (valued(f, v)) { s += f[v]; ++n; }
        }
        std::string fill = n ? colour((s / n - lo) / span) : "#dddddd";
        out += cv.polygon(p, fill, fill, 0.5 * st.stroke);
    }
    double x = st.width + 20, top = st.margin, h = std::max(cv.height() - 2 * st.margin, 1.0);
    const int steps = 32;
    for (int k = 0; k < steps; ++k) {
        double t = 1 - (k + 0.5) / steps;
        out += "<rect x=\"" + num(x) + "\" y=\"" + num(top + k * h / steps) + "\" width=\"20\" height=\"" +
               num(h / steps + 0.5) + "\" fill=\"" + colour(t) + "\"/>\n";
    }
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.4g", hi);
    out += "<text x=\"" + num(x + 24) + "\" y=\"" + num(top + 10) + "\" font-size=\"11\">" + buf + "</text>\n";
    std::snprintf(buf, sizeof buf, "%.4g", lo);
    out += "<text x=\"" + num(x + 24) + "\" y=\"" + num(top + h) + "\" font-size=\"11\">" + buf + "</text>\n";
    return out + "</svg>\n";
}

} // namespace tma
