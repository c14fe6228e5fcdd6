#include "tma/graph_io.hpp"

#include <json.hpp>

#include <fstream>
#include <map>
#include <sstream>
#include <unordered_map>

namespace tma {

namespace {

using nlohmann::json;
using ojson = nlohmann::ordered_json;

// Line numbers of the top-level keys and of the elements of top-level arrays.
struct LineIndex {
    std::map<std::string, int> key_line;
    std::map<std::string, std::vector<int>> element_lines;

    int line(const std::string& key, int index) const
    {
        auto it = element_lines.find(key);
        if (it != element_lines.end() && index >= 0 && index < static_cast<int>(it->second.size()))
            return it->second[index];
        auto k = key_line.find(key);
        return k != key_line.end() ? k->second : 1;
    }
};

LineIndex index_lines(const std::string& text)
{
    LineIndex idx;
    int line = 1, depth = 0;
    std::string last_string, current_key;
    bool expect_element = false;
    for (std::size_t i = 0; i < text.size(); ++i) {
        char ch = text[i];
        if (ch == '\n') { ++line; continue; }
        if (ch == ' ' || ch == '\t' || ch == '\r') continue;
        if (expect_element && ch != ']') {
            idx.element_lines[current_key].push_back(line);
            expect_element = false;
        } else if (expect_element) {
            expect_element = false;
        }
        if (ch == '"') {
            std::string s;
            for (++i; i < text.size() && text[i] != '"'; ++i) {
                if (text[i] == '\\') ++i;
                else s += text[i];
            }
            last_string = std::move(s);
            continue;
        }
        if (ch == ':' && depth == 1) {
            current_key = last_string;
            idx.key_line[current_key] = line;
        }
        if (ch == '{' || ch == '[') {
            ++depth;
            if (ch == '[' && depth == 2) expect_element = true;
        } else if (ch == '}' || ch == ']') {
            --depth;
        } else if (ch == ',' && depth == 2) {
            expect_element = true;
        }
    }
    return idx;
}

int line_of_byte(const std::string& text, std::size_t byte)
{
    int line = 1;
    for (std::size_t i = 0; i < std::min(byte, text.size()); ++i)
        if (text[i] == '\n') ++line;
    return line;
}

[[noreturn]] void fail(Errc code, const std::string& name, int line, const std::string& msg)
{
    throw Error(code, name + ":" + std::to_string(line) + ": " + msg);
}

cplx point(const json& p)
{
    if (!p.is_array() || p.size() != 2 || !p[0].is_number() || !p[1].is_number())
        throw std::invalid_argument("expected [x, y]");
    return {p[0].get<double>(), p[1].get<double>()};
}

ojson point_json(cplx w) { return ojson::array({w.real(), w.imag()}); }

} // namespace

GraphFile parse_graph(const std::string& text, const std::string& name)
{
    json j;
    try {
        j = json::parse(text);
    } catch (const json::parse_error& e) {
        fail(Errc::MalformedInput, name, line_of_byte(text, e.byte), "invalid JSON");
    }
    LineIndex lines = index_lines(text);
    if (!j.is_object()) fail(Errc::MalformedInput, name, 1, "top level must be an object");
    for (const char* key : {"vertices", "edges", "faces", "outer_face"})
        if (!j.contains(key)) fail(Errc::MalformedInput, name, 1, std::string("missing \"") + key + "\"");

    GraphFile g;
    std::unordered_map<long long, int> dense;
    const json& vs = j["vertices"];
    if (!vs.is_array()) fail(Errc::MalformedInput, name, lines.line("vertices", -1), "\"vertices\" must be an array");
    for (std::size_t k = 0; k < vs.size(); ++k) {
        int ln = lines.line("vertices", static_cast<int>(k));
        if (!vs[k].is_object() || !vs[k].contains("id") || !vs[k]["id"].is_number_integer())
            fail(Errc::MalformedInput, name, ln, "vertex needs an integer \"id\"");
        long long id = vs[k]["id"].get<long long>();
        if (!dense.emplace(id, static_cast<int>(g.ids.size())).second)
            fail(Errc::MalformedInput, name, ln, "duplicate vertex id " + std::to_string(id));
        g.ids.push_back(static_cast<int>(id));
    }
    auto lookup = [&](const json& v, const std::string& key, int k) {
        if (!v.is_number_integer()) fail(Errc::MalformedInput, name, lines.line(key, k), "vertex reference must be an integer");
        auto it = dense.find(v.get<long long>());
        if (it == dense.end())
            fail(Errc::MalformedInput, name, lines.line(key, k), "unknown vertex id " + std::to_string(v.get<long long>()));
        return it->second;
    };

    std::vector<EdgeSpec> edges;
    const json& es = j["edges"];
    if (!es.is_array()) fail(Errc::MalformedInput, name, lines.line("edges", -1), "\"edges\" must be an array");
    for (std::size_t k = 0; k < es.size(); ++k) {
        int ik = static_cast<int>(k);
        const json& e = es[k];
        if (!e.is_object() || !e.contains("u") || !e.contains("v"))
            fail(Errc::MalformedInput, name, lines.line("edges", ik), "edge needs \"u\" and \"v\"");
        EdgeSpec s{lookup(e["u"], "edges", ik), lookup(e["v"], "edges", ik), 1.0};
        if (e.contains("c")) {
            if (!e["c"].is_number()) fail(Errc::MalformedInput, name, lines.line("edges", ik), "\"c\" must be a number");
            s.c = e["c"].get<double>();
        }
        edges.push_back(s);
    }

    std::vector<std::vector<int>> faces;
    const json& fs = j["faces"];
    if (!fs.is_array()) fail(Errc::MalformedInput, name, lines.line("faces", -1), "\"faces\" must be an array");
    for (std::size_t k = 0; k < fs.size(); ++k) {
        int ik = static_cast<int>(k);
        if (!fs[k].is_array()) fail(Errc::MalformedInput, name, lines.line("faces", ik), "face must be an array of ids");
        std::vector<int> cyc;
        for (const json& v : fs[k]) cyc.push_back(lookup(v, "faces", ik));
        faces.push_back(std::move(cyc));
    }
    if (!j["outer_face"].is_number_integer())
        fail(Errc::MalformedInput, name, lines.line("outer_face", -1), "\"outer_face\" must be an integer");
    int outer = j["outer_face"].get<int>();

    try {
        g.map = build_planar_map(static_cast<int>(g.ids.size()), std::move(edges), faces, outer);
    } catch (const Error& e) {
        static const std::map<std::string, std::string> key_of{
            {"edge", "edges"}, {"face", "faces"}, {"vertex", "vertices"}, {"outer_face", "outer_face"}};
        int ln = 1;
        auto it = key_of.find(e.item());
        if (it != key_of.end()) ln = lines.line(it->second, it->first == "outer_face" ? -1 : e.index());
        std::string msg = e.what();
        msg.erase(0, std::string(errc_name(e.code())).size() + 2);
        fail(e.code(), name, ln, msg);
    }

    if (j.contains("boundary")) {
        const json& bs = j["boundary"];
        for (std::size_t k = 0; k < bs.size(); ++k) {
            int ik = static_cast<int>(k);
            if (!bs[k].is_object() || !bs[k].contains("id") || !bs[k].contains("pos"))
                fail(Errc::MalformedInput, name, lines.line("boundary", ik), "boundary entry needs \"id\" and \"pos\"");
            int v = lookup(bs[k]["id"], "boundary", ik);
            try {
                g.boundary.emplace_back(v, point(bs[k]["pos"]));
            } catch (const std::invalid_argument&) {
                fail(Errc::MalformedInput, name, lines.line("boundary", ik), "\"pos\" must be [x, y]");
            }
        }
    }

    auto read_points = [&](const char* key, std::size_t expect, std::vector<cplx>& out) {
        if (!j.contains(key)) return;
        const json& a = j[key];
        if (!a.is_array() || a.size() != expect)
            fail(Errc::MalformedInput, name, lines.line(key, -1),
                 std::string("\"") + key + "\" must have " + std::to_string(expect) + " entries");
        for (std::size_t k = 0; k < a.size(); ++k) {
            try {
                out.push_back(point(a[k]));
            } catch (const std::invalid_argument&) {
                fail(Errc::MalformedInput, name, lines.line(key, static_cast<int>(k)), "expected [x, y]");
            }
        }
    };
    read_points("H", g.ids.size(), g.H);
    if (j.contains("Hstar")) {
        DualMap d = dual_map(g.map);
        read_points("Hstar", static_cast<std::size_t>(d.n_vertices()), g.Hstar);
    }
    if (j.contains("Phi")) {
        const json& a = j["Phi"];
        if (!a.is_array() || a.size() != g.ids.size())
            fail(Errc::MalformedInput, name, lines.line("Phi", -1), "\"Phi\" must have one value per vertex");
        for (std::size_t k = 0; k < a.size(); ++k) {
            if (!a[k].is_number()) fail(Errc::MalformedInput, name, lines.line("Phi", static_cast<int>(k)), "expected a number");
            g.Phi.push_back(a[k].get<double>());
        }
    }
    if (j.contains("residual") && j["residual"].is_number()) g.residual = j["residual"].get<double>();
    return g;
}

GraphFile load_graph(const std::string& path) { return parse_graph(read_text(path), path); }

namespace {

ojson graph_json(const PlanarMap& m, const std::vector<std::pair<int, cplx>>& boundary, const std::vector<int>& ids)
{
    auto id = [&](int v) { return ids.empty() ? v : ids[v]; };
    ojson j;
    j["vertices"] = ojson::array();
    for (int v = 0; v < m.n_vertices; ++v) j["vertices"].push_back({{"id", id(v)}});
    j["edges"] = ojson::array();
    for (const auto& e : m.edges) j["edges"].push_back({{"u", id(e.u)}, {"v", id(e.v)}, {"c", e.c}});
    j["faces"] = ojson::array();
    for (const auto& f : m.faces) {
        ojson cyc = ojson::array();
        for (int v : f) cyc.push_back(id(v));
        j["faces"].push_back(cyc);
    }
    j["outer_face"] = m.outer_face;
    j["boundary"] = ojson::array();
    for (const auto& [v, p] : boundary) j["boundary"].push_back({{"id", id(v)}, {"pos", point_json(p)}});
    return j;
}

// One array element per line keeps the line-anchored messages useful.
std::string render(const ojson& j)
{
    std::ostringstream out;
    out << "{\n";
    bool first = true;
    for (auto it = j.begin(); it != j.end(); ++it) {
        if (!first) out << ",\n";
        first = false;
        out << "  " << ojson(it.key()).dump() << ": ";
        if (it->is_array()) {
            out << "[";
            for (std::size_t k = 0; k < it->size(); ++k) out << (k ? ",\n    " : "\n    ") << (*it)[k].dump();
            out << (it->empty() ? "]" : "\n  ]");
        } else {
            out << it->dump();
        }
    }
    out << "\n}\n";
    return out.str();
}

} // namespace

std::string dump_graph(const PlanarMap& m, const std::vector<std::pair<int, cplx>>& boundary, const std::vector<int>& ids)
{
    return render(graph_json(m, boundary, ids));
}

std::string dump_embedding(const GraphFile& g, const HarmonicEmbedding& e, const Derived& d)
{
    ojson j = graph_json(g.map, g.boundary, g.ids);
    j["H"] = ojson::array();
    for (cplx w : e.H) j["H"].push_back(point_json(w));
    j["Hstar"] = ojson::array();
    for (cplx w : d.de.Hs) j["Hstar"].push_back(point_json(w));
    j["Phi"] = d.p.Phi;
    j["residual"] = e.residual;
    return render(j);
}

HarmonicEmbedding embedding_of(const GraphFile& g)
{
    if (g.H.empty()) return solve_tutte(g.map, g.boundary);
    HarmonicEmbedding e;
    e.H = g.H;
    e.fixed.assign(g.map.n_vertices, 0);
    for (const auto& [v, p] : g.boundary) e.fixed[v] = 1;
    e.residual = harmonicity_residual(g.map, e.H, e.fixed);
    return e;
}

void write_text(const std::string& path, const std::string& text)
{
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error(Errc::MalformedInput, "cannot write " + path);
    out << text;
}

std::string read_text(const std::string& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(Errc::MalformedInput, "cannot open " + path);
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
}

} // namespace tma
