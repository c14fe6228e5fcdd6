#include "doctest.h"
#include "fixtures.hpp"
#include "tma/graph_io.hpp"

using namespace tma;

TEST_CASE("graph round trip keeps ids, faces and conductances")
{
    auto m = fx::star(2.5);
    std::vector<int> ids = {10, 11, 12, 13, 14};
    std::vector<std::pair<int, cplx>> b;
    for (auto [v, p] : fx::star_corners()) b.emplace_back(v, p);
    std::string text = dump_graph(m, b, ids);
    GraphFile g = parse_graph(text);
    CHECK(g.ids == ids);
    CHECK(g.map.n_edges() == m.n_edges());
    CHECK(g.map.faces == m.faces);
    CHECK(g.map.edges[0].c == 2.5);
    CHECK(g.boundary.size() == 4);
    CHECK(dump_graph(g.map, g.boundary, g.ids) == text);
}

TEST_CASE("conductance defaults to one")
{
    std::string text = R"({"vertices":[{"id":0},{"id":1}],"edges":[{"u":0,"v":1}],"faces":[[0,1]],"outer_face":0,
"boundary":[{"id":0,"pos":[0,0]},{"id":1,"pos":[1,0]}]})";
    CHECK(parse_graph(text).map.edges[0].c == 1.0);
}

TEST_CASE("errors name the offending line")
{
    auto m = fx::star();
    std::string text = dump_graph(m, fx::star_corners());
    SUBCASE("negative conductance")
    {
        auto at = text.find("{\"u\":0,\"v\":3,\"c\":1.0}");
        REQUIRE(at != std::string::npos);
        text.replace(at, 21, "{\"u\":0,\"v\":3,\"c\":-1}");
        try {
            parse_graph(text, "g.json");
            FAIL("accepted");
        } catch (const Error& e) {
            CHECK(e.code() == Errc::NonPositiveConductance);
            CHECK(std::string(e.what()).find("g.json:12:") != std::string::npos);
        }
    }
    SUBCASE("unknown vertex id")
    {
        auto at = text.find("[0,2,3]");
        text.replace(at, 7, "[0,2,9]");
        try {
            parse_graph(text, "g.json");
            FAIL("accepted");
        } catch (const Error& e) {
            CHECK(e.code() == Errc::MalformedInput);
            CHECK(std::string(e.what()).find("g.json:21:") != std::string::npos);
        }
    }
    SUBCASE("not json")
    {
        CHECK_THROWS_AS(parse_graph("{\"vertices\": [", "g.json"), Error);
    }
}

TEST_CASE("embedding dump is a superset of the graph file")
{
    auto m = fx::star();
    GraphFile g = parse_graph(dump_graph(m, fx::star_corners()));
    HarmonicEmbedding e = embedding_of(g);
    Derived d = derive(g.map, e);
    GraphFile back = parse_graph(dump_embedding(g, e, d));
    CHECK(back.map.faces == g.map.faces);
    REQUIRE(back.H.size() == e.H.size());
    for (std::size_t v = 0; v < e.H.size(); ++v) CHECK(std::abs(back.H[v] - e.H[v]) < 1e-15);
    CHECK(std::abs(back.H[0] - cplx(0.5, 0.5)) < 1e-12);
    CHECK(back.Phi.size() == d.p.Phi.size());
    CHECK(back.residual >= 0);
    HarmonicEmbedding again = embedding_of(back);
    CHECK(again.H == back.H);
}
