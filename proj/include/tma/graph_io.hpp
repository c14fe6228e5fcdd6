#pragma once

#include "tma/embedding.hpp"
#include "tma/planar_map.hpp"

#include <string>
#include <utility>

namespace tma {

struct GraphFile {
    PlanarMap map;
    std::vector<int> ids;                        // dense index -> id in the file
    std::vector<std::pair<int, cplx>> boundary;  // dense index, position
    // Present when the file carries an embedding ("H", "Hstar", "Phi").
    std::vector<cplx> H, Hstar;
    std::vector<double> Phi;
    double residual = -1;
};

// Errors are MalformedInput (or the map builder's code) with the message
// prefixed "name:line: ".
GraphFile parse_graph(const std::string& text, const std::string& name = "<input>");
GraphFile load_graph(const std::string& path);

std::string dump_graph(const PlanarMap& m, const std::vector<std::pair<int, cplx>>& boundary,
                       const std::vector<int>& ids = {});
// Graph fields plus H, Hstar (inner dual vertices, then leaves), Phi, residual.
std::string dump_embedding(const GraphFile& g, const HarmonicEmbedding& e, const Derived& d);

// H from the file when present, otherwise the Tutte solve of its boundary.
HarmonicEmbedding embedding_of(const GraphFile& g);

void write_text(const std::string& path, const std::string& text);
std::string read_text(const std::string& path);

} // namespace tma
