#pragma once
#include <iosfwd>
#include <string>

#include "fpp/graph.hpp"

namespace fpp {

// Plain-text graph format, one record per line:
//   fpp-graph 1
//   <key> <value> header lines (parameters, seed, domain, roots)
//   V <id> <x_1> .. <x_d> <weight>
//   E <u> <v> <l_value> <cost>
// Doubles are written with 17 significant digits, so write -> read -> write
// is byte-identical and values round-trip bit-exactly.
void write_graph(std::ostream& os, const SpatialGraph& g);
SpatialGraph read_graph(std::istream& is);

void write_graph_file(const std::string& path, const SpatialGraph& g);
SpatialGraph read_graph_file(const std::string& path);

}  // namespace fpp
