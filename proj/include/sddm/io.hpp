#pragma once

#include <iosfwd>
#include <string>

#include "sddm/core.hpp"

namespace sddm {

// Matrix Market coordinate format, real or integer field. Symmetric files are
// mirrored on read; general files must contain both triangles and are checked
// for exact symmetry. Indices are 1-based in the file.
Matrix read_matrix_market(std::istream& in, const std::string& name = "<stream>");
Matrix read_matrix_market_file(const std::string& path);
void write_matrix_market(std::ostream& out, const MatrixRef& M);
void write_matrix_market_file(const std::string& path, const MatrixRef& M);

// Whitespace-separated "u v w" per line, 0-based node ids. Blank lines and
// lines starting with '#' are skipped. Node count is one past the largest id.
WeightedGraph read_edge_list(std::istream& in, const std::string& name = "<stream>");
WeightedGraph read_edge_list_file(const std::string& path);
void write_edge_list(std::ostream& out, const WeightedGraph& g);

// One value per line; '#' comments and blank lines are skipped.
Vector read_vector_file(const std::string& path);

// True when the stream begins with a MatrixMarket banner.
bool sniff_matrix_market(const std::string& path);

}  // namespace sddm
