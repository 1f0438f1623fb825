#include "sddm/io.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <sstream>

namespace sddm {

namespace {

std::string lower(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(),
                 [](unsigned char c) { return std::tolower(c); });
  return s;
}

[[noreturn]] void parse_fail(const std::string& name, int line,
                             const std::string& msg) {
  throw InputError(name + ":" + std::to_string(line) + ": " + msg);
}

std::ifstream open_or_throw(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open " + path);
  return in;
}

}  // namespace

Matrix read_matrix_market(std::istream& in, const std::string& name) {
  std::string line;
  int lineno = 0;
  if (!std::getline(in, line)) parse_fail(name, 1, "empty file");
  ++lineno;
  std::istringstream banner(line);
  std::string tag, object, format, field, symmetry;
  banner >> tag >> object >> format >> field >> symmetry;
  if (tag != "%%MatrixMarket") parse_fail(name, lineno, "missing banner");
  if (lower(object) != "matrix" || lower(format) != "coordinate")
    parse_fail(name, lineno, "expected matrix coordinate format");
  field = lower(field);
  symmetry = lower(symmetry);
  if (field != "real" && field != "integer")
    parse_fail(name, lineno, "unsupported field '" + field + "'");
  if (symmetry != "symmetric" && symmetry != "general")
    parse_fail(name, lineno, "unsupported symmetry '" + symmetry + "'");

  long rows = -1, cols = -1, nnz = -1;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line[0] == '%') continue;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    std::istringstream hdr(line);
    if (!(hdr >> rows >> cols >> nnz))
      parse_fail(name, lineno, "bad size line");
    break;
  }
  if (rows < 0) parse_fail(name, lineno, "missing size line");
  if (rows != cols) parse_fail(name, lineno, "matrix is not square");

  Matrix M = Matrix::Zero(rows, cols);
  Matrix seen = Matrix::Zero(rows, cols);
  long read = 0;
  while (read < nnz) {
    if (!std::getline(in, line))
      parse_fail(name, lineno, "unexpected end of file: " +
                                   std::to_string(nnz - read) +
                                   " entries missing");
    ++lineno;
    if (!line.empty() && line[0] == '%') continue;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    std::istringstream row(line);
    long i, j;
    double v;
    if (!(row >> i >> j >> v)) parse_fail(name, lineno, "bad entry line");
    if (i < 1 || i > rows || j < 1 || j > cols)
      parse_fail(name, lineno, "index out of range");
    --i;
    --j;
    if (seen(i, j) != 0.0) parse_fail(name, lineno, "duplicate entry");
    seen(i, j) = 1.0;
    M(i, j) = v;
    if (symmetry == "symmetric" && i != j) {
      M(j, i) = v;
      seen(j, i) = 1.0;
    }
    ++read;
  }
  if (symmetry == "general") {
    for (long i = 0; i < rows; ++i)
      for (long j = 0; j < cols; ++j)
        if (M(i, j) != M(j, i))
          throw InputError(name + ": general file is not symmetric at (" +
                           std::to_string(i + 1) + "," + std::to_string(j + 1) +
                           ")");
  }
  return M;
}

Matrix read_matrix_market_file(const std::string& path) {
  auto in = open_or_throw(path);
  return read_matrix_market(in, path);
}

void write_matrix_market(std::ostream& out, const MatrixRef& M) {
  if (M.rows() != M.cols())
    throw InputError("write_matrix_market: matrix is not square");
  long nnz = 0;
  for (Eigen::Index i = 0; i < M.rows(); ++i)
    for (Eigen::Index j = 0; j <= i; ++j)
      if (M(i, j) != 0.0) ++nnz;
  out << "%%MatrixMarket matrix coordinate real symmetric\n";
  out << M.rows() << " " << M.cols() << " " << nnz << "\n";
  out.precision(17);
  for (Eigen::Index i = 0; i < M.rows(); ++i)
    for (Eigen::Index j = 0; j <= i; ++j)
      if (M(i, j) != 0.0)
        out << (i + 1) << " " << (j + 1) << " " << M(i, j) << "\n";
}

void write_matrix_market_file(const std::string& path, const MatrixRef& M) {
  std::ofstream out(path);
  if (!out) throw InputError("cannot open " + path + " for writing");
  write_matrix_market(out, M);
}

WeightedGraph read_edge_list(std::istream& in, const std::string& name) {
  std::string line;
  int lineno = 0;
  std::vector<Edge> edges;
  int max_id = -1;
  while (std::getline(in, line)) {
    ++lineno;
    auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos || line[first] == '#') continue;
    std::istringstream row(line);
    long u, v;
    double w;
    if (!(row >> u >> v >> w))
      parse_fail(name, lineno, "expected 'u v w'");
    std::string rest;
    if (row >> rest) parse_fail(name, lineno, "trailing tokens");
    if (u < 0 || v < 0) parse_fail(name, lineno, "negative node id");
    if (u == v) parse_fail(name, lineno, "self loop");
    if (!(w > 0.0)) parse_fail(name, lineno, "nonpositive weight");
    edges.push_back({static_cast<int>(u), static_cast<int>(v), w});
    max_id = std::max({max_id, static_cast<int>(u), static_cast<int>(v)});
  }
  if (edges.empty()) throw InputError(name + ": no edges");
  return WeightedGraph(max_id + 1, std::move(edges));
}

WeightedGraph read_edge_list_file(const std::string& path) {
  auto in = open_or_throw(path);
  return read_edge_list(in, path);
}

void write_edge_list(std::ostream& out, const WeightedGraph& g) {
  out.precision(17);
  for (const auto& e : g.edges())
    out << e.u << " " << e.v << " " << e.w << "\n";
}

Vector read_vector_file(const std::string& path) {
  auto in = open_or_throw(path);
  std::string line;
  int lineno = 0;
  std::vector<double> vals;
  while (std::getline(in, line)) {
    ++lineno;
    auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos || line[first] == '#') continue;
    std::istringstream row(line);
    double v;
    while (row >> v) vals.push_back(v);
    if (!row.eof()) parse_fail(path, lineno, "expected a number");
  }
  Vector out(vals.size());
  for (size_t i = 0; i < vals.size(); ++i) out(i) = vals[i];
  return out;
}

bool sniff_matrix_market(const std::string& path) {
  std::ifstream in(path);
  if (!in) return false;
  std::string head;
  in >> head;
  return head == "%%MatrixMarket";
}

}  // namespace sddm
