#pragma once

#include <utility>
#include <vector>

#include "sddm/common.hpp"

namespace sddm {

struct Edge {
  int u = 0;
  int v = 0;
  double w = 1.0;
};

// Undirected weighted graph with strictly positive edge weights, no self
// loops and no duplicate edges. Connectivity is not a construction invariant;
// routines that need it (Laplacian assembly, CLI ingestion) check explicitly.
class WeightedGraph {
 public:
  WeightedGraph() = default;
  WeightedGraph(int n, std::vector<Edge> edges);

  int size() const { return n_; }
  const std::vector<Edge>& edges() const { return edges_; }

  // adjacency()[u] lists (v, w) sorted by v
  const std::vector<std::vector<std::pair<int, double>>>& adjacency() const {
    return adj_;
  }

  int degree(int u) const { return static_cast<int>(adj_[u].size()); }
  int max_degree() const;
  double min_weight() const;
  double max_weight() const;

 private:
  int n_ = 0;
  std::vector<Edge> edges_;
  std::vector<std::vector<std::pair<int, double>>> adj_;
};

// Nodes grouped by connected component, components ordered by smallest member.
std::vector<std::vector<int>> connected_components(const WeightedGraph& g);

bool is_connected(const WeightedGraph& g);

// Generators. Weights default to 1; the random generator draws them uniformly
// from [wmin, wmax] and guarantees connectivity by seeding a random spanning
// tree before sprinkling extra edges.
WeightedGraph make_path(int n, double w = 1.0);
WeightedGraph make_cycle(int n, double w = 1.0);
WeightedGraph make_grid(int rows, int cols, double w = 1.0);
WeightedGraph make_random_connected(int n, int extra_edges, double wmin,
                                    double wmax, Rng& rng);

}  // namespace sddm
