#include "sddm/graph.hpp"

#include <algorithm>
#include <limits>
#include <set>

namespace sddm {

WeightedGraph::WeightedGraph(int n, std::vector<Edge> edges)
    : n_(n), edges_(std::move(edges)) {
  if (n < 0) throw InputError("graph size must be nonnegative");
  std::set<std::pair<int, int>> seen;
  for (auto& e : edges_) {
    if (e.u < 0 || e.u >= n_ || e.v < 0 || e.v >= n_)
      throw InputError("edge endpoint out of range: " + std::to_string(e.u) +
                       " " + std::to_string(e.v));
    if (e.u == e.v)
      throw InputError("self loop at node " + std::to_string(e.u));
    if (!(e.w > 0.0))
      throw InputError("nonpositive weight on edge " + std::to_string(e.u) +
                       " " + std::to_string(e.v));
    if (e.u > e.v) std::swap(e.u, e.v);
    if (!seen.insert({e.u, e.v}).second)
      throw InputError("duplicate edge " + std::to_string(e.u) + " " +
                       std::to_string(e.v));
  }
  std::sort(edges_.begin(), edges_.end(), [](const Edge& a, const Edge& b) {
    return std::pair{a.u, a.v} < std::pair{b.u, b.v};
  });
  adj_.assign(n_, {});
  for (const auto& e : edges_) {
    adj_[e.u].push_back({e.v, e.w});
    adj_[e.v].push_back({e.u, e.w});
  }
  for (auto& row : adj_) std::sort(row.begin(), row.end());
}

int WeightedGraph::max_degree() const {
  int d = 0;
  for (const auto& row : adj_) d = std::max(d, static_cast<int>(row.size()));
  return d;
}

double WeightedGraph::min_weight() const {
  double w = std::numeric_limits<double>::infinity();
  for (const auto& e : edges_) w = std::min(w, e.w);
  return w;
}

double WeightedGraph::max_weight() const {
  double w = 0.0;
  for (const auto& e : edges_) w = std::max(w, e.w);
  return w;
}

std::vector<std::vector<int>> connected_components(const WeightedGraph& g) {
  int n = g.size();
  std::vector<int> comp(n, -1);
  std::vector<std::vector<int>> out;
  std::vector<int> stack;
  for (int s = 0; s < n; ++s) {
    if (comp[s] >= 0) continue;
    int id = static_cast<int>(out.size());
    out.push_back({});
    stack.push_back(s);
    comp[s] = id;
    while (!stack.empty()) {
      int u = stack.back();
      stack.pop_back();
      out[id].push_back(u);
      for (const auto& [v, w] : g.adjacency()[u]) {
        (void)w;
        if (comp[v] < 0) {
          comp[v] = id;
          stack.push_back(v);
        }
      }
    }
    std::sort(out[id].begin(), out[id].end());
  }
  return out;
}

bool is_connected(const WeightedGraph& g) {
  return g.size() <= 1 || connected_components(g).size() == 1;
}

WeightedGraph make_path(int n, double w) {
  std::vector<Edge> e;
  for (int i = 0; i + 1 < n; ++i) e.push_back({i, i + 1, w});
  return WeightedGraph(n, std::move(e));
}

WeightedGraph make_cycle(int n, double w) {
  if (n < 3) throw ParamError("cycle needs at least 3 nodes");
  std::vector<Edge> e;
  for (int i = 0; i + 1 < n; ++i) e.push_back({i, i + 1, w});
  e.push_back({0, n - 1, w});
  return WeightedGraph(n, std::move(e));
}

WeightedGraph make_grid(int rows, int cols, double w) {
  if (rows < 1 || cols < 1) throw ParamError("grid dimensions must be positive");
  std::vector<Edge> e;
  auto id = [cols](int r, int c) { return r * cols + c; };
  for (int r = 0; r < rows; ++r)
    for (int c = 0; c < cols; ++c) {
      if (c + 1 < cols) e.push_back({id(r, c), id(r, c + 1), w});
      if (r + 1 < rows) e.push_back({id(r, c), id(r + 1, c), w});
    }
  return WeightedGraph(rows * cols, std::move(e));
}

WeightedGraph make_random_connected(int n, int extra_edges, double wmin,
                                    double wmax, Rng& rng) {
  if (n < 1) throw ParamError("graph needs at least one node");
  if (!(wmin > 0.0) || wmax < wmin) throw ParamError("bad weight range");
  std::set<std::pair<int, int>> used;
  std::vector<Edge> edges;
  // random spanning tree: attach each node to a uniformly chosen predecessor
  for (int v = 1; v < n; ++v) {
    int u = rng.uniform_int(0, v - 1);
    used.insert({u, v});
    edges.push_back({u, v, rng.uniform(wmin, wmax)});
  }
  int attempts = 0;
  int added = 0;
  while (added < extra_edges && attempts < 50 * (extra_edges + 1)) {
    ++attempts;
    if (n < 2) break;
    int u = rng.uniform_int(0, n - 1);
    int v = rng.uniform_int(0, n - 1);
    if (u == v) continue;
    if (u > v) std::swap(u, v);
    if (!used.insert({u, v}).second) continue;
    edges.push_back({u, v, rng.uniform(wmin, wmax)});
    ++added;
  }
  return WeightedGraph(n, std::move(edges));
}

}  // namespace sddm
