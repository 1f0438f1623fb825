#pragma once

#include <utility>
#include <vector>

#include "sddm/chain.hpp"
#include "sddm/core.hpp"
#include "sddm/row.hpp"
#include "sddm/simnet.hpp"

namespace sddm {

// Node-local solvers for M0 x = b0 on the round simulator. Each node k
// starts knowing only row k of the system (its diagonal entry, its row of
// the off-diagonal part, b0(k)) plus the shared scalar configuration; all
// other data moves through messages.
//
// Two protocol families:
//  - "full": nodes exchange rows with their whole connected component and
//    square them level by level (usable when the network lets any pair
//    talk directly).
//  - "rhop": messages never travel beyond hop radius R = 2^r. Each node
//    first derives its rows of (A D^-1)^R and (D^-1 A)^R from one
//    neighborhood exchange, then walks the level schedule by applying
//    either single-hop factors or those R-step rows, one application per
//    round.

struct DistOptions {
  SimOptions sim;
  // collect per-node operator rows for inspection (tests)
  bool probe = false;
};

// Rows captured from one node when probing.
struct NodeRows {
  // (exponent, row of (A D^-1)^exponent); ascending exponent
  std::vector<std::pair<int, SparseRow>> ad_rows;
  // (exponent, row of (D^-1 A)^exponent)
  std::vector<std::pair<int, SparseRow>> da_rows;
};

struct DistResult {
  Vector x;
  CostLedger ledger;
  int iterations = 0;  // refinement passes run (0 for the one-shot solve)
  std::vector<NodeRows> probe;  // one entry per node when requested
};

// One-shot approximate solve (the preconditioner applied to b0).
DistResult crude_solve_full(const Topology& topo, const InverseChain& chain,
                            const VectorRef& b0, const DistOptions& opts = {});

// Iterative solve to relative error eps in the energy norm.
DistResult solve_full(const Topology& topo, const InverseChain& chain,
                      const VectorRef& b0, double eps,
                      const DistOptions& opts = {});

// R must be a power of two, at most 2^(d-1), and equal to topo.radius().
DistResult crude_solve_rhop(const Topology& topo, const InverseChain& chain,
                            const VectorRef& b0, int R,
                            const DistOptions& opts = {});

DistResult solve_rhop(const Topology& topo, const InverseChain& chain,
                      const VectorRef& b0, int R, double eps,
                      const DistOptions& opts = {});

// Standalone run of the neighborhood power computation: every node's rows
// of (A D^-1)^R and (D^-1 A)^R after a single exchange round.
struct HopRows {
  std::vector<SparseRow> c0;  // per node, row of (A D^-1)^R
  std::vector<SparseRow> c1;  // per node, row of (D^-1 A)^R
  CostLedger ledger;
};

HopRows hop_power_rows(const Topology& topo, const Splitting& s, int R,
                       const DistOptions& opts = {});

// Communication graph induced by the off-diagonal pattern: one edge per
// nonzero A entry, weighted by it.
WeightedGraph graph_from_splitting(const Splitting& s);

}  // namespace sddm
