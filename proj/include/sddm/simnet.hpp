#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <memory>
#include <span>
#include <vector>

#include "sddm/graph.hpp"

namespace sddm {

// Static view of the communication graph: hop distances, the radius-R
// neighborhoods every node is allowed to talk to, and the derived size
// figures used in cost accounting.
class Topology {
 public:
  Topology(const WeightedGraph& g, int radius);

  // Radius covering everything reachable: neighborhoods become components.
  static Topology full(const WeightedGraph& g) {
    return Topology(g, std::max(1, g.size()));
  }

  int size() const { return n_; }
  int radius() const { return radius_; }
  int max_degree() const { return max_degree_; }
  // largest neighborhood size, including the node itself
  int alpha() const { return alpha_; }
  // largest finite hop distance (max over components)
  int diameter() const { return diameter_; }

  // N_radius(k), sorted, including k itself
  const std::vector<int>& neighborhood(int k) const { return hood_[k]; }
  // N_1(k) without k
  const std::vector<int>& adjacent(int k) const { return adj_[k]; }

  // -1 when unreachable
  int hop_distance(int a, int b) const { return dist_[a][b]; }
  bool within_radius(int a, int b) const {
    int h = dist_[a][b];
    return h >= 0 && h <= radius_;
  }

 private:
  int n_ = 0;
  int radius_ = 1;
  int max_degree_ = 0;
  int alpha_ = 1;
  int diameter_ = 0;
  std::vector<std::vector<int>> hood_;
  std::vector<std::vector<int>> adj_;
  std::vector<std::vector<int>> dist_;
};

struct PayloadItem {
  std::int32_t tag = 0;
  std::int32_t index = 0;
  double value = 0.0;
};

struct Delivery {
  int src = 0;
  std::span<const PayloadItem> items;
};

struct CostLedger {
  std::int64_t rounds = 0;
  std::int64_t messages = 0;
  std::int64_t scalars_sent = 0;
  std::vector<std::int64_t> node_ops;
  int max_hops_seen = 0;
  double wall_seconds = 0.0;

  std::int64_t node_ops_max() const;
  std::int64_t node_ops_total() const;
};

// Raised when a node addresses a message beyond its neighborhood, or the
// round cap trips.
class SimFault : public Error {
 public:
  SimFault(const std::string& what, int src, int dst, std::int64_t round)
      : Error(what), src(src), dst(dst), round(round) {}
  int src;
  int dst;
  std::int64_t round;
};

class Simulator;
class NodeProgram;
struct SimOptions;
struct ProtocolRun;

// Per-node handle the simulator passes into a program. Sends are addressed to
// single nodes and must stay within the topology radius; violations fault the
// whole run.
class NodeContext {
 public:
  int self() const { return self_; }
  std::int64_t round() const;
  const Topology& topology() const;

  void charge(std::int64_t ops);
  void send(int dst, std::int32_t tag, std::int32_t index, double value);

  class MessageBuilder {
   public:
    MessageBuilder(const MessageBuilder&) = delete;
    MessageBuilder& operator=(const MessageBuilder&) = delete;
    ~MessageBuilder();
    MessageBuilder& add(std::int32_t tag, std::int32_t index, double value);

   private:
    friend class NodeContext;
    MessageBuilder(Simulator* sim, int src, int dst);
    Simulator* sim_;
    int src_;
    int dst_;
    std::size_t start_;
  };

  // Multi-item message; committed when the builder goes out of scope.
  // Messages with no items are dropped.
  MessageBuilder message(int dst);

 private:
  friend class Simulator;
  friend ProtocolRun run_protocol(
      const Topology&, const std::function<std::unique_ptr<NodeProgram>(int)>&,
      const SimOptions&);
  NodeContext(Simulator* sim, int self) : sim_(sim), self_(self) {}
  Simulator* sim_;
  int self_;
};

// A node-local program. start() runs before any delivery (round 0) and may
// send; round() runs once per round with the messages delivered that round.
// Both return whether the node still wants rounds. The run ends when every
// node is passive and no messages are in flight.
class NodeProgram {
 public:
  virtual ~NodeProgram() = default;
  virtual bool start(NodeContext& ctx) = 0;
  virtual bool round(NodeContext& ctx, std::span<const Delivery> inbox) = 0;
};

struct SimOptions {
  std::int64_t round_cap = 20'000'000;
  std::ostream* trace = nullptr;  // one line per delivered message
};

struct ProtocolRun {
  std::vector<std::unique_ptr<NodeProgram>> nodes;
  CostLedger ledger;
};

ProtocolRun run_protocol(
    const Topology& topo,
    const std::function<std::unique_ptr<NodeProgram>(int)>& factory,
    const SimOptions& options = {});

}  // namespace sddm
