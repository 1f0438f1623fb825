#include "sddm/simnet.hpp"

#include <algorithm>
#include <chrono>
#include <numeric>
#include <ostream>
#include <queue>

namespace sddm {

Topology::Topology(const WeightedGraph& g, int radius)
    : n_(g.size()), radius_(radius) {
  if (radius < 1) throw ParamError("topology radius must be at least 1");
  max_degree_ = g.max_degree();
  dist_.assign(n_, std::vector<int>(n_, -1));
  hood_.assign(n_, {});
  adj_.assign(n_, {});
  std::vector<int> queue;
  for (int s = 0; s < n_; ++s) {
    auto& d = dist_[s];
    d[s] = 0;
    queue.clear();
    queue.push_back(s);
    for (std::size_t head = 0; head < queue.size(); ++head) {
      int u = queue[head];
      for (const auto& [v, w] : g.adjacency()[u]) {
        (void)w;
        if (d[v] < 0) {
          d[v] = d[u] + 1;
          queue.push_back(v);
        }
      }
    }
    for (int v = 0; v < n_; ++v) {
      if (d[v] >= 0) diameter_ = std::max(diameter_, d[v]);
      if (d[v] >= 0 && d[v] <= radius_) hood_[s].push_back(v);
      if (v != s && d[v] == 1) adj_[s].push_back(v);
    }
    alpha_ = std::max(alpha_, static_cast<int>(hood_[s].size()));
  }
}

std::int64_t CostLedger::node_ops_max() const {
  std::int64_t m = 0;
  for (auto v : node_ops) m = std::max(m, v);
  return m;
}

std::int64_t CostLedger::node_ops_total() const {
  return std::accumulate(node_ops.begin(), node_ops.end(), std::int64_t{0});
}

namespace {

struct MsgRec {
  int src;
  int dst;
  std::uint32_t off;
  std::uint32_t len;
};

}  // namespace

class Simulator {
 public:
  Simulator(const Topology& topo, const SimOptions& opts)
      : topo_(topo), opts_(opts) {
    ledger_.node_ops.assign(topo.size(), 0);
  }

  const Topology& topo_;
  SimOptions opts_;
  CostLedger ledger_;
  std::int64_t round_ = 0;

  std::vector<PayloadItem> arena_out_;
  std::vector<MsgRec> msgs_out_;
  std::vector<PayloadItem> arena_in_;
  std::vector<MsgRec> msgs_in_;

  // Route checks happen here, before any payload is buffered, so that the
  // builder's destructor (which commits) never has to throw.
  void validate_route(int src, int dst) {
    if (dst < 0 || dst >= topo_.size())
      throw SimFault("send to unknown node", src, dst, round_);
    if (!topo_.within_radius(src, dst)) {
      throw SimFault("send beyond communication radius: " +
                         std::to_string(src) + " -> " + std::to_string(dst) +
                         " in round " + std::to_string(round_),
                     src, dst, round_);
    }
  }

  void commit(int src, int dst, std::size_t start) {
    std::size_t len = arena_out_.size() - start;
    if (len == 0) return;
    ledger_.max_hops_seen =
        std::max(ledger_.max_hops_seen, topo_.hop_distance(src, dst));
    msgs_out_.push_back({src, dst, static_cast<std::uint32_t>(start),
                         static_cast<std::uint32_t>(len)});
    ledger_.messages += 1;
    ledger_.scalars_sent += static_cast<std::int64_t>(len);
  }

  // Stable counting sort of the outbox by destination; send order was by
  // ascending source already, so each inbox arrives sorted by source.
  void route(std::vector<std::vector<Delivery>>& inboxes) {
    const int n = topo_.size();
    std::swap(arena_in_, arena_out_);
    std::swap(msgs_in_, msgs_out_);
    arena_out_.clear();
    msgs_out_.clear();
    for (auto& box : inboxes) box.clear();
    for (const auto& m : msgs_in_) {
      inboxes[m.dst].push_back(
          {m.src, std::span<const PayloadItem>(arena_in_.data() + m.off, m.len)});
      if (opts_.trace) {
        *opts_.trace << round_ << " " << m.src << " " << m.dst << " " << m.len
                     << "\n";
      }
    }
    (void)n;
  }
};

NodeContext::MessageBuilder::MessageBuilder(Simulator* sim, int src, int dst)
    : sim_(sim), src_(src), dst_(dst), start_(sim->arena_out_.size()) {
  sim_->validate_route(src, dst);
}

NodeContext::MessageBuilder::~MessageBuilder() {
  sim_->commit(src_, dst_, start_);
}

NodeContext::MessageBuilder& NodeContext::MessageBuilder::add(
    std::int32_t tag, std::int32_t index, double value) {
  sim_->arena_out_.push_back({tag, index, value});
  return *this;
}

std::int64_t NodeContext::round() const { return sim_->round_; }

const Topology& NodeContext::topology() const { return sim_->topo_; }

void NodeContext::charge(std::int64_t ops) {
  sim_->ledger_.node_ops[self_] += ops;
}

void NodeContext::send(int dst, std::int32_t tag, std::int32_t index,
                       double value) {
  MessageBuilder b(sim_, self_, dst);
  b.add(tag, index, value);
}

NodeContext::MessageBuilder NodeContext::message(int dst) {
  return MessageBuilder(sim_, self_, dst);
}

ProtocolRun run_protocol(
    const Topology& topo,
    const std::function<std::unique_ptr<NodeProgram>(int)>& factory,
    const SimOptions& options) {
  auto t0 = std::chrono::steady_clock::now();
  const int n = topo.size();
  Simulator sim(topo, options);
  ProtocolRun out;
  out.nodes.reserve(n);
  for (int k = 0; k < n; ++k) out.nodes.push_back(factory(k));

  std::vector<char> active(n, 0);
  bool any_active = false;
  for (int k = 0; k < n; ++k) {
    NodeContext ctx(&sim, k);
    active[k] = out.nodes[k]->start(ctx) ? 1 : 0;
    any_active = any_active || active[k];
  }

  std::vector<std::vector<Delivery>> inboxes(n);
  while (any_active || !sim.msgs_out_.empty()) {
    sim.round_ += 1;
    sim.ledger_.rounds += 1;
    if (sim.ledger_.rounds > options.round_cap)
      throw SimFault("round cap exceeded", -1, -1, sim.round_);
    sim.route(inboxes);
    any_active = false;
    for (int k = 0; k < n; ++k) {
      NodeContext ctx(&sim, k);
      active[k] = out.nodes[k]->round(
          ctx, std::span<const Delivery>(inboxes[k].data(), inboxes[k].size()))
                      ? 1
                      : 0;
      any_active = any_active || active[k];
    }
  }
  sim.ledger_.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
          .count();
  out.ledger = std::move(sim.ledger_);
  return out;
}

}  // namespace sddm
