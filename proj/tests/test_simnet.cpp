#include "doctest.h"

#include <memory>
#include <vector>

#include "sddm/simnet.hpp"

using namespace sddm;

namespace {

using Factory = std::function<std::unique_ptr<NodeProgram>(int)>;

// sends one value to every direct neighbor, then stops
struct Echo : NodeProgram {
  int got = 0;
  bool start(NodeContext& ctx) override {
    for (int v : ctx.topology().adjacent(ctx.self()))
      ctx.send(v, 7, ctx.self(), 1.0);
    return true;
  }
  bool round(NodeContext&, std::span<const Delivery> inbox) override {
    got += static_cast<int>(inbox.size());
    return false;
  }
};

// forwards a token from node 0 upward along node ids, one hop per round
struct Flood : NodeProgram {
  bool heard = false;
  std::int64_t heard_round = -1;
  bool start(NodeContext& ctx) override {
    if (ctx.self() == 0) {
      heard = true;
      heard_round = 0;
      for (int v : ctx.topology().adjacent(0))
        if (v > 0) ctx.send(v, 1, 0, 1.0);
    }
    return false;
  }
  bool round(NodeContext& ctx, std::span<const Delivery> inbox) override {
    if (!inbox.empty() && !heard) {
      heard = true;
      heard_round = ctx.round();
      for (int v : ctx.topology().adjacent(ctx.self()))
        if (v > ctx.self()) ctx.send(v, 1, ctx.self(), 1.0);
    }
    return false;
  }
};

}  // namespace

TEST_CASE("topology neighborhoods and size figures") {
  Topology p(make_path(4), 2);
  CHECK(p.neighborhood(0) == std::vector<int>{0, 1, 2});
  CHECK(p.neighborhood(1) == std::vector<int>{0, 1, 2, 3});
  CHECK(p.adjacent(1) == std::vector<int>{0, 2});
  CHECK(p.diameter() == 3);
  CHECK(p.radius() == 2);
  CHECK(p.hop_distance(0, 3) == 3);
  CHECK_FALSE(p.within_radius(0, 3));
  CHECK(p.within_radius(0, 2));

  WeightedGraph k4(4, {{0, 1, 1}, {0, 2, 1}, {0, 3, 1},
                       {1, 2, 1}, {1, 3, 1}, {2, 3, 1}});
  Topology tk(k4, 1);
  CHECK(tk.alpha() == 4);
  CHECK(tk.diameter() == 1);
  for (int v = 0; v < 4; ++v)
    CHECK(tk.neighborhood(v).size() == 4);

  // star: the center reaches everyone in one hop
  WeightedGraph star(4, {{3, 0, 1}, {3, 1, 1}, {3, 2, 1}});
  Topology ts(star, 1);
  CHECK(ts.neighborhood(3) == std::vector<int>{0, 1, 2, 3});
  CHECK(ts.neighborhood(0) == std::vector<int>{0, 3});

  CHECK_THROWS_AS(Topology(make_path(3), 0), ParamError);
}

TEST_CASE("neighborhood growth respects the degree bound") {
  // |N_R(v)| <= min(n, (dmax^{R+1} - 1)/(dmax - 1))
  Topology c(make_cycle(8), 2);
  CHECK(c.alpha() == 5);
  CHECK(c.alpha() <= 7);

  WeightedGraph k4(4, {{0, 1, 1}, {0, 2, 1}, {0, 3, 1},
                       {1, 2, 1}, {1, 3, 1}, {2, 3, 1}});
  CHECK(Topology(k4, 1).alpha() == 4);
}

TEST_CASE("disconnected topologies have unreachable pairs") {
  WeightedGraph g(4, {{0, 1, 1}, {2, 3, 1}});
  Topology t = Topology::full(g);
  CHECK(t.hop_distance(0, 2) == -1);
  CHECK(t.hop_distance(0, 1) == 1);
  CHECK(t.neighborhood(0) == std::vector<int>{0, 1});
  CHECK(t.diameter() == 1);
}

TEST_CASE("echo on a triangle: one round, six messages") {
  WeightedGraph tri(3, {{0, 1, 1}, {1, 2, 1}, {0, 2, 1}});
  auto run = run_protocol(Topology(tri, 1),
                          [](int) { return std::make_unique<Echo>(); });
  CHECK(run.ledger.rounds == 1);
  CHECK(run.ledger.messages == 6);
  CHECK(run.ledger.scalars_sent == 6);
  CHECK(run.ledger.max_hops_seen == 1);
  for (auto& node : run.nodes)
    CHECK(static_cast<Echo*>(node.get())->got == 2);
}

TEST_CASE("a fully passive protocol costs nothing") {
  struct Idle : NodeProgram {
    bool start(NodeContext&) override { return false; }
    bool round(NodeContext&, std::span<const Delivery>) override { return false; }
  };
  auto run = run_protocol(Topology(make_path(3), 1),
                          [](int) { return std::make_unique<Idle>(); });
  CHECK(run.ledger.rounds == 0);
  CHECK(run.ledger.messages == 0);
  CHECK(run.ledger.node_ops_total() == 0);
}

TEST_CASE("token needs one round per hop") {
  auto run = run_protocol(Topology(make_path(4), 1),
                          [](int) { return std::make_unique<Flood>(); });
  CHECK(run.ledger.rounds == 3);
  for (int k = 0; k < 4; ++k) {
    auto* node = static_cast<Flood*>(run.nodes[k].get());
    CHECK(node->heard);
    CHECK(node->heard_round == k);
  }
}

TEST_CASE("messages sent in round t are read in round t+1") {
  struct Relay : NodeProgram {
    std::vector<std::int64_t> seen;
    bool start(NodeContext& ctx) override {
      if (ctx.self() == 0) ctx.send(1, 1, 0, 42.0);
      return ctx.self() == 0;
    }
    bool round(NodeContext& ctx, std::span<const Delivery> inbox) override {
      for (const auto& d : inbox) {
        seen.push_back(ctx.round());
        if (ctx.self() == 1 && d.items[0].tag == 1) ctx.send(0, 2, 1, 42.0);
      }
      return false;
    }
  };
  auto run = run_protocol(Topology(make_path(2), 1),
                          [](int) { return std::make_unique<Relay>(); });
  CHECK(static_cast<Relay*>(run.nodes[1].get())->seen ==
        std::vector<std::int64_t>{1});
  CHECK(static_cast<Relay*>(run.nodes[0].get())->seen ==
        std::vector<std::int64_t>{2});
  CHECK(run.ledger.rounds == 2);
}

TEST_CASE("inbox is ordered by ascending source") {
  struct Spoke : NodeProgram {
    std::vector<int> sources;
    bool start(NodeContext& ctx) override {
      if (ctx.self() != 3) ctx.send(3, 1, ctx.self(), 0.5);
      return false;
    }
    bool round(NodeContext&, std::span<const Delivery> inbox) override {
      for (const auto& d : inbox) sources.push_back(d.src);
      return false;
    }
  };
  WeightedGraph star(4, {{3, 0, 1}, {3, 1, 1}, {3, 2, 1}});
  auto run = run_protocol(Topology(star, 1),
                          [](int) { return std::make_unique<Spoke>(); });
  CHECK(static_cast<Spoke*>(run.nodes[3].get())->sources ==
        std::vector<int>{0, 1, 2});
}

TEST_CASE("multi-item payloads arrive intact and empty builders are dropped") {
  struct Packed : NodeProgram {
    std::vector<PayloadItem> got;
    bool start(NodeContext& ctx) override {
      if (ctx.self() == 0) {
        auto msg = ctx.message(1);
        msg.add(1, 10, 0.25).add(2, 20, -0.5);
      }
      { auto empty = ctx.message(1); }  // no items: no message
      return false;
    }
    bool round(NodeContext&, std::span<const Delivery> inbox) override {
      for (const auto& d : inbox)
        got.insert(got.end(), d.items.begin(), d.items.end());
      return false;
    }
  };
  auto run = run_protocol(Topology(make_path(2), 1),
                          [](int) { return std::make_unique<Packed>(); });
  CHECK(run.ledger.messages == 1);
  CHECK(run.ledger.scalars_sent == 2);
  auto* p = static_cast<Packed*>(run.nodes[1].get());
  REQUIRE(p->got.size() == 2);
  CHECK(p->got[0].tag == 1);
  CHECK(p->got[0].index == 10);
  CHECK(p->got[0].value == 0.25);
  CHECK(p->got[1].tag == 2);
  CHECK(p->got[1].value == -0.5);
}

TEST_CASE("node op charges land on the right node") {
  struct Charger : NodeProgram {
    bool start(NodeContext& ctx) override {
      ctx.charge(10 * (ctx.self() + 1));
      return false;
    }
    bool round(NodeContext&, std::span<const Delivery>) override { return false; }
  };
  auto run = run_protocol(Topology(make_path(3), 1),
                          [](int) { return std::make_unique<Charger>(); });
  CHECK(run.ledger.node_ops == std::vector<std::int64_t>{10, 20, 30});
  CHECK(run.ledger.node_ops_max() == 30);
  CHECK(run.ledger.node_ops_total() == 60);
}

TEST_CASE("sending beyond the radius faults the run") {
  struct TooFar : NodeProgram {
    bool start(NodeContext& ctx) override {
      if (ctx.self() == 0) ctx.send(2, 1, 0, 1.0);
      return false;
    }
    bool round(NodeContext&, std::span<const Delivery>) override { return false; }
  };
  Topology t(make_path(4), 1);
  try {
    run_protocol(t, [](int) { return std::make_unique<TooFar>(); });
    FAIL("expected a locality fault");
  } catch (const SimFault& f) {
    CHECK(f.src == 0);
    CHECK(f.dst == 2);
    CHECK(f.round == 0);
    CHECK(std::string(f.what()).find("beyond communication radius") !=
          std::string::npos);
  }
}

TEST_CASE("the round cap stops runaway protocols") {
  struct Spinner : NodeProgram {
    bool start(NodeContext&) override { return true; }
    bool round(NodeContext&, std::span<const Delivery>) override { return true; }
  };
  SimOptions opts;
  opts.round_cap = 5;
  CHECK_THROWS_AS(run_protocol(Topology(make_path(2), 1),
                               [](int) { return std::make_unique<Spinner>(); },
                               opts),
                  SimFault);
}

TEST_CASE("identical runs produce identical ledgers") {
  WeightedGraph tri(3, {{0, 1, 1}, {1, 2, 1}, {0, 2, 1}});
  auto a = run_protocol(Topology(tri, 1),
                        [](int) { return std::make_unique<Echo>(); });
  auto b = run_protocol(Topology(tri, 1),
                        [](int) { return std::make_unique<Echo>(); });
  CHECK(a.ledger.rounds == b.ledger.rounds);
  CHECK(a.ledger.messages == b.ledger.messages);
  CHECK(a.ledger.scalars_sent == b.ledger.scalars_sent);
  CHECK(a.ledger.node_ops == b.ledger.node_ops);
  CHECK(a.ledger.max_hops_seen == b.ledger.max_hops_seen);
}
