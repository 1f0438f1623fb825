#include "sddm/dist.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <utility>
#include <vector>

#include "sddm/reference.hpp"

namespace sddm {
namespace {

constexpr std::int32_t kTagDiag = 1;
constexpr std::int32_t kTagVec = 2;
constexpr std::int32_t kTagRow = 3;
constexpr std::int32_t kTagARow = 4;

// The slice of the system a node starts with: its own row and b0 entry.
struct NodeSeed {
  int k = 0;
  double dkk = 0.0;
  std::vector<std::pair<int, double>> arow;  // (j, A_kj), j != k, ascending
  double b0 = 0.0;
};

std::vector<NodeSeed> make_seeds(const Splitting& s, const VectorRef& b0) {
  const int n = s.size();
  std::vector<NodeSeed> seeds(static_cast<std::size_t>(n));
  for (int k = 0; k < n; ++k) {
    NodeSeed& sd = seeds[static_cast<std::size_t>(k)];
    sd.k = k;
    sd.dkk = s.D(k);
    sd.b0 = b0(k);
    for (int j = 0; j < n; ++j) {
      if (j != k && s.A(k, j) != 0.0) sd.arow.emplace_back(j, s.A(k, j));
    }
  }
  return seeds;
}

struct SharedCfg {
  int n = 0;
  int d = 1;
  int q = 0;  // refinement iterations after the first pass; 0 = one-shot
};

// ---------------------------------------------------------------------------
// Full-exchange protocol. Every node broadcasts to its connected component;
// operator rows double once per round.
//
// Round schedule (first pass): rounds 1..d build the forward sequence and
// the rows of (A D^-1)^(2^i), rounds d+1..2d-1 build the rows of
// (D^-1 A)^(2^i), rounds 2d..3d-1 descend back to x. Each refinement
// iteration then costs 2d+1 rounds and moves only vector entries, reusing
// the cached rows.
// ---------------------------------------------------------------------------
class FullNode final : public NodeProgram {
 public:
  FullNode(const SharedCfg& cfg, NodeSeed seed)
      : cfg_(cfg), seed_(std::move(seed)) {}

  bool start(NodeContext& ctx) override {
    const int n = cfg_.n;
    diag_.assign(static_cast<std::size_t>(n), 0.0);
    slot_.assign(static_cast<std::size_t>(n), 0.0);
    blev_.assign(static_cast<std::size_t>(cfg_.d) + 1, 0.0);
    vlev_.assign(static_cast<std::size_t>(cfg_.d) + 1, 0.0);
    prow_.resize(static_cast<std::size_t>(cfg_.d));
    qrow_.resize(static_cast<std::size_t>(cfg_.d));
    diag_[static_cast<std::size_t>(seed_.k)] = seed_.dkk;
    for (int j : ctx.topology().neighborhood(seed_.k)) {
      if (j != seed_.k) peers_.push_back(j);
    }
    blev_[0] = seed_.b0;
    for (int j : peers_) {
      auto msg = ctx.message(j);
      msg.add(kTagDiag, seed_.k, seed_.dkk);
      msg.add(kTagVec, seed_.k, seed_.b0);
    }
    return true;
  }

  bool round(NodeContext& ctx, std::span<const Delivery> inbox) override {
    switch (phase_) {
      case Phase::kForward:
        return forward_round(ctx, inbox);
      case Phase::kRowsBack:
        return rows_back_round(ctx, inbox);
      case Phase::kDescent:
        return descent_round(ctx, inbox);
      case Phase::kResidual:
        return residual_round(ctx, inbox);
      case Phase::kIterForward:
        return iter_forward_round(ctx, inbox);
      case Phase::kDone:
        return false;
    }
    return false;
  }

  double solution() const { return x_final_; }

  NodeRows probe_rows() const {
    NodeRows out;
    for (int i = 0; i < cfg_.d; ++i) {
      out.ad_rows.emplace_back(1 << i, prow_[static_cast<std::size_t>(i)]);
      out.da_rows.emplace_back(1 << i, qrow_[static_cast<std::size_t>(i)]);
    }
    return out;
  }

 private:
  enum class Phase { kForward, kRowsBack, kDescent, kResidual, kIterForward, kDone };

  std::size_t idx(int j) const { return static_cast<std::size_t>(j); }

  // sum over the support intersection of my cached row and an incoming one;
  // ratio scales one factor by diag(r)/diag(other) or its inverse
  double pair_sum(NodeContext& ctx, std::span<const PayloadItem> items,
                  bool p_kind, int src) {
    double acc = 0.0;
    std::size_t mi = 0;
    std::int64_t terms = 0;
    for (const PayloadItem& it : items) {
      if (it.tag == kTagVec) {
        slot_[idx(it.index)] = it.value;
        continue;
      }
      if (it.tag != kTagRow) continue;
      while (mi < myrow_.size() && myrow_[mi].first < it.index) ++mi;
      if (mi < myrow_.size() && myrow_[mi].first == it.index) {
        const double ratio = p_kind
                                 ? diag_[idx(it.index)] / diag_[idx(src)]
                                 : diag_[idx(src)] / diag_[idx(it.index)];
        acc += ratio * myrow_[mi].second * it.value;
        terms += 1;
      }
    }
    ctx.charge(2 * terms);
    return acc;
  }

  double self_pair_sum(NodeContext& ctx, bool p_kind) const {
    double acc = 0.0;
    std::int64_t terms = 0;
    for (const auto& [r, v] : myrow_) {
      const double ratio =
          p_kind ? diag_[idx(r)] / seed_.dkk : seed_.dkk / diag_[idx(r)];
      acc += ratio * v * v;
      terms += 1;
    }
    ctx.charge(2 * terms);
    return acc;
  }

  void cache_myrow(const SparseRow& row) {
    myrow_.clear();
    row.for_each([&](int j, double v) { myrow_.emplace_back(j, v); });
  }

  void send_row_and_value(NodeContext& ctx, const SparseRow& row, bool with_value,
                          double value) {
    for (int peer : peers_) {
      auto msg = ctx.message(peer);
      if (with_value) msg.add(kTagVec, seed_.k, value);
      row.for_each([&](int j, double v) { msg.add(kTagRow, j, v); });
    }
  }

  void send_value(NodeContext& ctx, double value) {
    for (int peer : peers_) ctx.send(peer, kTagVec, seed_.k, value);
  }

  // rounds 1..d: double the (A D^-1) row and push the forward sequence
  bool forward_round(NodeContext& ctx, std::span<const Delivery> inbox) {
    const int i = lvl_;  // forward index being produced
    if (i == 1) {
      // ingest the opening exchange, then derive the single-step rows
      for (const Delivery& del : inbox) {
        for (const PayloadItem& it : del.items) {
          if (it.tag == kTagDiag) diag_[idx(it.index)] = it.value;
          else if (it.tag == kTagVec) slot_[idx(it.index)] = it.value;
        }
      }
      std::vector<std::pair<int, double>> p1, q1;
      for (const auto& [j, a] : seed_.arow) {
        p1.emplace_back(j, a / diag_[idx(j)]);
        q1.emplace_back(j, a / seed_.dkk);
      }
      ctx.charge(2 * static_cast<std::int64_t>(seed_.arow.size()));
      prow_[0] = SparseRow(cfg_.n, std::move(p1));
      qrow_[0] = SparseRow(cfg_.n, std::move(q1));
    } else {
      std::vector<std::pair<int, double>> items;
      cache_myrow(prow_[idx(i - 2)]);
      for (const Delivery& del : inbox) {
        const double e = pair_sum(ctx, del.items, /*p_kind=*/true, del.src);
        if (e != 0.0) items.emplace_back(del.src, e);
      }
      const double es = self_pair_sum(ctx, /*p_kind=*/true);
      if (es != 0.0) items.emplace_back(seed_.k, es);
      std::sort(items.begin(), items.end());
      prow_[idx(i - 1)] = SparseRow(cfg_.n, std::move(items));
    }
    // forward step: b_i = b_{i-1} + (A D^-1)^(2^(i-1)) b_{i-1}
    slot_[idx(seed_.k)] = blev_[idx(i - 1)];
    double acc = 0.0;
    prow_[idx(i - 1)].for_each([&](int j, double v) { acc += v * slot_[idx(j)]; });
    ctx.charge(2 * prow_[idx(i - 1)].nnz() + 1);
    blev_[idx(i)] = blev_[idx(i - 1)] + acc;

    if (i < cfg_.d) {
      send_row_and_value(ctx, prow_[idx(i - 1)], true, blev_[idx(i)]);
      lvl_ = i + 1;
      return true;
    }
    // top of the chain
    x_own_ = blev_[idx(cfg_.d)] / seed_.dkk;
    ctx.charge(1);
    if (cfg_.d >= 2) {
      phase_ = Phase::kRowsBack;
      lvl_ = 1;
      send_row_and_value(ctx, qrow_[0], false, 0.0);
    } else {
      phase_ = Phase::kDescent;
      lvl_ = 0;
      send_value(ctx, x_own_);
    }
    return true;
  }

  // rounds d+1..2d-1: double the (D^-1 A) rows for the descent
  bool rows_back_round(NodeContext& ctx, std::span<const Delivery> inbox) {
    const int j = lvl_;  // producing qrow_[j]
    std::vector<std::pair<int, double>> items;
    cache_myrow(qrow_[idx(j - 1)]);
    for (const Delivery& del : inbox) {
      const double e = pair_sum(ctx, del.items, /*p_kind=*/false, del.src);
      if (e != 0.0) items.emplace_back(del.src, e);
    }
    const double es = self_pair_sum(ctx, /*p_kind=*/false);
    if (es != 0.0) items.emplace_back(seed_.k, es);
    std::sort(items.begin(), items.end());
    qrow_[idx(j)] = SparseRow(cfg_.n, std::move(items));

    if (j < cfg_.d - 1) {
      send_row_and_value(ctx, qrow_[idx(j)], false, 0.0);
      lvl_ = j + 1;
    } else {
      phase_ = Phase::kDescent;
      lvl_ = cfg_.d - 1;
      send_value(ctx, x_own_);
    }
    return true;
  }

  // rounds 2d..3d-1 (and the tail of each iteration): halve back down
  bool descent_round(NodeContext& ctx, std::span<const Delivery> inbox) {
    const int i = lvl_;
    for (const Delivery& del : inbox) {
      for (const PayloadItem& it : del.items) {
        if (it.tag == kTagVec) slot_[idx(it.index)] = it.value;
      }
    }
    slot_[idx(seed_.k)] = x_own_;
    double acc = 0.0;
    qrow_[idx(i)].for_each([&](int j, double v) { acc += v * slot_[idx(j)]; });
    ctx.charge(2 * qrow_[idx(i)].nnz() + 3);
    const double base = in_iteration_ ? vlev_[idx(i)] : blev_[idx(i)];
    x_own_ = 0.5 * (base / seed_.dkk + x_own_ + acc);

    if (i > 0) {
      send_value(ctx, x_own_);
      lvl_ = i - 1;
      return true;
    }
    return finish_pass(ctx);
  }

  bool finish_pass(NodeContext& ctx) {
    if (!in_iteration_) {
      if (cfg_.q == 0) {
        x_final_ = x_own_;
        phase_ = Phase::kDone;
        return false;
      }
      chi_ = x_own_;
      y_ = 0.0;
      iter_ = 1;
      in_iteration_ = true;
      phase_ = Phase::kResidual;
      send_value(ctx, y_);
      return true;
    }
    y_ = y_ - x_own_ + chi_;
    ctx.charge(2);
    if (iter_ >= cfg_.q) {
      x_final_ = y_;
      phase_ = Phase::kDone;
      return false;
    }
    iter_ += 1;
    phase_ = Phase::kResidual;
    send_value(ctx, y_);
    return true;
  }

  // iteration opener: u = M y from the exchanged y values
  bool residual_round(NodeContext& ctx, std::span<const Delivery> inbox) {
    for (const Delivery& del : inbox) {
      for (const PayloadItem& it : del.items) {
        if (it.tag == kTagVec) slot_[idx(it.index)] = it.value;
      }
    }
    double acc = 0.0;
    for (const auto& [j, a] : seed_.arow) acc += a * slot_[idx(j)];
    ctx.charge(2 * static_cast<std::int64_t>(seed_.arow.size()) + 2);
    vlev_[0] = seed_.dkk * y_ - acc;
    phase_ = Phase::kIterForward;
    lvl_ = 1;
    send_value(ctx, vlev_[0]);
    return true;
  }

  // iteration forward sweep over the cached rows
  bool iter_forward_round(NodeContext& ctx, std::span<const Delivery> inbox) {
    const int i = lvl_;
    for (const Delivery& del : inbox) {
      for (const PayloadItem& it : del.items) {
        if (it.tag == kTagVec) slot_[idx(it.index)] = it.value;
      }
    }
    slot_[idx(seed_.k)] = vlev_[idx(i - 1)];
    double acc = 0.0;
    prow_[idx(i - 1)].for_each([&](int j, double v) { acc += v * slot_[idx(j)]; });
    ctx.charge(2 * prow_[idx(i - 1)].nnz() + 1);
    vlev_[idx(i)] = vlev_[idx(i - 1)] + acc;

    if (i < cfg_.d) {
      send_value(ctx, vlev_[idx(i)]);
      lvl_ = i + 1;
      return true;
    }
    x_own_ = vlev_[idx(cfg_.d)] / seed_.dkk;
    ctx.charge(1);
    phase_ = Phase::kDescent;
    lvl_ = cfg_.d - 1;
    send_value(ctx, x_own_);
    if (cfg_.d == 1) {
      // descent starts (and ends) at index 0
      lvl_ = 0;
    }
    return true;
  }

  SharedCfg cfg_;
  NodeSeed seed_;

  Phase phase_ = Phase::kForward;
  int lvl_ = 1;
  bool in_iteration_ = false;
  int iter_ = 0;

  std::vector<int> peers_;
  std::vector<double> diag_;
  std::vector<double> slot_;
  std::vector<double> blev_;
  std::vector<double> vlev_;
  std::vector<SparseRow> prow_;  // rows of (A D^-1)^(2^i)
  std::vector<SparseRow> qrow_;  // rows of (D^-1 A)^(2^i)
  std::vector<std::pair<int, double>> myrow_;

  double x_own_ = 0.0;
  double chi_ = 0.0;
  double y_ = 0.0;
  double x_final_ = 0.0;
};

// ---------------------------------------------------------------------------
// Neighborhood power computation shared by the radius-limited protocol and
// hop_power_rows: from the diagonal entries, off-diagonal rows and hop
// structure of N_R(k), derive row k of (A D^-1)^R and (D^-1 A)^R by R-1
// local expansion passes.
// ---------------------------------------------------------------------------
struct CompOut {
  SparseRow c0, c1;
  std::vector<std::pair<int, SparseRow>> levels_ad, levels_da;
  std::int64_t ops = 0;
};

CompOut neighborhood_powers(
    int n, int k, int R, const std::vector<double>& diag,
    const std::vector<std::vector<std::pair<int, double>>>& arow_of,
    const std::vector<int>& hood, bool keep_levels) {
  CompOut out;
  std::vector<double> scratch(static_cast<std::size_t>(n), 0.0);
  const auto& arow_k = arow_of[static_cast<std::size_t>(k)];

  std::vector<std::pair<int, double>> first_ad, first_da;
  for (const auto& [j, a] : arow_k) {
    first_ad.emplace_back(j, a / diag[static_cast<std::size_t>(j)]);
    first_da.emplace_back(j, a / diag[static_cast<std::size_t>(k)]);
  }
  out.ops += 2 * static_cast<std::int64_t>(arow_k.size());
  SparseRow cur_ad(n, std::move(first_ad));
  SparseRow cur_da(n, std::move(first_da));
  if (keep_levels) {
    out.levels_ad.emplace_back(1, cur_ad);
    out.levels_da.emplace_back(1, cur_da);
  }

  // one expansion multiplies by one more single-hop factor; entries only
  // ever reach nodes within N_R(k), so every referenced row is on hand
  auto expand = [&](const SparseRow& cur, bool p_kind) {
    cur.for_each([&](int r, double vr) {
      const double dr = diag[static_cast<std::size_t>(r)];
      for (const auto& [j, a] : arow_of[static_cast<std::size_t>(r)]) {
        // next factor entry: (A D^-1)_{rj} = a/d_j, (D^-1 A)_{rj} = a/d_r
        const double factor =
            p_kind ? a / diag[static_cast<std::size_t>(j)] : a / dr;
        scratch[static_cast<std::size_t>(j)] += vr * factor;
        out.ops += 2;
      }
    });
    std::vector<std::pair<int, double>> items;
    for (int j : hood) {
      double& sj = scratch[static_cast<std::size_t>(j)];
      if (sj != 0.0) {
        items.emplace_back(j, sj);
        sj = 0.0;
      }
    }
    return SparseRow(n, std::move(items));
  };

  for (int l = 2; l <= R; ++l) {
    cur_ad = expand(cur_ad, true);
    cur_da = expand(cur_da, false);
    if (keep_levels) {
      out.levels_ad.emplace_back(l, cur_ad);
      out.levels_da.emplace_back(l, cur_da);
    }
  }
  out.c0 = std::move(cur_ad);
  out.c1 = std::move(cur_da);
  return out;
}

// ---------------------------------------------------------------------------
// Radius-limited protocol. One opening exchange ships (diagonal, b0, row)
// to N_R; each node then derives its R-step rows locally and the solve
// walks a fixed per-round schedule: level i of the forward part applies
// either the single-hop factor 2^(i-1) times (when 2^(i-1) < R) or the
// R-step row 2^(i-1)/R times, one application per round; the backward part
// mirrors it. Values for the next application are sent ahead to exactly
// the nodes whose operator rows reference them.
// ---------------------------------------------------------------------------
enum class OpKind { kHopAD, kHopDA, kC0, kC1 };

struct Step {
  int part = 2;  // 2 forward, 3 backward, 0 final combine, 1 residual exchange
  int level = 0;
  std::int64_t step_idx = 0;
  std::int64_t step_count = 1;
  OpKind op = OpKind::kHopAD;
  bool level_end = false;
};

// Generates the schedule one step at a time; the full list can be
// exponentially long in d, so it is never materialized.
class PlanCursor {
 public:
  PlanCursor(int d, int rho, int q) : d_(d), rho_(rho), q_(q) { set_forward(1); }

  bool done() const { return done_; }

  Step current() const {
    Step s;
    s.part = part_;
    s.level = level_;
    s.step_idx = idx_;
    s.step_count = count_;
    s.op = op_;
    s.level_end = (idx_ + 1 == count_);
    return s;
  }

  void advance() {
    if (part_ == 2 || part_ == 3) {
      if (++idx_ < count_) return;
    }
    switch (part_) {
      case 1:
        set_forward(1);
        return;
      case 2:
        if (level_ < d_) {
          set_forward(level_ + 1);
        } else if (d_ >= 2) {
          set_backward(d_ - 1);
        } else {
          set_final();
        }
        return;
      case 3:
        if (level_ > 1) {
          set_backward(level_ - 1);
        } else {
          set_final();
        }
        return;
      case 0:
        if (pass_ >= q_) {
          done_ = true;
        } else {
          pass_ += 1;
          part_ = 1;
          level_ = 0;
          idx_ = 0;
          count_ = 1;
        }
        return;
      default:
        done_ = true;
    }
  }

  int pass() const { return pass_; }

 private:
  void set_forward(int level) {
    part_ = 2;
    level_ = level;
    idx_ = 0;
    if (level - 1 < rho_) {
      op_ = OpKind::kHopAD;
      count_ = std::int64_t{1} << (level - 1);
    } else {
      op_ = OpKind::kC0;
      count_ = std::int64_t{1} << (level - 1 - rho_);
    }
  }

  void set_backward(int level) {
    part_ = 3;
    level_ = level;
    idx_ = 0;
    if (level < rho_) {
      op_ = OpKind::kHopDA;
      count_ = std::int64_t{1} << level;
    } else {
      op_ = OpKind::kC1;
      count_ = std::int64_t{1} << (level - rho_);
    }
  }

  void set_final() {
    part_ = 0;
    level_ = 0;
    idx_ = 0;
    count_ = 1;
    op_ = OpKind::kHopDA;
  }

  int d_;
  int rho_;
  int q_;
  int part_ = 2;
  int level_ = 1;
  std::int64_t idx_ = 0;
  std::int64_t count_ = 1;
  OpKind op_ = OpKind::kHopAD;
  int pass_ = 0;
  bool done_ = false;
};

class RhopNode final : public NodeProgram {
 public:
  RhopNode(const SharedCfg& cfg, NodeSeed seed, int R, int rho, bool probe)
      : cfg_(cfg),
        seed_(std::move(seed)),
        R_(R),
        rho_(rho),
        probe_(probe),
        cursor_(cfg.d, rho, cfg.q) {}

  bool start(NodeContext& ctx) override {
    const int n = cfg_.n;
    diag_.assign(static_cast<std::size_t>(n), 0.0);
    slot_.assign(static_cast<std::size_t>(n), 0.0);
    vlev_.assign(static_cast<std::size_t>(cfg_.d) + 1, 0.0);
    arow_of_.assign(static_cast<std::size_t>(n), {});
    diag_[static_cast<std::size_t>(seed_.k)] = seed_.dkk;
    arow_of_[static_cast<std::size_t>(seed_.k)] = seed_.arow;
    for (int j : ctx.topology().neighborhood(seed_.k)) {
      if (j == seed_.k) continue;
      auto msg = ctx.message(j);
      msg.add(kTagDiag, seed_.k, seed_.dkk);
      msg.add(kTagVec, seed_.k, seed_.b0);
      for (const auto& [c, a] : seed_.arow) msg.add(kTagARow, c, a);
    }
    return true;
  }

  bool round(NodeContext& ctx, std::span<const Delivery> inbox) override {
    if (done_) return false;
    if (!primed_) {
      ingest_opening(ctx, inbox);
      primed_ = true;
    } else {
      for (const Delivery& del : inbox) {
        for (const PayloadItem& it : del.items) {
          if (it.tag == kTagVec) slot_[idx(it.index)] = it.value;
        }
      }
    }
    return execute_step(ctx);
  }

  double solution() const { return x_final_; }

  const SparseRow& c0() const { return c0_; }
  const SparseRow& c1() const { return c1_; }
  std::int64_t comp_ops() const { return comp_ops_; }

  NodeRows probe_rows() const {
    NodeRows out;
    out.ad_rows = levels_ad_;
    out.da_rows = levels_da_;
    return out;
  }

 private:
  std::size_t idx(int j) const { return static_cast<std::size_t>(j); }

  void ingest_opening(NodeContext& ctx, std::span<const Delivery> inbox) {
    for (const Delivery& del : inbox) {
      auto& row = arow_of_[idx(del.src)];
      for (const PayloadItem& it : del.items) {
        switch (it.tag) {
          case kTagDiag: diag_[idx(it.index)] = it.value; break;
          case kTagVec: slot_[idx(it.index)] = it.value; break;
          case kTagARow: row.emplace_back(it.index, it.value); break;
          default: break;
        }
      }
    }
    CompOut comp = neighborhood_powers(cfg_.n, seed_.k, R_, diag_, arow_of_,
                                       ctx.topology().neighborhood(seed_.k),
                                       probe_);
    ctx.charge(comp.ops);
    comp_ops_ = comp.ops;
    c0_ = std::move(comp.c0);
    c1_ = std::move(comp.c1);
    levels_ad_ = std::move(comp.levels_ad);
    levels_da_ = std::move(comp.levels_da);
    std::vector<std::pair<int, double>> p1, q1;
    for (const auto& [j, a] : seed_.arow) {
      p1.emplace_back(j, a / diag_[idx(j)]);
      q1.emplace_back(j, a / seed_.dkk);
    }
    row1_ad_ = SparseRow(cfg_.n, std::move(p1));
    row1_da_ = SparseRow(cfg_.n, std::move(q1));
    vlev_[0] = seed_.b0;
    in_val_ = seed_.b0;
  }

  const SparseRow& op_row(OpKind op) const {
    switch (op) {
      case OpKind::kHopAD: return row1_ad_;
      case OpKind::kHopDA: return row1_da_;
      case OpKind::kC0: return c0_;
      case OpKind::kC1: return c1_;
    }
    return row1_ad_;
  }

  // everyone whose operator row for the coming step references my value;
  // by the weighted symmetry of these rows that is exactly my row's support
  void send_ahead(NodeContext& ctx, double value) {
    if (cursor_.done()) return;
    const Step ns = cursor_.current();
    if (ns.part == 1) {
      for (const auto& [j, a] : seed_.arow) {
        (void)a;
        ctx.send(j, kTagVec, seed_.k, value);
      }
      return;
    }
    op_row(ns.op).for_each([&](int j, double v) {
      (void)v;
      if (j != seed_.k) ctx.send(j, kTagVec, seed_.k, value);
    });
  }

  bool execute_step(NodeContext& ctx) {
    const Step s = cursor_.current();
    double out = 0.0;

    if (s.part == 1) {
      // u = M y from the freshly exchanged y values
      double acc = 0.0;
      for (const auto& [j, a] : seed_.arow) acc += a * slot_[idx(j)];
      ctx.charge(2 * static_cast<std::int64_t>(seed_.arow.size()) + 2);
      vlev_[0] = seed_.dkk * y_ - acc;
      out = vlev_[0];
    } else {
      if (s.step_idx == 0) level_base_ = in_val_;
      slot_[idx(seed_.k)] = in_val_;
      const SparseRow& row = op_row(s.op);
      double acc = 0.0;
      row.for_each([&](int j, double v) { acc += v * slot_[idx(j)]; });
      ctx.charge(2 * row.nnz());

      if (s.part == 2) {
        if (!s.level_end) {
          out = acc;
        } else {
          const double ui = level_base_ + acc;
          vlev_[idx(s.level)] = ui;
          ctx.charge(1);
          if (s.level == cfg_.d) {
            out = ui / seed_.dkk;  // top of the chain
            ctx.charge(1);
          } else {
            out = ui;
          }
        }
      } else if (s.part == 3) {
        if (!s.level_end) {
          out = acc;
        } else {
          out = 0.5 * (vlev_[idx(s.level)] / seed_.dkk + level_base_ + acc);
          ctx.charge(3);
        }
      } else {  // part 0: final combine
        const double x0 = 0.5 * (vlev_[0] / seed_.dkk + level_base_ + acc);
        ctx.charge(3);
        if (cursor_.pass() == 0) {
          if (cfg_.q == 0) {
            x_final_ = x0;
            done_ = true;
            return false;
          }
          chi_ = x0;
          y_ = 0.0;
          out = y_;
        } else {
          y_ = y_ - x0 + chi_;
          ctx.charge(2);
          if (cursor_.pass() >= cfg_.q) {
            x_final_ = y_;
            done_ = true;
            return false;
          }
          out = y_;
        }
      }
    }

    in_val_ = out;
    cursor_.advance();
    if (cursor_.done()) {
      // the schedule only ends on a final combine, handled above
      done_ = true;
      return false;
    }
    send_ahead(ctx, out);
    return true;
  }

  SharedCfg cfg_;
  NodeSeed seed_;
  int R_;
  int rho_;
  bool probe_;
  PlanCursor cursor_;

  bool primed_ = false;
  bool done_ = false;

  std::vector<double> diag_;
  std::vector<double> slot_;
  std::vector<double> vlev_;
  std::vector<std::vector<std::pair<int, double>>> arow_of_;
  SparseRow row1_ad_, row1_da_, c0_, c1_;
  std::vector<std::pair<int, SparseRow>> levels_ad_, levels_da_;
  std::int64_t comp_ops_ = 0;

  double in_val_ = 0.0;
  double level_base_ = 0.0;
  double y_ = 0.0;
  double chi_ = 0.0;
  double x_final_ = 0.0;
};

// Standalone opening exchange + local power derivation.
class HopRowsNode final : public NodeProgram {
 public:
  HopRowsNode(int n, NodeSeed seed, int R) : n_(n), seed_(std::move(seed)), R_(R) {}

  bool start(NodeContext& ctx) override {
    diag_.assign(static_cast<std::size_t>(n_), 0.0);
    arow_of_.assign(static_cast<std::size_t>(n_), {});
    diag_[static_cast<std::size_t>(seed_.k)] = seed_.dkk;
    arow_of_[static_cast<std::size_t>(seed_.k)] = seed_.arow;
    for (int j : ctx.topology().neighborhood(seed_.k)) {
      if (j == seed_.k) continue;
      auto msg = ctx.message(j);
      msg.add(kTagDiag, seed_.k, seed_.dkk);
      for (const auto& [c, a] : seed_.arow) msg.add(kTagARow, c, a);
    }
    return true;
  }

  bool round(NodeContext& ctx, std::span<const Delivery> inbox) override {
    for (const Delivery& del : inbox) {
      auto& row = arow_of_[static_cast<std::size_t>(del.src)];
      for (const PayloadItem& it : del.items) {
        if (it.tag == kTagDiag) diag_[static_cast<std::size_t>(it.index)] = it.value;
        else if (it.tag == kTagARow) row.emplace_back(it.index, it.value);
      }
    }
    CompOut comp = neighborhood_powers(n_, seed_.k, R_, diag_, arow_of_,
                                       ctx.topology().neighborhood(seed_.k),
                                       false);
    ctx.charge(comp.ops);
    c0_ = std::move(comp.c0);
    c1_ = std::move(comp.c1);
    return false;
  }

  SparseRow c0_, c1_;

 private:
  int n_;
  NodeSeed seed_;
  int R_;
  std::vector<double> diag_;
  std::vector<std::vector<std::pair<int, double>>> arow_of_;
};

bool power_of_two(int v) { return v >= 1 && (v & (v - 1)) == 0; }

int log2_exact(int v) {
  int r = 0;
  while ((1 << r) < v) ++r;
  return r;
}

void check_common(const Topology& topo, const InverseChain& chain,
                  const VectorRef& b0) {
  if (topo.size() != chain.base.size()) {
    throw ParamError("topology and system sizes differ");
  }
  if (b0.size() != chain.base.size()) {
    throw ParamError("right-hand side length does not match the system");
  }
}

void check_eps(double eps, const InverseChain& chain) {
  if (!(eps > 0.0) || eps > 0.5) {
    throw ParamError("eps must be in (0, 0.5]");
  }
  if (!(chain.eps_d_bound < std::log(2.0) / 3.0)) {
    throw ParamError(
        "chain quality bound too loose for iterative refinement; "
        "increase the chain length");
  }
}

template <class Node>
DistResult harvest(ProtocolRun&& run, int n, int q, bool probe) {
  DistResult res;
  res.x = Vector::Zero(n);
  res.ledger = std::move(run.ledger);
  res.iterations = q;
  for (int k = 0; k < n; ++k) {
    auto* node = static_cast<Node*>(run.nodes[static_cast<std::size_t>(k)].get());
    res.x(k) = node->solution();
    if (probe) res.probe.push_back(node->probe_rows());
  }
  return res;
}

DistResult run_full(const Topology& topo, const InverseChain& chain,
                    const VectorRef& b0, int q, const DistOptions& opts) {
  check_common(topo, chain, b0);
  if (topo.radius() < topo.diameter()) {
    throw ParamError("full protocol needs an unrestricted topology radius");
  }
  auto seeds = make_seeds(chain.base, b0);
  SharedCfg cfg{chain.base.size(), chain.d, q};
  ProtocolRun run = run_protocol(
      topo,
      [&](int k) {
        return std::make_unique<FullNode>(cfg, seeds[static_cast<std::size_t>(k)]);
      },
      opts.sim);
  return harvest<FullNode>(std::move(run), cfg.n, q, opts.probe);
}

DistResult run_rhop(const Topology& topo, const InverseChain& chain,
                    const VectorRef& b0, int R, int q, const DistOptions& opts) {
  check_common(topo, chain, b0);
  if (!power_of_two(R)) throw ParamError("hop radius R must be a power of two");
  const int rho = log2_exact(R);
  if (rho > chain.d - 1) {
    throw ParamError("hop radius exceeds 2^(d-1); use the full protocol");
  }
  if (topo.radius() != R) {
    throw ParamError("topology radius must equal the hop radius R");
  }
  auto seeds = make_seeds(chain.base, b0);
  SharedCfg cfg{chain.base.size(), chain.d, q};
  ProtocolRun run = run_protocol(
      topo,
      [&](int k) {
        return std::make_unique<RhopNode>(cfg, seeds[static_cast<std::size_t>(k)],
                                          R, rho, opts.probe);
      },
      opts.sim);
  return harvest<RhopNode>(std::move(run), cfg.n, q, opts.probe);
}

}  // namespace

DistResult crude_solve_full(const Topology& topo, const InverseChain& chain,
                            const VectorRef& b0, const DistOptions& opts) {
  return run_full(topo, chain, b0, 0, opts);
}

DistResult solve_full(const Topology& topo, const InverseChain& chain,
                      const VectorRef& b0, double eps, const DistOptions& opts) {
  check_eps(eps, chain);
  const int q = auto_iterations(eps, chain.eps_d_bound);
  return run_full(topo, chain, b0, q, opts);
}

DistResult crude_solve_rhop(const Topology& topo, const InverseChain& chain,
                            const VectorRef& b0, int R, const DistOptions& opts) {
  return run_rhop(topo, chain, b0, R, 0, opts);
}

DistResult solve_rhop(const Topology& topo, const InverseChain& chain,
                      const VectorRef& b0, int R, double eps,
                      const DistOptions& opts) {
  check_eps(eps, chain);
  const int q = auto_iterations(eps, chain.eps_d_bound);
  return run_rhop(topo, chain, b0, R, q, opts);
}

WeightedGraph graph_from_splitting(const Splitting& s) {
  std::vector<Edge> edges;
  const int n = s.size();
  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j) {
      if (s.A(i, j) != 0.0) edges.push_back({i, j, s.A(i, j)});
    }
  }
  return WeightedGraph(n, std::move(edges));
}

HopRows hop_power_rows(const Topology& topo, const Splitting& s, int R,
                       const DistOptions& opts) {
  if (topo.size() != s.size()) throw ParamError("topology and system sizes differ");
  if (!power_of_two(R)) throw ParamError("hop radius R must be a power of two");
  if (topo.radius() != R) {
    throw ParamError("topology radius must equal the hop radius R");
  }
  Vector zero = Vector::Zero(s.size());
  auto seeds = make_seeds(s, zero);
  ProtocolRun run = run_protocol(
      topo,
      [&](int k) {
        return std::make_unique<HopRowsNode>(s.size(),
                                             seeds[static_cast<std::size_t>(k)], R);
      },
      opts.sim);
  HopRows out;
  out.ledger = std::move(run.ledger);
  for (int k = 0; k < s.size(); ++k) {
    auto* node =
        static_cast<HopRowsNode*>(run.nodes[static_cast<std::size_t>(k)].get());
    out.c0.push_back(std::move(node->c0_));
    out.c1.push_back(std::move(node->c1_));
  }
  return out;
}

}  // namespace sddm
