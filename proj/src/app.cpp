#include "sddm/app.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <limits>
#include <ostream>
#include <utility>

#include "json.hpp"
#include "sddm/chain.hpp"
#include "sddm/core.hpp"
#include "sddm/dist.hpp"
#include "sddm/io.hpp"
#include "sddm/reference.hpp"

namespace sddm {
namespace {

using ordered_json = nlohmann::ordered_json;

struct Ingested {
  Matrix M;
  bool from_graph = false;
  WeightedGraph graph;  // only meaningful when from_graph
  bool grounded_submatrix = false;
  std::string kind;  // resolved: matrix | laplacian
  std::vector<std::string> warnings;
};

std::string resolve_kind(const RunConfig& cfg) {
  if (cfg.kind == "matrix" || cfg.kind == "laplacian") return cfg.kind;
  if (cfg.kind == "auto") {
    return sniff_matrix_market(cfg.input) ? "matrix" : "laplacian";
  }
  throw ParamError("unknown input kind '" + cfg.kind +
                   "' (expected auto, matrix or laplacian)");
}

void check_grounding_name(const std::string& g) {
  if (g != "none" && g != "submatrix" && g != "shift") {
    throw ParamError("unknown grounding '" + g +
                     "' (expected none, submatrix or shift)");
  }
}

Matrix drop_last_row_col(const Matrix& M) {
  const int n = static_cast<int>(M.rows());
  if (n < 2) throw ParamError("submatrix grounding needs at least two nodes");
  return M.topLeftCorner(n - 1, n - 1);
}

// allow_ungrounded lets `validate` inspect a raw (singular) Laplacian;
// the solver insists on grounding because the system must be invertible
Ingested ingest(const RunConfig& cfg, bool allow_ungrounded) {
  check_grounding_name(cfg.grounding);
  Ingested ing;
  ing.kind = resolve_kind(cfg);
  if (cfg.grounding == "shift" && !(cfg.sigma > 0.0)) {
    throw ParamError("shift grounding needs sigma > 0");
  }

  if (ing.kind == "matrix") {
    ing.M = read_matrix_market_file(cfg.input);
    if (cfg.grounding == "shift") {
      ing.M.diagonal().array() += cfg.sigma;
    } else if (cfg.grounding == "submatrix") {
      ing.M = drop_last_row_col(ing.M);
      ing.grounded_submatrix = true;
    }
    return ing;
  }

  ing.from_graph = true;
  ing.graph = read_edge_list_file(cfg.input);
  Matrix L = laplacian_matrix(ing.graph);
  if (cfg.grounding == "none") {
    if (!allow_ungrounded) {
      throw ParamError(
          "a graph Laplacian is singular; ground it with "
          "--grounding submatrix or --grounding shift");
    }
    ing.M = std::move(L);
  } else if (cfg.grounding == "submatrix") {
    ing.M = drop_last_row_col(L);
    ing.grounded_submatrix = true;
  } else {
    L.diagonal().array() += cfg.sigma;
    ing.M = std::move(L);
  }
  return ing;
}

double resolve_kappa(const RunConfig& cfg, const Ingested& ing, const Matrix& M,
                     std::string& source) {
  if (cfg.kappa_override != 0.0) {
    if (cfg.kappa_override < 1.0) throw ParamError("kappa must be at least 1");
    source = "user";
    return cfg.kappa_override;
  }
  const int n = static_cast<int>(M.rows());
  if (n <= kDenseCap) {
    source = "eigen";
    return condition_number(M);
  }
  // Gershgorin: lam_min >= min_i (M_ii - R_i), lam_max <= max_i (M_ii + R_i)
  double lo = std::numeric_limits<double>::infinity();
  double hi = 0.0;
  for (int i = 0; i < n; ++i) {
    double r = 0.0;
    for (int j = 0; j < n; ++j) {
      if (j != i) r += std::abs(M(i, j));
    }
    lo = std::min(lo, M(i, i) - r);
    hi = std::max(hi, M(i, i) + r);
  }
  if (lo > 0.0) {
    source = "bound";
    return std::max(1.0, hi / lo);
  }
  if (ing.from_graph) {
    source = "bound";
    return condition_bound(ing.graph, ing.grounded_submatrix);
  }
  throw ParamError(
      "cannot bound the condition number of this input; pass --kappa");
}

int resolve_radius(int requested, int d, std::vector<std::string>& warnings) {
  if (requested < 1) throw ParamError("hop radius R must be at least 1");
  int R = 1;
  while (R <= requested / 2) R *= 2;
  if (R != requested) {
    warnings.push_back("hop radius " + std::to_string(requested) +
                       " is not a power of two; using " + std::to_string(R));
  }
  const int shift = std::min(d - 1, 30);
  const int cap = 1 << shift;
  if (R > cap) {
    warnings.push_back("hop radius " + std::to_string(R) +
                       " exceeds 2^(d-1); using " + std::to_string(cap));
    R = cap;
  }
  return R;
}

Vector make_b0(const RunConfig& cfg, int n) {
  if (!cfg.b0_path.empty()) {
    Vector b = read_vector_file(cfg.b0_path);
    if (b.size() != n) {
      throw InputError("right-hand side has " + std::to_string(b.size()) +
                       " entries, system has " + std::to_string(n));
    }
    return b;
  }
  Rng rng(cfg.seed);
  Vector b(n);
  for (int i = 0; i < n; ++i) b(i) = rng.normal();
  return b;
}

ordered_json violations_json(const SddmCheck& check) {
  ordered_json arr = ordered_json::array();
  for (const auto& v : check.violations) {
    arr.push_back({{"row", v.row}, {"rule", v.rule}, {"detail", v.detail}});
  }
  return arr;
}

ordered_json system_json(const WeightedGraph& g, int diameter) {
  ordered_json sys;
  sys["n"] = g.size();
  sys["edges"] = g.edges().size();
  sys["max_degree"] = g.size() > 0 ? g.max_degree() : 0;
  if (g.edges().empty()) {
    sys["min_weight"] = nullptr;
    sys["max_weight"] = nullptr;
  } else {
    sys["min_weight"] = g.min_weight();
    sys["max_weight"] = g.max_weight();
  }
  sys["diameter"] = diameter;
  return sys;
}

ordered_json certificate_json(const ChainCertificate& cert) {
  ordered_json c;
  c["checked"] = true;
  c["ok"] = cert.ok;
  c["recursion_deviation"] = cert.recursion_dev;
  c["shared_diagonal_deviation"] = cert.diag_dev;
  c["measured_accuracy"] = cert.measured_eps_d;
  c["accuracy_bound"] = cert.eps_d_bound;
  c["refinement_ready"] = cert.eps_d_small;
  return c;
}

ordered_json cost_json(const CostLedger& ledger, int round_weight) {
  ordered_json c;
  c["rounds"] = ledger.rounds;
  c["messages"] = ledger.messages;
  c["scalars_sent"] = ledger.scalars_sent;
  c["node_ops_max"] = ledger.node_ops_max();
  c["node_ops_total"] = ledger.node_ops_total();
  c["max_hops_seen"] = ledger.max_hops_seen;
  c["round_weight"] = round_weight;
  c["composite_time_steps"] =
      ledger.node_ops_max() + ledger.rounds * static_cast<std::int64_t>(round_weight);
  return c;
}

std::ostream& pick_stream(const std::string& path, std::ofstream& file,
                          std::ostream& fallback) {
  if (path.empty()) return fallback;
  file.open(path);
  if (!file) throw InputError("cannot open output file: " + path);
  return file;
}

}  // namespace

int run_validate(const RunConfig& cfg, std::ostream& out) {
  Ingested ing = ingest(cfg, /*allow_ungrounded=*/true);
  SddmCheck check = validate_sddm(ing.M);

  ordered_json rep;
  rep["schema_version"] = 1;
  rep["input"] = cfg.input;
  rep["kind"] = ing.kind;
  rep["grounding"] = cfg.grounding;
  rep["n"] = static_cast<int>(ing.M.rows());
  rep["valid"] = check.ok;
  rep["violations"] = violations_json(check);

  std::ofstream file;
  std::ostream& os = pick_stream(cfg.out_path, file, out);
  os << rep.dump(2) << "\n";
  return check.ok ? kExitOk : kExitVerifyFailed;
}

int run_solve(const RunConfig& cfg, std::ostream& out) {
  const auto t0 = std::chrono::steady_clock::now();

  if (cfg.mode != "reference" && cfg.mode != "full" && cfg.mode != "rhop") {
    throw ParamError("unknown mode '" + cfg.mode +
                     "' (expected reference, full or rhop)");
  }
  if (cfg.eps < 0.0 || cfg.eps > 0.5) {
    throw ParamError("eps must lie in (0, 0.5], or 0 for a one-shot solve");
  }
  if (cfg.d_override < 0) throw ParamError("d must be positive");

  Ingested ing = ingest(cfg, /*allow_ungrounded=*/false);
  std::vector<std::string> warnings = std::move(ing.warnings);

  SddmCheck check = validate_sddm(ing.M);
  if (!check.ok) {
    throw InputError("system is not admissible\n" + check.summary());
  }
  Splitting S = standard_splitting(ing.M);
  const int n = S.size();
  WeightedGraph cg = graph_from_splitting(S);

  std::string kappa_source;
  const double kappa = resolve_kappa(cfg, ing, ing.M, kappa_source);
  const int d = cfg.d_override > 0 ? cfg.d_override : chain_length(kappa);
  if (cfg.d_override > 0 && cfg.d_override != chain_length(kappa)) {
    warnings.push_back("chain length forced to " + std::to_string(d) +
                       " (rule gives " + std::to_string(chain_length(kappa)) +
                       ")");
  }
  InverseChain chain = build_chain(S, d, kappa);

  ordered_json cert;
  bool chain_ok = true;
  if (n <= kDenseCap) {
    ChainCertificate c = verify_chain(chain);
    cert = certificate_json(c);
    chain_ok = c.ok;
  } else {
    cert = ordered_json{{"checked", false}};
  }

  Vector b0 = make_b0(cfg, n);

  std::ofstream trace_file;
  DistOptions dopts;
  if (!cfg.trace_path.empty()) {
    trace_file.open(cfg.trace_path);
    if (!trace_file) throw InputError("cannot open trace file: " + cfg.trace_path);
    dopts.sim.trace = &trace_file;
  }

  Vector x;
  int iterations = 0;
  bool have_cost = false;
  CostLedger ledger;
  int round_weight = 0;
  int radius_used = 0;
  std::vector<Vector> iterates;

  if (cfg.mode == "reference") {
    if (cfg.eps == 0.0) {
      x = crude_solve(chain, b0);
    } else {
      RichardsonResult rr = richardson_solve(chain, b0, cfg.eps);
      x = rr.x;
      iterations = rr.iterations;
      iterates = std::move(rr.iterates);
    }
  } else if (cfg.mode == "full") {
    Topology topo = Topology::full(cg);
    DistResult res = cfg.eps == 0.0 ? crude_solve_full(topo, chain, b0, dopts)
                                    : solve_full(topo, chain, b0, cfg.eps, dopts);
    x = std::move(res.x);
    iterations = res.iterations;
    ledger = std::move(res.ledger);
    have_cost = true;
    round_weight = topo.diameter();
  } else {
    radius_used = resolve_radius(cfg.R, d, warnings);
    Topology topo(cg, radius_used);
    DistResult res =
        cfg.eps == 0.0
            ? crude_solve_rhop(topo, chain, b0, radius_used, dopts)
            : solve_rhop(topo, chain, b0, radius_used, cfg.eps, dopts);
    x = std::move(res.x);
    iterations = res.iterations;
    ledger = std::move(res.ledger);
    have_cost = true;
    // a hop-restricted exchange is the network primitive, one tick per round
    round_weight = 1;
  }

  // verify against a dense direct solve while that is tractable
  ordered_json verification;
  bool passed = true;
  if (n <= 2000) {
    const Vector xstar = direct_solve(ing.M, b0);
    const double res_rel = (ing.M * x - b0).norm() / std::max(b0.norm(), 1e-300);
    const double den2 = std::max(xstar.norm(), 1e-300);
    const double err2 = (x - xstar).norm() / den2;
    const double denm = std::max(m_norm(ing.M, xstar), 1e-300);
    const double errm = m_norm(ing.M, x - xstar) / denm;
    const double bound =
        cfg.eps > 0.0 ? cfg.eps : 1.0 - std::exp(-chain.eps_d_bound) + 1e-12;
    passed = errm <= bound;
    verification["checked"] = true;
    verification["rel_residual"] = res_rel;
    verification["rel_err_2"] = err2;
    verification["rel_err_energy"] = errm;
    verification["bound"] = bound;
    verification["passed"] = passed;
    if (!iterates.empty()) {
      ordered_json errs = ordered_json::array();
      for (const Vector& y : iterates) {
        errs.push_back(m_norm(ing.M, y - xstar) / denm);
      }
      verification["iterate_err_energy"] = errs;
    }
  } else {
    verification["checked"] = false;
  }

  ordered_json rep;
  rep["schema_version"] = 1;
  rep["config"] = ordered_json{{"input", cfg.input},
                               {"kind", ing.kind},
                               {"grounding", cfg.grounding},
                               {"sigma", cfg.sigma},
                               {"mode", cfg.mode},
                               {"R", cfg.mode == "rhop" ? ordered_json(radius_used)
                                                        : ordered_json(nullptr)},
                               {"eps", cfg.eps},
                               {"seed", cfg.seed},
                               {"b0", cfg.b0_path.empty() ? "seeded" : cfg.b0_path}};
  rep["warnings"] = warnings;
  {
    Topology diam_probe = Topology::full(cg);
    rep["system"] = system_json(cg, diam_probe.diameter());
  }
  rep["chain"] = ordered_json{{"d", chain.d},
                              {"length_constant", kChainLengthC},
                              {"kappa", chain.kappa_used},
                              {"kappa_source", kappa_source},
                              {"gamma", chain.gamma},
                              {"accuracy_bound", chain.eps_d_bound},
                              {"certificate", cert}};
  rep["solution"] = ordered_json{{"iterations", iterations},
                                 {"x", std::vector<double>(x.data(), x.data() + n)}};
  rep["verification"] = verification;
  if (have_cost) rep["cost"] = cost_json(ledger, round_weight);
  const double wall =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  rep["timing"] = ordered_json{{"wall_seconds", wall}};

  std::ofstream file;
  std::ostream& os = pick_stream(cfg.out_path, file, out);
  os << rep.dump(2) << "\n";

  return (passed && chain_ok) ? kExitOk : kExitVerifyFailed;
}

int run_bench(const BenchConfig& cfg, std::ostream& out) {
  if (cfg.sizes.empty()) throw ParamError("bench needs at least one size");
  if (cfg.radii.empty()) throw ParamError("bench needs at least one radius");
  if (cfg.gen != "cycle" && cfg.gen != "path" && cfg.gen != "grid" &&
      cfg.gen != "random") {
    throw ParamError("unknown generator '" + cfg.gen +
                     "' (expected cycle, path, grid or random)");
  }
  if (!(cfg.sigma > 0.0)) throw ParamError("bench sigma must be positive");
  if (!(cfg.wmin > 0.0) || cfg.wmax < cfg.wmin) {
    throw ParamError("bench weights need 0 < wmin <= wmax");
  }

  std::ofstream file;
  std::ostream& os = pick_stream(cfg.out_path, file, out);
  os << "gen,n,R,d,kappa,rounds,messages,scalars_sent,node_ops_max,"
        "node_ops_total,composite_time_steps\n";

  Rng rng(cfg.seed);
  for (int size : cfg.sizes) {
    if (size < 2) throw ParamError("bench sizes must be at least 2");
    WeightedGraph g;
    if (cfg.gen == "cycle") {
      g = make_cycle(size, cfg.wmin);
    } else if (cfg.gen == "path") {
      g = make_path(size, cfg.wmin);
    } else if (cfg.gen == "grid") {
      const int side = std::max(2, static_cast<int>(std::lround(std::sqrt(size))));
      g = make_grid(side, side, cfg.wmin);
    } else {
      g = make_random_connected(size, size, cfg.wmin, cfg.wmax, rng);
    }
    const int n = g.size();

    Matrix M = laplacian_matrix(g);
    M.diagonal().array() += cfg.sigma;
    Splitting S = standard_splitting(M);
    double kappa;
    if (n <= kDenseCap) {
      kappa = condition_number(M);
    } else {
      // shifted Laplacian: lam_min >= sigma, lam_max <= 2 max degree-weight + sigma
      double hi = 0.0;
      for (int i = 0; i < n; ++i) hi = std::max(hi, 2.0 * M(i, i) - cfg.sigma);
      kappa = std::max(1.0, hi / cfg.sigma);
    }
    const int d = chain_length(kappa);
    InverseChain chain = build_chain(S, d, kappa);

    Vector b0(n);
    for (int i = 0; i < n; ++i) b0(i) = rng.normal();

    for (int radius : cfg.radii) {
      std::vector<std::string> warnings;
      const int R = resolve_radius(radius, d, warnings);
      Topology topo(g, R);
      DistResult res = crude_solve_rhop(topo, chain, b0, R);
      const std::int64_t composite =
          res.ledger.node_ops_max() + res.ledger.rounds;
      os << cfg.gen << ',' << n << ',' << R << ',' << d << ',' << kappa << ','
         << res.ledger.rounds << ',' << res.ledger.messages << ','
         << res.ledger.scalars_sent << ',' << res.ledger.node_ops_max() << ','
         << res.ledger.node_ops_total() << ',' << composite << '\n';
    }
  }
  return kExitOk;
}

}  // namespace sddm
