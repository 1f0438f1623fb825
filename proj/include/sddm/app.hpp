#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

namespace sddm {

// Exit codes shared by the library entry points and the command line tool.
inline constexpr int kExitOk = 0;
inline constexpr int kExitVerifyFailed = 1;
inline constexpr int kExitInputError = 2;
inline constexpr int kExitParamError = 3;

struct RunConfig {
  std::string input;               // matrix market file or edge list
  std::string kind = "auto";       // auto | matrix | laplacian
  std::string grounding = "none";  // none | submatrix | shift
  double sigma = 1.0;              // diagonal added under shift grounding
  std::string mode = "reference";  // reference | full | rhop
  int R = 1;                       // hop radius for rhop
  double eps = 0.0;                // 0 = one-shot solve, else target accuracy
  int d_override = 0;              // 0 = derive from kappa
  double kappa_override = 0.0;     // 0 = estimate
  std::uint64_t seed = 1;          // drives the generated right-hand side
  std::string b0_path;             // empty = generate from seed
  std::string trace_path;          // empty = no message trace
  std::string out_path;            // empty = stdout
};

// Check that the input is admissible for the solver and report violations.
// Returns kExitOk or kExitVerifyFailed; input problems throw.
int run_validate(const RunConfig& cfg, std::ostream& out);

// Full pipeline: ingest, ground, build the chain, solve in the requested
// mode, verify against a dense direct solve, emit one JSON report. The
// report is byte-stable for a fixed config except for the timing block.
int run_solve(const RunConfig& cfg, std::ostream& out);

struct BenchConfig {
  std::string gen = "cycle";  // cycle | path | grid | random
  std::vector<int> sizes;
  std::vector<int> radii;
  double wmin = 1.0;
  double wmax = 1.0;
  double sigma = 1.0;
  std::uint64_t seed = 1;
  std::string out_path;  // empty = stdout
};

// Cost sweep over generated instances: one CSV row per (size, radius) pair,
// same chain depth across radii of one instance so rows are comparable.
int run_bench(const BenchConfig& cfg, std::ostream& out);

}  // namespace sddm
