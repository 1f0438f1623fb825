#include <exception>
#include <iostream>

#include "CLI11.hpp"
#include "sddm/app.hpp"
#include "sddm/common.hpp"

int main(int argc, char** argv) {
  CLI::App app{
      "Solver for symmetric diagonally dominant systems, with reference, "
      "full-exchange and hop-limited distributed modes"};
  app.require_subcommand(1);
  app.set_config("--config", "", "Read options from an INI file");

  sddm::RunConfig rc;
  sddm::BenchConfig bc;

  auto add_input_opts = [&](CLI::App* cmd) {
    cmd->add_option("--input", rc.input, "Matrix market file or edge list")
        ->required();
    cmd->add_option("--kind", rc.kind,
                    "Input kind: auto, matrix or laplacian (default auto)");
    cmd->add_option("--grounding", rc.grounding,
                    "none, submatrix (drop last node) or shift (add sigma I)");
    cmd->add_option("--sigma", rc.sigma, "Diagonal shift for shift grounding");
    cmd->add_option("--out", rc.out_path, "Write the report here instead of stdout");
  };

  CLI::App* validate =
      app.add_subcommand("validate", "Check that an input system is admissible");
  add_input_opts(validate);

  CLI::App* solve = app.add_subcommand("solve", "Solve M x = b and report");
  add_input_opts(solve);
  solve->add_option("--mode", rc.mode, "reference, full or rhop");
  solve->add_option("--R", rc.R, "Hop radius for rhop mode (power of two)");
  solve->add_option("--eps", rc.eps,
                    "Target relative accuracy in (0, 0.5]; 0 = one-shot solve");
  solve->add_option("--d", rc.d_override, "Override the derived chain length");
  solve->add_option("--kappa", rc.kappa_override,
                    "Condition number to use instead of estimating");
  solve->add_option("--seed", rc.seed, "Seed for the generated right-hand side");
  solve->add_option("--b0", rc.b0_path, "Read the right-hand side from a file");
  solve->add_option("--trace", rc.trace_path,
                    "Write one line per delivered message to this file");

  CLI::App* bench =
      app.add_subcommand("bench", "Sweep protocol costs over generated instances");
  bench->add_option("--gen", bc.gen, "cycle, path, grid or random");
  bench->add_option("--sizes", bc.sizes, "Instance sizes")
      ->required()
      ->delimiter(',');
  bench->add_option("--Rs", bc.radii, "Hop radii to sweep")
      ->required()
      ->delimiter(',');
  bench->add_option("--wmin", bc.wmin, "Minimum edge weight");
  bench->add_option("--wmax", bc.wmax, "Maximum edge weight (random generator)");
  bench->add_option("--sigma", bc.sigma, "Diagonal shift applied to the Laplacian");
  bench->add_option("--seed", bc.seed, "Seed for graphs and right-hand sides");
  bench->add_option("--out", bc.out_path, "Write the CSV here instead of stdout");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : sddm::kExitParamError;
  }

  try {
    if (validate->parsed()) return sddm::run_validate(rc, std::cout);
    if (solve->parsed()) return sddm::run_solve(rc, std::cout);
    return sddm::run_bench(bc, std::cout);
  } catch (const sddm::InputError& e) {
    std::cerr << "input error: " << e.what() << "\n";
    return sddm::kExitInputError;
  } catch (const sddm::ParamError& e) {
    std::cerr << "parameter error: " << e.what() << "\n";
    return sddm::kExitParamError;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
