#include <CLI11.hpp>

#include "tiar/cli.hpp"

namespace {

void add_common(CLI::App* cmd, tiar::cli::RunSpec& spec,
                std::string& config_path) {
  cmd->add_option("--config", config_path, "JSON config file (flags override)");
  cmd->add_option("--problem", spec.problem_kind, "dep | mtx | poly");
  cmd->add_option("--grid", spec.grid, "grid size for the generated DEP");
  cmd->add_option("--a0", spec.a0_path, "A0 Matrix Market file");
  cmd->add_option("--a1", spec.a1_path, "A1 Matrix Market file");
  cmd->add_option("--a2", spec.a2_path, "A2 Matrix Market file");
  cmd->add_option("--poly-dim", spec.poly_dim, "built-in polynomial dimension");
  cmd->add_option("--poly-degree", spec.poly_degree,
                  "built-in polynomial degree");
  cmd->add_option("--m", spec.config.m, "max factorization length");
  cmd->add_option("--p", spec.config.p, "wanted eigenpairs");
  cmd->add_option("--max-restarts", spec.config.max_restarts, "restart budget");
  cmd->add_option("--conv-tol", spec.config.conv_tol, "convergence tolerance");
  cmd->add_option("--drop-tol", spec.config.drop_tol,
                  "compression drop tolerance");
  cmd->add_option("--seed", spec.config.seed, "random start seed");
  cmd->add_flag("--random-start", spec.config.random_start,
                "seeded random start vector instead of ones");
  cmd->add_option("--out", spec.out_dir, "output directory");
  cmd->add_option("--strategy",
                  [&spec](const CLI::results_t& res) {
                    if (res[0] == "implicit") {
                      spec.config.strategy = tiar::RestartStrategy::Implicit;
                    } else if (res[0] == "semi-explicit") {
                      spec.config.strategy =
                          tiar::RestartStrategy::SemiExplicit;
                    } else {
                      return false;
                    }
                    return true;
                  },
                  "implicit | semi-explicit");
  cmd->add_option("--md-variant",
                  [&spec](const CLI::results_t& res) {
                    if (res[0] == "sum-form") {
                      spec.config.md_variant = tiar::MdVariant::SumForm;
                    } else if (res[0] == "series") {
                      spec.config.md_variant = tiar::MdVariant::Series;
                    } else {
                      return false;
                    }
                    return true;
                  },
                  "sum-form | series");
}

} // namespace

int main(int argc, char** argv) {
  CLI::App app{"restarted tensor-Krylov solver for nonlinear eigenproblems"};
  app.require_subcommand(1);

  tiar::cli::RunSpec solve_spec, oracle_spec, compare_spec;
  std::string solve_config, oracle_config, compare_config;
  long long oracle_k = 12;
  bool flip_sign = false;

  auto* solve_cmd = app.add_subcommand("solve", "run one eigensolve");
  add_common(solve_cmd, solve_spec, solve_config);

  auto* oracle_cmd = app.add_subcommand(
      "oracle", "companion-linearization equivalence check");
  add_common(oracle_cmd, oracle_spec, oracle_config);
  oracle_cmd->add_option("--k", oracle_k, "expansion length to check");
  oracle_cmd
      ->add_flag("--flip-ztilde-sign", flip_sign,
                 "negate the operator constant term (harness self-test)")
      ->group(""); // hidden

  auto* compare_cmd =
      app.add_subcommand("compare", "run both restart strategies");
  add_common(compare_cmd, compare_spec, compare_config);

  CLI11_PARSE(app, argc, argv);

  try {
    if (solve_cmd->parsed()) {
      if (!solve_config.empty()) {
        tiar::cli::load_config_file(solve_spec, solve_config);
        // Re-apply the command line on top of the file.
        solve_cmd->clear();
        CLI11_PARSE(app, argc, argv);
      }
      return tiar::cli::cmd_solve(solve_spec);
    }
    if (oracle_cmd->parsed()) {
      if (!oracle_config.empty()) {
        tiar::cli::load_config_file(oracle_spec, oracle_config);
        oracle_cmd->clear();
        CLI11_PARSE(app, argc, argv);
      }
      return tiar::cli::cmd_oracle(oracle_spec, oracle_k, flip_sign);
    }
    if (compare_cmd->parsed()) {
      if (!compare_config.empty()) {
        tiar::cli::load_config_file(compare_spec, compare_config);
        compare_cmd->clear();
        CLI11_PARSE(app, argc, argv);
      }
      return tiar::cli::cmd_compare(compare_spec);
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return tiar::cli::kExitInputError;
  }
  return tiar::cli::kExitInputError;
}
