#include "tiar/cli.hpp"

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <random>

#include <Eigen/Eigenvalues>
#include <json.hpp>

#include "tiar/companion.hpp"
#include "tiar/matrix_market.hpp"
#include "tiar/nep.hpp"

namespace tiar::cli {

namespace {

using nlohmann::json;

std::string fmt(double value) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", value);
  return buf;
}

std::ofstream open_out(const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) {
    raise(ErrorCode::InvalidArgument, "cannot write " + path.string());
  }
  out.imbue(std::locale::classic());
  return out;
}

void write_eigenvalues_csv(const std::filesystem::path& path,
                           const std::vector<EigenPair>& pairs) {
  auto out = open_out(path);
  out << "re,im,residual\n";
  for (const auto& pair : pairs) {
    out << fmt(pair.lambda.real()) << "," << fmt(pair.lambda.imag()) << ","
        << fmt(pair.residual) << "\n";
  }
}

void write_trace_csv(const std::filesystem::path& path,
                     const std::vector<TraceEntry>& trace,
                     const std::string& strategy_column = "") {
  auto out = open_out(path);
  if (!strategy_column.empty()) {
    out << "strategy,";
  }
  out << "iteration,p_l,min_estimate,max_estimate,r,d,bytes,seconds\n";
  for (const auto& entry : trace) {
    if (!strategy_column.empty()) {
      out << strategy_column << ",";
    }
    out << entry.iteration << "," << entry.p_l << ","
        << fmt(entry.min_estimate) << "," << fmt(entry.max_estimate) << ","
        << entry.r << "," << entry.d << "," << entry.bytes << ","
        << fmt(entry.seconds) << "\n";
  }
}

void append_trace_csv(std::ofstream& out, const std::vector<TraceEntry>& trace,
                      const std::string& strategy) {
  for (const auto& entry : trace) {
    out << strategy << "," << entry.iteration << "," << entry.p_l << ","
        << fmt(entry.min_estimate) << "," << fmt(entry.max_estimate) << ","
        << entry.r << "," << entry.d << "," << entry.bytes << ","
        << fmt(entry.seconds) << "\n";
  }
}

const char* strategy_name(RestartStrategy s) {
  return s == RestartStrategy::Implicit ? "implicit" : "semi-explicit";
}

json summary_json(const RunSpec& spec, const NepProblem& problem,
                  const SolveResult& result, double wall_seconds) {
  json eigenvalues = json::array();
  for (const auto& pair : result.eigenpairs) {
    eigenvalues.push_back({{"re", pair.lambda.real()},
                           {"im", pair.lambda.imag()},
                           {"residual", pair.residual}});
  }
  return json{
      {"problem", {{"kind", spec.problem_kind}, {"n", problem.dim()}}},
      {"config",
       {{"m", spec.config.m},
        {"p", spec.config.p},
        {"strategy", strategy_name(spec.config.strategy)},
        {"md_variant",
         spec.config.md_variant == MdVariant::SumForm ? "sum-form" : "series"},
        {"conv_tol", spec.config.conv_tol},
        {"drop_tol", spec.config.drop_tol},
        {"max_restarts", spec.config.max_restarts},
        {"seed", spec.config.seed}}},
      {"result",
       {{"converged", result.converged},
        {"breakdown", result.breakdown},
        {"restarts", result.restarts},
        {"eigenvalue_count", result.eigenpairs.size()},
        {"r_max", result.r_max},
        {"eigenvalues", eigenvalues},
        {"wall_seconds", wall_seconds}}}};
}

int exit_for(const std::exception& e) {
  std::cerr << "error: " << e.what() << "\n";
  return kExitInputError;
}

} // namespace

std::unique_ptr<NepProblem> build_problem(const RunSpec& spec) {
  if (spec.problem_kind == "dep") {
    if (!spec.a0_path.empty()) {
      return std::make_unique<DepInstance>(read_matrix_market(spec.a0_path),
                                           read_matrix_market(spec.a1_path),
                                           read_matrix_market(spec.a2_path));
    }
    return make_grid_dep(spec.grid);
  }
  if (spec.problem_kind == "mtx") {
    if (spec.a0_path.empty() || spec.a1_path.empty() || spec.a2_path.empty()) {
      raise(ErrorCode::InvalidArgument,
            "mtx problem needs --a0, --a1 and --a2");
    }
    return std::make_unique<DepInstance>(read_matrix_market(spec.a0_path),
                                         read_matrix_market(spec.a1_path),
                                         read_matrix_market(spec.a2_path));
  }
  if (spec.problem_kind == "poly") {
    // Deterministic diagonally dominant instance; handy for smoke runs
    // against the determinant oracle.
    std::mt19937_64 rng(20240229u);
    std::uniform_real_distribution<double> dist(-1.0, 1.0);
    std::vector<Matrix> coeffs;
    for (int d = 0; d <= spec.poly_degree; ++d) {
      Matrix k(spec.poly_dim, spec.poly_dim);
      for (Index i = 0; i < spec.poly_dim; ++i) {
        for (Index j = 0; j < spec.poly_dim; ++j) {
          k(i, j) = 0.3 * Complex(dist(rng), dist(rng));
        }
      }
      if (d == 0) {
        k += 1.5 * Matrix::Identity(spec.poly_dim, spec.poly_dim);
      }
      coeffs.push_back(std::move(k));
    }
    return std::make_unique<PolynomialNep>(std::move(coeffs));
  }
  raise(ErrorCode::InvalidArgument,
        "unknown problem kind '" + spec.problem_kind + "'");
}

void load_config_file(RunSpec& spec, const std::string& path) {
  std::ifstream in(path);
  if (!in) {
    raise(ErrorCode::InvalidArgument, "cannot open config file: " + path);
  }
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    raise(ErrorCode::InvalidArgument,
          "config parse error in " + path + ": " + e.what());
  }
  if (j.contains("problem")) spec.problem_kind = j["problem"];
  if (j.contains("grid")) spec.grid = j["grid"];
  if (j.contains("a0")) spec.a0_path = j["a0"];
  if (j.contains("a1")) spec.a1_path = j["a1"];
  if (j.contains("a2")) spec.a2_path = j["a2"];
  if (j.contains("m")) spec.config.m = j["m"];
  if (j.contains("p")) spec.config.p = j["p"];
  if (j.contains("max_restarts")) spec.config.max_restarts = j["max_restarts"];
  if (j.contains("conv_tol")) spec.config.conv_tol = j["conv_tol"];
  if (j.contains("drop_tol")) spec.config.drop_tol = j["drop_tol"];
  if (j.contains("seed")) spec.config.seed = j["seed"];
  if (j.contains("strategy")) {
    const std::string s = j["strategy"];
    if (s == "implicit") {
      spec.config.strategy = RestartStrategy::Implicit;
    } else if (s == "semi-explicit") {
      spec.config.strategy = RestartStrategy::SemiExplicit;
    } else {
      raise(ErrorCode::InvalidArgument, "unknown strategy '" + s + "'");
    }
  }
  if (j.contains("md_variant")) {
    const std::string s = j["md_variant"];
    if (s == "sum-form") {
      spec.config.md_variant = MdVariant::SumForm;
    } else if (s == "series") {
      spec.config.md_variant = MdVariant::Series;
    } else {
      raise(ErrorCode::InvalidArgument, "unknown md variant '" + s + "'");
    }
  }
  if (j.contains("out")) spec.out_dir = j["out"];
}

int cmd_solve(const RunSpec& spec) {
  std::unique_ptr<NepProblem> problem;
  try {
    problem = build_problem(spec);
    for (const auto& w : validate(spec.config)) {
      std::cerr << "warning: " << w << "\n";
    }
  } catch (const std::exception& e) {
    return exit_for(e);
  }

  const auto t0 = std::chrono::steady_clock::now();
  SolveResult result;
  try {
    result = solve(*problem, spec.config);
  } catch (const Error& e) {
    std::cerr << "solver error: " << e.what() << "\n";
    return kExitInputError;
  }
  const double wall =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
          .count();

  try {
    std::filesystem::create_directories(spec.out_dir);
    const std::filesystem::path dir(spec.out_dir);
    write_eigenvalues_csv(dir / "eigenvalues.csv", result.eigenpairs);
    write_trace_csv(dir / "trace.csv", result.trace);
    auto out = open_out(dir / "summary.json");
    out << summary_json(spec, *problem, result, wall).dump(2) << "\n";
  } catch (const std::exception& e) {
    return exit_for(e);
  }

  std::cout << (result.converged ? "converged" : "not converged") << ": "
            << result.eigenpairs.size() << " eigenpairs in "
            << result.restarts << " restarts\n";
  return result.converged ? kExitOk : kExitNotConverged;
}

int cmd_oracle(const RunSpec& spec, Index k, bool flip_sign) {
  std::unique_ptr<NepProblem> problem;
  try {
    problem = build_problem(spec);
    if (problem->dim() * (k + 1) > 5000) {
      raise(ErrorCode::InvalidArgument,
            "oracle cap n(k+1) <= 5000 exceeded; shrink the problem or k");
    }
  } catch (const std::exception& e) {
    return exit_for(e);
  }
  if (k == 0) {
    std::cout << "k = 0: factorizations trivially equal\n";
    return kExitOk;
  }

  const Index n = problem->dim();
  ExpandOptions opts;
  opts.flip_ztilde_sign = flip_sign;
  TiarFactorization fact = make_start(Vector::Ones(n));
  bool tiar_breakdown = false;
  try {
    expand(fact, k, *problem, opts);
  } catch (const Error& e) {
    if (e.code() != ErrorCode::Breakdown) {
      std::cerr << "error: " << e.what() << "\n";
      return kExitInputError;
    }
    tiar_breakdown = true;
  }

  SparseMatrix companion = companion_matrix(*problem, k);
  Vector start = Vector::Zero(n * (k + 1));
  start.head(n) = Vector::Ones(n);
  ArnoldiResult arnoldi = classical_arnoldi(companion, start, k);

  if (tiar_breakdown != arnoldi.breakdown ||
      fact.H.cols() != arnoldi.H.cols()) {
    std::cout << "breakdown disagreement: tensor length " << fact.H.cols()
              << ", companion length " << arnoldi.H.cols() << "\n";
    return kExitOracleMismatch;
  }

  const double h_diff = (fact.H - arnoldi.H).cwiseAbs().maxCoeff();

  const Index kk = fact.H.cols();
  Eigen::ComplexEigenSolver<Matrix> et(fact.H.topRows(kk), false);
  Eigen::ComplexEigenSolver<Matrix> ec(arnoldi.H.topRows(kk), false);
  double ritz_diff = 0.0;
  for (Index i = 0; i < kk; ++i) {
    double best = std::numeric_limits<double>::infinity();
    for (Index j = 0; j < kk; ++j) {
      best = std::min(best, std::abs(et.eigenvalues()(i) - ec.eigenvalues()(j)));
    }
    ritz_diff = std::max(ritz_diff, best);
  }

  std::cout << "max |H_tensor - H_companion| = " << fmt(h_diff) << "\n";
  std::cout << "max Ritz distance           = " << fmt(ritz_diff) << "\n";
  return (h_diff <= 1e-8 && ritz_diff <= 1e-8) ? kExitOk
                                               : kExitOracleMismatch;
}

int cmd_compare(const RunSpec& spec) {
  std::unique_ptr<NepProblem> problem;
  try {
    problem = build_problem(spec);
  } catch (const std::exception& e) {
    return exit_for(e);
  }

  RunSpec implicit_spec = spec;
  implicit_spec.config.strategy = RestartStrategy::Implicit;
  RunSpec semi_spec = spec;
  semi_spec.config.strategy = RestartStrategy::SemiExplicit;

  SolveResult ri, rs;
  double wi = 0.0, ws = 0.0;
  try {
    auto t0 = std::chrono::steady_clock::now();
    ri = solve(*problem, implicit_spec.config);
    auto t1 = std::chrono::steady_clock::now();
    rs = solve(*problem, semi_spec.config);
    auto t2 = std::chrono::steady_clock::now();
    wi = std::chrono::duration<double>(t1 - t0).count();
    ws = std::chrono::duration<double>(t2 - t1).count();
  } catch (const Error& e) {
    std::cerr << "solver error: " << e.what() << "\n";
    return kExitInputError;
  }

  Index matched = 0;
  for (const auto& a : ri.eigenpairs) {
    for (const auto& b : rs.eigenpairs) {
      if (std::abs(a.lambda - b.lambda) <=
          1e-8 * std::max(1.0, std::abs(a.lambda))) {
        ++matched;
        break;
      }
    }
  }

  try {
    std::filesystem::create_directories(spec.out_dir);
    const std::filesystem::path dir(spec.out_dir);
    {
      auto out = open_out(dir / "compare_trace.csv");
      out << "strategy,iteration,p_l,min_estimate,max_estimate,r,d,bytes,"
             "seconds\n";
      append_trace_csv(out, ri.trace, "implicit");
      append_trace_csv(out, rs.trace, "semi-explicit");
    }
    write_eigenvalues_csv(dir / "eigenvalues_implicit.csv", ri.eigenpairs);
    write_eigenvalues_csv(dir / "eigenvalues_semi_explicit.csv",
                          rs.eigenpairs);

    json j = summary_json(implicit_spec, *problem, ri, wi);
    j["comparison"] = {
        {"matched", matched},
        {"implicit_count", ri.eigenpairs.size()},
        {"semi_explicit_count", rs.eigenpairs.size()},
        {"implicit_converged", ri.converged},
        {"semi_explicit_converged", rs.converged},
        {"implicit_seconds", wi},
        {"semi_explicit_seconds", ws},
        {"implicit_r_max", ri.r_max},
    };
    auto out = open_out(dir / "summary.json");
    out << j.dump(2) << "\n";
  } catch (const std::exception& e) {
    return exit_for(e);
  }

  std::cout << "matched " << matched << " eigenvalues ("
            << ri.eigenpairs.size() << " implicit, " << rs.eigenpairs.size()
            << " semi-explicit)\n";
  return (ri.converged && rs.converged) ? kExitOk : kExitNotConverged;
}

} // namespace tiar::cli
