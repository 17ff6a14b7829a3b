// fide: batch solver for linear multipoint boundary value problems for
// systems of Fredholm integro-differential equations.
//
//   fide solve --config problem.cfg [--out table.csv] [--report report.json]
//   fide check --config problem.cfg [--report report.json]
//
// Exit codes: 0 ok, 1 internal error, 2 parse error, 3 no regular partition,
// 4 not well-posed / not certified, 5 contraction test failed,
// 6 iteration did not converge.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "json.hpp"

#include "fide/config.hpp"
#include "fide/degsolve.hpp"
#include "fide/itersolve.hpp"
#include "fide/model.hpp"

namespace {

using nlohmann::json;

int exit_code(fide::ErrorCode code) {
  switch (code) {
    case fide::ErrorCode::ParseError:
    case fide::ErrorCode::InvalidProblem: return 2;
    case fide::ErrorCode::NotRegular: return 3;
    case fide::ErrorCode::NotWellPosed: return 4;
    case fide::ErrorCode::ContractionFailed: return 5;
    case fide::ErrorCode::NoConvergence: return 6;
    default: return 1;
  }
}

std::string fmt17(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

json matrix_to_json(const fide::Matrix& m) {
  json rows = json::array();
  for (int i = 0; i < m.rows(); ++i) {
    json row = json::array();
    for (int j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
    rows.push_back(std::move(row));
  }
  return rows;
}

struct Options {
  std::string config_path;
  std::string out_path;
  std::string report_path = "report.json";
  std::string format = "csv";
  std::optional<int> degree;
  std::optional<double> h_max;
  std::optional<double> tol;
  std::optional<int> max_iter;
  std::optional<int> max_refine;
};

void write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write '" + path + "'");
  out << content;
}

void write_report(const std::string& path, const json& report) {
  write_file(path, report.dump(2) + "\n");
}

void write_table(const std::string& path, const std::string& format,
                 const fide::Solution& sol, int n, double T) {
  std::string out;
  if (format == "csv") {
    out += "t";
    for (int i = 1; i <= n; ++i) out += ",x_" + std::to_string(i);
    out += '\n';
    for (std::size_t r = 0; r < sol.grid.size(); ++r) {
      const auto& g = sol.grid[r];
      // Interior partition points belong to the next subinterval's first
      // node, so print every node except the last, then close with x(T).
      for (int i = 0; i < g.mesh.steps; ++i) {
        out += fmt17(g.mesh.node(i));
        for (int c = 0; c < n; ++c) out += ',' + fmt17(g.values[i][c]);
        out += '\n';
      }
    }
    const auto& last = sol.grid.back();
    out += fmt17(last.mesh.right);
    for (int c = 0; c < n; ++c)
      out += ',' + fmt17(last.values[last.mesh.steps][c]);
    out += '\n';
  } else {
    json rows = json::array();
    auto push_row = [&rows, n](double t, const fide::Vector& x) {
      json row = json::array();
      row.push_back(t);
      for (int c = 0; c < n; ++c) row.push_back(x[c]);
      rows.push_back(std::move(row));
    };
    for (std::size_t r = 0; r < sol.grid.size(); ++r) {
      const auto& g = sol.grid[r];
      for (int i = 0; i < g.mesh.steps; ++i) push_row(g.mesh.node(i), g.values[i]);
    }
    const auto& last = sol.grid.back();
    push_row(last.mesh.right, last.values[last.mesh.steps]);

    json columns = json::array();
    columns.push_back("t");
    for (int i = 1; i <= n; ++i) columns.push_back("x_" + std::to_string(i));
    json doc;
    doc["meta"] = {{"n", n}, {"T", T}};
    doc["columns"] = std::move(columns);
    doc["rows"] = std::move(rows);
    out = doc.dump(2) + "\n";
  }
  write_file(path, out);
}

json partition_json(const fide::Partition& part) {
  json steps = json::array();
  for (const auto& mesh : part.meshes) steps.push_back(mesh.steps);
  return json{{"m", part.m()}, {"points", part.points}, {"steps", steps}};
}

json diagnostics_json(const fide::SolutionDiagnostics& d) {
  json j;
  j["regularity"] = {{"regular", d.regular},
                     {"refinements", d.refinements},
                     {"norm_inv_ig", d.norm_inv_ig}};
  j["residuals"] = {{"boundary", d.boundary_residual},
                    {"continuity", d.continuity_residual}};
  json wp;
  wp["qstar_certified"] = d.qstar_certified;
  wp["constant_norm_source"] = "B_m";
  if (d.wellposedness_constant) wp["n_constant"] = *d.wellposedness_constant;
  if (d.epsilon_h) wp["epsilon_h"] = *d.epsilon_h;
  j["wellposedness"] = std::move(wp);
  return j;
}

fide::SolveOptions base_options(const fide::SolverSettings& s) {
  fide::SolveOptions opts;
  opts.h_max = s.h_max;
  opts.max_refinements = s.max_refine;
  return opts;
}

void apply_overrides(fide::SolverSettings& s, const Options& cli) {
  if (cli.degree) s.degree = *cli.degree;
  if (cli.h_max) s.h_max = *cli.h_max;
  if (cli.tol) s.tol = *cli.tol;
  if (cli.max_iter) s.max_iter = *cli.max_iter;
  if (cli.max_refine) s.max_refine = *cli.max_refine;
}

json problem_json(const fide::LoadedProblem& lp) {
  return json{{"n", lp.problem.n},
              {"T", lp.problem.T},
              {"kernel", lp.general_kernel ? "general" : "degenerate"},
              {"condition_points", lp.problem.condition.points}};
}

json settings_json(const fide::SolverSettings& s, bool general) {
  json j{{"hmax", s.h_max}, {"max_refine", s.max_refine}};
  if (general) {
    j["degree"] = s.degree;
    j["tol"] = s.tol;
    j["max_iter"] = s.max_iter;
  }
  return j;
}

int run_solve(const Options& cli) {
  json report;
  const std::string out_path =
      !cli.out_path.empty()
          ? cli.out_path
          : (cli.format == "json" ? "solution.json" : "solution.csv");
  try {
    fide::LoadedProblem lp = fide::load_problem_file(cli.config_path);
    apply_overrides(lp.settings, cli);
    report["problem"] = problem_json(lp);
    report["solver"] = settings_json(lp.settings, lp.general_kernel);

    fide::Solution sol;
    if (lp.general_kernel) {
      fide::IterOptions opts;
      opts.base = base_options(lp.settings);
      opts.tol = lp.settings.tol;
      opts.max_iter = lp.settings.max_iter;
      auto [solution, trace] =
          fide::solve_nondegenerate(lp.problem, lp.settings.degree, opts);
      sol = std::move(solution);
      json steps = json::array();
      for (std::size_t i = 0; i < trace.deltas.size(); ++i)
        steps.push_back(json{{"i", i + 1},
                             {"delta", trace.deltas[i]},
                             {"bound", trace.bound_history[i + 1]}});
      report["iteration"] = {{"degree", trace.degree},
                             {"epsilon", trace.epsilon},
                             {"c_k", trace.c_k},
                             {"q_estimate", trace.q_estimate},
                             {"converged", trace.converged},
                             {"steps", std::move(steps)}};
    } else {
      fide::SolveOptions opts = base_options(lp.settings);
      sol = fide::solve_degenerate(lp.problem, opts);
    }

    report["partition"] = partition_json(sol.partition);
    report.update(diagnostics_json(sol.diagnostics));
    report["status"] = "ok";
    write_table(out_path, cli.format, sol, lp.problem.n, lp.problem.T);
    write_report(cli.report_path, report);
    std::cout << "solved: table in " << out_path << ", report in "
              << cli.report_path << "\n";
    return 0;
  } catch (const fide::ConfigError& e) {
    report["status"] = "error";
    json err{{"code", "PARSE_ERROR"}, {"message", e.what()}};
    if (!e.key().empty()) err["key"] = e.key();
    if (e.offset()) err["offset"] = *e.offset();
    report["error"] = std::move(err);
    write_report(cli.report_path, report);
    std::cerr << "parse error: " << e.what() << "\n";
    return 2;
  } catch (const fide::SolveError& e) {
    report["status"] = "error";
    report["error"] = {{"code", fide::to_string(e.code())},
                       {"message", e.what()}};
    write_report(cli.report_path, report);
    std::cerr << fide::to_string(e.code()) << ": " << e.what() << "\n";
    return exit_code(e.code());
  } catch (const std::exception& e) {
    report["status"] = "error";
    report["error"] = {{"code", "INTERNAL"}, {"message", e.what()}};
    write_report(cli.report_path, report);
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}

int run_check(const Options& cli) {
  json report;
  try {
    fide::LoadedProblem lp = fide::load_problem_file(cli.config_path);
    apply_overrides(lp.settings, cli);
    report["problem"] = problem_json(lp);
    report["solver"] = settings_json(lp.settings, lp.general_kernel);

    fide::Problem problem = lp.problem;
    if (lp.general_kernel) {
      const auto& gk = std::get<fide::GeneralKernel>(lp.problem.kernel);
      fide::ApproximationReport approx = fide::build_degenerate_approx(
          gk.k, lp.settings.degree, lp.problem.T, lp.problem.n);
      report["approximation"] = {{"degree", approx.degree},
                                 {"epsilon", approx.epsilon}};
      problem.kernel = approx.kernel;
    }

    const fide::DegenerateWorkspace ws =
        fide::prepare_workspace(problem, base_options(lp.settings));
    report["partition"] = partition_json(ws.partition);
    report["regularity"] = {{"regular", true},
                            {"refinements", ws.refinements},
                            {"norm_inv_ig", ws.norm_inv_ig}};
    report["tables"] = {{"G", matrix_to_json(ws.tables.G)},
                        {"M", matrix_to_json(*ws.tables.M)}};
    json wp;
    wp["qstar_certified"] = ws.wellposedness.qstar_certified;
    wp["constant_norm_source"] = "B_m";
    if (ws.wellposedness.n_constant)
      wp["n_constant"] = *ws.wellposedness.n_constant;
    if (ws.wellposedness.epsilon_h)
      wp["epsilon_h"] = *ws.wellposedness.epsilon_h;
    report["wellposedness"] = std::move(wp);

    if (lp.general_kernel && ws.wellposedness.n_constant) {
      const double q = 1.25 * *ws.wellposedness.n_constant *
                       report["approximation"]["epsilon"].get<double>();
      report["approximation"]["q_estimate"] = q;
      report["approximation"]["contraction_ok"] = q < 1.0;
    }

    if (!ws.wellposedness.qstar_certified) {
      report["status"] = "error";
      report["error"] = {{"code", "NOT_WELL_POSED"},
                         {"message", "invertibility of the parameter matrix "
                                     "could not be certified"}};
      write_report(cli.report_path, report);
      std::cerr << "check: certification failed\n";
      return 4;
    }

    report["status"] = "ok";
    write_report(cli.report_path, report);
    std::cout << "check passed: report in " << cli.report_path << "\n";
    return 0;
  } catch (const fide::ConfigError& e) {
    report["status"] = "error";
    json err{{"code", "PARSE_ERROR"}, {"message", e.what()}};
    if (!e.key().empty()) err["key"] = e.key();
    if (e.offset()) err["offset"] = *e.offset();
    report["error"] = std::move(err);
    write_report(cli.report_path, report);
    std::cerr << "parse error: " << e.what() << "\n";
    return 2;
  } catch (const fide::SolveError& e) {
    report["status"] = "error";
    report["error"] = {{"code", fide::to_string(e.code())},
                       {"message", e.what()}};
    write_report(cli.report_path, report);
    std::cerr << fide::to_string(e.code()) << ": " << e.what() << "\n";
    return exit_code(e.code());
  } catch (const std::exception& e) {
    report["status"] = "error";
    report["error"] = {{"code", "INTERNAL"}, {"message", e.what()}};
    write_report(cli.report_path, report);
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Solver for multipoint boundary value problems for Fredholm "
               "integro-differential equations"};
  app.require_subcommand(1);

  Options opt;
  auto add_common = [&opt](CLI::App* cmd) {
    cmd->add_option("--config", opt.config_path, "problem file")->required();
    cmd->add_option("--report", opt.report_path, "report output path");
    cmd->add_option("--degree", opt.degree, "kernel approximation degree");
    cmd->add_option("--hmax", opt.h_max, "maximum integration step");
    cmd->add_option("--tol", opt.tol, "iteration stopping tolerance");
    cmd->add_option("--max-iter", opt.max_iter, "iteration cap");
    cmd->add_option("--max-refine", opt.max_refine,
                    "partition refinement cap");
  };

  CLI::App* solve = app.add_subcommand("solve", "solve and write the table");
  add_common(solve);
  solve->add_option("--out", opt.out_path, "solution table output path");
  solve->add_option("--format", opt.format, "table format: csv or json")
      ->check(CLI::IsMember({"csv", "json"}));

  CLI::App* check = app.add_subcommand(
      "check", "validate, assemble, and certify without solving");
  add_common(check);

  CLI11_PARSE(app, argc, argv);

  if (solve->parsed()) return run_solve(opt);
  return run_check(opt);
}
