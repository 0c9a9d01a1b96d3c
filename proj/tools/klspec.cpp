// Command-line front end: solve, check-feasibility, dual-solve,
// probe-instability. Exit status: 0 success, 1 input or runtime error,
// 2 infeasible moment constraints, 3 boundary proximity, 4 iteration limit.

#include <chrono>
#include <cmath>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "klspec/config.hpp"
#include "klspec/dual_oracle.hpp"
#include "klspec/errors.hpp"
#include "klspec/kernels.hpp"
#include "klspec/pf_solver.hpp"
#include "klspec/report.hpp"

namespace {

using namespace klspec;
using nlohmann::json;

constexpr int kExitOk = 0;
constexpr int kExitError = 1;
constexpr int kExitInfeasible = 2;
constexpr int kExitBoundary = 3;
constexpr int kExitMaxIter = 4;

std::string one_line(std::string s) {
  for (char& c : s) {
    if (c == '\n' || c == '\r') c = ' ';
  }
  return s;
}

int report_error(std::string_view kind, const std::string& message) {
  std::string escaped;
  for (char c : one_line(message)) {
    if (c == '"' || c == '\\') escaped += '\\';
    escaped += c;
  }
  std::cerr << "error kind=" << kind << " message=\"" << escaped << "\"\n";
  return kExitError;
}

void write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorKind::ConfigError, "output: cannot open " + path);
  out << text;
  if (!out) throw Error(ErrorKind::ConfigError, "output: write failed for " + path);
}

template <typename F>
void write_stream(const std::string& path, F&& emit) {
  std::ostringstream os;
  emit(os);
  write_text(path, os.str());
}

struct Outputs {
  std::string report;
  std::string phi_csv;
  std::string trajectory_csv;
};

void add_outputs(CLI::App* cmd, Outputs& o) {
  cmd->add_option("--output", o.report, "JSON report path");
  cmd->add_option("--phi-csv", o.phi_csv, "spectrum samples CSV (theta, phi_hat, psi)");
  cmd->add_option("--trajectory-csv", o.trajectory_csv, "per-iteration diagnostics CSV");
}

int infeasible(const FeasibilityReport& feas) {
  std::ostringstream os;
  os << "moment constraints are infeasible: residual " << format_double(feas.residual)
     << " exceeds " << format_double(feas.threshold);
  std::cerr << "error kind=Infeasible message=\"" << os.str() << "\"\n";
  return kExitInfeasible;
}

int cmd_solve(const std::string& config, const Outputs& out, bool timing) {
  const ProblemFile file = load_problem(config);
  const Instance inst = build_instance(file);
  if (!inst.feasibility.feasible) {
    if (!out.report.empty()) {
      json doc{{"feasibility", to_json(inst.feasibility)},
               {"config", file.source},
               {"grid_size", file.grid_size},
               {"version", kVersion}};
      write_text(out.report, doc.dump(2) + "\n");
    }
    return infeasible(inst.feasibility);
  }

  const auto start = std::chrono::steady_clock::now();
  const SolveReport report = solve(inst.problem, inst.lambda0, inst.options);
  const std::chrono::duration<double> elapsed = std::chrono::steady_clock::now() - start;

  if (!out.trajectory_csv.empty()) {
    write_stream(out.trajectory_csv, [&](std::ostream& os) { write_trajectory_csv(os, report.trajectory); });
  }
  if (!out.phi_csv.empty() && report.phi_hat) {
    const std::vector<double> phi = denormalize_phi(inst.problem.provenance, *report.phi_hat);
    write_stream(out.phi_csv, [&](std::ostream& os) {
      write_phi_csv(os, inst.raw.grid, phi, inst.raw.psi_raw);
    });
  }
  if (!out.report.empty()) {
    RunInfo info{file.source, file.grid_size, std::nullopt};
    if (timing) info.wall_clock_seconds = elapsed.count();
    write_text(out.report, run_report(report, inst.feasibility, info).dump(2) + "\n");
  }

  std::cout << "termination=" << to_string(report.termination)
            << " iterations=" << report.iterations_used
            << " classification=" << to_string(report.classification.variant) << '\n';
  switch (report.termination) {
    case Termination::Converged: return kExitOk;
    case Termination::BoundaryProximity: return kExitBoundary;
    case Termination::MaxIterations: return kExitMaxIter;
  }
  return kExitError;
}

int cmd_check_feasibility(const std::string& config) {
  const ProblemFile file = load_problem(config);
  const Instance inst = build_instance(file);
  std::cout << to_json(inst.feasibility).dump(2) << '\n';
  return inst.feasibility.feasible ? kExitOk : kExitInfeasible;
}

double spectrum_discrepancy(const NormalizedProblem& prob, const HermitianMatrix& dual,
                            const HermitianMatrix& pf) {
  const std::vector<double> qd = grid_quadratic_form(prob, dual);
  const std::vector<double> qp = grid_quadratic_form(prob, pf);
  double worst = 0.0;
  double scale = 0.0;
  for (size_t k = 0; k < qp.size(); ++k) {
    worst = std::max(worst, std::abs(qd[k] - qp[k]));
    scale = std::max(scale, std::abs(qp[k]));
  }
  return worst / scale;
}

int cmd_dual_solve(const std::string& config, const Outputs& out, const std::string& compare) {
  const ProblemFile file = load_problem(config);
  const Instance inst = build_instance(file);
  if (!inst.feasibility.feasible) return infeasible(inst.feasibility);

  std::optional<SolveReport> pf;
  if (!compare.empty()) {
    std::ifstream in(compare);
    if (!in) throw Error(ErrorKind::ConfigError, "compare: cannot open " + compare);
    json doc;
    try {
      doc = json::parse(in);
    } catch (const json::parse_error& e) {
      throw Error(ErrorKind::ConfigError, std::string("compare: malformed JSON: ") + e.what());
    }
    if (doc.contains("grid_size") && doc.at("grid_size") != file.grid_size) {
      throw Error(ErrorKind::ConfigError, "compare: report was produced on a different grid");
    }
    pf = solve_report_from_json(doc);
    if (pf->final_lambda.dim() != file.n) {
      throw Error(ErrorKind::DimensionMismatch, "compare: report dimension differs from config");
    }
  }

  DualOptions opts;
  opts.tol = file.tol;
  opts.max_iter = file.max_iter;
  const DualReport report = dual_solve(inst.problem, opts);
  json doc = to_json(report);

  if (pf) {
    const double d = spectrum_discrepancy(inst.problem, report.iterate.lambda, pf->final_lambda.hermitian());
    doc["spectrum_discrepancy"] = real_to_json(d);
    std::cout << "spectrum_discrepancy=" << format_double(d) << '\n';
  }
  const std::vector<double> phi = reconstruct_phi(inst.problem, report.iterate.lambda);
  doc["moment_residual"] = real_to_json(moment_residual(inst.problem, phi));
  doc["feasibility"] = to_json(inst.feasibility);
  doc["config"] = file.source;
  doc["grid_size"] = file.grid_size;
  doc["version"] = kVersion;

  if (!out.trajectory_csv.empty()) {
    write_stream(out.trajectory_csv, [&](std::ostream& os) { write_dual_trajectory_csv(os, report.trajectory); });
  }
  if (!out.phi_csv.empty()) {
    const std::vector<double> raw_phi = denormalize_phi(inst.problem.provenance, phi);
    write_stream(out.phi_csv, [&](std::ostream& os) {
      write_phi_csv(os, inst.raw.grid, raw_phi, inst.raw.psi_raw);
    });
  }
  if (!out.report.empty()) write_text(out.report, doc.dump(2) + "\n");
  std::cout << "iterations=" << report.iterations_used
            << " grad_norm=" << format_double(report.iterate.grad_norm) << '\n';
  return kExitOk;
}

std::vector<double> parse_eps_list(const std::string& text) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    std::size_t used = 0;
    double v = 0.0;
    try {
      v = std::stod(item, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used == 0 || used != item.size()) {
      throw Error(ErrorKind::ConfigError, "eps-list: cannot parse \"" + item + "\"");
    }
    out.push_back(v);
  }
  if (out.empty()) throw Error(ErrorKind::ConfigError, "eps-list: no values given");
  return out;
}

int cmd_probe(const std::string& config, double theta_bar, const std::string& eps_text,
              const std::string& output) {
  const std::vector<double> eps_list = parse_eps_list(eps_text);
  const ProblemFile file = load_problem(config);
  const Instance inst = build_instance(file);
  const NormalizedProblem& prob = inst.problem;
  // Snap to the nearest node; the boundary construction needs a zero on the grid.
  const double node = prob.grid().node(prob.grid().nearest_node(theta_bar));
  const CVector x = construct_N0_member(prob, node);

  std::ostringstream os;
  os << "eps,J_at_P,J_at_perturbed,escaped\n";
  for (double eps : eps_list) {
    const ProbeResult r = instability_probe(prob, x, eps, file.max_iter);
    os << format_double(r.eps) << ',' << format_double(r.J_at_P) << ','
       << format_double(r.J_at_perturbed) << ',' << (r.escaped ? "true" : "false") << '\n';
  }
  if (output.empty()) {
    std::cout << os.str();
  } else {
    write_text(output, os.str());
  }
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Kullback-Leibler spectral approximation by fixed-point iteration"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(kVersion));

  std::string config;
  Outputs solve_out;
  bool timing = false;
  CLI::App* solve_cmd = app.add_subcommand("solve", "run the fixed-point solver");
  solve_cmd->add_option("config", config, "problem file (JSON)")->required();
  add_outputs(solve_cmd, solve_out);
  solve_cmd->add_flag("--timing", timing, "record wall-clock time in the report");

  CLI::App* feas_cmd = app.add_subcommand("check-feasibility", "test the moment constraints");
  feas_cmd->add_option("config", config, "problem file (JSON)")->required();

  Outputs dual_out;
  std::string compare;
  CLI::App* dual_cmd = app.add_subcommand("dual-solve", "run the projected-gradient dual solver");
  dual_cmd->add_option("config", config, "problem file (JSON)")->required();
  add_outputs(dual_cmd, dual_out);
  dual_cmd->add_option("--compare", compare, "report from a previous solve run");

  double theta_bar = 0.0;
  std::string eps_text;
  std::string probe_out;
  CLI::App* probe_cmd =
      app.add_subcommand("probe-instability", "perturb a boundary fixed point (n = 2)");
  probe_cmd->add_option("config", config, "problem file (JSON)")->required();
  probe_cmd->add_option("--theta-bar", theta_bar, "frequency of the forced zero (radians)")->required();
  probe_cmd->add_option("--eps-list", eps_text, "comma-separated perturbation sizes")->required();
  probe_cmd->add_option("--output", probe_out, "CSV path (default stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    return report_error("UsageError", e.what());
  }

  try {
    if (*solve_cmd) return cmd_solve(config, solve_out, timing);
    if (*feas_cmd) return cmd_check_feasibility(config);
    if (*dual_cmd) return cmd_dual_solve(config, dual_out, compare);
    if (*probe_cmd) return cmd_probe(config, theta_bar, eps_text, probe_out);
  } catch (const Error& e) {
    const int code = report_error(to_string(e.kind()), e.what());
    return e.kind() == ErrorKind::MaxIterations ? kExitMaxIter : code;
  } catch (const std::exception& e) {
    return report_error("InternalError", e.what());
  }
  return kExitError;
}
