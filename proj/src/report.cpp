#include "klspec/report.hpp"

#include <charconv>
#include <cmath>
#include <limits>
#include <sstream>

#include "klspec/errors.hpp"

namespace klspec {

namespace {

using nlohmann::json;

std::optional<Termination> termination_from(const std::string& s) {
  for (Termination t : {Termination::Converged, Termination::MaxIterations, Termination::BoundaryProximity}) {
    if (to_string(t) == s) return t;
  }
  return std::nullopt;
}

FixedPointVariant variant_from(const std::string& s) {
  for (FixedPointVariant v : {FixedPointVariant::PositiveDefinite, FixedPointVariant::SingularSolving,
                              FixedPointVariant::SingularNonSolving, FixedPointVariant::NotFixedPoint}) {
    if (to_string(v) == s) return v;
  }
  throw Error(ErrorKind::ConfigError, "classification: unknown variant \"" + s + "\"");
}

std::vector<double> reals_from(const json& v) {
  std::vector<double> out;
  out.reserve(v.size());
  for (const json& x : v) out.push_back(real_from_json(x));
  return out;
}

json reals_to(std::span<const double> v) {
  json out = json::array();
  for (double x : v) out.push_back(real_to_json(x));
  return out;
}

}  // namespace

std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v, std::chars_format::general, 17);
  return std::string(buf, res.ptr);
}

json real_to_json(double v) {
  if (std::isnan(v)) return "NaN";
  if (std::isinf(v)) return v > 0 ? "Infinity" : "-Infinity";
  return v;
}

double real_from_json(const json& v) {
  if (v.is_number()) return v.get<double>();
  if (v.is_string()) {
    const std::string s = v.get<std::string>();
    if (s == "NaN") return std::numeric_limits<double>::quiet_NaN();
    if (s == "Infinity") return std::numeric_limits<double>::infinity();
    if (s == "-Infinity") return -std::numeric_limits<double>::infinity();
  }
  throw Error(ErrorKind::ConfigError, "expected a real number, got " + v.dump());
}

json matrix_to_json(const CMatrix& m) {
  json out = json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
      out.push_back(json::array({real_to_json(m(i, j).real()), real_to_json(m(i, j).imag())}));
    }
  }
  return out;
}

CMatrix matrix_from_json(const json& v, Eigen::Index n) {
  if (!v.is_array() || static_cast<Eigen::Index>(v.size()) != n * n) {
    throw Error(ErrorKind::ConfigError, "matrix: expected " + std::to_string(n * n) + " entries");
  }
  CMatrix m(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < n; ++j) {
      const json& e = v[static_cast<size_t>(i * n + j)];
      m(i, j) = Complex(real_from_json(e.at(0)), real_from_json(e.at(1)));
    }
  }
  return m;
}

json to_json(const SolveReport& r) {
  json traj = json::array();
  for (const TrajectoryRow& row : r.trajectory) {
    traj.push_back({{"iter", row.iter},
                    {"J", real_to_json(row.J)},
                    {"delta_J", real_to_json(row.delta_J)},
                    {"fp_residual", real_to_json(row.fp_residual)},
                    {"min_eig", real_to_json(row.min_eig)},
                    {"trace_err", real_to_json(row.trace_err)}});
  }
  json out;
  out["termination"] = std::string(to_string(r.termination));
  out["iterations_used"] = r.iterations_used;
  out["classification"] = std::string(to_string(r.classification.variant));
  out["fixed_point_residual"] = real_to_json(r.classification.fixed_point_residual);
  out["cond1_margin"] = real_to_json(r.classification.cond1_margin);
  out["cond2_residual"] = real_to_json(r.classification.cond2_residual);
  out["moment_residual"] = r.moment_residual ? real_to_json(*r.moment_residual) : json(nullptr);
  out["phi_hat"] = r.phi_hat ? reals_to(*r.phi_hat) : json(nullptr);
  out["final_lambda"] = {{"n", r.final_lambda.dim()},
                         {"values", matrix_to_json(r.final_lambda.matrix())}};
  out["trajectory"] = std::move(traj);
  return out;
}

SolveReport solve_report_from_json(const json& doc) {
  try {
    std::vector<TrajectoryRow> rows;
    for (const json& row : doc.at("trajectory")) {
      rows.push_back({row.at("iter").get<int>(), real_from_json(row.at("J")),
                      real_from_json(row.at("delta_J")), real_from_json(row.at("fp_residual")),
                      real_from_json(row.at("min_eig")), real_from_json(row.at("trace_err"))});
    }
    const json& fl = doc.at("final_lambda");
    const auto n = fl.at("n").get<Eigen::Index>();
    StateMatrix lambda = StateMatrix::restore(HermitianMatrix(matrix_from_json(fl.at("values"), n)));
    FixedPointClass cls{variant_from(doc.at("classification").get<std::string>()),
                        real_from_json(doc.at("fixed_point_residual")),
                        real_from_json(doc.at("cond1_margin")),
                        real_from_json(doc.at("cond2_residual"))};
    std::optional<std::vector<double>> phi;
    if (!doc.at("phi_hat").is_null()) phi = reals_from(doc.at("phi_hat"));
    std::optional<double> mres;
    if (!doc.at("moment_residual").is_null()) mres = real_from_json(doc.at("moment_residual"));
    const std::string term = doc.at("termination").get<std::string>();
    const std::optional<Termination> t = termination_from(term);
    if (!t) throw Error(ErrorKind::ConfigError, "termination: unknown value \"" + term + "\"");
    return SolveReport{std::move(rows), std::move(lambda), cls, std::move(phi), mres,
                       doc.at("iterations_used").get<int>(), *t};
  } catch (const json::exception& e) {
    throw Error(ErrorKind::ConfigError, std::string("report: ") + e.what());
  }
}

json to_json(const FeasibilityReport& f) {
  json h = json::array();
  for (Eigen::Index i = 0; i < f.h.size(); ++i) {
    h.push_back(json::array({real_to_json(f.h(i).real()), real_to_json(f.h(i).imag())}));
  }
  return {{"feasible", f.feasible},
          {"residual", real_to_json(f.residual)},
          {"threshold", real_to_json(f.threshold)},
          {"H", std::move(h)}};
}

json to_json(const DualReport& r) {
  json traj = json::array();
  for (const DualStep& s : r.trajectory) {
    traj.push_back({{"iter", s.iter},
                    {"J", real_to_json(s.J)},
                    {"delta_J", real_to_json(s.delta_J)},
                    {"grad_norm", real_to_json(s.grad_norm)},
                    {"step", real_to_json(s.step)}});
  }
  const HermitianMatrix& l = r.iterate.lambda;
  return {{"iterations_used", r.iterations_used},
          {"J", real_to_json(r.iterate.J_value)},
          {"grad_norm", real_to_json(r.iterate.grad_norm)},
          {"lambda", {{"n", l.dim()}, {"values", matrix_to_json(l.matrix())}}},
          {"trajectory", std::move(traj)}};
}

json run_report(const SolveReport& report, const FeasibilityReport& feas, const RunInfo& info) {
  json out = to_json(report);
  out["feasibility"] = to_json(feas);
  out["config"] = info.config;
  out["grid_size"] = info.grid_size;
  out["version"] = kVersion;
  if (info.wall_clock_seconds) out["wall_clock_seconds"] = *info.wall_clock_seconds;
  return out;
}

void write_phi_csv(std::ostream& out, const CircleGrid& grid, std::span<const double> phi,
                   std::span<const double> psi) {
  if (static_cast<Eigen::Index>(phi.size()) != grid.size() || psi.size() != phi.size()) {
    throw Error(ErrorKind::LengthMismatch, "phi/psi length does not match the grid");
  }
  out << "theta,phi_hat,psi\n";
  for (Eigen::Index k = 0; k < grid.size(); ++k) {
    const auto i = static_cast<size_t>(k);
    out << format_double(grid.node(k)) << ',' << format_double(phi[i]) << ','
        << format_double(psi[i]) << '\n';
  }
}

void write_trajectory_csv(std::ostream& out, std::span<const TrajectoryRow> rows) {
  for (size_t i = 1; i < rows.size(); ++i) {
    const double rise = rows[i].J - rows[i - 1].J;
    if (rise > kMonotonicitySlack) {
      std::ostringstream os;
      os << "trajectory J rises by " << rise << " between iterations " << rows[i - 1].iter
         << " and " << rows[i].iter;
      throw Error(ErrorKind::MonotonicityViolation, os.str());
    }
  }
  out << "iter,J,delta_J,fp_residual,min_eig,trace_err\n";
  for (const TrajectoryRow& r : rows) {
    out << r.iter << ',' << format_double(r.J) << ',' << format_double(r.delta_J) << ','
        << format_double(r.fp_residual) << ',' << format_double(r.min_eig) << ','
        << format_double(r.trace_err) << '\n';
  }
}

void write_dual_trajectory_csv(std::ostream& out, std::span<const DualStep> rows) {
  out << "iter,J,delta_J,grad_norm,step\n";
  for (const DualStep& r : rows) {
    out << r.iter << ',' << format_double(r.J) << ',' << format_double(r.delta_J) << ','
        << format_double(r.grad_norm) << ',' << format_double(r.step) << '\n';
  }
}

}  // namespace klspec
