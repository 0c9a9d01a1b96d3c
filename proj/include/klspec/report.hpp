#pragma once

// JSON reports and CSV emission. Doubles are written with 17 significant
// digits so every value reads back bit-identical.

#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "klspec/dual_oracle.hpp"
#include "klspec/pf_solver.hpp"
#include "klspec/problem.hpp"

namespace klspec {

inline constexpr const char* kVersion = "0.1.0";

/// 17 significant digits, '.' separator regardless of locale.
/// Non-finite values print as nan, inf, -inf.
std::string format_double(double v);

/// Finite doubles stay JSON numbers; NaN and infinities become the strings
/// "NaN", "Infinity" and "-Infinity".
nlohmann::json real_to_json(double v);
double real_from_json(const nlohmann::json& v);

nlohmann::json matrix_to_json(const CMatrix& m);  // row-major [re, im] pairs
CMatrix matrix_from_json(const nlohmann::json& v, Eigen::Index n);

nlohmann::json to_json(const SolveReport& report);
SolveReport solve_report_from_json(const nlohmann::json& doc);

nlohmann::json to_json(const FeasibilityReport& feas);
nlohmann::json to_json(const DualReport& report);

struct RunInfo {
  nlohmann::json config;
  Eigen::Index grid_size;
  std::optional<double> wall_clock_seconds;  // omitted unless requested
};

/// SolveReport fields at top level plus feasibility, config echo, grid_size,
/// version and (optionally) wall-clock time.
nlohmann::json run_report(const SolveReport& report, const FeasibilityReport& feas,
                          const RunInfo& info);

/// theta, phi_hat, psi
void write_phi_csv(std::ostream& out, const CircleGrid& grid, std::span<const double> phi,
                   std::span<const double> psi);

/// iter, J, delta_J, fp_residual, min_eig, trace_err. Checks that J does not
/// rise by more than kMonotonicitySlack between rows and throws
/// MonotonicityViolation before writing anything if it does.
void write_trajectory_csv(std::ostream& out, std::span<const TrajectoryRow> rows);

/// iter, J, delta_J, grad_norm, step
void write_dual_trajectory_csv(std::ostream& out, std::span<const DualStep> rows);

}  // namespace klspec
