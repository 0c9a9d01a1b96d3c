#pragma once

// Problem-definition files (JSON). Complex numbers are [re, im] pairs and
// matrices are row-major flat lists.

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "klspec/hermitian.hpp"
#include "klspec/pf_solver.hpp"
#include "klspec/problem.hpp"

namespace klspec {

struct PsiSpec {
  enum class Kind { Constant, Samples, Rational };
  Kind kind = Kind::Constant;
  double value = 1.0;           // constant
  std::vector<double> samples;  // samples
  std::vector<Complex> num;     // rational, ascending powers of z
  std::vector<Complex> den;
};

struct ProblemFile {
  Eigen::Index n = 0;
  CMatrix a;
  CVector b;
  std::optional<CMatrix> sigma;  // identity when absent
  PsiSpec psi;
  Eigen::Index grid_size = 2048;
  double tol = 1e-9;
  int max_iter = 10000;
  std::optional<CMatrix> lambda0;  // scaled identity when absent
  nlohmann::json source;           // the document as read, echoed in reports
};

/// Validates the schema and every numeric field. Throws Error(ConfigError)
/// whose message starts with the offending key.
ProblemFile parse_problem(const nlohmann::json& doc);
ProblemFile load_problem(const std::filesystem::path& path);

/// Everything a run needs, built from a ProblemFile.
struct Instance {
  RawProblem raw;
  FeasibilityReport feasibility;
  NormalizedProblem problem;
  StateMatrix lambda0;
  SolveOptions options;
};

/// Validates the filter bank, samples the prior, checks feasibility and
/// normalizes. lambda0 from the file is read in normalized coordinates and
/// divided by its trace. Library errors keep their kind; the message is
/// prefixed with the key they concern.
Instance build_instance(const ProblemFile& file);

}  // namespace klspec
