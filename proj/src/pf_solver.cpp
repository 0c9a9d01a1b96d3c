#include "klspec/pf_solver.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "klspec/errors.hpp"
#include "klspec/kernels.hpp"

namespace klspec {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

struct FormStats {
  double min;
  double max;
};

FormStats stats(const std::vector<double>& q) {
  const auto [lo, hi] = std::minmax_element(q.begin(), q.end());
  return {*lo, *hi};
}

bool above_guard(const FormStats& s) { return s.min > kDenominatorGuard * s.max; }

void require_dim(const NormalizedProblem& prob, Eigen::Index n) {
  if (prob.dim() != n) {
    std::ostringstream os;
    os << "matrix dimension " << n << " does not match problem dimension " << prob.dim();
    throw Error(ErrorKind::DimensionMismatch, os.str());
  }
}

std::optional<double> try_cost(const NormalizedProblem& prob, const StateMatrix& l) {
  const std::vector<double> q = grid_quadratic_form(prob, l.hermitian());
  if (stats(q).min <= 0.0) return std::nullopt;
  return l.trace() - kernels::weighted_log_mean(prob.psi(), q);
}

CVector top_eigenvector(const StateMatrix& l) {
  const HermitianEigen e = eigen_decompose(l.hermitian());
  CVector x = e.vectors.col(e.vectors.cols() - 1);
  return x / x.norm();
}

}  // namespace

std::vector<double> grid_quadratic_form(const NormalizedProblem& prob, const HermitianMatrix& l) {
  require_dim(prob, l.dim());
  return kernels::quadratic_forms(prob.response.samples(), l.matrix());
}

HermitianMatrix theta_map(const NormalizedProblem& prob, const StateMatrix& lambda) {
  const std::vector<double> q = grid_quadratic_form(prob, lambda.hermitian());
  const FormStats s = stats(q);
  if (!above_guard(s)) {
    std::ostringstream os;
    os << "G* Lambda G nearly vanishes on the grid (min " << s.min << ", max " << s.max
       << "); Lambda is numerically on the boundary set";
    throw Error(ErrorKind::BoundaryProximity, os.str());
  }
  const std::vector<double>& psi = prob.psi();
  std::vector<double> w(q.size());
  for (size_t k = 0; k < q.size(); ++k) w[k] = psi[k] / q[k];
  const CMatrix m = kernels::weighted_outer_mean(prob.response.samples(), w);
  const HermitianMatrix root_h = principal_sqrt(lambda);
  const CMatrix& root = root_h.matrix();
  return HermitianMatrix::hermitize(root * m * root);
}

StateMatrix theta_step(const NormalizedProblem& prob, const StateMatrix& lambda) {
  return StateMatrix(theta_map(prob, lambda));
}

StateMatrix theta_rank_one(const NormalizedProblem& prob, const CVector& x) {
  require_dim(prob, x.size());
  return StateMatrix::rank_one(x);
}

double cost_J(const NormalizedProblem& prob, const HermitianMatrix& l) {
  const std::vector<double> q = grid_quadratic_form(prob, l);
  const FormStats s = stats(q);
  if (!(s.min > 0.0)) {
    std::ostringstream os;
    os << "log of a nonpositive quadratic form (min over grid " << s.min << ")";
    throw Error(ErrorKind::LogOfNonpositive, os.str());
  }
  return l.trace() - kernels::weighted_log_mean(prob.psi(), q);
}

double cost_J(const NormalizedProblem& prob, const StateMatrix& lambda) {
  return cost_J(prob, lambda.hermitian());
}

double delta_J(const NormalizedProblem& prob, const StateMatrix& lambda) {
  const StateMatrix next = theta_step(prob, lambda);
  return cost_J(prob, next) - cost_J(prob, lambda);
}

double directional_derivative(const NormalizedProblem& prob, const HermitianMatrix& base,
                              const HermitianMatrix& dir) {
  if (base.dim() != dir.dim()) {
    throw Error(ErrorKind::DimensionMismatch, "base point and direction differ in dimension");
  }
  const std::vector<double> q = grid_quadratic_form(prob, base);
  const FormStats s = stats(q);
  if (!above_guard(s)) {
    std::ostringstream os;
    os << "directional derivative is singular: G* L G min " << s.min << ", max " << s.max;
    throw Error(ErrorKind::LogSingularDirection, os.str());
  }
  const std::vector<double> d = grid_quadratic_form(prob, dir);
  const std::vector<double>& psi = prob.psi();
  std::vector<double> ratio(q.size());
  for (size_t k = 0; k < q.size(); ++k) ratio[k] = psi[k] * d[k] / q[k];
  return dir.trace() - kernels::mean(ratio);
}

double directional_derivative(const NormalizedProblem& prob, const StateMatrix& lambda,
                              const HermitianMatrix& dir) {
  return directional_derivative(prob, lambda.hermitian(), dir);
}

double cond1_margin(const NormalizedProblem& prob, const HermitianMatrix& lambda) {
  return stats(grid_quadratic_form(prob, lambda)).min;
}

std::vector<double> reconstruct_phi(const NormalizedProblem& prob, const HermitianMatrix& lambda) {
  std::vector<double> q = grid_quadratic_form(prob, lambda);
  const FormStats s = stats(q);
  if (!above_guard(s)) {
    std::ostringstream os;
    os << "G* Lambda G is not bounded away from zero (min " << s.min << ", max " << s.max << ")";
    throw Error(ErrorKind::Cond1Violated, os.str());
  }
  const std::vector<double>& psi = prob.psi();
  for (size_t k = 0; k < q.size(); ++k) q[k] = psi[k] / q[k];
  return q;
}

double moment_residual(const NormalizedProblem& prob, std::span<const double> phi) {
  const HermitianMatrix m = gamma_apply(prob.response, phi);
  return (m - HermitianMatrix::identity(prob.dim())).frobenius_norm();
}

std::string_view to_string(FixedPointVariant v) {
  switch (v) {
    case FixedPointVariant::PositiveDefinite: return "PositiveDefinite";
    case FixedPointVariant::SingularSolving: return "SingularSolving";
    case FixedPointVariant::SingularNonSolving: return "SingularNonSolving";
    case FixedPointVariant::NotFixedPoint: return "NotFixedPoint";
  }
  return "Unknown";
}

std::string_view to_string(Termination t) {
  switch (t) {
    case Termination::Converged: return "Converged";
    case Termination::MaxIterations: return "MaxIterations";
    case Termination::BoundaryProximity: return "BoundaryProximity";
  }
  return "Unknown";
}

FixedPointClass classify_fixed_point(const NormalizedProblem& prob, const StateMatrix& lambda,
                                     double tol, const ClassificationThresholds& thr) {
  double residual = kInf;
  if (numerical_rank(lambda.hermitian(), thr.rank) == 1) {
    const StateMatrix image = theta_rank_one(prob, top_eigenvector(lambda));
    residual = (image.hermitian() - lambda.hermitian()).frobenius_norm();
  } else {
    try {
      residual = (theta_map(prob, lambda) - lambda.hermitian()).frobenius_norm();
    } catch (const Error& e) {
      if (e.kind() != ErrorKind::BoundaryProximity) throw;
    }
  }

  const FormStats s = stats(grid_quadratic_form(prob, lambda.hermitian()));
  const bool cond1 = above_guard(s);
  const double cond2 = cond1 ? moment_residual(prob, reconstruct_phi(prob, lambda.hermitian())) : kInf;
  const bool solves = cond1 && cond2 <= thr.cond2_factor * tol;

  FixedPointVariant variant;
  if (!(residual <= tol)) {
    variant = FixedPointVariant::NotFixedPoint;
  } else if (solves) {
    variant = lambda.min_eigenvalue() > thr.definiteness ? FixedPointVariant::PositiveDefinite
                                                         : FixedPointVariant::SingularSolving;
  } else {
    // A fixed point that fails the optimality conditions. A definite but
    // ill-conditioned Lambda can land here too when cond2 misses its budget.
    variant = FixedPointVariant::SingularNonSolving;
  }
  return FixedPointClass{variant, residual, s.min, cond2};
}

SolveReport solve(const NormalizedProblem& prob, const StateMatrix& lambda0,
                  const SolveOptions& opts) {
  require_dim(prob, lambda0.dim());
  std::vector<TrajectoryRow> rows;
  StateMatrix current = lambda0;
  std::optional<double> j_current = try_cost(prob, current);
  Termination termination = Termination::MaxIterations;
  int used = opts.max_iter;

  for (int k = 0; k < opts.max_iter; ++k) {
    std::optional<StateMatrix> next;
    double fp_residual = 0.0;
    double trace_err = 0.0;
    if (numerical_rank(current.hermitian(), opts.thresholds.rank) == 1) {
      next = theta_rank_one(prob, top_eigenvector(current));
      fp_residual = (next->hermitian() - current.hermitian()).frobenius_norm();
      trace_err = std::abs(next->trace() - 1.0);
    } else {
      HermitianMatrix image = HermitianMatrix::zero(prob.dim());
      try {
        image = theta_map(prob, current);
      } catch (const Error& e) {
        if (e.kind() != ErrorKind::BoundaryProximity) throw;
        termination = Termination::BoundaryProximity;
        used = k;
        break;
      }
      fp_residual = (image - current.hermitian()).frobenius_norm();
      trace_err = std::abs(image.trace() - 1.0);
      next = StateMatrix(image);
    }

    const std::optional<double> j_next = try_cost(prob, *next);
    const double dj = (j_current && j_next) ? *j_next - *j_current : kNaN;
    rows.push_back({k, j_current.value_or(kNaN), dj, fp_residual, current.min_eigenvalue(), trace_err});

    if (dj > kMonotonicitySlack) {
      std::ostringstream os;
      os << "J increased by " << dj << " at iteration " << k << " (J = " << *j_current
         << "); this contradicts the descent property and indicates a numerical defect";
      throw Error(ErrorKind::MonotonicityViolation, os.str());
    }
    if (fp_residual <= opts.tol) {
      termination = Termination::Converged;
      used = k;
      break;
    }
    current = std::move(*next);
    j_current = j_next;
  }

  FixedPointClass cls = classify_fixed_point(prob, current, opts.tol, opts.thresholds);
  SolveReport report{std::move(rows), current, cls, std::nullopt, std::nullopt, used, termination};
  if (termination == Termination::Converged &&
      cls.cond1_margin > kDenominatorGuard * stats(grid_quadratic_form(prob, current.hermitian())).max) {
    report.phi_hat = reconstruct_phi(prob, current.hermitian());
    report.moment_residual = moment_residual(prob, *report.phi_hat);
  }
  return report;
}

SolveReport solve(const NormalizedProblem& prob, const SolveOptions& opts) {
  return solve(prob, StateMatrix::scaled_identity(prob.dim()), opts);
}

}  // namespace klspec
