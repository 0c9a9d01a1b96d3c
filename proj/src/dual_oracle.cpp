#include "klspec/dual_oracle.hpp"

#include <algorithm>
#include <cmath>
#include <optional>
#include <sstream>

#include "klspec/errors.hpp"
#include "klspec/kernels.hpp"
#include "klspec/pf_solver.hpp"

namespace klspec {

namespace {

constexpr double kCostResolution = 1e-14;

// J at l when every grid form is above the guard, otherwise nothing.
std::optional<double> admissible_cost(const NormalizedProblem& prob, const HermitianMatrix& l) {
  const std::vector<double> q = grid_quadratic_form(prob, l);
  const auto [lo, hi] = std::minmax_element(q.begin(), q.end());
  if (!(*lo > kDenominatorGuard * *hi)) return std::nullopt;
  return l.trace() - kernels::weighted_log_mean(prob.psi(), q);
}

}  // namespace

HermitianMatrix dual_gradient(const NormalizedProblem& prob, const HermitianMatrix& lambda,
                              std::span<const HermitianMatrix> perp_basis) {
  std::vector<double> phi;
  try {
    phi = reconstruct_phi(prob, lambda);
  } catch (const Error& e) {
    if (e.kind() != ErrorKind::Cond1Violated) throw;
    throw Error(ErrorKind::BoundaryProximity, e.what());
  }
  const HermitianMatrix raw = HermitianMatrix::identity(prob.dim()) - gamma_apply(prob.response, phi);
  return project_off(raw, perp_basis);
}

HermitianMatrix dual_gradient(const NormalizedProblem& prob, const HermitianMatrix& lambda) {
  const std::vector<HermitianMatrix> basis = range_gamma_perp_basis(prob.response);
  return dual_gradient(prob, lambda, basis);
}

DualReport dual_solve(const NormalizedProblem& prob, const DualOptions& opts) {
  const std::vector<HermitianMatrix> basis = range_gamma_perp_basis(prob.response);
  const Eigen::Index n = prob.dim();

  HermitianMatrix lambda = project_off(HermitianMatrix::identity(n), basis);
  lambda = lambda * (1.0 / lambda.trace());
  std::optional<double> j0 = admissible_cost(prob, lambda);
  if (!j0) {
    lambda = HermitianMatrix::identity(n) * (1.0 / static_cast<double>(n));
    j0 = admissible_cost(prob, lambda);
  }
  double j = *j0;
  HermitianMatrix grad = dual_gradient(prob, lambda, basis);
  double gnorm = grad.frobenius_norm();

  std::vector<DualStep> steps;
  std::optional<HermitianMatrix> prev_lambda;
  std::optional<HermitianMatrix> prev_grad;

  for (int k = 0; k < opts.max_iter; ++k) {
    if (gnorm <= opts.tol) {
      return DualReport{DualIterate{lambda, j, gnorm}, std::move(steps), k};
    }
    double t = 1.0;
    if (prev_lambda) {
      const HermitianMatrix s = lambda - *prev_lambda;
      const HermitianMatrix y = grad - *prev_grad;
      const double sy = trace_inner(s, y);
      if (sy > 0.0) t = trace_inner(s, s) / sy;
    }
    const double g2 = gnorm * gnorm;
    // Below this the Armijo decrease cannot be resolved in J itself.
    const double resolution = kCostResolution * std::max(1.0, std::abs(j));
    std::optional<HermitianMatrix> accepted;
    std::optional<HermitianMatrix> accepted_grad;
    double j_trial = j;
    while (t >= opts.min_step) {
      HermitianMatrix trial = project_off(lambda - grad * t, basis);
      const std::optional<double> jt = admissible_cost(prob, trial);
      const double decrease = opts.armijo * t * g2;
      if (jt && decrease >= resolution && *jt <= j - decrease) {
        accepted = std::move(trial);
        j_trial = *jt;
        break;
      }
      if (jt && decrease < resolution && *jt <= j + resolution) {
        HermitianMatrix g_trial = dual_gradient(prob, trial, basis);
        if (g_trial.frobenius_norm() < gnorm) {
          accepted = std::move(trial);
          accepted_grad = std::move(g_trial);
          j_trial = *jt;
          break;
        }
      }
      t *= 0.5;
    }
    if (!accepted) {
      std::ostringstream os;
      os << "line search stalled at iteration " << k << " (gradient norm " << gnorm << ")";
      throw Error(ErrorKind::LineSearchStalled, os.str());
    }
    steps.push_back({k, j, j_trial - j, gnorm, t});
    prev_lambda = lambda;
    prev_grad = grad;
    lambda = std::move(*accepted);
    j = j_trial;
    grad = accepted_grad ? std::move(*accepted_grad) : dual_gradient(prob, lambda, basis);
    gnorm = grad.frobenius_norm();
  }
  if (gnorm <= opts.tol) {
    return DualReport{DualIterate{lambda, j, gnorm}, std::move(steps), opts.max_iter};
  }
  std::ostringstream os;
  os << "dual solver did not reach gradient norm " << opts.tol << " in " << opts.max_iter
     << " iterations (last " << gnorm << ")";
  throw Error(ErrorKind::MaxIterations, os.str());
}

}  // namespace klspec
