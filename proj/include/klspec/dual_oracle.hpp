#pragma once

// Second route to the optimal spectrum: projected gradient descent on J over
// Range Gamma, used to cross-check the fixed-point solver.

#include <span>
#include <vector>

#include "klspec/hermitian.hpp"
#include "klspec/problem.hpp"

namespace klspec {

struct DualIterate {
  HermitianMatrix lambda;  // in Range Gamma, not trace-normalized
  double J_value;
  double grad_norm;
};

struct DualStep {
  int iter;
  double J;
  double delta_J;
  double grad_norm;
  double step;
};

struct DualOptions {
  double tol = 1e-9;
  int max_iter = 10000;
  double armijo = 1e-4;
  double min_step = 1e-14;
};

struct DualReport {
  DualIterate iterate;
  std::vector<DualStep> trajectory;
  int iterations_used;
};

/// Projection onto Range Gamma of I - Gamma(psi / (G* lambda G)).
HermitianMatrix dual_gradient(const NormalizedProblem& prob, const HermitianMatrix& lambda,
                              std::span<const HermitianMatrix> perp_basis);
HermitianMatrix dual_gradient(const NormalizedProblem& prob, const HermitianMatrix& lambda);

/// Starts from the projection of I onto Range Gamma scaled by 1/trace (the
/// minimizer of J along that ray). Each step tries the Barzilai-Borwein
/// length and halves it until the trial point keeps a positive quadratic
/// form and satisfies the Armijo condition. When the Armijo decrease is below
/// the resolution of J (1e-14 relative), a trial that keeps J within that
/// resolution is accepted if it lowers the gradient norm. Iterates are re-projected onto
/// Range Gamma after every update. Throws LineSearchStalled when the step
/// drops below min_step and MaxIterations when max_iter is exhausted.
DualReport dual_solve(const NormalizedProblem& prob, const DualOptions& opts = {});

}  // namespace klspec
