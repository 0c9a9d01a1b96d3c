#pragma once

// Fixed-point iteration Lambda -> Theta(Lambda) on PSD unit-trace matrices,
// its Lyapunov-like dual cost J, and fixed-point diagnostics.

#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "klspec/hermitian.hpp"
#include "klspec/problem.hpp"

namespace klspec {

/// Relative floor on min_k G_k* L G_k below which a grid quadratic form is
/// treated as vanishing (fraction of the max over the grid).
inline constexpr double kDenominatorGuard = 1e-13;

/// Largest admissible increase of J over one step before the run is aborted.
inline constexpr double kMonotonicitySlack = 1e-9;

/// G_k* L G_k at every grid node.
std::vector<double> grid_quadratic_form(const NormalizedProblem& prob, const HermitianMatrix& l);

/// Theta(Lambda) = Lambda^{1/2} (integral of G psi/(G* Lambda G) G*) Lambda^{1/2}
/// as computed, before any trace handling. Throws BoundaryProximity when the
/// smallest grid quadratic form is at or below kDenominatorGuard times the
/// largest.
HermitianMatrix theta_map(const NormalizedProblem& prob, const StateMatrix& lambda);

/// theta_map wrapped as a StateMatrix (trace must come out within 1e-10 of one).
StateMatrix theta_step(const NormalizedProblem& prob, const StateMatrix& lambda);

/// Theta(x x*) = x x*: numerator and denominator cancel pointwise, so no
/// quadrature is performed. Result is bit-identical to StateMatrix::rank_one(x).
StateMatrix theta_rank_one(const NormalizedProblem& prob, const CVector& x);

/// J(L) = tr(L) - integral of psi log(G* L G). Defined for any L with a
/// positive quadratic form at every node; throws LogOfNonpositive otherwise.
double cost_J(const NormalizedProblem& prob, const HermitianMatrix& l);
double cost_J(const NormalizedProblem& prob, const StateMatrix& lambda);

/// J(Theta(Lambda)) - J(Lambda).
double delta_J(const NormalizedProblem& prob, const StateMatrix& lambda);

/// Right-sided derivative of J at base along dir:
/// tr(dir) - integral of psi (G* dir G)/(G* base G). Throws
/// LogSingularDirection if the base form is at or below the guard anywhere.
double directional_derivative(const NormalizedProblem& prob, const HermitianMatrix& base,
                              const HermitianMatrix& dir);
double directional_derivative(const NormalizedProblem& prob, const StateMatrix& lambda,
                              const HermitianMatrix& dir);

/// min over the grid of G* Lambda G.
double cond1_margin(const NormalizedProblem& prob, const HermitianMatrix& lambda);

/// Phi_hat = psi / (G* Lambda G) on the grid. Throws Cond1Violated when the
/// quadratic form is at or below the guard.
std::vector<double> reconstruct_phi(const NormalizedProblem& prob, const HermitianMatrix& lambda);

/// ||Gamma(phi) - I||_F.
double moment_residual(const NormalizedProblem& prob, std::span<const double> phi);

enum class FixedPointVariant { PositiveDefinite, SingularSolving, SingularNonSolving, NotFixedPoint };
std::string_view to_string(FixedPointVariant v);

struct FixedPointClass {
  FixedPointVariant variant;
  double fixed_point_residual;  // ||Theta(Lambda) - Lambda||_F
  double cond1_margin;
  double cond2_residual;  // +inf when cond1 fails
};

struct ClassificationThresholds {
  double rank = 1e-10;
  double definiteness = 1e-8;
  double cond2_factor = 100.0;  // cond2 budget is cond2_factor * tol
};

FixedPointClass classify_fixed_point(const NormalizedProblem& prob, const StateMatrix& lambda,
                                     double tol, const ClassificationThresholds& thr = {});

enum class Termination { Converged, MaxIterations, BoundaryProximity };
std::string_view to_string(Termination t);

struct TrajectoryRow {
  int iter;
  double J;
  double delta_J;
  double fp_residual;
  double min_eig;
  double trace_err;
};

struct SolveOptions {
  double tol = 1e-9;
  int max_iter = 10000;
  ClassificationThresholds thresholds{};
};

struct SolveReport {
  std::vector<TrajectoryRow> trajectory;
  StateMatrix final_lambda;
  FixedPointClass classification;
  std::optional<std::vector<double>> phi_hat;
  std::optional<double> moment_residual;
  int iterations_used;
  Termination termination;
};

/// Iterates Theta from lambda0 until ||Theta(L) - L||_F <= tol. Numerically
/// rank-one iterates go through theta_rank_one. A step that raises J by more
/// than kMonotonicitySlack throws MonotonicityViolation.
SolveReport solve(const NormalizedProblem& prob, const StateMatrix& lambda0,
                  const SolveOptions& opts = {});
SolveReport solve(const NormalizedProblem& prob, const SolveOptions& opts = {});

// Boundary analysis (boundary.cpp).

/// For n = 2 and a grid node theta_bar, the unit vector orthogonal to
/// G(theta_bar): x proportional to [-conj(g2); conj(g1)]. Throws
/// UnsupportedDimension for n != 2 and InvalidArgument if theta_bar is not a
/// grid node.
CVector construct_N0_member(const NormalizedProblem& prob, double theta_bar);

struct BoundaryCost {
  double value;        // limit value of J, singularities subtracted analytically
  double naive_value;  // plain quadrature with the vanishing nodes left out
  std::vector<Eigen::Index> singular_nodes;
};

/// J at a PSD matrix whose quadratic form may vanish at grid nodes. Each
/// double zero at a node theta_k is handled by subtracting
/// log|e^{j theta} - e^{j theta_k}|^2 (zero mean on the circle) before
/// quadrature and using the limit log(G'* L G') at the node itself.
BoundaryCost cost_J_boundary(const NormalizedProblem& prob, const StateMatrix& lambda);

/// J at a state whose quadratic form has a sharp positive minimum near grid
/// node `node`, too narrow for the grid to resolve. A dip
/// log|e^{j theta} - r e^{j theta_c}|^2 fitted to the value, slope and
/// curvature of the form at the node is subtracted before quadrature; its
/// integral is zero for r <= 1.
double cost_J_resolved(const NormalizedProblem& prob, const StateMatrix& lambda, Eigen::Index node);

struct ProbeResult {
  double eps;
  double J_at_P;
  double J_at_perturbed;
  bool escaped;
  int escape_iteration;    // -1 if not escaped
  double quadrature_bias;  // naive_value - value of cost_J_boundary at P
};

/// Compares J at P = x x* (a member of the boundary set whose form vanishes
/// at a node) with J at (1 - eps) P + eps I/n (evaluated with
/// cost_J_resolved at that node) and iterates Theta from the
/// perturbed point until it leaves the eps-ball around P or max_iter steps.
ProbeResult instability_probe(const NormalizedProblem& prob, const CVector& x, double eps,
                              int max_iter = 10000);

}  // namespace klspec
