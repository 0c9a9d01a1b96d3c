#pragma once

#include <span>
#include <vector>

#include "klspec/filterbank.hpp"
#include "klspec/hermitian.hpp"

namespace klspec {

/// Raw samples of the constant prior.
std::vector<double> sample_constant_prior(const CircleGrid& grid, double value = 1.0);

/// Raw samples of |num(e^{j theta})|^2 / |den(e^{j theta})|^2, polynomials
/// given by coefficients in ascending powers of z. den must stay above 1e-8
/// in modulus on an 8N-point check grid (InvalidPrior otherwise).
std::vector<double> sample_rational_prior(const CircleGrid& grid, std::span<const Complex> num,
                                          std::span<const Complex> den);

/// A-priori density normalized to unit mass on its grid.
class PriorSpectrum {
 public:
  /// Divides raw by its grid integral. Throws InvalidPrior unless every sample
  /// is finite and strictly positive; LengthMismatch if the length is not N.
  PriorSpectrum(const CircleGrid& grid, std::span<const double> raw);

  const CircleGrid& grid() const { return grid_; }
  const std::vector<double>& values() const { return psi_; }
  /// Integral of the raw samples that was divided out.
  double scale() const { return scale_; }

 private:
  CircleGrid grid_;
  std::vector<double> psi_;
  double scale_;
};

/// Problem data as supplied: filter bank, steady-state covariance and an
/// unnormalized prior sampled on the working grid.
struct RawProblem {
  RawProblem(FilterBank fb, HermitianMatrix sigma, CircleGrid grid, std::vector<double> psi_raw);

  FilterBank fb;
  HermitianMatrix sigma;
  CircleGrid grid;
  std::vector<double> psi_raw;
};

/// Records the map between a raw problem and its normalized form.
/// sigma_c = sigma / scale; A' = whitening A coloring, B' = whitening B,
/// with whitening = sigma_c^{-1/2} and coloring = sigma_c^{1/2}.
struct Provenance {
  double scale;
  HermitianMatrix whitening;
  HermitianMatrix coloring;
};

/// Problem with unit-mass prior and identity covariance.
struct NormalizedProblem {
  FilterBank raw_fb;
  PriorSpectrum prior;
  GridResponse response;
  Provenance provenance;

  const FilterBank& fb() const { return response.filterbank(); }
  const CircleGrid& grid() const { return response.grid(); }
  Eigen::Index dim() const { return response.dim(); }
  const std::vector<double>& psi() const { return prior.values(); }
};

NormalizedProblem normalize(const RawProblem& raw);

/// Treats (fb, psi) as given in normalized coordinates (sigma = I); the
/// prior is still rescaled to unit mass.
NormalizedProblem as_normalized(const FilterBank& fb, const CircleGrid& grid,
                                std::span<const double> psi);

/// Maps a normalized-problem density back to raw units (multiplies by scale).
std::vector<double> denormalize_phi(const Provenance& prov, std::span<const double> phi);

/// Maps a normalized moment matrix X' back: scale * coloring X' coloring.
HermitianMatrix denormalize_covariance(const Provenance& prov, const HermitianMatrix& x);

struct FeasibilityReport {
  bool feasible;
  CVector h;        // the row H stored as a column of its n entries
  double residual;  // ||sigma - A sigma A* - B H - H* B*||_F
  double threshold;
};

inline constexpr double kFeasibilityTolerance = 1e-8;

/// Real least-squares solve of sigma - A sigma A* = B H + H* B* for H.
/// Feasible iff residual <= rel_tol * max(1, ||sigma - A sigma A*||_F).
FeasibilityReport check_feasibility(const FilterBank& fb, const HermitianMatrix& sigma,
                                    double rel_tol = kFeasibilityTolerance);

/// Gamma(phi) = integral of G phi G* on the response grid.
HermitianMatrix gamma_apply(const GridResponse& resp, std::span<const double> phi);

inline constexpr double kNullspaceTolerance = 1e-9;

/// Trace-orthonormal basis of (Range Gamma)^perp = {X : G* X G = 0 on the
/// grid}: right singular vectors of X -> (G_k* X G_k)_k with singular value
/// at most 1e-9 times the largest. The dimension is recomputed on the doubled
/// grid and any disagreement throws GridDependentNullspace.
std::vector<HermitianMatrix> range_gamma_perp_basis(const GridResponse& resp);

/// Nullspace dimension on a single grid, without the doubling check.
Eigen::Index range_gamma_perp_dimension(const GridResponse& resp);

/// Orthogonal projection onto span(basis); basis must be trace-orthonormal.
HermitianMatrix project_onto(const HermitianMatrix& x, std::span<const HermitianMatrix> basis);

/// x minus its projection onto span(basis).
HermitianMatrix project_off(const HermitianMatrix& x, std::span<const HermitianMatrix> basis);

/// KL(phi || psi) = integral of psi log(psi / phi). Argument order follows
/// the estimation literature: the prior weights the log ratio.
double kl_divergence(const PriorSpectrum& prior, std::span<const double> phi);

}  // namespace klspec
