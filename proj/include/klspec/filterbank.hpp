#pragma once

#include <span>
#include <vector>

#include "klspec/hermitian.hpp"

namespace klspec {

/// Single-input filter bank G(z) = (zI - A)^{-1} B with A Schur stable and
/// (A, B) reachable. Only obtainable through validate_filterbank.
class FilterBank {
 public:
  static constexpr double kStabilityMargin = 1e-9;
  static constexpr double kReachabilityTolerance = 1e-9;

  Eigen::Index dim() const { return a_.rows(); }
  const CMatrix& a() const { return a_; }
  const CVector& b() const { return b_; }
  double spectral_radius() const { return spectral_radius_; }

 private:
  friend FilterBank validate_filterbank(const CMatrix& a, const CVector& b);
  FilterBank(CMatrix a, CVector b, double rho) : a_(std::move(a)), b_(std::move(b)), spectral_radius_(rho) {}

  CMatrix a_;
  CVector b_;
  double spectral_radius_;
};

/// Throws NotSchurStable when the spectral radius is at least 1 - 1e-9 and
/// NotReachable when the smallest singular value of [B, AB, ..., A^{n-1}B]
/// is at most 1e-9 times the largest.
FilterBank validate_filterbank(const CMatrix& a, const CVector& b);

/// Solves (e^{j theta} I - A) x = B.
CVector eval_G(const FilterBank& fb, double theta);

/// Uniform midpoint grid theta_k = -pi + 2 pi k / N on [-pi, pi) with weight
/// 1/N per node. N must be a power of two and at least 64.
class CircleGrid {
 public:
  static constexpr Eigen::Index kDefaultSize = 2048;
  static constexpr Eigen::Index kMinSize = 64;

  explicit CircleGrid(Eigen::Index size = kDefaultSize);

  Eigen::Index size() const { return size_; }
  double weight() const { return 1.0 / static_cast<double>(size_); }
  double spacing() const;
  double node(Eigen::Index k) const;
  const std::vector<double>& nodes() const { return nodes_; }
  /// Index of the grid node closest to theta (after wrapping into [-pi, pi)).
  Eigen::Index nearest_node(double theta) const;
  CircleGrid refined() const { return CircleGrid(2 * size_); }

 private:
  Eigen::Index size_;
  std::vector<double> nodes_;
};

/// Filter responses cached on a grid: column k of samples() is G(e^{j theta_k}).
class GridResponse {
 public:
  GridResponse(FilterBank fb, CircleGrid grid);

  const FilterBank& filterbank() const { return fb_; }
  const CircleGrid& grid() const { return grid_; }
  const CMatrix& samples() const { return g_; }
  Eigen::Index dim() const { return fb_.dim(); }
  Eigen::Index size() const { return grid_.size(); }

 private:
  FilterBank fb_;
  CircleGrid grid_;
  CMatrix g_;
};

/// (1/N) sum_k samples[k]. Throws LengthMismatch if the sample count differs
/// from the grid size.
double integrate_scalar(const CircleGrid& grid, std::span<const double> samples);

/// Entrywise midpoint rule over matrix samples, re-Hermitized.
HermitianMatrix integrate_matrix(const CircleGrid& grid, std::span<const HermitianMatrix> samples);

}  // namespace klspec
