#pragma once

#include <complex>
#include <vector>

#include <Eigen/Dense>

namespace klspec {

using Complex = std::complex<double>;
using CMatrix = Eigen::MatrixXcd;
using CVector = Eigen::VectorXcd;

/// Dense complex Hermitian matrix. The stored entries are exactly Hermitian:
/// construction rejects inputs whose anti-Hermitian part exceeds
/// 1e-12 * ||M||_F and then averages M with its adjoint.
class HermitianMatrix {
 public:
  static constexpr double kAsymmetryTolerance = 1e-12;

  explicit HermitianMatrix(CMatrix m);

  static HermitianMatrix identity(Eigen::Index n);
  static HermitianMatrix zero(Eigen::Index n);
  /// (M + M*) / 2 without the asymmetry check. For results that are
  /// Hermitian in exact arithmetic but carry roundoff.
  static HermitianMatrix hermitize(const CMatrix& m);

  Eigen::Index dim() const { return m_.rows(); }
  const CMatrix& matrix() const { return m_; }
  Complex operator()(Eigen::Index i, Eigen::Index j) const { return m_(i, j); }

  double trace() const { return m_.diagonal().real().sum(); }
  double frobenius_norm() const { return m_.norm(); }

  HermitianMatrix operator+(const HermitianMatrix& other) const;
  HermitianMatrix operator-(const HermitianMatrix& other) const;
  HermitianMatrix operator*(double s) const;

 private:
  struct Unchecked {};
  HermitianMatrix(CMatrix m, Unchecked) : m_(std::move(m)) {}

  CMatrix m_;
};

inline HermitianMatrix operator*(double s, const HermitianMatrix& m) { return m * s; }

struct HermitianEigen {
  Eigen::VectorXd values;  // ascending
  CMatrix vectors;         // columns are orthonormal eigenvectors
};

HermitianEigen eigen_decompose(const HermitianMatrix& m);

/// Element of the set of PSD unit-trace matrices. Eigenvalues in
/// [-1e-10, 0) are clamped to zero, anything more negative is rejected, and
/// the trace (which must already be within 1e-10 of one) is divided out once
/// here. No other operation renormalizes.
class StateMatrix {
 public:
  static constexpr double kClampFloor = 1e-10;
  static constexpr double kTraceTolerance = 1e-10;

  explicit StateMatrix(const HermitianMatrix& m);

  static StateMatrix scaled_identity(Eigen::Index n);
  /// x x* for unit x (||x|| within 1e-10 of one). Built directly, so two
  /// calls with the same x produce bit-identical matrices.
  static StateMatrix rank_one(const CVector& x);
  /// Keeps the entries of m bit for bit (no clamping or rescaling); m must
  /// already satisfy the PSD and trace tolerances. For deserialization.
  static StateMatrix restore(const HermitianMatrix& m);

  Eigen::Index dim() const { return h_.dim(); }
  const HermitianMatrix& hermitian() const { return h_; }
  const CMatrix& matrix() const { return h_.matrix(); }
  double min_eigenvalue() const { return min_eig_; }
  double trace() const { return trace_; }

 private:
  StateMatrix(HermitianMatrix h, double min_eig, double trace)
      : h_(std::move(h)), min_eig_(min_eig), trace_(trace) {}

  HermitianMatrix h_;
  double min_eig_;
  double trace_;
};

/// Principal square root via full eigendecomposition. Eigenvalues at or
/// below 64 eps times the largest (including clamped negatives) map to zero.
HermitianMatrix principal_sqrt(const StateMatrix& m);

/// Principal square root of a general PSD Hermitian matrix. Throws
/// InvalidStateMatrix if the smallest eigenvalue is below
/// -1e-10 * max(1, ||M||_F).
HermitianMatrix principal_sqrt(const HermitianMatrix& m);

/// M^{-1/2} for positive definite M (smallest eigenvalue > 1e-10).
HermitianMatrix inverse_sqrt(const HermitianMatrix& m);

/// tr(X Y*), real for Hermitian arguments.
double trace_inner(const HermitianMatrix& x, const HermitianMatrix& y);

double min_eigenvalue(const HermitianMatrix& m);

/// Number of eigenvalues strictly above threshold.
Eigen::Index numerical_rank(const HermitianMatrix& m, double threshold = 1e-10);

/// Orthogonal projector onto the span of eigenvectors with eigenvalue at or
/// below threshold.
HermitianMatrix kernel_projector(const HermitianMatrix& m, double threshold = 1e-10);

/// Trace-orthonormal basis of the real vector space of n x n Hermitian
/// matrices: e_ii, then (e_ij + e_ji)/sqrt2 and i(e_ij - e_ji)/sqrt2 for i < j.
std::vector<HermitianMatrix> hermitian_basis(Eigen::Index n);

/// Coordinates of m in hermitian_basis(m.dim()); an isometry onto R^{n^2}.
Eigen::VectorXd real_coordinates(const HermitianMatrix& m);
HermitianMatrix from_real_coordinates(Eigen::Index n, const Eigen::VectorXd& coords);

}  // namespace klspec
