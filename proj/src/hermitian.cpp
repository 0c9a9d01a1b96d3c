#include "klspec/hermitian.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include <Eigen/Eigenvalues>

#include "klspec/errors.hpp"

namespace klspec {

namespace {

void require_square(const CMatrix& m) {
  if (m.rows() != m.cols() || m.rows() == 0) {
    std::ostringstream os;
    os << "expected a non-empty square matrix, got " << m.rows() << "x" << m.cols();
    throw Error(ErrorKind::DimensionMismatch, os.str());
  }
}

void require_same_dim(const HermitianMatrix& x, const HermitianMatrix& y) {
  if (x.dim() != y.dim()) {
    std::ostringstream os;
    os << "dimension mismatch: " << x.dim() << " vs " << y.dim();
    throw Error(ErrorKind::DimensionMismatch, os.str());
  }
}

CMatrix reassemble(const HermitianEigen& e, const Eigen::VectorXd& values) {
  return e.vectors * values.cast<Complex>().asDiagonal() * e.vectors.adjoint();
}

// Eigenvalues at or below roundoff of the largest one are zero for the
// purpose of the square root; sqrt would otherwise amplify 1e-17 to 3e-9.
Eigen::VectorXd sqrt_spectrum(const Eigen::VectorXd& values) {
  const double cutoff = 64.0 * std::numeric_limits<double>::epsilon() *
                        std::max(1.0, values.cwiseAbs().maxCoeff());
  return values.unaryExpr([cutoff](double v) { return v > cutoff ? std::sqrt(v) : 0.0; });
}

}  // namespace

HermitianMatrix::HermitianMatrix(CMatrix m) {
  require_square(m);
  if (!m.allFinite()) {
    throw Error(ErrorKind::NonHermitianInput, "matrix has non-finite entries");
  }
  const double asym = (m - m.adjoint()).norm();
  const double scale = m.norm();
  if (asym > kAsymmetryTolerance * scale) {
    std::ostringstream os;
    os << "matrix is not Hermitian: ||M - M*||_F = " << asym << ", ||M||_F = " << scale;
    throw Error(ErrorKind::NonHermitianInput, os.str());
  }
  m_ = hermitize(m).m_;
}

HermitianMatrix HermitianMatrix::identity(Eigen::Index n) {
  return HermitianMatrix(CMatrix::Identity(n, n), Unchecked{});
}

HermitianMatrix HermitianMatrix::zero(Eigen::Index n) {
  return HermitianMatrix(CMatrix::Zero(n, n), Unchecked{});
}

HermitianMatrix HermitianMatrix::hermitize(const CMatrix& m) {
  require_square(m);
  CMatrix h = 0.5 * (m + m.adjoint());
  for (Eigen::Index i = 0; i < h.rows(); ++i) h(i, i) = h(i, i).real();
  return HermitianMatrix(std::move(h), Unchecked{});
}

HermitianMatrix HermitianMatrix::operator+(const HermitianMatrix& other) const {
  require_same_dim(*this, other);
  return HermitianMatrix(m_ + other.m_, Unchecked{});
}

HermitianMatrix HermitianMatrix::operator-(const HermitianMatrix& other) const {
  require_same_dim(*this, other);
  return HermitianMatrix(m_ - other.m_, Unchecked{});
}

HermitianMatrix HermitianMatrix::operator*(double s) const {
  return HermitianMatrix(m_ * s, Unchecked{});
}

HermitianEigen eigen_decompose(const HermitianMatrix& m) {
  Eigen::SelfAdjointEigenSolver<CMatrix> solver(m.matrix());
  if (solver.info() != Eigen::Success) {
    throw Error(ErrorKind::NonHermitianInput, "Hermitian eigensolver did not converge");
  }
  return {solver.eigenvalues(), solver.eigenvectors()};
}

StateMatrix::StateMatrix(const HermitianMatrix& m) : h_(m), min_eig_(0.0), trace_(0.0) {
  const HermitianEigen e = eigen_decompose(m);
  const double lowest = e.values(0);
  if (lowest < -kClampFloor) {
    std::ostringstream os;
    os << "matrix is not positive semi-definite: min eigenvalue " << lowest;
    throw Error(ErrorKind::InvalidStateMatrix, os.str());
  }
  // Negative eigenvalues at roundoff level are left in place; only values the
  // eigensolver can resolve from zero trigger a rebuild.
  const double roundoff = 64.0 * std::numeric_limits<double>::epsilon() *
                          std::max(1.0, e.values.cwiseAbs().maxCoeff());
  if (lowest < -roundoff) {
    h_ = HermitianMatrix::hermitize(reassemble(e, e.values.cwiseMax(0.0)));
  }
  const double tr = h_.trace();
  if (std::abs(tr - 1.0) > kTraceTolerance) {
    std::ostringstream os;
    os << "matrix trace " << tr << " is not within " << kTraceTolerance << " of one";
    throw Error(ErrorKind::InvalidStateMatrix, os.str());
  }
  h_ = h_ * (1.0 / tr);
  min_eig_ = std::max(lowest, 0.0) / tr;
  trace_ = h_.trace();
}

StateMatrix StateMatrix::scaled_identity(Eigen::Index n) {
  if (n <= 0) throw Error(ErrorKind::DimensionMismatch, "dimension must be positive");
  const double v = 1.0 / static_cast<double>(n);
  HermitianMatrix h = HermitianMatrix::identity(n) * v;
  return StateMatrix(h, v, h.trace());
}

StateMatrix StateMatrix::rank_one(const CVector& x) {
  const double norm = x.norm();
  if (x.size() == 0 || std::abs(norm - 1.0) > kTraceTolerance) {
    std::ostringstream os;
    os << "rank-one state requires a unit vector, got norm " << norm;
    throw Error(ErrorKind::InvalidStateMatrix, os.str());
  }
  HermitianMatrix h = HermitianMatrix::hermitize(x * x.adjoint());
  const double tr = h.trace();
  return StateMatrix(std::move(h), 0.0, tr);
}

StateMatrix StateMatrix::restore(const HermitianMatrix& m) {
  const double lowest = klspec::min_eigenvalue(m);
  const double tr = m.trace();
  if (lowest < -kClampFloor || std::abs(tr - 1.0) > kTraceTolerance) {
    std::ostringstream os;
    os << "stored matrix is not a valid state (min eigenvalue " << lowest << ", trace " << tr
       << ")";
    throw Error(ErrorKind::InvalidStateMatrix, os.str());
  }
  return StateMatrix(m, std::max(lowest, 0.0), tr);
}

HermitianMatrix principal_sqrt(const StateMatrix& m) {
  const HermitianEigen e = eigen_decompose(m.hermitian());
  return HermitianMatrix::hermitize(reassemble(e, sqrt_spectrum(e.values)));
}

HermitianMatrix principal_sqrt(const HermitianMatrix& m) {
  const HermitianEigen e = eigen_decompose(m);
  const double floor = -StateMatrix::kClampFloor * std::max(1.0, m.frobenius_norm());
  if (e.values(0) < floor) {
    std::ostringstream os;
    os << "square root of an indefinite matrix requested: min eigenvalue " << e.values(0);
    throw Error(ErrorKind::InvalidStateMatrix, os.str());
  }
  return HermitianMatrix::hermitize(reassemble(e, sqrt_spectrum(e.values)));
}

HermitianMatrix inverse_sqrt(const HermitianMatrix& m) {
  const HermitianEigen e = eigen_decompose(m);
  if (e.values(0) <= StateMatrix::kClampFloor) {
    std::ostringstream os;
    os << "inverse square root needs a positive definite matrix: min eigenvalue "
       << e.values(0);
    throw Error(ErrorKind::SigmaNotPositiveDefinite, os.str());
  }
  return HermitianMatrix::hermitize(reassemble(e, e.values.cwiseSqrt().cwiseInverse()));
}

double trace_inner(const HermitianMatrix& x, const HermitianMatrix& y) {
  require_same_dim(x, y);
  // tr(X Y*) = sum_ij X_ij conj(Y_ij)
  return x.matrix().cwiseProduct(y.matrix().conjugate()).sum().real();
}

double min_eigenvalue(const HermitianMatrix& m) {
  Eigen::SelfAdjointEigenSolver<CMatrix> solver(m.matrix(), Eigen::EigenvaluesOnly);
  return solver.eigenvalues()(0);
}

Eigen::Index numerical_rank(const HermitianMatrix& m, double threshold) {
  Eigen::SelfAdjointEigenSolver<CMatrix> solver(m.matrix(), Eigen::EigenvaluesOnly);
  return (solver.eigenvalues().array() > threshold).count();
}

HermitianMatrix kernel_projector(const HermitianMatrix& m, double threshold) {
  const HermitianEigen e = eigen_decompose(m);
  Eigen::VectorXd mask = (e.values.array() <= threshold).cast<double>();
  return HermitianMatrix::hermitize(reassemble(e, mask));
}

std::vector<HermitianMatrix> hermitian_basis(Eigen::Index n) {
  std::vector<HermitianMatrix> basis;
  basis.reserve(static_cast<size_t>(n * n));
  const double r = std::sqrt(0.5);
  for (Eigen::Index i = 0; i < n; ++i) {
    CMatrix e = CMatrix::Zero(n, n);
    e(i, i) = 1.0;
    basis.push_back(HermitianMatrix::hermitize(e));
  }
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = i + 1; j < n; ++j) {
      CMatrix s = CMatrix::Zero(n, n);
      s(i, j) = r;
      s(j, i) = r;
      basis.push_back(HermitianMatrix::hermitize(s));
      CMatrix a = CMatrix::Zero(n, n);
      a(i, j) = Complex(0.0, r);
      a(j, i) = Complex(0.0, -r);
      basis.push_back(HermitianMatrix::hermitize(a));
    }
  }
  return basis;
}

Eigen::VectorXd real_coordinates(const HermitianMatrix& m) {
  const Eigen::Index n = m.dim();
  Eigen::VectorXd c(n * n);
  const double s = std::sqrt(2.0);
  Eigen::Index idx = 0;
  for (Eigen::Index i = 0; i < n; ++i) c(idx++) = m(i, i).real();
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = i + 1; j < n; ++j) {
      c(idx++) = s * m(i, j).real();
      c(idx++) = s * m(i, j).imag();
    }
  }
  return c;
}

HermitianMatrix from_real_coordinates(Eigen::Index n, const Eigen::VectorXd& coords) {
  if (coords.size() != n * n) {
    throw Error(ErrorKind::DimensionMismatch, "coordinate vector length must be n^2");
  }
  CMatrix m = CMatrix::Zero(n, n);
  const double r = std::sqrt(0.5);
  Eigen::Index idx = 0;
  for (Eigen::Index i = 0; i < n; ++i) m(i, i) = coords(idx++);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = i + 1; j < n; ++j) {
      const double re = r * coords(idx++);
      const double im = r * coords(idx++);
      m(i, j) = Complex(re, im);
      m(j, i) = Complex(re, -im);
    }
  }
  return HermitianMatrix::hermitize(m);
}

}  // namespace klspec
