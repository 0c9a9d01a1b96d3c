#include "klspec/filterbank.hpp"

#include <cmath>
#include <numbers>
#include <sstream>

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>

#include "klspec/errors.hpp"
#include "klspec/kernels.hpp"

namespace klspec {

FilterBank validate_filterbank(const CMatrix& a, const CVector& b) {
  const Eigen::Index n = a.rows();
  if (n == 0 || a.cols() != n || b.size() != n) {
    std::ostringstream os;
    os << "A must be square and B a matching column: A is " << a.rows() << "x" << a.cols()
       << ", B has " << b.size() << " entries";
    throw Error(ErrorKind::DimensionMismatch, os.str());
  }
  if (!a.allFinite() || !b.allFinite()) {
    throw Error(ErrorKind::InvalidArgument, "filter bank has non-finite entries");
  }

  Eigen::ComplexEigenSolver<CMatrix> eig(a, false);
  const double rho = eig.eigenvalues().cwiseAbs().maxCoeff();
  if (rho >= 1.0 - FilterBank::kStabilityMargin) {
    std::ostringstream os;
    os << "A is not Schur stable: spectral radius " << rho;
    throw Error(ErrorKind::NotSchurStable, os.str());
  }

  CMatrix reach(n, n);
  reach.col(0) = b;
  for (Eigen::Index k = 1; k < n; ++k) reach.col(k) = a * reach.col(k - 1);
  const Eigen::VectorXd sv = Eigen::JacobiSVD<CMatrix>(reach).singularValues();
  if (sv(0) == 0.0 || sv(n - 1) <= FilterBank::kReachabilityTolerance * sv(0)) {
    std::ostringstream os;
    os << "(A, B) is not reachable: singular values of the reachability matrix range "
       << sv(n - 1) << " .. " << sv(0);
    throw Error(ErrorKind::NotReachable, os.str());
  }
  return FilterBank(a, b, rho);
}

CVector eval_G(const FilterBank& fb, double theta) {
  CMatrix m = -fb.a();
  m.diagonal().array() += std::polar(1.0, theta);
  return m.partialPivLu().solve(fb.b());
}

CircleGrid::CircleGrid(Eigen::Index size) : size_(size) {
  if (size < kMinSize || (size & (size - 1)) != 0) {
    std::ostringstream os;
    os << "grid size must be a power of two >= " << kMinSize << ", got " << size;
    throw Error(ErrorKind::InvalidGrid, os.str());
  }
  nodes_.resize(static_cast<size_t>(size));
  for (Eigen::Index k = 0; k < size; ++k) nodes_[static_cast<size_t>(k)] = node(k);
}

double CircleGrid::spacing() const {
  return 2.0 * std::numbers::pi / static_cast<double>(size_);
}

double CircleGrid::node(Eigen::Index k) const {
  return -std::numbers::pi + spacing() * static_cast<double>(k);
}

Eigen::Index CircleGrid::nearest_node(double theta) const {
  const double two_pi = 2.0 * std::numbers::pi;
  double t = std::fmod(theta + std::numbers::pi, two_pi);
  if (t < 0) t += two_pi;
  auto k = static_cast<Eigen::Index>(std::llround(t / spacing()));
  return k % size_;
}

GridResponse::GridResponse(FilterBank fb, CircleGrid grid)
    : fb_(std::move(fb)),
      grid_(std::move(grid)),
      g_(kernels::evaluate_responses(fb_.a(), fb_.b(), grid_.nodes())) {}

double integrate_scalar(const CircleGrid& grid, std::span<const double> samples) {
  if (static_cast<Eigen::Index>(samples.size()) != grid.size()) {
    std::ostringstream os;
    os << "expected " << grid.size() << " samples, got " << samples.size();
    throw Error(ErrorKind::LengthMismatch, os.str());
  }
  return kernels::mean(samples);
}

HermitianMatrix integrate_matrix(const CircleGrid& grid, std::span<const HermitianMatrix> samples) {
  if (static_cast<Eigen::Index>(samples.size()) != grid.size()) {
    std::ostringstream os;
    os << "expected " << grid.size() << " samples, got " << samples.size();
    throw Error(ErrorKind::LengthMismatch, os.str());
  }
  const Eigen::Index n = samples.front().dim();
  CMatrix acc = CMatrix::Zero(n, n);
  for (const HermitianMatrix& s : samples) {
    if (s.dim() != n) throw Error(ErrorKind::DimensionMismatch, "matrix samples differ in size");
    acc += s.matrix();
  }
  return HermitianMatrix::hermitize(acc * grid.weight());
}

}  // namespace klspec
