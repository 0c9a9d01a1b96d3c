#include <cmath>

#include <gtest/gtest.h>

#include "expect_error.hpp"
#include "instances.hpp"
#include "klspec/hermitian.hpp"
#include "oracle.hpp"

using namespace klspec;
using testing_support::Rng;

namespace {

oracle::Mat to_oracle(const HermitianMatrix& m) {
  oracle::Mat r(static_cast<std::size_t>(m.dim()));
  for (Eigen::Index i = 0; i < m.dim(); ++i)
    for (Eigen::Index j = 0; j < m.dim(); ++j)
      r(static_cast<std::size_t>(i), static_cast<std::size_t>(j)) =
          oracle::cplx(m(i, j).real(), m(i, j).imag());
  return r;
}

double max_abs_diff(const CMatrix& a, const oracle::Mat& b) {
  long double worst = 0;
  for (Eigen::Index i = 0; i < a.rows(); ++i)
    for (Eigen::Index j = 0; j < a.cols(); ++j) {
      const oracle::cplx d = oracle::cplx(a(i, j).real(), a(i, j).imag()) -
                             b(static_cast<std::size_t>(i), static_cast<std::size_t>(j));
      worst = std::max(worst, std::abs(d));
    }
  return static_cast<double>(worst);
}

}  // namespace

TEST(HermitianMatrix, RejectsAsymmetricInput) {
  CMatrix m(2, 2);
  m << 1.0, Complex(0.5, 0.1), Complex(0.5, 0.1), 2.0;  // (0,1) should be conj of (1,0)
  expect_error(ErrorKind::NonHermitianInput, [&] { HermitianMatrix h(m); });
}

TEST(HermitianMatrix, AcceptsRoundoffAndHermitizes) {
  CMatrix m(2, 2);
  m << 1.0, Complex(0.5, 0.1), Complex(0.5, -0.1 + 1e-14), 2.0;
  const HermitianMatrix h(m);
  EXPECT_EQ(h(0, 1), std::conj(h(1, 0)));
  EXPECT_EQ(h(0, 0).imag(), 0.0);
}

TEST(HermitianMatrix, RejectsNonFinite) {
  CMatrix m = CMatrix::Identity(2, 2);
  m(1, 1) = std::numeric_limits<double>::quiet_NaN();
  EXPECT_THROW(HermitianMatrix{m}, Error);
}

TEST(StateMatrix, RejectsIndefiniteAndWrongTrace) {
  expect_error(ErrorKind::InvalidStateMatrix, [] {
    CMatrix m(2, 2);
    m << 1.1, 0.0, 0.0, -0.1;
    StateMatrix s{HermitianMatrix(m)};
  });
  expect_error(ErrorKind::InvalidStateMatrix, [] {
    StateMatrix s{HermitianMatrix::identity(2) * 0.6};
  });
}

TEST(StateMatrix, ClampsTinyNegativeEigenvalues) {
  CMatrix m(2, 2);
  m << 1.0 + 5e-11, 0.0, 0.0, -5e-11;
  const StateMatrix s{HermitianMatrix(m)};
  EXPECT_EQ(s.min_eigenvalue(), 0.0);
  EXPECT_GE(min_eigenvalue(s.hermitian()), -1e-15);
  EXPECT_NEAR(s.trace(), 1.0, 1e-15);
}

TEST(StateMatrix, RenormalizesTraceOnce) {
  Rng rng(11);
  for (int rep = 0; rep < 50; ++rep) {
    const HermitianMatrix h = testing_support::with_spectrum(Eigen::Vector3d(0.2, 0.3, 0.5 + 5e-11), rng);
    const StateMatrix s{h};
    EXPECT_NEAR(s.trace(), 1.0, 4e-16);
  }
}

TEST(StateMatrix, RankOneIsReproducible) {
  Rng rng(3);
  const CVector x = testing_support::random_unit_vector(3, rng);
  const StateMatrix a = StateMatrix::rank_one(x);
  const StateMatrix b = StateMatrix::rank_one(x);
  EXPECT_EQ(a.matrix(), b.matrix());
  expect_error(ErrorKind::InvalidStateMatrix, [&] { StateMatrix::rank_one(2.0 * x); });
}

TEST(PrincipalSqrt, ScaledIdentity) {
  const HermitianMatrix s = principal_sqrt(StateMatrix::scaled_identity(2));
  EXPECT_LE((s.matrix() - CMatrix::Identity(2, 2) / std::sqrt(2.0)).norm(), 1e-15);
}

TEST(PrincipalSqrt, ProjectionIsItsOwnRoot) {
  Rng rng(5);
  for (Eigen::Index n = 2; n <= 4; ++n) {
    const StateMatrix p = StateMatrix::rank_one(testing_support::random_unit_vector(n, rng));
    EXPECT_LE((principal_sqrt(p).matrix() - p.matrix()).norm(), 1e-14);
    const HermitianMatrix s = principal_sqrt(p);
    EXPECT_LE((s.matrix() * s.matrix() - p.matrix()).norm(), 1e-10);
  }
}

TEST(PrincipalSqrt, MatchesExtendedPrecisionOracle) {
  Rng rng(17);
  for (int rep = 0; rep < 20; ++rep) {
    const StateMatrix m = testing_support::random_state(3, rng, 0.0);
    const oracle::Mat ref = oracle::spectral_map(
        to_oracle(m.hermitian()), [](oracle::real v) { return std::sqrt(std::max<oracle::real>(v, 0)); });
    EXPECT_LE(max_abs_diff(principal_sqrt(m).matrix(), ref), 1e-13);
  }
}

TEST(PrincipalSqrt, SquareReproducesInputProperty) {
  Rng rng(23);
  for (int rep = 0; rep < 200; ++rep) {
    const Eigen::Index n = 1 + rep % 6;
    const Eigen::Index r = 1 + static_cast<Eigen::Index>(rng() % static_cast<unsigned>(n));
    const StateMatrix m = testing_support::random_state_of_rank(n, r, rng);
    const HermitianMatrix s = principal_sqrt(m);
    EXPECT_GE(min_eigenvalue(s), -1e-12);
    const double scale = std::max(1.0, m.hermitian().frobenius_norm());
    EXPECT_LE((s.matrix() * s.matrix() - m.matrix()).norm(), 1e-10 * scale);
  }
}

TEST(PrincipalSqrt, GeneralHermitianRejectsIndefinite) {
  CMatrix m(2, 2);
  m << 1.0, 0.0, 0.0, -1e-3;
  expect_error(ErrorKind::InvalidStateMatrix, [&] { principal_sqrt(HermitianMatrix(m)); });
}

TEST(InverseSqrt, InvertsTheRoot) {
  Rng rng(29);
  const HermitianMatrix m = testing_support::with_spectrum(Eigen::Vector3d(0.5, 2.0, 4.0), rng);
  const HermitianMatrix w = inverse_sqrt(m);
  EXPECT_LE((w.matrix() * m.matrix() * w.matrix() - CMatrix::Identity(3, 3)).norm(), 1e-13);
  expect_error(ErrorKind::SigmaNotPositiveDefinite, [] { inverse_sqrt(HermitianMatrix::zero(2)); });
}

TEST(TraceInner, Examples) {
  EXPECT_DOUBLE_EQ(trace_inner(HermitianMatrix::identity(3), HermitianMatrix::identity(3)), 3.0);
  Rng rng(31);
  const HermitianMatrix x = testing_support::random_hermitian(4, rng) * 3.0;
  EXPECT_NEAR(trace_inner(x, x), x.frobenius_norm() * x.frobenius_norm(), 1e-13);
  for (int rep = 0; rep < 20; ++rep) {
    const CVector u = testing_support::random_unit_vector(3, rng);
    const CVector v = testing_support::random_unit_vector(3, rng);
    const double expected = std::norm(u.dot(v));
    EXPECT_NEAR(trace_inner(StateMatrix::rank_one(u).hermitian(), StateMatrix::rank_one(v).hermitian()),
                expected, 1e-14);
  }
  expect_error(ErrorKind::DimensionMismatch,
               [] { trace_inner(HermitianMatrix::identity(2), HermitianMatrix::identity(3)); });
}

TEST(TraceInner, SymmetricBilinearNonnegative) {
  Rng rng(37);
  std::uniform_real_distribution<double> ud(-2.0, 2.0);
  for (int rep = 0; rep < 100; ++rep) {
    const Eigen::Index n = 1 + rep % 5;
    const HermitianMatrix x = testing_support::random_hermitian(n, rng);
    const HermitianMatrix y = testing_support::random_hermitian(n, rng);
    const HermitianMatrix z = testing_support::random_hermitian(n, rng);
    const double a = ud(rng), b = ud(rng);
    EXPECT_NEAR(trace_inner(x, y), trace_inner(y, x), 1e-15);
    EXPECT_NEAR(trace_inner(x * a + y * b, z), a * trace_inner(x, z) + b * trace_inner(y, z), 1e-14);
    EXPECT_GE(trace_inner(x, x), 0.0);
  }
}

TEST(MinEigenvalue, Examples) {
  EXPECT_DOUBLE_EQ(min_eigenvalue(HermitianMatrix::identity(2) * 0.5), 0.5);
  CMatrix m(2, 2);
  m << 1.0, 0.0, 0.0, 0.0;
  EXPECT_EQ(min_eigenvalue(HermitianMatrix(m)), 0.0);
}

TEST(MinEigenvalue, MatchesJacobiOracle) {
  Rng rng(41);
  for (int rep = 0; rep < 50; ++rep) {
    const Eigen::Index n = 2 + rep % 5;
    const HermitianMatrix h = testing_support::random_hermitian(n, rng) * 5.0;
    const oracle::Eigen e = oracle::jacobi(to_oracle(h));
    EXPECT_NEAR(min_eigenvalue(h), static_cast<double>(e.values.front()), 1e-10);
  }
}

TEST(Eigenstructure, RankAndKernelProjector) {
  Rng rng(43);
  const HermitianMatrix h = testing_support::with_spectrum(Eigen::Vector4d(0.0, 0.0, 0.3, 0.7), rng);
  EXPECT_EQ(numerical_rank(h), 2);
  const HermitianMatrix k = kernel_projector(h);
  EXPECT_NEAR(k.trace(), 2.0, 1e-12);
  EXPECT_LE((k.matrix() * h.matrix()).norm(), 1e-12);
  EXPECT_LE((k.matrix() * k.matrix() - k.matrix()).norm(), 1e-12);
}

TEST(HermitianBasis, OrthonormalAndCoordinatesRoundTrip) {
  for (Eigen::Index n = 1; n <= 4; ++n) {
    const std::vector<HermitianMatrix> basis = hermitian_basis(n);
    ASSERT_EQ(static_cast<Eigen::Index>(basis.size()), n * n);
    for (size_t i = 0; i < basis.size(); ++i)
      for (size_t j = 0; j < basis.size(); ++j)
        EXPECT_NEAR(trace_inner(basis[i], basis[j]), i == j ? 1.0 : 0.0, 1e-15);
  }
  Rng rng(47);
  const HermitianMatrix x = testing_support::random_hermitian(3, rng);
  const Eigen::VectorXd c = real_coordinates(x);
  EXPECT_NEAR(c.norm(), x.frobenius_norm(), 1e-15);
  EXPECT_LE((from_real_coordinates(3, c) - x).frobenius_norm(), 1e-15);
}
